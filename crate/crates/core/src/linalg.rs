//! Small dense linear-algebra helpers on complex matrices.

use nalgebra::linalg::SymmetricEigen;

use crate::prelude::*;

/// Top-left `b x b` block.
pub fn block(a: &CMat, b: usize) -> CMat {
    let b = b.min(a.nrows()).min(a.ncols());
    a.view((0, 0), (b, b)).into_owned()
}

/// Largest singular value of the top-left `b x b` block.
pub fn block_op_norm(a: &CMat, b: usize) -> f64 {
    let m = block(a, b);
    if m.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Hermitian part `(A + A^*) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of the Hermitian part of the top-left `b x b` block.
pub fn hermitian_eigenvalues(a: &CMat, b: usize) -> Vec<f64> {
    let h = hermitian_part(&block(a, b));
    SymmetricEigen::new(h).eigenvalues.iter().cloned().collect()
}

/// Applies a real function to a Hermitian matrix through its eigenbasis.
pub fn hermitian_function(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let eig = SymmetricEigen::new(h.clone());
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &CMat) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(0.5f64.powi(s), 0.0);
    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |k: usize| C64::new(B[k], 0.0);
    let u_inner = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9))
        + &a6 * c(7)
        + &a4 * c(5)
        + &a2 * c(3)
        + &id * c(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8)) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}
