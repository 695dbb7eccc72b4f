//! Graded Lie algebra structure, the group law in exponential coordinates,
//! dilations, homogeneous norms and left-invariant vector fields.

use crate::error::{Error, Result};
use crate::prelude::*;

/// A graded nilpotent Lie algebra in a basis adapted to the gradation.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedStructure {
    name: String,
    weights: Vec<u32>,
    /// `c[(j * n + k) * n + l]` is the coefficient of `X_l` in `[X_j, X_k]`.
    c: Vec<f64>,
    step: u32,
    nu0: u32,
}

/// A point of the group in exponential coordinates of the first kind.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub coords: Vec<f64>,
}

/// A multi-index together with the weights that define its homogeneous degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomogeneousMultiIndex {
    pub alpha: Vec<u32>,
}

/// Polynomial coefficients `p_k(x)` of a left-invariant field `sum_k p_k(x) d_k`.
///
/// Each polynomial is a list of `(coefficient, exponents)` monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCoeffs {
    pub terms: Vec<Vec<(f64, Vec<u32>)>>,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl GradedStructure {
    /// Builds a structure from weights and the brackets `[X_j, X_k] = c X_l`
    /// (1-based indices, `j < k` or `j > k`; antisymmetry is filled in).
    pub fn new(
        name: &str,
        weights: &[u32],
        brackets: &[(usize, usize, usize, f64)],
        nu0: Option<u32>,
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Structure("empty basis".into()));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::Structure("weights must be positive".into()));
        }
        if weights.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Structure("weights must be nondecreasing".into()));
        }
        let mut c = vec![0.0; n * n * n];
        for &(j, k, l, v) in brackets {
            for &idx in &[j, k, l] {
                if idx == 0 || idx > n {
                    return Err(Error::Index { index: idx, n });
                }
            }
            if j == k && v != 0.0 {
                return Err(Error::Structure(format!("[X_{j}, X_{j}] must vanish")));
            }
            c[((j - 1) * n + (k - 1)) * n + (l - 1)] = v;
            c[((k - 1) * n + (j - 1)) * n + (l - 1)] = -v;
        }
        let lcm = weights.iter().fold(1u32, |acc, &w| acc / gcd(acc, w) * w);
        let nu0 = nu0.unwrap_or(lcm);
        if weights.iter().any(|&w| nu0 % w != 0) {
            return Err(Error::Structure(format!(
                "nu0 = {nu0} is not a common multiple of the weights"
            )));
        }
        let mut s = GradedStructure {
            name: name.to_string(),
            weights: weights.to_vec(),
            c,
            step: 1,
            nu0,
        };
        if !s.check_gradation() {
            return Err(Error::Structure(
                "bracket violates the gradation: weight of [X_j,X_k] must be w_j + w_k".into(),
            ));
        }
        if s.jacobi_residual() > 1e-12 {
            return Err(Error::Structure("Jacobi identity fails".into()));
        }
        s.step = s.compute_step();
        if s.step > 3 {
            return Err(Error::Unsupported(format!(
                "step {} exceeds the closed BCH form (step <= 3)",
                s.step
            )));
        }
        Ok(s)
    }

    /// The three-dimensional Heisenberg group: `[X, Y] = T`, weights `(1, 1, 2)`.
    pub fn heisenberg1() -> Self {
        Self::new("heisenberg1", &[1, 1, 2], &[(1, 2, 3, 1.0)], None)
            .expect("built-in structure is valid")
    }

    /// Abelian `R^n` with all weights equal to one.
    pub fn abelian(n: usize) -> Self {
        Self::new(&format!("abelian:{n}"), &vec![1; n], &[], None)
            .expect("built-in structure is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Topological dimension.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Homogeneous dimension: the sum of the weights.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.weights.iter().sum()
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn nu0(&self) -> u32 {
        self.nu0
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
    }

    /// Structure constant `c_{jk}^l` with 0-based indices.
    pub fn constant(&self, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim();
        self.c[(j * n + k) * n + l]
    }

    /// Lie bracket of two algebra elements given in the basis.
    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for j in 0..n {
            if a[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                if b[k] == 0.0 {
                    continue;
                }
                let ab = a[j] * b[k];
                for (l, o) in out.iter_mut().enumerate() {
                    *o += ab * self.c[(j * n + k) * n + l];
                }
            }
        }
        out
    }

    /// Matrix of `ad(X_j)` acting on coordinate vectors (row `l`, column `k`).
    pub fn ad(&self, j: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|l| (0..n).map(|k| self.constant(j, k, l)).collect())
            .collect()
    }

    /// Largest Jacobi residual over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let e = |i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (x, y, z) = (e(a), e(b), e(c));
                    let t1 = self.bracket(&x, &self.bracket(&y, &z));
                    let t2 = self.bracket(&y, &self.bracket(&z, &x));
                    let t3 = self.bracket(&z, &self.bracket(&x, &y));
                    for l in 0..n {
                        worst = worst.max((t1[l] + t2[l] + t3[l]).abs());
                    }
                }
            }
        }
        worst
    }

    /// `c_{jk}^l != 0` implies `w_l = w_j + w_k`.
    pub fn check_gradation(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| {
            (0..n).all(|k| {
                (0..n).all(|l| {
                    self.constant(j, k, l) == 0.0
                        || self.weights[l] == self.weights[j] + self.weights[k]
                })
            })
        })
    }

    /// Every `ad(X_j)` is nilpotent of index at most `step + 1`.
    pub fn check_nilpotent(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| {
            let ad = self.ad(j);
            let mut p = ad.clone();
            for _ in 0..self.step {
                p = matmul(&p, &ad);
            }
            p.iter().all(|row| row.iter().all(|&v| v == 0.0))
        })
    }

    fn compute_step(&self) -> u32 {
        // The lower central series terminates after at most max-weight steps.
        let n = self.dim();
        let mut span: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        let mut step = 0;
        while !span.is_empty() {
            step += 1;
            let mut next = Vec::new();
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                for v in &span {
                    let b = self.bracket(&e, v);
                    if b.iter().any(|&x| x != 0.0) {
                        next.push(b);
                    }
                }
            }
            span = next;
            if step > 64 {
                break;
            }
        }
        step
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// Group law via the Baker–Campbell–Hausdorff formula, exact up to step 3.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_len(a.coords.len())?;
        self.check_len(b.coords.len())?;
        Ok(GroupElement {
            coords: self.multiply_raw(&a.coords, &b.coords),
        })
    }

    pub(crate) fn multiply_raw(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        if self.step >= 2 {
            let ab = self.bracket(a, b);
            for (zi, v) in z.iter_mut().zip(&ab) {
                *zi += 0.5 * v;
            }
            if self.step >= 3 {
                let ba = ab.iter().map(|v| -v).collect::<Vec<_>>();
                let aab = self.bracket(a, &ab);
                let bba = self.bracket(b, &ba);
                for l in 0..z.len() {
                    z[l] += (aab[l] + bba[l]) / 12.0;
                }
            }
        }
        z
    }

    /// Inverse element: coordinate negation.
    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        a.inverse()
    }

    /// Dilation `D_r`: coordinate `j` scaled by `r^{w_j}`.
    pub fn dilate(&self, r: f64, x: &GroupElement) -> Result<GroupElement> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("dilation factor {r} must be positive")));
        }
        self.check_len(x.coords.len())?;
        Ok(GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&self.weights)
                .map(|(v, &w)| v * r.powi(w as i32))
                .collect(),
        })
    }

    /// Homogeneous quasi-norm `(sum_j |x_j|^{2 nu0 / w_j})^{1 / (2 nu0)}`.
    pub fn homogeneous_norm(&self, x: &GroupElement) -> f64 {
        self.norm_raw(&x.coords)
    }

    pub(crate) fn norm_raw(&self, x: &[f64]) -> f64 {
        let p = 2 * self.nu0;
        let s: f64 = x
            .iter()
            .zip(&self.weights)
            .map(|(v, &w)| v.abs().powi((p / w) as i32))
            .sum();
        if s == 0.0 {
            0.0
        } else {
            s.powf(1.0 / p as f64)
        }
    }

    /// Homogeneous degree `[alpha] = sum_j w_j alpha_j`.
    pub fn homogeneous_degree(&self, alpha: &HomogeneousMultiIndex) -> Result<u32> {
        self.check_len(alpha.alpha.len())?;
        Ok(alpha.degree(&self.weights))
    }

    /// Coefficients of `X_j f(x) = d/dtau f(x exp(tau X_j))` as a first-order
    /// operator `sum_k p_k(x) d_k` with polynomial `p_k` (`j` is 1-based).
    pub fn left_invariant_field_coeffs(&self, j: usize) -> Result<FieldCoeffs> {
        let n = self.dim();
        if j == 0 || j > n {
            return Err(Error::Index { index: j, n });
        }
        let j = j - 1;
        let mut terms: Vec<Vec<(f64, Vec<u32>)>> = vec![Vec::new(); n];
        terms[j].push((1.0, vec![0; n]));
        // First order in tau of x + tau e_j + [x, tau e_j]/2 + [x, [x, tau e_j]]/12.
        for l in 0..n {
            for k in 0..n {
                let v = self.constant(l, j, k);
                if v != 0.0 {
                    let mut e = vec![0; n];
                    e[l] = 1;
                    push_monomial(&mut terms[k], 0.5 * v, e);
                }
            }
        }
        if self.step >= 3 {
            for l in 0..n {
                for m in 0..n {
                    for p in 0..n {
                        let inner = self.constant(m, j, p);
                        if inner == 0.0 {
                            continue;
                        }
                        for k in 0..n {
                            let v = self.constant(l, p, k) * inner;
                            if v != 0.0 {
                                let mut e = vec![0; n];
                                e[l] += 1;
                                e[m] += 1;
                                push_monomial(&mut terms[k], v / 12.0, e);
                            }
                        }
                    }
                }
            }
        }
        for poly in &mut terms {
            poly.retain(|(c, _)| *c != 0.0);
        }
        Ok(FieldCoeffs { terms })
    }
}

fn push_monomial(poly: &mut Vec<(f64, Vec<u32>)>, c: f64, e: Vec<u32>) {
    if let Some(slot) = poly.iter_mut().find(|(_, ex)| *ex == e) {
        slot.0 += c;
    } else {
        poly.push((c, e));
    }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

impl FieldCoeffs {
    /// Evaluates every `p_k` at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.terms
            .iter()
            .map(|poly| {
                poly.iter()
                    .map(|(c, e)| {
                        c * e
                            .iter()
                            .zip(x)
                            .map(|(&p, &v)| v.powi(p as i32))
                            .product::<f64>()
                    })
                    .sum()
            })
            .collect()
    }
}

impl GroupElement {
    pub fn new(coords: Vec<f64>) -> Self {
        GroupElement { coords }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            coords: vec![0.0; n],
        }
    }

    pub fn inverse(&self) -> Self {
        GroupElement {
            coords: self.coords.iter().map(|v| -v).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&v| v == 0.0)
    }
}

impl HomogeneousMultiIndex {
    pub fn new(alpha: Vec<u32>) -> Self {
        HomogeneousMultiIndex { alpha }
    }

    pub fn zero(n: usize) -> Self {
        HomogeneousMultiIndex {
            alpha: vec![0; n],
        }
    }

    /// Unit multi-index `e_j` (0-based `j`).
    pub fn unit(n: usize, j: usize) -> Self {
        let mut alpha = vec![0; n];
        alpha[j] = 1;
        HomogeneousMultiIndex { alpha }
    }

    pub fn degree(&self, weights: &[u32]) -> u32 {
        self.alpha.iter().zip(weights).map(|(a, w)| a * w).sum()
    }

    /// Length `|alpha|`.
    pub fn order(&self) -> u32 {
        self.alpha.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        HomogeneousMultiIndex {
            alpha: self
                .alpha
                .iter()
                .zip(&other.alpha)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}
