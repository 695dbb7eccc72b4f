//! Representation backends and the discretized dual.
//!
//! Heisenberg: the Schrödinger representation `pi_lambda` with
//! `pi(X) = d/du`, `pi(Y) = i lambda u`, `pi(T) = i lambda` acting on
//! `L^2(R)`, written in the Hermite basis scaled by `|lambda|`. In that basis
//! `pi(X)` and `u` are real tridiagonal and the sub-Laplacian is diagonal with
//! entries `|lambda| (2k + 1)`.
//!
//! Group elements are mapped to the top-left `(N+1) x (N+1)` compression of
//! the exact unitary operator. The matrix entries come from the closed-form
//! displacement-operator recurrence: with `a` the lowering operator,
//! `pi_lambda(x, y, t) = e^{i lambda t} exp(alpha a^* - conj(alpha) a)` and
//! `alpha = sqrt(|lambda|/2) (-x + i sgn(lambda) y)`. A reference route that
//! exponentiates the generator on a padded basis is kept for cross-checks.
//!
//! Abelian: scalar characters `e^{i xi . x}` on a lattice matched to the group
//! grid, stored as `1 x 1` blocks so that the generic pipeline runs unchanged.

use crate::error::{Error, Result};
use crate::grid::GroupGrid;
use crate::group::{GradedStructure, GroupElement};
use crate::linalg;
use crate::prelude::*;
use crate::quadrature;

/// Which Rockland operator drives the spectral calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RocklandKind {
    /// `R = -(X^2 + Y^2)` on the Heisenberg group, `-Laplacian` on `R^n`.
    Sublaplacian,
    /// `R = X^4 + Y^4 - T^2` on the Heisenberg group.
    GradedPowers,
}

/// A positive Rockland operator and its homogeneous degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RocklandSpec {
    pub kind: RocklandKind,
    pub nu: u32,
}

impl RocklandSpec {
    pub fn sublaplacian() -> Self {
        RocklandSpec {
            kind: RocklandKind::Sublaplacian,
            nu: 2,
        }
    }

    /// `sum_j (-1)^{nu0/w_j} X_j^{2 nu0 / w_j}` with degree `2 nu0`.
    pub fn graded_powers(s: &GradedStructure) -> Self {
        RocklandSpec {
            kind: RocklandKind::GradedPowers,
            nu: 2 * s.nu0(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.kind == RocklandKind::Sublaplacian
    }
}

/// Tail buffer excluded from block-restricted assertions: `ceil(0.2 (N+1))`.
pub fn tail_buffer(n: usize) -> usize {
    (2 * (n + 1) + 9) / 10
}

/// Size of the retained block `N + 1 - B`.
pub fn retained(n: usize) -> usize {
    n + 1 - tail_buffer(n)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::domain(
            "lambda = 0 is not in the support of the Plancherel measure",
        ));
    }
    Ok(())
}

fn real_matrix(dim: usize, f: impl Fn(usize, usize) -> f64) -> CMat {
    CMat::from_fn(dim, dim, |i, j| C64::new(f(i, j), 0.0))
}

/// `pi_lambda(d/du)`: `D_{k,k+1} = sqrt(|lambda| (k+1) / 2) = -D_{k+1,k}`.
fn d_matrix(lambda: f64, dim: usize) -> CMat {
    real_matrix(dim, |i, j| {
        if j == i + 1 {
            (lambda.abs() * j as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            -(lambda.abs() * i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// Multiplication by `u`: `U_{k,k+1} = U_{k+1,k} = sqrt((k+1) / (2 |lambda|))`.
fn u_matrix(lambda: f64, dim: usize) -> CMat {
    real_matrix(dim, |i, j| {
        if j == i + 1 {
            (j as f64 / (2.0 * lambda.abs())).sqrt()
        } else if i == j + 1 {
            (i as f64 / (2.0 * lambda.abs())).sqrt()
        } else {
            0.0
        }
    })
}

/// Truncated infinitesimal generator `pi_lambda(X_j)` (`j` is 1-based).
pub fn generator_matrix(lambda: f64, j: usize, n: usize) -> Result<CMat> {
    check_lambda(lambda)?;
    let dim = n + 1;
    match j {
        1 => Ok(d_matrix(lambda, dim)),
        2 => Ok(u_matrix(lambda, dim) * C64::new(0.0, lambda)),
        3 => Ok(CMat::identity(dim, dim) * C64::new(0.0, lambda)),
        _ => Err(Error::Index { index: j, n: 3 }),
    }
}

/// Truncated Rockland operator `pi_lambda(R)`.
pub fn rockland_matrix(lambda: f64, spec: &RocklandSpec, n: usize) -> Result<CMat> {
    check_lambda(lambda)?;
    let dim = n + 1;
    Ok(match spec.kind {
        RocklandKind::Sublaplacian => CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            (0..dim).map(|k| C64::new(lambda.abs() * (2 * k + 1) as f64, 0.0)),
        )),
        RocklandKind::GradedPowers => {
            // Entries of fourth powers of tridiagonal matrices only reach two
            // rows beyond the block, so a padded product is exact on the block.
            let p = dim + 4;
            let d = d_matrix(lambda, p);
            let u = u_matrix(lambda, p) * C64::new(lambda, 0.0);
            let d2 = &d * &d;
            let u2 = &u * &u;
            let r = &d2 * &d2 + &u2 * &u2 + CMat::identity(p, p) * C64::new(lambda * lambda, 0.0);
            linalg::block(&r, dim)
        }
    })
}

/// Spectral power `pi_lambda(I + R)^gamma`.
pub fn spectral_power(lambda: f64, spec: &RocklandSpec, gamma: f64, n: usize) -> Result<CMat> {
    check_lambda(lambda)?;
    let dim = n + 1;
    Ok(match spec.kind {
        RocklandKind::Sublaplacian => CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            (0..dim).map(|k| C64::new((1.0 + lambda.abs() * (2 * k + 1) as f64).powf(gamma), 0.0)),
        )),
        RocklandKind::GradedPowers => {
            let r = rockland_matrix(lambda, spec, n)?;
            linalg::hermitian_function(&r, |mu| (1.0 + mu).powf(gamma))
        }
    })
}

/// Fills `out` (row-major, `k x k`) with `<m| exp(alpha a^* - conj(alpha) a) |n>`.
pub(crate) fn displacement_block(k: usize, alpha: C64, sqrt: &[f64], out: &mut [C64]) {
    if k == 0 {
        return;
    }
    let ac = alpha.conj();
    out[0] = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..k - 1 {
        out[n + 1] = -ac * out[n] / sqrt[n + 1];
    }
    for m in 0..k - 1 {
        let inv = 1.0 / sqrt[m + 1];
        let (head, tail) = out.split_at_mut((m + 1) * k);
        let prev = &head[m * k..];
        let next = &mut tail[..k];
        next[0] = alpha * prev[0] * inv;
        for n in 1..k {
            next[n] = (prev[n - 1] * sqrt[n] + alpha * prev[n]) * inv;
        }
    }
}

pub(crate) fn sqrt_table(k: usize) -> Vec<f64> {
    (0..=k).map(|i| (i as f64).sqrt()).collect()
}

/// Displacement parameter of `pi_lambda` at `(x, y)`.
pub(crate) fn alpha_of(lambda: f64, x: f64, y: f64) -> C64 {
    let c = (lambda.abs() / 2.0).sqrt();
    C64::new(-c * x, c * lambda.signum() * y)
}

/// Compression of the displacement operator `D(alpha)` to `(N+1) x (N+1)`.
pub fn displacement(n: usize, alpha: C64) -> CMat {
    let k = n + 1;
    let mut buf = vec![C64::new(0.0, 0.0); k * k];
    displacement_block(k, alpha, &sqrt_table(k), &mut buf);
    CMat::from_row_slice(k, k, &buf)
}

fn check_h1(g: &GroupElement) -> Result<()> {
    if g.coords.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: g.coords.len(),
        });
    }
    Ok(())
}

/// Compression of `pi_lambda(g)` to the first `N+1` Hermite modes.
pub fn group_rep_matrix(lambda: f64, g: &GroupElement, n: usize) -> Result<CMat> {
    check_lambda(lambda)?;
    check_h1(g)?;
    let (x, y, t) = (g.coords[0], g.coords[1], g.coords[2]);
    Ok(displacement(n, alpha_of(lambda, x, y)) * C64::new(0.0, lambda * t).exp())
}

/// Reference route: exponential of `x pi(X) + y pi(Y) + t pi(T)` assembled on
/// `N + 1 + pad` modes, then compressed to the leading `N + 1`.
pub fn group_rep_matrix_expm(lambda: f64, g: &GroupElement, n: usize, pad: usize) -> Result<CMat> {
    check_lambda(lambda)?;
    check_h1(g)?;
    let m = n + pad;
    let a = generator_matrix(lambda, 1, m)? * C64::new(g.coords[0], 0.0)
        + generator_matrix(lambda, 2, m)? * C64::new(g.coords[1], 0.0)
        + generator_matrix(lambda, 3, m)? * C64::new(g.coords[2], 0.0);
    Ok(linalg::block(&linalg::expm(&a), n + 1))
}

/// Character `e^{i xi . x}` of `R^n`.
pub fn abelian_character(xi: &[f64], x: &[f64]) -> C64 {
    let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
    C64::new(0.0, phase).exp()
}

/// Default Plancherel constant for the Heisenberg group with this convention.
pub fn default_plancherel() -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    1.0 / (two_pi * two_pi)
}

/// Parameters of the Heisenberg lambda-quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergParams {
    pub lambda_min: f64,
    pub lambda_knee: f64,
    pub lambda_max: f64,
    /// Geometric panels on `[lambda_min, lambda_knee]`.
    pub graded_panels: usize,
    /// Uniform panels on `[lambda_knee, lambda_max]`.
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Hermite truncation `N`; blocks are `(N+1) x (N+1)`.
    pub truncation: usize,
    /// Modes with `|lambda| (2k+1)` above this value are discarded by the
    /// transform (anti-aliasing band limit of the spatial grid).
    pub sublaplacian_cutoff: Option<f64>,
    pub plancherel: f64,
    pub rockland: RocklandSpec,
}

impl HeisenbergParams {
    /// Resolution ladder used by the experiments (`refine` in 0..=2).
    pub fn ladder(refine: u8) -> Self {
        let (lmin, graded, lmax, panels, n, cutoff) = match refine {
            0 => (0.05, 4, 12.0, 11, 24, 150.0),
            1 => (0.025, 5, 15.0, 14, 32, 234.0),
            _ => (0.0125, 6, 18.0, 17, 40, 337.0),
        };
        HeisenbergParams {
            lambda_min: lmin,
            lambda_knee: 1.0,
            lambda_max: lmax,
            graded_panels: graded,
            panels,
            nodes_per_panel: 8,
            truncation: n,
            sublaplacian_cutoff: Some(cutoff),
            plancherel: default_plancherel(),
            rockland: RocklandSpec::sublaplacian(),
        }
    }
}

/// Heisenberg dual: symmetric lambda nodes with Plancherel-weighted quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergDual {
    pub params: HeisenbergParams,
    pub lambdas: Vec<f64>,
    /// Gauss–Legendre weights without the Plancherel density.
    pub base_weights: Vec<f64>,
    /// `base_weight * c_P * |lambda|`.
    pub weights: Vec<f64>,
    /// Leading modes kept per node after the band limit.
    pub kept: Vec<usize>,
}

impl HeisenbergDual {
    pub fn new(params: HeisenbergParams) -> Result<Self> {
        let p = &params;
        if !(p.lambda_min > 0.0) || !(p.lambda_max > p.lambda_min) {
            return Err(Error::domain("need 0 < lambda_min < lambda_max"));
        }
        if p.nodes_per_panel == 0 || p.panels + p.graded_panels == 0 {
            return Err(Error::domain("quadrature needs at least one panel and node"));
        }
        if p.truncation == 0 {
            return Err(Error::domain("Hermite truncation N must be positive"));
        }
        if p.rockland.nu == 0 || p.rockland.nu % 2 == 1 {
            return Err(Error::domain("Rockland degree must be even and positive"));
        }
        let edges = if p.graded_panels == 0 || p.lambda_knee <= p.lambda_min || p.lambda_knee >= p.lambda_max {
            quadrature::graded_edges(p.lambda_min, p.lambda_max, p.lambda_max, p.panels.max(1), 0)
        } else {
            quadrature::graded_edges(p.lambda_min, p.lambda_knee, p.lambda_max, p.graded_panels, p.panels)
        };
        let (pos, w) = quadrature::composite(&edges, p.nodes_per_panel);
        let mut lambdas: Vec<f64> = pos.iter().rev().map(|l| -l).collect();
        lambdas.extend_from_slice(&pos);
        let mut base_weights: Vec<f64> = w.iter().rev().cloned().collect();
        base_weights.extend_from_slice(&w);
        let dim = p.truncation + 1;
        let kept = lambdas
            .iter()
            .map(|l| match p.sublaplacian_cutoff {
                Some(c) => (0..dim).take_while(|&k| l.abs() * (2 * k + 1) as f64 <= c).count(),
                None => dim,
            })
            .collect();
        let mut dual = HeisenbergDual {
            params,
            lambdas,
            weights: Vec::new(),
            base_weights,
            kept,
        };
        dual.set_plancherel(dual.params.plancherel);
        Ok(dual)
    }

    pub fn set_plancherel(&mut self, c: f64) {
        self.params.plancherel = c;
        self.weights = self
            .lambdas
            .iter()
            .zip(&self.base_weights)
            .map(|(l, w)| w * c * l.abs())
            .collect();
    }

    pub fn truncation(&self) -> usize {
        self.params.truncation
    }
}

/// Abelian dual: the lattice `xi = m pi / L`, `m = -M/2 .. M/2 - 1`, `M = n - 1`,
/// which is exactly the discrete Fourier lattice of the grid's distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelianDual {
    pub dim: usize,
    pub half_width: f64,
    pub axis: Vec<f64>,
    /// Weight per node, `(dxi / 2 pi)^dim`.
    pub weight: f64,
}

impl AbelianDual {
    pub fn for_grid(grid: &GroupGrid) -> Result<Self> {
        let n = grid.points_per_axis();
        let l = grid.half_widths()[0];
        if grid.half_widths().iter().any(|&h| h != l) || n % 2 == 0 {
            return Err(Error::domain(
                "the abelian lattice needs a cube grid with an odd number of points",
            ));
        }
        let m = (n - 1) as i64;
        let dxi = core::f64::consts::PI / l;
        let axis = (-m / 2..m / 2).map(|j| j as f64 * dxi).collect();
        Ok(AbelianDual {
            dim: grid.dim(),
            half_width: l,
            axis,
            weight: (1.0 / (2.0 * l)).powi(grid.dim() as i32),
        })
    }

    pub fn len(&self) -> usize {
        self.axis.len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn xi(&self, mut i: usize) -> Vec<f64> {
        let m = self.axis.len();
        let mut out = vec![0.0; self.dim];
        for d in (0..self.dim).rev() {
            out[d] = self.axis[i % m];
            i /= m;
        }
        out
    }
}

/// The discretized unitary dual.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyGrid {
    Heisenberg(HeisenbergDual),
    Abelian(AbelianDual),
}

impl FrequencyGrid {
    pub fn len(&self) -> usize {
        match self {
            FrequencyGrid::Heisenberg(h) => h.lambdas.len(),
            FrequencyGrid::Abelian(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Side of the per-node blocks.
    pub fn block_dim(&self) -> usize {
        match self {
            FrequencyGrid::Heisenberg(h) => h.truncation() + 1,
            FrequencyGrid::Abelian(_) => 1,
        }
    }

    /// Side of the retained block used for norms and suprema.
    pub fn retained_dim(&self) -> usize {
        match self {
            FrequencyGrid::Heisenberg(h) => retained(h.truncation()),
            FrequencyGrid::Abelian(_) => 1,
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        match self {
            FrequencyGrid::Heisenberg(h) => h.weights[i],
            FrequencyGrid::Abelian(a) => a.weight,
        }
    }

    /// Number of leading modes the transform keeps at node `i`.
    pub fn kept(&self, i: usize) -> usize {
        match self {
            FrequencyGrid::Heisenberg(h) => h.kept[i],
            FrequencyGrid::Abelian(_) => 1,
        }
    }

    pub fn rockland(&self) -> RocklandSpec {
        match self {
            FrequencyGrid::Heisenberg(h) => h.params.rockland,
            FrequencyGrid::Abelian(_) => RocklandSpec::sublaplacian(),
        }
    }

    pub fn backend_name(&self) -> &'static str {
        match self {
            FrequencyGrid::Heisenberg(_) => "heisenberg",
            FrequencyGrid::Abelian(_) => "abelian",
        }
    }

    /// `pi(R)` at node `i`.
    pub fn rockland_at(&self, i: usize) -> CMat {
        match self {
            FrequencyGrid::Heisenberg(h) => {
                rockland_matrix(h.lambdas[i], &h.params.rockland, h.truncation()).expect("nonzero node")
            }
            FrequencyGrid::Abelian(a) => {
                let xi = a.xi(i);
                CMat::from_element(1, 1, C64::new(xi.iter().map(|v| v * v).sum(), 0.0))
            }
        }
    }

    /// `pi(I + R)^gamma` at node `i`.
    pub fn spectral_power_at(&self, i: usize, gamma: f64) -> CMat {
        match self {
            FrequencyGrid::Heisenberg(h) => {
                spectral_power(h.lambdas[i], &h.params.rockland, gamma, h.truncation()).expect("nonzero node")
            }
            FrequencyGrid::Abelian(a) => {
                let xi = a.xi(i);
                let mu: f64 = xi.iter().map(|v| v * v).sum();
                CMat::from_element(1, 1, C64::new((1.0 + mu).powf(gamma), 0.0))
            }
        }
    }

    /// Diagonal of `pi(R)` when it is diagonal on this backend.
    pub fn rockland_diagonal(&self, i: usize) -> Option<Vec<f64>> {
        match self {
            FrequencyGrid::Heisenberg(h) if h.params.rockland.is_diagonal() => {
                let l = h.lambdas[i].abs();
                Some((0..=h.truncation()).map(|k| l * (2 * k + 1) as f64).collect())
            }
            FrequencyGrid::Heisenberg(_) => None,
            FrequencyGrid::Abelian(a) => Some(vec![a.xi(i).iter().map(|v| v * v).sum()]),
        }
    }

    /// `pi(X_j)` at node `i` (1-based `j`).
    pub fn generator_at(&self, i: usize, j: usize) -> Result<CMat> {
        match self {
            FrequencyGrid::Heisenberg(h) => generator_matrix(h.lambdas[i], j, h.truncation()),
            FrequencyGrid::Abelian(a) => {
                if j == 0 || j > a.dim {
                    return Err(Error::Index { index: j, n: a.dim });
                }
                Ok(CMat::from_element(1, 1, C64::new(0.0, a.xi(i)[j - 1])))
            }
        }
    }
}

/// A group structure together with its spatial grid and discretized dual.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub structure: GradedStructure,
    pub grid: GroupGrid,
    pub dual: FrequencyGrid,
}

impl Discretization {
    pub fn new(structure: GradedStructure, grid: GroupGrid, dual: FrequencyGrid) -> Result<Self> {
        if grid.dim() != structure.dim() {
            return Err(Error::Dimension {
                expected: structure.dim(),
                got: grid.dim(),
            });
        }
        match (&dual, structure.dim()) {
            (FrequencyGrid::Heisenberg(_), 3) if !structure.is_abelian() => {}
            (FrequencyGrid::Abelian(a), n) if structure.is_abelian() && a.dim == n => {}
            _ => {
                return Err(Error::Backend(format!(
                    "{} dual does not match structure {}",
                    dual.backend_name(),
                    structure.name()
                )))
            }
        }
        Ok(Discretization {
            structure,
            grid,
            dual,
        })
    }

    /// Heisenberg discretization on the resolution ladder with box half-width `l`.
    ///
    /// The grid spacing follows the ladder (0.25, 0.2, 1/6) so that the
    /// band limit stays below the grid's Nyquist frequency.
    pub fn heisenberg(refine: u8, half_width: f64) -> Result<Self> {
        let h = match refine {
            0 => 0.25,
            1 => 0.2,
            _ => 1.0 / 6.0,
        };
        let points = (2.0 * half_width / h).round() as usize + 1;
        let grid = GroupGrid::cube(3, half_width, points)?;
        let dual = FrequencyGrid::Heisenberg(HeisenbergDual::new(HeisenbergParams::ladder(refine))?);
        Self::new(GradedStructure::heisenberg1(), grid, dual)
    }

    /// Abelian `R^dim` on a cube grid with its matching Fourier lattice.
    pub fn abelian(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        let grid = GroupGrid::cube(dim, half_width, points)?;
        let dual = FrequencyGrid::Abelian(AbelianDual::for_grid(&grid)?);
        Self::new(GradedStructure::abelian(dim), grid, dual)
    }

    /// Same dual on a different spatial grid.
    pub fn with_grid(&self, grid: GroupGrid) -> Result<Self> {
        Self::new(self.structure.clone(), grid, self.dual.clone())
    }
}
