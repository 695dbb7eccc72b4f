//! Symbols as operator fields over `(x, pi)`, difference operators,
//! x-derivatives and the symbol-class seminorms.
//!
//! A symbol is stored as a short sum of terms `c_i(x) M_i(pi)`. A term without
//! a coefficient is x-independent ("broadcast"). Every construction used by
//! the calculus (multipliers, invariant operators, coefficient times
//! multiplier, difference operators, x-derivatives, sums) stays in this form,
//! so no per-(x, pi) storage is ever materialised.

use crate::error::{Error, Result};
use crate::fourier::{self, FourierField};
use crate::grid::{apply_x_beta, SampledFunction};
use crate::group::HomogeneousMultiIndex;
use crate::linalg;
use crate::par;
use crate::prelude::*;
use crate::repn::{Discretization, FrequencyGrid};

/// Class parameters `S^m_{rho, delta}` with the Rockland degree `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolClassParams {
    pub m: f64,
    pub rho: f64,
    pub delta: f64,
    pub nu: u32,
}

impl SymbolClassParams {
    pub fn new(m: f64, rho: f64, delta: f64, nu: u32) -> Result<Self> {
        if !(0.0 <= delta && delta <= rho && rho <= 1.0) || delta == 1.0 {
            return Err(Error::domain(format!(
                "need 0 <= delta <= rho <= 1 and delta != 1, got rho = {rho}, delta = {delta}"
            )));
        }
        if nu == 0 || nu % 2 == 1 {
            return Err(Error::domain("Rockland degree must be even and positive"));
        }
        Ok(SymbolClassParams { m, rho, delta, nu })
    }
}

/// One term `c(x) M(pi)`; `coeff = None` means `c = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTerm {
    pub coeff: Option<SampledFunction>,
    pub field: FourierField,
}

/// A symbol with its class metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub terms: Vec<SymbolTerm>,
    pub nodes: usize,
    pub dim: usize,
    pub order: f64,
    pub rho: f64,
    pub delta: f64,
    /// Regularity offsets of the boundedness condition; recorded, never used.
    pub gamma1: f64,
    pub gamma2: f64,
    pub label: String,
    /// Set when an intermediate kernel was not resolved on its box.
    pub warning: bool,
}

impl Symbol {
    /// x-independent symbol from a field.
    pub fn broadcast(field: FourierField, order: f64, label: &str) -> Self {
        let nodes = field.len();
        let dim = field.blocks.first().map(|b| b.nrows()).unwrap_or(0);
        let warning = field.warning;
        Symbol {
            terms: vec![SymbolTerm { coeff: None, field }],
            nodes,
            dim,
            order,
            rho: 1.0,
            delta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            label: label.to_string(),
            warning,
        }
    }

    pub fn identity(dual: &FrequencyGrid) -> Self {
        let d = dual.block_dim();
        Self::broadcast(FourierField::from_fn(dual, |_| CMat::identity(d, d)), 0.0, "identity")
    }

    pub fn zero(dual: &FrequencyGrid) -> Self {
        Symbol {
            terms: Vec::new(),
            nodes: dual.len(),
            dim: dual.block_dim(),
            order: 0.0,
            rho: 1.0,
            delta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            label: "zero".into(),
            warning: false,
        }
    }

    pub fn with_class(mut self, m: f64, rho: f64, delta: f64) -> Self {
        self.order = m;
        self.rho = rho;
        self.delta = delta;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn is_broadcast(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_none())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.field = t.field.scale(c);
        }
        out
    }

    /// Sum of two symbols on the same dual.
    pub fn add(&self, other: &Symbol) -> Result<Self> {
        if self.nodes != other.nodes || self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.nodes,
                got: other.nodes,
            });
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out.order = self.order.max(other.order);
        out.warning |= other.warning;
        out.label = format!("{}+{}", self.label, other.label);
        Ok(out)
    }

    /// Sum of the x-independent terms.
    pub fn broadcast_part(&self) -> FourierField {
        let mut acc: Option<FourierField> = None;
        for t in self.terms.iter().filter(|t| t.coeff.is_none()) {
            acc = Some(match acc {
                None => t.field.clone(),
                Some(a) => a.add(&t.field).expect("terms share the dual"),
            });
        }
        acc.unwrap_or_else(|| FourierField {
            blocks: (0..self.nodes).map(|_| CMat::zeros(self.dim, self.dim)).collect(),
            warning: false,
        })
    }

    /// Node-wise conjugate transpose; only defined for x-independent symbols.
    pub fn adjoint(&self) -> Result<Self> {
        if !self.is_broadcast() {
            return Err(Error::Unsupported(
                "adjoint symbols of x-dependent symbols need the full composition calculus".into(),
            ));
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            t.field = t.field.adjoint();
        }
        out.label = format!("{}*", self.label);
        Ok(out)
    }

    /// The field `pi -> sigma(x, pi)` at grid node `x_index`.
    pub fn field_at(&self, x_index: usize) -> FourierField {
        let mut acc = FourierField {
            blocks: (0..self.nodes).map(|_| CMat::zeros(self.dim, self.dim)).collect(),
            warning: self.warning,
        };
        for t in &self.terms {
            let c = t.coeff.as_ref().map(|c| c.values[x_index]).unwrap_or(C64::new(1.0, 0.0));
            for (a, b) in acc.blocks.iter_mut().zip(&t.field.blocks) {
                *a += b * c;
            }
        }
        acc
    }

    /// Grid on which the coefficients live, if any.
    pub fn coefficient_grid(&self) -> Option<&crate::grid::GroupGrid> {
        self.terms.iter().find_map(|t| t.coeff.as_ref().map(|c| &c.grid))
    }
}

fn check_finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{what} returned a non-finite value")))
    }
}

/// `sigma(pi) = phi(pi(R))` through the spectral calculus.
pub fn from_multiplier(phi: &(dyn Fn(f64) -> f64 + Sync), dual: &FrequencyGrid, m: f64) -> Result<Symbol> {
    let blocks: Vec<Result<CMat>> = par::map(dual.len(), |i| match dual.rockland_diagonal(i) {
        Some(diag) => {
            let vals: Result<Vec<C64>> = diag
                .iter()
                .map(|&mu| check_finite(phi(mu), "multiplier").map(|v| C64::new(v, 0.0)))
                .collect();
            Ok(CMat::from_diagonal(&nalgebra::DVector::from_vec(vals?)))
        }
        None => {
            let r = dual.rockland_at(i);
            let bad = core::cell::Cell::new(false);
            let out = linalg::hermitian_function(&r, |mu| {
                let v = phi(mu.max(0.0));
                if !v.is_finite() {
                    bad.set(true);
                }
                v
            });
            if bad.get() {
                Err(Error::domain("multiplier returned a non-finite value"))
            } else {
                Ok(out)
            }
        }
    });
    let blocks: Result<Vec<CMat>> = blocks.into_iter().collect();
    Ok(Symbol::broadcast(FourierField { blocks: blocks?, warning: false }, m, "multiplier"))
}

/// Outcome of the numerical admissibility check `|phi^(a)(mu)| <= C (1+mu)^{m/nu - a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierCheck {
    /// Smallest admissible constant on the lattice, per derivative order.
    pub constants: Vec<f64>,
    /// Whether every ratio is finite and none grows towards the end of the lattice.
    pub passes: bool,
}

/// Checks the multiplier condition for derivative orders `0..=a_max` on a
/// geometric lattice of `mu` values in `[0, mu_max]`.
pub fn check_multiplier(phi: &dyn Fn(f64) -> f64, m: f64, nu: u32, a_max: usize, mu_max: f64) -> MultiplierCheck {
    let pts = 400;
    let lattice: Vec<f64> = (0..pts)
        .map(|i| (((1.0 + mu_max).ln()) * i as f64 / (pts - 1) as f64).exp() - 1.0)
        .collect();
    let mut constants = Vec::new();
    let mut passes = true;
    for a in 0..=a_max {
        let ratios: Vec<f64> = lattice
            .iter()
            .map(|&mu| {
                let h = 1e-2 * (1.0 + mu);
                let d = fd_derivative(phi, mu + a as f64 * h, a, h);
                d.abs() * (1.0 + mu).powf(a as f64 - m / nu as f64)
            })
            .collect();
        let sup = ratios.iter().cloned().fold(0.0, f64::max);
        let head = ratios[..pts / 2].iter().cloned().fold(0.0, f64::max);
        let tail = ratios[pts - 1];
        if !sup.is_finite() || tail > head * (1.0 + 1e-9) + f64::MIN_POSITIVE {
            passes = false;
        }
        constants.push(sup);
    }
    MultiplierCheck { constants, passes }
}

fn fd_derivative(phi: &dyn Fn(f64) -> f64, x: f64, a: usize, h: f64) -> f64 {
    // Central a-th difference; callers shift x so that all samples are >= 0.
    let mut binom = 1.0;
    let mut acc = 0.0;
    for k in 0..=a {
        let sign = if (a - k) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * phi(x + (k as f64 - a as f64 / 2.0) * h);
        binom = binom * (a - k) as f64 / (k + 1) as f64;
    }
    acc / h.powi(a as i32)
}

/// Symbol `pi(X)^alpha` of the invariant operator `X^alpha`, order `[alpha]`.
pub fn from_invariant_operator(alpha: &HomogeneousMultiIndex, d: &Discretization) -> Result<Symbol> {
    let n = d.structure.dim();
    if alpha.alpha.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: alpha.alpha.len(),
        });
    }
    let order = alpha.degree(d.structure.weights()) as f64;
    let dual = &d.dual;
    let dim = dual.block_dim();
    let blocks = match dual {
        FrequencyGrid::Heisenberg(h) => {
            // Products of tridiagonal generators are exact on the leading block
            // when assembled with |alpha| extra modes.
            let pad = alpha.order() as usize;
            let big = h.truncation() + pad;
            par::map(dual.len(), |i| {
                let l = h.lambdas[i];
                let mut acc = CMat::identity(big + 1, big + 1);
                for (j, &p) in alpha.alpha.iter().enumerate() {
                    let g = crate::repn::generator_matrix(l, j + 1, big).expect("nonzero node");
                    for _ in 0..p {
                        acc = &acc * &g;
                    }
                }
                linalg::block(&acc, dim)
            })
        }
        FrequencyGrid::Abelian(a) => par::map(dual.len(), |i| {
            let xi = a.xi(i);
            let mut v = C64::new(1.0, 0.0);
            for (j, &p) in alpha.alpha.iter().enumerate() {
                v *= C64::new(0.0, xi[j]).powu(p);
            }
            CMat::from_element(1, 1, v)
        }),
    };
    Ok(Symbol::broadcast(FourierField { blocks, warning: false }, order, "invariant"))
}

/// `sigma(x, pi) = a(x) phi(pi(R))` with real `a`.
pub fn from_coefficient_and_multiplier(
    a: &SampledFunction,
    phi: &(dyn Fn(f64) -> f64 + Sync),
    dual: &FrequencyGrid,
    m: f64,
) -> Result<Symbol> {
    let scale = a.sup_norm().max(1.0);
    if a.values.iter().any(|v| v.im.abs() > 1e-14 * scale) {
        return Err(Error::domain("coefficient must be real-valued"));
    }
    let mut s = from_multiplier(phi, dual, m)?;
    s.terms[0].coeff = Some(a.clone());
    s.label = "coeff_multiplier".into();
    Ok(s)
}

/// Difference operator `Delta^alpha`: `(Delta^alpha f^) = (x^alpha f)^`, applied
/// to each term's field through inversion, monomial multiplication and the
/// forward transform on the discretization grid.
pub fn difference_op(sigma: &Symbol, alpha: &HomogeneousMultiIndex, d: &Discretization) -> Result<Symbol> {
    if alpha.is_zero() {
        return Ok(sigma.clone());
    }
    let mut out = sigma.clone();
    for t in &mut out.terms {
        let kernel = fourier::inverse(&t.field, &d.grid, &d.dual)?;
        out.warning |= kernel.boundary_flag;
        let moved = kernel.monomial_multiply(alpha)?;
        let mut f = fourier::forward(&moved, &d.dual)?;
        f.warning = kernel.boundary_flag;
        t.field = f;
    }
    Ok(out)
}

/// Left-invariant derivative `X_x^beta` acting on the x-dependence.
pub fn x_derivative(sigma: &Symbol, beta: &HomogeneousMultiIndex, d: &Discretization) -> Result<Symbol> {
    if beta.is_zero() {
        return Ok(sigma.clone());
    }
    let mut out = sigma.clone();
    out.terms = Vec::new();
    for t in &sigma.terms {
        if let Some(c) = &t.coeff {
            out.terms.push(SymbolTerm {
                coeff: Some(apply_x_beta(&d.structure, beta, c)?),
                field: t.field.clone(),
            });
        }
    }
    Ok(out)
}

/// Distinct values of `(c_i(x))_i` over the coefficient terms, in a fixed
/// order. Node-wise quantities of `sigma` only depend on this tuple.
pub(crate) fn distinct_coefficient_tuples(sigma: &Symbol) -> Vec<Vec<C64>> {
    let coeffs: Vec<&SampledFunction> = sigma.terms.iter().filter_map(|t| t.coeff.as_ref()).collect();
    let Some(first) = coeffs.first() else {
        return vec![Vec::new()];
    };
    let mut tuples: Vec<Vec<C64>> = (0..first.values.len())
        .map(|p| coeffs.iter().map(|c| c.values[p]).collect())
        .collect();
    tuples.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o != core::cmp::Ordering::Equal {
                return o;
            }
        }
        core::cmp::Ordering::Equal
    });
    tuples.dedup();
    tuples
}

/// `sum_i c_i M_i(pi)` at node `i` for a coefficient tuple (broadcast terms use 1).
pub(crate) fn block_for_tuple(sigma: &Symbol, node: usize, tuple: &[C64]) -> CMat {
    let mut acc = CMat::zeros(sigma.dim, sigma.dim);
    let mut q = 0;
    for t in &sigma.terms {
        match t.coeff {
            None => acc += &t.field.blocks[node],
            Some(_) => {
                acc += &t.field.blocks[node] * tuple[q];
                q += 1;
            }
        }
    }
    acc
}

/// `pi(I+R)^{e_left} M pi(I+R)^{e_right}` at node `i`.
fn sandwich(dual: &FrequencyGrid, i: usize, m: &CMat, e_left: f64, e_right: f64) -> CMat {
    match dual.rockland_diagonal(i) {
        Some(diag) => {
            let l: Vec<f64> = diag.iter().map(|mu| (1.0 + mu).powf(e_left)).collect();
            let r: Vec<f64> = diag.iter().map(|mu| (1.0 + mu).powf(e_right)).collect();
            CMat::from_fn(m.nrows(), m.ncols(), |a, b| m[(a, b)] * (l[a] * r[b]))
        }
        None => dual.spectral_power_at(i, e_left) * m * dual.spectral_power_at(i, e_right),
    }
}

/// Max over nodes of the retained-block operator norm of
/// `sum_i c_i(x) L M_i(pi) R` where `L`, `R` are spectral powers.
pub(crate) fn sup_norm_of_sandwich(sigma: &Symbol, d: &Discretization, e_left: f64, e_right: f64) -> f64 {
    let dual = &d.dual;
    let keep = dual.retained_dim();
    let sandwiched: Vec<Vec<CMat>> = sigma
        .terms
        .iter()
        .map(|t| par::map(dual.len(), |i| sandwich(dual, i, &t.field.blocks[i], e_left, e_right)))
        .collect();
    let coeff_terms: Vec<usize> = (0..sigma.terms.len()).filter(|&k| sigma.terms[k].coeff.is_some()).collect();
    let base: Vec<CMat> = (0..dual.len())
        .map(|i| {
            let mut acc = CMat::zeros(sigma.dim, sigma.dim);
            for (k, t) in sigma.terms.iter().enumerate() {
                if t.coeff.is_none() {
                    acc += &sandwiched[k][i];
                }
            }
            acc
        })
        .collect();
    if coeff_terms.is_empty() {
        return par::map(dual.len(), |i| linalg::block_op_norm(&base[i], keep))
            .into_iter()
            .fold(0.0, f64::max);
    }
    let has_base = sigma.terms.len() > coeff_terms.len();
    if coeff_terms.len() == 1 && !has_base {
        let k = coeff_terms[0];
        let cmax = sigma.terms[k].coeff.as_ref().expect("coefficient term").sup_norm();
        let m = par::map(dual.len(), |i| linalg::block_op_norm(&sandwiched[k][i], keep))
            .into_iter()
            .fold(0.0, f64::max);
        return cmax * m;
    }
    let tuples = distinct_coefficient_tuples(sigma);
    par::map(tuples.len(), |u| {
        let mut worst: f64 = 0.0;
        for i in 0..dual.len() {
            let mut acc = base[i].clone();
            for (q, &k) in coeff_terms.iter().enumerate() {
                acc += &sandwiched[k][i] * tuples[u][q];
            }
            worst = worst.max(linalg::block_op_norm(&acc, keep));
        }
        worst
    })
    .into_iter()
    .fold(0.0, f64::max)
}

fn check_nu(params: &SymbolClassParams, d: &Discretization) -> Result<()> {
    if params.nu != d.dual.rockland().nu {
        return Err(Error::domain(format!(
            "class degree nu = {} does not match the Rockland operator (nu = {})",
            params.nu,
            d.dual.rockland().nu
        )));
    }
    Ok(())
}

fn derived(sigma: &Symbol, alpha: &HomogeneousMultiIndex, beta: &HomogeneousMultiIndex, d: &Discretization) -> Result<Symbol> {
    x_derivative(&difference_op(sigma, alpha, d)?, beta, d)
}

fn weighted_sup(
    derived: &Symbol,
    alpha: &HomogeneousMultiIndex,
    beta: &HomogeneousMultiIndex,
    gamma: f64,
    params: &SymbolClassParams,
    d: &Discretization,
) -> f64 {
    let w = d.structure.weights();
    let (da, db) = (alpha.degree(w) as f64, beta.degree(w) as f64);
    let nu = params.nu as f64;
    let e_left = (params.rho * da - params.m - params.delta * db + gamma) / nu;
    sup_norm_of_sandwich(derived, d, e_left, -gamma / nu)
}

/// Symbol-class seminorm: the max over `(x, pi)` nodes of the retained-block
/// operator norm of
/// `pi(I+R)^{(rho[alpha] - m - delta[beta] + gamma)/nu} X_x^beta Delta^alpha sigma pi(I+R)^{-gamma/nu}`.
pub fn seminorm(
    sigma: &Symbol,
    alpha: &HomogeneousMultiIndex,
    beta: &HomogeneousMultiIndex,
    gamma: f64,
    params: &SymbolClassParams,
    d: &Discretization,
) -> Result<f64> {
    check_nu(params, d)?;
    let ds = derived(sigma, alpha, beta, d)?;
    Ok(weighted_sup(&ds, alpha, beta, gamma, params, d))
}

/// One row of a class report.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub gamma: f64,
    pub baseline: f64,
    pub refined: f64,
    /// `refined / baseline` (1 when both vanish).
    pub ratio: f64,
}

/// Seminorms over all `(alpha, beta, gamma)` combinations at two resolutions.
pub fn class_report(
    base: (&Symbol, &Discretization),
    refined: (&Symbol, &Discretization),
    params: &SymbolClassParams,
    alphas: &[HomogeneousMultiIndex],
    betas: &[HomogeneousMultiIndex],
    gammas: &[f64],
) -> Result<Vec<ClassRow>> {
    check_nu(params, base.1)?;
    check_nu(params, refined.1)?;
    let mut rows = Vec::new();
    for a in alphas {
        for b in betas {
            let d0 = derived(base.0, a, b, base.1)?;
            let d1 = derived(refined.0, a, b, refined.1)?;
            for &g in gammas {
                let v0 = weighted_sup(&d0, a, b, g, params, base.1);
                let v1 = weighted_sup(&d1, a, b, g, params, refined.1);
                let ratio = if v0 == 0.0 && v1 == 0.0 { 1.0 } else { v1 / v0 };
                rows.push(ClassRow {
                    alpha: a.alpha.clone(),
                    beta: b.alpha.clone(),
                    gamma: g,
                    baseline: v0,
                    refined: v1,
                    ratio,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GroupGrid;
    use crate::group::GradedStructure;
    use crate::repn::{HeisenbergDual, HeisenbergParams, RocklandSpec};

    fn small() -> Discretization {
        let mut p = HeisenbergParams::ladder(0);
        p.truncation = 10;
        p.panels = 4;
        p.nodes_per_panel = 4;
        p.lambda_max = 5.0;
        p.sublaplacian_cutoff = Some(30.0);
        let grid = GroupGrid::cube(3, 4.0, 17).unwrap();
        Discretization::new(
            GradedStructure::heisenberg1(),
            grid,
            FrequencyGrid::Heisenberg(HeisenbergDual::new(p).unwrap()),
        )
        .unwrap()
    }

    fn zero3() -> HomogeneousMultiIndex {
        HomogeneousMultiIndex::zero(3)
    }

    #[test]
    fn class_params_are_validated() {
        assert!(SymbolClassParams::new(0.0, 1.0, 0.0, 2).is_ok());
        assert!(SymbolClassParams::new(0.0, 0.5, 0.7, 2).is_err());
        assert!(SymbolClassParams::new(0.0, 1.0, 1.0, 2).is_err());
        assert!(SymbolClassParams::new(0.0, 1.0, 0.0, 3).is_err());
    }

    #[test]
    fn constant_multiplier_is_identity() {
        let d = small();
        let s = from_multiplier(&|_| 1.0, &d.dual, 0.0).unwrap();
        assert_eq!(s.terms[0].field, Symbol::identity(&d.dual).terms[0].field);
        assert!(s.is_broadcast());
    }

    #[test]
    fn square_root_multiplier_equals_spectral_power() {
        let d = small();
        let s = from_multiplier(&|mu| (1.0 + mu).sqrt(), &d.dual, 1.0).unwrap();
        for i in 0..d.dual.len() {
            let sp = d.dual.spectral_power_at(i, 0.5);
            for (a, b) in s.terms[0].field.blocks[i].iter().zip(sp.iter()) {
                assert!((a - b).norm() <= 2.0 * f64::EPSILON * b.norm());
            }
        }
    }

    #[test]
    fn non_finite_multiplier_is_rejected() {
        let d = small();
        assert!(matches!(
            from_multiplier(&|mu| 1.0 / (mu - mu), &d.dual, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn heat_multiplier_is_admissible_with_very_negative_order() {
        let c = check_multiplier(&|mu| (-mu).exp(), -20.0, 2, 4, 200.0);
        assert!(c.passes, "{c:?}");
        assert!(c.constants.iter().all(|v| v.is_finite()));
        let bad = check_multiplier(&|mu| (1.0 + mu).powi(2), 2.0, 2, 2, 200.0);
        assert!(!bad.passes);
    }

    #[test]
    fn invariant_symbols() {
        let d = small();
        let id = from_invariant_operator(&zero3(), &d).unwrap();
        assert_eq!(id.order, 0.0);
        assert_eq!(id.terms[0].field, Symbol::identity(&d.dual).terms[0].field);
        let t = from_invariant_operator(&HomogeneousMultiIndex::new(vec![0, 0, 1]), &d).unwrap();
        assert_eq!(t.order, 2.0);
        if let FrequencyGrid::Heisenberg(h) = &d.dual {
            for (i, l) in h.lambdas.iter().enumerate() {
                assert_eq!(t.terms[0].field.blocks[i], CMat::identity(11, 11) * C64::new(0.0, *l));
            }
        }
        let xx = from_invariant_operator(&HomogeneousMultiIndex::new(vec![2, 0, 0]), &d).unwrap();
        let r = from_invariant_operator(&HomogeneousMultiIndex::new(vec![0, 2, 0]), &d).unwrap();
        // -(X^2 + Y^2) is the diagonal sub-Laplacian on the whole block.
        for i in 0..d.dual.len() {
            let sub = -(&xx.terms[0].field.blocks[i] + &r.terms[0].field.blocks[i]);
            let want = d.dual.rockland_at(i);
            assert!((sub - want).iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn coefficient_symbols_and_x_derivatives() {
        let d = small();
        let one = SampledFunction::from_real_fn(&d.grid, |_| 1.0);
        let s = from_coefficient_and_multiplier(&one, &|mu| (-mu).exp(), &d.dual, -10.0).unwrap();
        let m = from_multiplier(&|mu| (-mu).exp(), &d.dual, -10.0).unwrap();
        assert_eq!(s.field_at(123), m.field_at(0));
        // Broadcast symbols have vanishing x-derivatives.
        let zero = x_derivative(&m, &HomogeneousMultiIndex::new(vec![1, 0, 0]), &d).unwrap();
        assert!(zero.is_zero());
        assert_eq!(x_derivative(&m, &zero3(), &d).unwrap(), m);
        // a(x) = x_1: X_1 a = 1 away from the faces.
        let x1 = SampledFunction::from_real_fn(&d.grid, |x| x[0]);
        let s = from_coefficient_and_multiplier(&x1, &|mu| (-mu).exp(), &d.dual, -10.0).unwrap();
        let ds = x_derivative(&s, &HomogeneousMultiIndex::new(vec![1, 0, 0]), &d).unwrap();
        let c = ds.terms[0].coeff.as_ref().unwrap();
        for (p, v) in c.values.iter().enumerate() {
            if !d.grid.on_boundary(p) {
                assert!((v - C64::new(1.0, 0.0)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn complex_coefficient_is_rejected() {
        let d = small();
        let a = SampledFunction::from_fn(&d.grid, |x| C64::new(1.0, x[0]));
        assert!(from_coefficient_and_multiplier(&a, &|_| 1.0, &d.dual, 0.0).is_err());
    }

    #[test]
    fn zero_difference_is_bitwise_identity() {
        let d = small();
        let s = from_multiplier(&|mu| (-mu).exp(), &d.dual, -10.0).unwrap();
        assert_eq!(difference_op(&s, &zero3(), &d).unwrap(), s);
    }

    #[test]
    fn seminorm_examples() {
        let d = small();
        let p0 = SymbolClassParams::new(0.0, 1.0, 0.0, 2).unwrap();
        let id = Symbol::identity(&d.dual);
        for g in [0.0, 2.0, -2.0, 0.7] {
            let v = seminorm(&id, &zero3(), &zero3(), g, &p0, &d).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
        let p2 = SymbolClassParams::new(2.0, 1.0, 0.0, 2).unwrap();
        let sp = from_multiplier(&|mu| 1.0 + mu, &d.dual, 2.0).unwrap();
        assert_eq!(seminorm(&sp, &zero3(), &zero3(), 0.0, &p2, &d).unwrap(), 1.0);
        let c = C64::new(-2.5, 1.0);
        let v1 = seminorm(&id.scale(c), &zero3(), &zero3(), 0.0, &p0, &d).unwrap();
        assert!((v1 - c.norm()).abs() < 1e-12);
        let wrong = SymbolClassParams::new(0.0, 1.0, 0.0, 4).unwrap();
        assert!(seminorm(&id, &zero3(), &zero3(), 0.0, &wrong, &d).is_err());
    }

    #[test]
    fn seminorm_with_coefficient_uses_coefficient_sup() {
        let d = small();
        let a = SampledFunction::from_real_fn(&d.grid, |x| 1.0 + x[0].tanh());
        let s = from_coefficient_and_multiplier(&a, &|mu| 1.0 + mu, &d.dual, 2.0).unwrap();
        let p = SymbolClassParams::new(2.0, 1.0, 0.0, 2).unwrap();
        let v = seminorm(&s, &zero3(), &zero3(), 0.0, &p, &d).unwrap();
        assert!((v - (1.0 + 4f64.tanh())).abs() < 1e-12);
        // Mixed broadcast + coefficient terms go through the tuple path.
        let mixed = s.add(&Symbol::identity(&d.dual)).unwrap();
        let p0 = SymbolClassParams::new(2.0, 1.0, 0.0, 2).unwrap();
        let v = seminorm(&mixed, &zero3(), &zero3(), 0.0, &p0, &d).unwrap();
        assert!(v > 1.0 && v.is_finite());
    }

    #[test]
    fn adjoint_only_for_broadcast() {
        let d = small();
        let t = from_invariant_operator(&HomogeneousMultiIndex::new(vec![1, 0, 0]), &d).unwrap();
        let ta = t.adjoint().unwrap();
        assert_eq!(ta.terms[0].field, t.terms[0].field.scale(C64::new(-1.0, 0.0)));
        let a = SampledFunction::from_real_fn(&d.grid, |x| x[0]);
        let s = from_coefficient_and_multiplier(&a, &|_| 1.0, &d.dual, 0.0).unwrap();
        assert!(matches!(s.adjoint(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn graded_backend_multiplier_is_hermitian() {
        let mut p = HeisenbergParams::ladder(0);
        p.truncation = 8;
        p.panels = 2;
        p.nodes_per_panel = 3;
        p.rockland = RocklandSpec::graded_powers(&GradedStructure::heisenberg1());
        let dual = FrequencyGrid::Heisenberg(HeisenbergDual::new(p).unwrap());
        let s = from_multiplier(&|mu| (-mu / 10.0).exp(), &dual, -10.0).unwrap();
        for b in &s.terms[0].field.blocks {
            assert!((b - b.adjoint()).iter().all(|v| v.norm() < 1e-12));
        }
    }
}
