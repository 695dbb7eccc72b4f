//! Quantization `Op(sigma)`, convolution kernels and their decay, and the
//! power-iteration estimate of the L2 operator norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fourier::{self, FourierField};
use crate::grid::{GroupGrid, SampledFunction};
use crate::par;
use crate::prelude::*;
use crate::repn::{alpha_of, displacement_block, sqrt_table, Discretization, FrequencyGrid};
use crate::symbol::Symbol;

fn check_coefficients(sigma: &Symbol, f: &SampledFunction) -> Result<()> {
    if let Some(g) = sigma.coefficient_grid() {
        if *g != f.grid {
            return Err(Error::Dimension {
                expected: g.len(),
                got: f.values.len(),
            });
        }
    }
    if sigma.nodes != 0 && sigma.terms.iter().any(|t| t.field.len() != sigma.nodes) {
        return Err(Error::Structure("symbol terms live on different duals".into()));
    }
    Ok(())
}

fn apply_terms(
    sigma: &Symbol,
    fhat: &FourierField,
    grid: &GroupGrid,
    dual: &FrequencyGrid,
    adjoint_fields: bool,
) -> Result<SampledFunction> {
    let field_of = |f: &FourierField| if adjoint_fields { f.adjoint() } else { f.clone() };
    let mut out = SampledFunction::zeros(grid);
    let broadcast: Vec<_> = sigma.terms.iter().filter(|t| t.coeff.is_none()).collect();
    if !broadcast.is_empty() {
        let mut b = field_of(&broadcast[0].field);
        for t in &broadcast[1..] {
            b = b.add(&field_of(&t.field))?;
        }
        out = fourier::inverse(&b.compose(fhat)?, grid, dual)?;
    }
    for t in sigma.terms.iter().filter(|t| t.coeff.is_some()) {
        let g = fourier::inverse(&field_of(&t.field).compose(fhat)?, grid, dual)?;
        out = out.add(&g.mul(t.coeff.as_ref().expect("coefficient term"))?)?;
    }
    Ok(out)
}

/// `Op(sigma) f (x) = sum_pi w_pi tr(pi(x) sigma(x, pi) f^(pi))`.
pub fn op_apply(sigma: &Symbol, f: &SampledFunction, d: &Discretization) -> Result<SampledFunction> {
    check_coefficients(sigma, f)?;
    let fhat = fourier::forward(f, &d.dual)?;
    let mut out = apply_terms(sigma, &fhat, &f.grid, &d.dual, false)?;
    out.boundary_flag = f.boundary_flag;
    Ok(out)
}

/// `Op(sigma) f` evaluated on another grid; x-independent symbols only, since
/// coefficients are sampled on the input grid.
pub fn op_apply_to_grid(
    sigma: &Symbol,
    f: &SampledFunction,
    d: &Discretization,
    out_grid: &GroupGrid,
) -> Result<SampledFunction> {
    if !sigma.is_broadcast() {
        return Err(Error::Unsupported(
            "evaluation on another grid needs an x-independent symbol".into(),
        ));
    }
    let fhat = fourier::forward(f, &d.dual)?;
    let mut out = fourier::inverse(&sigma.broadcast_part().compose(&fhat)?, out_grid, &d.dual)?;
    out.boundary_flag = f.boundary_flag;
    Ok(out)
}

/// Adjoint of the discrete `Op(sigma)`: for a term `c(x) M(pi)` this is
/// `Op(M^*)(conj(c) g)`. Exact for the grid inner product because the
/// discrete inverse transform is the adjoint of the forward one.
pub fn adjoint_apply(sigma: &Symbol, g: &SampledFunction, d: &Discretization) -> Result<SampledFunction> {
    check_coefficients(sigma, g)?;
    let mut out = SampledFunction::zeros(&g.grid);
    let broadcast: Vec<_> = sigma.terms.iter().filter(|t| t.coeff.is_none()).collect();
    if !broadcast.is_empty() {
        let mut b = broadcast[0].field.clone();
        for t in &broadcast[1..] {
            b = b.add(&t.field)?;
        }
        let gh = fourier::forward(g, &d.dual)?;
        out = fourier::inverse(&b.adjoint().compose(&gh)?, &g.grid, &d.dual)?;
    }
    for t in sigma.terms.iter().filter(|t| t.coeff.is_some()) {
        let cg = g.mul(&t.coeff.as_ref().expect("coefficient term").conj())?;
        let h = fourier::forward(&cg, &d.dual)?;
        out = out.add(&fourier::inverse(&t.field.adjoint().compose(&h)?, &g.grid, &d.dual)?)?;
    }
    out.boundary_flag = g.boundary_flag;
    Ok(out)
}

/// Convolution kernel `kappa_x` of `Op(sigma)` at a base point; the integral
/// kernel is `K(x, y) = kappa_x(y^{-1} x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSlice {
    pub base: Vec<f64>,
    pub kernel: SampledFunction,
}

impl KernelSlice {
    /// The argument `y^{-1} x` at which `K(x, y)` reads the kernel.
    pub fn kernel_argument(&self, d: &Discretization, y: &[f64]) -> Vec<f64> {
        let yi: Vec<f64> = y.iter().map(|v| -v).collect();
        d.structure.multiply_raw(&yi, &self.base)
    }
}

/// `kappa_x` sampled on `grid`, with `x` the coefficient-grid node `x_index`.
pub fn kernel_slice(sigma: &Symbol, x_index: usize, grid: &GroupGrid, d: &Discretization) -> Result<KernelSlice> {
    let field = sigma.field_at(x_index);
    let kernel = fourier::inverse(&field, grid, &d.dual)?;
    let base = match sigma.coefficient_grid() {
        Some(g) => g.coords(x_index),
        None => d.grid.coords(x_index),
    };
    Ok(KernelSlice { base, kernel })
}

/// Statistics of `|kappa|` on one homogeneous-norm shell.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub r_lo: f64,
    pub r_hi: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

/// Shell statistics of a sampled kernel.
pub fn kernel_shells(k: &SampledFunction, s: &crate::group::GradedStructure, edges: &[f64]) -> Vec<Shell> {
    let mut shells: Vec<Shell> = edges
        .windows(2)
        .map(|e| Shell {
            r_lo: e[0],
            r_hi: e[1],
            max: 0.0,
            mean: 0.0,
            count: 0,
        })
        .collect();
    for (p, v) in k.values.iter().enumerate() {
        let r = s.norm_raw(&k.grid.coords(p));
        if let Some(sh) = shells.iter_mut().find(|sh| r >= sh.r_lo && r < sh.r_hi) {
            let a = v.norm();
            sh.max = sh.max.max(a);
            sh.mean += a;
            sh.count += 1;
        }
    }
    for sh in &mut shells {
        if sh.count > 0 {
            sh.mean /= sh.count as f64;
        }
    }
    shells
}

/// Far-field constant for one power `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarField {
    pub power: u32,
    /// `sup_{|q| >= 1} |kappa(q)| |q|^M` over the far grid.
    pub constant: f64,
    /// `1 - max_{|q| ~ 4} |kappa| / (C_M 4^{-M})`.
    pub margin: f64,
}

/// Near- and far-field decay statistics of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub near_shells: Vec<Shell>,
    pub near_slope: f64,
    pub near_ci: (f64, f64),
    /// `-(Q + m) / rho`.
    pub near_bound: f64,
    pub far: Vec<FarField>,
    /// The near-field slope is steeper than `-Q` (distributional kernel).
    pub slope_below_minus_q: bool,
    /// Some near shell held fewer than 30 samples and was left out of the fit.
    pub partial: bool,
}

pub const MIN_SHELL_SAMPLES: usize = 30;

/// Decay report of `kappa_x` for the symbol at coefficient node `x_index`.
///
/// The near field is fitted on 8 logarithmic shells of `|q|` in `[0.1, 1]`,
/// each sampled on its own box of radius equal to the outer shell edge; the
/// far field uses `far_grid`.
pub fn decay_report(
    sigma: &Symbol,
    x_index: usize,
    d: &Discretization,
    m: f64,
    rho: f64,
    far_grid: &GroupGrid,
) -> Result<DecayReport> {
    if !(rho > 0.0) {
        return Err(Error::domain("rho must be positive"));
    }
    let s = &d.structure;
    let q = s.homogeneous_dimension() as f64;
    let field = sigma.field_at(x_index);
    let nshell = 8;
    let edges: Vec<f64> = (0..=nshell).map(|k| 0.1 * 10f64.powf(k as f64 / nshell as f64)).collect();
    let mut near_shells = Vec::new();
    for e in edges.windows(2) {
        let hw: Vec<f64> = s.weights().iter().map(|&w| e[1].powi(w as i32)).collect();
        let grid = GroupGrid::boxed(&hw, 17)?;
        let k = fourier::inverse(&field, &grid, &d.dual)?;
        near_shells.extend(kernel_shells(&k, s, e));
    }
    let used: Vec<&Shell> = near_shells
        .iter()
        .filter(|sh| sh.count >= MIN_SHELL_SAMPLES && sh.max > 0.0)
        .collect();
    let partial = used.len() < near_shells.len();
    let (slope, se) = if used.len() >= 3 {
        let xs: Vec<f64> = used.iter().map(|sh| (sh.r_lo * sh.r_hi).sqrt().ln()).collect();
        let ys: Vec<f64> = used.iter().map(|sh| sh.max.ln()).collect();
        fit_line(&xs, &ys)
    } else {
        (f64::NAN, f64::NAN)
    };

    let far_kernel = fourier::inverse(&field, far_grid, &d.dual)?;
    let mut far = Vec::new();
    for mpow in [2u32, 4, 6] {
        let mut c: f64 = 0.0;
        let mut at4: f64 = 0.0;
        for (p, v) in far_kernel.values.iter().enumerate() {
            let r = s.norm_raw(&far_grid.coords(p));
            if r >= 1.0 {
                c = c.max(v.norm() * r.powi(mpow as i32));
            }
            if (3.8..=4.2).contains(&r) {
                at4 = at4.max(v.norm());
            }
        }
        let margin = if c > 0.0 { 1.0 - at4 / (c * 4f64.powi(-(mpow as i32))) } else { f64::NAN };
        far.push(FarField {
            power: mpow,
            constant: c,
            margin,
        });
    }
    Ok(DecayReport {
        near_shells,
        near_slope: slope,
        near_ci: (slope - 1.96 * se, slope + 1.96 * se),
        near_bound: -(q + m) / rho,
        far,
        slope_below_minus_q: slope < -q,
        partial,
    })
}

/// Least-squares slope and its standard error.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let se = if xs.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, se)
}

/// Direct evaluation of `sum_y w_y f(y) kappa(y^{-1} x)` for a broadcast
/// symbol on the Heisenberg backend. The kernel is summed exactly over the
/// dual for every pair of nodes, so the cost is quadratic in the grid size.
pub fn convolve_direct(sigma: &Symbol, f: &SampledFunction, d: &Discretization) -> Result<SampledFunction> {
    if !sigma.is_broadcast() {
        return Err(Error::Unsupported("direct convolution needs an x-independent symbol".into()));
    }
    let h = match &d.dual {
        FrequencyGrid::Heisenberg(h) => h,
        FrequencyGrid::Abelian(_) => return Err(Error::Backend("direct convolution is implemented for H1".into())),
    };
    let grid = &f.grid;
    if grid.dim() != 3 {
        return Err(Error::Backend("heisenberg convolution needs a 3-dimensional grid".into()));
    }
    let n = grid.points_per_axis();
    let hx = [grid.spacing(0), grid.spacing(1), grid.spacing(2)];
    let field = sigma.broadcast_part();
    let nodes = h.lambdas.len();
    let dim = h.truncation() + 1;
    let sq = sqrt_table(dim);
    let span = 2 * n - 1;
    // g[p][lambda] = w tr(D(alpha(p)) sigma) for every planar lattice difference p.
    let g: Vec<Vec<C64>> = par::map(span * span, |pi| {
        let p1 = (pi / span) as f64 - (n - 1) as f64;
        let p2 = (pi % span) as f64 - (n - 1) as f64;
        let mut buf = vec![C64::new(0.0, 0.0); dim * dim];
        (0..nodes)
            .map(|i| {
                let k = h.kept[i];
                if k == 0 {
                    return C64::new(0.0, 0.0);
                }
                displacement_block(k, alpha_of(h.lambdas[i], p1 * hx[0], p2 * hx[1]), &sq, &mut buf);
                let b = &field.blocks[i];
                let mut tr = C64::new(0.0, 0.0);
                for r in 0..k {
                    for c in 0..k {
                        tr += buf[r * k + c] * b[(c, r)];
                    }
                }
                tr * h.weights[i]
            })
            .collect()
    });
    let tphase: Vec<Vec<C64>> = (0..span)
        .map(|dt| {
            let s = (dt as f64 - (n - 1) as f64) * hx[2];
            h.lambdas.iter().map(|&l| C64::new(0.0, l * s).exp()).collect()
        })
        .collect();
    let (xs, ys) = (grid.axis(0), grid.axis(1));
    let (wx, wy, wt) = (grid.axis_weights(0), grid.axis_weights(1), grid.axis_weights(2));
    let planes = par::map(n * n, |xh| {
        let (a, b) = (xh / n, xh % n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        let mut hl = vec![C64::new(0.0, 0.0); nodes];
        let mut kap = vec![C64::new(0.0, 0.0); span];
        for c in 0..n {
            for e in 0..n {
                let pi = (a + n - 1 - c) * span + (b + n - 1 - e);
                // y^{-1} x has central part t_x - t_y + (y_2 x_1 - y_1 x_2) / 2.
                let shift = (ys[e] * xs[a] - xs[c] * ys[b]) / 2.0;
                for (i, hv) in hl.iter_mut().enumerate() {
                    *hv = g[pi][i] * C64::new(0.0, h.lambdas[i] * shift).exp();
                }
                for (dt, kv) in kap.iter_mut().enumerate() {
                    *kv = hl.iter().zip(&tphase[dt]).map(|(u, v)| u * v).sum();
                }
                let wxy = wx[c] * wy[e];
                let line = &f.values[(c * n + e) * n..(c * n + e + 1) * n];
                for (kx, o) in out.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (ky, fv) in line.iter().enumerate() {
                        acc += fv * kap[kx + n - 1 - ky] * wt[ky];
                    }
                    *o += acc * wxy;
                }
            }
        }
        out
    });
    let mut out = SampledFunction::zeros(grid);
    out.values = planes.into_iter().flatten().collect();
    out.boundary_flag = f.boundary_flag;
    Ok(out)
}

/// Result of the power iteration on `T^* T`.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Estimate {
    /// `sqrt` of the last Rayleigh quotient.
    pub estimate: f64,
    pub rayleigh: Vec<f64>,
    /// Relative change of the estimate over the last step.
    pub rel_change: f64,
    /// `false` when the last relative change exceeds 0.05.
    pub converged: bool,
}

/// Power iteration for `||Op(sigma)||` on the grid of `d`, from a seeded
/// random start.
pub fn l2_norm_estimate(sigma: &Symbol, d: &Discretization, iterations: usize, seed: u64) -> Result<L2Estimate> {
    if iterations < 8 {
        return Err(Error::domain("power iteration needs at least 8 iterations"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = SampledFunction::zeros(&d.grid);
    for x in &mut v.values {
        *x = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    let nv = v.norm_l2();
    v = v.scale(C64::new(1.0 / nv, 0.0));
    let mut rayleigh = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let tv = op_apply(sigma, &v, d)?;
        let w = adjoint_apply(sigma, &tv, d)?;
        rayleigh.push(w.inner(&v)?.re.max(0.0));
        let nw = w.norm_l2();
        if nw == 0.0 {
            break;
        }
        v = w.scale(C64::new(1.0 / nw, 0.0));
    }
    let est: Vec<f64> = rayleigh.iter().map(|r| r.sqrt()).collect();
    let last = *est.last().unwrap_or(&0.0);
    let rel_change = if est.len() >= 2 && last > 0.0 {
        (last - est[est.len() - 2]).abs() / last
    } else {
        0.0
    };
    Ok(L2Estimate {
        estimate: last,
        rayleigh,
        rel_change,
        converged: rel_change <= 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GradedStructure, HomogeneousMultiIndex};
    use crate::repn::{HeisenbergDual, HeisenbergParams};
    use crate::symbol;

    fn small() -> Discretization {
        let mut p = HeisenbergParams::ladder(0);
        p.truncation = 12;
        p.panels = 4;
        p.nodes_per_panel = 4;
        p.lambda_max = 5.0;
        p.sublaplacian_cutoff = Some(30.0);
        Discretization::new(
            GradedStructure::heisenberg1(),
            GroupGrid::cube(3, 4.0, 17).unwrap(),
            FrequencyGrid::Heisenberg(HeisenbergDual::new(p).unwrap()),
        )
        .unwrap()
    }

    fn packet(g: &GroupGrid) -> SampledFunction {
        SampledFunction::from_fn(g, |x| {
            C64::new(0.0, -1.5 * x[2]).exp() * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp()
        })
    }

    #[test]
    fn evaluation_on_own_grid_matches_op_apply() {
        let d = small();
        let f = packet(&d.grid);
        let s = symbol::from_multiplier(&|mu| 1.0 / (1.0 + mu), &d.dual, -2.0).unwrap();
        assert_eq!(op_apply_to_grid(&s, &f, &d, &d.grid).unwrap(), op_apply(&s, &f, &d).unwrap());
        let a = SampledFunction::from_real_fn(&d.grid, |x| x[0]);
        let c = symbol::from_coefficient_and_multiplier(&a, &|_| 1.0, &d.dual, 0.0).unwrap();
        assert!(op_apply_to_grid(&c, &f, &d, &d.grid).is_err());
    }

    #[test]
    fn identity_symbol_is_the_roundtrip() {
        let d = small();
        let f = packet(&d.grid);
        let a = op_apply(&Symbol::identity(&d.dual), &f, &d).unwrap();
        let b = fourier::inverse(&fourier::forward(&f, &d.dual).unwrap(), &d.grid, &d.dual).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bilinear_in_symbol_and_function() {
        let d = small();
        let f = packet(&d.grid);
        let g = SampledFunction::from_real_fn(&d.grid, |x| (-(x[0] - 0.3).powi(2) - x[1].powi(2) - x[2].powi(2)).exp());
        let s = symbol::from_multiplier(&|mu| (-mu / 4.0).exp(), &d.dual, -10.0).unwrap();
        let t = symbol::from_invariant_operator(&HomogeneousMultiIndex::new(vec![1, 0, 0]), &d).unwrap();
        let c = C64::new(0.7, -0.2);
        let lhs = op_apply(&s.add(&t.scale(c)).unwrap(), &f.add(&g).unwrap(), &d).unwrap();
        let mut rhs = SampledFunction::zeros(&d.grid);
        for sym in [s.clone(), t.scale(c)] {
            for h in [&f, &g] {
                rhs = rhs.add(&op_apply(&sym, h, &d).unwrap()).unwrap();
            }
        }
        assert!(lhs.rel_l2_error(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn adjoint_identity_holds_for_x_dependent_symbols() {
        let d = small();
        let f = packet(&d.grid);
        let g = SampledFunction::from_real_fn(&d.grid, |x| (-(x[0] - 0.3).powi(2) - x[1].powi(2) - x[2].powi(2)).exp());
        let a = SampledFunction::from_real_fn(&d.grid, |x| 1.0 + x[0].tanh());
        let s = symbol::from_coefficient_and_multiplier(&a, &|mu| 1.0 + mu, &d.dual, 2.0)
            .unwrap()
            .add(&symbol::from_invariant_operator(&HomogeneousMultiIndex::new(vec![0, 1, 0]), &d).unwrap())
            .unwrap();
        let lhs = op_apply(&s, &f, &d).unwrap().inner(&g).unwrap();
        let rhs = f.inner(&adjoint_apply(&s, &g, &d).unwrap()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn coefficient_grid_must_match() {
        let d = small();
        let a = SampledFunction::from_real_fn(&GroupGrid::cube(3, 4.0, 9).unwrap(), |_| 1.0);
        let s = symbol::from_coefficient_and_multiplier(&a, &|_| 1.0, &d.dual, 0.0).unwrap();
        assert!(op_apply(&s, &packet(&d.grid), &d).is_err());
    }

    #[test]
    fn broadcast_kernels_do_not_depend_on_base_point() {
        let d = small();
        let s = symbol::from_multiplier(&|mu| (-mu).exp(), &d.dual, -10.0).unwrap();
        let g = GroupGrid::cube(3, 2.0, 9).unwrap();
        let k1 = kernel_slice(&s, 0, &g, &d).unwrap();
        let k2 = kernel_slice(&s, 777, &g, &d).unwrap();
        assert!(k1.kernel.sub(&k2.kernel).unwrap().sup_norm() <= 1e-12 * k1.kernel.sup_norm());
        assert_ne!(k1.base, k2.base);
        let arg = k1.kernel_argument(&d, &k1.base);
        assert!(arg.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn heat_kernel_is_real_and_positive_near_origin() {
        let d = small();
        let s = symbol::from_multiplier(&|mu| (-mu).exp(), &d.dual, -10.0).unwrap();
        let g = GroupGrid::cube(3, 1.0, 9).unwrap();
        let k = kernel_slice(&s, 0, &g, &d).unwrap().kernel;
        let scale = k.sup_norm();
        for v in &k.values {
            assert!(v.im.abs() <= 1e-8 * scale);
            assert!(v.re > 0.0);
        }
    }

    #[test]
    fn shells_count_samples() {
        let s = GradedStructure::heisenberg1();
        let g = GroupGrid::cube(3, 1.0, 11).unwrap();
        let k = SampledFunction::from_real_fn(&g, |_| 2.0);
        let sh = kernel_shells(&k, &s, &[0.0, 0.5, 1.0]);
        assert_eq!(sh.len(), 2);
        assert!(sh.iter().all(|x| x.count > 0 && x.max == 2.0 && (x.mean - 2.0).abs() < 1e-15));
    }

    #[test]
    fn fit_recovers_power_law() {
        let xs: Vec<f64> = (0..8).map(|i| (0.1 + 0.1 * i as f64).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.5 * x).collect();
        let (s, se) = fit_line(&xs, &ys);
        assert!((s + 2.5).abs() < 1e-12 && se < 1e-10);
    }

    #[test]
    fn too_few_iterations_rejected() {
        let d = small();
        assert!(l2_norm_estimate(&Symbol::identity(&d.dual), &d, 4, 1).is_err());
    }

    #[test]
    fn norm_estimate_scales_and_rayleigh_is_monotone() {
        let d = small();
        let id = Symbol::identity(&d.dual);
        let e1 = l2_norm_estimate(&id, &d, 8, 3).unwrap();
        let e3 = l2_norm_estimate(&id.scale(C64::new(3.0, 0.0)), &d, 8, 3).unwrap();
        assert!((e3.estimate - 3.0 * e1.estimate).abs() <= 1e-10 * e3.estimate);
        for w in e1.rayleigh.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
        let heat = symbol::from_multiplier(&|mu| (-mu).exp(), &d.dual, -10.0).unwrap();
        let eh = l2_norm_estimate(&heat, &d, 8, 3).unwrap();
        assert!(eh.estimate <= 1.05);
    }
}
