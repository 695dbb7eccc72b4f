//! Sobolev norms, the hypothesis checks and trial scans for the sharp Gårding
//! inequality, and resolvent solves with decay profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fourier::{self, FourierField};
use crate::grid::{apply_x_beta, GroupGrid, SampledFunction};
use crate::group::{GradedStructure, HomogeneousMultiIndex};
use crate::linalg;
use crate::par;
use crate::prelude::*;
use crate::quantizer;
use crate::repn::{Discretization, FrequencyGrid, RocklandKind, RocklandSpec};
use crate::symbol::{self, block_for_tuple, distinct_coefficient_tuples, Symbol, SymbolClassParams};

/// `||pi(I+R)^{a/nu} F||` in the Plancherel norm.
pub fn sobolev_norm_of_field(field: &FourierField, a: f64, dual: &FrequencyGrid) -> f64 {
    let nu = dual.rockland().nu as f64;
    let e = a / nu;
    let parts = par::map(field.len(), |i| {
        let b = &field.blocks[i];
        let hs = match dual.rockland_diagonal(i) {
            Some(diag) => (0..b.nrows())
                .map(|r| {
                    let s = (1.0 + diag[r]).powf(2.0 * e);
                    b.row(r).iter().map(|v| v.norm_sqr()).sum::<f64>() * s
                })
                .sum::<f64>(),
            None => (dual.spectral_power_at(i, e) * b).iter().map(|v| v.norm_sqr()).sum(),
        };
        dual.weight(i) * hs
    });
    parts.iter().sum::<f64>().sqrt()
}

/// Sobolev norm `||(I+R)^{a/nu} f||_{L2}` computed on the dual side.
pub fn sobolev_norm(f: &SampledFunction, a: f64, d: &Discretization) -> Result<f64> {
    Ok(sobolev_norm_of_field(&fourier::forward(f, &d.dual)?, a, &d.dual))
}

/// `R f` by finite differences, with the same Rockland operator as the dual.
pub fn apply_rockland_fd(s: &GradedStructure, spec: &RocklandSpec, f: &SampledFunction) -> Result<SampledFunction> {
    let n = s.dim();
    let mut out = SampledFunction::zeros(&f.grid);
    for j in 0..n {
        let w = s.weights()[j];
        let (power, sign) = match spec.kind {
            RocklandKind::Sublaplacian if w == 1 => (2, -1.0),
            RocklandKind::Sublaplacian => continue,
            RocklandKind::GradedPowers => {
                let p = 2 * s.nu0() / w;
                (p, if (s.nu0() / w) % 2 == 0 { 1.0 } else { -1.0 })
            }
        };
        let mut beta = vec![0; n];
        beta[j] = power;
        let term = apply_x_beta(s, &HomogeneousMultiIndex::new(beta), f)?;
        out = out.add(&term.scale(C64::new(sign, 0.0)))?;
    }
    out.boundary_flag = f.boundary_flag;
    Ok(out)
}

/// `(I + R) f` by finite differences.
pub fn apply_i_plus_r_fd(s: &GradedStructure, spec: &RocklandSpec, f: &SampledFunction) -> Result<SampledFunction> {
    f.add(&apply_rockland_fd(s, spec, f)?)
}

/// Non-negativity of a symbol: a non-negative operator on a complex space is
/// Hermitian with non-negative spectrum, so both parts are reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityCheck {
    /// Smallest eigenvalue of the Hermitian part over all nodes.
    pub min_eigenvalue: f64,
    /// Largest `||(A - A^*)/2|| / max(1, ||A||)` over all nodes.
    pub max_skew: f64,
    pub passes: bool,
}

pub const POSITIVITY_TOL: f64 = 1e-10;
pub const COMMUTATION_TOL: f64 = 1e-10;

/// Non-negativity of `sigma(x, pi)` on the retained block.
pub fn positivity_check(sigma: &Symbol, dual: &FrequencyGrid) -> PositivityCheck {
    let keep = dual.retained_dim();
    let tuples = distinct_coefficient_tuples(sigma);
    let per_tuple = par::map(tuples.len(), |u| {
        let mut min = f64::INFINITY;
        let mut skew: f64 = 0.0;
        for i in 0..dual.len() {
            let b = linalg::block(&block_for_tuple(sigma, i, &tuples[u]), keep);
            min = min.min(linalg::hermitian_eigenvalues(&b, keep).into_iter().fold(f64::INFINITY, f64::min));
            let k = (&b - b.adjoint()) * C64::new(0.5, 0.0);
            skew = skew.max(linalg::block_op_norm(&k, keep) / linalg::block_op_norm(&b, keep).max(1.0));
        }
        (min, skew)
    });
    let (min_eigenvalue, max_skew) = if sigma.is_zero() {
        (0.0, 0.0)
    } else {
        per_tuple
            .into_iter()
            .fold((f64::INFINITY, 0.0), |(a, b), (c, d)| (a.min(c), f64::max(b, d)))
    };
    PositivityCheck {
        min_eigenvalue,
        max_skew,
        passes: min_eigenvalue >= -POSITIVITY_TOL && max_skew <= POSITIVITY_TOL,
    }
}

/// How far `sigma` is from commuting with the spectral measure of `pi(R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutationCheck {
    /// Largest Frobenius norm of an off-diagonal part (diagonal backends only).
    pub max_offdiagonal: Option<f64>,
    /// Largest `||[sigma, pi(R)]|| / (||sigma|| ||pi(R)||)` on the retained block,
    /// bounded term by term through the coefficient sup norms.
    pub max_commutator: f64,
    pub passes: bool,
}

pub fn commutation_check(sigma: &Symbol, dual: &FrequencyGrid) -> CommutationCheck {
    let keep = dual.retained_dim();
    let diagonal = dual.rockland_diagonal(0).is_some();
    let per_node = par::map(dual.len(), |i| {
        let r = dual.rockland_at(i);
        let rn = linalg::block_op_norm(&r, keep).max(f64::MIN_POSITIVE);
        let mut off: f64 = 0.0;
        let mut comm: f64 = 0.0;
        for t in &sigma.terms {
            let c = t.coeff.as_ref().map(|c| c.sup_norm()).unwrap_or(1.0);
            let m = &t.field.blocks[i];
            let mb = linalg::block(m, keep);
            if diagonal {
                let mut o = 0.0;
                for a in 0..keep {
                    for b in 0..keep {
                        if a != b {
                            o += mb[(a, b)].norm_sqr();
                        }
                    }
                }
                off = off.max(c * o.sqrt());
            }
            let mn = linalg::block_op_norm(m, keep);
            if mn > 0.0 {
                let cm = m * &r - &r * m;
                comm = comm.max(c * linalg::block_op_norm(&cm, keep) / (mn * rn));
            }
        }
        (off, comm)
    });
    let max_off = per_node.iter().map(|p| p.0).fold(0.0, f64::max);
    let max_commutator = per_node.iter().map(|p| p.1).fold(0.0, f64::max);
    let max_offdiagonal = diagonal.then_some(max_off);
    CommutationCheck {
        max_offdiagonal,
        max_commutator,
        passes: max_commutator <= COMMUTATION_TOL && max_offdiagonal.map_or(true, |o| o <= COMMUTATION_TOL),
    }
}

/// Parameters of the seeded trial family `e^{i theta.x} e^{-|(x - x0)/w|^2/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialFamily {
    /// `theta_j` uniform in `[-theta_max_j, theta_max_j]`.
    pub theta_max: [f64; 3],
    /// `x0_j` uniform in `[-shift_max, shift_max]`.
    pub shift_max: f64,
    /// `w_j` uniform in `[width_min, width_max]`.
    pub width_min: f64,
    pub width_max: f64,
}

impl Default for TrialFamily {
    fn default() -> Self {
        TrialFamily {
            theta_max: [1.5, 1.5, 3.0],
            shift_max: 1.0,
            width_min: 0.7,
            width_max: 1.3,
        }
    }
}

impl TrialFamily {
    /// Trial `index` of the family; depends only on `(seed, index)`.
    pub fn sample(&self, grid: &GroupGrid, seed: u64, index: u64) -> SampledFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let dim = grid.dim();
        let mut theta = vec![0.0; dim];
        let mut x0 = vec![0.0; dim];
        let mut w = vec![1.0; dim];
        for j in 0..dim {
            let tm = self.theta_max[j.min(2)];
            theta[j] = rng.random_range(-tm..=tm);
            x0[j] = rng.random_range(-self.shift_max..=self.shift_max);
            w[j] = rng.random_range(self.width_min..=self.width_max);
        }
        SampledFunction::from_fn(grid, |x| {
            let mut phase = 0.0;
            let mut q = 0.0;
            for j in 0..dim {
                phase += theta[j] * x[j];
                q += ((x[j] - x0[j]) / w[j]).powi(2);
            }
            C64::from_polar((-q / 2.0).exp(), phase)
        })
    }
}

/// One trial of a Gårding scan.
#[derive(Debug, Clone, PartialEq)]
pub struct GardingTrial {
    pub index: u64,
    pub held_out: bool,
    /// `Re <T f, f>`.
    pub re_form: f64,
    pub norm_l2_sq: f64,
    /// `||f||^2` in `L2_s` with `s = (m - (rho - delta))/2`.
    pub norm_s_sq: f64,
    /// `||f||^2` in `L2_{m/2}`.
    pub norm_strong_sq: f64,
}

/// Outcome of a Gårding scan.
#[derive(Debug, Clone, PartialEq)]
pub struct GardingReport {
    pub label: String,
    pub m: f64,
    pub rho: f64,
    pub delta: f64,
    pub s: f64,
    pub positivity: PositivityCheck,
    pub commutation: CommutationCheck,
    pub trials: Vec<GardingTrial>,
    /// `max(0, max over fit trials of -Re<Tf,f> / ||f||_s^2)`.
    pub c_est: f64,
    /// Held-out trials with `Re<Tf,f> + 1.05 C_est ||f||_s^2 < -1e-9 ||f||_s^2`.
    pub held_out_violations: usize,
    /// For x-independent symbols: trials with `Re<Tf,f> < -1e-9 ||f||^2`.
    pub multiplier_violations: Option<usize>,
    /// `max(0, max over all trials of -Re<Tf,f> / ||f||_{m/2}^2)`; diagnostic only.
    pub strong_ratio: f64,
}

pub const GARDING_INFLATION: f64 = 1.05;
pub const GARDING_TOL: f64 = 1e-9;

/// Scans `Re <Op(sigma) f, f>` over `trials` seeded trial functions; the
/// first half fits `C_est`, the second half is held out.
pub fn garding_scan(
    sigma: &Symbol,
    params: &SymbolClassParams,
    family: &TrialFamily,
    trials: usize,
    seed: u64,
    d: &Discretization,
) -> Result<GardingReport> {
    if trials < 2 {
        return Err(Error::domain("a Gårding scan needs at least two trials"));
    }
    let positivity = positivity_check(sigma, &d.dual);
    let commutation = commutation_check(sigma, &d.dual);
    if !positivity.passes || !commutation.passes {
        return Err(Error::Hypothesis(format!(
            "symbol '{}' fails the hypotheses: min eigenvalue {:.3e}, skew part {:.3e}, commutator {:.3e}",
            sigma.label, positivity.min_eigenvalue, positivity.max_skew, commutation.max_commutator
        )));
    }
    let s = (params.m - (params.rho - params.delta)) / 2.0;
    let fit = trials / 2;
    let mut out = Vec::with_capacity(trials);
    for index in 0..trials as u64 {
        let f = family.sample(&d.grid, seed, index);
        let fhat = fourier::forward(&f, &d.dual)?;
        let tf = apply_with_transform(sigma, &fhat, &f.grid, d)?;
        out.push(GardingTrial {
            index,
            held_out: index as usize >= fit,
            re_form: tf.inner(&f)?.re,
            norm_l2_sq: f.norm_l2().powi(2),
            norm_s_sq: sobolev_norm_of_field(&fhat, s, &d.dual).powi(2),
            norm_strong_sq: sobolev_norm_of_field(&fhat, params.m / 2.0, &d.dual).powi(2),
        });
    }
    let c_est = out
        .iter()
        .filter(|t| !t.held_out)
        .map(|t| -t.re_form / t.norm_s_sq)
        .fold(0.0, f64::max);
    let held_out_violations = out
        .iter()
        .filter(|t| t.held_out)
        .filter(|t| t.re_form + GARDING_INFLATION * c_est * t.norm_s_sq < -GARDING_TOL * t.norm_s_sq)
        .count();
    let multiplier_violations = sigma
        .is_broadcast()
        .then(|| out.iter().filter(|t| t.re_form < -GARDING_TOL * t.norm_l2_sq).count());
    let strong_ratio = out.iter().map(|t| -t.re_form / t.norm_strong_sq).fold(0.0, f64::max);
    Ok(GardingReport {
        label: sigma.label.clone(),
        m: params.m,
        rho: params.rho,
        delta: params.delta,
        s,
        positivity,
        commutation,
        trials: out,
        c_est,
        held_out_violations,
        multiplier_violations,
        strong_ratio,
    })
}

fn apply_with_transform(sigma: &Symbol, fhat: &FourierField, grid: &GroupGrid, d: &Discretization) -> Result<SampledFunction> {
    let mut out = SampledFunction::zeros(grid);
    if sigma.terms.iter().any(|t| t.coeff.is_none()) {
        out = fourier::inverse(&sigma.broadcast_part().compose(fhat)?, grid, &d.dual)?;
    }
    for t in sigma.terms.iter().filter(|t| t.coeff.is_some()) {
        let g = fourier::inverse(&t.field.compose(fhat)?, grid, &d.dual)?;
        out = out.add(&g.mul(t.coeff.as_ref().expect("coefficient term"))?)?;
    }
    Ok(out)
}

/// The resolvent symbol `(1 + pi(R))^{-1}`.
pub fn resolvent_symbol(dual: &FrequencyGrid) -> Result<Symbol> {
    let nu = dual.rockland().nu as f64;
    Ok(symbol::from_multiplier(&|mu| 1.0 / (1.0 + mu), dual, -nu)?.with_label("resolvent"))
}

/// `u = Op((1 + pi(R))^{-1}) f`.
pub fn resolvent_apply(f: &SampledFunction, d: &Discretization) -> Result<SampledFunction> {
    quantizer::op_apply(&resolvent_symbol(&d.dual)?, f, d)
}

/// The resolvent applied to `f` and evaluated on `out_grid`.
pub fn resolvent_apply_to_grid(f: &SampledFunction, d: &Discretization, out_grid: &GroupGrid) -> Result<SampledFunction> {
    quantizer::op_apply_to_grid(&resolvent_symbol(&d.dual)?, f, d, out_grid)
}

/// Weighted sup norms of a function sampled on a sequence of boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub half_widths: Vec<f64>,
    pub betas: Vec<Vec<u32>>,
    pub powers: Vec<u32>,
    /// `entries[b][p][k] = sup_x (1+|x|)^{M_p} |X^{beta_b} u_k(x)|`.
    pub entries: Vec<Vec<Vec<f64>>>,
    /// `max |u_k|` over the boundary nodes of box `k`.
    pub boundary_max: Vec<f64>,
    /// `entries[b][p][last] / entries[b][p][0]`.
    pub enlargement_ratio: Vec<Vec<f64>>,
}

impl DecayProfile {
    /// `boundary_max[0] / boundary_max[last]` (infinite when the last vanishes).
    pub fn boundary_shrink(&self) -> f64 {
        let a = self.boundary_max[0];
        let b = *self.boundary_max.last().expect("at least one box");
        if b == 0.0 {
            if a == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            a / b
        }
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().flatten().flatten().all(|v| v.is_finite()) && self.boundary_max.iter().all(|v| v.is_finite())
    }
}

/// Decay profile of `u` sampled on nested boxes (`us[k]` on the k-th box).
pub fn schwartz_decay_report(
    s: &GradedStructure,
    us: &[SampledFunction],
    betas: &[HomogeneousMultiIndex],
    powers: &[u32],
) -> Result<DecayProfile> {
    if us.is_empty() {
        return Err(Error::domain("decay profile needs at least one box"));
    }
    let mut entries = Vec::new();
    for b in betas {
        let derived: Vec<SampledFunction> = us.iter().map(|u| apply_x_beta(s, b, u)).collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for &m in powers {
            rows.push(
                derived
                    .iter()
                    .map(|g| {
                        g.values
                            .iter()
                            .enumerate()
                            .map(|(p, v)| (1.0 + s.norm_raw(&g.grid.coords(p))).powi(m as i32) * v.norm())
                            .fold(0.0, f64::max)
                    })
                    .collect::<Vec<f64>>(),
            );
        }
        entries.push(rows);
    }
    let boundary_max = us.iter().map(|u| u.boundary_max()).collect();
    let enlargement_ratio = entries
        .iter()
        .map(|rows: &Vec<Vec<f64>>| {
            rows.iter()
                .map(|v| {
                    let (a, b) = (v[0], *v.last().expect("at least one box"));
                    if a == 0.0 && b == 0.0 {
                        1.0
                    } else {
                        b / a
                    }
                })
                .collect()
        })
        .collect();
    Ok(DecayProfile {
        half_widths: us.iter().map(|u| u.grid.half_widths()[0]).collect(),
        betas: betas.iter().map(|b| b.alpha.clone()).collect(),
        powers: powers.to_vec(),
        entries,
        boundary_max,
        enlargement_ratio,
    })
}
