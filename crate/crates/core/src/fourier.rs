//! Group Fourier transform, inversion and the Plancherel pairing.
//!
//! `forward` computes `f^(pi) = sum_x w_x f(x) pi(x)^*` and `inverse`
//! computes `f(x) = sum_pi w_pi tr(pi(x) F(pi))`. On the Heisenberg backend
//! both act only on the leading modes kept by the band limit, so `inverse` is
//! exactly the adjoint of `forward` for the grid and Plancherel weights.

use crate::error::{Error, Result};
use crate::grid::{GroupGrid, SampledFunction};
use crate::par;
use crate::prelude::*;
use crate::repn::{alpha_of, displacement_block, sqrt_table, AbelianDual, FrequencyGrid, HeisenbergDual};

/// One block per dual node.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    pub blocks: Vec<CMat>,
    /// Set when the source function was not resolved on its box.
    pub warning: bool,
}

impl FourierField {
    pub fn zeros(dual: &FrequencyGrid) -> Self {
        let d = dual.block_dim();
        FourierField {
            blocks: (0..dual.len()).map(|_| CMat::zeros(d, d)).collect(),
            warning: false,
        }
    }

    /// Field with block `f(i)` at node `i`.
    pub fn from_fn(dual: &FrequencyGrid, f: impl Fn(usize) -> CMat + Sync + Send) -> Self {
        FourierField {
            blocks: par::map(dual.len(), f),
            warning: false,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn scale(&self, c: C64) -> Self {
        FourierField {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
            warning: self.warning,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(FourierField {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
            warning: self.warning || other.warning,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Node-wise product `self(i) * other(i)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(FourierField {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
            warning: self.warning || other.warning,
        })
    }

    /// Node-wise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        FourierField {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
            warning: self.warning,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.blocks.len() != other.blocks.len()
            || self.blocks.first().map(|b| b.nrows()) != other.blocks.first().map(|b| b.nrows())
        {
            return Err(Error::Dimension {
                expected: self.blocks.len(),
                got: other.blocks.len(),
            });
        }
        Ok(())
    }
}

fn check_heisenberg_grid(grid: &GroupGrid) -> Result<()> {
    if grid.dim() != 3 {
        return Err(Error::Backend(format!(
            "heisenberg transform needs a 3-dimensional grid, got {}",
            grid.dim()
        )));
    }
    Ok(())
}

fn check_abelian_grid(grid: &GroupGrid, a: &AbelianDual) -> Result<()> {
    let ok = grid.dim() == a.dim
        && grid.points_per_axis() == a.axis.len() + 1
        && grid.half_widths().iter().all(|&l| l == a.half_width);
    if !ok {
        return Err(Error::Backend(
            "abelian lattice was built for a different grid".into(),
        ));
    }
    Ok(())
}

/// Group Fourier transform of sampled data.
pub fn forward(f: &SampledFunction, dual: &FrequencyGrid) -> Result<FourierField> {
    let blocks = match dual {
        FrequencyGrid::Heisenberg(h) => {
            check_heisenberg_grid(&f.grid)?;
            forward_heisenberg(f, h)
        }
        FrequencyGrid::Abelian(a) => {
            check_abelian_grid(&f.grid, a)?;
            forward_abelian(f, a)
        }
    };
    Ok(FourierField {
        blocks,
        warning: f.boundary_flag,
    })
}

/// Fourier inversion onto an arbitrary grid (for the abelian backend the grid
/// must be the one the lattice was built for).
pub fn inverse(field: &FourierField, grid: &GroupGrid, dual: &FrequencyGrid) -> Result<SampledFunction> {
    if field.blocks.len() != dual.len() {
        return Err(Error::Dimension {
            expected: dual.len(),
            got: field.blocks.len(),
        });
    }
    let values = match dual {
        FrequencyGrid::Heisenberg(h) => {
            check_heisenberg_grid(grid)?;
            inverse_heisenberg(field, grid, h)
        }
        FrequencyGrid::Abelian(a) => {
            check_abelian_grid(grid, a)?;
            inverse_abelian(field, grid, a)
        }
    };
    Ok(SampledFunction::from_parts(grid.clone(), values))
}

/// `sum_pi w_pi tr(G(pi)^* F(pi))`.
pub fn plancherel_pairing(f: &FourierField, g: &FourierField, dual: &FrequencyGrid) -> Result<C64> {
    if f.blocks.len() != dual.len() || g.blocks.len() != dual.len() {
        return Err(Error::Dimension {
            expected: dual.len(),
            got: f.blocks.len().min(g.blocks.len()),
        });
    }
    let mut acc = C64::new(0.0, 0.0);
    for (i, (a, b)) in f.blocks.iter().zip(&g.blocks).enumerate() {
        let tr: C64 = a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum();
        acc += tr * dual.weight(i);
    }
    Ok(acc)
}

/// Squared Plancherel norm `sum_pi w_pi ||F(pi)||_HS^2`.
pub fn plancherel_norm_sq(f: &FourierField, dual: &FrequencyGrid) -> f64 {
    f.blocks
        .iter()
        .enumerate()
        .map(|(i, b)| dual.weight(i) * b.iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum()
}

/// `sum_pi w_pi tr|F(pi)|`, reported for visibility of the trace-class hypothesis.
pub fn trace_class_diagnostic(f: &FourierField, dual: &FrequencyGrid) -> f64 {
    f.blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if b.iter().all(|v| *v == C64::new(0.0, 0.0)) {
                0.0
            } else {
                dual.weight(i) * b.singular_values().iter().sum::<f64>()
            }
        })
        .sum()
}

/// Least-squares Plancherel constant matching `||f||^2` over reference samples.
pub fn calibrate_plancherel(refs: &[SampledFunction], dual: &HeisenbergDual) -> Result<f64> {
    let mut unit = dual.clone();
    unit.set_plancherel(1.0);
    let unit = FrequencyGrid::Heisenberg(unit);
    let (mut num, mut den) = (0.0, 0.0);
    for f in refs {
        let a = plancherel_norm_sq(&forward(f, &unit)?, &unit);
        let b = f.norm_l2().powi(2);
        num += a * b;
        den += a * a;
    }
    if den == 0.0 {
        return Err(Error::domain("calibration needs nonzero reference functions"));
    }
    Ok(num / den)
}

fn forward_heisenberg(f: &SampledFunction, h: &HeisenbergDual) -> Vec<CMat> {
    let grid = &f.grid;
    let n = grid.points_per_axis();
    let (xs, ys, ts) = (grid.axis(0), grid.axis(1), grid.axis(2));
    let (wx, wy, wt) = (grid.axis_weights(0), grid.axis_weights(1), grid.axis_weights(2));
    let dim = h.truncation() + 1;
    let sq = sqrt_table(dim);
    par::map(h.lambdas.len(), |i| {
        let lambda = h.lambdas[i];
        let k = h.kept[i];
        let mut out = CMat::zeros(dim, dim);
        if k == 0 {
            return out;
        }
        let phase: Vec<C64> = ts
            .iter()
            .zip(wt)
            .map(|(&t, &w)| C64::from_polar(w, -lambda * t))
            .collect();
        let mut acc = vec![C64::new(0.0, 0.0); k * k];
        let mut buf = vec![C64::new(0.0, 0.0); k * k];
        for a in 0..n {
            for b in 0..n {
                let line = &f.values[(a * n + b) * n..(a * n + b + 1) * n];
                let s: C64 = line.iter().zip(&phase).map(|(v, p)| v * p).sum();
                if s == C64::new(0.0, 0.0) {
                    continue;
                }
                let coef = s * (wx[a] * wy[b]);
                displacement_block(k, alpha_of(lambda, xs[a], ys[b]), &sq, &mut buf);
                for (acc_i, d) in acc.iter_mut().zip(&buf) {
                    *acc_i += coef * d.conj();
                }
            }
        }
        for r in 0..k {
            for c in 0..k {
                out[(r, c)] = acc[c * k + r];
            }
        }
        out
    })
}

fn inverse_heisenberg(field: &FourierField, grid: &GroupGrid, h: &HeisenbergDual) -> Vec<C64> {
    let n = grid.points_per_axis();
    let (xs, ys, ts) = (grid.axis(0), grid.axis(1), grid.axis(2));
    let dim = h.truncation() + 1;
    let sq = sqrt_table(dim);
    let nodes = h.lambdas.len();
    // Transposed kept blocks: tr(D F) = sum_{j,k} D[j][k] F[k][j].
    let ft: Vec<Vec<C64>> = (0..nodes)
        .map(|i| {
            let k = h.kept[i];
            let b = &field.blocks[i];
            let mut v = Vec::with_capacity(k * k);
            for r in 0..k {
                for c in 0..k {
                    v.push(b[(c, r)] * h.weights[i]);
                }
            }
            v
        })
        .collect();
    let phases: Vec<Vec<C64>> = h
        .lambdas
        .iter()
        .map(|&l| ts.iter().map(|&t| C64::new(0.0, l * t).exp()).collect())
        .collect();
    let lines = par::map(n * n, |ab| {
        let (a, b) = (ab / n, ab % n);
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut buf = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..nodes {
            let k = h.kept[i];
            if k == 0 || ft[i].iter().all(|v| *v == C64::new(0.0, 0.0)) {
                continue;
            }
            displacement_block(k, alpha_of(h.lambdas[i], xs[a], ys[b]), &sq, &mut buf);
            let tr: C64 = buf[..k * k].iter().zip(&ft[i]).map(|(d, f)| d * f).sum();
            for (o, p) in line.iter_mut().zip(&phases[i]) {
                *o += tr * p;
            }
        }
        line
    });
    lines.into_iter().flatten().collect()
}

fn axis_phases(grid: &GroupGrid, a: &AbelianDual, sign: f64, weighted: bool) -> Vec<Vec<Vec<C64>>> {
    (0..a.dim)
        .map(|d| {
            a.axis
                .iter()
                .map(|&xi| {
                    grid.axis(d)
                        .iter()
                        .zip(grid.axis_weights(d))
                        .map(|(&x, &w)| C64::from_polar(if weighted { w } else { 1.0 }, sign * xi * x))
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn forward_abelian(f: &SampledFunction, a: &AbelianDual) -> Vec<CMat> {
    let grid = &f.grid;
    let ph = axis_phases(grid, a, -1.0, true);
    let m = a.axis.len();
    par::map(a.len(), |i| {
        let mut idx = vec![0; a.dim];
        let mut r = i;
        for d in (0..a.dim).rev() {
            idx[d] = r % m;
            r /= m;
        }
        let s: C64 = f
            .values
            .iter()
            .enumerate()
            .map(|(p, v)| {
                let mi = grid.multi_index(p);
                let mut c = *v;
                for d in 0..a.dim {
                    c *= ph[d][idx[d]][mi[d]];
                }
                c
            })
            .sum();
        CMat::from_element(1, 1, s)
    })
}

fn inverse_abelian(field: &FourierField, grid: &GroupGrid, a: &AbelianDual) -> Vec<C64> {
    let ph = axis_phases(grid, a, 1.0, false);
    let m = a.axis.len();
    par::map(grid.len(), |p| {
        let mi = grid.multi_index(p);
        let mut acc = C64::new(0.0, 0.0);
        for (i, b) in field.blocks.iter().enumerate() {
            let mut r = i;
            let mut c = b[(0, 0)];
            for d in (0..a.dim).rev() {
                c *= ph[d][r % m][mi[d]];
                r /= m;
            }
            acc += c;
        }
        acc * a.weight
    })
}
