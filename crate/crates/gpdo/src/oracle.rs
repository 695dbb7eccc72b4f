//! Kohn–Nirenberg quantization on `R^n` through plain FFTs, used as an
//! independent reference for the abelian backend.
//!
//! On the cube `[-L, L]^n` with `n_pts = M + 1` points per axis the periodic
//! samples are the first `M` points, with the two endpoints averaged (the
//! trapezoid rule folded onto the torus). The lattice is `xi = m pi / L`,
//! `m = -M/2 .. M/2 - 1`, stored row-major with the first axis slowest.
//!
//! `a(x, D) f(x) = (2L)^{-n} sum_xi e^{i x xi} p(x, xi) f^(xi)` with
//! `f^(xi) = h^n sum_x f(x) e^{-i x xi}`.

use std::sync::Arc;

use anyhow::{bail, ensure, Result};
use gpdo_core::fourier::FourierField;
use gpdo_core::repn::FrequencyGrid;
use gpdo_core::symbol::{Symbol, SymbolTerm};
use gpdo_core::{CMat, Discretization, GroupGrid, SampledFunction, C64};
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

/// One separable term `c(x) q(xi)`; `coeff = None` means `c = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanTerm {
    /// Values on the `points^dim` spatial nodes.
    pub coeff: Option<Vec<C64>>,
    /// Values on the `(points - 1)^dim` lattice nodes.
    pub values: Vec<C64>,
}

/// Symbol `p(x, xi)` on the (x-node, xi-node) lattice, held as a sum of
/// separable terms so that x-dependent symbols stay cheap in three dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanSymbol {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
    pub order: f64,
    pub terms: Vec<EuclideanTerm>,
}

impl EuclideanSymbol {
    pub fn empty(grid: &GroupGrid, order: f64) -> Result<Self> {
        let l = grid.half_widths()[0];
        ensure!(grid.half_widths().iter().all(|&h| h == l), "the oracle needs a cube grid");
        ensure!(grid.points_per_axis() % 2 == 1, "the oracle needs an odd number of points per axis");
        Ok(EuclideanSymbol {
            dim: grid.dim(),
            points: grid.points_per_axis(),
            half_width: l,
            order,
            terms: Vec::new(),
        })
    }

    /// x-independent symbol `q(xi)`.
    pub fn multiplier(grid: &GroupGrid, order: f64, q: impl Fn(&[f64]) -> C64) -> Result<Self> {
        Self::empty(grid, order)?.with_term(None::<fn(&[f64]) -> C64>, q)
    }

    pub fn with_term(
        mut self,
        coeff: Option<impl Fn(&[f64]) -> C64>,
        q: impl Fn(&[f64]) -> C64,
    ) -> Result<Self> {
        let grid = self.grid();
        let coeff = coeff.map(|c| (0..grid.len()).map(|p| c(&grid.coords(p))).collect());
        let values = (0..self.lattice_len()).map(|k| q(&self.xi(k))).collect();
        self.terms.push(EuclideanTerm { coeff, values });
        Ok(self)
    }

    pub fn grid(&self) -> GroupGrid {
        GroupGrid::cube(self.dim, self.half_width, self.points).expect("validated shape")
    }

    fn m(&self) -> usize {
        self.points - 1
    }

    pub fn lattice_len(&self) -> usize {
        self.m().pow(self.dim as u32)
    }

    pub fn is_broadcast(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_none())
    }

    /// Signed lattice indices of node `k`.
    fn modes(&self, mut k: usize) -> Vec<i64> {
        let m = self.m();
        let mut out = vec![0; self.dim];
        for d in (0..self.dim).rev() {
            out[d] = (k % m) as i64 - (m / 2) as i64;
            k /= m;
        }
        out
    }

    pub fn xi(&self, k: usize) -> Vec<f64> {
        let dxi = std::f64::consts::PI / self.half_width;
        self.modes(k).into_iter().map(|j| j as f64 * dxi).collect()
    }

    /// `p(x_p, xi_k)`.
    pub fn value(&self, x_index: usize, xi_index: usize) -> C64 {
        self.terms
            .iter()
            .map(|t| t.coeff.as_ref().map_or(C64::new(1.0, 0.0), |c| c[x_index]) * t.values[xi_index])
            .sum()
    }

    fn check(&self, grid: &GroupGrid) -> Result<()> {
        if grid.dim() != self.dim
            || grid.points_per_axis() != self.points
            || grid.half_widths().iter().any(|&h| h != self.half_width)
        {
            bail!(
                "shape mismatch: symbol lattice is {}-dimensional with {} points on half-width {}, function grid differs",
                self.dim,
                self.points,
                self.half_width
            );
        }
        Ok(())
    }
}

/// Multi-dimensional FFT helper on `m^dim` row-major arrays.
struct Transform {
    dim: usize,
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Transform {
    fn new(dim: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transform {
            dim,
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    fn run(&self, data: &mut [C64], inverse: bool) {
        let plan = if inverse { &self.inv } else { &self.fwd };
        let m = self.m;
        let mut line = vec![C64::new(0.0, 0.0); m];
        for axis in 0..self.dim {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            let outer = data.len() / (m * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * m * stride + s;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process(&mut line);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Position in the FFT array of a signed mode vector.
    fn slot(&self, modes: &[i64]) -> usize {
        let m = self.m as i64;
        modes.iter().fold(0usize, |acc, &j| acc * self.m + j.rem_euclid(m) as usize)
    }

    /// `(-1)^{sum m_j}`: the phase of the grid starting at `-L`.
    fn sign(modes: &[i64]) -> f64 {
        if modes.iter().sum::<i64>().rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Folds closed-grid samples onto the `M^dim` torus, averaging the endpoints.
fn periodize(f: &SampledFunction) -> Vec<C64> {
    let dim = f.grid.dim();
    let n = f.grid.points_per_axis();
    let m = n - 1;
    let mut out = vec![C64::new(0.0, 0.0); m.pow(dim as u32)];
    for (p, v) in f.values.iter().enumerate() {
        let idx = f.grid.multi_index(p);
        let w: f64 = idx.iter().map(|&i| if i == 0 || i == m { 0.5 } else { 1.0 }).product();
        let slot = idx.iter().fold(0usize, |acc, &i| acc * m + i % m);
        out[slot] += v * w;
    }
    out
}

/// Unfolds torus samples back to the closed grid.
fn unfold(per: &[C64], grid: &GroupGrid) -> SampledFunction {
    let m = grid.points_per_axis() - 1;
    let values = (0..grid.len())
        .map(|p| per[grid.multi_index(p).iter().fold(0usize, |acc, &i| acc * m + i % m)])
        .collect();
    SampledFunction::new(grid.clone(), values).expect("matching length")
}

/// Discrete Fourier transform on the symbol lattice ordering.
pub fn dft_forward(f: &SampledFunction, p: &EuclideanSymbol) -> Result<Vec<C64>> {
    p.check(&f.grid)?;
    let t = Transform::new(p.dim, p.m());
    let mut data = periodize(f);
    t.run(&mut data, false);
    let h = f.grid.spacing(0).powi(p.dim as i32);
    Ok((0..p.lattice_len())
        .map(|k| {
            let modes = p.modes(k);
            data[t.slot(&modes)] * (h * Transform::sign(&modes))
        })
        .collect())
}

/// Inverse of [`dft_forward`] evaluated on the closed grid.
pub fn dft_inverse(values: &[C64], p: &EuclideanSymbol) -> Result<SampledFunction> {
    ensure!(values.len() == p.lattice_len(), "expected {} lattice values, got {}", p.lattice_len(), values.len());
    let t = Transform::new(p.dim, p.m());
    let mut data = vec![C64::new(0.0, 0.0); p.lattice_len()];
    for (k, v) in values.iter().enumerate() {
        let modes = p.modes(k);
        data[t.slot(&modes)] = v * Transform::sign(&modes);
    }
    t.run(&mut data, true);
    let scale = (2.0 * p.half_width).powi(-(p.dim as i32));
    data.iter_mut().for_each(|v| *v *= scale);
    Ok(unfold(&data, &p.grid()))
}

/// `a(x, D) f` for the Kohn–Nirenberg quantization of `p`.
pub fn kn_quantize(p: &EuclideanSymbol, f: &SampledFunction) -> Result<SampledFunction> {
    let fh = dft_forward(f, p)?;
    let mut out = SampledFunction::zeros(&f.grid);
    for term in &p.terms {
        let prod: Vec<C64> = fh.iter().zip(&term.values).map(|(a, b)| a * b).collect();
        let g = dft_inverse(&prod, p)?;
        match &term.coeff {
            None => out.values.iter_mut().zip(&g.values).for_each(|(o, v)| *o += v),
            Some(c) => out.values.iter_mut().zip(g.values.iter().zip(c)).for_each(|(o, (v, c))| *o += v * c),
        }
    }
    out.refresh_flag();
    Ok(out)
}

/// `(x_j k)^` for the kernel `k` of an x-independent symbol, i.e. `i d/dxi_j p`
/// computed spectrally. `j` is 0-based.
pub fn difference(p: &EuclideanSymbol, j: usize) -> Result<EuclideanSymbol> {
    ensure!(p.is_broadcast(), "difference needs an x-independent symbol");
    ensure!(j < p.dim, "axis {j} out of range for dimension {}", p.dim);
    let grid = p.grid();
    let m = p.m();
    let mut out = p.clone();
    out.order -= 1.0;
    for t in &mut out.terms {
        let mut k = dft_inverse(&t.values, p)?;
        for (q, v) in k.values.iter_mut().enumerate() {
            let i = grid.multi_index(q)[j];
            // the seam carries the average of x = -L and x = L
            let x = if i == 0 || i == m { 0.0 } else { grid.coords(q)[j] };
            *v *= x;
        }
        t.values = dft_forward(&k, p)?;
    }
    Ok(out)
}

/// The same symbol in the framework's representation on `d`.
pub fn to_framework(p: &EuclideanSymbol, d: &Discretization) -> Result<Symbol> {
    p.check(&d.grid)?;
    let FrequencyGrid::Abelian(a) = &d.dual else {
        bail!("the oracle compares against the abelian backend only");
    };
    let m = p.m() as i64;
    let slot_of = |i: usize| -> usize {
        a.xi(i)
            .iter()
            .fold(0usize, |acc, &x| acc * p.m() + ((x * p.half_width / std::f64::consts::PI).round() as i64 + m / 2) as usize)
    };
    let slots: Vec<usize> = (0..d.dual.len()).map(slot_of).collect();
    let mut s = Symbol::zero(&d.dual).with_class(p.order, 1.0, 0.0).with_label("oracle");
    for t in &p.terms {
        let field = FourierField {
            blocks: slots.iter().map(|&k| CMat::from_element(1, 1, t.values[k])).collect(),
            warning: false,
        };
        let coeff = t.coeff.as_ref().map(|c| SampledFunction::new(d.grid.clone(), c.clone())).transpose()?;
        s.terms.push(SymbolTerm { coeff, field });
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub rel_l2: f64,
    pub max_abs: f64,
    pub reference_norm: f64,
}

/// Difference of two sampled functions relative to the second.
pub fn discrepancy(a: &SampledFunction, reference: &SampledFunction) -> Result<Discrepancy> {
    let diff = a.sub(reference)?;
    Ok(Discrepancy {
        rel_l2: a.rel_l2_error(reference)?,
        max_abs: diff.sup_norm(),
        reference_norm: reference.norm_l2(),
    })
}

/// Framework `op_apply` against [`kn_quantize`], relative to the oracle.
pub fn compare(p: &EuclideanSymbol, f: &SampledFunction, d: &Discretization) -> Result<Discrepancy> {
    let sigma = to_framework(p, d)?;
    let ours = gpdo_core::quantizer::op_apply(&sigma, f, d)?;
    let theirs = kn_quantize(p, f)?;
    discrepancy(&ours, &theirs)
}

/// Largest entrywise gap between two symbols with the same lattice.
pub fn symbol_gap(a: &EuclideanSymbol, b: &EuclideanSymbol) -> Result<f64> {
    ensure!(a.is_broadcast() && b.is_broadcast(), "symbol_gap compares x-independent symbols");
    ensure!(a.lattice_len() == b.lattice_len(), "lattice mismatch");
    Ok((0..a.lattice_len()).map(|k| (a.value(0, k) - b.value(0, k)).norm()).fold(0.0, f64::max))
}
