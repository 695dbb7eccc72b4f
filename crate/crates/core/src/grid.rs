//! Box grids with product trapezoidal weights, sampled functions, and
//! finite-difference left-invariant derivatives.

use crate::error::{Error, Result};
use crate::group::{GradedStructure, HomogeneousMultiIndex};
use crate::prelude::*;

/// Absolute modulus above which a boundary sample counts as unresolved.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Tensor grid on `prod_j [-L_j, L_j]`, endpoint inclusive, with trapezoidal
/// weights. The last axis varies fastest in the flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupGrid {
    half_widths: Vec<f64>,
    points: usize,
    axes: Vec<Vec<f64>>,
    axis_weights: Vec<Vec<f64>>,
}

impl GroupGrid {
    /// Cube `[-L, L]^dim` with `points` nodes per axis.
    pub fn cube(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        Self::boxed(&vec![half_width; dim], points)
    }

    /// Box with per-axis half-widths and a common node count.
    pub fn boxed(half_widths: &[f64], points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::domain("a grid needs at least two points per axis"));
        }
        if half_widths.is_empty() || half_widths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::domain("half widths must be positive and finite"));
        }
        let mut axes = Vec::new();
        let mut axis_weights = Vec::new();
        for &l in half_widths {
            let h = 2.0 * l / (points - 1) as f64;
            let axis: Vec<f64> = (0..points)
                .map(|i| {
                    // Symmetric construction keeps the midpoint exactly at zero.
                    let m = (points - 1) as f64 / 2.0;
                    (i as f64 - m) * h
                })
                .collect();
            let mut w = vec![h; points];
            w[0] = h / 2.0;
            w[points - 1] = h / 2.0;
            axes.push(axis);
            axis_weights.push(w);
        }
        Ok(GroupGrid {
            half_widths: half_widths.to_vec(),
            points,
            axes,
            axis_weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(&self, d: usize) -> &[f64] {
        &self.axes[d]
    }

    pub fn axis_weights(&self, d: usize) -> &[f64] {
        &self.axis_weights[d]
    }

    pub fn spacing(&self, d: usize) -> f64 {
        2.0 * self.half_widths[d] / (self.points - 1) as f64
    }

    /// Per-axis indices of a flat index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            out[d] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(d, &i)| self.axes[d][i])
            .collect()
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(d, &i)| self.axis_weights[d][i])
            .product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Whether a flat index lies on the outer shell of the box.
    pub fn on_boundary(&self, idx: usize) -> bool {
        self.multi_index(idx)
            .iter()
            .any(|&i| i == 0 || i == self.points - 1)
    }

    pub fn contains_origin(&self) -> bool {
        self.points % 2 == 1
    }

    /// Flat index of the node equal to `x` (within `1e-9` per coordinate).
    pub fn find_node(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut multi = Vec::with_capacity(self.dim());
        for (d, &v) in x.iter().enumerate() {
            let h = self.spacing(d);
            let pos = (v + self.half_widths[d]) / h;
            let i = pos.round();
            if i < 0.0 || i > (self.points - 1) as f64 || (self.axes[d][i as usize] - v).abs() > 1e-9 {
                return None;
            }
            multi.push(i as usize);
        }
        Some(self.flat_index(&multi))
    }
}

/// Complex samples of a function on a grid, with the boundary-quality flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: GroupGrid,
    pub values: Vec<C64>,
    pub boundary_flag: bool,
}

impl SampledFunction {
    pub fn new(grid: GroupGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::domain("non-finite sample"));
        }
        let mut f = SampledFunction {
            grid,
            values,
            boundary_flag: false,
        };
        f.refresh_flag();
        Ok(f)
    }

    pub(crate) fn from_parts(grid: GroupGrid, values: Vec<C64>) -> Self {
        let mut f = SampledFunction {
            grid,
            values,
            boundary_flag: false,
        };
        f.refresh_flag();
        f
    }

    pub fn zeros(grid: &GroupGrid) -> Self {
        SampledFunction {
            values: vec![C64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
            boundary_flag: false,
        }
    }

    pub fn from_fn(grid: &GroupGrid, f: impl Fn(&[f64]) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self::from_parts(grid.clone(), values)
    }

    pub fn from_real_fn(grid: &GroupGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    /// Largest modulus on the outer shell.
    pub fn boundary_max(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.on_boundary(*i))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn refresh_flag(&mut self) {
        self.boundary_flag = self.boundary_max() > BOUNDARY_TOL;
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid inner product `sum_x w_x f(x) conj(g(x))`.
    pub fn inner(&self, other: &SampledFunction) -> Result<C64> {
        self.same_grid(other)?;
        let w = self.grid.weights();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&w)
            .map(|((a, b), w)| a * b.conj() * *w)
            .sum())
    }

    pub fn norm_l2(&self) -> f64 {
        let w = self.grid.weights();
        self.values
            .iter()
            .zip(&w)
            .map(|(a, w)| a.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Relative L2 distance `||self - other|| / ||other||`.
    pub fn rel_l2_error(&self, reference: &SampledFunction) -> Result<f64> {
        let d = self.sub(reference)?;
        Ok(d.norm_l2() / reference.norm_l2())
    }

    fn same_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                got: other.grid.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.same_grid(other)?;
        Ok(Self::from_parts(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.same_grid(other)?;
        Ok(Self::from_parts(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, c: C64) -> SampledFunction {
        Self::from_parts(self.grid.clone(), self.values.iter().map(|a| a * c).collect())
    }

    pub fn conj(&self) -> SampledFunction {
        Self::from_parts(self.grid.clone(), self.values.iter().map(|a| a.conj()).collect())
    }

    /// Pointwise product with another sample set on the same grid.
    pub fn mul(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.same_grid(other)?;
        Ok(Self::from_parts(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        ))
    }

    /// Pointwise multiplication by the monomial `x^alpha`.
    pub fn monomial_multiply(&self, alpha: &HomogeneousMultiIndex) -> Result<SampledFunction> {
        if alpha.alpha.len() != self.grid.dim() {
            return Err(Error::Dimension {
                expected: self.grid.dim(),
                got: alpha.alpha.len(),
            });
        }
        if alpha.is_zero() {
            return Ok(self.clone());
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let m: f64 = self
                    .grid
                    .multi_index(i)
                    .iter()
                    .enumerate()
                    .map(|(d, &k)| self.grid.axes[d][k].powi(alpha.alpha[d] as i32))
                    .product();
                v * m
            })
            .collect();
        Ok(Self::from_parts(self.grid.clone(), values))
    }

    /// Partial derivative along one axis: order-4 central stencil in the
    /// interior, order-2 central one node in, order-2 one-sided on the faces.
    pub fn partial(&self, axis: usize) -> SampledFunction {
        let n = self.grid.points;
        let h = self.grid.spacing(axis);
        let stride = n.pow((self.grid.dim() - 1 - axis) as u32);
        let mut out = vec![C64::new(0.0, 0.0); self.values.len()];
        let v = &self.values;
        for (idx, o) in out.iter_mut().enumerate() {
            let i = (idx / stride) % n;
            let at = |k: isize| v[(idx as isize + k * stride as isize) as usize];
            *o = if i >= 2 && i + 2 < n {
                (at(-2) - at(2) + (at(1) - at(-1)) * 8.0) / (12.0 * h)
            } else if i == 0 {
                (at(0) * -3.0 + at(1) * 4.0 - at(2)) / (2.0 * h)
            } else if i == n - 1 {
                (at(0) * 3.0 - at(-1) * 4.0 + at(-2)) / (2.0 * h)
            } else {
                (at(1) - at(-1)) / (2.0 * h)
            };
        }
        Self::from_parts(self.grid.clone(), out)
    }
}

/// Applies the left-invariant field `X_j` (1-based) by finite differences.
pub fn apply_field(s: &GradedStructure, j: usize, f: &SampledFunction) -> Result<SampledFunction> {
    if f.grid.dim() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: f.grid.dim(),
        });
    }
    let coeffs = s.left_invariant_field_coeffs(j)?;
    let mut out = vec![C64::new(0.0, 0.0); f.values.len()];
    for (k, poly) in coeffs.terms.iter().enumerate() {
        if poly.is_empty() {
            continue;
        }
        let dk = f.partial(k);
        for (idx, o) in out.iter_mut().enumerate() {
            let x = f.grid.coords(idx);
            let p: f64 = poly
                .iter()
                .map(|(c, e)| c * e.iter().zip(&x).map(|(&q, &v)| v.powi(q as i32)).product::<f64>())
                .sum();
            *o += dk.values[idx] * p;
        }
    }
    let mut g = SampledFunction::from_parts(f.grid.clone(), out);
    g.boundary_flag |= f.boundary_flag;
    Ok(g)
}

/// `X^beta f = X_1^{beta_1} X_2^{beta_2} ... f` (the rightmost factor acts first).
///
/// The result carries the boundary flag of the input: a set flag warns that
/// the one-sided boundary stencils acted on non-negligible data.
pub fn apply_x_beta(
    s: &GradedStructure,
    beta: &HomogeneousMultiIndex,
    f: &SampledFunction,
) -> Result<SampledFunction> {
    if beta.alpha.len() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: beta.alpha.len(),
        });
    }
    let mut g = f.clone();
    for j in (0..s.dim()).rev() {
        for _ in 0..beta.alpha[j] {
            g = apply_field(s, j + 1, &g)?;
        }
    }
    g.boundary_flag |= f.boundary_flag;
    Ok(g)
}
