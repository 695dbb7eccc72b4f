//! Closed-form test functions on H1 used by the experiments.

use crate::prelude::*;
use crate::quadrature::gauss_legendre;
use crate::repn::default_plancherel;

/// `e^{-i omega t} e^{-(x^2 + y^2 + t^2)/2}`.
pub fn modulated_gaussian(omega: f64) -> impl Fn(&[f64]) -> C64 + Sync {
    move |x: &[f64]| {
        C64::new(0.0, -omega * x[2]).exp() * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp()
    }
}

/// `(I + R) g` for `g = modulated_gaussian(omega)` and the sub-Laplacian `R = -(X^2 + Y^2)`.
pub fn modulated_gaussian_i_plus_r(omega: f64) -> impl Fn(&[f64]) -> C64 + Sync {
    let g = modulated_gaussian(omega);
    move |x: &[f64]| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let tw = C64::new(x[2], omega);
        g(x) * (C64::new(3.0, 0.0) - (tw * tw + 3.0) * (r2 / 4.0))
    }
}

/// Function whose Fourier field is `psi(lambda) |0><0|` for `lambda > 0` and
/// zero otherwise, with a Gaussian profile `psi` centred at `lambda0`:
/// `f(x, y, t) = c_P int psi(l) l e^{i l t} e^{-l (x^2 + y^2) / 4} dl`.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumPacket {
    pub lambda0: f64,
    pub sigma: f64,
    /// `(lambda, c_P * weight * psi(lambda) * lambda)` quadrature pairs.
    nodes: Vec<(f64, f64)>,
}

impl VacuumPacket {
    pub fn new(lambda0: f64, sigma: f64) -> Self {
        Self::with_profile(lambda0, sigma, |_| 1.0)
    }

    /// Packet with profile `psi(l) * h(l)`; `h(l) = 1 + l` gives `(I + R) f`
    /// for the sub-Laplacian, which acts on the vacuum mode as `l`.
    pub fn with_profile(lambda0: f64, sigma: f64, h: impl Fn(f64) -> f64) -> Self {
        let (a, b) = ((lambda0 - 9.0 * sigma).max(1e-9), lambda0 + 9.0 * sigma);
        let (xs, ws) = gauss_legendre(200);
        let cp = default_plancherel();
        let nodes = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let l = (a + b) / 2.0 + (b - a) / 2.0 * x;
                let psi = (-(l - lambda0).powi(2) / (2.0 * sigma * sigma)).exp();
                (l, cp * w * (b - a) / 2.0 * psi * h(l) * l)
            })
            .collect();
        VacuumPacket { lambda0, sigma, nodes }
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        self.nodes
            .iter()
            .map(|&(l, c)| C64::from_polar(c * (-l * r2 / 4.0).exp(), l * x[2]))
            .sum()
    }

    /// `psi(lambda)` itself, for comparisons on the dual side.
    pub fn profile(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        (-(lambda - self.lambda0).powi(2) / (2.0 * self.sigma * self.sigma)).exp()
    }
}
