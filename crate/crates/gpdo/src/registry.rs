//! Named spectral multipliers `phi(mu)`, coefficients `a(x)` and test
//! functions. There is deliberately no expression parser: names are looked up
//! in fixed tables and may carry one numeric parameter after a colon.

use anyhow::{anyhow, bail, Result};
use gpdo_core::samples::{modulated_gaussian, modulated_gaussian_i_plus_r, VacuumPacket};
use gpdo_core::C64;

pub type Multiplier = Box<dyn Fn(f64) -> f64 + Sync + Send>;
pub type Coefficient = Box<dyn Fn(&[f64]) -> f64 + Sync + Send>;
pub type TestFunction = Box<dyn Fn(&[f64]) -> C64 + Sync + Send>;

pub const MULTIPLIERS: &[&str] = &["heat[:tau]", "power[:gamma]", "resolvent", "bump[:mu0]", "const:c", "one"];
pub const COEFFICIENTS: &[&str] = &["1", "const:c", "1+tanh(xj)", "1-tanh(xj)", "xj", "exp(-|x|^2)"];
pub const FUNCTIONS: &[&str] = &[
    "gaussian[:s]",
    "modulated_gaussian[:omega]",
    "modulated_gaussian_rhs[:omega]",
    "packet[:lambda0[:sigma]]",
    "packet_rhs[:lambda0[:sigma]]",
    "trig[:k]",
];

fn split(name: &str) -> (&str, Vec<&str>) {
    let mut it = name.split(':');
    let head = it.next().unwrap_or("").trim();
    (head, it.map(str::trim).collect())
}

fn num(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| anyhow!("{what}: '{s}' is not a number"))?;
    if !v.is_finite() {
        bail!("{what}: '{s}' is not finite");
    }
    Ok(v)
}

/// Looks up `phi` and its natural order `m` for a Rockland operator of degree `nu`.
///
/// `gamma` overrides the exponent of `power`.
pub fn multiplier(name: &str, gamma: Option<f64>, nu: u32) -> Result<(Multiplier, f64)> {
    let (head, args) = split(name);
    let arg = |i: usize, default: f64| -> Result<f64> { args.get(i).map_or(Ok(default), |s| num(s, name)) };
    let nu = nu as f64;
    Ok(match head {
        "heat" => {
            let tau = arg(0, 1.0)?;
            if tau <= 0.0 {
                bail!("{name}: heat time must be positive");
            }
            (Box::new(move |mu: f64| (-tau * mu).exp()), -10.0)
        }
        "power" => {
            let g = match (gamma, args.first()) {
                (Some(g), None) => g,
                (None, Some(s)) => num(s, name)?,
                (None, None) => bail!("power needs an exponent: 'power:g' or a gamma field"),
                (Some(_), Some(_)) => bail!("power exponent given twice"),
            };
            (Box::new(move |mu: f64| (1.0 + mu).powf(g)), g * nu)
        }
        "resolvent" => (Box::new(|mu: f64| 1.0 / (1.0 + mu)), -nu),
        "bump" => {
            let mu0 = arg(0, 10.0)?;
            if mu0 <= 0.0 {
                bail!("{name}: bump radius must be positive");
            }
            (
                Box::new(move |mu: f64| {
                    let s = mu / mu0;
                    if s.abs() >= 1.0 {
                        0.0
                    } else {
                        (1.0 - 1.0 / (1.0 - s * s)).exp()
                    }
                }),
                -10.0,
            )
        }
        "one" => (Box::new(|_| 1.0), 0.0),
        "const" => {
            let c = args.first().map(|s| num(s, name)).transpose()?.ok_or_else(|| anyhow!("const needs a value"))?;
            (Box::new(move |_| c), 0.0)
        }
        _ => bail!("unknown multiplier '{name}'; known: {}", MULTIPLIERS.join(", ")),
    })
}

fn axis_of(s: &str, dim: usize) -> Option<usize> {
    let j: usize = s.strip_prefix('x')?.parse().ok()?;
    (1..=dim).contains(&j).then_some(j - 1)
}

pub fn coefficient(name: &str, dim: usize) -> Result<Coefficient> {
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    let (head, args) = split(&compact);
    if head == "const" {
        let c = args.first().map(|s| num(s, name)).transpose()?.ok_or_else(|| anyhow!("const needs a value"))?;
        return Ok(Box::new(move |_| c));
    }
    if let Ok(c) = compact.parse::<f64>() {
        if c.is_finite() {
            return Ok(Box::new(move |_| c));
        }
    }
    if compact == "exp(-|x|^2)" {
        return Ok(Box::new(|x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp()));
    }
    for (prefix, sign) in [("1+tanh(", 1.0), ("1-tanh(", -1.0)] {
        if let Some(rest) = compact.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')) {
            if let Some(j) = axis_of(rest, dim) {
                return Ok(Box::new(move |x: &[f64]| 1.0 + sign * x[j].tanh()));
            }
        }
    }
    if let Some(j) = axis_of(&compact, dim) {
        return Ok(Box::new(move |x: &[f64]| x[j]));
    }
    bail!("unknown coefficient '{name}' in dimension {dim}; known: {}", COEFFICIENTS.join(", "))
}

/// Test functions; `half_width` is used by `trig`, which is band-limited and
/// periodic on the cube.
pub fn function(name: &str, dim: usize, half_width: f64) -> Result<TestFunction> {
    let (head, args) = split(name);
    let arg = |i: usize, default: f64| -> Result<f64> { args.get(i).map_or(Ok(default), |s| num(s, name)) };
    Ok(match head {
        "gaussian" => {
            let s = arg(0, 1.0)?;
            if s <= 0.0 {
                bail!("{name}: width must be positive");
            }
            Box::new(move |x: &[f64]| C64::new((-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * s * s)).exp(), 0.0))
        }
        "modulated_gaussian" => {
            if dim != 3 {
                bail!("modulated_gaussian lives on the three-dimensional group");
            }
            let g = modulated_gaussian(arg(0, 3.0)?);
            Box::new(move |x: &[f64]| g(x))
        }
        // `_rhs` variants are `(I + R) g` for the sub-Laplacian, so that the
        // resolvent maps them back to the plain function
        "modulated_gaussian_rhs" => {
            if dim != 3 {
                bail!("modulated_gaussian_rhs lives on the three-dimensional group");
            }
            let g = modulated_gaussian_i_plus_r(arg(0, 3.0)?);
            Box::new(move |x: &[f64]| g(x))
        }
        "packet" | "packet_rhs" => {
            if dim != 3 {
                bail!("{head} lives on the three-dimensional group");
            }
            let (l0, sg) = (arg(0, 6.0)?, arg(1, 0.9)?);
            if l0 <= 0.0 || sg <= 0.0 {
                bail!("{name}: centre and width must be positive");
            }
            let p = if head == "packet" {
                VacuumPacket::new(l0, sg)
            } else {
                VacuumPacket::with_profile(l0, sg, |l| 1.0 + l)
            };
            Box::new(move |x: &[f64]| p.eval(x))
        }
        "trig" => {
            let k = arg(0, 2.0)?;
            if k.fract() != 0.0 || k < 0.0 {
                bail!("{name}: the mode must be a nonnegative integer");
            }
            let w = core::f64::consts::PI / half_width;
            Box::new(move |x: &[f64]| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let kj = (k - j as f64).max(0.0);
                        C64::new((kj * w * v).cos() + 0.5, 0.3 * ((kj + 1.0) * w * v).sin())
                    })
                    .product()
            })
        }
        _ => bail!("unknown function '{name}'; known: {}", FUNCTIONS.join(", ")),
    })
}
