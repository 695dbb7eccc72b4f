//! Run configuration: JSON on disk, overridden by command-line flags, and
//! validated as a whole before anything runs.

use std::fmt;
use std::path::PathBuf;

use gpdo_core::repn::{AbelianDual, HeisenbergDual, HeisenbergParams};
use gpdo_core::symbol::{self, Symbol};
use gpdo_core::{
    Discretization, FrequencyGrid, GradedStructure, GroupGrid, HomogeneousMultiIndex, RocklandSpec, SampledFunction,
};
use serde::{Deserialize, Serialize};

use crate::registry;

/// Either a registered name (`heisenberg1`, `abelian:n`) or explicit structure data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureSpec {
    Named(String),
    Custom(CustomStructure),
}

impl Default for StructureSpec {
    fn default() -> Self {
        StructureSpec::Named("heisenberg1".into())
    }
}

/// Brackets are `[j, k, l, c]` meaning `[X_j, X_k] = c X_l`, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomStructure {
    pub name: String,
    pub weights: Vec<u32>,
    #[serde(default)]
    pub brackets: Vec<(usize, usize, usize, f64)>,
    #[serde(default)]
    pub nu0: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub half_width: Option<f64>,
    /// Per-axis half-widths; excludes `half_width`.
    pub half_widths: Option<Vec<f64>>,
    pub points: Option<usize>,
}

/// Heisenberg dual on the ladder `refine`, with optional overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencySpec {
    pub refine: u8,
    pub truncation: Option<usize>,
    pub lambda_min: Option<f64>,
    pub lambda_knee: Option<f64>,
    pub lambda_max: Option<f64>,
    pub graded_panels: Option<usize>,
    pub panels: Option<usize>,
    pub nodes_per_panel: Option<usize>,
    pub cutoff: Option<f64>,
    pub plancherel: Option<f64>,
    /// `sublaplacian` (default) or `graded`.
    pub rockland: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSpec {
    Identity,
    Multiplier {
        phi: String,
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        m: Option<f64>,
    },
    Invariant {
        alpha: Vec<u32>,
    },
    CoeffMultiplier {
        a: String,
        phi: String,
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        m: Option<f64>,
    },
    Sum {
        terms: Vec<SymbolSpec>,
        #[serde(default)]
        m: Option<f64>,
    },
}

/// Command-specific parameters; each command reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub alpha: Option<Vec<Vec<u32>>>,
    pub beta: Option<Vec<Vec<u32>>>,
    pub gamma: Option<Vec<f64>>,
    pub m: Option<f64>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
    pub trials: Option<usize>,
    pub iterations: Option<usize>,
    /// Base point of kernel slices; must be a grid node.
    pub x: Option<Vec<f64>>,
    pub far_half_width: Option<f64>,
    pub far_points: Option<usize>,
    /// Box half-widths for the resolvent decay profile.
    pub boxes: Option<Vec<f64>>,
    /// Input file (`.csv` or binary) replacing `function`.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub structure: StructureSpec,
    pub grid: Option<GridSpec>,
    pub frequency: FrequencySpec,
    pub symbol: Option<SymbolSpec>,
    pub function: Option<String>,
    pub params: Params,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            structure: StructureSpec::default(),
            grid: None,
            frequency: FrequencySpec::default(),
            symbol: None,
            function: None,
            params: Params::default(),
            seed: 7,
            threads: None,
            out: None,
        }
    }
}

/// A problem with one configuration field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub errors: Vec<FieldError>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.errors.iter().map(|e| format!("{}: {}", e.field, e.message)).collect();
        write!(f, "invalid configuration: {}", parts.join("; "))
    }
}

impl std::error::Error for ConfigError {}

#[derive(Default)]
struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(FieldError {
            field: field.into(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, field: &str, message: &str) {
        if !ok {
            self.push(field, message);
        }
    }

    fn from<T>(&mut self, r: anyhow::Result<T>, field: &str) -> Option<T> {
        r.map_err(|e| self.push(field, e.to_string())).ok()
    }
}

fn positive(v: Option<f64>) -> bool {
    v.is_none_or(|v| v.is_finite() && v > 0.0)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError {
            errors: vec![FieldError {
                field: "<json>".into(),
                message: e.to_string(),
            }],
        })
    }

    pub fn structure(&self) -> anyhow::Result<GradedStructure> {
        Ok(match &self.structure {
            StructureSpec::Named(n) if n == "heisenberg1" => GradedStructure::heisenberg1(),
            StructureSpec::Named(n) => match n.strip_prefix("abelian:").map(str::parse::<usize>) {
                Some(Ok(k)) if (1..=3).contains(&k) => GradedStructure::abelian(k),
                Some(_) => anyhow::bail!("abelian dimension must be 1, 2 or 3"),
                None => anyhow::bail!("unknown structure '{n}'; known: heisenberg1, abelian:n"),
            },
            StructureSpec::Custom(c) => GradedStructure::new(&c.name, &c.weights, &c.brackets, c.nu0)?,
        })
    }

    fn heisenberg_params(&self, s: &GradedStructure) -> anyhow::Result<HeisenbergParams> {
        let f = &self.frequency;
        let mut p = HeisenbergParams::ladder(f.refine);
        if let Some(v) = f.truncation {
            p.truncation = v;
        }
        if let Some(v) = f.lambda_min {
            p.lambda_min = v;
        }
        if let Some(v) = f.lambda_knee {
            p.lambda_knee = v;
        }
        if let Some(v) = f.lambda_max {
            p.lambda_max = v;
        }
        if let Some(v) = f.graded_panels {
            p.graded_panels = v;
        }
        if let Some(v) = f.panels {
            p.panels = v;
        }
        if let Some(v) = f.nodes_per_panel {
            p.nodes_per_panel = v;
        }
        if let Some(v) = f.cutoff {
            p.sublaplacian_cutoff = Some(v);
        }
        if let Some(v) = f.plancherel {
            p.plancherel = v;
        }
        p.rockland = match f.rockland.as_deref() {
            None | Some("sublaplacian") => RocklandSpec::sublaplacian(),
            Some("graded") => RocklandSpec::graded_powers(s),
            Some(o) => anyhow::bail!("unknown Rockland operator '{o}'; known: sublaplacian, graded"),
        };
        Ok(p)
    }

    fn grid_for(&self, s: &GradedStructure) -> anyhow::Result<GroupGrid> {
        let g = self.grid.clone().unwrap_or_default();
        let abelian = s.is_abelian();
        let half = g.half_width.unwrap_or(if abelian { 10.0 } else { 6.0 });
        let spacing = if abelian {
            0.5
        } else {
            match self.frequency.refine {
                0 => 0.25,
                1 => 0.2,
                _ => 1.0 / 6.0,
            }
        };
        let widths = g.half_widths.unwrap_or_else(|| vec![half; s.dim()]);
        anyhow::ensure!(widths.len() == s.dim(), "expected {} half-widths, got {}", s.dim(), widths.len());
        let widest = widths.iter().cloned().fold(0.0, f64::max);
        let points = g.points.unwrap_or((2.0 * widest / spacing).round() as usize + 1);
        Ok(GroupGrid::boxed(&widths, points)?)
    }

    /// Structure, grid and dual described by this configuration.
    pub fn discretization(&self) -> anyhow::Result<Discretization> {
        let s = self.structure()?;
        let grid = self.grid_for(&s)?;
        let dual = if s.is_abelian() {
            FrequencyGrid::Abelian(AbelianDual::for_grid(&grid)?)
        } else if s.name() == "heisenberg1" {
            FrequencyGrid::Heisenberg(HeisenbergDual::new(self.heisenberg_params(&s)?)?)
        } else {
            anyhow::bail!("structure '{}' has no Fourier backend; only heisenberg1 and abelian:n do", s.name());
        };
        Ok(Discretization::new(s, grid, dual)?)
    }

    /// Input function: `params.input` if given, else the named `function`.
    pub fn input_function(&self, d: &Discretization) -> anyhow::Result<SampledFunction> {
        if let Some(path) = &self.params.input {
            let f = crate::io::load(path)?;
            anyhow::ensure!(f.grid == d.grid, "input grid in {} does not match the configured grid", path.display());
            return Ok(f);
        }
        let default = if d.structure.is_abelian() { "trig:2" } else { "modulated_gaussian:3" };
        let name = self.function.as_deref().unwrap_or(default);
        let f = registry::function(name, d.grid.dim(), d.grid.half_widths()[0])?;
        Ok(SampledFunction::from_fn(&d.grid, |x| f(x)))
    }

    /// Checks every field it can and reports all problems at once;
    /// `needs_backend` also requires a structure with a Fourier backend.
    pub fn validate(&self, needs_backend: bool) -> Result<(), ConfigError> {
        let mut e = Errors::default();
        let s = e.from(self.structure(), "structure");
        if let Some(g) = &self.grid {
            e.check(positive(g.half_width), "grid.half_width", "must be a positive number");
            e.check(
                g.half_width.is_none() || g.half_widths.is_none(),
                "grid",
                "give either half_width or half_widths, not both",
            );
            if let Some(w) = &g.half_widths {
                e.check(w.iter().all(|v| v.is_finite() && *v > 0.0), "grid.half_widths", "must all be positive");
            }
            if let Some(n) = g.points {
                e.check(n >= 5 && n % 2 == 1, "grid.points", "must be odd and at least 5");
            }
        }
        let f = &self.frequency;
        e.check(f.refine <= 2, "frequency.refine", "must be 0, 1 or 2");
        e.check(f.truncation.is_none_or(|n| n >= 2), "frequency.truncation", "must be at least 2");
        e.check(positive(f.lambda_min), "frequency.lambda_min", "must be a positive number");
        e.check(positive(f.lambda_knee), "frequency.lambda_knee", "must be a positive number");
        e.check(positive(f.lambda_max), "frequency.lambda_max", "must be a positive number");
        e.check(positive(f.cutoff), "frequency.cutoff", "must be a positive number");
        e.check(positive(f.plancherel), "frequency.plancherel", "must be a positive number");
        for (name, v) in [("panels", f.panels), ("graded_panels", f.graded_panels), ("nodes_per_panel", f.nodes_per_panel)] {
            e.check(v.is_none_or(|n| n >= 1), &format!("frequency.{name}"), "must be at least 1");
        }
        if let Some(r) = &f.rockland {
            e.check(r == "sublaplacian" || r == "graded", "frequency.rockland", "must be 'sublaplacian' or 'graded'");
        }
        let p = &self.params;
        if let (Some(rho), Some(delta)) = (p.rho, p.delta) {
            e.check(0.0 <= delta && delta <= rho && rho <= 1.0 && delta != 1.0, "params", "need 0 <= delta <= rho <= 1, delta != 1");
        }
        e.check(p.trials.is_none_or(|t| t >= 2), "params.trials", "must be at least 2");
        e.check(p.iterations.is_none_or(|t| t >= 8), "params.iterations", "must be at least 8");
        e.check(p.far_points.is_none_or(|n| n >= 5 && n % 2 == 1), "params.far_points", "must be odd and at least 5");
        e.check(positive(p.far_half_width), "params.far_half_width", "must be a positive number");
        if let Some(b) = &p.boxes {
            e.check(!b.is_empty() && b.iter().all(|v| v.is_finite() && *v > 0.0), "params.boxes", "must be a non-empty list of positive half-widths");
        }
        e.check(self.threads.is_none_or(|t| t >= 1), "threads", "must be at least 1");
        if let Some(s) = &s {
            let n = s.dim();
            for (name, list) in [("params.alpha", &p.alpha), ("params.beta", &p.beta)] {
                if let Some(list) = list {
                    e.check(list.iter().all(|a| a.len() == n), name, &format!("every multi-index needs {n} entries"));
                }
            }
            if let Some(x) = &p.x {
                e.check(x.len() == n, "params.x", &format!("needs {n} coordinates"));
            }
            if let Some(name) = &self.function {
                e.from(registry::function(name, n, 1.0), "function");
            }
            if let Some(sym) = &self.symbol {
                validate_symbol(sym, n, "symbol", &mut e);
            }
            if e.0.is_empty() && needs_backend {
                e.from(self.discretization(), "structure");
            }
        }
        if e.0.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { errors: e.0 })
        }
    }
}

fn validate_symbol(sym: &SymbolSpec, n: usize, field: &str, e: &mut Errors) {
    match sym {
        SymbolSpec::Identity => {}
        SymbolSpec::Multiplier { phi, gamma, .. } => {
            e.from(registry::multiplier(phi, *gamma, 2), &format!("{field}.phi"));
        }
        SymbolSpec::Invariant { alpha } => {
            e.check(alpha.len() == n, &format!("{field}.alpha"), &format!("needs {n} entries"));
        }
        SymbolSpec::CoeffMultiplier { a, phi, gamma, .. } => {
            e.from(registry::coefficient(a, n), &format!("{field}.a"));
            e.from(registry::multiplier(phi, *gamma, 2), &format!("{field}.phi"));
        }
        SymbolSpec::Sum { terms, .. } => {
            e.check(!terms.is_empty(), &format!("{field}.terms"), "must not be empty");
            for (i, t) in terms.iter().enumerate() {
                validate_symbol(t, n, &format!("{field}.terms[{i}]"), e);
            }
        }
    }
}

/// Builds the framework symbol for `spec` on `d`.
pub fn build_symbol(spec: &SymbolSpec, d: &Discretization) -> anyhow::Result<Symbol> {
    let nu = d.dual.rockland().nu;
    Ok(match spec {
        SymbolSpec::Identity => Symbol::identity(&d.dual),
        SymbolSpec::Multiplier { phi, gamma, m } => {
            let (f, m0) = registry::multiplier(phi, *gamma, nu)?;
            symbol::from_multiplier(&*f, &d.dual, m.unwrap_or(m0))?.with_label(phi)
        }
        SymbolSpec::Invariant { alpha } => symbol::from_invariant_operator(&HomogeneousMultiIndex::new(alpha.clone()), d)?,
        SymbolSpec::CoeffMultiplier { a, phi, gamma, m } => {
            let (f, m0) = registry::multiplier(phi, *gamma, nu)?;
            let c = registry::coefficient(a, d.grid.dim())?;
            let coeff = SampledFunction::from_real_fn(&d.grid, |x| c(x));
            symbol::from_coefficient_and_multiplier(&coeff, &*f, &d.dual, m.unwrap_or(m0))?
                .with_label(&format!("({a}) {phi}"))
        }
        SymbolSpec::Sum { terms, m } => {
            let mut parts = terms.iter().map(|t| build_symbol(t, d));
            let mut acc = parts.next().ok_or_else(|| anyhow::anyhow!("empty sum"))??;
            for p in parts {
                let p = p?;
                let order = acc.order.max(p.order);
                acc = acc.add(&p)?.with_class(order, 1.0, 0.0);
            }
            let order = m.unwrap_or(acc.order);
            acc.with_class(order, 1.0, 0.0).with_label("sum")
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_baseline() {
        let c = RunConfig::default();
        c.validate(true).unwrap();
        let d = c.discretization().unwrap();
        assert_eq!(d.grid.points_per_axis(), 49);
        assert_eq!(d.dual.block_dim(), 25);
    }

    #[test]
    fn symbol_specs_parse() {
        let s: SymbolSpec = serde_json::from_str(r#"{"kind":"multiplier","phi":"heat","m":-10}"#).unwrap();
        assert_eq!(s, SymbolSpec::Multiplier { phi: "heat".into(), gamma: None, m: Some(-10.0) });
        let s: SymbolSpec = serde_json::from_str(r#"{"kind":"invariant","alpha":[0,0,1]}"#).unwrap();
        assert_eq!(s, SymbolSpec::Invariant { alpha: vec![0, 0, 1] });
        let s: SymbolSpec =
            serde_json::from_str(r#"{"kind":"coeff_multiplier","a":"1+tanh(x1)","phi":"power","gamma":0.5}"#).unwrap();
        assert!(matches!(s, SymbolSpec::CoeffMultiplier { .. }));
    }

    #[test]
    fn field_level_messages() {
        let c = RunConfig::from_json(
            r#"{"grid":{"points":4},"frequency":{"refine":5},"symbol":{"kind":"multiplier","phi":"nope"},
                "params":{"alpha":[[1,0]]}}"#,
        )
        .unwrap();
        let err = c.validate(true).unwrap_err();
        let fields: Vec<&str> = err.errors.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(fields, ["grid.points", "frequency.refine", "params.alpha", "symbol.phi"]);
        assert!(RunConfig::from_json(r#"{"bogus":1}"#).is_err());
        let c = RunConfig::from_json(r#"{"structure":"abelian:7"}"#).unwrap();
        assert_eq!(c.validate(true).unwrap_err().errors[0].field, "structure");
    }

    #[test]
    fn custom_structure_without_backend() {
        let c = RunConfig::from_json(
            r#"{"structure":{"name":"h1copy","weights":[1,1,2],"brackets":[[1,2,3,1.0]]}}"#,
        )
        .unwrap();
        assert!(c.validate(false).is_ok());
        assert_eq!(c.validate(true).unwrap_err().errors[0].field, "structure");
        assert!(c.discretization().is_err());
    }
}
