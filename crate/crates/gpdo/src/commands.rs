//! Experiment drivers behind the `gpdo` subcommands.
//!
//! Every command returns an [`Output`]: a JSON summary plus optional CSV
//! tables and sampled functions. [`run`] writes them, together with a
//! manifest, to the output directory. Summaries never contain timings, so
//! they are bit-identical across runs with the same configuration, seed and
//! thread count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, ensure, Context, Result};
use gpdo_core::fourier::{self, plancherel_norm_sq, trace_class_diagnostic};
use gpdo_core::inequalities::{self, schwartz_decay_report, TrialFamily};
use gpdo_core::quantizer::{self, decay_report};
use gpdo_core::symbol::{self, Symbol};
use gpdo_core::{C64, Discretization, GroupGrid, HomogeneousMultiIndex, SampledFunction, SymbolClassParams};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{build_symbol, RunConfig, SymbolSpec};
use crate::oracle::{self, EuclideanSymbol};
use crate::registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Structure,
    FourierRoundtrip,
    Quantize,
    Seminorm,
    ClassReport,
    Kernel,
    Garding,
    Resolvent,
    OracleCompare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Structure => "structure",
            Command::FourierRoundtrip => "fourier-roundtrip",
            Command::Quantize => "quantize",
            Command::Seminorm => "seminorm",
            Command::ClassReport => "class-report",
            Command::Kernel => "kernel",
            Command::Garding => "garding",
            Command::Resolvent => "resolvent",
            Command::OracleCompare => "oracle-compare",
        }
    }

    fn needs_backend(self) -> bool {
        self != Command::Structure
    }
}

/// A CSV table: header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub summary: Value,
    pub tables: Vec<Table>,
    pub functions: Vec<(String, SampledFunction)>,
}

impl Output {
    fn summary(summary: Value) -> Self {
        Output {
            summary,
            tables: Vec::new(),
            functions: Vec::new(),
        }
    }
}

fn e(v: f64) -> String {
    format!("{v:e}")
}

fn idx(a: &[u32]) -> String {
    a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn symbol_of(cfg: &RunConfig, d: &Discretization) -> Result<Symbol> {
    let spec = cfg.symbol.as_ref().ok_or_else(|| anyhow!("symbol: this command needs a symbol (--symbol or config)"))?;
    build_symbol(spec, d)
}

fn class_params(cfg: &RunConfig, sigma: &Symbol, d: &Discretization) -> Result<SymbolClassParams> {
    let p = &cfg.params;
    Ok(SymbolClassParams::new(
        p.m.unwrap_or(sigma.order),
        p.rho.unwrap_or(sigma.rho),
        p.delta.unwrap_or(sigma.delta),
        d.dual.rockland().nu,
    )?)
}

fn indices(list: &Option<Vec<Vec<u32>>>, n: usize) -> Vec<HomogeneousMultiIndex> {
    match list {
        Some(l) => l.iter().map(|a| HomogeneousMultiIndex::new(a.clone())).collect(),
        None => vec![HomogeneousMultiIndex::zero(n)],
    }
}

fn symbol_json(s: &Symbol) -> Value {
    json!({
        "label": s.label,
        "order": s.order,
        "rho": s.rho,
        "delta": s.delta,
        "terms": s.terms.len(),
        "broadcast": s.is_broadcast(),
        "warning": s.warning,
    })
}

fn discretization_json(d: &Discretization) -> Value {
    json!({
        "structure": d.structure.name(),
        "backend": d.dual.backend_name(),
        "half_widths": d.grid.half_widths(),
        "points_per_axis": d.grid.points_per_axis(),
        "frequency_nodes": d.dual.len(),
        "block_dim": d.dual.block_dim(),
        "retained_dim": d.dual.retained_dim(),
        "rockland_degree": d.dual.rockland().nu,
    })
}

pub fn structure(cfg: &RunConfig) -> Result<Output> {
    let s = cfg.structure()?;
    let n = s.dim();
    let mut brackets = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            for l in 0..n {
                let c = s.constant(j, k, l);
                if c != 0.0 {
                    brackets.push(json!([j + 1, k + 1, l + 1, c]));
                }
            }
        }
    }
    Ok(Output::summary(json!({
        "name": s.name(),
        "n": n,
        "Q": s.homogeneous_dimension(),
        "weights": s.weights(),
        "step": s.step(),
        "nu0": s.nu0(),
        "abelian": s.is_abelian(),
        "brackets": brackets,
        "jacobi_residual": s.jacobi_residual(),
        "graded": s.check_gradation(),
        "nilpotent": s.check_nilpotent(),
    })))
}

pub fn fourier_roundtrip(cfg: &RunConfig) -> Result<Output> {
    let d = cfg.discretization()?;
    let f = cfg.input_function(&d)?;
    let fh = fourier::forward(&f, &d.dual)?;
    let back = fourier::inverse(&fh, &d.grid, &d.dual)?;
    let norm_sq = f.norm_l2().powi(2);
    ensure!(norm_sq > 0.0, "function: the input vanishes on the grid");
    Ok(Output::summary(json!({
        "discretization": discretization_json(&d),
        "rel_l2_error": back.rel_l2_error(&f)?,
        "parseval_defect": (plancherel_norm_sq(&fh, &d.dual) - norm_sq) / norm_sq,
        "trace_class": trace_class_diagnostic(&fh, &d.dual),
        "boundary_warning": f.boundary_flag,
    })))
}

pub fn quantize(cfg: &RunConfig) -> Result<Output> {
    let d = cfg.discretization()?;
    let sigma = symbol_of(cfg, &d)?;
    let f = cfg.input_function(&d)?;
    let u = quantizer::op_apply(&sigma, &f, &d)?;
    let mut out = Output::summary(json!({
        "discretization": discretization_json(&d),
        "symbol": symbol_json(&sigma),
        "input_l2": f.norm_l2(),
        "output_l2": u.norm_l2(),
        "output_sup": u.sup_norm(),
        "boundary_warning": u.boundary_flag,
    }));
    out.functions.push(("output".into(), u));
    Ok(out)
}

pub fn seminorm(cfg: &RunConfig) -> Result<Output> {
    let d = cfg.discretization()?;
    let sigma = symbol_of(cfg, &d)?;
    let params = class_params(cfg, &sigma, &d)?;
    let n = d.structure.dim();
    let gammas = cfg.params.gamma.clone().unwrap_or_else(|| vec![0.0]);
    let mut table = Table::new("seminorms", &["alpha", "beta", "gamma", "value"]);
    let mut rows = Vec::new();
    for a in indices(&cfg.params.alpha, n) {
        for b in indices(&cfg.params.beta, n) {
            for &g in &gammas {
                let v = symbol::seminorm(&sigma, &a, &b, g, &params, &d)?;
                table.push(vec![idx(&a.alpha), idx(&b.alpha), e(g), e(v)]);
                rows.push(json!({"alpha": a.alpha, "beta": b.alpha, "gamma": g, "value": v}));
            }
        }
    }
    let mut out = Output::summary(json!({
        "symbol": symbol_json(&sigma),
        "m": params.m, "rho": params.rho, "delta": params.delta, "nu": params.nu,
        "rows": rows,
    }));
    out.tables.push(table);
    Ok(out)
}

pub fn class_report(cfg: &RunConfig) -> Result<Output> {
    ensure!(cfg.frequency.refine < 2, "frequency.refine: class-report compares with refine + 1, so refine must be 0 or 1");
    let d0 = cfg.discretization()?;
    let mut fine = cfg.clone();
    fine.frequency.refine += 1;
    let d1 = fine.discretization()?;
    let s0 = symbol_of(cfg, &d0)?;
    let s1 = symbol_of(&fine, &d1)?;
    let params = class_params(cfg, &s0, &d0)?;
    let n = d0.structure.dim();
    let alphas = indices(&cfg.params.alpha, n);
    let betas = indices(&cfg.params.beta, n);
    let gammas = cfg.params.gamma.clone().unwrap_or_else(|| vec![0.0]);
    let rows = symbol::class_report((&s0, &d0), (&s1, &d1), &params, &alphas, &betas, &gammas)?;
    let mut table = Table::new("class_report", &["alpha", "beta", "gamma", "baseline", "refined", "ratio"]);
    let mut js = Vec::new();
    for r in &rows {
        table.push(vec![idx(&r.alpha), idx(&r.beta), e(r.gamma), e(r.baseline), e(r.refined), e(r.ratio)]);
        js.push(json!({"alpha": r.alpha, "beta": r.beta, "gamma": r.gamma,
                       "baseline": r.baseline, "refined": r.refined, "ratio": r.ratio}));
    }
    let mut out = Output::summary(json!({
        "symbol": symbol_json(&s0),
        "m": params.m, "rho": params.rho, "delta": params.delta, "nu": params.nu,
        "baseline": discretization_json(&d0),
        "refined": discretization_json(&d1),
        "rows": js,
        "max_value": rows.iter().map(|r| r.baseline.max(r.refined)).fold(0.0, f64::max),
    }));
    out.tables.push(table);
    Ok(out)
}

pub fn kernel(cfg: &RunConfig) -> Result<Output> {
    let d = cfg.discretization()?;
    let sigma = symbol_of(cfg, &d)?;
    let n = d.structure.dim();
    let x = cfg.params.x.clone().unwrap_or_else(|| vec![0.0; n]);
    let x_index = d.grid.find_node(&x).ok_or_else(|| anyhow!("params.x: {x:?} is not a grid node"))?;
    let far = GroupGrid::cube(n, cfg.params.far_half_width.unwrap_or(6.0), cfg.params.far_points.unwrap_or(25))?;
    let m = cfg.params.m.unwrap_or(sigma.order);
    let rho = cfg.params.rho.unwrap_or(sigma.rho);
    let r = decay_report(&sigma, x_index, &d, m, rho, &far)?;
    let mut shells = Table::new("shells", &["r_lo", "r_hi", "max", "mean", "count"]);
    for s in &r.near_shells {
        shells.push(vec![e(s.r_lo), e(s.r_hi), e(s.max), e(s.mean), s.count.to_string()]);
    }
    let mut out = Output::summary(json!({
        "symbol": symbol_json(&sigma),
        "x": x,
        "m": m, "rho": rho,
        "near_slope": r.near_slope,
        "near_ci": [r.near_ci.0, r.near_ci.1],
        "near_bound": r.near_bound,
        "slope_below_minus_q": r.slope_below_minus_q,
        "partial": r.partial,
        "far": r.far.iter().map(|f| json!({"power": f.power, "constant": f.constant, "margin": f.margin})).collect::<Vec<_>>(),
    }));
    out.tables.push(shells);
    Ok(out)
}

pub fn garding(cfg: &RunConfig) -> Result<Output> {
    let d = cfg.discretization()?;
    let sigma = symbol_of(cfg, &d)?;
    let params = class_params(cfg, &sigma, &d)?;
    let trials = cfg.params.trials.unwrap_or(200);
    let r = inequalities::garding_scan(&sigma, &params, &TrialFamily::default(), trials, cfg.seed, &d)?;
    let mut table = Table::new("trials", &["index", "held_out", "re_form", "norm_l2_sq", "norm_s_sq", "norm_strong_sq"]);
    for t in &r.trials {
        table.push(vec![
            t.index.to_string(),
            t.held_out.to_string(),
            e(t.re_form),
            e(t.norm_l2_sq),
            e(t.norm_s_sq),
            e(t.norm_strong_sq),
        ]);
    }
    let min_ratio = r.trials.iter().map(|t| t.re_form / t.norm_l2_sq).fold(f64::INFINITY, f64::min);
    let mut out = Output::summary(json!({
        "label": r.label,
        "m": r.m, "rho": r.rho, "delta": r.delta, "s": r.s,
        "positivity": {"min_eigenvalue": r.positivity.min_eigenvalue, "max_skew": r.positivity.max_skew, "passes": r.positivity.passes},
        "commutation": {"max_offdiagonal": r.commutation.max_offdiagonal, "max_commutator": r.commutation.max_commutator, "passes": r.commutation.passes},
        "trials": r.trials.len(),
        "held_out": r.trials.iter().filter(|t| t.held_out).count(),
        "c_est": r.c_est,
        "held_out_violations": r.held_out_violations,
        "multiplier_violations": r.multiplier_violations,
        "strong_ratio": r.strong_ratio,
        "min_form_over_l2": min_ratio,
    }));
    out.tables.push(table);
    Ok(out)
}

pub fn resolvent(cfg: &RunConfig) -> Result<Output> {
    let mut cfg = cfg.clone();
    if cfg.function.is_none() && cfg.params.input.is_none() {
        cfg.function = Some("modulated_gaussian_rhs:3".into());
    }
    let d = cfg.discretization()?;
    ensure!(!d.structure.is_abelian(), "structure: resolvent runs on heisenberg1");
    let f = cfg.input_function(&d)?;
    let u = inequalities::resolvent_apply(&f, &d)?;
    let spec = d.dual.rockland();
    let rt = fourier::inverse(&fourier::forward(&f, &d.dual)?, &d.grid, &d.dual)?.rel_l2_error(&f)?;
    let residual = inequalities::apply_i_plus_r_fd(&d.structure, &spec, &u)?.rel_l2_error(&f)?;
    let mut summary = json!({
        "discretization": discretization_json(&d),
        "roundtrip_error": rt,
        "fd_residual": residual,
        "u_l2": u.norm_l2(),
        "u_boundary_max": u.boundary_max(),
    });
    if let Some(boxes) = &cfg.params.boxes {
        let mut us = Vec::new();
        for &l in boxes {
            let mut c = cfg.clone();
            c.grid = Some(crate::config::GridSpec {
                half_width: Some(l),
                ..Default::default()
            });
            let db = c.discretization()?;
            us.push(inequalities::resolvent_apply(&c.input_function(&db)?, &db)?);
        }
        let n = d.structure.dim();
        let mut betas = vec![HomogeneousMultiIndex::zero(n)];
        betas.extend((0..n).map(|j| HomogeneousMultiIndex::unit(n, j)));
        let p = schwartz_decay_report(&d.structure, &us, &betas, &[0, 2, 4, 6])?;
        summary["decay_profile"] = json!({
            "half_widths": boxes,
            "betas": p.betas,
            "powers": p.powers,
            "entries": p.entries,
            "boundary_max": p.boundary_max,
            "enlargement_ratio": p.enlargement_ratio,
            "boundary_shrink": p.boundary_shrink(),
            "all_finite": p.all_finite(),
        });
    }
    let mut out = Output::summary(summary);
    out.functions.push(("solution".into(), u));
    Ok(out)
}

/// The oracle's own construction of a symbol spec: `mu = |xi|^2`.
pub fn oracle_symbol(spec: &SymbolSpec, grid: &GroupGrid) -> Result<EuclideanSymbol> {
    let dim = grid.dim();
    let mu = |xi: &[f64]| xi.iter().map(|v| v * v).sum::<f64>();
    Ok(match spec {
        SymbolSpec::Identity => EuclideanSymbol::multiplier(grid, 0.0, |_| C64::new(1.0, 0.0))?,
        SymbolSpec::Multiplier { phi, gamma, m } => {
            let (f, m0) = registry::multiplier(phi, *gamma, 2)?;
            EuclideanSymbol::multiplier(grid, m.unwrap_or(m0), |xi| C64::new(f(mu(xi)), 0.0))?
        }
        SymbolSpec::Invariant { alpha } => {
            ensure!(alpha.len() == dim, "symbol.alpha: needs {dim} entries");
            let order = alpha.iter().sum::<u32>() as f64;
            EuclideanSymbol::multiplier(grid, order, |xi| {
                alpha.iter().zip(xi).map(|(&p, &x)| C64::new(0.0, x).powu(p)).product()
            })?
        }
        SymbolSpec::CoeffMultiplier { a, phi, gamma, m } => {
            let (f, m0) = registry::multiplier(phi, *gamma, 2)?;
            let c = registry::coefficient(a, dim)?;
            EuclideanSymbol::empty(grid, m.unwrap_or(m0))?
                .with_term(Some(|x: &[f64]| C64::new(c(x), 0.0)), |xi| C64::new(f(mu(xi)), 0.0))?
        }
        SymbolSpec::Sum { terms, m } => {
            let mut acc = EuclideanSymbol::empty(grid, f64::NEG_INFINITY)?;
            for t in terms {
                let p = oracle_symbol(t, grid)?;
                acc.order = acc.order.max(p.order);
                acc.terms.extend(p.terms);
            }
            if let Some(m) = m {
                acc.order = *m;
            }
            acc
        }
    })
}

pub fn oracle_compare(cfg: &RunConfig) -> Result<Output> {
    let d = cfg.discretization()?;
    ensure!(d.structure.is_abelian(), "structure: oracle-compare needs an abelian:n structure");
    let spec = cfg.symbol.clone().unwrap_or(SymbolSpec::Identity);
    let sigma = build_symbol(&spec, &d)?;
    let p = oracle_symbol(&spec, &d.grid)?;
    let f = cfg.input_function(&d)?;
    let ours = quantizer::op_apply(&sigma, &f, &d)?;
    let theirs = oracle::kn_quantize(&p, &f)?;
    let independent = oracle::discrepancy(&ours, &theirs)?;
    let mapped = oracle::compare(&p, &f, &d)?;
    Ok(Output::summary(json!({
        "discretization": discretization_json(&d),
        "symbol": symbol_json(&sigma),
        "framework_vs_oracle": independent,
        "mapped_symbol_vs_oracle": mapped,
    })))
}

pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Output> {
    cfg.validate(cmd.needs_backend())?;
    match cmd {
        Command::Structure => structure(cfg),
        Command::FourierRoundtrip => fourier_roundtrip(cfg),
        Command::Quantize => quantize(cfg),
        Command::Seminorm => seminorm(cfg),
        Command::ClassReport => class_report(cfg),
        Command::Kernel => kernel(cfg),
        Command::Garding => garding(cfg),
        Command::Resolvent => resolvent(cfg),
        Command::OracleCompare => oracle_compare(cfg),
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'static str,
    config: &'a RunConfig,
    versions: Value,
    threads: usize,
    seed: u64,
    timings: Value,
    outputs: Vec<String>,
}

/// Executes `cmd` and writes `result.json`, tables, functions and
/// `manifest.json` into `out_dir` when given.
pub fn run(cmd: Command, cfg: &RunConfig, out_dir: Option<&Path>) -> Result<Output> {
    let start = Instant::now();
    let out = execute(cmd, cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    log::info!("{} finished in {elapsed:.2} s", cmd.name());
    let Some(dir) = out_dir else {
        return Ok(out);
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = vec!["result.json".to_string()];
    std::fs::write(dir.join("result.json"), serde_json::to_string_pretty(&out.summary)? + "\n")?;
    for t in &out.tables {
        let name = format!("{}.csv", t.name);
        t.write(&dir.join(&name))?;
        written.push(name);
    }
    for (name, f) in &out.functions {
        let cube = f.grid.half_widths().iter().all(|&h| h == f.grid.half_widths()[0] && (h as f32) as f64 == h);
        let file = if cube { format!("{name}.bin") } else { format!("{name}.csv") };
        crate::io::save(f, &dir.join(&file))?;
        written.push(file);
    }
    let manifest = Manifest {
        command: cmd.name(),
        config: cfg,
        versions: json!({"gpdo": env!("CARGO_PKG_VERSION"), "gpdo_core": gpdo_core::VERSION}),
        threads: rayon::current_num_threads(),
        seed: cfg.seed,
        timings: json!({"total_seconds": elapsed}),
        outputs: written,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(out)
}

/// Reads a config file, or the default configuration when `path` is `None`.
pub fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(RunConfig::from_json(&text)?)
        }
    }
}

/// Reads a symbol spec from a JSON file or an inline JSON string.
pub fn load_symbol(arg: &str) -> Result<SymbolSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    serde_json::from_str(&text).map_err(|e| anyhow!("symbol: {e}"))
}
