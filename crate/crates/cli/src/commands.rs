use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use vix_calib::{
    calibrate_term_structure, load_chain, model_ivs, CalibConfig, Family, OrderPolicy, Params, SliceResult,
};
use vix_mixed::{mixed_proxy, order_mse, Component, MAX_ORDER};
use vix_model::{AnyModel, VixContract, DEFAULT_DELTA};
use vix_reference::{linspace, McConfig, QuadNodes};
use vix_single::QuadSpec;

use crate::bench::bench_model;
use crate::errors::{error_table, summarize};
use crate::manifest::RunManifest;
use crate::methods::{smile, Method, SmileSpec};
use crate::{load_model, CliError};

#[derive(Debug, Parser)]
#[command(name = "vix", version, about = "VIX futures and option smiles under Bergomi-type models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Implied-vol smile of a model by one method.
    Smile(SmileArgs),
    /// Signed relative IV errors of methods against a baseline.
    Errors(ErrorsArgs),
    /// Fit a model family to a chain CSV (maturity_years,future,strike,iv), slice by slice.
    Calibrate(CalibrateArgs),
    /// Optimal Hermite order per maturity for a mixed model.
    OptimalN(OptimalNArgs),
    /// Time the expansion against the reference pricer.
    Bench(BenchArgs),
    /// Rerun a manifest into a new output and compare checksums.
    Replay(ReplayArgs),
}

fn parse_maturity(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, scale) = if let Some(m) = s.strip_suffix('m') {
        (m, 1.0 / 12.0)
    } else if let Some(d) = s.strip_suffix('d') {
        (d, 1.0 / 365.0)
    } else {
        (s, 1.0)
    };
    let v: f64 = num.parse().map_err(|_| format!("bad maturity '{s}' (years, or Nm / Nd)"))?;
    if !(v > 0.0) {
        return Err(format!("maturity must be positive, got '{s}'"));
    }
    Ok(v * scale)
}

/// Log-moneyness points from `lo:hi:n` or a comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// `auto`, `1` or `2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentArg(pub Option<usize>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    parse_grid_points(s).map(Grid)
}

fn parse_grid_points(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0].parse().map_err(|_| format!("bad grid '{s}'"))?;
        let hi: f64 = parts[1].parse().map_err(|_| format!("bad grid '{s}'"))?;
        let n: usize = parts[2].parse().map_err(|_| format!("bad grid '{s}'"))?;
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        return Ok(if n == 1 { vec![lo] } else { linspace(lo, hi, n) });
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad grid value '{v}'")))
        .collect()
}

fn parse_component(s: &str) -> Result<ComponentArg, String> {
    match s {
        "auto" => Ok(ComponentArg(None)),
        "1" => Ok(ComponentArg(Some(1))),
        "2" => Ok(ComponentArg(Some(2))),
        _ => Err(format!("component must be auto, 1 or 2, got '{s}'")),
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::parse(s).ok_or_else(|| format!("unknown family '{s}' (bergomi, rbergomi, mixed-bergomi, mixed-rbergomi)"))
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Maturities: years, or with an m (months) or d (days) suffix.
    #[arg(long = "T", alias = "maturities", value_delimiter = ',', value_parser = parse_maturity,
          default_value = "1m,3m,6m")]
    pub maturities: Vec<f64>,
    /// Log-moneyness grid, lo:hi:n or a comma list, relative to the model futures price.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid, default_value = "-0.1:0.4:10")]
    pub moneyness: Grid,
    /// Mixture component for Hermite-based methods.
    #[arg(long, value_parser = parse_component, default_value = "auto")]
    pub component: ComponentArg,
    /// Fixed Hermite order (default: optimal per maturity).
    #[arg(long)]
    pub order: Option<usize>,
    /// VIX window length in years.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Monte Carlo samples (power-law reference).
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Monte Carlo time steps over the VIX window.
    #[arg(long, default_value_t = 150)]
    pub steps: usize,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    #[arg(long)]
    pub no_antithetic: bool,
    /// Gauss-Legendre nodes per dimension of the quadrature reference.
    #[arg(long, default_value_t = 120)]
    pub quad_nodes: usize,
}

impl GridArgs {
    pub fn spec(&self) -> SmileSpec {
        SmileSpec {
            maturities: self.maturities.clone(),
            moneyness: self.moneyness.0.clone(),
            component: self.component.0,
            order: self.order,
            delta: self.delta,
            mc: McConfig {
                paths: self.paths,
                time_steps: self.steps,
                seed: self.seed,
                antithetic: !self.no_antithetic,
                ..McConfig::default()
            },
            quad: QuadNodes {
                outer: self.quad_nodes,
                inner: self.quad_nodes,
            },
        }
    }

    fn config(&self) -> serde_json::Value {
        json!({
            "maturities": self.maturities,
            "moneyness": self.moneyness.0,
            "component": self.component.0,
            "order": self.order,
            "delta": self.delta,
            "mc": {"paths": self.paths, "steps": self.steps, "seed": self.seed, "antithetic": !self.no_antithetic},
            "quad_nodes": self.quad_nodes,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SmileArgs {
    /// Model JSON file.
    pub model: PathBuf,
    /// One of: expansion, hermite, weak-approx, reference.
    #[arg(long, default_value = "expansion", value_parser = parse_method)]
    pub method: Method,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Debug, Clone, Args)]
pub struct ErrorsArgs {
    pub model: PathBuf,
    #[arg(long, default_value = "reference", value_parser = parse_method)]
    pub baseline: Method,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "expansion,hermite,weak-approx")]
    pub against: Vec<Method>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Error CSV; the summary goes to the same stem with `.summary.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Chain CSV with columns maturity_years,future,strike,iv.
    pub chain: PathBuf,
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Fixed kappa (exponential families) or H (power-law families).
    #[arg(long)]
    pub decay: f64,
    /// Initial parameters, inline JSON or a file: {"scale":1} or {"scale1":..,"scale2":..,"lambda":..}.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_parser = parse_component, default_value = "auto")]
    pub component: ComponentArg,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Result JSON; the fitted-vs-market smile goes to the same stem with `.smile.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OptimalNArgs {
    pub model: PathBuf,
    #[arg(long = "T", alias = "maturities", value_delimiter = ',', value_parser = parse_maturity,
          default_value = "1m,3m,6m")]
    pub maturities: Vec<f64>,
    #[arg(long, value_parser = parse_component, default_value = "auto")]
    pub component: ComponentArg,
    #[arg(long, default_value_t = MAX_ORDER)]
    pub n_max: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// One or more model JSON files.
    #[arg(required = true)]
    pub models: Vec<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Minimum seconds spent repeating the expansion.
    #[arg(long, default_value_t = 0.5)]
    pub min_seconds: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// New primary output path; the recorded outputs are left untouched.
    #[arg(long)]
    pub out: PathBuf,
}

/// Thread count from `VIX_THREADS`, else all available cores.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("VIX_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("VIX_THREADS must be a positive integer, got '{s}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Run a parsed command on a pool of `threads` workers, write its outputs
/// and manifest, and return the manifest.
pub fn run(cli: &Cli, args: Vec<String>, threads: usize) -> Result<RunManifest, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Smile(a) => cmd_smile(a, args, threads),
        Command::Errors(a) => cmd_errors(a, args, threads),
        Command::Calibrate(a) => cmd_calibrate(a, args, threads),
        Command::OptimalN(a) => cmd_optimal_n(a, args, threads),
        Command::Bench(a) => cmd_bench(a, args, threads),
        Command::Replay(a) => cmd_replay(a),
    })
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn sibling(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn uses_mc(m: &AnyModel, methods: &[Method]) -> bool {
    m.kernel_kind() == vix_model::KernelKind::PowerLaw && methods.contains(&Method::Reference)
}

#[derive(Serialize)]
struct SmileCsvRow<'a> {
    k: f64,
    #[serde(rename = "T")]
    t: f64,
    log_moneyness: f64,
    future: f64,
    iv: f64,
    std_err: Option<f64>,
    method: Method,
    flag: &'a str,
}

fn cmd_smile(a: &SmileArgs, args: Vec<String>, threads: usize) -> Result<RunManifest, CliError> {
    let m = load_model(&a.model)?;
    let spec = a.grid.spec();
    let pts = smile(&m, a.method, &spec)?;
    let rows: Vec<SmileCsvRow> = pts
        .iter()
        .map(|p| SmileCsvRow {
            k: p.k,
            t: p.t,
            log_moneyness: p.log_moneyness,
            future: p.future,
            iv: p.iv,
            std_err: p.std_err,
            method: a.method,
            flag: &p.flag,
        })
        .collect();
    write_rows(&a.out, &rows)?;
    let seeds = if uses_mc(&m, &[a.method]) { vec![a.grid.seed] } else { vec![] };
    let mut man = RunManifest::new(
        "smile",
        args,
        json!({"model": a.model, "method": a.method, "grid": a.grid.config()}),
        seeds,
        threads,
    );
    man.add_output(&a.out)?;
    man.write()?;
    Ok(man)
}

fn cmd_errors(a: &ErrorsArgs, args: Vec<String>, threads: usize) -> Result<RunManifest, CliError> {
    let m = load_model(&a.model)?;
    let spec = a.grid.spec();
    let base = smile(&m, a.baseline, &spec)?;
    let mut rows = Vec::new();
    for &meth in &a.against {
        let pts = if meth == a.baseline { base.clone() } else { smile(&m, meth, &spec)? };
        rows.extend(error_table(meth, &pts, &base));
    }
    let summary = summarize(&rows);
    for s in &summary {
        log::info!(
            "{} T={:.4}: max {:.3e} mean {:.3e} (ITM max {:.3e}, {} NaN)",
            s.method,
            s.t,
            s.max_abs,
            s.mean_abs,
            s.max_abs_itm,
            s.nan_points
        );
    }
    let sum_path = sibling(&a.out, "summary.csv");
    write_rows(&a.out, &rows)?;
    write_rows(&sum_path, &summary)?;
    let mut all = a.against.clone();
    all.push(a.baseline);
    let seeds = if uses_mc(&m, &all) { vec![a.grid.seed] } else { vec![] };
    let mut man = RunManifest::new(
        "errors",
        args,
        json!({"model": a.model, "baseline": a.baseline, "against": a.against, "grid": a.grid.config()}),
        seeds,
        threads,
    );
    man.add_output(&a.out)?;
    man.add_output(&sum_path)?;
    man.write()?;
    Ok(man)
}

fn parse_init(s: Option<&str>, family: Family) -> Result<Params, CliError> {
    let Some(s) = s else {
        return Ok(if family.is_mixed() {
            Params::Mixed {
                scale1: 1.0,
                scale2: 0.5,
                lambda: 0.5,
            }
        } else {
            Params::Single { scale: 1.0 }
        });
    };
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        std::fs::read_to_string(s).map_err(|e| CliError::Data(format!("{s}: {e}")))?
    };
    let p: Params = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--init: {e}")))?;
    if !p.matches(family) {
        return Err(CliError::Usage(format!("--init does not match family {}", family.name())));
    }
    Ok(p)
}

#[derive(Serialize)]
struct FitRow {
    #[serde(rename = "T")]
    t: f64,
    strike: f64,
    k: f64,
    iv_market: f64,
    iv_model: f64,
    rel_error: f64,
}

fn fitted_smile(cfg: &CalibConfig, r: &SliceResult, slice: &vix_calib::MarketSlice) -> Result<Vec<FitRow>, CliError> {
    let order = r.order.map(OrderPolicy::Fixed).unwrap_or(cfg.order);
    let model = cfg.slice_model(&r.params, r.t, order)?;
    let (_, ivs) = model_ivs(&model, slice, cfg.bounds.xi0)?;
    Ok(slice
        .quotes
        .iter()
        .zip(ivs)
        .map(|(q, iv)| FitRow {
            t: slice.t,
            strike: q.strike,
            k: q.strike.ln(),
            iv_market: q.iv,
            iv_model: iv,
            rel_error: (iv - q.iv) / q.iv,
        })
        .collect())
}

fn cmd_calibrate(a: &CalibrateArgs, args: Vec<String>, threads: usize) -> Result<RunManifest, CliError> {
    if !(a.decay > 0.0) {
        return Err(CliError::Usage(format!("--decay must be positive, got {}", a.decay)));
    }
    let init = parse_init(a.init.as_deref(), a.family)?;
    let (chain, warnings) = load_chain(&a.chain)?;
    for w in &warnings {
        log::warn!("{}: {w}", a.chain.display());
    }
    let mut cfg = CalibConfig::new(a.family, a.decay);
    cfg.delta = a.delta;
    cfg.max_iter = a.max_iter;
    cfg.component = a.component.0;
    if let Some(n) = a.order {
        cfg.order = OrderPolicy::Fixed(n);
    }
    let res = calibrate_term_structure(&cfg, &chain, &init)?;
    let mut fit = Vec::new();
    for (i, (r, s)) in res.slices.iter().zip(&chain.slices).enumerate() {
        match &r.error {
            Some(e) => log::error!("slice {i} (T={}): {e}", r.t),
            None => fit.extend(fitted_smile(&cfg, r, s)?),
        }
    }
    std::fs::write(&a.out, res.to_json() + "\n").map_err(|e| CliError::Data(format!("{}: {e}", a.out.display())))?;
    let smile_path = sibling(&a.out, "smile.csv");
    write_rows(&smile_path, &fit)?;
    let mut man = RunManifest::new(
        "calibrate",
        args,
        json!({"chain": a.chain, "config": cfg, "init": init}),
        vec![],
        threads,
    );
    man.add_output(&a.out)?;
    man.add_output(&smile_path)?;
    man.write()?;
    if res.slices.iter().all(|s| s.error.is_some()) {
        return Err(CliError::Numerical("every slice failed to calibrate".into()));
    }
    Ok(man)
}

#[derive(Serialize)]
struct OrderRow {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "N_opt")]
    n_opt: usize,
    mse: f64,
}

fn cmd_optimal_n(a: &OptimalNArgs, args: Vec<String>, threads: usize) -> Result<RunManifest, CliError> {
    let m = load_model(&a.model)?;
    let AnyModel::Mixed(mm) = &m else {
        return Err(CliError::Data(format!(
            "optimal-n needs a mixed model family (mixed_bergomi or mixed_rbergomi); {} is single-kernel",
            a.model.display()
        )));
    };
    if a.n_max == 0 {
        return Err(CliError::Usage("--n-max must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &t in &a.maturities {
        let c = VixContract::with_delta(t, a.delta, 0.0)?;
        let inp = mixed_proxy(mm, &c, QuadSpec::default())?;
        let j = match a.component.0 {
            None => inp.params.default_component(),
            Some(n) => Component::from_number(n).expect("validated by the parser"),
        };
        let mut n_max = a.n_max;
        let n = loop {
            match order_for_capped(&inp, j, n_max) {
                Ok(n) => break n,
                Err(vix_mixed::MixedError::OrderTooHigh { .. }) if n_max > 1 => n_max -= 1,
                Err(e) => return Err(e.into()),
            }
        };
        let mse = order_mse(&inp.params, j, n)?[n];
        rows.push(OrderRow { t, n_opt: n, mse });
    }
    write_rows(&a.out, &rows)?;
    let mut man = RunManifest::new(
        "optimal-n",
        args,
        json!({"model": a.model, "maturities": a.maturities, "component": a.component.0, "n_max": a.n_max, "delta": a.delta}),
        vec![],
        threads,
    );
    man.add_output(&a.out)?;
    man.write()?;
    Ok(man)
}

fn order_for_capped(inp: &vix_mixed::MixedInputs, j: Component, n_max: usize) -> Result<usize, vix_mixed::MixedError> {
    if !inp.params.is_active(j.other()) {
        return Ok(1);
    }
    vix_mixed::optimal_order(&inp.params, j, n_max)
}

struct BenchRow {
    model: String,
    result: crate::bench::BenchResult,
}

fn cmd_bench(a: &BenchArgs, args: Vec<String>, threads: usize) -> Result<RunManifest, CliError> {
    let spec = a.grid.spec();
    let mut rows = Vec::new();
    let mut seeds = vec![];
    for path in &a.models {
        let m = load_model(path)?;
        if uses_mc(&m, &[Method::Reference]) {
            seeds = vec![a.grid.seed];
        }
        let result = bench_model(&m, &spec, a.min_seconds)?;
        log::info!("{}: speedup {:.1}x", path.display(), result.speedup);
        rows.push(BenchRow {
            model: path.display().to_string(),
            result,
        });
    }
    let mut w = csv::Writer::from_writer(create(&a.out)?);
    w.write_record([
        "model",
        "kernel",
        "points",
        "expansion_s",
        "expansion_repeats",
        "reference_s",
        "reference_engine",
        "speedup",
    ])?;
    for r in &rows {
        let b = &r.result;
        w.write_record([
            r.model.clone(),
            b.kernel.clone(),
            b.points.to_string(),
            b.expansion_s.to_string(),
            b.expansion_repeats.to_string(),
            b.reference_s.to_string(),
            b.reference_engine.clone(),
            b.speedup.to_string(),
        ])?;
    }
    w.flush()?;
    let mut man = RunManifest::new(
        "bench",
        args,
        json!({"models": a.models, "grid": a.grid.config(), "min_seconds": a.min_seconds}),
        seeds,
        threads,
    );
    man.add_output(&a.out)?;
    man.write()?;
    Ok(man)
}

/// Replace the value of `--out` in a recorded argument vector.
pub fn with_out(args: &[String], out: &Path) -> Result<Vec<String>, CliError> {
    let mut v = args.to_vec();
    let out = out.display().to_string();
    for i in 0..v.len() {
        if v[i] == "--out" && i + 1 < v.len() {
            v[i + 1] = out;
            return Ok(v);
        }
        if v[i].starts_with("--out=") {
            v[i] = format!("--out={out}");
            return Ok(v);
        }
    }
    Err(CliError::Data("recorded arguments have no --out".into()))
}

fn cmd_replay(a: &ReplayArgs) -> Result<RunManifest, CliError> {
    let old = RunManifest::load(&a.manifest)?;
    if old.command == "replay" {
        return Err(CliError::Data("cannot replay a replay".into()));
    }
    let args = with_out(&old.args, &a.out)?;
    let cli = Cli::try_parse_from(std::iter::once("vix".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Data(format!("recorded arguments no longer parse: {e}")))?;
    let new = run(&cli, args, old.threads)?;
    let mut diffs = Vec::new();
    for (o, n) in old.outputs.iter().zip(&new.outputs) {
        if o.sha256 != n.sha256 {
            diffs.push(format!("{} differs from {}", n.path.display(), o.path.display()));
        }
    }
    if old.outputs.len() != new.outputs.len() {
        diffs.push("output count differs".into());
    }
    if old.command == "bench" {
        log::warn!("bench timings are not reproducible; checksum differences are expected");
    }
    if !diffs.is_empty() {
        return Err(CliError::Numerical(format!("replay mismatch: {}", diffs.join("; "))));
    }
    Ok(new)
}
