//! anisoboot — command-line driver for the anisotropic bootstrap toolkit.
//!
//! Subcommands cover estimation (`span`, `threshold`, `sweep`, `fit`),
//! droplet experiments (`droplet plan`, `droplet grow`), closed-form bounds
//! (`bounds …`), internal consistency suites (`verify`), and slice
//! enhancement (`enhance`). Results go to stdout as CSV (default) or JSON
//! carrying the same values; diagnostics go to stderr.
//!
//! Reproducibility contract: the same argv and seed produce byte-identical
//! stdout at any `--threads` setting. Exit codes: 0 success, 1 domain or
//! usage error, 2 I/O or parse error.
//!
//! A `--config FILE` of `key=value` lines (keys are long flag names without
//! the dashes, `#` comments allowed) supplies defaults; explicit flags win.

mod verify;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anisoboot_core::bounds::{
    droplet_density_11, e_crossed_upper, effective_densities, f_scaling, rect_span_upper,
    rect_weak_span_upper, spanned_upper, threshold_bracket, Length, ProbBound, ScalingForm,
    ThresholdBracket, DEFAULT_EPS,
};
use anisoboot_core::dynamics::{has_crossing, reduce};
use anisoboot_core::droplets::{plan_droplet, simulate_growth};
use anisoboot_core::enhancement::{enhance, EnhanceParams};
use anisoboot_core::estimator::{
    estimate_spanning, fit_scaling, sweep, threshold_p, SweepPlan, SweepResult,
};
use anisoboot_core::{Dims, Error, Lattice, NeighborhoodSpec, Result};

#[derive(Parser)]
#[command(name = "anisoboot", version, about = "Anisotropic bootstrap percolation toolkit")]
struct Cli {
    /// Output format; both carry the same values.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Worker threads (default: ANISOBOOT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// key=value file supplying defaults for any long flag; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the internal-spanning probability at one scale and density.
    Span(SpanArgs),
    /// Bisect for the density where spanning probability crosses a target.
    Threshold(ThresholdArgs),
    /// Estimate over a grid of box scales.
    Sweep(SweepArgs),
    /// Fit sweep rows against the model's threshold scaling form.
    Fit(FitArgs),
    /// Critical droplet sizing and seeded growth.
    #[command(subcommand)]
    Droplet(DropletCmd),
    /// Evaluate a closed-form bound.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Run internal consistency suites; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Apply slice enhancement to a configuration.
    Enhance(EnhanceArgs),
}

/// Lattice extents given as `12x12x12` (or a single side for cubes).
#[derive(Clone)]
struct Extents(Vec<usize>);

impl FromStr for Extents {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ext: Vec<usize> = s
            .split('x')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("extent {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if ext.is_empty() || ext.len() > 3 {
            return Err(Error::Parse(format!("need 1 to 3 extents, got {s:?}")));
        }
        Ok(Extents(ext))
    }
}

impl Extents {
    /// A bare side `40` means a cube of the model's rank.
    fn for_rank(&self, rank: usize) -> Vec<usize> {
        if self.0.len() == 1 && rank > 1 {
            vec![self.0[0]; rank]
        } else {
            self.0.clone()
        }
    }
}

#[derive(Args)]
struct SpanArgs {
    /// Model radii, e.g. 1,1 or 1,1,2.
    #[arg(long)]
    model: NeighborhoodSpec,
    /// Box scale L; the lattice is (L+1)^d sites.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Explicit lattice extents, e.g. 33x33 (alternative to --L).
    #[arg(long)]
    dims: Option<Extents>,
    /// Site occupation probability.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    model: NeighborhoodSpec,
    /// Box scale L; the lattice is (L+1)^d sites.
    #[arg(long = "L")]
    l: usize,
    /// Spanning probability level to solve for.
    #[arg(long, default_value_t = 0.5)]
    target: f64,
    /// Width of the final density bracket.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Trials per bisection probe (doubled while the CI straddles the target).
    #[arg(long, default_value_t = 1_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: NeighborhoodSpec,
    /// Box scales, comma separated.
    #[arg(long = "L", value_delimiter = ',', required = true)]
    l: Vec<usize>,
    /// Densities, comma separated (fixed-density grid mode).
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Threshold mode: bisect each scale for this spanning level.
    #[arg(long)]
    target: Option<f64>,
    /// Bracket width for threshold mode.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Trials per estimate (and per bisection probe in threshold mode).
    #[arg(long, default_value_t = 1_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here (plus a .json metadata sidecar) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    model: NeighborhoodSpec,
    /// CSV produced by `sweep`.
    #[arg(long)]
    input: PathBuf,
    /// Scaling form; defaults to the model's own.
    #[arg(long, value_enum)]
    form: Option<FormArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    /// p^{-a}, symmetric radii.
    Aa,
    /// p^{-a} ln² p, asymmetric radii.
    Ab,
}

impl FormArg {
    fn to_form(self) -> ScalingForm {
        match self {
            FormArg::Aa => ScalingForm::Aa,
            FormArg::Ab => ScalingForm::Ab,
        }
    }
}

#[derive(Subcommand)]
enum DropletCmd {
    /// Size a critical droplet: seed side N, slab budget M, density.
    Plan(DropletPlanArgs),
    /// Grow a seed block in a p-random arena and measure the advance.
    Grow(DropletGrowArgs),
}

#[derive(Args)]
struct DropletPlanArgs {
    /// 3D model radii, e.g. 1,1,2.
    #[arg(long)]
    model: NeighborhoodSpec,
    #[arg(long)]
    p: f64,
    /// Supercriticality margin.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Lower bracket constant for the reduced-model threshold lengths.
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Upper bracket constant.
    #[arg(long, default_value_t = 1.0)]
    big_gamma: f64,
}

#[derive(Args)]
struct DropletGrowArgs {
    #[command(flatten)]
    plan: DropletPlanArgs,
    /// Arena extents (`40` for a cube, or `40x40x20`).
    #[arg(long)]
    arena: Extents,
    /// Seed block extents; defaults to the planned N×N×2 block.
    #[arg(long)]
    block: Option<Extents>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent growth runs, seeded seed, seed+1, …
    #[arg(long, default_value_t = 1)]
    trials: u64,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Spanning upper bound for an x-by-y rectangle in a 2D model.
    RectSpan(RectArgs),
    /// Weak-spanning upper bound for an x-by-y rectangle.
    RectWeakSpan(RectArgs),
    /// Threshold scaling function f(1/p).
    F(ModelPArgs),
    /// Critical droplet density for the symmetric radius-1 2D model.
    DropletDensity {
        #[arg(long)]
        p: f64,
    },
    /// Threshold-length bracket [L-, L+] at constants gamma <= Gamma.
    Bracket(BracketArgs),
    /// Upper bound for a cube side to be crossed after enhancement.
    ECrossed(CubeBoundArgs),
    /// Upper bound for a 3D cube to be internally spanned.
    Spanned(CubeBoundArgs),
}

#[derive(Args)]
struct RectArgs {
    /// 2D model radii a,b.
    #[arg(long)]
    model: NeighborhoodSpec,
    #[arg(long)]
    x: u64,
    #[arg(long)]
    y: u64,
    #[arg(long)]
    p: f64,
    /// Effective density for b-runs; default absorbs placement multiplicity.
    #[arg(long)]
    p_tilde: Option<f64>,
    /// Effective density for a-runs; default absorbs placement multiplicity.
    #[arg(long)]
    p_hat: Option<f64>,
}

#[derive(Args)]
struct ModelPArgs {
    #[arg(long)]
    model: NeighborhoodSpec,
    #[arg(long)]
    p: f64,
}

#[derive(Args)]
struct BracketArgs {
    #[command(flatten)]
    base: ModelPArgs,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    big_gamma: f64,
}

#[derive(Args)]
struct CubeBoundArgs {
    /// 3D model radii a,b,c.
    #[arg(long)]
    model: NeighborhoodSpec,
    /// Cube side.
    #[arg(long = "L")]
    l: u64,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Cases per suite (trials per grid point for domination); suite
    /// defaults when omitted.
    #[arg(long)]
    cases: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    /// closure agrees with the naive fixpoint oracle.
    Oracle,
    /// Spanning indicators are nondecreasing under coupled densities.
    Monotone,
    /// Slab dynamics agree with the reduced lower-dimensional model.
    Slab,
    /// Region decompositions satisfy the merging invariants.
    Regions,
    /// Empirical rectangle frequencies stay below the closed-form bounds.
    Domination,
    All,
}

#[derive(Args)]
struct EnhanceArgs {
    /// 3D model radii a,b,c.
    #[arg(long)]
    model: NeighborhoodSpec,
    /// Lattice extents; z must be a multiple of c+1. Required unless --load.
    #[arg(long)]
    dims: Option<Extents>,
    /// Site density (fills the lattice, and sets default parameters).
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flooding threshold S in minicolumns; default derived from p.
    #[arg(long = "S")]
    flood_size: Option<usize>,
    /// Component cap along x (exclusive); default derived from p.
    #[arg(long)]
    x_c: Option<usize>,
    /// Component cap along y (exclusive); default derived from p.
    #[arg(long)]
    y_c: Option<usize>,
    /// Exponent margin for the stepping-stone scale.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Read the initial configuration from a snapshot file.
    #[arg(long)]
    load: Option<PathBuf>,
    /// Write the enhanced configuration as a snapshot file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

// ─────────────────────────────────────────────────────────────────────────
// Output rendering

/// One typed value; CSV uses Rust's shortest float display (matching the
/// sweep CSV schema), JSON uses native numbers with the same values.
enum Cell {
    U(u64),
    F(f64),
    S(String),
    B(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::U(v) => v.to_string(),
            Cell::F(v) => format!("{v}"),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::U(v) => (*v).into(),
            Cell::F(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| format!("{v}").into()),
            Cell::S(s) => s.clone().into(),
            Cell::B(b) => (*b).into(),
        }
    }
}

/// A count-valued length: exact integer when realizable, else log-log form.
fn count_cell(l: &Length) -> Cell {
    match l.value() {
        Some(v) if v <= 9.0e15 => Cell::U(v.round() as u64),
        _ => Cell::S(format!("lnln:{}", ln_ln(l))),
    }
}

/// A scale-valued length: plain number when representable, else log-log.
fn scale_cell(l: &Length) -> Cell {
    match l.value() {
        Some(v) => Cell::F(v),
        None => Cell::S(format!("lnln:{}", ln_ln(l))),
    }
}

fn ln_ln(l: &Length) -> f64 {
    match *l {
        Length::Ln(w) => w.ln(),
        Length::LnLn(w) => w,
    }
}

fn render(fmt: Format, header: &[&str], rows: Vec<Vec<Cell>>, single: bool) -> String {
    match fmt {
        Format::Csv => {
            let mut out = header.join(",");
            out.push('\n');
            for row in &rows {
                debug_assert_eq!(row.len(), header.len());
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let map: serde_json::Map<String, serde_json::Value> = header
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.to_string(), c.json()))
                        .collect();
                    serde_json::Value::Object(map)
                })
                .collect();
            let value = if single && objs.len() == 1 {
                objs.into_iter().next().unwrap()
            } else {
                serde_json::Value::Array(objs)
            };
            let mut out = serde_json::to_string_pretty(&value).expect("JSON rendering");
            out.push('\n');
            out
        }
    }
}

/// What a subcommand produced: stdout text and whether checks passed.
struct Output {
    text: String,
    ok: bool,
}

impl Output {
    fn good(text: String) -> Self {
        Output { text, ok: true }
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Entry

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(argv: Vec<String>) -> Result<ExitCode> {
    let argv = effective_argv(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let explicit = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return Ok(ExitCode::from(if explicit { 0 } else { 1 }));
        }
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("ANISOBOOT_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads.filter(|&n| n > 0) {
        // may already be initialized when called twice in-process; fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let out = match &cli.cmd {
        Cmd::Span(a) => run_span(a, cli.format)?,
        Cmd::Threshold(a) => run_threshold(a, cli.format)?,
        Cmd::Sweep(a) => run_sweep(a, cli.format)?,
        Cmd::Fit(a) => run_fit(a, cli.format)?,
        Cmd::Droplet(DropletCmd::Plan(a)) => run_droplet_plan(a, cli.format)?,
        Cmd::Droplet(DropletCmd::Grow(a)) => run_droplet_grow(a, cli.format)?,
        Cmd::Bounds(b) => run_bounds(b, cli.format)?,
        Cmd::Verify(a) => run_verify(a, cli.format)?,
        Cmd::Enhance(a) => run_enhance(a, cli.format)?,
    };
    print!("{}", out.text);
    Ok(if out.ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: verification failed");
        ExitCode::from(1)
    })
}

/// Merge `--config FILE` defaults into argv: any `key=value` line becomes
/// `--key value` unless the flag is already present.
fn effective_argv(mut argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, tok) in argv.iter().enumerate() {
        if tok == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
            break;
        }
        if let Some(rest) = tok.strip_prefix("--config=") {
            path = Some(PathBuf::from(rest));
            break;
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path)?;
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                no + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse(format!("{}:{}: empty key", path.display(), no + 1)));
        }
        let flag = format!("--{key}");
        let prefix = format!("{flag}=");
        if !argv.iter().any(|t| *t == flag || t.starts_with(&prefix)) {
            argv.push(flag);
            argv.push(value.to_string());
        }
    }
    Ok(argv)
}

// ─────────────────────────────────────────────────────────────────────────
// Subcommand handlers

const ESTIMATE_HEADER: [&str; 8] =
    ["L", "p", "trials", "successes", "p_hat", "ci_low", "ci_high", "seed"];

fn run_span(a: &SpanArgs, fmt: Format) -> Result<Output> {
    let (dims, label) = match (a.l, &a.dims) {
        (Some(l), None) => (Dims::cube(a.model.rank(), l + 1)?, Cell::U(l as u64)),
        (None, Some(e)) => {
            let dims = Dims::new(&e.for_rank(a.model.rank()))?;
            (dims, Cell::S(dims.to_string()))
        }
        _ => {
            return Err(Error::BadParameter(
                "give exactly one of --L and --dims".into(),
            ))
        }
    };
    let est = estimate_spanning(dims, a.p, &a.model, a.trials, a.seed)?;
    let row = vec![
        label,
        Cell::F(est.p),
        Cell::U(est.trials),
        Cell::U(est.successes),
        Cell::F(est.p_hat),
        Cell::F(est.ci_low),
        Cell::F(est.ci_high),
        Cell::U(est.seed),
    ];
    Ok(Output::good(render(fmt, &ESTIMATE_HEADER, vec![row], true)))
}

fn run_threshold(a: &ThresholdArgs, fmt: Format) -> Result<Output> {
    let p_th = threshold_p(a.l, &a.model, a.target, a.tol, a.trials, a.seed)?;
    let header = ["L", "target", "tol", "trials", "p_th", "seed"];
    let row = vec![
        Cell::U(a.l as u64),
        Cell::F(a.target),
        Cell::F(a.tol),
        Cell::U(a.trials),
        Cell::F(p_th),
        Cell::U(a.seed),
    ];
    Ok(Output::good(render(fmt, &header, vec![row], true)))
}

fn run_sweep(a: &SweepArgs, fmt: Format) -> Result<Output> {
    let plan = match (&a.p, a.target) {
        (Some(_), Some(_)) => {
            return Err(Error::BadParameter(
                "give either --p or --target, not both".into(),
            ))
        }
        (Some(ps), None) => SweepPlan::Grid { ps },
        (None, target) => SweepPlan::Threshold {
            target: target.unwrap_or(0.5),
            tol: a.tol,
        },
    };
    let result = sweep(&a.l, plan, &a.model, a.trials, a.seed)?;

    if let Some(out) = &a.out {
        let mut file = fs::File::create(out)?;
        result.write_csv(&mut file)?;
        let sidecar = out.with_extension("json");
        let mut meta = serde_json::to_string_pretty(&result.metadata_json())
            .expect("JSON rendering");
        meta.push('\n');
        fs::write(&sidecar, meta)?;
        eprintln!(
            "wrote {} rows to {} (metadata in {})",
            result.rows.len(),
            out.display(),
            sidecar.display()
        );
        return Ok(Output::good(String::new()));
    }

    let text = match fmt {
        Format::Csv => result.to_csv_string(),
        Format::Json => {
            let rows: Vec<serde_json::Value> = result
                .rows
                .iter()
                .map(|r| {
                    let e = &r.estimate;
                    serde_json::json!({
                        "L": r.l, "p": e.p, "trials": e.trials,
                        "successes": e.successes, "p_hat": e.p_hat,
                        "ci_low": e.ci_low, "ci_high": e.ci_high, "seed": e.seed,
                    })
                })
                .collect();
            let mut obj = result.metadata_json();
            obj["rows"] = serde_json::Value::Array(rows);
            let mut text = serde_json::to_string_pretty(&obj).expect("JSON rendering");
            text.push('\n');
            text
        }
    };
    Ok(Output::good(text))
}

fn run_fit(a: &FitArgs, fmt: Format) -> Result<Output> {
    let text = fs::read_to_string(&a.input)?;
    let sweep = SweepResult::from_csv(&text, &a.model)?;
    let form = a
        .form
        .map(FormArg::to_form)
        .unwrap_or_else(|| ScalingForm::of(a.model.radius(0), a.model.radius(1)));
    let fit = fit_scaling(&sweep, form)?;
    let header = ["form", "slope", "intercept", "residual", "points", "x_min", "x_max"];
    let row = vec![
        Cell::S(fit.form.to_string()),
        Cell::F(fit.slope),
        Cell::F(fit.intercept),
        Cell::F(fit.residual),
        Cell::U(fit.points as u64),
        Cell::F(fit.x_range.0),
        Cell::F(fit.x_range.1),
    ];
    Ok(Output::good(render(fmt, &header, vec![row], true)))
}

fn reduced_brackets(a: &DropletPlanArgs) -> Result<[ThresholdBracket; 3]> {
    let mut brackets = Vec::with_capacity(3);
    for axis in 0..3 {
        let reduced = reduce(&a.model, axis)?;
        brackets.push(threshold_bracket(&reduced, a.p, a.gamma, a.big_gamma)?);
    }
    Ok([brackets[0], brackets[1], brackets[2]])
}

fn run_droplet_plan(a: &DropletPlanArgs, fmt: Format) -> Result<Output> {
    let brackets = reduced_brackets(a)?;
    let plan = plan_droplet(&a.model, a.p, a.eps, &brackets)?;
    let header = [
        "n", "m", "block_x", "block_y", "block_z", "eps", "easy_axis", "ln_n_raw", "ln_density",
    ];
    let row = vec![
        count_cell(&plan.n),
        count_cell(&plan.m),
        count_cell(&plan.block[0]),
        count_cell(&plan.block[1]),
        count_cell(&plan.block[2]),
        Cell::F(plan.eps),
        Cell::U(plan.easy_axis as u64),
        Cell::F(plan.ln_n_raw),
        Cell::F(plan.ln_density),
    ];
    Ok(Output::good(render(fmt, &header, vec![row], true)))
}

fn run_droplet_grow(a: &DropletGrowArgs, fmt: Format) -> Result<Output> {
    let rank = a.plan.model.rank();
    let block: Vec<usize> = match &a.block {
        Some(e) => e.for_rank(rank),
        None => {
            let brackets = reduced_brackets(&a.plan)?;
            let plan = plan_droplet(&a.plan.model, a.plan.p, a.plan.eps, &brackets)?;
            let ext = plan.block_extents().ok_or_else(|| {
                Error::BadParameter(format!(
                    "planned block side {} is not realizable; pass --block",
                    plan.n
                ))
            })?;
            ext.iter().map(|&v| v as usize).collect()
        }
    };
    let arena = a.arena.for_rank(rank);

    let header =
        ["seed", "filled", "advance_x", "advance_y", "advance_z", "slabs_advanced"];
    let mut rows = Vec::with_capacity(a.trials as usize);
    for t in 0..a.trials {
        let seed = a.seed.wrapping_add(t);
        let out = simulate_growth(&block, a.plan.p, &arena, &a.plan.model, seed)?;
        rows.push(vec![
            Cell::U(seed),
            Cell::B(out.filled),
            Cell::U(out.advance[0] as u64),
            Cell::U(out.advance[1] as u64),
            Cell::U(out.advance[2] as u64),
            Cell::U(out.slabs_advanced as u64),
        ]);
    }
    Ok(Output::good(render(fmt, &header, rows, false)))
}

fn run_bounds(b: &BoundsCmd, fmt: Format) -> Result<Output> {
    let value_row = |v: f64| (vec!["value"], vec![Cell::F(v)]);
    let prob_row = |pb: ProbBound| {
        (
            vec!["value", "ln_raw", "clamped"],
            vec![Cell::F(pb.value()), Cell::F(pb.ln_raw), Cell::B(pb.clamped)],
        )
    };
    let (header, row) = match b {
        BoundsCmd::RectSpan(r) | BoundsCmd::RectWeakSpan(r) => {
            if r.model.rank() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "rectangle bounds need a 2D model, got {}",
                    r.model
                )));
            }
            let (a, bb) = (r.model.radius(0), r.model.radius(1));
            let (dt, dh) = effective_densities(a, bb, r.p)?;
            let (pt, ph) = (r.p_tilde.unwrap_or(dt), r.p_hat.unwrap_or(dh));
            let v = match b {
                BoundsCmd::RectSpan(_) => rect_span_upper(r.x, r.y, a, bb, pt, ph)?,
                _ => rect_weak_span_upper(r.x, r.y, a, bb, pt, ph)?,
            };
            value_row(v)
        }
        BoundsCmd::F(m) => value_row(f_scaling(m.model.radius(0), m.model.radius(1), m.p)?),
        BoundsCmd::DropletDensity { p } => value_row(droplet_density_11(*p)?),
        BoundsCmd::Bracket(br) => {
            let bracket =
                threshold_bracket(&br.base.model, br.base.p, br.gamma, br.big_gamma)?;
            (
                vec!["l_minus", "l_plus", "form"],
                vec![
                    scale_cell(&bracket.l_minus),
                    scale_cell(&bracket.l_plus),
                    Cell::S(bracket.form.to_string()),
                ],
            )
        }
        BoundsCmd::ECrossed(c) | BoundsCmd::Spanned(c) => {
            if c.model.rank() != 3 {
                return Err(Error::DimensionMismatch(format!(
                    "cube bounds need a 3D model, got {}",
                    c.model
                )));
            }
            let pb = match b {
                BoundsCmd::ECrossed(_) => {
                    let (ra, rb, rc) =
                        (c.model.radius(0), c.model.radius(1), c.model.radius(2));
                    e_crossed_upper(c.l, c.p, ra, rb, rc, c.eps, c.gamma)?
                }
                _ => spanned_upper(c.l, c.p, &c.model, c.eps, c.gamma)?,
            };
            prob_row(pb)
        }
    };
    Ok(Output::good(render(fmt, &header, vec![row], true)))
}

fn run_verify(a: &VerifyArgs, fmt: Format) -> Result<Output> {
    let suites: Vec<verify::Suite> = match a.suite {
        SuiteArg::Oracle => vec![verify::Suite::Oracle],
        SuiteArg::Monotone => vec![verify::Suite::Monotone],
        SuiteArg::Slab => vec![verify::Suite::Slab],
        SuiteArg::Regions => vec![verify::Suite::Regions],
        SuiteArg::Domination => vec![verify::Suite::Domination],
        SuiteArg::All => verify::Suite::ALL.to_vec(),
    };
    let header = ["suite", "cases", "failures", "status"];
    let mut rows = Vec::new();
    let mut ok = true;
    for suite in suites {
        let outcome = verify::run_suite(suite, a.cases, a.seed)?;
        ok &= outcome.failures == 0;
        rows.push(vec![
            Cell::S(outcome.name.to_string()),
            Cell::U(outcome.cases),
            Cell::U(outcome.failures),
            Cell::S(if outcome.failures == 0 { "pass" } else { "fail" }.to_string()),
        ]);
    }
    Ok(Output { text: render(fmt, &header, rows, false), ok })
}

fn run_enhance(a: &EnhanceArgs, fmt: Format) -> Result<Output> {
    let initial = match (&a.load, &a.dims) {
        (Some(path), _) => Lattice::from_snapshot(&fs::read_to_string(path)?)?,
        (None, Some(e)) => {
            let dims = Dims::new(&e.for_rank(a.model.rank()))?;
            Lattice::random_fill(dims, a.p, a.seed)?
        }
        (None, None) => {
            return Err(Error::BadParameter("give --dims or --load".into()));
        }
    };
    let (ra, rb) = (a.model.radius(0), a.model.radius(1));
    let params = match (a.flood_size, a.x_c, a.y_c) {
        (None, None, None) => EnhanceParams::defaults(a.p, ra, rb)?,
        (Some(s), Some(xc), Some(yc)) => EnhanceParams::new(s, xc, yc, a.eps, a.p, rb)?,
        _ => {
            return Err(Error::BadParameter(
                "give all of --S, --x-c, --y-c, or none".into(),
            ))
        }
    };
    let enhanced = enhance(&initial, &a.model, &params)?;
    if let Some(path) = &a.dump {
        fs::write(path, enhanced.to_snapshot())?;
    }
    let s = a.model.radius(2) as u64 + 1;
    let header = [
        "sites_in", "sites_enhanced", "s", "slices", "flood_size", "x_c", "y_c", "e_crossed",
    ];
    let row = vec![
        Cell::U(initial.occupied_count() as u64),
        Cell::U(enhanced.occupied_count() as u64),
        Cell::U(s),
        Cell::U(initial.dims().extent(2) as u64 / s),
        Cell::U(params.flood_size as u64),
        Cell::U(params.x_c as u64),
        Cell::U(params.y_c as u64),
        Cell::B(has_crossing(&enhanced, 2)?),
    ];
    Ok(Output::good(render(fmt, &header, vec![row], true)))
}
