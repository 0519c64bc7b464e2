//! Command-line front end.
//!
//! Exit codes: 0 supported / pass, 1 refuted / fail, 2 usage or parse
//! error, 3 inconclusive or numerical failure, 4 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ageing::{classify_ifr, classify_ifra, window_for, MonotoneClass};
use crate::casebook::{coverage, run_all, run_case, CaseResult};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::iteration::{iterate, iterated_moment, IteratedTail, Representation};
use crate::ordering::{
    compare_dmrl, compare_ifr, compare_ifra, convexity_check, criterion_h, newcrit_with, GridSpec, HForm, Outcome,
    Shape, Verdict,
};
use crate::report::document;
use crate::signscan::{scan_traced, write_trace_csv, ScanConfig, SignPattern, TracePoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_IO: i32 = 4;

const LITERALS: &str = "\
Distribution literals (whitespace-insensitive, decimal parameters):
  exp(rate)                 exponential
  gamma(shape,scale)        gamma
  weibull(shape,scale)      Weibull
  bpareto(c1,c2)            branched Pareto, c1, c2 > 0
  polyexp(c)                density (x^2 + c) e^{-x} / (2 + c), c > 0
  maxexp(r1,...,rn)         maximum of independent exponentials, 2 <= n <= 20
  exppoly(TERMS)            survival function given as an exponential polynomial

Exponential polynomials: terms COEF*e(-RATE) joined by + or -; a bare
e(-RATE) has coefficient 1, e.g.
  1*e(-1)+(-1)*e(-2)  or  2*e(-1) - e(-2)";

#[derive(Debug, Parser)]
#[command(name = "iterfr", version, about = "Iterated failure rates, ageing classes and stochastic orders", after_help = LITERALS)]
pub struct Cli {
    /// Write the JSON document to PATH (`-` for standard output).
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write the scan trace as CSV (`x,value,sign`) to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Embed the sampled trace in the JSON document.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Seed for randomized sweeps (`roots --random`).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterated moments and s-IFR / s-IFRA classes for s = 1..=s_max.
    Analyze(AnalyzeArgs),
    /// Check a stochastic order between two distributions.
    Compare(CompareArgs),
    /// Isolate the real zeros of an exponential polynomial.
    Roots(RootsArgs),
    /// Run registered worked examples.
    Casebook(CasebookArgs),
    /// Sign pattern of a single function.
    Scan(ScanArgs),
}

fn dist(s: &str) -> std::result::Result<DistributionSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exppoly(s: &str) -> std::result::Result<ExpPoly, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn order(s: &str) -> std::result::Result<u32, String> {
    match s.trim().parse::<u32>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("`{s}`: s must be an integer >= 1")),
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_parser = dist)]
    pub dist: DistributionSpec,
    #[arg(long = "s-max", default_value = "3", value_parser = clap::value_parser!(u32).range(1..=64))]
    pub s_max: u32,
    /// Scan window (default: from the tail of the distribution).
    #[arg(long = "x-max")]
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionArg {
    /// s-IFR order from the sign pattern of V_s.
    Ifr,
    /// s-IFRA order from the sign pattern of V_s with b = 0.
    Ifra,
    /// Sufficient H/P criterion for the s-IFR order.
    H,
    /// s-IFRA order plus the criterion on b > 0.
    Newcrit,
    /// DMRL order (s is ignored).
    Dmrl,
    /// Convexity of c_s.
    Convexity,
    /// Star shape of c_s.
    StarShape,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_parser = dist)]
    pub x: DistributionSpec,
    #[arg(long, value_parser = dist)]
    pub y: DistributionSpec,
    #[arg(long, default_value = "1", value_parser = order)]
    pub s: u32,
    #[arg(long, value_enum, default_value = "ifr")]
    pub criterion: CriterionArg,
    /// Function scanned by the H/P criterion: hs, hs-1, ps, ps-1.
    #[arg(long, default_value = "ps")]
    pub form: HForm,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Read the grid from a JSON verdict document (or a bare grid).
    #[arg(long = "grid", value_name = "PATH")]
    pub grid_file: Option<PathBuf>,
    #[arg(long = "a-min", default_value = "0.05")]
    pub a_min: f64,
    #[arg(long = "a-max", default_value = "20")]
    pub a_max: f64,
    #[arg(long = "n-a", default_value = "64")]
    pub n_a: usize,
    /// Largest positive shift (default 5 E Y).
    #[arg(long = "b-max")]
    pub b_max: Option<f64>,
    #[arg(long = "n-b", default_value = "32")]
    pub n_b: usize,
    /// Magnitude of the most negative shift (default 5 E X).
    #[arg(long = "b-neg")]
    pub b_neg: Option<f64>,
    #[arg(long = "n-b-neg", default_value = "16")]
    pub n_b_neg: usize,
    /// Extra slope added to the grid; repeatable.
    #[arg(long = "pin-a")]
    pub pin_a: Vec<f64>,
    #[arg(long = "initial-grid", default_value = "512")]
    pub initial_grid: usize,
    /// Fixed scan window for every cell.
    #[arg(long = "x-max")]
    pub x_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    /// Exponential polynomial literal.
    #[arg(long, value_parser = exppoly, required_unless_present = "random")]
    pub exppoly: Option<ExpPoly>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    /// Sweep N random exponential polynomials and count zero-bound violations.
    #[arg(long, value_name = "N", conflicts_with = "exppoly")]
    pub random: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CasebookArgs {
    /// Run a single case.
    #[arg(long)]
    pub id: Option<String>,
    /// Print the case ids and statements only.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionKind {
    /// The exponential polynomial given by --exppoly.
    Exppoly,
    /// Density of --dist.
    Density,
    /// Iterated tail of --dist of order --s.
    Tail,
    /// Iterated failure rate of --dist of order --s.
    Rate,
    /// V_s(x) = T̄_{Y,s}(x) - T̄_{X,s}(ax + b).
    V,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub function: FunctionKind,
    #[arg(long, value_parser = exppoly)]
    pub exppoly: Option<ExpPoly>,
    #[arg(long, value_parser = dist)]
    pub dist: Option<DistributionSpec>,
    #[arg(long, value_parser = dist)]
    pub x: Option<DistributionSpec>,
    #[arg(long, value_parser = dist)]
    pub y: Option<DistributionSpec>,
    #[arg(long, default_value = "1", value_parser = order)]
    pub s: u32,
    #[arg(long, default_value = "1")]
    pub a: f64,
    #[arg(long, default_value = "0", allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long = "x-max", default_value = "50")]
    pub x_max: f64,
    #[arg(long = "initial-grid", default_value = "512")]
    pub initial_grid: usize,
    #[arg(long, default_value = "1e-11")]
    pub deadband: f64,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, e.g. when called twice in one
        // process; the existing pool is then used.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global();
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InvalidParameter { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidDistribution(_)
        | Error::InfiniteMoment { .. }
        | Error::UnknownCase(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        Error::Json(e) if e.is_io() => EXIT_IO,
        Error::Json(_) => EXIT_USAGE,
        _ => EXIT_INCONCLUSIVE,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Analyze(a) => analyze(cli, a),
        Command::Compare(c) => compare(cli, c),
        Command::Roots(r) => roots(cli, r),
        Command::Casebook(c) => casebook(cli, c),
        Command::Scan(s) => scan_cmd(cli, s),
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let text = document(value)?;
    if path == Path::new("-") {
        io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn write_csv(path: Option<&Path>, trace: &[TracePoint]) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let mut w = BufWriter::new(File::create(path)?);
    write_trace_csv(&mut w, trace)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct AnalyzeEntry {
    s: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    representation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ifr: Option<MonotoneClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ifra: Option<MonotoneClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct AnalyzeDoc<'a> {
    command: &'static str,
    dist: String,
    x_max: f64,
    entries: &'a [AnalyzeEntry],
}

fn representation_name(it: &IteratedTail) -> &'static str {
    match it.representation() {
        Representation::ExpPoly(_) => "exppoly",
        Representation::PolyExp { .. } => "polyexp-closed-form",
        Representation::BranchedPareto { .. } => "bpareto-closed-form",
        Representation::IncompleteGamma => "incomplete-gamma",
        Representation::Quadrature => "quadrature",
    }
}

fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<i32> {
    let cfg = match args.x_max {
        Some(x) => ScanConfig::with_x_max(x),
        None => window_for(&args.dist),
    };
    let mut entries = Vec::new();
    for s in 1..=args.s_max {
        let entry = match iterate(&args.dist, s) {
            Ok(it) => {
                let classes = classify_ifr(&args.dist, s, &cfg).and_then(|ifr| Ok((ifr, classify_ifra(&args.dist, s, &cfg)?)));
                match classes {
                    Ok((ifr, ifra)) => AnalyzeEntry {
                        s,
                        representation: Some(representation_name(&it).into()),
                        mean: iterated_moment(&args.dist, s).ok(),
                        ifr: Some(ifr),
                        ifra: Some(ifra),
                        error: None,
                    },
                    Err(e) => AnalyzeEntry {
                        s,
                        representation: Some(representation_name(&it).into()),
                        mean: iterated_moment(&args.dist, s).ok(),
                        ifr: None,
                        ifra: None,
                        error: Some(e.to_string()),
                    },
                }
            }
            Err(e) => AnalyzeEntry {
                s,
                representation: None,
                mean: None,
                ifr: None,
                ifra: None,
                error: Some(e.to_string()),
            },
        };
        match (&entry.ifr, &entry.ifra, &entry.error) {
            (Some(i), Some(a), _) => println!(
                "s={s}: mean {}, failure rate {}, average failure rate {}",
                entry.mean.map_or("infinite".into(), |m| format!("{m:.10}")),
                i.label(),
                a.label()
            ),
            (_, _, Some(e)) => println!("s={s}: {e}"),
            _ => {}
        }
        entries.push(entry);
    }
    write_json(
        cli.json.as_deref(),
        &AnalyzeDoc {
            command: "analyze",
            dist: args.dist.to_string(),
            x_max: cfg.x_max,
            entries: &entries,
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize, Deserialize)]
struct GridHolder {
    grid: GridSpec,
}

fn read_grid(path: &Path) -> Result<GridSpec> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(h) = serde_json::from_str::<GridHolder>(&text) {
        return Ok(h.grid);
    }
    Ok(serde_json::from_str::<GridSpec>(&text)?)
}

fn build_grid(args: &GridArgs, x: &DistributionSpec, y: &DistributionSpec, ifra_only: bool) -> Result<GridSpec> {
    if let Some(path) = &args.grid_file {
        let g = read_grid(path)?;
        g.validate()?;
        return Ok(g);
    }
    if !(args.a_min > 0.0 && args.a_max >= args.a_min) || args.n_a == 0 {
        return Err(Error::InvalidArgument(
            "need 0 < a-min <= a-max and n-a >= 1".into(),
        ));
    }
    let mut b = Vec::new();
    if !ifra_only {
        let neg = args.b_neg.unwrap_or(5.0 * x.mean()).abs();
        b.extend(GridSpec::b_points(neg, args.n_b_neg).into_iter().skip(1).rev().map(|v| -v));
        b.extend(GridSpec::b_points(args.b_max.unwrap_or(5.0 * y.mean()), args.n_b));
    } else {
        b.push(0.0);
    }
    let mut g = GridSpec::new(GridSpec::log_points(args.a_min, args.a_max, args.n_a), b)?
        .with_initial_grid(args.initial_grid);
    g.x_max = args.x_max;
    for &a in &args.pin_a {
        g = g.with_a(a);
    }
    g.validate()?;
    Ok(g)
}

#[derive(Debug, Serialize)]
struct CompareDoc<'a> {
    command: &'static str,
    x: String,
    y: String,
    #[serde(flatten)]
    verdict: &'a Verdict,
    runtime_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [TracePoint]>,
}

fn compare(cli: &Cli, args: &CompareArgs) -> Result<i32> {
    let start = Instant::now();
    let (x, y, s) = (&args.x, &args.y, args.s);
    let scan_cfg = || match args.grid.x_max {
        Some(m) => ScanConfig::with_x_max(m),
        None => window_for(x),
    };
    let verdict = match args.criterion {
        CriterionArg::Ifr => compare_ifr(x, y, s, &build_grid(&args.grid, x, y, false)?)?,
        CriterionArg::Ifra => compare_ifra(x, y, s, &build_grid(&args.grid, x, y, true)?)?,
        CriterionArg::H => criterion_h(x, y, s, &build_grid(&args.grid, x, y, false)?, args.form)?,
        CriterionArg::Newcrit => newcrit_with(x, y, s, &build_grid(&args.grid, x, y, false)?, args.form)?,
        CriterionArg::Dmrl => compare_dmrl(x, y, &ScanConfig::default())?,
        CriterionArg::Convexity => convexity_check(x, y, s, &scan_cfg(), Shape::Convex)?,
        CriterionArg::StarShape => convexity_check(x, y, s, &scan_cfg(), Shape::StarShaped)?,
    };
    let trace = if cli.csv.is_some() || cli.trace {
        Some(v_trace(&verdict, x, y, s)?)
    } else {
        None
    };
    match &verdict.outcome {
        Outcome::Supported { cells_scanned, worst_margin } => {
            println!("supported ({cells_scanned} cells, minimum slack {worst_margin})")
        }
        Outcome::Refuted { witness } => match (witness.a, witness.b) {
            (Some(a), Some(b)) => println!("refuted: {} = {} at a = {a}, b = {b}", witness.function, witness.pattern),
            _ => println!("refuted: {} = {}", witness.function, witness.pattern),
        },
        Outcome::Inconclusive { reason } => println!("inconclusive: {reason}"),
    }
    write_csv(cli.csv.as_deref(), trace.as_deref().unwrap_or(&[]))?;
    let doc = CompareDoc {
        command: "compare",
        x: x.to_string(),
        y: y.to_string(),
        verdict: &verdict,
        runtime_ms: start.elapsed().as_millis(),
        seed: cli.seed,
        trace: if cli.trace { trace.as_deref() } else { None },
    };
    write_json(cli.json.as_deref(), &doc)?;
    Ok(match verdict.outcome {
        Outcome::Supported { .. } => EXIT_OK,
        Outcome::Refuted { .. } => EXIT_REFUTED,
        Outcome::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    })
}

/// Trace of `V_s` at the witness cell, or at `a = 1, b = 0`.
fn v_trace(v: &Verdict, x: &DistributionSpec, y: &DistributionSpec, s: u32) -> Result<Vec<TracePoint>> {
    let (a, b) = v
        .witness()
        .and_then(|w| Some((w.a?, w.b?)))
        .unwrap_or((1.0, 0.0));
    let (tx, ty) = (iterate(x, s)?, iterate(y, s)?);
    let cfg = ScanConfig::with_x_max(window_for(x).x_max.max(window_for(y).x_max));
    match scan_traced(|t| ty.eval(t) - tx.eval(a * t + b), &cfg, &[], None) {
        Ok((_, trace)) => Ok(trace),
        Err(Error::IndeterminateFunction) => Ok(cfg
            .grid(&[])
            .into_iter()
            .map(|x| TracePoint { x, value: 0.0, sign: None })
            .collect()),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Serialize)]
struct RootsDoc {
    command: &'static str,
    exppoly: String,
    lo: f64,
    hi: f64,
    bound: usize,
    isolated_roots: Vec<(f64, f64)>,
    uncertain: Vec<f64>,
    residual_uncertainty: bool,
}

#[derive(Debug, Serialize)]
struct SweepDoc {
    command: &'static str,
    seed: u64,
    cases: usize,
    violations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violating: Vec<String>,
}

fn roots(cli: &Cli, args: &RootsArgs) -> Result<i32> {
    if let Some(n) = args.random {
        let seed = cli.seed.unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violating = Vec::new();
        for _ in 0..n {
            let k = rng.gen_range(1..=6);
            let terms: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.gen_range(-5.0..5.0), rng.gen_range(0.1..6.0)))
                .collect();
            let Ok(p) = ExpPoly::new(terms) else { continue };
            let (lo, hi) = p.real_root_window();
            let report = p.isolate_roots(lo, hi)?;
            if report.isolated_roots.len() > p.sign_change_bound() {
                violating.push(p.to_string());
            }
        }
        println!("{n} random exponential polynomials, {} zero-bound violations", violating.len());
        let doc = SweepDoc {
            command: "roots",
            seed,
            cases: n,
            violations: violating.len(),
            violating,
        };
        write_json(cli.json.as_deref(), &doc)?;
        return Ok(if doc.violations == 0 { EXIT_OK } else { EXIT_REFUTED });
    }
    let p = args.exppoly.as_ref().expect("clap requires --exppoly");
    let (wlo, whi) = p.real_root_window();
    let lo = args.lo.unwrap_or(wlo);
    let hi = args.hi.unwrap_or(whi.max(lo + 1.0));
    let report = p.isolate_roots(lo, hi)?;
    println!(
        "sign-change bound {}, {} isolated root(s) in [{lo}, {hi}]",
        report.sign_change_bound,
        report.isolated_roots.len()
    );
    for (l, h) in &report.isolated_roots {
        println!("  [{l:.15e}, {h:.15e}]");
    }
    for u in &report.uncertain {
        println!("  uncertain near {u:.15e}");
    }
    write_json(
        cli.json.as_deref(),
        &RootsDoc {
            command: "roots",
            exppoly: p.to_string(),
            lo,
            hi,
            bound: report.sign_change_bound,
            isolated_roots: report.isolated_roots.clone(),
            uncertain: report.uncertain.clone(),
            residual_uncertainty: report.residual_uncertainty,
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CasebookDoc<'a> {
    command: &'static str,
    passed: usize,
    failed: usize,
    results: &'a [CaseResult],
}

fn casebook(cli: &Cli, args: &CasebookArgs) -> Result<i32> {
    if args.list {
        for (id, statement) in coverage() {
            println!("{id:<26} {statement}");
        }
        return Ok(EXIT_OK);
    }
    let results = match &args.id {
        Some(id) => vec![run_case(id)?],
        None => run_all()?.results,
    };
    for r in &results {
        println!("{:<26} {}", r.id, if r.passed { "pass" } else { "FAIL" });
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("    {}: expected {}, observed {}", c.name, c.expected, c.observed);
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let doc = CasebookDoc {
        command: "casebook",
        passed,
        failed: results.len() - passed,
        results: &results,
    };
    write_json(cli.json.as_deref(), &doc)?;
    Ok(if doc.failed == 0 { EXIT_OK } else { EXIT_REFUTED })
}

#[derive(Debug, Serialize)]
struct ScanDoc<'a> {
    command: &'static str,
    function: String,
    config: &'a ScanConfig,
    pattern: &'a SignPattern,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [TracePoint]>,
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("this function needs --{flag}")))
}

fn scan_cmd(cli: &Cli, args: &ScanArgs) -> Result<i32> {
    let mut cfg = ScanConfig::with_x_max(args.x_max);
    cfg.initial_grid = args.initial_grid;
    cfg.deadband = args.deadband;
    let (name, result) = match args.function {
        FunctionKind::Exppoly => {
            let p = need(&args.exppoly, "exppoly")?;
            (p.to_string(), scan_traced(|x| p.eval(x), &cfg, &[], Some(p.limit_sign_pos_inf())))
        }
        FunctionKind::Density => {
            let d = need(&args.dist, "dist")?;
            (format!("density of {d}"), scan_traced(|x| d.density(x), &cfg, &d.breakpoints(), None))
        }
        FunctionKind::Tail => {
            let d = need(&args.dist, "dist")?;
            let it = iterate(d, args.s)?;
            (
                format!("iterated tail of order {} of {d}", args.s),
                scan_traced(|x| it.eval(x), &cfg, &d.breakpoints(), None),
            )
        }
        FunctionKind::Rate => {
            let d = need(&args.dist, "dist")?;
            let it = iterate(d, args.s)?;
            (
                format!("iterated failure rate of order {} of {d}", args.s),
                scan_traced(|x| it.failure_rate(x).unwrap_or(f64::NAN), &cfg, &d.breakpoints(), None),
            )
        }
        FunctionKind::V => {
            let (x, y) = (need(&args.x, "x")?, need(&args.y, "y")?);
            let (tx, ty) = (iterate(x, args.s)?, iterate(y, args.s)?);
            let (a, b) = (args.a, args.b);
            if !(a > 0.0) {
                return Err(Error::param("a", a, "must be > 0"));
            }
            (
                format!("V_{} for X = {x}, Y = {y}, a = {a}, b = {b}", args.s),
                scan_traced(|t| ty.eval(t) - tx.eval(a * t + b), &cfg, &[], None),
            )
        }
    };
    let (pattern, trace) = match result {
        Ok(r) => r,
        Err(Error::IndeterminateFunction) => (SignPattern::empty(crate::signscan::Confidence::Sampled), Vec::new()),
        Err(e) => return Err(e),
    };
    println!("{name}: {pattern}");
    write_csv(cli.csv.as_deref(), &trace)?;
    write_json(
        cli.json.as_deref(),
        &ScanDoc {
            command: "scan",
            function: name,
            config: &cfg,
            pattern: &pattern,
            trace: if cli.trace { Some(&trace) } else { None },
        },
    )?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("iterfr").chain(args.iter().copied()))
    }

    #[test]
    fn parses_compare() {
        let cli = parse(&["compare", "--x", "maxexp(1,1)", "--y", "maxexp(1, 2)", "--s", "2", "--criterion", "newcrit"])
            .unwrap();
        match cli.command {
            Command::Compare(c) => {
                assert_eq!(c.s, 2);
                assert_eq!(c.criterion, CriterionArg::Newcrit);
                assert_eq!(c.y.to_string(), "maxexp(1,2)");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_analyze() {
        let cli = parse(&["analyze", "--dist", "polyexp(1)", "--s-max", "3"]).unwrap();
        assert!(matches!(cli.command, Command::Analyze(AnalyzeArgs { s_max: 3, .. })));
    }

    #[test]
    fn rejects_bad_input() {
        let e = parse(&["compare", "--x", "exp(1)", "--y", "exp(2)", "--s", "0"]).unwrap_err();
        assert!(e.to_string().contains("s must be"));
        let e = parse(&["compare", "--x", "gama(1,2)", "--y", "exp(2)"]).unwrap_err();
        assert!(e.to_string().contains("gama"));
        assert!(parse(&["analyze", "--dist", "exp(1)", "--bogus"]).is_err());
        assert!(parse(&[]).is_err());
        assert_eq!(main_with(["iterfr", "compare", "--s", "0"]), EXIT_USAGE);
    }
}
