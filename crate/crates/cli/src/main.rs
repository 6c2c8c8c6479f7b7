mod roots;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use csl_core::conjecture::{
    all_targets, evaluate, verify_violation, CheckOptions, Conjecture, InequalityReport, Side,
    StandardOracle, ViolationCheck,
};
use csl_core::error::Error;
use csl_core::linalg::rng::{slots, stream};
use csl_core::linalg::ComplexMatrix;
use csl_core::ncpoly::{
    derivative_form, factorize, functional_residual, AlgebraScope, FactorOptions, FactoredPoly,
    FactorizationMethod, FactorizationResult, ProbeSet, Strategy,
};
use csl_core::scalar::{
    debruin_sharma_report, kushel_tyaglov_report_with, schoenberg_report, KtForm, RootList,
    ScalarInequalityReport,
};
use csl_core::search::{self, CampaignSummary, SearchConfig};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_PREMISE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "csl", version, about = "Check Schoenberg-type inequalities for polynomials over matrix algebras")]
struct Cli {
    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = Output::Pretty, global = true)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Schoenberg,
    Dbs,
    Kt,
    All,
}

impl Which {
    fn conjectures(self) -> Vec<Conjecture> {
        match self {
            Which::Schoenberg => vec![Conjecture::Schoenberg],
            Which::Dbs => vec![Conjecture::DebruinSharma],
            Which::Kt => vec![Conjecture::KushelTyaglov],
            Which::All => Conjecture::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Auto,
    Candidate,
    Refine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Right,
    Left,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scalar inequalities for a list of complex roots.
    Scalar {
        /// Comma-separated roots such as "1, -1+2i, 3i", or @file.json with [[re, im], ...].
        #[arg(long, allow_hyphen_values = true)]
        roots: String,
        #[arg(long, value_enum, default_value_t = Which::All)]
        check: Which,
        /// Absolute slack tolerance (default 1e-9 * max(1, max|a|)^p).
        #[arg(long)]
        tol: Option<f64>,
        /// Subtract the mean of the roots first.
        #[arg(long)]
        center: bool,
        #[arg(long, default_value_t = KtForm::Centered)]
        kt_form: KtForm,
    },
    /// Factor P'(z) = d (z - b_1)...(z - b_{d-1}) for a tuple file.
    Factor {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        factor: FactorArgs,
    },
    /// Evaluate the operator inequalities for a tuple file.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::All)]
        conjecture: Which,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        /// Loewner tolerance (default 1e-9 * max(1, ||lhs|| + ||rhs||)).
        #[arg(long)]
        loewner_tol: Option<f64>,
        #[arg(long, default_value_t = KtForm::Centered)]
        kt_form: KtForm,
        #[command(flatten)]
        factor: FactorArgs,
    },
    /// Run a campaign described by a config file.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Recompute every record of a log and compare bytes.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summarize a log.
    Report {
        #[arg(long)]
        log: PathBuf,
        /// Also write one CSV row per record.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct FactorArgs {
    /// Number of probe matrices (default max(2d, 8)).
    #[arg(long)]
    probes: Option<usize>,
    /// Acceptance bound on the functional residual.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    strategy: StrategyArg,
    /// Probe seed; CSL_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure carrying its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(EXIT_ERROR, e.to_string())
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail(EXIT_ERROR, e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(EXIT_ERROR, e.to_string())
    }
}

type CliResult = Result<u8, Fail>;

fn effective_seed(flag: u64) -> Result<u64, Fail> {
    match std::env::var("CSL_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Fail(EXIT_ERROR, format!("CSL_SEED must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(flag),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Fail> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct NamedScalarReport {
    check: Conjecture,
    #[serde(flatten)]
    report: ScalarInequalityReport,
}

fn scalar_tol(roots: &RootList, c: Conjecture) -> f64 {
    1e-9 * roots.max_modulus().max(1.0).powi(c.degree())
}

fn run_scalar(output: Output, roots: &str, which: Which, tol: Option<f64>, center: bool, kt_form: KtForm) -> CliResult {
    eprintln!("seed: 0");
    let mut list = roots::load_roots(roots).map_err(|e| Fail(EXIT_ERROR, e))?;
    if list.degree() < 2 {
        return Err(Fail(EXIT_ERROR, format!("need d >= 2 roots, got {}", list.degree())));
    }
    if center {
        let mean = list.roots().iter().sum::<csl_core::linalg::ComplexScalar>() / list.degree() as f64;
        eprintln!("note: subtracted the mean {:.6}{:+.6}i from every root", mean.re, mean.im);
        list = list.centered();
    }
    let mut reports = Vec::new();
    for c in which.conjectures() {
        let t = tol.unwrap_or_else(|| scalar_tol(&list, c));
        let r = match c {
            Conjecture::Schoenberg => schoenberg_report(&list, t),
            Conjecture::DebruinSharma => match debruin_sharma_report(&list, t) {
                Err(Error::CentroidNotZero { norm, .. }) if which == Which::All => {
                    eprintln!("note: skipped dbs, the roots sum to {norm:.3e} (use --center)");
                    continue;
                }
                r => r,
            },
            Conjecture::KushelTyaglov => kushel_tyaglov_report_with(&list, t, kt_form),
        }?;
        reports.push(NamedScalarReport { check: c, report: r });
    }
    match output {
        Output::Json => print_json(&json!({ "roots": list, "reports": reports }))?,
        Output::Csv => {
            let mut w = csv_writer();
            w.write_record(["check", "lhs", "rhs", "slack", "holds", "tol"]).map_err(csv_fail)?;
            for r in &reports {
                let s = &r.report;
                w.write_record([
                    r.check.to_string(),
                    format!("{:e}", s.lhs),
                    format!("{:e}", s.rhs),
                    format!("{:e}", s.slack),
                    s.holds.to_string(),
                    format!("{:e}", s.tol),
                ])
                .map_err(csv_fail)?;
            }
            w.flush()?;
        }
        Output::Pretty => {
            for r in &reports {
                let s = &r.report;
                println!(
                    "{:<15} lhs {:.12e}  rhs {:.12e}  slack {:+.3e}  {}",
                    r.check,
                    s.lhs,
                    s.rhs,
                    s.slack,
                    if s.holds { "holds" } else { "VIOLATED" }
                );
            }
        }
    }
    Ok(if reports.iter().all(|r| r.report.holds) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn csv_writer() -> csv::Writer<io::Stdout> {
    csv::Writer::from_writer(io::stdout())
}

fn csv_fail(e: csv::Error) -> Fail {
    Fail(EXIT_ERROR, format!("csv: {e}"))
}

/// `{"schema_version": 1, "n": ..., "a": [...], "b": [...]}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleFile {
    #[serde(default)]
    schema_version: Option<u32>,
    n: usize,
    a: Vec<ComplexMatrix>,
    #[serde(default)]
    b: Option<Vec<ComplexMatrix>>,
}

fn load_tuple(path: &Path) -> Result<TupleFile, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", path.display())))?;
    let t: TupleFile =
        serde_json::from_str(&text).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", path.display())))?;
    if let Some(v) = t.schema_version {
        if v != search::SCHEMA_VERSION {
            return Err(Fail(EXIT_ERROR, format!("unsupported schema_version {v}")));
        }
    }
    if t.a.len() < 2 {
        return Err(Fail(EXIT_ERROR, format!("need d >= 2 matrices in `a`, got {}", t.a.len())));
    }
    for (k, m) in t.a.iter().chain(t.b.iter().flatten()).enumerate() {
        if m.dim() != t.n {
            return Err(Fail(
                EXIT_ERROR,
                format!("matrix {k} is {0}x{0}, expected n = {1}", m.dim(), t.n),
            ));
        }
    }
    Ok(t)
}

fn probes_for(n: usize, d: usize, args: &FactorArgs, seed: u64) -> ProbeSet {
    let count = args.probes.unwrap_or_else(|| ProbeSet::default_count(d)).max(1);
    ProbeSet::ginibre(n, count, &mut stream(seed, 0, slots::PROBES))
}

fn factor_options(args: &FactorArgs, seed: u64) -> FactorOptions {
    FactorOptions {
        tol: args.tol,
        seed,
        ..FactorOptions::default()
    }
}

fn do_factor(t: &TupleFile, args: &FactorArgs, seed: u64) -> Result<Result<FactorizationResult, FactorizationResult>, Fail> {
    let strategy = match args.strategy {
        StrategyArg::Auto => Strategy::Auto,
        StrategyArg::Candidate => Strategy::Candidate,
        StrategyArg::Refine => Strategy::Refine,
    };
    let probes = probes_for(t.n, t.a.len(), args, seed);
    match factorize(&t.a, strategy, &probes, &factor_options(args, seed)) {
        Ok(r) => Ok(Ok(r)),
        Err(Error::NoFactorization(best)) => Ok(Err(*best)),
        Err(e) => Err(e.into()),
    }
}

fn print_factorization(output: Output, r: &FactorizationResult) -> Result<(), Fail> {
    match output {
        Output::Json => print_json(r),
        Output::Csv => {
            let mut w = csv_writer();
            w.write_record(["method", "residual", "accepted", "iterations"]).map_err(csv_fail)?;
            w.write_record([
                serde_json::to_value(r.method)?.as_str().unwrap_or_default().to_string(),
                format!("{:e}", r.residual),
                r.accepted.to_string(),
                r.iterations.to_string(),
            ])
            .map_err(csv_fail)?;
            w.flush()?;
            Ok(())
        }
        Output::Pretty => {
            println!(
                "method {}  residual {:.3e}  {}",
                serde_json::to_value(r.method)?.as_str().unwrap_or_default(),
                r.residual,
                if r.accepted { "accepted" } else { "REJECTED" }
            );
            for (k, b) in r.b.iter().enumerate() {
                println!("b_{} = {:?}", k + 1, b);
            }
            Ok(())
        }
    }
}

fn run_factor(output: Output, input: &Path, args: &FactorArgs) -> CliResult {
    let seed = effective_seed(args.seed)?;
    eprintln!("seed: {seed}");
    let t = load_tuple(input)?;
    match do_factor(&t, args, seed)? {
        Ok(r) => {
            print_factorization(output, &r)?;
            Ok(EXIT_OK)
        }
        Err(best) => {
            print_factorization(output, &best)?;
            eprintln!("premise failed: best residual {:.3e} exceeds {:.1e}", best.residual, args.tol);
            Ok(EXIT_PREMISE)
        }
    }
}

#[derive(Debug, Serialize)]
struct CheckOutput<'a> {
    factorization: &'a FactorizationResult,
    reports: &'a [InequalityReport],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violations: Vec<(Conjecture, Side, &'a ViolationCheck)>,
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    output: Output,
    input: &Path,
    which: Which,
    side: SideArg,
    loewner_tol: Option<f64>,
    kt_form: KtForm,
    args: &FactorArgs,
) -> CliResult {
    let seed = effective_seed(args.seed)?;
    eprintln!("seed: {seed}");
    let t = load_tuple(input)?;
    let d = t.a.len();
    let factor = match &t.b {
        Some(b) => {
            if b.len() + 1 != d {
                return Err(Fail(EXIT_ERROR, format!("need {} matrices in `b`, got {}", d - 1, b.len())));
            }
            let form = derivative_form(&FactoredPoly::monic(t.a.clone())?);
            let probes = probes_for(t.n, d, args, seed);
            let residual = functional_residual(&form, b, &probes)?;
            FactorizationResult {
                b: b.clone(),
                residual,
                method: FactorizationMethod::Candidate,
                accepted: residual <= args.tol,
                algebra: AlgebraScope::Full,
                iterations: 0,
            }
        }
        None => match do_factor(&t, args, seed)? {
            Ok(r) => r,
            Err(best) => {
                if output == Output::Json {
                    print_json(&json!({ "factorization": best }))?;
                }
                eprintln!("premise failed: best residual {:.3e} exceeds {:.1e}", best.residual, args.tol);
                return Ok(EXIT_PREMISE);
            }
        },
    };
    if !factor.accepted {
        eprintln!("premise failed: supplied factors have residual {:.3e}", factor.residual);
        return Ok(EXIT_PREMISE);
    }

    let opts = CheckOptions {
        tol: loewner_tol,
        kt_form,
    };
    let sides: Vec<Side> = match side {
        SideArg::Right => vec![Side::Right],
        SideArg::Left => vec![Side::Left],
        SideArg::Both => Side::BOTH.to_vec(),
    };
    let wanted = which.conjectures();
    let mut reports = Vec::new();
    for (c, s) in all_targets().filter(|(c, s)| wanted.contains(c) && sides.contains(s)) {
        match evaluate(c, s, &t.a, &factor.b, &opts) {
            Ok(r) => reports.push(r),
            Err(Error::CentroidNotZero { norm, .. }) if which == Which::All => {
                if s == Side::Right {
                    eprintln!("note: skipped dbs, sum a_j has norm {norm:.3e}");
                }
            }
            Err(e) => return Err(e.into()),
        }
    }

    let oracle = StandardOracle { opts };
    let mut checks = Vec::new();
    for r in reports.iter().filter(|r| !r.holds) {
        let check = verify_violation(
            &oracle,
            r.conjecture,
            r.side,
            &t.a,
            &factor,
            args.probes.unwrap_or_else(|| ProbeSet::default_count(d)),
            seed,
            0,
            &factor_options(args, seed),
        )?;
        if !check.verified {
            eprintln!(
                "warning: {} {} fails at min_eig {:.3e} but the violation was not verified ({})",
                r.conjecture,
                r.side,
                r.min_eig,
                check.reason.as_deref().unwrap_or("unknown")
            );
        }
        checks.push((r.conjecture, r.side, check));
    }

    match output {
        Output::Json => print_json(&CheckOutput {
            factorization: &factor,
            reports: &reports,
            violations: checks.iter().map(|(c, s, v)| (*c, *s, v)).collect(),
        })?,
        Output::Csv => {
            let mut w = csv_writer();
            w.write_record(["conjecture", "side", "min_eig", "holds", "tol"]).map_err(csv_fail)?;
            for r in &reports {
                w.write_record([
                    r.conjecture.to_string(),
                    r.side.to_string(),
                    format!("{:e}", r.min_eig),
                    r.holds.to_string(),
                    format!("{:e}", r.tol),
                ])
                .map_err(csv_fail)?;
            }
            w.flush()?;
        }
        Output::Pretty => {
            println!(
                "factorization: {} (residual {:.3e})",
                serde_json::to_value(factor.method)?.as_str().unwrap_or_default(),
                factor.residual
            );
            for r in &reports {
                println!(
                    "{:<15} {:<5}  min_eig {:+.6e}  {}",
                    r.conjecture,
                    r.side,
                    r.min_eig,
                    if r.holds { "holds" } else { "VIOLATED" }
                );
            }
        }
    }
    Ok(if checks.iter().any(|(_, _, v)| v.verified) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

fn print_summary(output: Output, s: &CampaignSummary) -> Result<(), Fail> {
    match output {
        Output::Json => print_json(s),
        Output::Csv => {
            let mut w = csv_writer();
            w.write_record(["conjecture", "side", "worst_min_eig", "trial_index"]).map_err(csv_fail)?;
            for x in &s.worst {
                w.write_record([
                    x.conjecture.to_string(),
                    x.side.to_string(),
                    format!("{:e}", x.min_eig),
                    x.trial_index.to_string(),
                ])
                .map_err(csv_fail)?;
            }
            w.flush()?;
            Ok(())
        }
        Output::Pretty => {
            println!(
                "records {}  checked {}  premise_failed {} ({:.1}%)  error {}  verified violations {}",
                s.records,
                s.checked,
                s.premise_failed,
                100.0 * s.premise_failed_rate,
                s.error,
                s.verified_violations
            );
            for x in &s.worst {
                println!(
                    "worst {:<15} {:<5}  min_eig {:+.6e}  (trial {})",
                    x.conjecture, x.side, x.min_eig, x.trial_index
                );
            }
            Ok(())
        }
    }
}

fn run_search(output: Output, config: &Path, log: &Path, threads: Option<usize>) -> CliResult {
    let text = std::fs::read_to_string(config).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", config.display())))?;
    let mut cfg = SearchConfig::from_json(&text)?;
    let seed = effective_seed(cfg.master_seed)?;
    if seed != cfg.master_seed {
        eprintln!("note: CSL_SEED overrides master_seed {}", cfg.master_seed);
        cfg.master_seed = seed;
    }
    eprintln!("seed: {seed}");
    let summary = search::run(&cfg, log, threads)?;
    print_summary(output, &summary)?;
    Ok(if summary.verified_violations > 0 {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

fn run_replay(output: Output, log: &Path, threads: Option<usize>) -> CliResult {
    let report = search::replay(log, threads)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match output {
        Output::Json => print_json(&report)?,
        Output::Csv => {
            let mut w = csv_writer();
            w.write_record(["records", "reproduced", "first_divergence"]).map_err(csv_fail)?;
            w.write_record([
                report.records.to_string(),
                report.reproduced.to_string(),
                report.first_divergence.map(|l| l.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_fail)?;
            w.flush()?;
        }
        Output::Pretty => println!("{report}"),
    }
    Ok(if report.reproduced { EXIT_OK } else { EXIT_ERROR })
}

fn run_report(output: Output, log: &Path, csv_path: Option<&Path>) -> CliResult {
    let (header, records) = search::read_log(log)?;
    eprintln!("seed: {}", header.config.master_seed);
    let summary = search::summarize(&records);
    if let Some(path) = csv_path {
        let file = BufWriter::new(File::create(path)?);
        search::write_csv(&records, file)?;
    }
    print_summary(output, &summary)?;
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> CliResult {
    let output = cli.output;
    match cli.command {
        Command::Scalar {
            roots,
            check,
            tol,
            center,
            kt_form,
        } => run_scalar(output, &roots, check, tol, center, kt_form),
        Command::Factor { input, factor } => run_factor(output, &input, &factor),
        Command::Check {
            input,
            conjecture,
            side,
            loewner_tol,
            kt_form,
            factor,
        } => run_check(output, &input, conjecture, side, loewner_tol, kt_form, &factor),
        Command::Search { config, log, threads } => run_search(output, &config, &log, threads),
        Command::Replay { log, threads } => run_replay(output, &log, threads),
        Command::Report { log, csv } => run_report(output, &log, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
