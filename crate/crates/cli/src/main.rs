//! `ghzsim`: run the ideal pipeline, sweep the HOM-failure parameter, classify
//! three-qubit states and audit everything against the Fock-space oracle.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ghzsim_core::audit::{run_audit, AuditReport, DEFAULT_TOL};
use ghzsim_core::entanglement::{classify, w_state, EntanglementReport};
use ghzsim_core::history::{delta_grid, HistoryEngine, OverlapRow, DEFAULT_GRID_POINTS, DELTA_MAX};
use ghzsim_core::interferometer::pair_name;
use ghzsim_core::{CircuitLayout, IdealProtocol, PureState3, SparseState};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "ghzsim", version, about = "Five-photon heralded GHZ generator simulator")]
struct Cli {
    /// Circuit layout JSON replacing the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    layout: Option<PathBuf>,

    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ideal post-selected pipeline as JSON.
    RunIdeal {
        /// Print the entanglement table of the four heralded states instead.
        #[arg(long, conflicts_with = "emit_states")]
        table1: bool,
        /// Write ghz, w and psi1..psi4 state files into DIR.
        #[arg(long, value_name = "DIR")]
        emit_states: Option<PathBuf>,
    },
    /// Overlap curves over a uniform delta grid.
    SweepDelta {
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, default_value_t = DELTA_MAX, allow_negative_numbers = true)]
        max: f64,
        /// JSON rows instead of CSV.
        #[arg(long)]
        json: bool,
        #[arg(long, short, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Entropies, 3-tangle and class of a three-qubit state file.
    Classify { state: PathBuf },
    /// Cross-check the ideal pipeline and history engine against the oracle.
    OracleCheck {
        #[arg(long, default_value_t = DEFAULT_TOL, allow_negative_numbers = true)]
        tol: f64,
    },
}

enum Failure {
    Usage(String),
    Validation(String),
}

impl From<ghzsim_core::Error> for Failure {
    fn from(e: ghzsim_core::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => write(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// `printf("%.*g")` without locale.
fn fmt_g(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn load_layout(path: Option<&Path>) -> Result<CircuitLayout, Failure> {
    match path {
        None => Ok(CircuitLayout::standard()),
        Some(p) => Ok(CircuitLayout::from_json(&read(p)?)?),
    }
}

fn table_row(name: &str, pair: &str, r: &EntanglementReport) -> String {
    format!("{name:<6}{pair:<6}{:>10.6}{:>10.6}{:>10.6}{:>10.6}  {}\n", r.s1, r.s3, r.s5, r.tau, r.class)
}

fn run_ideal(layout: CircuitLayout, table1: bool, emit_states: Option<&Path>) -> Result<(), Failure> {
    let report = IdealProtocol::new(layout).run()?;
    if table1 {
        let mut out = format!("{:<6}{:<6}{:>10}{:>10}{:>10}{:>10}  class\n", "state", "pair", "S1", "S3", "S5", "tau");
        for (k, o) in report.outcomes.iter().enumerate() {
            let psi = PureState3::from_sparse(&o.state)?;
            out.push_str(&table_row(&format!("psi{}", k + 1), &pair_name(o.pair), &classify(&psi)));
        }
        return emit(None, &out);
    }
    if let Some(dir) = emit_states {
        fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
        let mut files: Vec<(String, SparseState)> =
            vec![("ghz".into(), PureState3::ghz().to_sparse()), ("w".into(), w_state())];
        for (k, o) in report.outcomes.iter().enumerate() {
            files.push((format!("psi{}", k + 1), o.state.clone()));
        }
        for (name, state) in files {
            let mut text = state.to_json()?;
            text.push('\n');
            write(&dir.join(format!("{name}.json")), &text)?;
        }
        return Ok(());
    }
    emit(None, &to_json(&report))
}

fn rows_csv(rows: &[OverlapRow]) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| fmt_g(x, 12));
    let mut out = String::from("delta,pair,p_gen,f_postselected,f_single_occupancy\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_g(r.delta, 12),
            r.pair,
            fmt_g(r.p_gen, 12),
            opt(r.f_postselected),
            opt(r.f_single_occupancy)
        );
    }
    out
}

fn sweep(layout: CircuitLayout, points: usize, min: f64, max: f64, json: bool, output: Option<&Path>) -> Result<(), Failure> {
    let grid = delta_grid(points, min, max)?;
    let rows = HistoryEngine::new(layout).overlap_curves(&grid)?;
    let text = if json { to_json(&rows) } else { rows_csv(&rows) };
    emit(output, &text)
}

fn classify_file(path: &Path) -> Result<(), Failure> {
    let state = SparseState::from_json(&read(path)?)?;
    let psi = PureState3::from_sparse(&state)?;
    emit(None, &to_json(&classify(&psi)))
}

fn print_audit(report: &AuditReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{status}  max_dev={:<12}  tol={:<8}  {}", fmt_g(c.max_dev, 4), fmt_g(c.tol, 4), c.name);
    }
    let note = &report.success_probability;
    let _ = writeln!(
        out,
        "NOTE  success probability: no-invasion retention {} and second-layer attainment {}; printed value {} is {}",
        fmt_g(note.retention_probability, 12),
        fmt_g(note.second_layer_probability, 12),
        fmt_g(note.printed_value, 12),
        if note.reproducible { "reproduced" } else { "not reproducible" }
    );
    out
}

fn oracle_check(layout: &CircuitLayout, tol: f64) -> Result<(), Failure> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::Validation(format!("tolerance {tol} must be non-negative")));
    }
    let report = run_audit(layout, tol)?;
    emit(None, &print_audit(&report))?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Validation("oracle cross-validation failed".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    let layout = load_layout(cli.layout.as_deref())?;
    match cli.command {
        Command::RunIdeal { table1, emit_states } => run_ideal(layout, table1, emit_states.as_deref()),
        Command::SweepDelta { points, min, max, json, output } => sweep(layout, points, min, max, json, output.as_deref()),
        Command::Classify { state } => classify_file(&state),
        Command::OracleCheck { tol } => oracle_check(&layout, tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
