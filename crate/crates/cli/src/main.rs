use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mpl_transient::bench::{emit_csv, emit_json, gen_matrices, run_bench, BenchReport, GenSpec};
use mpl_transient::graph::{analyze, SpectralData};
use mpl_transient::smt::{smtlib, Backend, BuiltinSolver, ExternalSolver};
use mpl_transient::transient::{
    synth_sp, synth_spq, trans_cone, trans_cone_smt_with, trans_smt_with, ConeOptions, Method, TransientResult,
};
use mpl_transient::{BoolFormula, MaxPlusMatrix, Rational};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] mpl_transient::Error),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: mpl_transient::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Power,
    SmtCone,
    SmtSet,
}

/// Transient and cyclicity analysis of max-plus linear systems.
#[derive(Debug, Parser)]
#[command(name = "mplt", version)]
struct Cli {
    /// Seed for instance generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest k0 + c searched before giving up.
    #[arg(long, global = true, default_value_t = 10_000)]
    bound: usize,
    /// Worker threads for `bench`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// SMT-LIB2 solver used instead of the built-in one (z3 gets `-in`).
    #[arg(long, global = true, value_name = "PATH")]
    external_solver: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate random irreducible matrices.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write one file per matrix into this directory instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Eigenvalue, eigenspace, cycle-time vector and periodicity class.
    Analyze { matrix: PathBuf },
    /// Transient and cyclicity on a cone or region of initial states.
    Transient {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Power)]
        method: MethodArg,
        /// Cone generators, one per column (default: identity).
        #[arg(long, value_name = "FILE")]
        cone: Option<PathBuf>,
        /// Region formula for `smt-set` (default: all states).
        #[arg(long, value_name = "FILE")]
        region: Option<PathBuf>,
    },
    /// Formula for the states with transient p (and cyclicity q).
    Synth {
        matrix: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: Option<usize>,
        /// Global cyclicity, required for reducible matrices.
        #[arg(long)]
        cyclicity: Option<usize>,
    },
    /// Compare matrix-power and solver-driven search on random instances.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Also write the per-instance CSV here.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Also write the JSON summary here.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })
}

fn load_matrix(path: &Path) -> CliResult<MaxPlusMatrix> {
    read(path)?.parse().map_err(|source| CliError::Input { path: path.to_owned(), source })
}

fn load_formula(path: &Path) -> CliResult<BoolFormula> {
    read(path)?.trim().parse().map_err(|source| CliError::Input { path: path.to_owned(), source })
}

fn rational(q: Rational) -> Value {
    Value::String(q.to_string())
}

fn no_csv(command: &str) -> CliError {
    CliError::Usage(format!("--format csv is only supported by `bench`, not `{command}`"))
}

fn backend(cli: &Cli) -> Box<dyn Backend> {
    match &cli.external_solver {
        Some(path) => Box::new(ExternalSolver::new(path)),
        None => Box::new(BuiltinSolver),
    }
}

fn gen(cli: &Cli, spec: GenSpec, out: Option<&Path>, w: &mut impl Write) -> CliResult {
    let matrices = gen_matrices(&spec)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        for (id, a) in matrices.iter().enumerate() {
            fs::write(dir.join(format!("matrix_{id:04}.txt")), a.to_string())?;
        }
        return Ok(());
    }
    match cli.format {
        Format::Json => {
            let texts: Vec<String> = matrices.iter().map(ToString::to_string).collect();
            writeln!(w, "{}", serde_json::to_string_pretty(&texts)?)?;
        }
        Format::Csv => return Err(no_csv("gen")),
        Format::Pretty => {
            for (id, a) in matrices.iter().enumerate() {
                if id > 0 {
                    writeln!(w)?;
                }
                write!(w, "{a}")?;
            }
        }
    }
    Ok(())
}

fn spectral_json(d: &SpectralData) -> Value {
    json!({
        "lambda": rational(d.lambda),
        "eigenbasis": d.eigenspace_basis.as_ref().map(ToString::to_string),
        "cycleTime": d.cycle_time.iter().copied().map(rational).collect::<Vec<_>>(),
        "class": d.class,
        "cyclicity": d.global_cyclicity,
    })
}

fn analyze_cmd(cli: &Cli, path: &Path, w: &mut impl Write) -> CliResult {
    let d = analyze(&load_matrix(path)?, cli.bound)?;
    match cli.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&spectral_json(&d))?)?,
        Format::Csv => return Err(no_csv("analyze")),
        Format::Pretty => {
            writeln!(w, "eigenvalue: {}", d.lambda)?;
            let chi: Vec<String> = d.cycle_time.iter().map(ToString::to_string).collect();
            writeln!(w, "cycle time: [{}]", chi.join(", "))?;
            match &d.class {
                Some(class) => writeln!(w, "class: {}", serde_json::to_value(class)?.as_str().unwrap_or_default())?,
                None => writeln!(w, "class: undecided within bound {}", cli.bound)?,
            }
            match d.global_cyclicity {
                Some(c) => writeln!(w, "graph cyclicity: {c}")?,
                None => writeln!(w, "graph cyclicity: unknown (reducible)")?,
            }
            match &d.eigenspace_basis {
                Some(basis) => write!(w, "eigenspace basis:\n{basis}")?,
                None => writeln!(w, "eigenspace: empty")?,
            }
        }
    }
    Ok(())
}

fn transient_json(r: &TransientResult, millis: f64) -> Value {
    json!({
        "k0": r.k0,
        "c": r.c,
        "status": r.status.to_string(),
        "method": r.method,
        "refinements": r.refinements,
        "millis": millis,
    })
}

fn transient_cmd(
    cli: &Cli,
    path: &Path,
    method: MethodArg,
    cone: Option<&Path>,
    region: Option<&Path>,
    w: &mut impl Write,
) -> CliResult {
    let a = load_matrix(path)?;
    let n = a.require_square()?;
    let v = match cone {
        Some(p) => load_matrix(p)?,
        None => MaxPlusMatrix::identity(n)?,
    };
    if region.is_some() && method != MethodArg::SmtSet {
        return Err(CliError::Usage("--region requires --method smt-set".into()));
    }
    if cone.is_some() && method == MethodArg::SmtSet {
        return Err(CliError::Usage("--cone is not used by --method smt-set".into()));
    }
    let solver = backend(cli);
    let opts = ConeOptions::default();
    let start = Instant::now();
    let r = match method {
        MethodArg::Power => trans_cone(&a, &v, cli.bound, opts)?,
        MethodArg::SmtCone => trans_cone_smt_with(&a, &v, cli.bound, solver.as_ref(), opts)?,
        MethodArg::SmtSet => {
            let f = match region {
                Some(p) => load_formula(p)?,
                None => BoolFormula::True,
            };
            trans_smt_with(&a, &f, cli.bound, solver.as_ref(), opts)?
        }
    };
    let millis = start.elapsed().as_secs_f64() * 1000.0;
    match cli.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&transient_json(&r, millis))?)?,
        Format::Csv => return Err(no_csv("transient")),
        Format::Pretty => {
            let name = match r.method {
                Method::MatrixPower => "matrix power",
                Method::SmtCone => "solver on cone",
                Method::SmtSet => "solver on region",
            };
            writeln!(w, "status: {}", r.status)?;
            if r.is_found() {
                writeln!(w, "transient: {}\ncyclicity: {}", r.k0, r.c)?;
            }
            writeln!(w, "method: {name}")?;
            if !r.refinements.is_empty() {
                let steps: Vec<String> = r.refinements.iter().map(|(k, c)| format!("({k}, {c})")).collect();
                writeln!(w, "guesses: {}", steps.join(" "))?;
            }
            writeln!(w, "time: {millis:.3} ms")?;
        }
    }
    Ok(())
}

fn synth_cmd(
    cli: &Cli,
    path: &Path,
    p: usize,
    q: Option<usize>,
    cyclicity: Option<usize>,
    w: &mut impl Write,
) -> CliResult {
    let a = load_matrix(path)?;
    let n = a.require_square()?;
    let f = match q {
        Some(q) => synth_spq(&a, p, q, cyclicity)?,
        None => synth_sp(&a, p, cyclicity)?,
    };
    let script = smtlib::to_smtlib_in(&f, n);
    let empty = !backend(cli).solve(&f.nnf(), n)?.is_sat();
    match cli.format {
        Format::Json => {
            let out = json!({ "p": p, "q": q, "formula": f.to_string(), "smtlib": script, "empty": empty });
            writeln!(w, "{}", serde_json::to_string_pretty(&out)?)?;
        }
        Format::Csv => return Err(no_csv("synth")),
        Format::Pretty => {
            writeln!(w, "formula: {f}")?;
            writeln!(w, "empty: {empty}")?;
            write!(w, "{script}")?;
        }
    }
    Ok(())
}

fn bench_cmd(cli: &Cli, spec: GenSpec, csv: Option<&Path>, json_path: Option<&Path>, w: &mut impl Write) -> CliResult {
    if cli.external_solver.is_some() {
        return Err(CliError::Usage("bench always times the built-in solver".into()));
    }
    let report: BenchReport = run_bench(&spec, cli.bound, cli.jobs)?;
    if let Some(p) = csv {
        emit_csv(&report.records, fs::File::create(p)?)?;
    }
    if let Some(p) = json_path {
        emit_json(&report.summary, fs::File::create(p)?)?;
    }
    match cli.format {
        Format::Json => emit_json(&report.summary, &mut *w)?,
        Format::Csv => emit_csv(&report.records, &mut *w)?,
        Format::Pretty => {
            let s = &report.summary;
            writeln!(w, "instances: {}", s.instances)?;
            writeln!(w, "{:>9} {:>6} {:>14} {:>14}", "k0+c", "count", "power (us)", "solver (us)")?;
            for b in &s.series {
                writeln!(w, "{:>9} {:>6} {:>14.1} {:>14.1}", b.k0_plus_c, b.count, b.mean_power_us, b.mean_smt_us)?;
            }
            let show = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
            writeln!(w, "cross-over: {}", show(s.cross_over))?;
            writeln!(w, "largest k0+c: {}", show(s.n_star))?;
        }
    }
    Ok(())
}

fn run(cli: &Cli, w: &mut impl Write) -> CliResult {
    match &cli.command {
        Command::Gen { n, m, count, out } => {
            let spec = GenSpec { n: *n, m: *m, count: *count, seed: cli.seed };
            gen(cli, spec, out.as_deref(), w)
        }
        Command::Analyze { matrix } => analyze_cmd(cli, matrix, w),
        Command::Transient { matrix, method, cone, region } => {
            transient_cmd(cli, matrix, *method, cone.as_deref(), region.as_deref(), w)
        }
        Command::Synth { matrix, p, q, cyclicity } => synth_cmd(cli, matrix, *p, *q, *cyclicity, w),
        Command::Bench { n, m, count, csv, json } => {
            let spec = GenSpec { n: *n, m: *m, count: *count, seed: cli.seed };
            bench_cmd(cli, spec, csv.as_deref(), json.as_deref(), w)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
