use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use psdcert::experiments::{self, GapSweepConfig, TraceConfig};
use nalgebra::DMatrix;
use psdcert::{
    project_approx_negative, project_approx_positive, project_auto, read_matrix_market, write_matrix_market,
    CertOptions, DPlusMode, Error, LanczosConfig, SymmetricOperator, Tolerances,
};

const EXIT_IO: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "psdcert", version, about = "Certified approximate projections onto the PSD cone")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Auto,
    Pos,
    Neg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DPlusArg {
    Auto,
    Oracle,
    Iterative,
    Assume,
}

impl From<DPlusArg> for DPlusMode {
    fn from(d: DPlusArg) -> Self {
        match d {
            DPlusArg::Auto => DPlusMode::Auto,
            DPlusArg::Oracle => DPlusMode::Oracle,
            DPlusArg::Iterative => DPlusMode::Iterative,
            DPlusArg::Assume => DPlusMode::Assume,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Project a Matrix Market matrix and write its factors and certificate.
    Project {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        side: SideArg,
        #[arg(long, default_value_t = 25)]
        wanted: usize,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit with status 4 if the certificate is not conservative.
        #[arg(long)]
        strict: bool,
        /// Also write the dense projection.
        #[arg(long)]
        dense: bool,
        #[arg(long, value_enum, default_value = "auto")]
        dplus: DPlusArg,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Error, certified bound and gap-dependent bound across spectral gaps.
    GapSweep {
        /// Comma-separated epsilons in (0, 1].
        #[arg(long, value_delimiter = ',', default_values_t = experiments::default_epsilons())]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 25)]
        wanted: usize,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error and bound after every Lanczos iteration.
    Trace {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 25)]
        wanted: usize,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "on")]
        filter: OnOff,
        /// Krylov basis size.
        #[arg(long)]
        max_basis: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the worked examples; exit 0 iff all pass.
    VerifyExamples,
}

/// An error together with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Project { input, side, wanted, tol, seed, strict, dense, dplus, out } => {
            cmd_project(&input, side, wanted, tol, seed, strict, dense, dplus.into(), &out)
        }
        Command::GapSweep { eps, n, wanted, tol, seed, out } => {
            let cfg = GapSweepConfig { epsilons: eps, n, wanted, tol, seed };
            experiments::gap_sweep(&cfg).map_err(Failure::from).and_then(|rows| emit_csv(out.as_deref(), &rows))
        }
        Command::Trace { n, eps, wanted, tol, seed, filter, max_basis, out } => {
            let cfg =
                TraceConfig { n, epsilon: eps, wanted, tol, seed, filter: filter == OnOff::On, max_basis_size: max_basis };
            experiments::convergence_trace(&cfg)
                .map_err(Failure::from)
                .and_then(|rows| emit_csv(out.as_deref(), &rows))
        }
        Command::VerifyExamples => cmd_verify_examples(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_project(
    input: &Path,
    side: SideArg,
    wanted: usize,
    tol: f64,
    seed: u64,
    strict: bool,
    dense: bool,
    dplus: DPlusMode,
    out: &Path,
) -> Result<u8, Failure> {
    let start = Instant::now();
    let a = read_matrix_market(input)?;
    let op = SymmetricOperator::dense_with_tolerance(a, &Tolerances::default())?;
    let cfg = LanczosConfig::new(wanted.max(1)).with_tol(tol).with_seed(seed);
    let opts = CertOptions::default().with_dplus(dplus);
    let proj = match side {
        SideArg::Auto => project_auto(&op, &cfg, &opts)?,
        SideArg::Pos => project_approx_positive(&op, &cfg, &opts)?,
        SideArg::Neg => project_approx_negative(&op, &cfg, &opts)?,
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix");
    let ritz = proj.ritz();
    write_matrix_market(out.join(format!("{stem}_basis.mtx")), ritz.basis())?;
    let values = DMatrix::from_column_slice(ritz.len(), 1, ritz.values().as_slice());
    write_matrix_market(out.join(format!("{stem}_values.mtx")), &values)?;
    if dense {
        write_matrix_market(out.join(format!("{stem}_projection.mtx")), &proj.to_dense())?;
    }
    let cert = proj.certificate();
    let record = cert.to_record(wall_time_ms);
    let line = serde_json::to_string(&record).expect("certificate records serialize");
    let cert_path = out.join(format!("{stem}_certificate.jsonl"));
    let mut f = OpenOptions::new().create(true).append(true).open(&cert_path).map_err(|e| io_failure(&cert_path, e))?;
    writeln!(f, "{line}").map_err(|e| io_failure(&cert_path, e))?;

    println!("side = {}", cert.side.as_str());
    println!("formula = {}", cert.formula.as_str());
    println!("bound = {:e}", cert.bound_value);
    if !cert.conservative {
        eprintln!("warning: eigensolver did not converge; the bound is an estimate");
        if strict {
            return Ok(EXIT_NOT_CONVERGED);
        }
    }
    Ok(0)
}

fn emit_csv<T: serde::Serialize>(out: Option<&Path>, rows: &[T]) -> Result<u8, Failure> {
    match out {
        Some(p) => {
            let f = fs::File::create(p).map_err(|e| io_failure(p, e))?;
            experiments::write_csv(io::BufWriter::new(f), rows)?;
        }
        None => experiments::write_csv(io::stdout().lock(), rows)?,
    }
    Ok(0)
}

fn cmd_verify_examples() -> Result<u8, Failure> {
    let checks = experiments::verify_examples()?;
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        println!(
            "{} {}: value {:.6e}, expected {:.6e} +/- {:.0e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.expected,
            c.tolerance
        );
    }
    Ok(if all { 0 } else { 1 })
}
