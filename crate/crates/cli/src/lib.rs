//! Command-line front end for `qphase`.
//!
//! Exit codes: 0 success (or a legal verdict), 1 error, 2 illegal input
//! (a failed `validate-*` verdict, an `ops --check` failure, or `evolve` on
//! rates that are not a Hamiltonian flow).

pub mod documents;
pub mod selftest;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use qphase::channels::{
    gamma_preservation_residual, p_from_map, p_from_unitary, validate_channel, KrausSet,
};
use qphase::dynamics::{
    evolve, odd_prime_condition_residual, rates_from_hamiltonian, ring_hamiltonian, validate_rates,
    EvolveOptions,
};
use qphase::operators::axiom_residuals;
use qphase::wigner::{density_from_wigner, wigner_from_density};
use qphase::{HamiltonianCoefficients, Qudit, DEFAULT_TOL};
use serde_json::{json, Value};

use documents::Document;
use svg::QuiverScene;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ILLEGAL: i32 = 2;

/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "QPHASE_TOL";

#[derive(Debug)]
pub enum CliError {
    Document(String),
    Io(String),
    Usage(String),
    Core(qphase::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Document(m) => write!(f, "malformed document: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qphase::Error> for CliError {
    fn from(e: qphase::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qphase",
    version,
    about = "Discrete Wigner functions, phase-space channels and Hamiltonian rate matrices for prime dimensions",
    after_help = "Exit codes: 0 success or legal verdict; 1 error (bad arguments, malformed \
documents, size mismatches); 2 illegal object (validate-p/validate-r verdict, failed ops --check, \
evolve on illegal rates without --allow-illegal).\n\nThe default tolerance is 1e-9; set QPHASE_TOL \
or pass --tol to change it."
)]
pub struct Cli {
    /// Numerical tolerance for checks and verdicts.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the phase-point operators, or check their defining properties.
    Ops {
        #[arg(long)]
        n: u32,
        /// Print property residuals instead of the operators.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density matrix to Wigner function, or back with --inverse.
    Wigner {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        inverse: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transition matrix of a Kraus set or unitary.
    #[command(group(ArgGroup::new("source").required(true).args(["kraus", "unitary"])))]
    ChannelP {
        #[arg(long)]
        kraus: Option<PathBuf>,
        #[arg(long)]
        unitary: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a transition matrix is a legal channel.
    ValidateP {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Decide whether a rate matrix comes from a Hamiltonian.
    ValidateR {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Rate matrix of a Hamiltonian document or of the ring Hamiltonian.
    Rates(RatesSource),
    /// Integrate dW/dt = r W.
    Evolve {
        #[arg(long)]
        w0: PathBuf,
        #[arg(long)]
        rates: PathBuf,
        /// Final time.
        #[arg(long)]
        t: f64,
        /// Number of steps; the trajectory has frames + 1 entries including t = 0.
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        allow_illegal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw rates out of the nonzero Wigner points as an SVG quiver plot.
    PlotRates {
        #[arg(long)]
        rates: PathBuf,
        #[arg(long)]
        wigner: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in regression checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct RatesSource {
    /// A hamiltonian_a or hamiltonian_d document.
    #[arg(long, conflicts_with = "ring", required_unless_present = "ring")]
    hamiltonian: Option<PathBuf>,
    /// The ring Hamiltonian 2 - (X + X^dagger).
    #[arg(long, requires = "n")]
    ring: bool,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = qphase::HBAR)]
    hbar: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CliError::Core(qphase::Error::IllegalRates { .. }) => EXIT_ILLEGAL,
                _ => EXIT_ERROR,
            }
        }
    }
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, CliError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}={s:?} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(tol)
}

fn qudit(n: qphase::Prime) -> Result<Qudit, CliError> {
    Ok(Qudit::new(n.get())?)
}

fn emit(doc: &Document, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => doc.save(p),
        None => out
            .write_all(doc.to_json_string().as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn print_json(v: &Value, out: &mut dyn Write) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).expect("verdicts serialize");
    writeln!(out, "{s}").map_err(|e| CliError::Io(e.to_string()))
}

fn wrong_kind(path: &Path, found: &str, expected: &str) -> CliError {
    CliError::Usage(format!(
        "{}: expected a {expected} document, found {found}",
        path.display()
    ))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let tol = resolve_tol(cli.tol)?;
    match cli.command {
        Command::Ops {
            n,
            check,
            out: path,
        } => {
            let q = Qudit::new(n)?;
            if check {
                let r = axiom_residuals(q.basis())?;
                let pass = r.max() <= tol;
                print_json(
                    &json!({
                        "n": n,
                        "tol": tol,
                        "hermiticity": r.hermiticity,
                        "unit_trace": r.unit_trace,
                        "orthogonality": r.orthogonality,
                        "line_projectors": r.line_projectors,
                        "mutual_unbiasedness": r.mutual_unbiasedness,
                        "striation_completeness": r.striation_completeness,
                        "completeness": r.completeness,
                        "max": r.max(),
                        "pass": pass,
                    }),
                    out,
                )?;
                return Ok(if pass { EXIT_OK } else { EXIT_ILLEGAL });
            }
            let doc = Document::PhasePointOperators {
                n: q.n(),
                operators: q.basis().phase_points().to_vec(),
            };
            emit(&doc, path.as_deref(), out)?;
            Ok(EXIT_OK)
        }

        Command::Wigner {
            input,
            inverse,
            out: path,
        } => {
            let doc = Document::load(&input)?;
            let result = if inverse {
                let Document::Wigner(w) = doc else {
                    return Err(wrong_kind(&input, doc.kind(), "wigner"));
                };
                let q = qudit(w.n())?;
                Document::Density {
                    n: w.n(),
                    matrix: density_from_wigner(q.basis(), &w)?,
                }
            } else {
                let Document::Density { n, matrix } = doc else {
                    return Err(wrong_kind(&input, doc.kind(), "density"));
                };
                let q = qudit(n)?;
                Document::Wigner(wigner_from_density(q.basis(), &matrix, tol)?)
            };
            emit(&result, path.as_deref(), out)?;
            Ok(EXIT_OK)
        }

        Command::ChannelP {
            kraus,
            unitary,
            out: path,
        } => {
            let p = if let Some(path) = &kraus {
                let doc = Document::load(path)?;
                let Document::KrausSet { n, operators } = doc else {
                    return Err(wrong_kind(path, doc.kind(), "kraus_set"));
                };
                let q = qudit(n)?;
                let k = KrausSet::new(n, operators, tol)?;
                p_from_map(q.basis(), &k)?
            } else {
                let path = unitary.as_ref().expect("clap enforces one source");
                let doc = Document::load(path)?;
                let Document::Unitary { n, matrix } = doc else {
                    return Err(wrong_kind(path, doc.kind(), "unitary"));
                };
                let q = qudit(n)?;
                p_from_unitary(q.basis(), &matrix, tol)?
            };
            emit(&Document::Transition(p), path.as_deref(), out)?;
            Ok(EXIT_OK)
        }

        Command::ValidateP { input } => {
            let doc = Document::load(&input)?;
            let Document::Transition(p) = doc else {
                return Err(wrong_kind(&input, doc.kind(), "transition"));
            };
            let q = qudit(p.n())?;
            let v = validate_channel(q.tables(), &p, tol)?;
            let gamma = gamma_preservation_residual(q.tables(), &p)?;
            print_json(
                &json!({
                    "n": p.n().get(),
                    "tol": tol,
                    "legal": v.legal,
                    "unitary": v.unitary,
                    "normalization_residual": v.normalization_residual,
                    "min_eigenvalue": v.min_eigenvalue,
                    "rank": v.rank,
                    "trace": [v.trace.re, v.trace.im],
                    "hermiticity_residual": v.hermiticity_residual,
                    "gamma_preservation_residual": gamma,
                }),
                out,
            )?;
            Ok(if v.legal { EXIT_OK } else { EXIT_ILLEGAL })
        }

        Command::ValidateR { input } => {
            let doc = Document::load(&input)?;
            let Document::Rates(r) = doc else {
                return Err(wrong_kind(&input, doc.kind(), "rates"));
            };
            let q = qudit(r.n())?;
            let v = validate_rates(q.tables(), &r, tol)?;
            let odd = if r.n().is_odd() {
                json!(odd_prime_condition_residual(&r)?)
            } else {
                Value::Null
            };
            print_json(
                &json!({
                    "n": r.n().get(),
                    "tol": tol,
                    "legal": v.legal,
                    "fixed_point_residual": v.fixed_point_residual,
                    "antisymmetry_residual": v.antisymmetry_residual,
                    "column_sum_residual": v.column_sum_residual,
                    "qubit_conditions": v.qubit_conditions,
                    "odd_prime_condition_residual": odd,
                }),
                out,
            )?;
            Ok(if v.legal { EXIT_OK } else { EXIT_ILLEGAL })
        }

        Command::Rates(src) => {
            let (q, h) = if src.ring {
                let n = src.n.expect("clap enforces --n with --ring");
                let q = Qudit::new(n)?;
                let h = ring_hamiltonian(q.basis())?;
                (q, h)
            } else {
                let path = src.hamiltonian.as_ref().expect("clap enforces one source");
                match Document::load(path)? {
                    Document::HamiltonianA(h) => (qudit(h.n())?, h),
                    Document::HamiltonianD { n, kappa } => {
                        let q = qudit(n)?;
                        let h = HamiltonianCoefficients::from_displacement_coefficients(
                            q.basis(),
                            kappa,
                            tol,
                        )?;
                        (q, h)
                    }
                    other => {
                        return Err(wrong_kind(
                            path,
                            other.kind(),
                            "hamiltonian_a or hamiltonian_d",
                        ))
                    }
                }
            };
            let r = rates_from_hamiltonian(q.tables(), &h, src.hbar)?;
            emit(&Document::Rates(r), src.out.as_deref(), out)?;
            Ok(EXIT_OK)
        }

        Command::Evolve {
            w0,
            rates,
            t,
            frames,
            allow_illegal,
            out: path,
        } => {
            let wdoc = Document::load(&w0)?;
            let Document::Wigner(w) = wdoc else {
                return Err(wrong_kind(&w0, wdoc.kind(), "wigner"));
            };
            let rdoc = Document::load(&rates)?;
            let Document::Rates(r) = rdoc else {
                return Err(wrong_kind(&rates, rdoc.kind(), "rates"));
            };
            let q = qudit(r.n())?;
            let traj = evolve(
                q.tables(),
                &w,
                &r,
                t,
                frames,
                EvolveOptions { allow_illegal, tol },
            )?;
            let doc = Document::Trajectory {
                n: r.n(),
                times: traj.times,
                frames: traj.frames,
            };
            emit(&doc, path.as_deref(), out)?;
            Ok(EXIT_OK)
        }

        Command::PlotRates {
            rates,
            wigner,
            out: path,
        } => {
            let rdoc = Document::load(&rates)?;
            let Document::Rates(r) = rdoc else {
                return Err(wrong_kind(&rates, rdoc.kind(), "rates"));
            };
            let wdoc = Document::load(&wigner)?;
            let Document::Wigner(w) = wdoc else {
                return Err(wrong_kind(&wigner, wdoc.kind(), "wigner"));
            };
            let scene = QuiverScene::new(&w, &r, tol)?;
            std::fs::write(&path, scene.to_svg())
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            print_json(
                &json!({
                    "out": path.display().to_string(),
                    "dots": scene.dots.len(),
                    "large_dots": scene.dots.iter().filter(|d| d.large).count(),
                    "arrows": scene.arrows.len(),
                }),
                out,
            )?;
            Ok(EXIT_OK)
        }

        Command::Selftest => {
            let checks = selftest::run_checks()?;
            let mut all = true;
            for c in &checks {
                all &= c.pass;
                let mark = if c.pass { "ok  " } else { "FAIL" };
                writeln!(out, "{mark} {:<52} {:.3e}", c.name, c.residual)
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            writeln!(
                out,
                "{} of {} checks passed",
                checks.iter().filter(|c| c.pass).count(),
                checks.len()
            )
            .map_err(|e| CliError::Io(e.to_string()))?;
            Ok(if all { EXIT_OK } else { EXIT_ERROR })
        }
    }
}
