//! Command-line front end: argument parsing, command execution and report
//! rendering. The `bilinear` binary is a thin wrapper around [`execute`].

pub mod human;
pub mod json;
pub mod report;

use std::path::{Path, PathBuf};

use bilinear_core::io::{read_tensor, read_triples};
use bilinear_core::oracle::stationarity_fd_check;
use bilinear_core::schmidt::{schmidt_decompose, verify_representation, Status as SchmidtStatus};
use bilinear_core::schur::{is_self_adjoint, is_symmetric, schur_from_schmidt, verify_schur};
use bilinear_core::{
    enumerate_triples, is_ordered, operator_norm, verify_triple, Error, SearchConfig, SingularTriple, Tensor3,
};
use clap::{Args, Parser, Subcommand};

use report::{
    InputDigest, NormResult, Payload, Report, SchmidtResult, SchurResult, SpectrumEntry, SpectrumResult, Status,
    VerifyEntry, VerifyResult,
};

pub const EXIT_OK: i32 = 0;
/// `verify` found at least one triple that does not verify.
pub const EXIT_NOT_VERIFIED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SCHMIDT_FAILED: i32 = 3;
pub const EXIT_SCHUR_PRECONDITION: i32 = 4;

/// Finite-difference step for the stationarity check in `verify`.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "bilinear",
    version,
    about = "Singular triples, Schmidt and Schur representations of bilinear operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bilinear (operator) norm and Hilbert–Schmidt norm.
    Norm(Common),
    /// All singular triples found by multi-start search, with ordered flags.
    Spectrum(Common),
    /// Schmidt representation by deflation.
    Schmidt(Common),
    /// Schur representation of a symmetric self-adjoint operator.
    Schur(Common),
    /// Checks user-supplied triples.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Triples JSON file.
        triples: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Tensor JSON file.
    pub file: PathBuf,
    /// Random starts (default 64·max dim).
    #[arg(long)]
    pub starts: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Orbit distance for merging triples.
    #[arg(long = "dedup-tol")]
    pub dedup_tol: Option<f64>,
    /// Iteration cap for local searches.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
}

impl Common {
    pub fn config(&self) -> SearchConfig {
        let d = SearchConfig::default();
        SearchConfig {
            starts: self.starts.or(d.starts),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            iter_tol: d.iter_tol,
            residual_tol: self.tol.unwrap_or(d.residual_tol),
            dedup_tol: self.dedup_tol.unwrap_or(d.dedup_tol),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm(_) => "norm",
            Command::Spectrum(_) => "spectrum",
            Command::Schmidt(_) => "schmidt",
            Command::Schur(_) => "schur",
            Command::Verify { .. } => "verify",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Norm(c) | Command::Spectrum(c) | Command::Schmidt(c) | Command::Schur(c) => c,
            Command::Verify { common, .. } => common,
        }
    }
}

/// A finished command: the report and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

struct Run<'a> {
    name: &'a str,
    t: &'a Tensor3,
    cfg: SearchConfig,
}

impl Run<'_> {
    fn report(&self, status: Status, message: Option<String>, result: Option<Payload>) -> Report {
        Report {
            command: self.name.to_owned(),
            input: Some(InputDigest::from(self.t)),
            config: self.cfg.clone(),
            status,
            message,
            result,
        }
    }

    /// Absolute tolerance used for representation checks.
    fn scaled_tol(&self) -> f64 {
        self.cfg.residual_tol * (1.0 + self.t.hs_norm())
    }
}

fn error_report(name: &str, cfg: SearchConfig, input: Option<InputDigest>, e: &Error) -> Report {
    Report {
        command: name.to_owned(),
        input,
        config: cfg,
        status: Status::Error,
        message: Some(e.to_string()),
        result: None,
    }
}

/// Runs a parsed command. Input problems yield an `Error` report with exit
/// code [`EXIT_INPUT`].
pub fn execute(cmd: &Command) -> Outcome {
    let common = cmd.common();
    let cfg = common.config();
    let name = cmd.name();
    let input_error = |input: Option<InputDigest>, e: Error| Outcome {
        report: error_report(name, cfg.clone(), input, &e),
        exit_code: EXIT_INPUT,
    };
    if let Err(e) = cfg.validate() {
        return input_error(None, e);
    }
    let t = match read_tensor(&common.file) {
        Ok(t) => t,
        Err(e) => return input_error(None, e),
    };
    let run = Run {
        name,
        t: &t,
        cfg: cfg.clone(),
    };
    let result = match cmd {
        Command::Norm(_) => cmd_norm(&run),
        Command::Spectrum(_) => cmd_spectrum(&run),
        Command::Schmidt(_) => cmd_schmidt(&run),
        Command::Schur(_) => cmd_schur(&run),
        Command::Verify { triples, .. } => cmd_verify(&run, triples),
    };
    result.unwrap_or_else(|e| input_error(Some(InputDigest::from(&t)), e))
}

fn cmd_norm(run: &Run) -> Result<Outcome, Error> {
    let (norm, maximizer) = operator_norm(run.t, &run.cfg)?;
    let payload = NormResult {
        bilinear_norm: norm,
        hs_norm: run.t.hs_norm(),
        maximizer,
    };
    Ok(Outcome {
        report: run.report(Status::Ok, None, Some(Payload::Norm(payload))),
        exit_code: EXIT_OK,
    })
}

fn cmd_spectrum(run: &Run) -> Result<Outcome, Error> {
    let spectrum = enumerate_triples(run.t, &run.cfg)?;
    let entries = spectrum
        .triples
        .iter()
        .map(|tr| {
            Ok(SpectrumEntry {
                ordered: is_ordered(run.t, tr, run.scaled_tol())?,
                triple: tr.clone(),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let payload = SpectrumResult {
        complete: spectrum.complete,
        entries,
    };
    Ok(Outcome {
        report: run.report(Status::Ok, None, Some(Payload::Spectrum(payload))),
        exit_code: EXIT_OK,
    })
}

fn cmd_schmidt(run: &Run) -> Result<Outcome, Error> {
    let (rep, deflation) = schmidt_decompose(run.t, &run.cfg)?;
    let (status, message, exit_code, verification) = match rep.status {
        SchmidtStatus::Complete => {
            let v = verify_representation(run.t, &rep, run.scaled_tol())?;
            (Status::Ok, None, EXIT_OK, Some(v))
        }
        SchmidtStatus::Failed => {
            let msg = deflation
                .failure
                .as_ref()
                .map(|f| format!("deflation failed at step {}: {:?}", f.step + 1, f.reason));
            (Status::Failed, msg, EXIT_SCHMIDT_FAILED, None)
        }
    };
    let payload = SchmidtResult {
        representation: rep,
        verification,
        deflation,
    };
    Ok(Outcome {
        report: run.report(status, message, Some(Payload::Schmidt(payload))),
        exit_code,
    })
}

fn cmd_schur(run: &Run) -> Result<Outcome, Error> {
    let tol = run.scaled_tol();
    let precondition = |symmetric: bool, self_adjoint: bool, msg: String| Outcome {
        report: run.report(
            Status::Failed,
            Some(msg),
            Some(Payload::Schur(SchurResult {
                symmetric,
                self_adjoint,
                representation: None,
                verification: None,
            })),
        ),
        exit_code: EXIT_SCHUR_PRECONDITION,
    };
    let dims = run.t.dims();
    if dims.n1 != dims.n2 || dims.n2 != dims.n3 {
        return Ok(precondition(
            false,
            false,
            format!("operator on a single space needs equal dims, got {dims}"),
        ));
    }
    let symmetric = is_symmetric(run.t, tol)?;
    let self_adjoint = is_self_adjoint(run.t, tol)?;
    if !symmetric || !self_adjoint {
        return Ok(precondition(
            symmetric,
            self_adjoint,
            "operator is not symmetric and self-adjoint".into(),
        ));
    }
    let (rep, deflation) = schmidt_decompose(run.t, &run.cfg)?;
    if rep.status == SchmidtStatus::Failed {
        let msg = deflation.failure.as_ref().map_or_else(
            || "Schmidt deflation failed".to_owned(),
            |f| format!("Schmidt deflation failed at step {}: {:?}", f.step + 1, f.reason),
        );
        return Ok(Outcome {
            report: run.report(
                Status::Failed,
                Some(msg),
                Some(Payload::Schur(SchurResult {
                    symmetric,
                    self_adjoint,
                    representation: None,
                    verification: None,
                })),
            ),
            exit_code: EXIT_SCHMIDT_FAILED,
        });
    }
    let schur = match schur_from_schmidt(run.t, &rep, tol) {
        Ok(s) => s,
        Err(e @ (Error::Inconsistent(_) | Error::InvalidArgument(_))) => {
            return Ok(precondition(symmetric, self_adjoint, e.to_string()));
        }
        Err(e) => return Err(e),
    };
    let verification = verify_schur(run.t, &schur, tol)?;
    let status = if verification.passed() {
        Status::Ok
    } else {
        Status::Failed
    };
    Ok(Outcome {
        report: run.report(
            status,
            None,
            Some(Payload::Schur(SchurResult {
                symmetric,
                self_adjoint,
                representation: Some(schur),
                verification: Some(verification),
            })),
        ),
        exit_code: EXIT_OK,
    })
}

fn cmd_verify(run: &Run, triples: &Path) -> Result<Outcome, Error> {
    let file = read_triples(triples)?;
    let tol = run.scaled_tol();
    let mut entries = Vec::with_capacity(file.triples.len());
    for entry in file.triples {
        let triple = SingularTriple::new(run.t, entry.tau, entry.x, entry.y, entry.z)?;
        let check = verify_triple(run.t, &triple, tol)?;
        let (ordered, stationarity) = if check.verified {
            (
                Some(is_ordered(run.t, &triple, tol)?),
                stationarity_fd_check(run.t, &triple, FD_STEP).ok(),
            )
        } else {
            (None, None)
        };
        entries.push(VerifyEntry {
            tau: triple.tau,
            verified: check.verified,
            residuals: check.residuals,
            form_gap: check.form_gap,
            ordered,
            stationarity,
        });
    }
    let all_verified = entries.iter().all(|e| e.verified);
    let (status, exit_code) = if all_verified {
        (Status::Ok, EXIT_OK)
    } else {
        (Status::Failed, EXIT_NOT_VERIFIED)
    };
    Ok(Outcome {
        report: run.report(
            status,
            None,
            Some(Payload::Verify(VerifyResult { all_verified, entries })),
        ),
        exit_code,
    })
}
