//! Schmidt representations `T(x,y) = Σ τ_i ⟨x,x_i⟩⟨y,y_i⟩ z_i` built by
//! deflation.
//!
//! Each step takes the norm-attaining triple of the current remainder,
//! requires it to be an ordered singular value (otherwise the remainder need
//! not shrink along orthogonal directions), confirms it is also a singular
//! triple of the original operator, and subtracts the rank-one term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Mode, Result};
use crate::search::local_maxima;
use crate::spectra::{slice_report, OrderedReport, Residuals, SearchConfig, SingularTriple};
use crate::tensor::{Dims, Tensor3};
use crate::vecops;

/// Orthonormality tolerance for the three vector families.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtTerm {
    pub tau: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl SchmidtTerm {
    pub fn new(tau: f64, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Self {
        Self { tau, x, y, z }
    }
}

impl From<&SingularTriple> for SchmidtTerm {
    fn from(t: &SingularTriple) -> Self {
        Self::new(t.tau, t.x.clone(), t.y.clone(), t.z.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtRepresentation {
    pub dims: Dims,
    pub terms: Vec<SchmidtTerm>,
    /// `‖T − Σ τ_i x_i⊗y_i⊗z_i‖₂` against the operator it was built for.
    pub reconstruction_residual: f64,
    pub status: Status,
}

impl SchmidtRepresentation {
    /// Wraps explicit terms, measuring the reconstruction residual against `t`.
    pub fn from_terms(t: &Tensor3, terms: Vec<SchmidtTerm>) -> Result<Self> {
        let built = terms_tensor(t.dims(), &terms)?;
        Ok(Self {
            dims: t.dims(),
            reconstruction_residual: t.sub(&built)?.hs_norm(),
            terms,
            status: Status::Complete,
        })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.tau).collect()
    }

    /// `Σ τ_i x_i ⊗ y_i ⊗ z_i`.
    pub fn to_tensor(&self) -> Result<Tensor3> {
        terms_tensor(self.dims, &self.terms)
    }
}

fn terms_tensor(dims: Dims, terms: &[SchmidtTerm]) -> Result<Tensor3> {
    Tensor3::from_schmidt(
        dims,
        terms
            .iter()
            .map(|t| (t.tau, t.x.as_slice(), t.y.as_slice(), t.z.as_slice())),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    /// The norm-attaining triple of the remainder is not ordered.
    NotOrdered,
    /// The remainder is nonzero but no verified triple was found.
    NoTripleFound,
    /// The step's triple is ordered for the remainder but is not a singular
    /// triple of the original operator.
    NotTransferable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationStep {
    pub tau: f64,
    pub triple: SingularTriple,
    pub ordered: OrderedReport,
    /// Residuals of the triple against the original operator.
    pub transfer: Residuals,
    /// `‖T_{k+1}‖₂` after subtracting this step's term.
    pub remaining_hs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// Zero-based index of the offending step.
    pub step: usize,
    pub reason: FailureReason,
    /// The rejected triple, when one was found.
    pub triple: Option<SingularTriple>,
    pub ordered: Option<OrderedReport>,
    pub transfer: Option<Residuals>,
    pub remaining_hs: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationReport {
    pub steps: Vec<DeflationStep>,
    pub failure: Option<Failure>,
}

impl DeflationReport {
    /// Terms of the accepted steps, including those of a failed run.
    pub fn partial_terms(&self) -> Vec<SchmidtTerm> {
        self.steps.iter().map(|s| SchmidtTerm::from(&s.triple)).collect()
    }
}

/// Builds a Schmidt representation by repeated deflation.
///
/// Stops with [`Status::Complete`] once `‖T_k‖₂ ≤ residual_tol·(1+‖T‖₂)`.
/// Fails at the first step whose norm-attaining triple is not ordered, is
/// not a triple of `t`, or cannot be found; a failed representation has no
/// terms and the accepted steps stay in the report.
pub fn schmidt_decompose(t: &Tensor3, cfg: &SearchConfig) -> Result<(SchmidtRepresentation, DeflationReport)> {
    cfg.validate()?;
    let dims = t.dims();
    let hs = t.hs_norm();
    let tol = cfg.residual_tol * (1.0 + hs);

    let mut current = t.clone();
    let mut steps: Vec<DeflationStep> = Vec::new();
    let mut failure = None;

    loop {
        let remaining = current.hs_norm();
        if remaining <= tol {
            break;
        }
        let k = steps.len();
        if k >= dims.min() {
            failure = Some(Failure {
                step: k,
                reason: FailureReason::NoTripleFound,
                triple: None,
                ordered: None,
                transfer: None,
                remaining_hs: remaining,
                tolerance: tol,
            });
            break;
        }

        let maxima = local_maxima(&current, cfg)?;
        let Some(top) = maxima.first() else {
            failure = Some(Failure {
                step: k,
                reason: FailureReason::NoTripleFound,
                triple: None,
                ordered: None,
                transfer: None,
                remaining_hs: remaining,
                tolerance: tol,
            });
            break;
        };
        let top_tau = top.tau;

        // Among norm-attaining orbits, take the one closest to ordered; the
        // list is already in deterministic tie order.
        let (triple, ordered) = maxima
            .iter()
            .take_while(|m| m.tau >= top_tau - cfg.dedup_tol * (1.0 + top_tau))
            .map(|m| (m, slice_report(&current, m, tol)))
            .fold(None::<(&SingularTriple, OrderedReport)>, |best, (m, r)| match best {
                Some((_, b)) if b.max_residual() <= r.max_residual() => best,
                _ => Some((m, r)),
            })
            .expect("at least one maximiser");

        if !ordered.ordered {
            failure = Some(Failure {
                step: k,
                reason: FailureReason::NotOrdered,
                triple: Some(triple.clone()),
                ordered: Some(ordered),
                transfer: None,
                remaining_hs: remaining,
                tolerance: tol,
            });
            break;
        }

        let transfer = Residuals::compute(t, triple.tau, &triple.x, &triple.y, &triple.z);
        if transfer.max() > tol {
            failure = Some(Failure {
                step: k,
                reason: FailureReason::NotTransferable,
                triple: Some(triple.clone()),
                ordered: Some(ordered),
                transfer: Some(transfer),
                remaining_hs: remaining,
                tolerance: tol,
            });
            break;
        }

        current = current.deflate_term(triple.tau, &triple.x, &triple.y, &triple.z)?;
        steps.push(DeflationStep {
            tau: triple.tau,
            triple: triple.clone(),
            ordered,
            transfer,
            remaining_hs: current.hs_norm(),
        });
    }

    let report = DeflationReport { steps, failure };
    let rep = if report.failure.is_some() {
        SchmidtRepresentation {
            dims,
            terms: Vec::new(),
            reconstruction_residual: hs,
            status: Status::Failed,
        }
    } else {
        SchmidtRepresentation {
            dims,
            terms: report.partial_terms(),
            reconstruction_residual: current.hs_norm(),
            status: Status::Complete,
        }
    };
    Ok((rep, report))
}

/// Evaluates `Σ τ_i ⟨x,x_i⟩⟨y,y_i⟩ z_i`.
pub fn reconstruct(rep: &SchmidtRepresentation, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    rep.dims.check(Mode::H1, x)?;
    rep.dims.check(Mode::H2, y)?;
    let mut out = vec![0.0; rep.dims.n3];
    for term in &rep.terms {
        rep.dims.check(Mode::K, &term.z)?;
        let w = term.tau * vecops::dot(x, &term.x) * vecops::dot(y, &term.y);
        for (o, zk) in out.iter_mut().zip(&term.z) {
            *o += w * zk;
        }
    }
    Ok(out)
}

/// Largest deviation of the Gram matrix of `vs` from the identity.
pub fn gram_deviation<'a>(vs: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    let vs: Vec<&[f64]> = vs.into_iter().collect();
    let mut dev = 0.0f64;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((vecops::dot(a, b) - target).abs());
        }
    }
    dev
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub monotone: bool,
    /// Largest Gram deviation over the three families.
    pub orthonormal_deviation: f64,
    pub orthonormal: bool,
    pub residual: f64,
    pub residual_ok: bool,
    /// `max_i |⟨T(x_i,y_i),z_i⟩ − τ_i|`.
    pub form_gap: f64,
    pub forms_ok: bool,
}

impl RepresentationReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.orthonormal && self.residual_ok && self.forms_ok
    }
}

/// Checks a representation against `t`: monotone τ, orthonormal families,
/// `‖T − Σ τ_i x_i⊗y_i⊗z_i‖₂ ≤ tol`, and `⟨T(x_i,y_i),z_i⟩ = τ_i`.
pub fn verify_representation(t: &Tensor3, rep: &SchmidtRepresentation, tol: f64) -> Result<RepresentationReport> {
    if rep.dims != t.dims() {
        return Err(Error::invalid(format!(
            "representation dims {} do not match tensor dims {}",
            rep.dims,
            t.dims()
        )));
    }
    let monotone = rep.terms.windows(2).all(|w| w[0].tau >= w[1].tau) && rep.terms.iter().all(|t| t.tau > 0.0);
    let orthonormal_deviation = gram_deviation(rep.terms.iter().map(|t| t.x.as_slice()))
        .max(gram_deviation(rep.terms.iter().map(|t| t.y.as_slice())))
        .max(gram_deviation(rep.terms.iter().map(|t| t.z.as_slice())));
    let residual = t.sub(&rep.to_tensor()?)?.hs_norm();
    let form_gap = rep
        .terms
        .iter()
        .map(|term| (t.form(&term.x, &term.y, &term.z) - term.tau).abs())
        .fold(0.0, f64::max);
    Ok(RepresentationReport {
        monotone,
        orthonormal_deviation,
        orthonormal: orthonormal_deviation <= ORTHONORMAL_TOL,
        residual,
        residual_ok: residual <= tol,
        form_gap,
        forms_ok: form_gap <= tol,
    })
}

/// `Σ τ_i²`, which equals `‖T‖₂²` for a complete representation.
pub fn schmidt_sum_sq(rep: &SchmidtRepresentation) -> Result<f64> {
    if rep.status != Status::Complete {
        return Err(Error::invalid("sum of squares requested for a failed representation"));
    }
    Ok(rep.terms.iter().map(|t| t.tau * t.tau).sum())
}
