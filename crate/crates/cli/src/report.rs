//! Machine-readable report emitted by every subcommand.

use bilinear_core::schmidt::{DeflationReport, RepresentationReport, SchmidtRepresentation};
use bilinear_core::schur::{SchurReport, SchurRepresentation};
use bilinear_core::{OrderedReport, Residuals, SearchConfig, SingularTriple, Tensor3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Ok,
    Failed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: Option<String>,
    pub dims: [usize; 3],
    pub hs_norm: f64,
}

impl From<&Tensor3> for InputDigest {
    fn from(t: &Tensor3) -> Self {
        Self {
            name: t.name().map(str::to_owned),
            dims: t.dims().as_array(),
            hs_norm: t.hs_norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: Option<InputDigest>,
    pub config: SearchConfig,
    pub status: Status,
    pub message: Option<String>,
    pub result: Option<Payload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Payload {
    Norm(NormResult),
    Spectrum(SpectrumResult),
    Schmidt(SchmidtResult),
    Schur(SchurResult),
    Verify(VerifyResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub bilinear_norm: f64,
    pub hs_norm: f64,
    pub maximizer: Option<SingularTriple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub triple: SingularTriple,
    pub ordered: OrderedReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub complete: bool,
    pub entries: Vec<SpectrumEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtResult {
    pub representation: SchmidtRepresentation,
    pub verification: Option<RepresentationReport>,
    pub deflation: DeflationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurResult {
    pub symmetric: bool,
    pub self_adjoint: bool,
    pub representation: Option<SchurRepresentation>,
    pub verification: Option<SchurReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub tau: f64,
    pub verified: bool,
    pub residuals: Residuals,
    pub form_gap: f64,
    /// Present only for verified triples.
    pub ordered: Option<OrderedReport>,
    /// Largest tangent finite-difference derivative; verified triples only.
    pub stationarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub all_verified: bool,
    pub entries: Vec<VerifyEntry>,
}
