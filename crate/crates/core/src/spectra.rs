//! Singular triples of bilinear operators.
//!
//! A positive `τ` with unit vectors `(x, y, z)` is a singular triple of `T` when
//!
//! ```text
//! T(x, y)        = τ z
//! φ*_{H1}(y)(z)  = τ x
//! φ*_{H2}(x)(z)  = τ y
//! ```
//!
//! This module holds the data types, verification, the sign-orbit canonical
//! form, and the ordered-singular-value test. The searches that produce triples
//! live in [`crate::search`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Mode, Result};
use crate::tensor::{Dims, Tensor3};
use crate::vecops;

/// Vectors handed to [`verify_triple`] must be unit length to this tolerance.
pub const UNIT_TOL: f64 = 1e-8;

/// Norms of the three defining equations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖T(x,y) − τz‖`
    pub r1: f64,
    /// `‖φ*_{H1}(y)(z) − τx‖`
    pub r2: f64,
    /// `‖φ*_{H2}(x)(z) − τy‖`
    pub r3: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }

    /// Evaluates the residuals without checking dimensions or norms.
    pub(crate) fn compute(t: &Tensor3, tau: f64, x: &[f64], y: &[f64], z: &[f64]) -> Self {
        let r1 = vecops::dist(&t.apply_unchecked(x, y), &scaled(tau, z));
        let r2 = vecops::dist(&t.contract_yz(y, z), &scaled(tau, x));
        let r3 = vecops::dist(&t.contract_xz(x, z), &scaled(tau, y));
        Self { r1, r2, r3 }
    }
}

fn scaled(s: f64, v: &[f64]) -> Vec<f64> {
    v.iter().map(|a| s * a).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularTriple {
    pub tau: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub residuals: Residuals,
}

impl SingularTriple {
    /// Builds a triple and evaluates its residuals against `t`.
    pub fn new(t: &Tensor3, tau: f64, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        let dims = t.dims();
        dims.check(Mode::H1, &x)?;
        dims.check(Mode::H2, &y)?;
        dims.check(Mode::K, &z)?;
        let residuals = Residuals::compute(t, tau, &x, &y, &z);
        Ok(Self {
            tau,
            x,
            y,
            z,
            residuals,
        })
    }

    /// Builds the triple for unit `x`, `y`, `z`, taking `τ = ⟨T(x,y), z⟩`.
    pub(crate) fn from_vectors(t: &Tensor3, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Self {
        let tau = t.form(&x, &y, &z);
        let residuals = Residuals::compute(t, tau, &x, &y, &z);
        Self {
            tau,
            x,
            y,
            z,
            residuals,
        }
    }

    pub fn is_verified(&self, tol: f64) -> bool {
        self.tau > 0.0 && self.residuals.max() <= tol
    }

    /// The four members of the sign orbit, starting with `self`.
    pub fn sign_orbit(&self) -> [SingularTriple; 4] {
        let flip = |fx: bool, fy: bool, fz: bool| SingularTriple {
            tau: self.tau,
            x: if fx { vecops::neg(&self.x) } else { self.x.clone() },
            y: if fy { vecops::neg(&self.y) } else { self.y.clone() },
            z: if fz { vecops::neg(&self.z) } else { self.z.clone() },
            residuals: self.residuals,
        };
        [
            flip(false, false, false),
            flip(true, true, false),
            flip(true, false, true),
            flip(false, true, true),
        ]
    }

    pub(crate) fn dims(&self) -> Dims {
        Dims::new(self.x.len(), self.y.len(), self.z.len())
    }
}

/// Distance between two triples modulo the sign orbit: the minimum over the
/// four sign variants of `b` of `max(‖x−x'‖, ‖y−y'‖, ‖z−z'‖)`.
pub fn orbit_distance(a: &SingularTriple, b: &SingularTriple) -> f64 {
    if a.dims() != b.dims() {
        return f64::INFINITY;
    }
    b.sign_orbit()
        .iter()
        .map(|v| {
            vecops::dist(&a.x, &v.x)
                .max(vecops::dist(&a.y, &v.y))
                .max(vecops::dist(&a.z, &v.z))
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub residuals: Residuals,
    /// `|τ − ⟨T(x,y), z⟩|`
    pub form_gap: f64,
    pub verified: bool,
}

/// Checks the three defining equations for `triple` against `t`.
pub fn verify_triple(t: &Tensor3, triple: &SingularTriple, tol: f64) -> Result<TripleReport> {
    let dims = t.dims();
    dims.check(Mode::H1, &triple.x)?;
    dims.check(Mode::H2, &triple.y)?;
    dims.check(Mode::K, &triple.z)?;
    for (mode, v) in [(Mode::H1, &triple.x), (Mode::H2, &triple.y), (Mode::K, &triple.z)] {
        let n = vecops::norm(v);
        if (n - 1.0).abs() > UNIT_TOL || n.is_nan() {
            return Err(Error::invalid(format!("{mode} vector is not unit length (norm {n})")));
        }
    }
    let residuals = Residuals::compute(t, triple.tau, &triple.x, &triple.y, &triple.z);
    let form_gap = (triple.tau - t.form(&triple.x, &triple.y, &triple.z)).abs();
    Ok(TripleReport {
        residuals,
        form_gap,
        verified: triple.tau > 0.0 && residuals.max() <= tol,
    })
}

/// Picks the sign-orbit representative whose `x` and `y` have their
/// largest-magnitude entries positive. `z` follows from the sign rule.
pub fn canonicalize(triple: &SingularTriple) -> Result<SingularTriple> {
    let ix = vecops::argmax_abs(&triple.x).filter(|&i| triple.x[i] != 0.0);
    let iy = vecops::argmax_abs(&triple.y).filter(|&i| triple.y[i] != 0.0);
    let (Some(ix), Some(iy)) = (ix, iy) else {
        return Err(Error::invalid("cannot canonicalize a triple with a zero vector"));
    };
    if vecops::norm(&triple.z) == 0.0 {
        return Err(Error::invalid("cannot canonicalize a triple with a zero vector"));
    }
    let fx = triple.x[ix] < 0.0;
    let fy = triple.y[iy] < 0.0;
    let mut out = triple.clone();
    if fx {
        out.x = vecops::neg(&out.x);
    }
    if fy {
        out.y = vecops::neg(&out.y);
    }
    if fx != fy {
        out.z = vecops::neg(&out.z);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderedReport {
    pub ordered: bool,
    /// Frobenius residuals of the three slice identities
    /// `T(·,y) = τ z⊗x`, `T(x,·) = τ z⊗y`, `φ*_{H1}(·)(z) = τ x⊗y`.
    pub slice_residuals: [f64; 3],
    /// Residual of `x ↦ φ*_{H2}(x)(z) = τ y⊗x`. Diagnostic only.
    pub adjoint_h2_residual: f64,
}

impl OrderedReport {
    pub fn max_residual(&self) -> f64 {
        self.slice_residuals.iter().fold(0.0, |m, v| m.max(*v))
    }
}

/// Tests whether a verified triple makes the three frozen-argument slices of
/// `t` exactly rank one.
pub fn is_ordered(t: &Tensor3, triple: &SingularTriple, tol: f64) -> Result<OrderedReport> {
    let report = verify_triple(t, triple, tol)?;
    if !report.verified {
        return Err(Error::invalid(format!(
            "triple with tau {} is not a verified singular triple (max residual {:.3e})",
            triple.tau,
            report.residuals.max()
        )));
    }
    Ok(slice_report(t, triple, tol))
}

/// Slice residuals without the verification precondition.
pub(crate) fn slice_report(t: &Tensor3, triple: &SingularTriple, tol: f64) -> OrderedReport {
    use nalgebra::DVector;
    let tau = triple.tau;
    let x = DVector::from_column_slice(&triple.x);
    let y = DVector::from_column_slice(&triple.y);
    let z = DVector::from_column_slice(&triple.z);

    let a = (t.slice_fixed_y(&triple.y) - &z * x.transpose() * tau).norm();
    let b = (t.slice_fixed_x(&triple.x) - &z * y.transpose() * tau).norm();
    let mz = t.slice_fixed_z(&triple.z);
    let c = (&mz - &x * y.transpose() * tau).norm();
    let d = (mz.transpose() - &y * x.transpose() * tau).norm();
    let slice_residuals = [a, b, c];
    OrderedReport {
        ordered: slice_residuals.iter().all(|r| *r <= tol),
        slice_residuals,
        adjoint_h2_residual: d,
    }
}

/// Parameters for every iterative search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Number of random starts; `None` means `64 · max(n1, n2, n3)`.
    pub starts: Option<usize>,
    pub max_iter: usize,
    /// Relative change of the objective that stops power iteration.
    pub iter_tol: f64,
    /// Maximum residual for a triple to count as verified.
    pub residual_tol: f64,
    /// Orbit distance under which two triples are merged.
    pub dedup_tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            starts: None,
            max_iter: 10_000,
            iter_tol: 1e-14,
            residual_tol: 1e-9,
            dedup_tol: 1e-6,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn starts_for(&self, dims: Dims) -> usize {
        self.starts.unwrap_or(64 * dims.max())
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts == Some(0) {
            return Err(Error::invalid("starts must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        for (name, v) in [
            ("iter_tol", self.iter_tol),
            ("residual_tol", self.residual_tol),
            ("dedup_tol", self.dedup_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Deduplicated singular triples, sorted by τ descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub triples: Vec<SingularTriple>,
    /// Set only when an exhaustive cross-check has confirmed the list.
    pub complete: bool,
}

impl Spectrum {
    pub fn taus(&self) -> Vec<f64> {
        self.triples.iter().map(|t| t.tau).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }
}

/// Merges canonical triples in input order, then sorts by τ descending.
///
/// Triples whose τ values are within `dedup_tol·(1+τ)` form a tie group and are
/// ordered lexicographically by `x`, then `y`.
pub(crate) fn dedup_and_sort(candidates: Vec<SingularTriple>, dedup_tol: f64) -> Vec<SingularTriple> {
    let mut kept: Vec<SingularTriple> = Vec::new();
    for c in candidates {
        let dup = kept.iter().any(|k| {
            (k.tau - c.tau).abs() <= dedup_tol * (1.0 + k.tau.max(c.tau)) && orbit_distance(k, &c) <= dedup_tol
        });
        if !dup {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| b.tau.total_cmp(&a.tau));

    let mut out = Vec::with_capacity(kept.len());
    let mut group: Vec<SingularTriple> = Vec::new();
    for t in kept {
        if let Some(first) = group.first() {
            if (first.tau - t.tau).abs() > dedup_tol * (1.0 + first.tau) {
                flush_group(&mut group, &mut out);
            }
        }
        group.push(t);
    }
    flush_group(&mut group, &mut out);
    out
}

fn flush_group(group: &mut Vec<SingularTriple>, out: &mut Vec<SingularTriple>) {
    group.sort_by(|a, b| vecops::lex_cmp(&a.x, &b.x).then_with(|| vecops::lex_cmp(&a.y, &b.y)));
    out.append(group);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn triple(t: &Tensor3, tau: f64, x: &[f64], y: &[f64], z: &[f64]) -> SingularTriple {
        SingularTriple::new(t, tau, x.to_vec(), y.to_vec(), z.to_vec()).unwrap()
    }

    #[test]
    fn verify_examples() {
        let t1 = fixtures::example_diagonal();
        let good = triple(&t1, 2.0, &[1.0, 0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        let r = verify_triple(&t1, &good, 1e-12).unwrap();
        assert!(r.verified);
        assert_eq!(r.residuals.max(), 0.0);

        let bad = triple(&t1, 2.5, &[1.0, 0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        let r = verify_triple(&t1, &bad, 1e-9).unwrap();
        assert!(!r.verified);
        assert!((r.residuals.r1 - 0.5).abs() < 1e-15);

        // The τ=2 triple of the diagonal example against the coupled example:
        // T(e1,f1) = (1,1,1,0) so r1 = ‖(1,1,1,0) − 2 e1‖ = √3.
        let t2 = fixtures::example_coupled();
        let r = verify_triple(&t2, &good, 1e-9).unwrap();
        assert!(!r.verified);
        assert!((r.residuals.r1 - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn verify_rejects_non_unit_and_wrong_dims() {
        let t1 = fixtures::example_diagonal();
        let long = triple(&t1, 2.0, &[1.1, 0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            verify_triple(&t1, &long, 1e-9),
            Err(Error::InvalidArgument(_))
        ));
        let t2 = fixtures::example_ordered();
        assert!(matches!(
            verify_triple(&t2, &long, 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_tau_never_verifies() {
        let t = Tensor3::zeros(Dims::new(2, 2, 2)).unwrap();
        let z = triple(&t, 0.0, &[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]);
        assert!(!verify_triple(&t, &z, 1e-9).unwrap().verified);
    }

    #[test]
    fn canonicalize_examples() {
        let t1 = fixtures::example_diagonal();
        let a = triple(&t1, 2.0, &[-1.0, 0.0, 0.0], &[-1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        let c = canonicalize(&a).unwrap();
        assert_eq!(
            (c.x.as_slice(), c.y.as_slice()),
            (&[1.0, 0.0, 0.0][..], &[1.0, 0.0][..])
        );
        assert_eq!(c.z, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(canonicalize(&c).unwrap(), c);

        let b = triple(&t1, 3.0, &[0.0, 1.0, 0.0], &[0.0, -1.0], &[0.0, -1.0, 0.0, 0.0]);
        let c = canonicalize(&b).unwrap();
        assert_eq!(c.x, vec![0.0, 1.0, 0.0]);
        assert_eq!(c.y, vec![0.0, 1.0]);
        assert_eq!(c.z, vec![0.0, 1.0, 0.0, 0.0]);

        let zero = triple(&t1, 1.0, &[0.0, 0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        assert!(canonicalize(&zero).is_err());
    }

    #[test]
    fn ordered_examples() {
        let t1 = fixtures::example_diagonal();
        let two = triple(&t1, 2.0, &[1.0, 0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        assert!(is_ordered(&t1, &two, 1e-9).unwrap().ordered);
        let three = triple(&t1, 3.0, &[0.0, 1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0, 0.0, 0.0]);
        assert!(is_ordered(&t1, &three, 1e-9).unwrap().ordered);

        let s = 13f64.sqrt();
        let v = [3.0 / s, 2.0 / s];
        let mid = triple(&t1, 6.0 / s, &[v[0], v[1], 0.0], &[v[0], v[1]], &[v[0], v[1], 0.0, 0.0]);
        let r = is_ordered(&t1, &mid, 1e-9).unwrap();
        assert!(!r.ordered);
        // T(·,y) restricted to the first two coordinates is (6/√13)·I, the
        // rank-one target is (6/√13)·vvᵀ, so the difference has norm 6/√13.
        assert!((r.slice_residuals[0] - 6.0 / s).abs() < 1e-12);

        let unverified = triple(&t1, 2.5, &[1.0, 0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        assert!(is_ordered(&t1, &unverified, 1e-9).is_err());
    }

    #[test]
    fn sign_orbit_preserves_residuals_and_order_report() {
        let t1 = fixtures::example_diagonal();
        let s = 13f64.sqrt();
        let mid = triple(
            &t1,
            6.0 / s,
            &[3.0 / s, 2.0 / s, 0.0],
            &[3.0 / s, 2.0 / s],
            &[3.0 / s, 2.0 / s, 0.0, 0.0],
        );
        let base = is_ordered(&t1, &mid, 1e-9).unwrap();
        for v in mid.sign_orbit() {
            let r = verify_triple(&t1, &v, 1e-9).unwrap();
            assert_eq!(r.residuals, verify_triple(&t1, &mid, 1e-9).unwrap().residuals);
            let o = is_ordered(&t1, &v, 1e-9).unwrap();
            for (a, b) in o.slice_residuals.iter().zip(base.slice_residuals) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dedup_merges_orbit_members_and_orders_ties() {
        let t1 = fixtures::example_diagonal();
        let a = triple(&t1, 2.0, &[1.0, 0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        let b = a.sign_orbit()[2].clone();
        let c = triple(&t1, 3.0, &[0.0, 1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0, 0.0, 0.0]);
        let d = triple(&t1, 2.0, &[0.0, 1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        let out = dedup_and_sort(vec![a.clone(), b, d.clone(), c.clone()], 1e-6);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], c);
        // Tie at τ = 2: x = (0,1,0) sorts before (1,0,0).
        assert_eq!(out[1], d);
        assert_eq!(out[2], a);
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let bad = SearchConfig {
            starts: Some(0),
            ..SearchConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SearchConfig {
            residual_tol: -1.0,
            ..SearchConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(SearchConfig::default().starts_for(Dims::new(3, 2, 4)), 256);
    }
}
