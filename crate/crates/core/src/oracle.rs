//! Brute-force cross-checks for small operators.
//!
//! Nothing here is used by the solvers in [`crate::search`]; these routines
//! exist to validate them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Mode, Result};
use crate::search::hopm_refine;
use crate::spectra::{canonicalize, dedup_and_sort, verify_triple, SearchConfig, SingularTriple, Spectrum, UNIT_TOL};
use crate::synth;
use crate::tensor::{Dims, Tensor3};
use crate::vecops;

/// Largest mode dimension the oracles accept.
pub const MAX_ORACLE_DIM: usize = 4;
/// Residual bound for a triple handed to [`stationarity_fd_check`].
pub const STATIONARITY_VERIFY_TOL: f64 = 1e-6;

fn guard(t: &Tensor3) -> Result<()> {
    if t.dims().max() > MAX_ORACLE_DIM {
        return Err(Error::invalid(format!(
            "oracle limited to dims <= {MAX_ORACLE_DIM}, got {}",
            t.dims()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per angular coordinate.
    pub resolution: usize,
    /// Each round regrids a box around the incumbent, ten times smaller than
    /// the previous one.
    pub refinement_rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            resolution: 72,
            refinement_rounds: 2,
        }
    }
}

/// Point on the unit sphere of `R^{angles.len()+1}` from hyperspherical angles.
fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut v = vec![0.0; n];
    let mut s = 1.0;
    for (i, a) in angles.iter().enumerate() {
        v[i] = s * a.cos();
        s *= a.sin();
    }
    v[n - 1] = s;
    v
}

/// `max_y ‖T(x,y)‖` over unit `y`, via the top eigenvalue of `MᵀM` where
/// `M` is the matrix of `y ↦ T(x,y)`.
fn best_over_y(t: &Tensor3, x: &[f64]) -> f64 {
    let m = t.slice_fixed_x(x);
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues.max().max(0.0).sqrt()
}

fn grid_axes(center: &[f64], half_widths: &[f64], res: usize) -> Vec<Vec<f64>> {
    center
        .iter()
        .zip(half_widths)
        .map(|(c, w)| {
            (0..res)
                .map(|p| c - w + 2.0 * w * p as f64 / (res - 1) as f64)
                .collect()
        })
        .collect()
}

/// Evaluates every point of the tensor-product grid and returns the best
/// `(value, angles)`; the first maximiser in grid order wins ties.
fn grid_max(t: &Tensor3, axes: &[Vec<f64>]) -> (f64, Vec<f64>) {
    if axes.is_empty() {
        return (best_over_y(t, &[1.0]), Vec::new());
    }
    let total: usize = axes.iter().map(Vec::len).product();
    let decode = |mut flat: usize| -> Vec<f64> {
        let mut angles = vec![0.0; axes.len()];
        for d in (0..axes.len()).rev() {
            let len = axes[d].len();
            angles[d] = axes[d][flat % len];
            flat /= len;
        }
        angles
    };
    let chunk = 4096;
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for flat in c * chunk..((c + 1) * chunk).min(total) {
                let v = best_over_y(t, &sphere_point(&decode(flat)));
                if v > best.0 {
                    best = (v, flat);
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 { b } else { a });
    (best.0, decode(best.1))
}

/// Discretised maximisation of `‖T(x,y)‖` over unit `x` (hyperspherical grid)
/// and unit `y` (exact, per grid point). The result is a lower bound on the
/// bilinear norm.
pub fn grid_norm_oracle(t: &Tensor3, grid: GridSpec) -> Result<f64> {
    guard(t)?;
    if grid.resolution < 8 {
        return Err(Error::invalid("grid resolution must be at least 8"));
    }
    let n_angles = t.dims().n1 - 1;
    let ranges: Vec<f64> = (0..n_angles)
        .map(|d| {
            if d + 1 == n_angles {
                2.0 * std::f64::consts::PI
            } else {
                std::f64::consts::PI
            }
        })
        .collect();
    let res = grid.resolution;
    let axes: Vec<Vec<f64>> = ranges
        .iter()
        .map(|r| (0..res).map(|p| r * p as f64 / res as f64).collect())
        .collect();
    let (mut best, mut center) = grid_max(t, &axes);

    let mut half: Vec<f64> = ranges.iter().map(|r| r / res as f64).collect();
    for _ in 0..grid.refinement_rounds {
        if n_angles == 0 {
            break;
        }
        let (v, c) = grid_max(t, &grid_axes(&center, &half, res));
        if v > best {
            best = v;
            center = c;
        }
        for h in half.iter_mut() {
            *h /= 10.0;
        }
    }
    Ok(best.max(0.0))
}

/// Orthonormal basis of the tangent space `v⊥` of the unit sphere at `v`.
fn tangent_basis(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let mut basis: Vec<Vec<f64>> = vec![v.to_vec()];
    for i in 0..n {
        let mut e = vecops::unit(n, i);
        for b in &basis {
            let c = vecops::dot(&e, b);
            e = vecops::sub_scaled(&e, c, b);
        }
        if let Some(u) = vecops::normalized(&e).filter(|_| vecops::norm(&e) > 1e-8) {
            basis.push(u);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Largest central-difference derivative of `f(x,y,z) = ⟨T(x,y),z⟩` along an
/// orthonormal tangent basis of the product of spheres, with retraction by
/// normalisation. No singular-triple precondition; vectors must be unit.
pub fn fd_tangent_gradient(t: &Tensor3, x: &[f64], y: &[f64], z: &[f64], h: f64) -> Result<f64> {
    let dims = t.dims();
    dims.check(Mode::H1, x)?;
    dims.check(Mode::H2, y)?;
    dims.check(Mode::K, z)?;
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::invalid(format!(
            "finite-difference step {h} outside [1e-7, 1e-3]"
        )));
    }
    for (mode, v) in [(Mode::H1, x), (Mode::H2, y), (Mode::K, z)] {
        if (vecops::norm(v) - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("{mode} vector is not unit length")));
        }
    }
    let retract = |v: &[f64], d: &[f64], s: f64| -> Vec<f64> {
        let moved: Vec<f64> = v.iter().zip(d).map(|(a, b)| a + s * b).collect();
        vecops::normalized(&moved).expect("tangent step keeps the vector nonzero")
    };
    let f = |a: &[f64], b: &[f64], c: &[f64]| vecops::dot(&t.apply_unchecked(a, b), c);

    let mut worst = 0.0f64;
    for d in tangent_basis(x) {
        let g = (f(&retract(x, &d, h), y, z) - f(&retract(x, &d, -h), y, z)) / (2.0 * h);
        worst = worst.max(g.abs());
    }
    for d in tangent_basis(y) {
        let g = (f(x, &retract(y, &d, h), z) - f(x, &retract(y, &d, -h), z)) / (2.0 * h);
        worst = worst.max(g.abs());
    }
    for d in tangent_basis(z) {
        let g = (f(x, y, &retract(z, &d, h)) - f(x, y, &retract(z, &d, -h))) / (2.0 * h);
        worst = worst.max(g.abs());
    }
    Ok(worst)
}

/// [`fd_tangent_gradient`] for a triple that verifies at
/// [`STATIONARITY_VERIFY_TOL`].
pub fn stationarity_fd_check(t: &Tensor3, triple: &SingularTriple, h: f64) -> Result<f64> {
    let report = verify_triple(t, triple, STATIONARITY_VERIFY_TOL)?;
    if !report.verified {
        return Err(Error::invalid(format!(
            "triple with tau {} is not verified (max residual {:.3e})",
            triple.tau,
            report.residuals.max()
        )));
    }
    fd_tangent_gradient(t, &triple.x, &triple.y, &triple.z, h)
}

/// All nonzero vectors with entries in {−1, 0, 1}, normalised, one per ± pair.
fn sign_lattice(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let d = c % 3;
                c /= 3;
                d as f64 - 1.0
            })
            .collect();
        // Keep the representative whose first nonzero entry is positive.
        match v.iter().find(|a| **a != 0.0) {
            Some(first) if *first > 0.0 => out.push(vecops::normalized(&v).expect("nonzero")),
            _ => {}
        }
    }
    out
}

/// Residual of the reduced critical-point system in `(x, y, μ)` with
/// `z` eliminated: `φ*_{H1}(y)(T(x,y)) = μx`, `φ*_{H2}(x)(T(x,y)) = μy`,
/// `‖x‖² + ‖y‖² = 2`.
fn reduced_system(t: &Tensor3, v: &[f64]) -> DVector<f64> {
    let Dims { n1, n2, .. } = t.dims();
    let (x, rest) = v.split_at(n1);
    let (y, mu) = rest.split_at(n2);
    let mu = mu[0];
    let txy = t.apply_unchecked(x, y);
    let a = t.contract_yz(y, &txy);
    let b = t.contract_xz(x, &txy);
    let mut g = DVector::zeros(n1 + n2 + 1);
    for i in 0..n1 {
        g[i] = a[i] - mu * x[i];
    }
    for j in 0..n2 {
        g[n1 + j] = b[j] - mu * y[j];
    }
    g[n1 + n2] = (vecops::dot(x, x) + vecops::dot(y, y) - 2.0) / 2.0;
    g
}

/// Newton iteration on [`reduced_system`] with a central-difference Jacobian
/// and an SVD least-squares step.
fn reduced_newton(t: &Tensor3, x: &[f64], y: &[f64]) -> Option<SingularTriple> {
    let Dims { n1, n2, .. } = t.dims();
    let n = n1 + n2 + 1;
    let mu0 = vecops::norm(&t.apply_unchecked(x, y)).powi(2);
    let mut v: Vec<f64> = x.iter().chain(y).copied().chain([mu0]).collect();
    let scale = (1.0 + t.max_abs()).powi(3);
    let mut g = reduced_system(t, &v);
    for _ in 0..200 {
        let gn = g.norm();
        if gn <= 1e-14 * scale {
            break;
        }
        let mut jac = DMatrix::zeros(n, n);
        for c in 0..n {
            let step = 1e-6 * (1.0 + v[c].abs());
            let mut p = v.clone();
            let mut m = v.clone();
            p[c] += step;
            m[c] -= step;
            let col = (reduced_system(t, &p) - reduced_system(t, &m)) / (2.0 * step);
            jac.set_column(c, &col);
        }
        let svd = jac.svd(true, true);
        let cutoff = svd.singular_values.max() * 1e-12;
        let delta = svd.solve(&g, cutoff).ok()?;
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, d)| a - alpha * d).collect();
            let tg = reduced_system(t, &trial);
            if tg.norm() < gn {
                v = trial;
                g = tg;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if g.norm() > 1e-10 * scale {
        return None;
    }
    let x = vecops::normalized(&v[..n1])?;
    let y = vecops::normalized(&v[n1..n1 + n2])?;
    let txy = t.apply_unchecked(&x, &y);
    let tau = vecops::norm(&txy);
    let z = vecops::normalized(&txy)?;
    let triple = SingularTriple::new(t, tau, x, y, z).ok()?;
    canonicalize(&triple).ok()
}

/// Independent enumeration for tiny operators: every pair of sign-lattice
/// vectors `(x, y)` plus `cfg.starts` random pairs seeds both power iteration
/// and a Newton solve of the reduced system with `z` eliminated.
pub fn exhaustive_small_spectrum(t: &Tensor3, cfg: &SearchConfig) -> Result<Spectrum> {
    guard(t)?;
    cfg.validate()?;
    let dims = t.dims();
    if t.hs_norm() < cfg.residual_tol {
        return Ok(Spectrum {
            triples: Vec::new(),
            complete: false,
        });
    }
    let mut starts: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let (lx, ly) = (sign_lattice(dims.n1), sign_lattice(dims.n2));
    for x in &lx {
        for y in &ly {
            starts.push((x.clone(), y.clone()));
        }
    }
    // Offset seed so these starts differ from the main solver's.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f0a_c1e0);
    for _ in 0..cfg.starts_for(dims) {
        starts.push((
            synth::random_unit(&mut rng, dims.n1),
            synth::random_unit(&mut rng, dims.n2),
        ));
    }

    let z_any = vecops::unit(dims.n3, 0);
    let found: Vec<Vec<SingularTriple>> = starts
        .par_iter()
        .map(|(x, y)| {
            let mut out = Vec::new();
            let z0 = vecops::normalized(&t.apply_unchecked(x, y)).unwrap_or_else(|| z_any.clone());
            if let Ok(Ok(run)) = hopm_refine(t, x, y, &z0, cfg) {
                out.push(run.triple);
            }
            if let Some(tr) = reduced_newton(t, x, y) {
                out.push(tr);
            }
            out.retain(|c| c.tau >= cfg.residual_tol && c.is_verified(cfg.residual_tol));
            out
        })
        .collect();
    Ok(Spectrum {
        triples: dedup_and_sort(found.into_iter().flatten().collect(), cfg.dedup_tol),
        complete: false,
    })
}

/// Distinct τ values of a spectrum, merging values closer than `tol`.
pub fn distinct_taus(spectrum: &Spectrum, tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for tau in spectrum.taus() {
        if out.last().is_none_or(|last| (last - tau).abs() > tol) {
            out.push(tau);
        }
    }
    out
}

/// Marks `spectrum` complete when every mode has dimension at most two and
/// the exhaustive enumeration finds exactly the same orbits.
pub fn certify_completeness(t: &Tensor3, spectrum: Spectrum, cfg: &SearchConfig) -> Result<Spectrum> {
    if t.dims().max() > 2 {
        return Ok(Spectrum {
            complete: false,
            ..spectrum
        });
    }
    let reference = exhaustive_small_spectrum(t, cfg)?;
    let same = reference.len() == spectrum.len()
        && reference
            .triples
            .iter()
            .zip(&spectrum.triples)
            .all(|(a, b)| (a.tau - b.tau).abs() <= cfg.dedup_tol * (1.0 + a.tau));
    Ok(Spectrum {
        complete: same,
        ..spectrum
    })
}
