//! Numerical search for singular triples.
//!
//! Two local solvers feed a deterministic multi-start driver:
//!
//! * [`hopm_refine`], alternating power iteration. Every sweep maximises
//!   `⟨T(x,y),z⟩` over one factor with the others fixed, so it climbs to
//!   local maxima of the form on the product of spheres.
//! * [`newton_critical_point`], Newton's method on the gradient of the
//!   Lagrangian. It converges to any nondegenerate critical point near its
//!   start, saddles included, which power iteration cannot reach.
//!
//! Starts are generated from `(seed, start index)` alone and results are
//! merged in start order, so parallel execution never changes the output.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Mode, Result};
use crate::spectra::{canonicalize, dedup_and_sort, orbit_distance, SearchConfig, SingularTriple, Spectrum};
use crate::synth;
use crate::tensor::{Dims, Tensor3};
use crate::vecops;

const NEWTON_MAX_STEPS: usize = 100;
/// A Newton polish may move a power-iteration result by at most this much.
const POLISH_MAX_SHIFT: f64 = 1e-3;

/// Why a local refinement produced no triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonConvergence {
    /// A contraction vanished, so a vector could not be normalised.
    Degenerate,
    /// `max_iter` sweeps without meeting `iter_tol`.
    MaxIterations,
}

impl std::fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NonConvergence::Degenerate => f.write_str("degenerate start (zero contraction)"),
            NonConvergence::MaxIterations => f.write_str("iteration limit reached"),
        }
    }
}

impl std::error::Error for NonConvergence {}

/// Outcome of a converged power iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct HopmRun {
    /// Canonicalised candidate with residuals against the input tensor.
    pub triple: SingularTriple,
    pub sweeps: usize,
    /// `⟨T(x,y),z⟩` at the start and after every sweep.
    pub objective: Vec<f64>,
}

/// Alternating power iteration from `(x0, y0, z0)`.
///
/// Each sweep sets `z ← T(x,y)`, `x ← φ*_{H1}(y)(z)`, `y ← φ*_{H2}(x)(z)`,
/// normalising after every update, and stops once the objective changes by
/// less than `cfg.iter_tol` relative to its value.
pub fn hopm_refine(
    t: &Tensor3,
    x0: &[f64],
    y0: &[f64],
    z0: &[f64],
    cfg: &SearchConfig,
) -> Result<std::result::Result<HopmRun, NonConvergence>> {
    let dims = t.dims();
    dims.check(Mode::H1, x0)?;
    dims.check(Mode::H2, y0)?;
    dims.check(Mode::K, z0)?;
    Ok(hopm_unchecked(t, x0, y0, z0, cfg))
}

fn hopm_unchecked(
    t: &Tensor3,
    x0: &[f64],
    y0: &[f64],
    z0: &[f64],
    cfg: &SearchConfig,
) -> std::result::Result<HopmRun, NonConvergence> {
    use NonConvergence::*;
    let mut x = vecops::normalized(x0).ok_or(Degenerate)?;
    let mut y = vecops::normalized(y0).ok_or(Degenerate)?;
    let z0 = vecops::normalized(z0).ok_or(Degenerate)?;
    let mut prev = t.form(&x, &y, &z0);
    let mut objective = vec![prev];

    for sweep in 1..=cfg.max_iter {
        let z = vecops::normalized(&t.apply_unchecked(&x, &y)).ok_or(Degenerate)?;
        x = vecops::normalized(&t.contract_yz(&y, &z)).ok_or(Degenerate)?;
        let ty = t.contract_xz(&x, &z);
        let value = vecops::norm(&ty);
        y = vecops::normalized(&ty).ok_or(Degenerate)?;
        objective.push(value);
        if (value - prev).abs() <= cfg.iter_tol * value.abs() {
            let triple = SingularTriple::from_vectors(t, x, y, z);
            let triple = canonicalize(&triple).map_err(|_| Degenerate)?;
            return Ok(HopmRun {
                triple,
                sweeps: sweep,
                objective,
            });
        }
        prev = value;
    }
    Err(MaxIterations)
}

/// Gradient of `L = ⟨T(x,y),z⟩ − τ(‖x‖²+‖y‖²+‖z‖²−3)/2`, stacked as
/// `[x | y | z | τ]`. Its zeros with `τ ≠ 0` are singular triples (up to the
/// sign of τ) with unit vectors.
fn lagrangian_gradient(t: &Tensor3, x: &[f64], y: &[f64], z: &[f64], tau: f64) -> DVector<f64> {
    let Dims { n1, n2, n3 } = t.dims();
    let mut g = DVector::zeros(n1 + n2 + n3 + 1);
    let gx = t.contract_yz(y, z);
    let gy = t.contract_xz(x, z);
    let gz = t.apply_unchecked(x, y);
    for i in 0..n1 {
        g[i] = gx[i] - tau * x[i];
    }
    for j in 0..n2 {
        g[n1 + j] = gy[j] - tau * y[j];
    }
    for k in 0..n3 {
        g[n1 + n2 + k] = gz[k] - tau * z[k];
    }
    let sq = vecops::dot(x, x) + vecops::dot(y, y) + vecops::dot(z, z);
    g[n1 + n2 + n3] = -(sq - 3.0) / 2.0;
    g
}

/// Hessian of the Lagrangian (symmetric).
fn lagrangian_hessian(t: &Tensor3, x: &[f64], y: &[f64], z: &[f64], tau: f64) -> DMatrix<f64> {
    let Dims { n1, n2, n3 } = t.dims();
    let n = n1 + n2 + n3 + 1;
    let (oy, oz, ot) = (n1, n1 + n2, n1 + n2 + n3);
    let mut h = DMatrix::zeros(n, n);
    let a = t.slice_fixed_z(z); // n1 × n2
    let b = t.slice_fixed_y(y); // n3 × n1
    let c = t.slice_fixed_x(x); // n3 × n2
    for i in 0..n1 {
        h[(i, i)] = -tau;
        for j in 0..n2 {
            h[(i, oy + j)] = a[(i, j)];
            h[(oy + j, i)] = a[(i, j)];
        }
        for k in 0..n3 {
            h[(i, oz + k)] = b[(k, i)];
            h[(oz + k, i)] = b[(k, i)];
        }
        h[(i, ot)] = -x[i];
        h[(ot, i)] = -x[i];
    }
    for j in 0..n2 {
        h[(oy + j, oy + j)] = -tau;
        for k in 0..n3 {
            h[(oy + j, oz + k)] = c[(k, j)];
            h[(oz + k, oy + j)] = c[(k, j)];
        }
        h[(oy + j, ot)] = -y[j];
        h[(ot, oy + j)] = -y[j];
    }
    for k in 0..n3 {
        h[(oz + k, oz + k)] = -tau;
        h[(oz + k, ot)] = -z[k];
        h[(ot, oz + k)] = -z[k];
    }
    h
}

fn solve_step(h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(s) = h.clone().lu().solve(g) {
        if s.iter().all(|v| v.is_finite()) {
            return Some(s);
        }
    }
    let svd = h.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-12;
    svd.solve(g, cutoff).ok().filter(|s| s.iter().all(|v| v.is_finite()))
}

/// Damped Newton iteration on the Lagrangian gradient from `(x, y, z, τ)`.
///
/// Returns the point with each vector renormalised and `τ` oriented positive
/// (by flipping `z`), or `None` when the iteration stalls or lands on a point
/// with `τ` numerically zero.
pub fn newton_critical_point(t: &Tensor3, x: &[f64], y: &[f64], z: &[f64], tau: f64) -> Result<Option<SingularTriple>> {
    let dims = t.dims();
    dims.check(Mode::H1, x)?;
    dims.check(Mode::H2, y)?;
    dims.check(Mode::K, z)?;
    Ok(newton_unchecked(t, x, y, z, tau))
}

fn newton_unchecked(t: &Tensor3, x: &[f64], y: &[f64], z: &[f64], tau: f64) -> Option<SingularTriple> {
    let Dims { n1, n2, n3 } = t.dims();
    let scale = 1.0 + t.max_abs();
    let mut state: Vec<f64> = x.iter().chain(y).chain(z).copied().chain([tau]).collect();
    let split = |s: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
        (
            s[..n1].to_vec(),
            s[n1..n1 + n2].to_vec(),
            s[n1 + n2..n1 + n2 + n3].to_vec(),
            s[n1 + n2 + n3],
        )
    };

    let (mut cx, mut cy, mut cz, mut ct) = split(&state);
    let mut g = lagrangian_gradient(t, &cx, &cy, &cz, ct);
    let mut gnorm = g.norm();
    let mut converged = false;
    for _ in 0..NEWTON_MAX_STEPS {
        if gnorm <= 1e-15 * scale {
            converged = true;
            break;
        }
        let h = lagrangian_hessian(t, &cx, &cy, &cz, ct);
        let Some(step) = solve_step(h, &g) else {
            break;
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = state.iter().zip(step.iter()).map(|(s, d)| s - alpha * d).collect();
            let (tx, ty, tz, tt) = split(&trial);
            let tg = lagrangian_gradient(t, &tx, &ty, &tz, tt);
            let tn = tg.norm();
            if tn.is_finite() && tn < gnorm {
                state = trial;
                (cx, cy, cz, ct) = (tx, ty, tz, tt);
                g = tg;
                let prev = gnorm;
                gnorm = tn;
                accepted = true;
                if step.norm() * alpha <= 1e-15 * (1.0 + vecops::norm(&state)) || prev - tn <= 1e-17 * scale {
                    converged = gnorm <= 1e-10 * scale;
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            converged = gnorm <= 1e-10 * scale;
            break;
        }
        if converged {
            break;
        }
    }
    if !converged && gnorm > 1e-10 * scale {
        return None;
    }
    let x = vecops::normalized(&cx)?;
    let y = vecops::normalized(&cy)?;
    let mut z = vecops::normalized(&cz)?;
    if t.form(&x, &y, &z) < 0.0 {
        z = vecops::neg(&z);
    }
    let triple = SingularTriple::from_vectors(t, x, y, z);
    canonicalize(&triple).ok()
}

/// Runs power iteration and polishes the limit with Newton steps. The polish
/// is kept only when it stays next to the power-iteration limit and does not
/// increase the residuals.
fn refine_to_maximum(t: &Tensor3, x0: &[f64], y0: &[f64], z0: &[f64], cfg: &SearchConfig) -> Option<SingularTriple> {
    let run = hopm_unchecked(t, x0, y0, z0, cfg).ok()?;
    let base = run.triple;
    match newton_unchecked(t, &base.x, &base.y, &base.z, base.tau) {
        Some(p) if orbit_distance(&p, &base) <= POLISH_MAX_SHIFT && p.residuals.max() <= base.residuals.max() => {
            Some(p)
        }
        _ => Some(base),
    }
}

/// One start of the multi-start schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Start {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

/// Deterministic start list: every basis pair `(e_i, f_j)` with `z` aligned to
/// `T(e_i, f_j)`, followed by `starts` uniform random unit triples. Random
/// start `s` is drawn from stream `s` of a ChaCha generator seeded by `seed`.
pub fn start_schedule(t: &Tensor3, cfg: &SearchConfig) -> Vec<Start> {
    let dims = t.dims();
    let mut out = Vec::new();
    for i in 0..dims.n1 {
        for j in 0..dims.n2 {
            let x = vecops::unit(dims.n1, i);
            let y = vecops::unit(dims.n2, j);
            let z = vecops::normalized(&t.apply_unchecked(&x, &y)).unwrap_or_else(|| vecops::unit(dims.n3, 0));
            out.push(Start { x, y, z });
        }
    }
    for s in 0..cfg.starts_for(dims) {
        out.push(random_start(dims, cfg.seed, s as u64));
    }
    out
}

pub(crate) fn random_start(dims: Dims, seed: u64, stream: u64) -> Start {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let x = synth::random_unit(&mut rng, dims.n1);
    let y = synth::random_unit(&mut rng, dims.n2);
    let z = synth::random_unit(&mut rng, dims.n3);
    Start { x, y, z }
}

fn accept(cand: Option<SingularTriple>, cfg: &SearchConfig) -> Option<SingularTriple> {
    cand.filter(|c| c.tau >= cfg.residual_tol && c.is_verified(cfg.residual_tol))
}

fn is_negligible(t: &Tensor3, cfg: &SearchConfig) -> bool {
    t.hs_norm() < cfg.residual_tol
}

/// Verified local maxima of `⟨T(x,y),z⟩` reached by power iteration from the
/// start schedule, deduplicated and sorted by τ descending.
pub fn local_maxima(t: &Tensor3, cfg: &SearchConfig) -> Result<Vec<SingularTriple>> {
    cfg.validate()?;
    if is_negligible(t, cfg) {
        return Ok(Vec::new());
    }
    let starts = start_schedule(t, cfg);
    let found: Vec<Option<SingularTriple>> = starts
        .par_iter()
        .map(|s| accept(refine_to_maximum(t, &s.x, &s.y, &s.z, cfg), cfg))
        .collect();
    Ok(dedup_and_sort(found.into_iter().flatten().collect(), cfg.dedup_tol))
}

/// The bilinear norm `sup ‖T(x,y)‖` over unit `x`, `y`, with a triple attaining
/// it. The zero operator gives `(0, None)`.
pub fn operator_norm(t: &Tensor3, cfg: &SearchConfig) -> Result<(f64, Option<SingularTriple>)> {
    let maxima = local_maxima(t, cfg)?;
    Ok(match maxima.into_iter().next() {
        Some(top) => (top.tau, Some(top)),
        None => (0.0, None),
    })
}

/// Multi-start search for singular triples.
///
/// From every start this runs power iteration (with a Newton polish) and
/// two plain Newton solves, one with `z` aligned to `T(x,y)`, keeps the candidates that verify at
/// `cfg.residual_tol`, merges sign-orbit duplicates in start order and sorts by
/// τ descending. Completeness is not guaranteed.
pub fn enumerate_triples(t: &Tensor3, cfg: &SearchConfig) -> Result<Spectrum> {
    cfg.validate()?;
    if is_negligible(t, cfg) {
        return Ok(Spectrum {
            triples: Vec::new(),
            complete: false,
        });
    }
    let starts = start_schedule(t, cfg);
    let found: Vec<[Option<SingularTriple>; 3]> = starts
        .par_iter()
        .map(|s| {
            let a = accept(refine_to_maximum(t, &s.x, &s.y, &s.z, cfg), cfg);
            let tau0 = t.form(&s.x, &s.y, &s.z);
            let b = accept(newton_unchecked(t, &s.x, &s.y, &s.z, tau0), cfg);
            let txy = t.apply_unchecked(&s.x, &s.y);
            let c = vecops::normalized(&txy)
                .and_then(|z| accept(newton_unchecked(t, &s.x, &s.y, &z, vecops::norm(&txy)), cfg));
            [a, b, c]
        })
        .collect();
    let triples = dedup_and_sort(found.into_iter().flatten().flatten().collect(), cfg.dedup_tol);
    Ok(Spectrum {
        triples,
        complete: false,
    })
}

/// Draws a random unit start for ad hoc use (tests, examples).
pub fn random_unit_triple<R: Rng + ?Sized>(rng: &mut R, dims: Dims) -> Start {
    Start {
        x: synth::random_unit(rng, dims.n1),
        y: synth::random_unit(rng, dims.n2),
        z: synth::random_unit(rng, dims.n3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn hopm_fixed_point_is_immediate() {
        let t = fixtures::example_diagonal();
        let run = hopm_refine(&t, &[0.0, 1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0, 0.0, 0.0], &cfg())
            .unwrap()
            .unwrap();
        assert_eq!(run.sweeps, 1);
        assert_eq!(run.triple.tau, 3.0);
        assert_eq!(run.triple.residuals.max(), 0.0);
    }

    #[test]
    fn hopm_on_zero_tensor_is_degenerate() {
        let t = Tensor3::zeros(Dims::new(2, 3, 2)).unwrap();
        let r = hopm_refine(&t, &[1.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 1.0], &cfg()).unwrap();
        assert_eq!(r.unwrap_err(), NonConvergence::Degenerate);
        let t = fixtures::example_diagonal();
        let r = hopm_refine(&t, &[0.0, 0.0, 1.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0], &cfg()).unwrap();
        assert_eq!(r.unwrap_err(), NonConvergence::Degenerate);
        assert!(hopm_refine(&t, &[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0], &cfg()).is_err());
    }

    #[test]
    fn hopm_max_iter_is_reported() {
        let t = fixtures::example_coupled();
        let c = SearchConfig {
            max_iter: 1,
            iter_tol: 1e-300,
            ..cfg()
        };
        let r = hopm_refine(&t, &[0.6, 0.0, 0.8], &[0.8, 0.6], &[0.5, 0.5, 0.5, 0.5], &c).unwrap();
        assert_eq!(r.unwrap_err(), NonConvergence::MaxIterations);
    }

    #[test]
    fn hopm_objective_is_nondecreasing() {
        let t = fixtures::example_coupled();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..64 {
            let s = random_unit_triple(&mut rng, t.dims());
            if let Ok(run) = hopm_refine(&t, &s.x, &s.y, &s.z, &cfg()).unwrap() {
                for w in run.objective.windows(2) {
                    assert!(w[1] >= w[0] - 1e-13, "{} -> {}", w[0], w[1]);
                }
            }
        }
    }

    #[test]
    fn hopm_random_starts_reach_the_norm() {
        let t = fixtures::example_coupled();
        let mut best = 0.0f64;
        for s in 0..64 {
            let st = random_start(t.dims(), 0, s);
            if let Ok(run) = hopm_refine(&t, &st.x, &st.y, &st.z, &cfg()).unwrap() {
                best = best.max(run.triple.tau);
            }
        }
        assert!((best - (2.0 + 2f64.sqrt()).sqrt()).abs() < 1e-6, "{best}");
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let t = fixtures::example_coupled();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_unit_triple(&mut rng, t.dims());
        let tau = 0.7;
        let h = lagrangian_hessian(&t, &s.x, &s.y, &s.z, tau);
        let base: Vec<f64> = s.x.iter().chain(&s.y).chain(&s.z).copied().chain([tau]).collect();
        let (n1, n2) = (3, 2);
        let eval =
            |v: &[f64]| lagrangian_gradient(&t, &v[..n1], &v[n1..n1 + n2], &v[n1 + n2..v.len() - 1], v[v.len() - 1]);
        let step = 1e-6;
        for c in 0..base.len() {
            let mut p = base.clone();
            let mut m = base.clone();
            p[c] += step;
            m[c] -= step;
            let fd = (eval(&p) - eval(&m)) / (2.0 * step);
            for r in 0..base.len() {
                assert!((fd[r] - h[(r, c)]).abs() < 1e-8, "({r},{c})");
            }
        }
    }

    #[test]
    fn newton_finds_saddle_of_diagonal_example() {
        let t = fixtures::example_diagonal();
        let s = 13f64.sqrt();
        // Start near the non-ordered critical point, which is a saddle.
        let x = [3.0 / s + 0.01, 2.0 / s, 0.0];
        let y = [3.0 / s, 2.0 / s - 0.01];
        let z = [3.0 / s, 2.0 / s, 0.0, 0.0];
        let got = newton_critical_point(&t, &x, &y, &z, 1.6).unwrap().unwrap();
        assert!((got.tau - 6.0 / s).abs() < 1e-12);
        assert!(got.residuals.max() < 1e-13);
    }

    #[test]
    fn operator_norm_examples() {
        let (n, arg) = operator_norm(&fixtures::example_diagonal(), &cfg()).unwrap();
        assert!((n - 3.0).abs() < 1e-12);
        let arg = arg.unwrap();
        assert_eq!(arg.x.len(), 3);
        let (n, _) = operator_norm(&fixtures::example_coupled(), &cfg()).unwrap();
        assert!((n - (2.0 + 2f64.sqrt()).sqrt()).abs() < 1e-12);
        let (n, arg) = operator_norm(&Tensor3::zeros(Dims::new(2, 2, 2)).unwrap(), &cfg()).unwrap();
        assert_eq!(n, 0.0);
        assert!(arg.is_none());
    }

    #[test]
    fn enumerate_diagonal_example() {
        let sp = enumerate_triples(&fixtures::example_diagonal(), &cfg()).unwrap();
        let s = 13f64.sqrt();
        let taus = sp.taus();
        // Four sign orbits share τ = 6/√13: x and y each carry (±3, ±2)/√13.
        assert_eq!(taus.len(), 6, "{taus:?}");
        assert!((taus[0] - 3.0).abs() < 1e-12);
        assert!((taus[1] - 2.0).abs() < 1e-12);
        assert!(taus[2..].iter().all(|t| (t - 6.0 / s).abs() < 1e-12));
        assert!(!sp.complete);
    }

    #[test]
    fn enumerate_zero_is_empty() {
        let sp = enumerate_triples(&Tensor3::zeros(Dims::new(3, 3, 3)).unwrap(), &cfg()).unwrap();
        assert!(sp.is_empty());
    }

    #[test]
    fn enumerate_is_deterministic() {
        let t = fixtures::example_coupled();
        let a = enumerate_triples(&t, &cfg()).unwrap();
        let b = enumerate_triples(&t, &cfg()).unwrap();
        assert_eq!(a, b);
        for (p, q) in a.triples.iter().zip(&b.triples) {
            assert_eq!(p.tau.to_bits(), q.tau.to_bits());
        }
    }
}
