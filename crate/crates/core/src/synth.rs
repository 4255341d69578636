//! Seeded generators for random operators with known structure.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::tensor::{Dims, Tensor3};
use crate::vecops;

pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniformly distributed point on the unit sphere of `Rⁿ`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        if let Some(v) = vecops::normalized(&random_gaussian(rng, n)) {
            return v;
        }
    }
}

/// Tensor with i.i.d. standard normal entries.
pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, dims: Dims) -> Tensor3 {
    Tensor3::new(dims, random_gaussian(rng, dims.len())).expect("finite entries")
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_vec(n, n, random_gaussian(rng, n * n));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn columns(m: &DMatrix<f64>, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|c| m.column(c).iter().copied().collect()).collect()
}

/// `(τ, x, y, z)`.
pub type Term = (f64, Vec<f64>, Vec<f64>, Vec<f64>);

/// A Schmidt-structured operator built from known terms.
#[derive(Debug, Clone)]
pub struct PlantedSchmidt {
    pub dims: Dims,
    /// `(τ, x, y, z)` with orthonormal families, τ descending.
    pub terms: Vec<Term>,
}

impl PlantedSchmidt {
    pub fn tensor(&self) -> Tensor3 {
        Tensor3::from_schmidt(
            self.dims,
            self.terms
                .iter()
                .map(|(t, x, y, z)| (*t, x.as_slice(), y.as_slice(), z.as_slice())),
        )
        .expect("consistent planted terms")
    }
}

/// Plants `Σ τ_i x_i ⊗ y_i ⊗ z_i` with random orthonormal families.
///
/// Panics if `taus` is longer than the smallest dimension.
pub fn planted_schmidt<R: Rng + ?Sized>(rng: &mut R, dims: Dims, taus: &[f64]) -> PlantedSchmidt {
    let r = taus.len();
    assert!(r <= dims.min(), "rank {r} exceeds min dimension of {dims}");
    let xs = columns(&random_orthogonal(rng, dims.n1), r);
    let ys = columns(&random_orthogonal(rng, dims.n2), r);
    let zs = columns(&random_orthogonal(rng, dims.n3), r);
    let terms = taus
        .iter()
        .zip(xs)
        .zip(ys)
        .zip(zs)
        .map(|(((t, x), y), z)| (*t, x, y, z))
        .collect();
    PlantedSchmidt { dims, terms }
}

/// Strictly decreasing positive values with consecutive gaps of at least
/// `min_gap`, drawn from `(0, 5]`-ish ranges.
pub fn decreasing_taus<R: Rng + ?Sized>(rng: &mut R, count: usize, min_gap: f64) -> Vec<f64> {
    let mut taus = Vec::with_capacity(count);
    let mut current = 0.2 + rng.gen::<f64>();
    for _ in 0..count {
        taus.push(current);
        current += min_gap + rng.gen::<f64>();
    }
    taus.reverse();
    taus
}

/// `Σ λ_i x_i ⊗ x_i ⊗ x_i` with a random orthonormal family in `Rⁿ`.
/// Returns the tensor and the family.
pub fn symmetric_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize, lambdas: &[f64]) -> (Tensor3, Vec<Vec<f64>>) {
    assert!(lambdas.len() <= n);
    let xs = columns(&random_orthogonal(rng, n), lambdas.len());
    let t = Tensor3::from_schmidt(
        Dims::new(n, n, n),
        lambdas
            .iter()
            .zip(&xs)
            .map(|(l, x)| (*l, x.as_slice(), x.as_slice(), x.as_slice())),
    )
    .expect("consistent terms");
    (t, xs)
}

/// Averages a cubical tensor over all six index permutations.
pub fn symmetrize(t: &Tensor3) -> Tensor3 {
    let d = t.dims();
    assert!(d.n1 == d.n2 && d.n2 == d.n3, "symmetrize needs a cubical tensor");
    Tensor3::from_fn(d, |i, j, k| {
        (t.get(i, j, k) + t.get(i, k, j) + t.get(j, i, k) + t.get(j, k, i) + t.get(k, i, j) + t.get(k, j, i)) / 6.0
    })
    .expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..7 {
            let q = random_orthogonal(&mut rng, n);
            let dev = (q.transpose() * &q - DMatrix::identity(n, n)).amax();
            assert!(dev < 1e-13);
        }
    }

    #[test]
    fn decreasing_taus_respect_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..6 {
            let t = decreasing_taus(&mut rng, n, 0.1);
            assert!(t.windows(2).all(|w| w[0] - w[1] >= 0.1));
            assert!(t.iter().all(|v| *v > 0.0));
        }
    }
}
