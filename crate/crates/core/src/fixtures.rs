//! Reference operators with known singular structure.
//!
//! Used by the test suites, the benchmarks and the files under `data/`.

use crate::tensor::{Dims, Tensor3};

/// `T(x, y) = (2 a1 b1, 3 a2 b2, 0, 0)` on `R³ × R² → R⁴`.
pub fn example_diagonal() -> Tensor3 {
    let mut t = Tensor3::zeros(Dims::new(3, 2, 4)).expect("valid dims");
    t.set(0, 0, 0, 2.0);
    t.set(1, 1, 1, 3.0);
    t.with_name("diagonal-3x2x4")
}

/// `T(x, y) = (a1 b1, b1 (a1 + a2), b1 a1, b2 (a1 + a3))` on `R³ × R² → R⁴`.
///
/// Has four singular values, none of them ordered, and no Schmidt
/// representation.
pub fn example_coupled() -> Tensor3 {
    let mut t = Tensor3::zeros(Dims::new(3, 2, 4)).expect("valid dims");
    t.set(0, 0, 0, 1.0);
    t.set(0, 0, 1, 1.0);
    t.set(1, 0, 1, 1.0);
    t.set(0, 0, 2, 1.0);
    t.set(0, 1, 3, 1.0);
    t.set(2, 1, 3, 1.0);
    t.with_name("coupled-3x2x4")
}

/// Schmidt terms `(τ, x, y, z)` of [`example_ordered`], listed by ascending τ.
pub fn example_ordered_terms() -> Vec<crate::synth::Term> {
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let r6 = 6f64.sqrt();
    let r8 = 8f64.sqrt();
    vec![
        (
            1.0,
            vec![1.0, 0.0, 0.0],
            vec![1.0 / r2, 0.0, 1.0 / r2],
            vec![1.0 / r3, 1.0 / r3, 1.0 / r3],
        ),
        (
            2.0,
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![-1.0 / r2, 1.0 / r2, 0.0],
        ),
        (
            3.0,
            vec![0.0, 0.0, 1.0],
            vec![2.0 / r8, 0.0, -2.0 / r8],
            vec![1.0 / r6, 1.0 / r6, -2.0 / r6],
        ),
    ]
}

/// A 3×3×3 operator with three ordered singular values 1, 2, 3:
///
/// ```text
/// T(x, y) = ( √6/6 x1(y1+y3) − √2 x2y2 + √3/2 x3(y1−y3),
///             √6/6 x1(y1+y3) + √2 x2y2 + √3/2 x3(y1−y3),
///             √6/6 x1(y1+y3)           − √3   x3(y1−y3) )
/// ```
pub fn example_ordered() -> Tensor3 {
    let a = 6f64.sqrt() / 6.0;
    let b = 2f64.sqrt();
    let c = 3f64.sqrt() / 2.0;
    let d = 3f64.sqrt();
    let mut t = Tensor3::zeros(Dims::new(3, 3, 3)).expect("valid dims");
    for k in 0..3 {
        t.set(0, 0, k, a);
        t.set(0, 2, k, a);
    }
    t.set(1, 1, 0, -b);
    t.set(1, 1, 1, b);
    for (k, s) in [(0, c), (1, c), (2, -d)] {
        t.set(2, 0, k, s);
        t.set(2, 2, k, -s);
    }
    t.with_name("ordered-3x3x3")
}

/// `Σ λ_i e_i ⊗ e_i ⊗ e_i` on `Rⁿ`.
pub fn signed_diagonal(lambdas: &[f64]) -> Tensor3 {
    let n = lambdas.len();
    let mut t = Tensor3::zeros(Dims::new(n, n, n)).expect("nonempty lambdas");
    for (i, l) in lambdas.iter().enumerate() {
        t.set(i, i, i, *l);
    }
    t.with_name("signed-diagonal")
}
