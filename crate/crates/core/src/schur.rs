//! Schur representations `T(x,y) = Σ λ_i ⟨x,x_i⟩⟨y,x_i⟩ x_i` of symmetric
//! self-adjoint operators on a single space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schmidt::{gram_deviation, verify_representation, SchmidtRepresentation, Status, ORTHONORMAL_TOL};
use crate::tensor::{Dims, Tensor3};
use crate::vecops;

fn square_dims(t: &Tensor3) -> Result<usize> {
    let Dims { n1, n2, n3 } = t.dims();
    if n1 != n2 || n2 != n3 {
        return Err(Error::invalid(format!(
            "operator on a single space needs equal dims, got {}",
            t.dims()
        )));
    }
    Ok(n1)
}

/// `T(x,y) = T(y,x)`, i.e. `t[i][j][k] = t[j][i][k]`.
pub fn is_symmetric(t: &Tensor3, tol: f64) -> Result<bool> {
    let Dims { n1, n2, n3 } = t.dims();
    if n1 != n2 {
        return Err(Error::invalid(format!("symmetry needs n1 = n2, got {}", t.dims())));
    }
    for i in 0..n1 {
        for j in i + 1..n2 {
            for k in 0..n3 {
                if (t.get(i, j, k) - t.get(j, i, k)).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `⟨T(x,y),z⟩ = ⟨y,T(x,z)⟩` and `⟨T(y,x),z⟩ = ⟨y,T(z,x)⟩` on basis vectors:
/// `t[i][j][k] = t[i][k][j]` and `t[j][i][k] = t[k][i][j]`.
pub fn is_self_adjoint(t: &Tensor3, tol: f64) -> Result<bool> {
    let n = square_dims(t)?;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if (t.get(i, j, k) - t.get(i, k, j)).abs() > tol || (t.get(j, i, k) - t.get(k, i, j)).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurTerm {
    pub lambda: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurRepresentation {
    pub n: usize,
    pub terms: Vec<SchurTerm>,
}

impl SchurRepresentation {
    pub fn lambdas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.lambda).collect()
    }

    /// `Σ λ_i x_i ⊗ x_i ⊗ x_i`.
    pub fn to_tensor(&self) -> Result<Tensor3> {
        Tensor3::from_schmidt(
            Dims::new(self.n, self.n, self.n),
            self.terms
                .iter()
                .map(|t| (t.lambda, t.x.as_slice(), t.x.as_slice(), t.x.as_slice())),
        )
    }

    /// Evaluates `Σ λ_i ⟨x,x_i⟩⟨y,x_i⟩ x_i`.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for term in &self.terms {
            let w = term.lambda * vecops::dot(x, &term.x) * vecops::dot(y, &term.x);
            for (o, v) in out.iter_mut().zip(&term.x) {
                *o += w * v;
            }
        }
        out
    }
}

/// Flips `(λ, x)` to `(−λ, −x)` when needed so that the first
/// largest-magnitude entry of `x` is positive.
pub fn canonical_term(lambda: f64, x: Vec<f64>) -> SchurTerm {
    match vecops::argmax_abs(&x) {
        Some(i) if x[i] < 0.0 => SchurTerm {
            lambda: -lambda,
            x: vecops::neg(&x),
        },
        _ => SchurTerm { lambda, x },
    }
}

/// Converts a complete Schmidt representation of a symmetric self-adjoint
/// operator into Schur form.
///
/// For every term `⟨y_i,x_i⟩` and `⟨z_i,x_i⟩` must be `±1`; the eigenvalue is
/// `λ_i = sign⟨y_i,x_i⟩ · sign⟨z_i,x_i⟩ · τ_i` with eigenvector `x_i`.
/// Since `(λ, x)` and `(−λ, −x)` give the same term, each `x_i` is reported
/// with its largest-magnitude entry positive.
pub fn schur_from_schmidt(t: &Tensor3, rep: &SchmidtRepresentation, tol: f64) -> Result<SchurRepresentation> {
    let n = square_dims(t)?;
    if !is_symmetric(t, tol)? || !is_self_adjoint(t, tol)? {
        return Err(Error::invalid("operator is not symmetric and self-adjoint"));
    }
    if rep.status != Status::Complete {
        return Err(Error::invalid("Schmidt representation is not complete"));
    }
    let check = verify_representation(t, rep, tol)?;
    if !check.passed() {
        return Err(Error::invalid(format!(
            "Schmidt representation does not verify (residual {:.3e})",
            check.residual
        )));
    }

    let mut terms = Vec::with_capacity(rep.terms.len());
    for (i, term) in rep.terms.iter().enumerate() {
        let s1 = vecops::dot(&term.y, &term.x);
        let s2 = vecops::dot(&term.z, &term.x);
        if (s1.abs() - 1.0).abs() > tol || (s2.abs() - 1.0).abs() > tol {
            return Err(Error::Inconsistent(format!(
                "term {i}: <y,x> = {s1}, <z,x> = {s2}; expected ±1"
            )));
        }
        terms.push(canonical_term(s1.signum() * s2.signum() * term.tau, term.x.clone()));
    }
    terms.sort_by(|a, b| {
        b.lambda
            .abs()
            .total_cmp(&a.lambda.abs())
            .then_with(|| b.lambda.total_cmp(&a.lambda))
            .then_with(|| vecops::lex_cmp(&a.x, &b.x))
    });
    Ok(SchurRepresentation { n, terms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    pub residual: f64,
    pub residual_ok: bool,
    pub orthonormal_deviation: f64,
    pub orthonormal: bool,
    pub monotone: bool,
}

impl SchurReport {
    pub fn passed(&self) -> bool {
        self.residual_ok && self.orthonormal && self.monotone
    }
}

pub fn verify_schur(t: &Tensor3, schur: &SchurRepresentation, tol: f64) -> Result<SchurReport> {
    let n = square_dims(t)?;
    if n != schur.n {
        return Err(Error::invalid(format!(
            "Schur dimension {} does not match {n}",
            schur.n
        )));
    }
    let residual = t.sub(&schur.to_tensor()?)?.hs_norm();
    let orthonormal_deviation = gram_deviation(schur.terms.iter().map(|t| t.x.as_slice()));
    let monotone = schur.terms.windows(2).all(|w| w[0].lambda.abs() >= w[1].lambda.abs());
    Ok(SchurReport {
        residual,
        residual_ok: residual <= tol,
        orthonormal_deviation,
        orthonormal: orthonormal_deviation <= ORTHONORMAL_TOL,
        monotone,
    })
}
