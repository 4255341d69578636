//! Plain-text rendering of reports.

use std::fmt::Write;

use bilinear_core::{canonicalize, SingularTriple};

use crate::report::{Payload, Report, Status};

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|a| format!("{:.6}", a + 0.0)).collect();
    format!("({})", parts.join(", "))
}

fn triple_lines(out: &mut String, indent: &str, tr: &SingularTriple) {
    let tr = canonicalize(tr).unwrap_or_else(|_| tr.clone());
    let _ = writeln!(out, "{indent}x = {}", vector(&tr.x));
    let _ = writeln!(out, "{indent}y = {}", vector(&tr.y));
    let _ = writeln!(out, "{indent}z = {}", vector(&tr.z));
}

pub fn render(report: &Report) -> String {
    let mut out = String::new();
    if let Some(input) = &report.input {
        let [n1, n2, n3] = input.dims;
        let name = input.name.as_deref().unwrap_or("<unnamed>");
        let _ = writeln!(out, "input: {name} ({n1}x{n2}x{n3})");
    }
    let status = match report.status {
        Status::Ok => "ok",
        Status::Failed => "failed",
        Status::Error => "error",
    };
    let _ = writeln!(out, "{}: {status}", report.command);
    if let Some(msg) = &report.message {
        let _ = writeln!(out, "message: {msg}");
    }
    match &report.result {
        None => {}
        Some(Payload::Norm(n)) => {
            let _ = writeln!(out, "bilinear_norm: {:.12}", n.bilinear_norm);
            let _ = writeln!(out, "hs_norm: {:.12}", n.hs_norm);
            if let Some(tr) = &n.maximizer {
                triple_lines(&mut out, "  ", tr);
            }
        }
        Some(Payload::Spectrum(s)) => {
            let _ = writeln!(out, "triples: {} (complete: {})", s.entries.len(), s.complete);
            for (i, e) in s.entries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "[{i}] tau = {:.12}  ordered = {}  slice residual = {:.3e}",
                    e.triple.tau,
                    e.ordered.ordered,
                    e.ordered.max_residual()
                );
                triple_lines(&mut out, "    ", &e.triple);
            }
        }
        Some(Payload::Schmidt(s)) => {
            let rep = &s.representation;
            let _ = writeln!(out, "terms: {}", rep.terms.len());
            for (i, term) in rep.terms.iter().enumerate() {
                let _ = writeln!(out, "[{i}] tau = {:.12}", term.tau);
                let _ = writeln!(out, "    x = {}", vector(&term.x));
                let _ = writeln!(out, "    y = {}", vector(&term.y));
                let _ = writeln!(out, "    z = {}", vector(&term.z));
            }
            let _ = writeln!(out, "reconstruction residual: {:.3e}", rep.reconstruction_residual);
            if let Some(v) = &s.verification {
                let _ = writeln!(out, "verification: {}", if v.passed() { "pass" } else { "fail" });
            }
            if let Some(f) = &s.deflation.failure {
                let _ = writeln!(
                    out,
                    "failure: step {} {:?}, tau = {:.12}, ordered residual = {:.3e}",
                    f.step + 1,
                    f.reason,
                    f.triple.as_ref().map_or(0.0, |t| t.tau),
                    f.ordered.as_ref().map_or(0.0, |o| o.max_residual())
                );
            }
        }
        Some(Payload::Schur(s)) => {
            let _ = writeln!(out, "symmetric: {}  self_adjoint: {}", s.symmetric, s.self_adjoint);
            if let Some(rep) = &s.representation {
                for (i, term) in rep.terms.iter().enumerate() {
                    let _ = writeln!(out, "[{i}] lambda = {:.12}  x = {}", term.lambda, vector(&term.x));
                }
            }
            if let Some(v) = &s.verification {
                let _ = writeln!(
                    out,
                    "reconstruction residual: {:.3e} ({})",
                    v.residual,
                    if v.passed() { "pass" } else { "fail" }
                );
            }
        }
        Some(Payload::Verify(v)) => {
            for (i, e) in v.entries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "[{i}] tau = {:.12}  verified = {}  residuals = ({:.3e}, {:.3e}, {:.3e})",
                    e.tau, e.verified, e.residuals.r1, e.residuals.r2, e.residuals.r3
                );
                if let Some(o) = &e.ordered {
                    let _ = writeln!(
                        out,
                        "    ordered = {}  slice residual = {:.3e}",
                        o.ordered,
                        o.max_residual()
                    );
                }
                if let Some(s) = e.stationarity {
                    let _ = writeln!(out, "    stationarity = {s:.3e}");
                }
            }
            let _ = writeln!(out, "all verified: {}", v.all_verified);
        }
    }
    out
}
