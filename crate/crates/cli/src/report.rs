//! JSON renderings of library results. Subsets and vector indices are 1-based.

use nalgebra::DMatrix;
use serde_json::{json, Value};
use simsim_core::numkernel::{CharPoly, FloatCharPoly};
use simsim_core::theorem::{
    ConditionReport, Diagnostics, InnerRoute, PolyPair, Residuals, SimilarityCertificate,
    VerificationReport,
};

fn one_based(indices: &[usize]) -> Value {
    json!(indices.iter().map(|i| i + 1).collect::<Vec<_>>())
}

pub fn exact_poly(p: &CharPoly) -> Value {
    json!({
        "coeffs": p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "text": p.to_string(),
    })
}

fn float_poly(p: &FloatCharPoly, spectrum: &[f64]) -> Value {
    json!({ "coeffs": p.coeffs, "spectrum": spectrum })
}

pub fn condition_report(report: &ConditionReport) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            let mut entry = json!({ "subset": one_based(&c.subset), "equal": c.equal });
            match &c.polys {
                PolyPair::Exact { left, right } => {
                    entry["left"] = exact_poly(left);
                    entry["right"] = exact_poly(right);
                }
                PolyPair::Float {
                    left,
                    right,
                    left_spectrum,
                    right_spectrum,
                    deviation,
                    tol,
                } => {
                    entry["left"] = float_poly(left, left_spectrum);
                    entry["right"] = float_poly(right, right_spectrum);
                    entry["deviation"] = json!(deviation);
                    entry["tol"] = json!(tol);
                }
            }
            entry
        })
        .collect();
    json!({
        "verdict": report.verdict,
        "rule": report.rule.as_str(),
        "arithmetic": if report.exact { "exact" } else { "float" },
        "witness": report.witness().map(|w| one_based(&w.subset)),
        "checks": checks,
    })
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    json!(m
        .row_iter()
        .map(|r| r.iter().copied().collect::<Vec<f64>>())
        .collect::<Vec<_>>())
}

pub fn residuals(r: &Residuals) -> Value {
    json!({ "orth": r.orth, "sim": r.sim, "map": r.map })
}

pub fn certificate(cert: &SimilarityCertificate, seed: u64) -> Value {
    json!({
        "Q": matrix(&cert.q.q),
        "residuals": residuals(&cert.residuals),
        "bound": cert.bound,
        "pass": true,
        "seed": seed,
    })
}

pub fn verification(report: &VerificationReport) -> Value {
    json!({
        "residuals": residuals(&report.residuals),
        "bound": report.bound,
        "pass": report.pass,
    })
}

pub fn diagnostics(d: &Diagnostics) -> Value {
    let norms: Vec<Value> = d
        .norms
        .iter()
        .map(|r| {
            json!({
                "cluster": r.cluster + 1,
                "lambda": r.lambda,
                "index": r.index + 1,
                "left": r.left,
                "right": r.right,
                "equal": r.equal,
            })
        })
        .collect();
    let inner_rows: Vec<Value> = d
        .inner
        .rows
        .iter()
        .map(|r| {
            json!({
                "cluster": r.cluster + 1,
                "lambda": r.lambda,
                "pair": [r.i + 1, r.j + 1],
                "left": r.left,
                "right": r.right,
                "equal": r.equal,
            })
        })
        .collect();
    let resolutions: Vec<Value> = d
        .inner
        .resolutions
        .iter()
        .map(|(i, j, outcome)| match outcome {
            Ok(res) => json!({ "pair": [i + 1, j + 1], "resolution": res.as_str() }),
            Err(e) => json!({ "pair": [i + 1, j + 1], "resolution": null, "error": e.to_string() }),
        })
        .collect();
    let moments: Vec<Value> = d
        .moments
        .iter()
        .map(|r| {
            json!({
                "pair": [r.i + 1, r.j + 1],
                "left": r.left,
                "right": r.right,
                "identity_error": r.identity_error,
                "equal": r.equal,
            })
        })
        .collect();
    let wa: Vec<Value> =
        d.wa.iter()
            .map(|r| {
                json!({
                    "pair": [r.i + 1, r.j + 1],
                    "left_error": r.left_error,
                    "right_error": r.right_error,
                    "cross_error": r.cross_error,
                    "equal": r.equal,
                })
            })
            .collect();
    json!({
        "lambdas": d.lambdas,
        "mults": d.mults,
        "norms": norms,
        "inner": {
            "route": match d.inner.route {
                InnerRoute::Polarization => "polarization",
                InnerRoute::Direct => "direct",
            },
            "tol": d.inner.tol,
            "rows": inner_rows,
            "resolutions": resolutions,
        },
        "moments": moments,
        "wa": wa,
    })
}

pub fn error(kind: &str, message: &str) -> Value {
    json!({ "error": kind, "message": message })
}
