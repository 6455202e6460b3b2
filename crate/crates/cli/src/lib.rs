//! Command-line front end: decide, construct, verify, gen, diag and charpoly over JSON
//! instance files.
//!
//! Every `cmd_*` function takes input text and returns the exit code together with the
//! text destined for stdout and stderr, so the binary only moves bytes.

pub mod args;
pub mod report;

use nalgebra::DMatrix;
use serde_json::Value;
use simsim_core::instances::{
    gen_adversarial_instance, gen_disjoint_support_instance, gen_positive_instance, parse_instance,
    parse_rational, serialize_instance, GenSpec, InstanceError,
};
use simsim_core::numkernel::{charpoly_exact, RationalMatrix};
use simsim_core::theorem::{
    check_condition, construct_q, diagnose, fmt_subset, verify_certificate, Mode,
    PerturbationInstance, TheoremError,
};
use simsim_core::Tolerances;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Yes = 0,
    No = 1,
    InputError = 2,
    Internal = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CmdOutput {
    pub exit: Exit,
    pub stdout: String,
    pub stderr: String,
}

impl CmdOutput {
    fn json(exit: Exit, value: &Value) -> Self {
        Self {
            exit,
            stdout: pretty(value),
            stderr: String::new(),
        }
    }

    fn failure(exit: Exit, kind: &str, message: String) -> Self {
        Self {
            exit,
            stdout: pretty(&report::error(kind, &message)),
            stderr: format!("error: {message}\n"),
        }
    }

    pub fn json_value(&self) -> Value {
        serde_json::from_str(&self.stdout).expect("commands emit JSON")
    }
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value");
    s.push('\n');
    s
}

/// Which arithmetic decisions use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Arithmetic {
    /// Exact when the payload is rational, float otherwise.
    #[default]
    Auto,
    /// Converts float payloads to their exact dyadic values.
    Exact,
    Float,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Options {
    pub mode: Option<Mode>,
    pub arithmetic: Arithmetic,
    pub tols: Tolerances,
}

fn load(text: &str, opts: &Options) -> Result<PerturbationInstance, CmdOutput> {
    let input_error =
        |e: InstanceError| CmdOutput::failure(Exit::InputError, "input", e.to_string());
    let mut inst = parse_instance(text).map_err(input_error)?;
    if let Some(mode) = opts.mode {
        inst = inst.with_mode(mode).map_err(|e| input_error(e.into()))?;
    }
    inst = match opts.arithmetic {
        Arithmetic::Auto => inst,
        Arithmetic::Exact => inst.into_exact().map_err(|e| input_error(e.into()))?,
        Arithmetic::Float => inst.into_float(),
    };
    Ok(inst)
}

fn classify(e: &TheoremError) -> (Exit, &'static str) {
    match e {
        TheoremError::ConditionFails { .. } => (Exit::No, "condition"),
        TheoremError::Negative { .. }
        | TheoremError::OrderMismatch { .. }
        | TheoremError::FamilySizeMismatch { .. }
        | TheoremError::VectorLength { .. }
        | TheoremError::CertificateOrder { .. }
        | TheoremError::IndexOutOfRange { .. }
        | TheoremError::Num(_) => (Exit::InputError, "input"),
        _ => (Exit::Internal, "internal"),
    }
}

fn theorem_failure(e: TheoremError) -> CmdOutput {
    let (exit, kind) = classify(&e);
    CmdOutput::failure(exit, kind, e.to_string())
}

/// Exit 0 when every subset check passes, 1 otherwise; the report lists every check.
pub fn cmd_decide(text: &str, opts: &Options) -> CmdOutput {
    let inst = match load(text, opts) {
        Ok(inst) => inst,
        Err(out) => return out,
    };
    match check_condition(&inst, &opts.tols) {
        Ok(rep) => {
            let exit = if rep.verdict { Exit::Yes } else { Exit::No };
            let mut out = CmdOutput::json(exit, &report::condition_report(&rep));
            if let Some(w) = rep.witness() {
                out.stderr = format!(
                    "similarity condition fails at subset {}\n",
                    fmt_subset(&w.subset)
                );
            }
            out
        }
        Err(e) => theorem_failure(e),
    }
}

/// Emits a certificate; exit 1 names the failing subset, exit 3 flags numerical
/// inconsistencies after a positive decision.
pub fn cmd_construct(text: &str, opts: &Options, seed: u64) -> CmdOutput {
    let inst = match load(text, opts) {
        Ok(inst) => inst,
        Err(out) => return out,
    };
    match construct_q(&inst, &opts.tols, seed) {
        Ok(cert) => CmdOutput::json(Exit::Yes, &report::certificate(&cert, seed)),
        Err(TheoremError::ConditionFails { subset }) => {
            let message = format!(
                "similarity condition fails at subset {}",
                fmt_subset(&subset)
            );
            let mut value = report::error("condition", &message);
            value["witness"] = serde_json::json!(subset.iter().map(|i| i + 1).collect::<Vec<_>>());
            CmdOutput {
                exit: Exit::No,
                stdout: pretty(&value),
                stderr: format!("{message}\n"),
            }
        }
        Err(e) => theorem_failure(e),
    }
}

fn parse_q(text: &str) -> Result<DMatrix<f64>, String> {
    let root: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let rows = root
        .get("Q")
        .and_then(Value::as_array)
        .ok_or("certificate needs an array field `Q`")?;
    let n = rows.len();
    let mut q = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or(format!("Q[{i}] is not an array"))?;
        if row.len() != n {
            return Err(format!("Q[{i}] has {} entries, expected {n}", row.len()));
        }
        for (j, x) in row.iter().enumerate() {
            q[(i, j)] = match x {
                Value::Number(num) => num.as_f64().ok_or(format!("Q[{i}][{j}] is not finite"))?,
                Value::String(s) => {
                    let r = parse_rational(s).map_err(|e| format!("Q[{i}][{j}]: {e}"))?;
                    simsim_core::numkernel::rational_to_f64(&r)
                }
                _ => return Err(format!("Q[{i}][{j}] is not a number")),
            };
        }
    }
    Ok(q)
}

/// Exit 0 iff the certificate's residuals are within the bound.
pub fn cmd_verify(instance_text: &str, cert_text: &str, opts: &Options) -> CmdOutput {
    let inst = match load(instance_text, opts) {
        Ok(inst) => inst,
        Err(out) => return out,
    };
    let q = match parse_q(cert_text) {
        Ok(q) => q,
        Err(msg) => return CmdOutput::failure(Exit::InputError, "input", msg),
    };
    match verify_certificate(&inst, &q, &opts.tols) {
        Ok(rep) => {
            let exit = if rep.pass { Exit::Yes } else { Exit::No };
            CmdOutput::json(exit, &report::verification(&rep))
        }
        Err(e) => theorem_failure(e),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GenKind {
    #[default]
    Positive,
    Adversarial,
    DisjointSupport,
}

/// Writes a generated instance in canonical form.
pub fn cmd_gen(spec: &GenSpec, kind: GenKind) -> CmdOutput {
    let result = match kind {
        GenKind::Positive => gen_positive_instance(spec),
        GenKind::Adversarial => gen_adversarial_instance(spec),
        GenKind::DisjointSupport => gen_disjoint_support_instance(spec),
    };
    match result {
        Ok(inst) => CmdOutput {
            exit: Exit::Yes,
            stdout: serialize_instance(&inst),
            stderr: String::new(),
        },
        Err(e) => CmdOutput::failure(Exit::InputError, "input", e.to_string()),
    }
}

/// Projection norms, inner products, moments and the rank-two determinant check.
pub fn cmd_diag(text: &str, opts: &Options) -> CmdOutput {
    let inst = match load(text, opts) {
        Ok(inst) => inst,
        Err(out) => return out,
    };
    match diagnose(&inst, &opts.tols) {
        Ok(d) => CmdOutput::json(Exit::Yes, &report::diagnostics(&d)),
        Err(e @ TheoremError::MultiplicityMismatch { .. }) => {
            CmdOutput::failure(Exit::No, "not_similar", e.to_string())
        }
        Err(e) => theorem_failure(e),
    }
}

/// Exact characteristic polynomials of `A` and `B` of an instance, or of a bare matrix
/// given as an array of rows. Float entries enter with their exact binary values.
pub fn cmd_charpoly(text: &str, opts: &Options) -> CmdOutput {
    let root: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            return CmdOutput::failure(Exit::InputError, "input", format!("malformed JSON: {e}"))
        }
    };
    if root.is_array() {
        let wrapped = serde_json::json!({
            "schema": 1, "mode": "general", "A": root, "B": root, "alphas": [], "betas": []
        });
        let inst = match load(&wrapped.to_string(), opts) {
            Ok(inst) => inst,
            Err(out) => return out,
        };
        return match exact_polys(inst) {
            Ok((a, _)) => CmdOutput::json(Exit::Yes, &serde_json::json!({ "charpoly": a })),
            Err(out) => out,
        };
    }
    let inst = match load(text, opts) {
        Ok(inst) => inst,
        Err(out) => return out,
    };
    match exact_polys(inst) {
        Ok((a, b)) => CmdOutput::json(
            Exit::Yes,
            &serde_json::json!({ "A": a, "B": b, "similar": a == b }),
        ),
        Err(out) => out,
    }
}

fn exact_polys(inst: PerturbationInstance) -> Result<(Value, Value), CmdOutput> {
    let inst = inst.into_exact().map_err(theorem_failure)?;
    let data = inst.exact().expect("converted to exact");
    let poly = |m: &RationalMatrix| report::exact_poly(&charpoly_exact(m));
    Ok((poly(&data.a), poly(&data.b)))
}
