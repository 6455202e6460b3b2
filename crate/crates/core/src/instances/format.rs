use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{Map, Number, Value};

use super::InstanceError;
use crate::numkernel::{RationalMatrix, RationalVector};
use crate::theorem::{Mode, PerturbationInstance};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => crate::numkernel::rational_to_f64(q),
            Scalar::Float(x) => *x,
        }
    }
}

/// Parses `"p"`, `"p/q"` or a decimal such as `"-0.125"` / `"1.5e-3"` into an exact rational.
pub fn parse_rational(token: &str) -> Result<BigRational, String> {
    let token = token.trim();
    if let Some((p, q)) = token.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| format!("bad numerator in `{token}`"))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| format!("bad denominator in `{token}`"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in `{token}`"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match token.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = token[pos + 1..]
                .parse()
                .map_err(|_| format!("bad exponent in `{token}`"))?;
            (&token[..pos], e)
        }
        None => (token, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    let digits = format!("{int_digits}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("`{token}` is not a number"));
    }
    if exponent.unsigned_abs() > 10_000 {
        return Err(format!("exponent out of range in `{token}`"));
    }
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).expect("ascii digits"));
    let shift = exponent - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    let power = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= power;
    } else {
        value /= power;
    }
    Ok(if negative { -value } else { value })
}

/// `"p/q"` in lowest terms, or a JSON integer when the value is an integer fitting `i64`.
pub fn rational_to_json(q: &BigRational) -> Value {
    if q.denom().is_one() {
        if let Some(i) = q.numer().to_i64() {
            return Value::Number(i.into());
        }
        return Value::String(q.numer().to_string());
    }
    Value::String(format!("{}/{}", q.numer(), q.denom()))
}

fn scalar(value: &Value, path: &str) -> Result<Scalar, InstanceError> {
    let bad = |msg: String| InstanceError::Entry {
        path: path.to_string(),
        msg,
    };
    match value {
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                Ok(Scalar::Exact(BigRational::from_integer(i.into())))
            } else if let Some(u) = num.as_u64() {
                Ok(Scalar::Exact(BigRational::from_integer(u.into())))
            } else {
                let x = num
                    .as_f64()
                    .ok_or_else(|| bad("unrepresentable number".into()))?;
                if !x.is_finite() {
                    return Err(bad("non-finite number".into()));
                }
                Ok(Scalar::Float(x))
            }
        }
        Value::String(s) => parse_rational(s).map(Scalar::Exact).map_err(bad),
        other => Err(bad(format!(
            "expected a number or rational string, got {other}"
        ))),
    }
}

fn array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, InstanceError> {
    value.as_array().ok_or_else(|| InstanceError::Entry {
        path: path.to_string(),
        msg: "expected an array".into(),
    })
}

fn matrix(value: &Value, name: &str) -> Result<Vec<Vec<Scalar>>, InstanceError> {
    array(value, name)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let path = format!("{name}[{i}]");
            array(row, &path)?
                .iter()
                .enumerate()
                .map(|(j, x)| scalar(x, &format!("{path}[{j}]")))
                .collect()
        })
        .collect()
}

fn square(rows: &[Vec<Scalar>], name: &str) -> Result<usize, InstanceError> {
    let n = rows.len();
    if n == 0 {
        return Err(InstanceError::Schema(format!("{name} is empty")));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(InstanceError::Schema(format!(
            "{name}[{i}] has {} entries, expected {n}",
            row.len()
        )));
    }
    Ok(n)
}

/// Reads an instance file.
///
/// The payload is exact when every entry is an integer or a rational string; a single
/// JSON float anywhere makes the whole instance a float instance.
pub fn parse_instance(text: &str) -> Result<PerturbationInstance, InstanceError> {
    let root: Value = serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| InstanceError::Schema("top level must be an object".into()))?;
    let field = |key: &str| {
        obj.get(key)
            .ok_or_else(|| InstanceError::Schema(format!("missing field `{key}`")))
    };
    match field("schema")?.as_u64() {
        Some(SCHEMA_VERSION) => {}
        _ => {
            return Err(InstanceError::Schema(format!(
                "unsupported schema, expected {SCHEMA_VERSION}"
            )))
        }
    }
    let mode: Mode = field("mode")?
        .as_str()
        .ok_or_else(|| InstanceError::Schema("`mode` must be a string".into()))?
        .parse()
        .map_err(InstanceError::Schema)?;
    let a = matrix(field("A")?, "A")?;
    let b = matrix(field("B")?, "B")?;
    let alphas = matrix(field("alphas")?, "alphas")?;
    let betas = matrix(field("betas")?, "betas")?;
    square(&a, "A")?;
    square(&b, "B")?;

    let exact = [&a, &b, &alphas, &betas]
        .iter()
        .all(|rows| rows.iter().flatten().all(|x| matches!(x, Scalar::Exact(_))));
    let inst = if exact {
        let unwrap = |rows: Vec<Vec<Scalar>>| -> Vec<RationalVector> {
            rows.into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|x| match x {
                            Scalar::Exact(q) => q,
                            Scalar::Float(_) => unreachable!("payload checked exact"),
                        })
                        .collect()
                })
                .collect()
        };
        PerturbationInstance::from_exact(
            mode,
            RationalMatrix::from_rows(unwrap(a))?,
            RationalMatrix::from_rows(unwrap(b))?,
            unwrap(alphas),
            unwrap(betas),
        )?
    } else {
        let dense = |rows: &[Vec<Scalar>]| {
            DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j].to_f64())
        };
        let vecs = |rows: &[Vec<Scalar>]| -> Vec<DVector<f64>> {
            rows.iter()
                .map(|r| DVector::from_iterator(r.len(), r.iter().map(Scalar::to_f64)))
                .collect()
        };
        PerturbationInstance::from_float(
            mode,
            dense(&a),
            dense(&b),
            vecs(&alphas),
            vecs(&betas),
            crate::Tolerances::default().sym,
        )?
    };
    Ok(inst)
}

fn float_to_json(x: f64) -> Value {
    Value::Number(Number::from_f64(x).expect("instance entries are finite"))
}

fn json_rows(rows: impl Iterator<Item = Vec<Value>>) -> Value {
    Value::Array(rows.map(Value::Array).collect())
}

/// JSON value of an instance: rational payloads as integers and `"p/q"` strings, float
/// payloads as JSON floats.
pub fn instance_to_json(inst: &PerturbationInstance) -> Value {
    let mut obj = Map::new();
    obj.insert("schema".into(), Value::Number(SCHEMA_VERSION.into()));
    obj.insert("mode".into(), Value::String(inst.mode.as_str().into()));
    match inst.exact() {
        Some(data) => {
            let mat = |m: &RationalMatrix| {
                json_rows(m.rows().map(|r| r.iter().map(rational_to_json).collect()))
            };
            let vecs = |vs: &[RationalVector]| {
                json_rows(vs.iter().map(|v| v.iter().map(rational_to_json).collect()))
            };
            obj.insert("A".into(), mat(&data.a));
            obj.insert("B".into(), mat(&data.b));
            obj.insert("alphas".into(), vecs(&data.alphas));
            obj.insert("betas".into(), vecs(&data.betas));
        }
        None => {
            let mat = |m: &DMatrix<f64>| {
                json_rows(
                    m.row_iter()
                        .map(|r| r.iter().map(|x| float_to_json(*x)).collect()),
                )
            };
            let vecs = |vs: &[DVector<f64>]| {
                json_rows(
                    vs.iter()
                        .map(|v| v.iter().map(|x| float_to_json(*x)).collect()),
                )
            };
            obj.insert("A".into(), mat(&inst.a));
            obj.insert("B".into(), mat(&inst.b));
            obj.insert("alphas".into(), vecs(&inst.alphas));
            obj.insert("betas".into(), vecs(&inst.betas));
        }
    }
    Value::Object(obj)
}

/// Canonical text of an instance: fixed key order and one matrix row or vector per line.
pub fn serialize_instance(inst: &PerturbationInstance) -> String {
    let value = instance_to_json(inst);
    let mut out = String::from("{\n");
    let keys = ["schema", "mode", "A", "B", "alphas", "betas"];
    for (idx, key) in keys.iter().enumerate() {
        out.push_str(&format!("  \"{key}\": "));
        out.push_str(&render_compact_rows(&value[*key]));
        out.push_str(if idx + 1 < keys.len() { ",\n" } else { "\n" });
    }
    out.push_str("}\n");
    out
}

/// Arrays of arrays go one inner array per line; everything else on one line.
pub fn render_compact_rows(value: &Value) -> String {
    match value {
        Value::Array(rows) if rows.iter().all(Value::is_array) && !rows.is_empty() => {
            let lines: Vec<String> = rows
                .iter()
                .map(|r| format!("    {}", serde_json::to_string(r).expect("json value")))
                .collect();
            format!("[\n{}\n  ]", lines.join(",\n"))
        }
        other => serde_json::to_string(other).expect("json value"),
    }
}
