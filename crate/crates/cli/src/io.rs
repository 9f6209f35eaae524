//! JSON formats for instances, certificates and hierarchies.
//!
//! Output is canonical: object keys sorted, rationals as reduced `"p/q"`
//! strings, matrices as 1-based upper-triangle triplets in row-major order.

use std::collections::BTreeSet;

use khier_core::hierarchy::{DerivedQuadratic, ExponentHierarchy, ExponentMethod, LinearForm, QuadraticKind};
use khier_core::instance::SdpSystem;
use khier_core::reduce::FrCertificate;
use khier_core::scalar::{format_float, format_rational, parse_float, parse_rational, Float, Rational};
use khier_core::symmat::{Matrix, SymMatrix};
use serde_json::{json, Map, Value};

use crate::CliError;

/// Significant digits for congruence entries.
pub const CONGRUENCE_DIGITS: usize = 40;

fn parse_err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("{path}: {msg}"))
}

pub fn rational_json(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn rationals_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_json).collect())
}

pub fn triplets_json(m: &SymMatrix<Rational>) -> Value {
    Value::Array(
        m.triplets()
            .into_iter()
            .map(|(i, j, v)| json!([i + 1, j + 1, format_rational(&v)]))
            .collect(),
    )
}

fn rational_matrix_json(m: &Matrix<Rational>) -> Value {
    Value::Array((0..m.rows()).map(|i| rationals_json(m.row(i))).collect())
}

fn float_matrix_json(m: &Matrix<Float>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|x| Value::String(format_float(x, CONGRUENCE_DIGITS))).collect()))
            .collect(),
    )
}

fn depth(v: &Value) -> usize {
    match v {
        Value::Array(a) => 1 + a.iter().map(depth).max().unwrap_or(0),
        Value::Object(o) => 1 + o.values().map(depth).max().unwrap_or(0),
        _ => 0,
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Object(o) if !o.is_empty() => {
            out.push_str("{\n");
            for (i, (key, val)) in o.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                render(val, indent + 1, out);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        Value::Array(a) if depth(v) >= 3 => {
            out.push_str("[\n");
            for (i, val) in a.iter().enumerate() {
                out.push_str(&pad);
                render(val, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        _ => out.push_str(&v.to_string()),
    }
}

/// Objects expanded one key per line, arrays inlined up to matrix depth.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = String::new();
    render(v, 0, &mut s);
    s.push('\n');
    s
}

pub fn instance_json(sys: &SdpSystem) -> Value {
    json!({
        "n": sys.n(),
        "m": sys.m(),
        "A": sys.a().iter().map(triplets_json).collect::<Vec<_>>(),
        "B": triplets_json(sys.b()),
        "fixed_tail": sys.fixed_tail().map(rationals_json).unwrap_or(Value::Null),
        "label": sys.label(),
    })
}

pub fn instance_to_string(sys: &SdpSystem) -> String {
    to_canonical_string(&instance_json(sys))
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| parse_err(path, format!("missing field \"{key}\"")))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, CliError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(path, "expected a nonnegative integer"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| parse_err(path, "expected an array"))
}

pub fn parse_rational_value(v: &Value, path: &str) -> Result<Rational, CliError> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| parse_err(path, format!("invalid rational \"{s}\""))),
        Value::Number(n) if n.is_i64() => Ok(Rational::from(n.as_i64().unwrap_or_default())),
        _ => Err(parse_err(path, "expected a rational string \"p/q\"")),
    }
}

fn parse_rationals(v: &Value, path: &str) -> Result<Vec<Rational>, CliError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_rational_value(x, &format!("{path}[{i}]")))
        .collect()
}

pub fn parse_triplets(v: &Value, n: usize, path: &str) -> Result<SymMatrix<Rational>, CliError> {
    let mut m = SymMatrix::zeros(n);
    let mut seen = BTreeSet::new();
    for (idx, t) in as_array(v, path)?.iter().enumerate() {
        let p = format!("{path}[{idx}]");
        let t = as_array(t, &p)?;
        if t.len() != 3 {
            return Err(parse_err(&p, "expected [row, col, value]"));
        }
        let i = as_usize(&t[0], &format!("{p}[0]"))?;
        let j = as_usize(&t[1], &format!("{p}[1]"))?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(parse_err(&p, format!("index ({i}, {j}) outside 1..={n}")));
        }
        if i > j {
            return Err(parse_err(&p, format!("entry ({i}, {j}) below the diagonal; only the upper triangle is stored")));
        }
        if !seen.insert((i, j)) {
            return Err(parse_err(&p, format!("duplicate entry ({i}, {j})")));
        }
        m.set(i - 1, j - 1, parse_rational_value(&t[2], &format!("{p}[2]"))?);
    }
    Ok(m)
}

fn parse_json(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

pub fn parse_instance(text: &str) -> Result<SdpSystem, CliError> {
    let v = parse_json(text)?;
    let obj = v.as_object().ok_or_else(|| parse_err("$", "expected an object"))?;
    let n = as_usize(get(obj, "n", "$")?, "$.n")?;
    let m = as_usize(get(obj, "m", "$")?, "$.m")?;
    let a_list = as_array(get(obj, "A", "$")?, "$.A")?;
    if a_list.len() != m {
        return Err(parse_err("$.A", format!("{} matrices, expected m = {m}", a_list.len())));
    }
    let a = a_list
        .iter()
        .enumerate()
        .map(|(i, t)| parse_triplets(t, n, &format!("$.A[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let b = match obj.get("B") {
        Some(t) => parse_triplets(t, n, "$.B")?,
        None => SymMatrix::zeros(n),
    };
    let tail = match obj.get("fixed_tail") {
        None | Some(Value::Null) => None,
        Some(t) => Some(parse_rationals(t, "$.fixed_tail")?),
    };
    let label = match obj.get("label") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(parse_err("$.label", "expected a string")),
    };
    Ok(SdpSystem::new(a, b, tail, label)?)
}

pub fn certificate_json(cert: &FrCertificate, round_trip_error: Option<f64>) -> Value {
    json!({
        "k": cert.k,
        "r": cert.r,
        "row_ops": rational_matrix_json(&cert.row_ops),
        "basis": rational_matrix_json(&cert.basis),
        "scaling": cert.scaling.iter().map(|x| format_float(x, CONGRUENCE_DIGITS)).collect::<Vec<_>>(),
        "congruences": cert.congruences().iter().map(float_matrix_json).collect::<Vec<_>>(),
        "flags": { "heuristic": cert.heuristic, "ambiguous": cert.ambiguous },
        "kernel_witness": cert.kernel_witness.as_ref().map(|w| json!({ "n": w.n(), "entries": triplets_json(w) })),
        "residual_pd_witness": cert.residual_pd_witness.as_deref().map(rationals_json),
        "round_trip_error": round_trip_error.map(|e| format!("{e:.16e}")),
    })
}

fn parse_rational_matrix(v: &Value, path: &str) -> Result<Matrix<Rational>, CliError> {
    let rows = as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, r)| parse_rationals(r, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(&rows).map_err(|e| parse_err(path, e))
}

pub fn parse_certificate(text: &str) -> Result<FrCertificate, CliError> {
    let v = parse_json(text)?;
    let obj = v.as_object().ok_or_else(|| parse_err("$", "expected an object"))?;
    let k = as_usize(get(obj, "k", "$")?, "$.k")?;
    let r = as_array(get(obj, "r", "$")?, "$.r")?
        .iter()
        .enumerate()
        .map(|(i, x)| as_usize(x, &format!("$.r[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let row_ops = parse_rational_matrix(get(obj, "row_ops", "$")?, "$.row_ops")?;
    let basis = parse_rational_matrix(get(obj, "basis", "$")?, "$.basis")?;
    let scaling = as_array(get(obj, "scaling", "$")?, "$.scaling")?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .and_then(parse_float)
                .ok_or_else(|| parse_err(&format!("$.scaling[{i}]"), "expected a decimal string"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let flags = get(obj, "flags", "$")?;
    let flag = |name: &str| flags.get(name).and_then(Value::as_bool).unwrap_or(false);
    let kernel_witness = match obj.get("kernel_witness") {
        None | Some(Value::Null) => None,
        Some(w) => {
            let n = as_usize(w.get("n").unwrap_or(&Value::Null), "$.kernel_witness.n")?;
            Some(parse_triplets(w.get("entries").unwrap_or(&Value::Null), n, "$.kernel_witness.entries")?)
        }
    };
    let residual_pd_witness = match obj.get("residual_pd_witness") {
        None | Some(Value::Null) => None,
        Some(w) => Some(parse_rationals(w, "$.residual_pd_witness")?),
    };
    Ok(FrCertificate {
        k,
        r,
        row_ops,
        basis,
        scaling,
        heuristic: flag("heuristic"),
        ambiguous: flag("ambiguous"),
        kernel_witness,
        residual_pd_witness,
    })
}

pub fn method_name(m: ExponentMethod) -> &'static str {
    match m {
        ExponentMethod::Recursion => "recursion",
        ExponentMethod::FourierMotzkin => "fourier-motzkin",
        ExponentMethod::MinimalClosedForm => "minimal",
    }
}

pub fn hierarchy_json(h: &ExponentHierarchy) -> Value {
    json!({ "alpha": rationals_json(h.alpha()), "method": method_name(h.method) })
}

fn form_json(f: &LinearForm) -> Value {
    let coeffs: Map<String, Value> =
        f.coeffs.iter().map(|(i, c)| (format!("x{i}"), rational_json(c))).collect();
    json!({ "coeffs": coeffs, "constant": rational_json(&f.constant) })
}

/// `2x3 - x4 + 1` style rendering.
pub fn form_text(f: &LinearForm) -> String {
    let mut parts: Vec<String> = f
        .coeffs
        .iter()
        .map(|(i, c)| match format_rational(c).as_str() {
            "1" => format!("x{i}"),
            "-1" => format!("-x{i}"),
            s => format!("{s}*x{i}"),
        })
        .collect();
    if !f.constant.is_zero() || parts.is_empty() {
        parts.push(format_rational(&f.constant));
    }
    parts.join(" + ").replace("+ -", "- ")
}

fn plus_form(lead: String, f: &LinearForm) -> String {
    if f.is_zero() {
        lead
    } else {
        format!("{lead} + {}", form_text(f)).replace("+ -", "- ")
    }
}

pub fn quadratic_text(q: &DerivedQuadratic) -> String {
    let lead = plus_form(format!("x{}", q.j), &q.delta_j);
    let beta = format_rational(&q.beta);
    let cross = plus_form(if beta == "1" { format!("x{}", q.j + 1) } else { format!("{beta}*x{}", q.j + 1) }, &q.delta_j1);
    let other = match q.kind {
        QuadraticKind::Type1 => plus_form(format!("x{}", q.t), &q.delta_t),
        QuadraticKind::Type2 => form_text(&q.delta_t),
    };
    let kind = match q.kind {
        QuadraticKind::Type1 => "TYPE1",
        QuadraticKind::Type2 => "TYPE2",
    };
    format!("{kind} p{}: ({lead})({other}) - ({cross})^2", q.j)
}

pub fn quadratic_json(q: &DerivedQuadratic) -> Value {
    json!({
        "kind": match q.kind { QuadraticKind::Type1 => "type1", QuadraticKind::Type2 => "type2" },
        "j": q.j,
        "t": q.t,
        "beta": rational_json(&q.beta),
        "pivot": [q.pivot.0 + 1, q.pivot.1 + 1],
        "delta_j": form_json(&q.delta_j),
        "delta_j1": form_json(&q.delta_j1),
        "delta_t": form_json(&q.delta_t),
        "text": quadratic_text(q),
    })
}
