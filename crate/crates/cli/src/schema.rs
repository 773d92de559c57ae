//! Input payloads. Every rejection carries the JSON pointer of the
//! offending value.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rhbundle::fuchsian::{FuchsianSystem, RegularSystem};
use rhbundle::loop_algebra::{MatrixLoop, PiecewiseLoop};
use rhbundle::scalar::CMat;
use rhbundle::{Error, Result, SplittingType};
use serde_json::Value;

pub enum Payload {
    Loop(MatrixLoop<f64>),
    Piecewise { data: PiecewiseLoop<f64>, z0: Complex64 },
    System(RegularSystem<f64>),
    Splitting(SplittingType),
    Triple { rank: i64, c1: i64, tau: i64, nu: i64 },
    Bounds { n: i64, g: i64, m: i64, l: Option<i64>, k: Option<SplittingType> },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Loop(_) => "loop",
            Payload::Piecewise { .. } => "piecewise-loop",
            Payload::System(_) => "fuchsian-system",
            Payload::Splitting(_) => "splitting-type",
            Payload::Triple { .. } => "invariant-triple",
            Payload::Bounds { .. } => "bounds-query",
        }
    }
}

fn schema(pointer: &str, message: impl Into<String>) -> Error {
    Error::Schema { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, message: message.into() }
}

fn child(ptr: &str, key: impl std::fmt::Display) -> String {
    let key = key.to_string().replace('~', "~0").replace('/', "~1");
    format!("{ptr}/{key}")
}

fn field<'a>(v: &'a Value, ptr: &str, key: &str) -> Result<&'a Value> {
    let obj = v.as_object().ok_or_else(|| schema(ptr, "expected an object"))?;
    obj.get(key).ok_or_else(|| schema(ptr, format!("missing field \"{key}\"")))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(ptr, "expected an array"))
}

fn integer(v: &Value, ptr: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| schema(ptr, "expected an integer"))
}

fn integers(v: &Value, ptr: &str) -> Result<Vec<i64>> {
    array(v, ptr)?.iter().enumerate().map(|(i, x)| integer(x, &child(ptr, i))).collect()
}

fn real(v: &Value, ptr: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(ptr, "expected a number"))
}

/// A number or `{"re": x, "im": y}` (`im` defaults to 0).
pub fn complex(v: &Value, ptr: &str) -> Result<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    let re = real(field(v, ptr, "re")?, &child(ptr, "re"))?;
    let im = match v.get("im") {
        Some(x) => real(x, &child(ptr, "im"))?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}

/// Square matrix given as an array of rows.
pub fn matrix(v: &Value, ptr: &str, size: Option<usize>) -> Result<CMat<f64>> {
    let rows = array(v, ptr)?;
    let n = rows.len();
    if n == 0 {
        return Err(schema(ptr, "matrix has no rows"));
    }
    if let Some(s) = size {
        if n != s {
            return Err(schema(ptr, format!("expected {s} rows, found {n}")));
        }
    }
    let mut m = CMat::<f64>::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let rp = child(ptr, i);
        let entries = array(row, &rp)?;
        if entries.len() != n {
            return Err(schema(&rp, format!("expected {n} entries, found {}", entries.len())));
        }
        for (j, x) in entries.iter().enumerate() {
            m[(i, j)] = complex(x, &child(&rp, j))?;
        }
    }
    Ok(m)
}

fn matrices(v: &Value, ptr: &str, size: &mut Option<usize>) -> Result<Vec<CMat<f64>>> {
    let mut out = Vec::new();
    for (i, x) in array(v, ptr)?.iter().enumerate() {
        let m = matrix(x, &child(ptr, i), *size)?;
        *size = Some(m.nrows());
        out.push(m);
    }
    Ok(out)
}

fn kind_of(v: &Value) -> Result<String> {
    if let Some(k) = v.get("kind") {
        return k.as_str().map(str::to_string).ok_or_else(|| schema("/kind", "expected a string"));
    }
    let has = |k: &str| v.get(k).is_some();
    let guess = if has("points") {
        "fuchsian-system"
    } else if has("coefficients") || has("diagonal") {
        "loop"
    } else if has("jumps") {
        "piecewise-loop"
    } else if has("K") && !has("n") {
        "splitting-type"
    } else if has("c1") {
        "invariant-triple"
    } else if has("n") {
        "bounds-query"
    } else {
        return Err(schema("", "cannot infer the payload kind; add a \"kind\" field"));
    };
    Ok(guess.into())
}

/// Parses a payload, or a fixture file `{"name", "kind", "payload",
/// "expected", "note"}` wrapping one.
pub fn parse(text: &str) -> Result<Payload> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("", format!("not valid JSON: {e}")))?;
    if !v.is_object() {
        return Err(schema("", "expected an object"));
    }
    match v.get("payload") {
        Some(inner) => {
            let mut inner = inner.clone();
            if let (Some(kind), Some(obj)) = (v.get("kind"), inner.as_object_mut()) {
                obj.entry("kind").or_insert_with(|| kind.clone());
            }
            parse_value(&inner).map_err(|e| match e {
                Error::Schema { pointer, message } => {
                    let pointer = if pointer == "/" { String::new() } else { pointer };
                    Error::Schema { pointer: format!("/payload{pointer}"), message }
                }
                other => other,
            })
        }
        None => parse_value(&v),
    }
}

fn parse_value(v: &Value) -> Result<Payload> {
    if !v.is_object() {
        return Err(schema("", "expected an object"));
    }
    match kind_of(v)?.as_str() {
        "loop" => parse_loop(v, "").map(Payload::Loop),
        "piecewise-loop" => parse_piecewise(v),
        "fuchsian-system" => parse_system(v).map(Payload::System),
        "splitting-type" => parse_splitting(field(v, "", "K")?, "/K").map(Payload::Splitting),
        "invariant-triple" => Ok(Payload::Triple {
            rank: integer(field(v, "", "rank")?, "/rank")?,
            c1: integer(field(v, "", "c1")?, "/c1")?,
            tau: integer(field(v, "", "tau")?, "/tau")?,
            nu: integer(field(v, "", "nu")?, "/nu")?,
        }),
        "bounds-query" => Ok(Payload::Bounds {
            n: integer(field(v, "", "n")?, "/n")?,
            g: v.get("g").map(|x| integer(x, "/g")).transpose()?.unwrap_or(0),
            m: integer(field(v, "", "m")?, "/m")?,
            l: v.get("l").map(|x| integer(x, "/l")).transpose()?,
            k: v.get("K").map(|x| parse_splitting(x, "/K")).transpose()?,
        }),
        other => Err(schema("/kind", format!("unknown kind \"{other}\""))),
    }
}

fn parse_splitting(v: &Value, ptr: &str) -> Result<SplittingType> {
    let k = integers(v, ptr)?;
    if k.is_empty() {
        return Err(schema(ptr, "splitting type is empty"));
    }
    SplittingType::new(k).map_err(|e| schema(ptr, e.to_string()))
}

/// `{"coefficients": [{"power": k, "matrix": M}, ...]}` or
/// `{"diagonal": [k_1, ..., k_n]}` for `diag(t^k_1, ..., t^k_n)`.
pub fn parse_loop(v: &Value, ptr: &str) -> Result<MatrixLoop<f64>> {
    if let Some(d) = v.get("diagonal") {
        let k = integers(d, &child(ptr, "diagonal"))?;
        if k.is_empty() {
            return Err(schema(&child(ptr, "diagonal"), "no exponents"));
        }
        return Ok(MatrixLoop::diagonal_monomial(&k));
    }
    let cp = child(ptr, "coefficients");
    let list = array(field(v, ptr, "coefficients")?, &cp)?;
    if list.is_empty() {
        return Err(schema(&cp, "no coefficients"));
    }
    let mut size = None;
    let mut coeffs = BTreeMap::new();
    for (i, entry) in list.iter().enumerate() {
        let ep = child(&cp, i);
        let k = integer(field(entry, &ep, "power")?, &child(&ep, "power"))?;
        let m = matrix(field(entry, &ep, "matrix")?, &child(&ep, "matrix"), size)?;
        size = Some(m.nrows());
        if coeffs.insert(k, m).is_some() {
            return Err(schema(&child(&ep, "power"), format!("power {k} repeated")));
        }
    }
    MatrixLoop::from_coeffs(size.unwrap(), coeffs)
}

/// Piecewise-constant data: `values[j]` holds on the arc from `jumps[j]`
/// to `jumps[j + 1]` counterclockwise.
fn parse_piecewise(v: &Value) -> Result<Payload> {
    let jumps: Vec<Complex64> = array(field(v, "", "jumps")?, "/jumps")?
        .iter()
        .enumerate()
        .map(|(i, x)| complex(x, &child("/jumps", i)))
        .collect::<Result<_>>()?;
    let mut size = None;
    let values = matrices(field(v, "", "values")?, "/values", &mut size)?;
    if values.len() != jumps.len() {
        return Err(schema("/values", format!("expected {} values, one per arc", jumps.len())));
    }
    for (i, s) in jumps.iter().enumerate() {
        if (s.norm() - 1.0).abs() > 1e-12 {
            return Err(schema(&child("/jumps", i), "jump points must lie on the unit circle"));
        }
    }
    let z0 = match v.get("z0") {
        Some(x) => complex(x, "/z0")?,
        None => Complex64::new(0.0, 0.0),
    };
    if z0.norm() >= 1.0 {
        return Err(schema("/z0", "z0 must lie inside the unit disk"));
    }
    let data = PiecewiseLoop::piecewise_constant(jumps, values)?;
    Ok(Payload::Piecewise { data, z0 })
}

enum Place {
    Finite(Complex64),
    Infinity,
}

fn place(v: &Value, ptr: &str) -> Result<Place> {
    match v.as_str() {
        Some("inf") => Ok(Place::Infinity),
        Some(other) => Err(schema(ptr, format!("unknown point \"{other}\"; use \"inf\" or a complex number"))),
        None => complex(v, ptr).map(Place::Finite),
    }
}

/// `{"points": [z | "inf"], "residues": [M], "basepoint": z}`; a system
/// with higher-order poles uses `"principal": [[M_1, M_2, ...]]` (the
/// coefficients of `(z - s)^{-1}, (z - s)^{-2}, ...`) and optionally
/// `"polynomial": [Q_0, Q_1, ...]` instead of `"residues"`.
pub fn parse_system(v: &Value) -> Result<RegularSystem<f64>> {
    let places: Vec<Place> = array(field(v, "", "points")?, "/points")?
        .iter()
        .enumerate()
        .map(|(i, x)| place(x, &child("/points", i)))
        .collect::<Result<_>>()?;
    let basepoint = v.get("basepoint").map(|b| complex(b, "/basepoint")).transpose()?;
    let mut size = None;
    if let Some(p) = v.get("principal") {
        if v.get("residues").is_some() {
            return Err(schema("/principal", "give either \"residues\" or \"principal\", not both"));
        }
        let lists = array(p, "/principal")?;
        if lists.len() != places.len() {
            return Err(schema("/principal", format!("expected {} entries, one per point", places.len())));
        }
        let mut finite = Vec::new();
        let mut principal = Vec::new();
        for (i, (pl, list)) in places.iter().zip(lists).enumerate() {
            match pl {
                Place::Finite(s) => finite.push(*s),
                Place::Infinity => {
                    return Err(schema(&child("/points", i), "with \"principal\", infinity is set by \"polynomial\""))
                }
            }
            principal.push(matrices(list, &child("/principal", i), &mut size)?);
        }
        let poly = match v.get("polynomial") {
            Some(q) => matrices(q, "/polynomial", &mut size)?,
            None => Vec::new(),
        };
        return RegularSystem::new(finite, principal, poly, basepoint);
    }
    let res = matrices(field(v, "", "residues")?, "/residues", &mut size)?;
    if res.len() != places.len() {
        return Err(schema("/residues", format!("expected {} residues, one per point", places.len())));
    }
    let mut finite = Vec::new();
    let mut residues = Vec::new();
    let mut infinity = None;
    for (i, (pl, r)) in places.iter().zip(res).enumerate() {
        match pl {
            Place::Finite(s) => {
                finite.push(*s);
                residues.push(r);
            }
            Place::Infinity if infinity.is_some() => {
                return Err(schema(&child("/points", i), "infinity listed twice"));
            }
            Place::Infinity => infinity = Some(r),
        }
    }
    FuchsianSystem::new(finite, residues, infinity, basepoint)?.to_regular()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pointer(text: &str) -> String {
        match parse(text) {
            Err(Error::Schema { pointer, .. }) => pointer,
            other => panic!("expected a schema error, got {:?}", other.map(|p| p.kind())),
        }
    }

    #[test]
    fn pointers_name_the_bad_value() {
        assert_eq!(pointer(r#"{"kind": "loop", "coefficients": [{"power": 0, "matrix": [[1, "x"]]}]}"#),
            "/coefficients/0/matrix/0");
        assert_eq!(pointer(r#"{"kind": "loop", "coefficients": [{"power": 0, "matrix": [[1, {"im": 2}], [0, 1]]}]}"#),
            "/coefficients/0/matrix/0/1");
        assert_eq!(pointer(r#"{"points": [0, "oo"], "residues": [[[0]], [[0]]]}"#), "/points/1");
        assert_eq!(pointer(r#"{"K": [1, 2]}"#), "/K");
        assert_eq!(pointer(r#"[1]"#), "/");
        assert_eq!(pointer(r#"{"kind": "loop"}"#), "/");
        assert_eq!(pointer(r#"{"name": "x", "kind": "loop", "payload": {"diagonal": [1, "a"]}}"#), "/payload/diagonal/1");
    }

    #[test]
    fn kinds_are_inferred() {
        assert_eq!(parse(r#"{"diagonal": [2, 0, -1]}"#).unwrap().kind(), "loop");
        assert_eq!(parse(r#"{"K": [2, 1, 0]}"#).unwrap().kind(), "splitting-type");
        assert_eq!(parse(r#"{"c1": 3, "tau": 3, "nu": 4, "rank": 3}"#).unwrap().kind(), "invariant-triple");
        assert_eq!(parse(r#"{"n": 2, "m": 3}"#).unwrap().kind(), "bounds-query");
        let sys = r#"{"points": [0, "inf"], "residues": [[[1, 0], [0, 0]], [[-1, 0], [0, 0]]]}"#;
        assert_eq!(parse(sys).unwrap().kind(), "fuchsian-system");
    }
}
