//! JSON output. Floats are rounded to 12 significant digits so reports are
//! byte-identical across runs and platforms.

use num_complex::Complex64;
use rhbundle::fuchsian::Point;
use rhbundle::loop_algebra::MatrixLoop;
use rhbundle::scalar::{CMat, CVec};
use serde_json::{json, Value};

/// Entries below this fraction of the largest one are dropped from printed
/// Laurent series.
const PRINT_FLOOR: f64 = 1e-14;

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap();
    // avoid printing -0
    json!(if r == 0.0 { 0.0 } else { r })
}

pub fn complex(z: Complex64) -> Value {
    json!({"re": num(z.re), "im": num(z.im)})
}

pub fn matrix(m: &CMat<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn vector(v: &CVec<f64>) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

/// Sorted by real then imaginary part after rounding.
pub fn spectrum(mut eig: Vec<Complex64>) -> Value {
    let key = |z: &Complex64| -> (f64, f64) {
        let r = |x: f64| format!("{x:.11e}").parse::<f64>().unwrap();
        (r(z.re), r(z.im))
    };
    eig.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    Value::Array(eig.into_iter().map(complex).collect())
}

pub fn point(p: &Point<f64>) -> Value {
    match p {
        Point::Finite(z) => complex(*z),
        Point::Infinity => json!("inf"),
    }
}

/// Loop in the input schema, so that it can be fed back in.
pub fn matrix_loop(lp: &MatrixLoop<f64>) -> Value {
    let big = lp.coeffs().values().flat_map(|m| m.iter()).fold(0.0f64, |a, z| a.max(z.norm()));
    let floor = PRINT_FLOOR * big;
    let chop = |z: &Complex64| {
        let part = |x: f64| if x.abs() > floor { x } else { 0.0 };
        Complex64::new(part(z.re), part(z.im))
    };
    let coeffs: Vec<Value> = lp
        .coeffs()
        .iter()
        .filter(|(_, m)| m.iter().any(|z| z.norm() > floor))
        .map(|(k, m)| json!({"power": k, "matrix": matrix(&m.map(|z| chop(&z)))}))
        .collect();
    json!({"kind": "loop", "coefficients": coeffs})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_stable() {
        assert_eq!(num(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(num(-0.0).to_string(), "0.0");
        assert_eq!(num(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(123_456_789.123_456).to_string(), "123456789.123");
    }
}
