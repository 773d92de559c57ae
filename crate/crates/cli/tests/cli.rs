use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("bad report ({e}): {}", self.stdout))
    }

    fn error(&self) -> Value {
        serde_json::from_str::<Value>(&self.stderr).unwrap_or_else(|e| panic!("bad error ({e}): {}", self.stderr))
            ["error"]
            .clone()
    }
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rhbundle"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut input = child.stdin.take().unwrap();
        if let Some(s) = stdin {
            input.write_all(s.as_bytes()).unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> Value {
    let r = run(args, None);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.json()
}

fn re_im(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

fn expected(name: &str) -> Value {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    serde_json::from_str::<Value>(&text).unwrap()["expected"].clone()
}

#[test]
fn diagonal_indices() {
    let v = ok(&["indices", &fixture("diagonal_2_0_-1.json")]);
    assert_eq!(v["K"], serde_json::json!([2, 0, -1]));
    assert_eq!(v, expected("diagonal_2_0_-1.json")["indices"]);
}

#[test]
fn triangular_symbol_and_factorization() {
    let v = ok(&["indices", &fixture("triangular_t.json")]);
    assert_eq!(v, expected("triangular_t.json")["indices"]);
    let v = ok(&["factor", &fixture("factored_1_-1.json")]);
    let want = expected("factored_1_-1.json")["factor"].clone();
    assert_eq!(v["K"], want["K"]);
    assert_eq!(v["global_index"], want["global_index"]);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn invariants_of_a_type_and_of_a_triple() {
    let v = ok(&["invariants", &fixture("splitting_2_1_0.json")]);
    let want = expected("splitting_2_1_0.json")["invariants"].clone();
    for (k, x) in want.as_object().unwrap() {
        assert_eq!(&v[k], x, "{k}");
    }
    let w = ok(&["invariants", &fixture("triple_3_3_4.json")]);
    assert_eq!(w, v);
}

#[test]
fn hypergeometric_reports() {
    let f = fixture("hypergeometric.json");
    let v = ok(&["monodromy", &f]);
    let gens = v["generators"].as_array().unwrap();
    assert_eq!(gens.len(), 3);
    let at0 = gens.iter().find(|g| g["point"] == serde_json::json!({"re": 0.0, "im": 0.0})).unwrap();
    let eig: Vec<(f64, f64)> = at0["eigenvalues"].as_array().unwrap().iter().map(re_im).collect();
    assert!((eig[0].0 + 1.0).abs() < 1e-8 && eig[0].1.abs() < 1e-8);
    assert!((eig[1].0 - 1.0).abs() < 1e-8 && eig[1].1.abs() < 1e-8);
    assert!(v["relation_defect"].as_f64().unwrap() < 1e-8);

    let want = expected("hypergeometric.json");
    assert_eq!(ok(&["exponents", &f])["beta_integer"], want["exponents"]["beta_integer"]);
    let r = ok(&["reduce", &f]);
    assert_eq!(r["K"], want["reduce"]["K"]);
    for p in r["exponents"].as_array().unwrap() {
        assert!(p["phi"].as_array().unwrap().iter().all(|x| x == 0));
    }
    let b = ok(&["bounds", &f]);
    let counts: Vec<Value> = b["apparent_counts"].as_array().unwrap().iter().map(|c| c["apparent"].clone()).collect();
    assert_eq!(Value::Array(counts), want["bounds"]["apparent_counts"]);
    assert_eq!(b["apparent_bound_ohtsuki"], 0);
}

#[test]
fn commuting_nilpotent_generator() {
    let v = ok(&["monodromy", &fixture("commuting_nilpotent.json")]);
    let g = v["generators"]
        .as_array()
        .unwrap()
        .iter()
        .find(|g| g["point"] == serde_json::json!({"re": 1.0, "im": 0.0}))
        .unwrap();
    let want = &expected("commuting_nilpotent.json")["monodromy"]["generator_at_1"];
    for i in 0..2 {
        for j in 0..2 {
            let (a, b) = (re_im(&g["matrix"][i][j]), re_im(&want[i][j]));
            assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8, "({i}, {j})");
        }
    }
}

#[test]
fn diagonal_shift_reduction() {
    let v = ok(&["reduce", &fixture("diagonal_shift.json")]);
    assert_eq!(v["K"], expected("diagonal_shift.json")["reduce"]["K"]);
    assert_eq!(v["invariants"]["c1"], 1);
}

#[test]
fn rank_three_system() {
    let f = fixture("rank3_regular.json");
    let v = ok(&["exponents", &f]);
    assert_eq!(v["beta_integer"], expected("rank3_regular.json")["exponents"]["beta_integer"]);
    let m = ok(&["monodromy", &f]);
    for g in m["generators"].as_array().unwrap() {
        for i in 0..3 {
            let (re, im) = re_im(&g["matrix"][i][0]);
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!((re - want).abs() < 1e-8 && im.abs() < 1e-8);
        }
    }
    // the reduction needs Fuchsian finite points
    let r = run(&["reduce", &f], None);
    assert_eq!(r.code, 1);
}

#[test]
fn piecewise_fixtures_regularize() {
    for name in ["scalar_two_jump.json", "generic_two_jump.json", "unipotent_three_jump.json"] {
        let v = ok(&["regularize", &fixture(name)]);
        assert!(v["max_defect"].as_f64().unwrap() < 1e-8, "{name}");
        assert!(!v["jumps"].as_array().unwrap().is_empty());
    }
}

#[test]
fn bounds_query() {
    let v = ok(&["bounds", &fixture("bounds_rank2_three_points.json")]);
    let want = &expected("bounds_rank2_three_points.json")["bounds"];
    assert_eq!(v["apparent_bound_ohtsuki"], want["apparent_bound_ohtsuki"]);
    assert_eq!(v["apparent_bound_corollary"], want["apparent_bound_corollary"]);
    let v = run(&["bounds"], Some(r#"{"n": 3, "m": 4, "l": 2, "K": [1, 0, 0]}"#)).json();
    assert_eq!(v["partial_index_bound"], 5);
    assert_eq!(v["satisfies_partial_index_bound"], true);
}

#[test]
fn exit_codes_and_error_reports() {
    let r = run(&["indices"], Some("{not json"));
    assert_eq!(r.code, 1);
    assert_eq!(r.error()["kind"], "validation");

    let r = run(&["indices"], Some(r#"{"coefficients": [{"power": 0, "matrix": [[1, 0], [0]]}]}"#));
    assert_eq!(r.code, 1);
    assert_eq!(r.error()["pointer"], "/coefficients/0/matrix/1");

    let r = run(&["monodromy", &fixture("diagonal_2_0_-1.json")], None);
    assert_eq!(r.code, 1);
    assert_eq!(r.error()["pointer"], "/kind");

    // residues must sum to zero without infinity
    let r = run(&["monodromy"], Some(r#"{"points": [0], "residues": [[[1]]]}"#));
    assert_eq!(r.code, 1);

    let r = run(&["--tol", "1e-30", "monodromy", &fixture("hypergeometric.json")], None);
    assert_eq!(r.code, 2);
    let e = r.error();
    assert_eq!(e["kind"], "numerical");
    assert!(e["achieved"].as_f64().unwrap() > 1e-30);
}

#[test]
fn reports_are_deterministic() {
    let args = ["monodromy", &fixture("rank3_regular.json")];
    let a = run(&args, None);
    let b = run(&args, None);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reports_feed_back_in() {
    let v = ok(&["factor", &fixture("factored_1_-1.json")]);
    for side in ["minus", "plus"] {
        let text = serde_json::to_string(&v[side]).unwrap();
        let r = run(&["indices"], Some(&text));
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_eq!(r.json()["K"], serde_json::json!([0, 0]));
    }
    let k = ok(&["indices", &fixture("diagonal_2_0_-1.json")]);
    let text = serde_json::to_string(&serde_json::json!({"K": k["K"]})).unwrap();
    let r = run(&["invariants"], Some(&text));
    assert_eq!(r.json()["K"], k["K"]);
    let red = ok(&["reduce", &fixture("hypergeometric.json")]);
    let text = serde_json::to_string(&red["invariants"]).unwrap();
    assert_eq!(run(&["invariants"], Some(&text)).json(), red["invariants"]);
}

#[test]
fn selftest_subset() {
    let r = run(&["selftest", "--only", "1,6,7"], None);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["passed"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 3);
}
