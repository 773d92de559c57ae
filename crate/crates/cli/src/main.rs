//! `rhbundle`: JSON in, JSON out.
//!
//! Exit status 0 on success, 1 when the input is rejected, 2 when the
//! numerics fail (including tolerance checks against `--tol`).

mod report;
mod schema;

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rhbundle::acceptance;
use rhbundle::birkhoff::{factorize, partial_indices};
use rhbundle::bundle::*;
use rhbundle::cauchy::solve_rhtp_on;
use rhbundle::fuchsian::{
    all_exponents, count_wronskian_zeros, fuchs_weight_beta, local_exponents, monodromy, scalarize, splitting_via_reduction,
    GaugeFactor, LeveltData, RegularSystem,
};
use rhbundle::linalg::eigenvalues;
use rhbundle::loop_algebra::{global_index, MatrixLoop, UnitCircleGrid};
use rhbundle::regularization::regularize_transmission;
use rhbundle::{Error, Result, SplittingType};
use serde_json::{json, Value};

use schema::Payload;

#[derive(Parser)]
#[command(name = "rhbundle", version, about = "Birkhoff factorization, Riemann-Hilbert problems and Fuchsian monodromy")]
struct Cli {
    /// Grid size on the unit circle (loops and transmission data).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Tolerance for residual checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for randomized checks in `selftest`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// JSON input file; standard input when absent or `-`.
    path: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Birkhoff factorization of a loop.
    Factor(Input),
    /// Partial indices of a loop.
    Indices(Input),
    /// Solution basis of the homogeneous transmission problem.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Allowed pole order at infinity.
        #[arg(long, default_value_t = 0)]
        pole_order: usize,
    },
    /// Reduce piecewise-constant data to a continuous loop.
    Regularize(Input),
    /// Monodromy generators of a system.
    Monodromy(Input),
    /// Levelt exponents of a system.
    Exponents(Input),
    /// Move all finite exponents into the window and report the splitting type.
    Reduce(Input),
    /// Bundle invariants of a splitting type or an invariant triple.
    Invariants(Input),
    /// Apparent-singularity and partial-index bounds.
    Bounds(Input),
    /// Run the acceptance suite.
    Selftest {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

struct Flags {
    grid: Option<usize>,
    tol: f64,
}

fn read_input(input: &Input) -> Result<Payload> {
    let text = match input.path.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::Invalid(format!("cannot read standard input: {e}")))?;
            s
        }
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Invalid(format!("cannot read {p}: {e}")))?,
    };
    schema::parse(&text)
}

fn wrong_kind(p: &Payload, want: &str) -> Error {
    Error::Schema { pointer: "/kind".into(), message: format!("expected {want}, found {}", p.kind()) }
}

fn expect_loop(p: Payload, flags: &Flags) -> Result<MatrixLoop<f64>> {
    match p {
        Payload::Loop(lp) => match flags.grid {
            Some(n) => lp.with_grid_size(n),
            None => Ok(lp),
        },
        Payload::Splitting(k) => Ok(MatrixLoop::diagonal_monomial(k.as_slice())),
        other => Err(wrong_kind(&other, "a loop")),
    }
}

fn expect_system(p: Payload) -> Result<RegularSystem<f64>> {
    match p {
        Payload::System(s) => Ok(s),
        other => Err(wrong_kind(&other, "a system")),
    }
}

fn tolerance(what: &str, achieved: f64, required: f64) -> Result<()> {
    if achieved <= required {
        Ok(())
    } else {
        Err(Error::Tolerance { what: what.into(), achieved, required })
    }
}

fn ints(k: &SplittingType) -> Value {
    json!(k.as_slice())
}

fn factor(p: Payload, flags: &Flags) -> Result<Value> {
    let g = expect_loop(p, flags)?;
    let f = factorize(&g)?;
    let (res, scale) = f.residual(&g, &g.grid());
    tolerance("factorization residual relative to sup |G|", res / scale, flags.tol)?;
    Ok(json!({
        "K": ints(&f.k),
        "exponents": f.exponents,
        "global_index": global_index(&g)?,
        "minus": report::matrix_loop(&f.minus),
        "plus": report::matrix_loop(&f.plus),
        "residual": report::num(res),
        "scale": report::num(scale),
    }))
}

fn indices(p: Payload, flags: &Flags) -> Result<Value> {
    let g = expect_loop(p, flags)?;
    Ok(json!({"K": ints(&partial_indices(&g)?), "global_index": global_index(&g)?}))
}

fn solve(p: Payload, pole_order: usize, flags: &Flags) -> Result<Value> {
    let g = expect_loop(p, flags)?;
    let grid = match flags.grid {
        Some(n) => UnitCircleGrid::new(n)?,
        None => g.grid(),
    };
    let sols = solve_rhtp_on(&g, pole_order, &grid)?;
    let mut out = Vec::new();
    for (i, s) in sols.iter().enumerate() {
        let r = s.transmission_residual(&g, &grid);
        tolerance(&format!("transmission residual of solution {i}"), r, flags.tol)?;
        let density: Vec<Value> = s
            .density_coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| v.iter().any(|z| z.norm() > 1e-12))
            .map(|(j, v)| json!({"power": j as i64 - s.band, "vector": report::vector(v)}))
            .collect();
        out.push(json!({
            "density": density,
            "gamma": s.gamma.iter().map(report::vector).collect::<Vec<_>>(),
            "transmission_residual": report::num(r),
        }));
    }
    Ok(json!({"dimension": sols.len(), "pole_order": pole_order, "solutions": out}))
}

fn regularize(p: Payload, flags: &Flags) -> Result<Value> {
    let (data, z0) = match p {
        Payload::Piecewise { data, z0 } => (data, z0),
        Payload::Loop(lp) => (rhbundle::loop_algebra::PiecewiseLoop::continuous(lp), Complex64::new(0.0, 0.0)),
        other => return Err(wrong_kind(&other, "piecewise-loop")),
    };
    let grid = UnitCircleGrid::new(flags.grid.unwrap_or(256))?;
    let r = regularize_transmission(&data, z0, &grid)?;
    tolerance("mismatch of one-sided limits", r.max_defect(), flags.tol)?;
    let jumps: Vec<Value> = r
        .regularizers
        .jumps
        .iter()
        .zip(&r.limits)
        .zip(&r.defects)
        .map(|((jd, (plus, minus)), d)| {
            json!({
                "at": report::complex(jd.s),
                "jump": report::matrix(&jd.jump),
                "gamma": report::matrix(&jd.gamma),
                "limit_plus": report::matrix(plus),
                "limit_minus": report::matrix(minus),
                "defect": report::num(*d),
            })
        })
        .collect();
    let continuous = r.to_loop(1e-10).map(|lp| report::matrix_loop(&lp)).unwrap_or(Value::Null);
    Ok(json!({
        "z0": report::complex(z0),
        "jumps": jumps,
        "max_defect": report::num(r.max_defect()),
        "grid": grid.size(),
        "continuous": continuous,
    }))
}

fn monodromy_report(p: Payload, flags: &Flags) -> Result<Value> {
    let sys = expect_system(p)?;
    let rep = monodromy(&sys)?;
    tolerance("product relation defect", rep.relation_defect(), flags.tol)?;
    let gens: Vec<Value> = rep
        .generators
        .iter()
        .zip(&rep.points)
        .zip(&rep.radii)
        .map(|((g, pt), r)| {
            json!({
                "point": report::point(pt),
                "radius": report::num(*r),
                "matrix": report::matrix(g),
                "eigenvalues": report::spectrum(eigenvalues(g)),
            })
        })
        .collect();
    Ok(json!({
        "basepoint": report::complex(rep.basepoint),
        "generators": gens,
        "relation_defect": report::num(rep.relation_defect()),
    }))
}

fn levelt(d: &LeveltData<f64>) -> Value {
    json!({
        "point": report::point(&d.point),
        "phi": d.phi,
        "mu": d.mu.iter().map(|z| report::complex(*z)).collect::<Vec<_>>(),
        "beta": d.beta.iter().map(|z| report::complex(*z)).collect::<Vec<_>>(),
    })
}

fn exponents(p: Payload) -> Result<Value> {
    let sys = expect_system(p)?;
    let data = all_exponents(&sys)?;
    let b = fuchs_weight_beta(&data);
    Ok(json!({
        "points": data.iter().map(levelt).collect::<Vec<_>>(),
        "beta_sum": report::complex(b.beta),
        "beta_integer": b.integer,
        "fuchsian_weight_zero": b.fuchsian,
    }))
}

fn reduce(p: Payload) -> Result<Value> {
    let sys = expect_system(p)?;
    let (k, red) = splitting_via_reduction(&sys)?;
    let gauge: Vec<Value> = red
        .gauge
        .factors
        .iter()
        .map(|f| match f {
            GaugeFactor::Constant(c) => json!({"constant": report::matrix(c)}),
            GaugeFactor::Shear { at, d } => json!({"shear": {"at": report::complex(*at), "d": d}}),
        })
        .collect();
    let after = (0..red.system.points().len())
        .map(|j| local_exponents(&red.system, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "K": ints(&k),
        "gauge": gauge,
        "exponents": after.iter().map(levelt).collect::<Vec<_>>(),
        "invariants": invariants_of(&k),
    }))
}

fn invariants_of(k: &SplittingType) -> Value {
    let r = bundle_report(k);
    json!({
        "K": ints(k),
        "c1": r.c1,
        "tau": r.tau,
        "nu": r.nu,
        "h0": r.h0,
        "h1": r.h1,
        "dim_HK": r.dim_hk,
        "codim": r.codim,
        "stable": r.stable,
        "solvable": r.solvable,
        "l": r.l,
        "slope": r.slope.to_string(),
    })
}

fn invariants(p: Payload) -> Result<Value> {
    let k = match p {
        Payload::Splitting(k) => k,
        Payload::Triple { rank: 2, c1, nu, tau } => {
            if tau != nu {
                return Err(Error::Invalid(format!("rank two requires tau = nu, got {tau} and {nu}")));
            }
            splitting_from_invariants_rank2(c1, nu)?
        }
        Payload::Triple { rank: 3, c1, tau, nu } => splitting_from_invariants_rank3(c1, tau, nu)?,
        Payload::Triple { rank, .. } => {
            return Err(Error::Schema {
                pointer: "/rank".into(),
                message: format!("invariants determine the type only in rank 2 or 3, got {rank}"),
            })
        }
        other => return Err(wrong_kind(&other, "splitting-type or invariant-triple")),
    };
    Ok(invariants_of(&k))
}

fn bounds_for(n: i64, g: i64, m: i64, l: Option<i64>, k: Option<&SplittingType>) -> Value {
    let mut out = json!({
        "n": n,
        "g": g,
        "m": m,
        "apparent_bound_ohtsuki": apparent_bound_ohtsuki(n, g, m),
        "apparent_bound_corollary": apparent_bound_corollary(n, g),
        "moduli_dimension": moduli_dimension(n, g),
    });
    if let Some(l) = l {
        out["l"] = json!(l);
        out["partial_index_bound"] = json!(partial_index_bound(n, m, l));
        if let Some(k) = k {
            out["tau"] = json!(weight_tau(k));
            out["satisfies_partial_index_bound"] = json!(satisfies_partial_index_bound(k, m, l));
        }
    }
    out
}

fn bounds(p: Payload) -> Result<Value> {
    match p {
        Payload::Bounds { n, g, m, l, k } => {
            if let Some(k) = &k {
                if k.len() as i64 != n {
                    return Err(Error::Schema { pointer: "/K".into(), message: format!("expected {n} entries") });
                }
            }
            Ok(bounds_for(n, g, m, l, k.as_ref()))
        }
        Payload::System(sys) => {
            let n = sys.size() as i64;
            let m = sys.points().len() as i64 + i64::from(sys.infinity_is_singular());
            let mut out = bounds_for(n, 0, m, None, None);
            let fuchsian = (0..sys.points().len()).all(|j| sys.is_fuchsian_at(j)) && sys.poly().is_empty();
            out["fuchsian"] = json!(fuchsian);
            let big = sys.points().iter().fold(1.0f64, |a, s| a.max(s.norm()));
            let mut counts = Vec::new();
            for row in 0..sys.size() {
                match scalarize(&sys, row) {
                    Ok(sc) => {
                        let f = |z: Complex64| sc.reduced(z);
                        counts.push(json!({"row": row, "apparent": count_wronskian_zeros(&f, 10.0 * big, sys.points())?}));
                    }
                    Err(Error::Invalid(_)) => counts.push(json!({"row": row, "apparent": Value::Null})),
                    Err(e) => return Err(e),
                }
            }
            out["apparent_counts"] = Value::Array(counts);
            Ok(out)
        }
        other => Err(wrong_kind(&other, "bounds-query or a system")),
    }
}

fn selftest(only: &[u32], seed: Option<u64>) -> (Value, bool) {
    let ids: Vec<u32> = if only.is_empty() { (1..=13).collect() } else { only.to_vec() };
    let results: Vec<_> = ids.iter().map(|&id| acceptance::run(id, seed)).collect();
    for r in &results {
        eprintln!("{r}");
    }
    let ok = results.iter().all(|r| r.passed);
    let list: Vec<Value> = results
        .iter()
        .map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail}))
        .collect();
    (json!({"criteria": list, "passed": ok}), ok)
}

fn error_json(e: &Error) -> Value {
    let mut out = json!({"kind": if e.is_numerical() { "numerical" } else { "validation" }, "message": e.to_string()});
    match e {
        Error::Schema { pointer, .. } => out["pointer"] = json!(pointer),
        Error::Tolerance { achieved, required, .. } => {
            out["achieved"] = report::num(*achieved);
            out["required"] = report::num(*required);
        }
        _ => {}
    }
    json!({ "error": out })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Flags { grid: cli.grid, tol: cli.tol };
    if let Command::Selftest { only } = &cli.command {
        let (v, ok) = selftest(only, cli.seed);
        println!("{}", serde_json::to_string_pretty(&v).unwrap());
        return if ok { ExitCode::SUCCESS } else { ExitCode::from(2) };
    }
    let run = || -> Result<Value> {
        match &cli.command {
            Command::Factor(i) => factor(read_input(i)?, &flags),
            Command::Indices(i) => indices(read_input(i)?, &flags),
            Command::Solve { input, pole_order } => solve(read_input(input)?, *pole_order, &flags),
            Command::Regularize(i) => regularize(read_input(i)?, &flags),
            Command::Monodromy(i) => monodromy_report(read_input(i)?, &flags),
            Command::Exponents(i) => exponents(read_input(i)?),
            Command::Reduce(i) => reduce(read_input(i)?),
            Command::Invariants(i) => invariants(read_input(i)?),
            Command::Bounds(i) => bounds(read_input(i)?),
            Command::Selftest { .. } => unreachable!(),
        }
    };
    match run() {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&error_json(&e)).unwrap());
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
