//! Acceptance suite: one PASS/FAIL line per criterion. The whole suite runs
//! twice and the second run's report tables must match the first byte for
//! byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlhj::config::{parse_config, RunConfig};
use nlhj::io::{num, Table};
use nlhj::oracle::operator_1d;
use nlhj::run::{execute, Outcome, Status};
use nlhj_core::harness::{comparison_experiment, Datum, InitialFn, Setup};
use nlhj_core::operators::eval_operator;
use nlhj_core::{
    BellmanSpec, CoerciveSpec, Control, Domain, Field, FluxKind, HamiltonianSpec, Kernel, Lattice, Point,
    QuadratureTable, Region, SchemeConfig, TracePolicy, VectorCoefficient,
};

struct Verdict {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    secs: f64,
    budget: f64,
    tables: Vec<(String, String)>,
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> RunConfig {
    let path = configs().join(name);
    parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(name: &str) -> Outcome {
    let cfg = load(name);
    let dir = tempfile::tempdir().expect("temporary directory");
    execute(&cfg, Some(dir.path())).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn file<'a>(o: &'a Outcome, name: &str) -> &'a str {
    &o.files.iter().find(|f| f.0 == name).unwrap_or_else(|| panic!("no {name}")).1
}

/// Column `col` of a TSV table as numbers.
fn column(tsv: &str, col: &str) -> Vec<f64> {
    let mut lines = tsv.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split('\t').collect();
    let k = header.iter().position(|h| *h == col).unwrap_or_else(|| panic!("no column {col}"));
    lines.map(|l| l.split('\t').nth(k).expect("cell").parse().expect("number")).collect()
}

fn prefixed(prefix: &str, o: &Outcome) -> Vec<(String, String)> {
    o.files.iter().filter(|f| f.0.ends_with(".tsv")).map(|f| (format!("{prefix}_{}", f.0), f.1.clone())).collect()
}

fn bump(x: f64) -> f64 {
    (1.0 - x * x).max(0.0)
}

fn discrete_bump(alpha: f64, h: f64) -> f64 {
    let domain = Domain::interval(-1.0, 1.0).unwrap();
    let kernel = Kernel::fractional_laplacian(1, alpha).unwrap();
    let r_max = 4.0 * domain.diameter();
    let lattice = Lattice::new(&domain, h, r_max).unwrap();
    let qt = QuadratureTable::build(&kernel, h, r_max).unwrap();
    let field =
        Field::from_fns(&lattice, &|x| bump(x[0]), &|_, _| 0.0, 0.0, TracePolicy::UpperExtension).unwrap();
    let idx = lattice.locate(&[0.0, 0.0]).expect("centre node");
    eval_operator(&field, &lattice, idx, &[0.0, 0.0], &qt, Region::All).unwrap()
}

/// Least-squares slope of `log err` against `log h`.
fn order(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn operator_consistency() -> (bool, String, Vec<(String, String)>) {
    let hs: Vec<f64> = (7..=10).map(|k| 2f64.powi(-k)).collect();
    let mut table = Table::new(&["alpha", "h", "oracle", "discrete", "relative_error"]);
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.5, 1.5] {
        let kernel = Kernel::fractional_laplacian(1, alpha).unwrap();
        let exact = operator_1d(&bump, 0.0, 0.0, &kernel, 1e-12);
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let d = discrete_bump(alpha, h);
                let e = ((d - exact) / exact).abs();
                table.push(vec![num(alpha), num(h), num(exact), num(d), num(e)]);
                e
            })
            .collect();
        let p = order(&hs, &errs);
        let fine = errs[errs.len() - 1];
        pass &= fine < 0.01 && p >= 1.0;
        detail.push(format!("alpha {alpha}: error {fine:.2e} at h=2^-10, order {p:.2}"));
    }
    (pass, detail.join("; "), vec![("operator.tsv".into(), table.to_tsv())])
}

fn exterior_mass() -> (bool, String, Vec<(String, String)>) {
    let o = run("evolve.toml");
    let cfg = load("evolve.toml");
    let domain = cfg.domain.clone();
    let r_max = 4.0 * domain.diameter();
    let h = cfg.scheme.h;
    let lattice = Lattice::new(&domain, h, r_max).unwrap();
    let qt = QuadratureTable::build(&cfg.kernel, h, r_max).unwrap();
    let masses = nlhj_core::hamiltonians::exterior_masses(&lattice, &qt);
    let centre = lattice.locate(&[0.0, 0.0]).unwrap();
    let k = lattice.active().iter().position(|&i| i == centre).unwrap();
    let rel = (masses[k] - 4.0).abs() / 4.0;
    let mut table = Table::new(&["h", "exterior_mass", "closed_form", "relative_error"]);
    table.push(vec![num(h), num(masses[k]), num(4.0), num(rel)]);
    let mut tables = vec![("exterior_mass.tsv".into(), table.to_tsv())];
    tables.extend(prefixed("evolve", &o));
    (rel < 0.005, format!("mass {:.6} at h={h}, relative error {rel:.2e}", masses[k]), tables)
}

fn random_coercive(rng: &mut ChaCha8Rng) -> HamiltonianSpec {
    let m = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
    let (f0, f1, w) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(1.0..4.0));
    let flux = if rng.gen_bool(0.5) { FluxKind::Upwind } else { FluxKind::LaxFriedrichs };
    HamiltonianSpec::Coercive(
        CoerciveSpec::new(m)
            .with_a1(rng.gen_range(0.5..2.0), 0.5)
            .with_lambda(rng.gen_range(0.0..1.0))
            .with_source(nlhj_core::Coefficient::space(move |x: &Point| f0 + f1 * (w * x[0]).cos()))
            .with_flux(flux),
    )
}

fn random_bellman(rng: &mut ChaCha8Rng) -> HamiltonianSpec {
    let controls = (0..2)
        .map(|_| {
            let b = rng.gen_range(-2.0..2.0);
            Control::new(rng.gen_range(0.0..1.0), VectorCoefficient::constant([b, 0.0]), rng.gen_range(-1.0..1.0))
        })
        .collect();
    HamiltonianSpec::Bellman(BellmanSpec::new(controls, 0.0).unwrap())
}

/// Ordered pair: `u0 <= v0` on the closed domain and `phi_u <= phi_v`.
fn random_pair(rng: &mut ChaCha8Rng) -> ((InitialFn, InitialFn), (f64, f64)) {
    let a: Vec<(f64, f64, f64)> =
        (0..3).map(|k| (rng.gen_range(-0.5..0.5), (k + 1) as f64 * rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.3))).collect();
    let (d0, d1) = if rng.gen_bool(0.2) { (0.0, 0.0) } else { (rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.5)) };
    let c = rng.gen_range(-0.5..0.5);
    let gap = if d0 == 0.0 && d1 == 0.0 { 0.0 } else { rng.gen_range(0.0..0.5) };
    let base = Arc::new(move |x: &Point| a.iter().map(|(amp, k, ph)| amp * (k * x[0] + ph).sin()).sum::<f64>());
    let lower = base.clone();
    let u: InitialFn = Arc::new(move |x| lower(x));
    let v: InitialFn = Arc::new(move |x| base(x) + d0 + d1 * (1.0 - x[0] * x[0]));
    ((u, v), (c, c + gap))
}

fn comparison() -> (bool, String, Vec<(String, String)>) {
    let mut table = Table::new(&["family", "seed", "alpha", "max_violation", "steps", "dt"]);
    let mut worst = 0.0f64;
    let mut runs = 0;
    for family in ["coercive", "bellman"] {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + if family == "bellman" { 1000 } else { 0 });
            let alpha = if seed % 2 == 0 { 0.5 } else { 1.5 };
            let spec = if family == "coercive" { random_coercive(&mut rng) } else { random_bellman(&mut rng) };
            let ((u0, v0), (pu, pv)) = random_pair(&mut rng);
            let setup = Setup {
                domain: Domain::interval(-1.0, 1.0).unwrap(),
                kernel: Kernel::fractional_laplacian(1, alpha).unwrap(),
                cfg: SchemeConfig::new(2f64.powi(-7)),
            };
            let r = comparison_experiment(&setup, &spec, (&u0, &v0), (&Datum::constant(pu), &Datum::constant(pv)), 1.0)
                .unwrap_or_else(|e| panic!("{family} seed {seed}: {e}"));
            worst = worst.max(r.max_violation);
            runs += 1;
            table.push(vec![family.into(), seed.to_string(), num(alpha), num(r.max_violation), r.steps.to_string(), num(r.dt)]);
        }
    }
    (worst <= 1e-12, format!("{runs} pairs, max ordering violation {worst:.2e}"), vec![("comparison.tsv".into(), table.to_tsv())])
}

fn rate() -> (bool, String, Vec<(String, String)>) {
    let deg = run("rate_degenerate.toml");
    let dt = column(file(&deg, "report.tsv"), "dt")[0];
    let curve = file(&deg, "rate_curve.tsv");
    let (dev, bound) = (column(curve, "deviation"), column(curve, "bound"));
    let tight = dev.iter().zip(&bound).map(|(d, b)| (b - d).abs()).fold(0.0, f64::max);
    let deg_pass = deg.status == Status::Pass && tight <= dt;

    let nl = run("rate.toml");
    let report = file(&nl, "report.tsv");
    let (mu0, fit) = (column(report, "mu0")[0], column(report, "fitted_exponent")[0]);
    let curve = file(&nl, "rate_curve.tsv");
    let ratio = column(curve, "deviation")
        .iter()
        .zip(column(curve, "bound"))
        .map(|(d, b)| if b > 0.0 { d / b } else if *d > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    let nl_pass = nl.status == Status::Pass && ratio <= 1.05 && fit >= 0.8 * mu0;
    let mut tables = prefixed("degenerate", &deg);
    tables.extend(prefixed("nonlocal", &nl));
    (
        deg_pass && nl_pass,
        format!(
            "degenerate: |bound - deviation| <= {tight:.2e} (dt {dt}); nonlocal: max deviation/bound {ratio:.3}, exponent {fit:.3} vs 0.8 mu0 = {:.3}",
            0.8 * mu0
        ),
        tables,
    )
}

fn boundary() -> (bool, String, Vec<(String, String)>) {
    let out = run("boundary_out.toml");
    let inward = run("boundary_in.toml");
    let pass = out.status == Status::Pass && inward.status == Status::Pass;
    let mut tables = prefixed("out", &out);
    tables.extend(prefixed("in", &inward));
    (pass, format!("out [{}]; in [{}]", out.verdict, inward.verdict), tables)
}

fn coercive() -> (bool, String, Vec<(String, String)>) {
    let o = run("coercive_loss.toml");
    let rows = file(&o, "report.tsv");
    let (scales, q) = (column(rows, "scale"), column(rows, "holder_quotient"));
    let growth: Vec<String> = (1..q.len()).map(|k| format!("x{} -> {:.3}", scales[k] / scales[k - 1], q[k] / q[k - 1])).collect();
    let pass = o.status == Status::Pass && (1..q.len()).all(|k| q[k] / q[k - 1] < 9.0);
    (pass, format!("quotient growth {}", growth.join(", ")), prefixed("coercive", &o))
}

fn uniqueness() -> (bool, String, Vec<(String, String)>) {
    let o = run("uniqueness.toml");
    let report = file(&o, "report.tsv");
    let (diff, bound) = (column(report, "difference")[0], column(report, "bound")[0]);
    (o.status == Status::Pass && diff <= bound, format!("difference {diff:.3e} <= 2 eps / mu0 = {bound:.3e}"), prefixed("uniqueness", &o))
}

type Criterion = (usize, &'static str, f64, fn() -> (bool, String, Vec<(String, String)>));

const CRITERIA: [Criterion; 7] = [
    (1, "operator consistency", 10.0, operator_consistency),
    (2, "exterior mass closed form", 1.0, exterior_mass),
    (3, "discrete comparison", 120.0, comparison),
    (4, "exponential rate", 300.0, rate),
    (5, "boundary attainment and loss", 300.0, boundary),
    (6, "superfractional coercive regularity", 300.0, coercive),
    (7, "uniqueness", 120.0, uniqueness),
];

fn suite() -> Vec<Verdict> {
    CRITERIA
        .iter()
        .map(|&(id, name, budget, f)| {
            let start = Instant::now();
            let (pass, detail, tables) = f();
            let secs = start.elapsed().as_secs_f64();
            Verdict { id, name, pass: pass && secs < budget, detail, secs, budget, tables }
        })
        .collect()
}

fn print(v: &Verdict) {
    let mark = if v.pass { "PASS" } else { "FAIL" };
    println!("criterion {} {mark} {} ({:.1}s, budget {}s): {}", v.id, v.name, v.secs, v.budget, v.detail);
}

fn write_tables(dir: &Path, run: &[Verdict]) {
    for v in run {
        for (name, text) in &v.tables {
            fs::write(dir.join(format!("c{}_{name}", v.id)), text).expect("write table");
        }
    }
}

fn main() -> ExitCode {
    let first = suite();
    for v in &first {
        print(v);
    }
    let second = suite();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_tables(a.path(), &first);
    write_tables(b.path(), &second);
    let mut names: Vec<String> =
        fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    let differing: Vec<&String> =
        names.iter().filter(|n| fs::read(a.path().join(n)).ok() != fs::read(b.path().join(n)).ok()).collect();
    let same_outcomes = first.iter().zip(&second).all(|(x, y)| x.pass == y.pass || x.secs >= x.budget || y.secs >= y.budget);
    let reproducible = differing.is_empty() && same_outcomes && !names.is_empty();
    println!(
        "criterion 8 {} reproducibility: {} report tables compared, {} differ{}",
        if reproducible { "PASS" } else { "FAIL" },
        names.len(),
        differing.len(),
        if differing.is_empty() { String::new() } else { format!(" ({:?})", differing) }
    );
    let all = first.iter().all(|v| v.pass) && reproducible;
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
