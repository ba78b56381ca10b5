//! Executes a validated run configuration: certificates first, then the
//! experiment; writes report tables, curves, field dumps and a manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use nlhj_core::boundary::check_sigma;
use nlhj_core::hamiltonians::{self, check_h1, check_h2, check_h2prime, check_h2prime_with, check_lipschitz};
use nlhj_core::harness::{self, Datum, Setup};
use nlhj_core::solver::TraceGap;
use nlhj_core::{Certificate, Error, HamiltonianSpec, Scheme, SolveState};

use crate::config::{CertificateKind, ExperimentKind, RunConfig};
use crate::io::{field_tsv, num, IoError, Table};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Precondition,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Precondition => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Precondition => "PRECONDITION",
        }
    }
}

/// Exit status for a core error: violated assumptions and invalid input are
/// precondition failures, everything that goes wrong during a run is a failure.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::BlowUp { .. }
        | Error::NonConvergence { .. }
        | Error::BoundViolated { .. }
        | Error::CflViolation { .. }
        | Error::ViscosityUnderflow { .. } => Status::Fail,
        _ => Status::Precondition,
    }
}

fn kind_of(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split([' ', '(', '{']).next().unwrap_or_default().to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub name: String,
    pub value: f64,
    pub pass: bool,
    pub gating: bool,
    pub detail: String,
}

impl CertificateRecord {
    fn new(c: &Certificate, gating: bool) -> Self {
        CertificateRecord { name: c.name.to_string(), value: c.value, pass: c.pass, gating, detail: c.detail.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CflRecord {
    pub run: String,
    pub dt: f64,
    pub sigma: Vec<f64>,
    /// `dt` times the stability denominator; at most `theta`.
    pub number: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub config: String,
    pub experiment: &'static str,
    pub status: Status,
    pub exit_code: i32,
    pub verdict: String,
    pub certificates: Vec<CertificateRecord>,
    pub cfl: Vec<CflRecord>,
    pub errors: Vec<ErrorRecord>,
    pub files: Vec<String>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub verdict: String,
    pub manifest: Manifest,
    /// Name and contents of every file written (manifest excluded).
    pub files: Vec<(String, String)>,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    setup: Setup,
    files: Vec<(String, String)>,
    certificates: Vec<CertificateRecord>,
    cfl: Vec<CflRecord>,
}

enum Stop {
    Core(Error),
    Gate(String),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Core(e)
    }
}

/// Certificates for `cfg`, each with its gating flag.
pub fn certificates(cfg: &RunConfig) -> Result<Vec<CertificateRecord>, Error> {
    let mut run = Run::new(cfg);
    run.certify()?;
    Ok(run.certificates)
}

/// Runs `cfg` and writes everything under `cfg.output` (or `out` if given).
pub fn execute(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome, IoError> {
    let started = Instant::now();
    let mut run = Run::new(cfg);
    let mut errors = Vec::new();
    let (status, verdict) = match run.go() {
        Ok((pass, verdict)) => (if pass { Status::Pass } else { Status::Fail }, verdict),
        Err(Stop::Gate(msg)) => {
            errors.push(ErrorRecord { kind: "Precondition".into(), message: msg.clone() });
            (Status::Precondition, msg)
        }
        Err(Stop::Core(e)) => {
            errors.push(ErrorRecord { kind: kind_of(&e), message: e.to_string() });
            (status_of(&e), e.to_string())
        }
    };
    let dir: PathBuf = out.map_or_else(|| cfg.output.clone(), Path::to_path_buf);
    fs::create_dir_all(&dir).map_err(|source| IoError::Io { path: dir.clone(), source })?;
    for (name, text) in &run.files {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|source| IoError::Io { path: p.clone(), source })?;
    }
    let manifest = Manifest {
        tool: "nlhj",
        version: env!("CARGO_PKG_VERSION"),
        core_version: nlhj_core::VERSION,
        config: cfg.path.display().to_string(),
        experiment: cfg.experiment.label(),
        status,
        exit_code: status.exit_code(),
        verdict: verdict.clone(),
        certificates: run.certificates.clone(),
        cfl: run.cfl.clone(),
        errors,
        files: run.files.iter().map(|f| f.0.clone()).collect(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let p = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&p, json + "\n").map_err(|source| IoError::Io { path: p.clone(), source })?;
    Ok(Outcome { status, verdict, manifest, files: run.files })
}

fn gap_rows(table: &mut Table, label: &str, gaps: &[TraceGap]) {
    for g in gaps {
        table.push(vec![label.to_string(), num(g.t), g.face.label().to_string(), num(g.mid), num(g.max), num(g.mean)]);
    }
}

fn gap_table() -> Table {
    Table::new(&["run", "t", "face", "gap_mid", "gap_max", "gap_mean"])
}

impl<'a> Run<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        let setup = Setup { domain: cfg.domain.clone(), kernel: cfg.kernel.clone(), cfg: cfg.scheme.clone() };
        Run { cfg, setup, files: Vec::new(), certificates: Vec::new(), cfl: Vec::new() }
    }

    fn scheme(&self, spec: &HamiltonianSpec, datum: &Datum) -> Result<Scheme, Error> {
        Scheme::new(
            &self.cfg.domain,
            self.cfg.kernel.clone(),
            spec.clone(),
            datum.phi.clone(),
            datum.time_dependent,
            self.cfg.scheme.clone(),
        )
    }

    fn window(&self) -> (f64, f64) {
        let p = &self.cfg.params;
        let t = self.cfg.t_final.or(p.ladder.last().copied()).unwrap_or(0.0);
        (0.0, t)
    }

    fn record(&mut self, c: &Certificate, kind: CertificateKind) {
        self.certificates.push(CertificateRecord::new(c, kind.gates(self.cfg.experiment)));
    }

    fn record_cfl(&mut self, run: &str, scheme: &Scheme, dt: f64, sigma: [f64; 2], t: f64) {
        self.cfl.push(CflRecord {
            run: run.to_string(),
            dt,
            sigma: sigma[..scheme.lattice().dim()].to_vec(),
            number: dt * scheme.cfl_denominator(&sigma, t),
            theta: scheme.config().theta,
        });
    }

    fn certify(&mut self) -> Result<(), Error> {
        let cfg = self.cfg;
        let spec = &cfg.hamiltonian;
        let scheme = self.scheme(spec, &cfg.phi.datum())?;
        let lattice = scheme.lattice();
        let qt = scheme.quadrature();
        let window = self.window();
        let state = scheme.initial_state(&|x| cfg.u0.eval(x, 0.0))?;
        let control = scheme.initial_control(&state);
        self.record_cfl("initial", &scheme, control.dt, control.sigma, 0.0);
        for kind in cfg.scheduled_certificates() {
            let cert = match kind {
                CertificateKind::Ellipticity => cfg.kernel.check_ellipticity(),
                CertificateKind::Compatibility => {
                    hamiltonians::check_compatibility(lattice, state.field.values(), state.field.datum(), None)
                }
                CertificateKind::Monotonicity => {
                    let r = 1.0 + state.field.sup_norm();
                    check_h1(spec, lattice, r, window)
                }
                CertificateKind::Nondegeneracy => check_h2(spec, lattice, qt, window),
                CertificateKind::Superfractional => match spec {
                    HamiltonianSpec::Coercive(c) => hamiltonians::check_superfractional(c, &cfg.kernel, lattice, window),
                    HamiltonianSpec::Bellman(_) => continue,
                },
                CertificateKind::Lipschitz => match spec {
                    HamiltonianSpec::Bellman(b) => check_lipschitz(b, lattice, window),
                    HamiltonianSpec::Coercive(_) => continue,
                },
                CertificateKind::Sigma => match spec {
                    HamiltonianSpec::Bellman(b) => check_sigma(b, &cfg.domain, window, 17, 10).certificate,
                    HamiltonianSpec::Coercive(_) => continue,
                },
                CertificateKind::Rate => {
                    let mu_min = cfg.params.mu_min;
                    match &cfg.floor {
                        Some(f) => check_h2prime_with(lattice, qt, &|x| f.eval(x, 0.0), mu_min),
                        None => check_h2prime(cfg.limit_spec(), lattice, qt, (0.0, 0.0), mu_min),
                    }
                }
                CertificateKind::DataConvergence => {
                    let ladder = &cfg.params.ladder;
                    let evolving = self.scheme(spec, &cfg.phi.datum())?;
                    harness::check_data_convergence(
                        &evolving,
                        spec,
                        cfg.limit_spec(),
                        &cfg.phi.datum(),
                        &cfg.limit_datum().datum(),
                        ladder[0],
                        ladder[ladder.len() - 1],
                    )
                }
            };
            self.record(&cert, kind);
        }
        Ok(())
    }

    fn go(&mut self) -> Result<(bool, String), Stop> {
        self.certify()?;
        if let Some(c) = self.certificates.iter().find(|c| c.gating && !c.pass) {
            return Err(Stop::Gate(format!("certificate {} failed: {}", c.name, c.detail)));
        }
        let cfg = self.cfg;
        let exp = cfg.experiment.label();
        Ok(match cfg.experiment {
            ExperimentKind::Evolve => self.evolve()?,
            ExperimentKind::Steady => self.steady()?,
            ExperimentKind::Comparison => {
                let u0 = cfg.u0.initial();
                let v0 = cfg.v0.as_ref().unwrap_or(&cfg.u0).initial();
                let phi_u = cfg.phi.datum();
                let phi_v = cfg.phi_v.as_ref().unwrap_or(&cfg.phi).datum();
                let t = cfg.t_final.expect("validated");
                let r = harness::comparison_experiment(&self.setup, &cfg.hamiltonian, (&u0, &v0), (&phi_u, &phi_v), t)?;
                let scheme = self.scheme(&cfg.hamiltonian, &phi_u)?;
                let st = scheme.initial_state(&|x| u0(x))?;
                let sigma = scheme.initial_control(&st).sigma;
                self.record_cfl("lockstep", &scheme, r.dt, sigma, 0.0);
                let mut t = Table::new(&["max_violation", "steps", "dt", "pass"]);
                t.push(vec![num(r.max_violation), r.steps.to_string(), num(r.dt), r.pass.to_string()]);
                self.files.push(("report.tsv".into(), t.to_tsv()));
                (r.pass, format!("{exp}: max ordering violation {:e} over {} steps", r.max_violation, r.steps))
            }
            ExperimentKind::Boundary => {
                let HamiltonianSpec::Bellman(spec) = &cfg.hamiltonian else { unreachable!("validated") };
                let t = cfg.t_final.expect("validated");
                let r = harness::boundary_behavior_experiment(
                    &self.setup,
                    spec,
                    &cfg.phi.datum(),
                    &cfg.u0.initial(),
                    t,
                    &cfg.params.spacings,
                    cfg.params.loss_threshold,
                )?;
                let mut gaps = Table::new(&["h", "face", "tag", "final_gap", "max_gap", "mean_gap", "negative"]);
                for row in &r.rows {
                    gaps.push(vec![
                        num(row.h),
                        row.face.label().into(),
                        row.tag.map_or("inhomogeneous", |t| t.label()).into(),
                        num(row.final_gap),
                        num(row.max_gap),
                        num(row.mean_gap),
                        row.negative.to_string(),
                    ]);
                }
                let mut rep = Table::new(&["face", "tag", "ratios", "variation", "min_gap", "pass"]);
                for f in &r.faces {
                    let ratios: Vec<String> = f.ratios.iter().map(|v| num(*v)).collect();
                    rep.push(vec![
                        f.face.label().into(),
                        f.tag.map_or("inhomogeneous", |t| t.label()).into(),
                        ratios.join(","),
                        num(f.variation),
                        num(f.min_gap),
                        f.pass.to_string(),
                    ]);
                }
                self.files.push(("report.tsv".into(), rep.to_tsv()));
                self.files.push(("trace_gaps.tsv".into(), gaps.to_tsv()));
                let detail: Vec<String> = r.faces.iter().map(|f| format!("{} {}", f.face.label(), f.detail)).collect();
                (r.pass, format!("{exp}: {}", detail.join("; ")))
            }
            ExperimentKind::CoerciveLoss => {
                let HamiltonianSpec::Coercive(spec) = &cfg.hamiltonian else { unreachable!("validated") };
                let r = harness::coercive_loss_experiment(&self.setup, spec, &cfg.params.scales)?;
                let mut t = Table::new(&["scale", "sup_norm", "holder_quotient", "gap_mid_max", "steps"]);
                for row in &r.rows {
                    let g = row.gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    t.push(vec![num(row.scale), num(row.sup_norm), num(row.holder_quotient), num(g), row.steps.to_string()]);
                }
                self.files.push(("report.tsv".into(), t.to_tsv()));
                (
                    r.pass,
                    format!(
                        "{exp}: Hölder-{:.4} quotient ratio {:.4} for a x{} scale step (need < {:.1})",
                        r.exponent,
                        r.ratio,
                        r.scale_ratio,
                        0.9 * r.scale_ratio
                    ),
                )
            }
            ExperimentKind::Rate => {
                let p = &cfg.params;
                let t_final = cfg.t_final.expect("validated");
                let mut opts = harness::RateOptions::new(t_final, p.every.expect("validated"));
                opts.slack = p.slack;
                opts.mu_min = p.mu_min;
                opts.floor = cfg.floor.as_ref().map(|f| f.function());
                let r = harness::rate_experiment(
                    &self.setup,
                    &cfg.hamiltonian,
                    &cfg.phi.datum(),
                    &cfg.limit_datum().datum(),
                    &cfg.u0.initial(),
                    &opts,
                )?;
                let mut curve = Table::new(&["t", "deviation", "g", "damped_G", "bound"]);
                for (k, pt) in r.curve.iter().enumerate() {
                    curve.push(vec![num(pt.t), num(pt.deviation), num(r.rate.g[k]), num(r.rate.damped_g[k]), num(pt.bound)]);
                }
                let mut t = Table::new(&["mu0", "initial_gap", "fitted_exponent", "slack", "steady_steps", "dt", "violation_t", "pass"]);
                t.push(vec![
                    num(r.rate.mu0),
                    num(r.rate.initial_gap),
                    num(r.fitted_exponent),
                    num(r.slack),
                    r.steady_steps.to_string(),
                    num(r.dt),
                    r.violation.as_ref().map_or("none".into(), |v| num(v.t)),
                    r.pass.to_string(),
                ]);
                self.files.push(("report.tsv".into(), t.to_tsv()));
                self.files.push(("rate_curve.tsv".into(), curve.to_tsv()));
                let verdict = format!(
                    "{exp}: mu0 {:.6}, fitted exponent {:.6}, {} snapshots",
                    r.rate.mu0,
                    r.fitted_exponent,
                    r.curve.len()
                );
                r.into_result()?;
                (true, verdict)
            }
            ExperimentKind::LargeTime => {
                let p = &cfg.params;
                let r = harness::large_time_experiment(
                    &self.setup,
                    &cfg.hamiltonian,
                    cfg.limit_spec(),
                    &cfg.phi.datum(),
                    &cfg.limit_datum().datum(),
                    &cfg.u0.initial(),
                    &p.ladder,
                    p.tolerance,
                )?;
                let mut t = Table::new(&["T", "deviation"]);
                for (tt, d) in &r.ladder {
                    t.push(vec![num(*tt), num(*d)]);
                }
                self.files.push(("report.tsv".into(), t.to_tsv()));
                let last = r.ladder.last().map_or(f64::NAN, |p| p.1);
                (r.pass, format!("{exp}: final deviation {last:e} (tolerance {:e})", r.tolerance))
            }
            ExperimentKind::Uniqueness => {
                let v0 = cfg.v0.as_ref().expect("validated");
                let r = harness::uniqueness_experiment(
                    &self.setup,
                    &cfg.hamiltonian,
                    &cfg.phi.datum(),
                    (&cfg.u0.initial(), &v0.initial()),
                    cfg.params.mu_min,
                )?;
                let mut t = Table::new(&["difference", "bound", "tolerance", "mu0", "steps_u", "steps_v", "pass"]);
                t.push(vec![
                    num(r.difference),
                    num(r.bound),
                    num(r.tolerance),
                    num(r.certificate.value),
                    r.steps[0].to_string(),
                    r.steps[1].to_string(),
                    r.pass.to_string(),
                ]);
                self.files.push(("report.tsv".into(), t.to_tsv()));
                (r.pass, format!("{exp}: steady states differ by {:e} (bound {:e})", r.difference, r.bound))
            }
        })
    }

    fn field_file(&mut self, scheme: &Scheme, state: &SolveState) {
        let name = format!("field_t{:.6}.tsv", state.t);
        self.files.push((name, field_tsv(scheme.lattice(), state, self.cfg.kernel.order())));
    }

    fn evolve(&mut self) -> Result<(bool, String), Error> {
        let cfg = self.cfg;
        let scheme = self.scheme(&cfg.hamiltonian, &cfg.phi.datum())?;
        let t_final = cfg.t_final.expect("validated");
        let every = cfg.snapshot_every.unwrap_or(t_final / 10.0);
        let st = scheme.initial_state(&|x| cfg.u0.eval(x, 0.0))?;
        let ctrl = scheme.initial_control(&st);
        let run = scheme.run_to_time(st, ctrl, t_final, Some(every))?;
        self.record_cfl("final", &scheme, run.control.dt, run.control.sigma, run.state.t);
        let lattice = scheme.lattice();
        let mut t = Table::new(&["t", "sup_norm"]);
        for s in &run.snapshots {
            t.push(vec![num(s.t), num(s.values.iter().fold(0.0, |m: f64, v| m.max(v.abs())))]);
            let mut values = run.state.field.values().to_vec();
            for (k, &idx) in lattice.active().iter().enumerate() {
                values[idx] = s.values[k];
            }
            let snap = scheme.state_from_values(values, s.t)?;
            self.field_file(&scheme, &snap);
        }
        let mut gaps = gap_table();
        gap_rows(&mut gaps, "evolve", &run.state.trace_gaps);
        self.files.push(("report.tsv".into(), t.to_tsv()));
        self.files.push(("trace_gaps.tsv".into(), gaps.to_tsv()));
        Ok((true, format!("evolve: reached t = {} in {} steps, sup norm {:e}", run.state.t, run.state.steps, run.state.sup_norm)))
    }

    fn steady(&mut self) -> Result<(bool, String), Error> {
        let cfg = self.cfg;
        let scheme = self.scheme(&cfg.hamiltonian, &cfg.phi.datum())?;
        let st = scheme.initial_state(&|x| cfg.u0.eval(x, 0.0))?;
        let ctrl = scheme.initial_control(&st);
        let run = scheme.run_to_steady(st, ctrl)?;
        self.record_cfl("final", &scheme, run.control.dt, run.control.sigma, run.state.t);
        let mut t = Table::new(&["step", "residual"]);
        for (s, r) in &run.residuals {
            t.push(vec![s.to_string(), num(*r)]);
        }
        let mut gaps = gap_table();
        gap_rows(&mut gaps, "steady", &scheme.trace_gaps(&run.state));
        self.files.push(("report.tsv".into(), t.to_tsv()));
        self.files.push(("trace_gaps.tsv".into(), gaps.to_tsv()));
        self.field_file(&scheme, &run.state);
        Ok((true, format!("steady: converged in {} steps to residual tolerance {:e}", run.state.steps, run.tolerance)))
    }
}

/// Oracle values next to their discrete counterparts (1-D configurations).
pub fn oracle_table(cfg: &RunConfig) -> Result<Table, Error> {
    if cfg.domain.dim() != 1 {
        return Err(Error::Precondition("the quadrature oracles are one-dimensional".into()));
    }
    let (lo, hi) = (cfg.domain.lower()[0], cfg.domain.upper()[0]);
    let scheme = Scheme::new(
        &cfg.domain,
        cfg.kernel.clone(),
        cfg.hamiltonian.clone(),
        cfg.phi.datum().phi,
        false,
        cfg.scheme.clone(),
    )?;
    let state = scheme.initial_state(&|x| cfg.u0.eval(x, 0.0))?;
    let lattice = scheme.lattice();
    let (u0, phi) = (cfg.u0.clone(), cfg.phi.clone());
    let f = oracle::extended(move |x| u0.eval(x, 0.0), move |x| phi.eval(x, 0.0), lo, hi);
    let mut t = Table::new(&["quantity", "x", "oracle", "discrete", "relative_error"]);
    let stride = (lattice.active().len() / 8).max(1);
    let points: Vec<usize> = lattice.active().iter().copied().step_by(stride).collect();
    let masses = hamiltonians::exterior_masses(lattice, scheme.quadrature());
    let rel = |a: f64, b: f64| if a == 0.0 { (b - a).abs() } else { ((b - a) / a).abs() };
    for idx in points {
        let x = lattice.node(idx)[0];
        let e = 1e-6;
        let p = (f(x + e) - f(x - e)) / (2.0 * e);
        let o = oracle::operator_1d(&f, x, p, &cfg.kernel, 1e-11);
        let d = nlhj_core::operators::eval_operator(&state.field, lattice, idx, &[p, 0.0], scheme.quadrature(), nlhj_core::Region::All)?;
        t.push(vec!["operator".into(), num(x), num(o), num(d), num(rel(o, d))]);
        let k = lattice.active().iter().position(|&i| i == idx).expect("active node");
        if lattice.class(idx) == nlhj_core::NodeClass::Interior {
            let o = oracle::exterior_mass_1d(lo, hi, x, &cfg.kernel, 1e-12);
            t.push(vec!["exterior_mass".into(), num(x), num(o), num(masses[k]), num(rel(o, masses[k]))]);
        }
    }
    if let Some(c) = transport_speed(cfg) {
        let ctrl = scheme.initial_control(&state);
        let next = scheme.step(&state, &ctrl)?;
        let u: Vec<f64> = lattice.active().iter().map(|&i| state.field.raw(i)).collect();
        let last = *lattice.active().last().expect("active nodes");
        let right = lattice.offset(last, [1, 0]).map_or(0.0, |j| state.field.raw(j));
        let o = oracle::advection_step(&u, c, lattice.spacing(), ctrl.dt, right);
        for (k, &idx) in lattice.active().iter().enumerate().step_by(stride) {
            let d = next.field.raw(idx);
            t.push(vec!["advection_step".into(), num(lattice.node(idx)[0]), num(o[k]), num(d), num(rel(o[k], d))]);
        }
    }
    Ok(t)
}

/// `c > 0` when the problem is pure transport `u_t = c u_x`: no jumps and a
/// single control with constant drift `c` and no discount or source.
fn transport_speed(cfg: &RunConfig) -> Option<f64> {
    let HamiltonianSpec::Bellman(b) = &cfg.hamiltonian else { return None };
    let [ctl] = b.controls.as_slice() else { return None };
    let probes = [[-0.7, 0.0], [0.1, 0.0], [0.9, 0.0]];
    let c = ctl.b.eval(&probes[0], 0.0)[0];
    let constant = probes.iter().all(|x| ctl.b.eval(x, 0.0)[0] == c && ctl.lambda.eval(x, 0.0) == 0.0 && ctl.f.eval(x, 0.0) == 0.0);
    (cfg.kernel.is_zero() && constant && c > 0.0 && !b.controls[0].b.is_time_dependent()).then_some(c)
}
