//! Packaged experiments: comparison, boundary attainment and loss, interior
//! Hölder control, large-time convergence and its exponential rate.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::boundary::{check_sigma, BoundaryTag};
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Face, NodeClass, Point};
use crate::hamiltonians::{self, BellmanSpec, CoerciveSpec, HamiltonianSpec};
use crate::kernels::Kernel;
use crate::math;
use crate::solver::{DatumFn, Scheme, SchemeConfig, SolveState, StepControl};

pub type InitialFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Exterior datum with a flag telling whether it depends on time.
#[derive(Clone)]
pub struct Datum {
    pub phi: DatumFn,
    pub time_dependent: bool,
}

impl core::fmt::Debug for Datum {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Datum").field("time_dependent", &self.time_dependent).finish()
    }
}

impl Datum {
    pub fn constant(c: f64) -> Self {
        Datum { phi: Arc::new(move |_: &Point, _: f64| c), time_dependent: false }
    }

    pub fn stationary(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Datum { phi: Arc::new(move |x: &Point, _: f64| f(x)), time_dependent: false }
    }

    pub fn evolving(f: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        Datum { phi: Arc::new(f), time_dependent: true }
    }
}

/// Domain, kernel and discretization shared by the runs of an experiment.
#[derive(Debug, Clone)]
pub struct Setup {
    pub domain: Domain,
    pub kernel: Kernel,
    pub cfg: SchemeConfig,
}

impl Setup {
    fn scheme(&self, spec: &HamiltonianSpec, datum: &Datum) -> Result<Scheme> {
        Scheme::new(&self.domain, self.kernel.clone(), spec.clone(), datum.phi.clone(), datum.time_dependent, self.cfg.clone())
    }

    fn with_spacing(&self, h: f64) -> Setup {
        let mut s = self.clone();
        s.cfg.h = h;
        s.cfg.delta = s.cfg.delta.max(h);
        s
    }
}

fn sup_diff(scheme: &Scheme, a: &SolveState, b: &SolveState) -> f64 {
    scheme
        .lattice()
        .active()
        .iter()
        .map(|&i| (a.field.raw(i) - b.field.raw(i)).abs())
        .fold(0.0, f64::max)
}

fn widen(a: &StepControl, b: &StepControl) -> StepControl {
    StepControl { dt: a.dt.min(b.dt), sigma: [a.sigma[0].max(b.sigma[0]), a.sigma[1].max(b.sigma[1])] }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `max_{n, i} (u_i^n - v_i^n)^+`.
    pub max_violation: f64,
    pub steps: usize,
    pub dt: f64,
    pub pass: bool,
}

/// Runs the ordered pairs `u0 <= v0`, `phi_u <= phi_v` in lockstep with one
/// shared step control and records the worst ordering violation.
pub fn comparison_experiment(
    setup: &Setup,
    spec: &HamiltonianSpec,
    initial: (&InitialFn, &InitialFn),
    data: (&Datum, &Datum),
    t_final: f64,
) -> Result<ComparisonReport> {
    let su = setup.scheme(spec, data.0)?;
    let sv = setup.scheme(spec, data.1)?;
    let mut u = su.initial_state(&|x| (initial.0)(x))?;
    let mut v = sv.initial_state(&|x| (initial.1)(x))?;
    let lattice = su.lattice();
    for idx in 0..lattice.len() {
        let ordered = if lattice.class(idx) == NodeClass::Exterior {
            u.field.datum()[idx] <= v.field.datum()[idx]
        } else {
            u.field.raw(idx) <= v.field.raw(idx) && u.field.datum()[idx] <= v.field.datum()[idx]
        };
        if !ordered {
            return Err(Error::Precondition(format!("data are not ordered at node {:?}", lattice.node(idx))));
        }
    }
    let mut ctrl = widen(&su.initial_control(&u), &sv.initial_control(&v));
    ctrl.dt = su.stable_dt(&ctrl, 0.0).min(sv.stable_dt(&ctrl, 0.0));
    let mut worst = 0.0f64;
    let eps = 1e-12 * (1.0 + t_final);
    while u.t < t_final - eps {
        if !su.is_stationary() || !sv.is_stationary() {
            ctrl.dt = su.stable_dt(&ctrl, u.t).min(sv.stable_dt(&ctrl, u.t));
        }
        let trial = StepControl { dt: ctrl.dt.min(t_final - u.t), sigma: ctrl.sigma };
        let nu = su.step(&u, &trial);
        let nv = sv.step(&v, &trial);
        match (nu, nv) {
            (Ok(a), Ok(b)) => {
                u = a;
                v = b;
            }
            (Err(Error::ViscosityUnderflow { axis, needed, .. }), _) | (_, Err(Error::ViscosityUnderflow { axis, needed, .. })) => {
                while ctrl.sigma[axis] < needed {
                    ctrl.sigma[axis] = (2.0 * ctrl.sigma[axis]).max(1.0);
                }
                ctrl.dt = su.stable_dt(&ctrl, u.t).min(sv.stable_dt(&ctrl, u.t));
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
        for &i in lattice.active() {
            worst = worst.max(u.field.raw(i) - v.field.raw(i));
        }
    }
    Ok(ComparisonReport { max_violation: worst, steps: u.steps, dt: ctrl.dt, pass: worst <= 1e-12 })
}

/// One face at one spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub h: f64,
    pub face: Face,
    pub tag: Option<BoundaryTag>,
    /// `phi - u` at the face midpoint at the final time.
    pub final_gap: f64,
    /// Largest gap over the face and the recorded instants.
    pub max_gap: f64,
    pub mean_gap: f64,
    /// A gap below `-h (1 + |phi|)`, beyond first-order error: the
    /// subsolution trace exceeds the datum.
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceVerdict {
    pub face: Face,
    pub tag: Option<BoundaryTag>,
    /// Successive `gap(h/2) / gap(h)` ratios (attainment faces).
    pub ratios: Vec<f64>,
    /// `(max - min) / max` of the final gaps over the ladder (loss faces).
    pub variation: f64,
    pub min_gap: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceGapReport {
    pub rows: Vec<GapRow>,
    pub faces: Vec<FaceVerdict>,
    pub sigma: Certificate,
    pub pass: bool,
}

/// Final-time trace gaps over a refinement ladder. Outflow (`Out`) faces
/// must see the gap shrink by a factor below 0.7 per halving; inflow (`In`)
/// faces must keep it within 10% across the ladder and above
/// `loss_threshold`.
pub fn boundary_behavior_experiment(
    setup: &Setup,
    spec: &BellmanSpec,
    datum: &Datum,
    u0: &InitialFn,
    t_final: f64,
    spacings: &[f64],
    loss_threshold: Option<f64>,
) -> Result<TraceGapReport> {
    let ue = setup.kernel.check_ellipticity();
    if !ue.pass {
        return Err(Error::Precondition(format!("uniform ellipticity fails: {}", ue.detail)));
    }
    if setup.kernel.order() >= 1.0 {
        return Err(Error::Precondition(format!("boundary experiment needs order < 1, got {}", setup.kernel.order())));
    }
    if spacings.len() < 2 {
        return Err(Error::Precondition("a refinement ladder needs at least two spacings".into()));
    }
    let sigma = check_sigma(spec, &setup.domain, (0.0, t_final), 17, 10);
    let tag_of = |face: Face| sigma.components.iter().find(|c| c.face == face).and_then(|c| c.tag);
    let hspec = HamiltonianSpec::Bellman(spec.clone());
    let mut rows = Vec::new();
    for &h in spacings {
        let s = setup.with_spacing(h).scheme(&hspec, datum)?;
        let st = s.initial_state(&|x| u0(x))?;
        let ctrl = s.initial_control(&st);
        let run = s.run_to_time(st, ctrl, t_final, Some(t_final / 10.0))?;
        for face in setup.domain.faces() {
            let gaps: Vec<_> = run.state.trace_gaps.iter().filter(|g| g.face == face).collect();
            let last = gaps.last().expect("the final instant is always recorded");
            let max_gap = gaps.iter().map(|g| g.max).fold(f64::NEG_INFINITY, f64::max);
            let phi_scale = 1.0 + s.datum(&setup.domain.face_midpoint(face), t_final).abs();
            let negative = gaps.iter().any(|g| g.mid < -h * phi_scale);
            rows.push(GapRow {
                h,
                face,
                tag: tag_of(face),
                final_gap: last.mid,
                max_gap,
                mean_gap: last.mean,
                negative,
            });
        }
    }
    let mut faces = Vec::new();
    for face in setup.domain.faces() {
        let gaps: Vec<f64> = rows.iter().filter(|r| r.face == face).map(|r| r.final_gap).collect();
        let tag = tag_of(face);
        let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
        let hi = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        let variation = if hi > 0.0 { (hi - lo) / hi } else { f64::INFINITY };
        let (pass, detail) = match tag {
            Some(BoundaryTag::Out) => {
                let ok = ratios.iter().all(|r| r.abs() < 0.7);
                (ok, format!("attainment: gap ratios {ratios:.4?} (need < 0.7)"))
            }
            Some(BoundaryTag::In) => {
                let floor_ok = loss_threshold.is_none_or(|t| lo > t);
                let ok = variation < 0.1 && lo > 0.0 && floor_ok;
                (
                    ok,
                    format!(
                        "loss: gaps {gaps:.6?}, variation {variation:.4} (need < 0.1), threshold {}",
                        loss_threshold.map_or(String::from("unset"), |t| format!("{t}"))
                    ),
                )
            }
            _ => (true, String::from("mixed or inhomogeneous face: reported only")),
        };
        faces.push(FaceVerdict { face, tag, ratios, variation, min_gap: lo, pass, detail });
    }
    let pass = faces.iter().all(|f| f.pass);
    Ok(TraceGapReport { rows, faces, sigma: sigma.certificate, pass })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossRow {
    pub scale: f64,
    pub sup_norm: f64,
    pub holder_quotient: f64,
    /// Midpoint boundary gap of the steady solution, per face.
    pub gaps: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoerciveLossReport {
    pub exponent: f64,
    pub rows: Vec<LossRow>,
    /// `Q(c_last) / Q(c_prev)`.
    pub ratio: f64,
    pub scale_ratio: f64,
    pub certificate: Certificate,
    pub pass: bool,
}

/// `max |u(x) - u(y)| / |x - y|^gamma` over active pairs with `|x - y| <= radius`.
pub fn holder_quotient(scheme: &Scheme, state: &SolveState, gamma: f64, radius: f64) -> f64 {
    let lattice = scheme.lattice();
    let nodes: Vec<(Point, f64)> = lattice.active().iter().map(|&i| (lattice.node(i), state.field.raw(i))).collect();
    let mut q = 0.0f64;
    for (a, (x, ux)) in nodes.iter().enumerate() {
        for (y, uy) in &nodes[a + 1..] {
            let dx = x[0] - y[0];
            let dy = x[1] - y[1];
            let r = math::sqrt(dx * dx + dy * dy);
            if r <= radius * (1.0 + 1e-12) {
                q = q.max((ux - uy).abs() / math::powf(r, gamma));
            }
        }
    }
    q
}

/// Steady solutions for `phi = c` over the scales; the Hölder quotient with
/// exponent `(m - alpha)/m` must grow by less than `0.9` times the last
/// scale ratio.
pub fn coercive_loss_experiment(setup: &Setup, spec: &CoerciveSpec, scales: &[f64]) -> Result<CoerciveLossReport> {
    let lattice = crate::grid::Lattice::new(&setup.domain, setup.cfg.h, setup.cfg.h)?;
    let cert = hamiltonians::check_superfractional(spec, &setup.kernel, &lattice, (0.0, 0.0));
    if !cert.pass {
        return Err(Error::Precondition(format!("superfractional coercivity fails: {}", cert.detail)));
    }
    if scales.len() < 2 {
        return Err(Error::Precondition("the scale sweep needs at least two values".into()));
    }
    let gamma = (spec.m - setup.kernel.order()) / spec.m;
    let hspec = HamiltonianSpec::Coercive(spec.clone());
    let mut rows = Vec::new();
    for &c in scales {
        let s = setup.scheme(&hspec, &Datum::constant(c))?;
        let st = s.initial_state(&|_| 0.0)?;
        let ctrl = s.initial_control(&st);
        let run = s.run_to_steady(st, ctrl)?;
        let gaps = s.trace_gaps(&run.state).iter().map(|g| g.mid).collect();
        rows.push(LossRow {
            scale: c,
            sup_norm: run.state.sup_norm,
            holder_quotient: holder_quotient(&s, &run.state, gamma, 0.25),
            gaps,
            steps: run.state.steps,
        });
    }
    let n = rows.len();
    let scale_ratio = rows[n - 1].scale / rows[n - 2].scale;
    let ratio = rows[n - 1].holder_quotient / rows[n - 2].holder_quotient;
    let pass = ratio < 0.9 * scale_ratio;
    Ok(CoerciveLossReport { exponent: gamma, rows, ratio, scale_ratio, certificate: cert, pass })
}

/// `bound(t) = e^{-mu0 t} (|u0 - u_inf| + G(t))` with
/// `G(t) = mu0 int_{-inf}^t g(s) e^{mu0 s} ds` and `g` the running supremum
/// of the datum gap from `t` on, clamped to `g(0)` for negative times.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBound {
    pub mu0: f64,
    pub initial_gap: f64,
    pub times: Vec<f64>,
    pub g: Vec<f64>,
    /// `e^{-mu0 t} G(t)`.
    pub damped_g: Vec<f64>,
    pub bound: Vec<f64>,
}

impl RateBound {
    /// `times` must start at zero and increase. `G` is integrated exactly
    /// over the piecewise-constant envelope `g(s) <= g(t_k)` on
    /// `[t_k, t_{k+1}]`, so the result over-estimates the continuous `G`.
    pub fn new(mu0: f64, initial_gap: f64, times: &[f64], datum_gap: &[f64]) -> Self {
        let n = times.len();
        let mut g = datum_gap.to_vec();
        for k in (0..n.saturating_sub(1)).rev() {
            g[k] = g[k].max(g[k + 1]);
        }
        let mut damped_g = Vec::with_capacity(n);
        let mut bound = Vec::with_capacity(n);
        let mut e = g.first().copied().unwrap_or(0.0);
        for k in 0..n {
            if k > 0 {
                let decay = math::exp(-mu0 * (times[k] - times[k - 1]));
                e = decay * e + g[k - 1] * (1.0 - decay);
            }
            damped_g.push(e);
            bound.push(math::exp(-mu0 * times[k]) * initial_gap + e);
        }
        RateBound { mu0, initial_gap, times: times.to_vec(), g, damped_g, bound }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub t: f64,
    pub deviation: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub certificate: Certificate,
    pub rate: RateBound,
    pub curve: Vec<RatePoint>,
    pub slack: f64,
    /// First snapshot with `deviation > bound (1 + slack)`.
    pub violation: Option<RatePoint>,
    /// Decay exponent fitted on the later half of the snapshots that lie
    /// above the steady solve's accuracy floor.
    pub fitted_exponent: f64,
    pub steady_steps: usize,
    pub dt: f64,
    pub pass: bool,
}

impl RateReport {
    pub fn into_result(self) -> Result<RateReport> {
        match &self.violation {
            Some(p) => Err(Error::BoundViolated { t: p.t, deviation: p.deviation, bound: p.bound }),
            None => Ok(self),
        }
    }
}

/// Least-squares slope of `ln y` against `t` over points with `y > floor`.
pub fn fit_decay(points: &[(f64, f64)], floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > floor).map(|p| (p.0, math::ln(p.1))).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    -sxy / sxx
}

/// Largest `|phi(x, t) - phi_bar(x)|` over the non-interior nodes.
fn datum_gap(scheme: &Scheme, datum: &Datum, limit: &Datum, t: f64) -> f64 {
    let lattice = scheme.lattice();
    (0..lattice.len())
        .filter(|&i| lattice.class(i) != NodeClass::Interior)
        .map(|i| {
            let x = lattice.node(i);
            ((datum.phi)(&x, t) - (limit.phi)(&x, t)).abs()
        })
        .fold(0.0, f64::max)
}

/// Options of the rate experiment.
#[derive(Clone)]
pub struct RateOptions {
    pub t_final: f64,
    pub every: f64,
    /// Relative slack on the bound.
    pub slack: f64,
    /// Smallest acceptable `mu0`.
    pub mu_min: f64,
    /// Floor `h` in the nondegeneracy condition; `None` derives it from the family.
    pub floor: Option<Arc<dyn Fn(&Point) -> f64 + Send + Sync>>,
}

impl core::fmt::Debug for RateOptions {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RateOptions")
            .field("t_final", &self.t_final)
            .field("every", &self.every)
            .field("slack", &self.slack)
            .field("mu_min", &self.mu_min)
            .field("floor", &self.floor.as_ref().map(|_| "custom"))
            .finish()
    }
}

impl RateOptions {
    pub fn new(t_final: f64, every: f64) -> Self {
        RateOptions { t_final, every, slack: 0.05, mu_min: 1e-6, floor: None }
    }
}

/// Computes `u_inf` for the limit datum, runs the evolution with `datum`
/// and checks the deviation against the exponential bound at every snapshot.
pub fn rate_experiment(
    setup: &Setup,
    spec: &HamiltonianSpec,
    datum: &Datum,
    limit: &Datum,
    u0: &InitialFn,
    opts: &RateOptions,
) -> Result<RateReport> {
    if spec.is_time_dependent() {
        return Err(Error::Precondition("the rate experiment needs a time-independent Hamiltonian".into()));
    }
    if limit.time_dependent {
        return Err(Error::Precondition("the limit datum must not depend on time".into()));
    }
    let steady = setup.scheme(spec, limit)?;
    let certificate = match &opts.floor {
        Some(f) => hamiltonians::check_h2prime_with(steady.lattice(), steady.quadrature(), &|x| f(x), opts.mu_min),
        None => hamiltonians::check_h2prime(spec, steady.lattice(), steady.quadrature(), (0.0, 0.0), opts.mu_min),
    };
    if !certificate.pass {
        return Err(Error::Precondition(format!("nondegeneracy fails: {}", certificate.detail)));
    }
    let mu0 = certificate.value;
    let st = steady.initial_state(&|x| u0(x))?;
    let ctrl = steady.initial_control(&st);
    let u_inf = steady.run_to_steady(st, ctrl)?;
    let evolving = setup.scheme(spec, datum)?;
    let st = evolving.initial_state(&|x| u0(x))?;
    let initial_gap = sup_diff(&evolving, &st, &u_inf.state);
    let ctrl = evolving.initial_control(&st);
    let run = evolving.run_to_time(st, ctrl, opts.t_final, Some(opts.every))?;
    let lattice = evolving.lattice();
    let times: Vec<f64> = run.snapshots.iter().map(|s| s.t).collect();
    let deviations: Vec<f64> = run
        .snapshots
        .iter()
        .map(|s| {
            lattice
                .active()
                .iter()
                .enumerate()
                .map(|(k, &i)| (s.values[k] - u_inf.state.field.raw(i)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let gaps: Vec<f64> = times.iter().map(|&t| datum_gap(&evolving, datum, limit, t)).collect();
    let rate = RateBound::new(mu0, initial_gap, &times, &gaps);
    let curve: Vec<RatePoint> = times
        .iter()
        .zip(&deviations)
        .zip(&rate.bound)
        .map(|((&t, &deviation), &bound)| RatePoint { t, deviation, bound })
        .collect();
    let violation = curve.iter().find(|p| p.deviation > p.bound * (1.0 + opts.slack)).cloned();
    // the deviation bottoms out at the steady solve's own accuracy; fit the
    // second half of the part that is still decaying above that floor
    let floor = 1e3 * u_inf.tolerance / mu0;
    let above: Vec<(f64, f64)> =
        curve.iter().filter(|p| p.t > 0.0 && p.deviation > floor).map(|p| (p.t, p.deviation)).collect();
    let fitted_exponent = fit_decay(&above[above.len() / 2..], floor);
    Ok(RateReport {
        certificate,
        rate,
        curve,
        slack: opts.slack,
        pass: violation.is_none(),
        violation,
        fitted_exponent,
        steady_steps: u_inf.state.steps,
        dt: run.control.dt,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub certificate: Certificate,
    /// Residual tolerance of the steady solves (the larger of the two).
    pub tolerance: f64,
    pub difference: f64,
    /// `2 tolerance / mu0`.
    pub bound: f64,
    pub steps: [usize; 2],
    pub pass: bool,
}

/// Steady solutions from two initial data. A residual `eps` keeps a steady
/// solve within `eps / mu0` of the discrete steady state, so the two must
/// agree within `2 eps / mu0`.
pub fn uniqueness_experiment(
    setup: &Setup,
    spec: &HamiltonianSpec,
    datum: &Datum,
    initial: (&InitialFn, &InitialFn),
    mu_min: f64,
) -> Result<UniquenessReport> {
    let s = setup.scheme(spec, datum)?;
    let certificate = hamiltonians::check_h2prime(spec, s.lattice(), s.quadrature(), (0.0, 0.0), mu_min);
    if !certificate.pass {
        return Err(Error::Precondition(format!("nondegeneracy fails: {}", certificate.detail)));
    }
    let solve = |u0: &InitialFn| -> Result<crate::solver::SteadyRun> {
        let st = s.initial_state(&|x| u0(x))?;
        let ctrl = s.initial_control(&st);
        s.run_to_steady(st, ctrl)
    };
    let a = solve(initial.0)?;
    let b = solve(initial.1)?;
    let tolerance = a.tolerance.max(b.tolerance);
    let difference = sup_diff(&s, &a.state, &b.state);
    let bound = 2.0 * tolerance / certificate.value;
    Ok(UniquenessReport {
        certificate,
        tolerance,
        difference,
        bound,
        steps: [a.state.steps, b.state.steps],
        pass: difference <= bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeTimeReport {
    /// `(T, |u(T) - u_inf|)` along the ladder.
    pub ladder: Vec<(f64, f64)>,
    pub hypotheses: Certificate,
    pub tolerance: f64,
    pub pass: bool,
}

/// Sampled convergence of the data: the gap to the limit over
/// `[t_last, 2 t_last]` must fall below a tenth of its size over `[0, t_first]`
/// (plus `1e-6`). Gradients and levels for the Hamiltonian are sampled on a
/// fixed small set.
pub fn check_data_convergence(
    scheme: &Scheme,
    spec: &HamiltonianSpec,
    limit_spec: &HamiltonianSpec,
    datum: &Datum,
    limit: &Datum,
    t_first: f64,
    t_last: f64,
) -> Certificate {
    let lattice = scheme.lattice();
    let dim = lattice.dim();
    let gap_at = |t: f64| -> f64 {
        let mut d = datum_gap(scheme, datum, limit, t);
        for &idx in lattice.active() {
            let x = lattice.node(idx);
            let a = spec.freeze(&x, t);
            let b = limit_spec.freeze(&x, t);
            for r in [-1.0, 0.0, 1.0] {
                for p in [[0.0, 0.0], [1.0, -1.0], [-2.0, 0.5]] {
                    d = d.max((a.value(r, &p, dim) - b.value(r, &p, dim)).abs());
                }
            }
        }
        d
    };
    let early = (0..=20).map(|k| gap_at(t_first * k as f64 / 20.0)).fold(0.0, f64::max);
    let late = (0..=40).map(|k| gap_at(t_last * (1.0 + k as f64 / 40.0))).fold(0.0, f64::max);
    let pass = late <= 0.1 * early + 1e-6;
    Certificate::new(
        "data convergence",
        late,
        pass,
        format!("sup gap over [0, {t_first}] is {early:.3e}; over [{t_last}, {}] it is {late:.3e}", 2.0 * t_last),
    )
}

/// `|u(T) - u_inf|` along an increasing ladder of final times; the deviations
/// must not increase (up to `1e-9` relative) and the last must be below
/// `tolerance`.
pub fn large_time_experiment(
    setup: &Setup,
    spec: &HamiltonianSpec,
    limit_spec: &HamiltonianSpec,
    datum: &Datum,
    limit: &Datum,
    u0: &InitialFn,
    ladder: &[f64],
    tolerance: f64,
) -> Result<LargeTimeReport> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("the time ladder must be nonempty and increasing".into()));
    }
    if limit_spec.is_time_dependent() || limit.time_dependent {
        return Err(Error::Precondition("limit data must not depend on time".into()));
    }
    let evolving = setup.scheme(spec, datum)?;
    let hypotheses =
        check_data_convergence(&evolving, spec, limit_spec, datum, limit, ladder[0], ladder[ladder.len() - 1]);
    if !hypotheses.pass {
        return Err(Error::Precondition(format!("data do not converge: {}", hypotheses.detail)));
    }
    let steady = setup.scheme(limit_spec, limit)?;
    let st = steady.initial_state(&|x| u0(x))?;
    let ctrl = steady.initial_control(&st);
    let u_inf = steady.run_to_steady(st, ctrl)?;
    let mut state = evolving.initial_state(&|x| u0(x))?;
    let mut ctrl = evolving.initial_control(&state);
    let mut out = Vec::new();
    for &t in ladder {
        let run = evolving.run_to_time(state, ctrl, t, None)?;
        out.push((t, sup_diff(&evolving, &run.state, &u_inf.state)));
        state = run.state;
        ctrl = run.control;
    }
    let monotone = out.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-15);
    let pass = monotone && out.last().is_some_and(|p| p.1 < tolerance);
    Ok(LargeTimeReport { ladder: out, hypotheses, tolerance, pass })
}
