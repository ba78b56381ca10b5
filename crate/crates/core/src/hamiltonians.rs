//! Coercive and Bellman Hamiltonians, their monotone numerical fluxes, and
//! the computable assumption checks.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::geometry::{NodeClass, Point};
use crate::grid::Lattice;
use crate::kernels::{Kernel, QuadratureTable};
use crate::math;

pub type SpaceFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;

/// A scalar coefficient field on the closed domain.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Space(SpaceFn),
    SpaceTime(SpaceTimeFn),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Coefficient::Space(_) => f.write_str("Space(..)"),
            Coefficient::SpaceTime(_) => f.write_str("SpaceTime(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

impl Coefficient {
    pub fn space(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Space(Arc::new(f))
    }

    pub fn space_time(f: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::SpaceTime(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: &Point, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Space(f) => f(x),
            Coefficient::SpaceTime(f) => f(x, t),
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Coefficient::SpaceTime(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Constant(c) if *c == 0.0)
    }
}

/// A vector field with one coefficient per axis (the second is ignored in 1-D).
#[derive(Debug, Clone)]
pub struct VectorCoefficient(pub [Coefficient; 2]);

impl VectorCoefficient {
    pub fn constant(b: Point) -> Self {
        VectorCoefficient([Coefficient::Constant(b[0]), Coefficient::Constant(b[1])])
    }

    pub fn zero() -> Self {
        Self::constant([0.0, 0.0])
    }

    #[inline]
    pub fn eval(&self, x: &Point, t: f64) -> Point {
        [self.0[0].eval(x, t), self.0[1].eval(x, t)]
    }

    pub fn is_time_dependent(&self) -> bool {
        self.0.iter().any(Coefficient::is_time_dependent)
    }
}

/// Monotone discretization used for the coercive family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// `H((p- + p+)/2) - sum_a sigma_a (p+_a - p-_a) / 2`.
    LaxFriedrichs,
    /// Godunov-type upwinding of each term; needs no artificial viscosity.
    Upwind,
}

/// `a1 |p|^m + a2 |p|^l + b . p + lambda r - f`.
#[derive(Debug, Clone)]
pub struct CoerciveSpec {
    pub m: f64,
    pub l: f64,
    pub a1: Coefficient,
    pub a2: Coefficient,
    pub b: Option<VectorCoefficient>,
    pub lambda: Coefficient,
    pub f: Coefficient,
    /// Declared lower bound for `a1`.
    pub c0: f64,
    pub flux: FluxKind,
}

impl CoerciveSpec {
    /// `|p|^m` with every other coefficient zero and `C0 = 1`.
    pub fn new(m: f64) -> Self {
        CoerciveSpec {
            m,
            l: 0.0,
            a1: Coefficient::Constant(1.0),
            a2: Coefficient::Constant(0.0),
            b: None,
            lambda: Coefficient::Constant(0.0),
            f: Coefficient::Constant(0.0),
            c0: 1.0,
            flux: FluxKind::LaxFriedrichs,
        }
    }

    pub fn with_a1(mut self, a1: impl Into<Coefficient>, c0: f64) -> Self {
        self.a1 = a1.into();
        self.c0 = c0;
        self
    }

    pub fn with_a2(mut self, a2: impl Into<Coefficient>, l: f64) -> Self {
        self.a2 = a2.into();
        self.l = l;
        self
    }

    pub fn with_drift(mut self, b: VectorCoefficient) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_lambda(mut self, lambda: impl Into<Coefficient>) -> Self {
        self.lambda = lambda.into();
        self
    }

    pub fn with_source(mut self, f: impl Into<Coefficient>) -> Self {
        self.f = f.into();
        self
    }

    pub fn with_flux(mut self, flux: FluxKind) -> Self {
        self.flux = flux;
        self
    }

    /// Structural invariants plus the restriction to exponents for which the
    /// Hamiltonian is Lipschitz on bounded gradient sets.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidHamiltonian(msg));
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad(format!("exponent m must be positive, got {}", self.m));
        }
        if !(self.l >= 0.0 && self.l < self.m) {
            return bad(format!("exponent l must satisfy 0 <= l < m, got l = {}", self.l));
        }
        if self.b.is_some() && self.m <= 1.0 {
            return bad(format!("a drift term needs m > 1, got m = {}", self.m));
        }
        if !(self.c0 > 0.0) {
            return bad(format!("C0 must be positive, got {}", self.c0));
        }
        if self.m < 1.0 || (self.l > 0.0 && self.l < 1.0 && !self.a2.is_zero()) {
            return bad(format!(
                "exponents m = {}, l = {} make H non-Lipschitz at p = 0; the explicit scheme needs m >= 1 and l in {{0}} U [1, m)",
                self.m, self.l
            ));
        }
        Ok(())
    }

    fn is_time_dependent(&self) -> bool {
        self.a1.is_time_dependent()
            || self.a2.is_time_dependent()
            || self.lambda.is_time_dependent()
            || self.f.is_time_dependent()
            || self.b.as_ref().is_some_and(VectorCoefficient::is_time_dependent)
    }
}

/// One control `beta`: contributes `lambda r - b . p - f`.
#[derive(Debug, Clone)]
pub struct Control {
    pub lambda: Coefficient,
    pub b: VectorCoefficient,
    pub f: Coefficient,
}

impl Control {
    pub fn new(lambda: impl Into<Coefficient>, b: VectorCoefficient, f: impl Into<Coefficient>) -> Self {
        Control { lambda: lambda.into(), b, f: f.into() }
    }
}

/// `sup_beta { lambda_beta r - b_beta . p - f_beta }` over a finite control set.
#[derive(Debug, Clone)]
pub struct BellmanSpec {
    pub controls: Vec<Control>,
    /// Declared space-time Lipschitz constant of the drifts.
    pub lipschitz: f64,
}

impl BellmanSpec {
    pub fn new(controls: Vec<Control>, lipschitz: f64) -> Result<Self> {
        if controls.is_empty() {
            return Err(Error::InvalidHamiltonian("control set must be nonempty".into()));
        }
        Ok(BellmanSpec { controls, lipschitz })
    }

    fn is_time_dependent(&self) -> bool {
        self.controls
            .iter()
            .any(|c| c.lambda.is_time_dependent() || c.f.is_time_dependent() || c.b.is_time_dependent())
    }
}

#[derive(Debug, Clone)]
pub enum HamiltonianSpec {
    Coercive(CoerciveSpec),
    Bellman(BellmanSpec),
}

impl HamiltonianSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            HamiltonianSpec::Coercive(c) => c.validate(),
            HamiltonianSpec::Bellman(b) => {
                if b.controls.is_empty() {
                    Err(Error::InvalidHamiltonian("control set must be nonempty".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        match self {
            HamiltonianSpec::Coercive(c) => c.is_time_dependent(),
            HamiltonianSpec::Bellman(b) => b.is_time_dependent(),
        }
    }

    /// Coefficients evaluated at `(x, t)`.
    pub fn freeze(&self, x: &Point, t: f64) -> LocalHamiltonian {
        match self {
            HamiltonianSpec::Coercive(c) => LocalHamiltonian::Coercive {
                m: c.m,
                l: c.l,
                a1: c.a1.eval(x, t),
                a2: c.a2.eval(x, t),
                b: c.b.as_ref().map_or([0.0, 0.0], |b| b.eval(x, t)),
                lambda: c.lambda.eval(x, t),
                f: c.f.eval(x, t),
                flux: c.flux,
            },
            HamiltonianSpec::Bellman(b) => LocalHamiltonian::Bellman(
                b.controls
                    .iter()
                    .map(|c| LocalControl { lambda: c.lambda.eval(x, t), b: c.b.eval(x, t), f: c.f.eval(x, t) })
                    .collect(),
            ),
        }
    }

    /// `h_R` for the built-in families: `lambda` (coercive) or the smallest
    /// `lambda_beta` (Bellman), minimised over the sampled times.
    pub fn derived_floor(&self, x: &Point, times: &[f64]) -> f64 {
        let at = |t: f64| match self {
            HamiltonianSpec::Coercive(c) => c.lambda.eval(x, t),
            HamiltonianSpec::Bellman(b) => {
                b.controls.iter().map(|c| c.lambda.eval(x, t)).fold(f64::INFINITY, f64::min)
            }
        };
        times.iter().map(|t| at(*t)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalControl {
    pub lambda: f64,
    pub b: Point,
    pub f: f64,
}

/// A Hamiltonian with its coefficients frozen at one point and time.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalHamiltonian {
    Coercive { m: f64, l: f64, a1: f64, a2: f64, b: Point, lambda: f64, f: f64, flux: FluxKind },
    Bellman(Vec<LocalControl>),
}

#[inline]
fn dot(a: &Point, b: &Point, dim: usize) -> f64 {
    if dim == 1 {
        a[0] * b[0]
    } else {
        a[0] * b[0] + a[1] * b[1]
    }
}

#[inline]
fn norm(p: &Point, dim: usize) -> f64 {
    if dim == 1 {
        p[0].abs()
    } else {
        math::sqrt(p[0] * p[0] + p[1] * p[1])
    }
}

#[inline]
fn sq(v: f64) -> f64 {
    v * v
}

/// `|p|^e` written through the squared norm.
#[inline]
fn pow_sq(s: f64, e: f64) -> f64 {
    if e == 2.0 {
        s
    } else {
        math::abs_pow(math::sqrt(s), e)
    }
}

impl LocalHamiltonian {
    /// `H(x, t, r, p)`.
    pub fn value(&self, r: f64, p: &Point, dim: usize) -> f64 {
        match self {
            LocalHamiltonian::Coercive { m, l, a1, a2, b, lambda, f, .. } => {
                let n = norm(p, dim);
                a1 * math::abs_pow(n, *m) + a2 * math::abs_pow(n, *l) + dot(b, p, dim) + lambda * r - f
            }
            LocalHamiltonian::Bellman(cs) => cs
                .iter()
                .map(|c| c.lambda * r - dot(&c.b, p, dim) - c.f)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Monotone numerical Hamiltonian from backward (`pm`) and forward (`pp`)
    /// difference quotients. `sigma` is the Lax-Friedrichs viscosity.
    pub fn flux(&self, r: f64, pm: &Point, pp: &Point, sigma: &Point, dim: usize) -> f64 {
        match self {
            LocalHamiltonian::Coercive { m, l, a1, a2, b, lambda, f, flux } => match flux {
                FluxKind::LaxFriedrichs => {
                    let mid = [0.5 * (pm[0] + pp[0]), 0.5 * (pm[1] + pp[1])];
                    let mut v = self.value(r, &mid, dim);
                    for a in 0..dim {
                        v -= 0.5 * sigma[a] * (pp[a] - pm[a]);
                    }
                    v
                }
                FluxKind::Upwind => {
                    // sum of separately monotone pieces
                    let mut grow = 0.0;
                    let mut shrink = 0.0;
                    let mut drift = 0.0;
                    for a in 0..dim {
                        let g = sq(pm[a].max(0.0)).max(sq(pp[a].min(0.0)));
                        let s = sq(pm[a].min(0.0)).max(sq(pp[a].max(0.0)));
                        grow += g;
                        shrink += s;
                        drift += b[a].max(0.0) * pm[a] + b[a].min(0.0) * pp[a];
                    }
                    let second = if *a2 >= 0.0 { a2 * pow_sq(grow, *l) } else { a2 * pow_sq(shrink, *l) };
                    a1 * pow_sq(grow, *m) + second + drift + lambda * r - f
                }
            },
            LocalHamiltonian::Bellman(cs) => cs
                .iter()
                .map(|c| {
                    let mut v = c.lambda * r - c.f;
                    for a in 0..dim {
                        // -b p: forward quotient where b > 0, backward where b < 0
                        v -= c.b[a].max(0.0) * pp[a] + c.b[a].min(0.0) * pm[a];
                    }
                    v
                })
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Per-axis bound on the flux's sensitivity to the gradient over the
    /// given one-sided quotients. A Lax-Friedrichs flux is monotone iff
    /// `sigma` dominates this; for the upwind fluxes it enters the time-step
    /// restriction only.
    pub fn gradient_sensitivity(&self, pm: &Point, pp: &Point, dim: usize) -> Point {
        let mut out = [0.0; 2];
        match self {
            LocalHamiltonian::Coercive { m, l, a1, a2, b, flux, .. } => {
                let mut q = [0.0; 2];
                for a in 0..dim {
                    q[a] = match flux {
                        FluxKind::LaxFriedrichs => pm[a].abs().max(pp[a].abs()),
                        FluxKind::Upwind => {
                            let grow = pm[a].max(0.0).max(-pp[a].min(0.0));
                            if *a2 < 0.0 {
                                grow.max(-pm[a].min(0.0)).max(pp[a].max(0.0))
                            } else {
                                grow
                            }
                        }
                    };
                }
                let n = norm(&q, dim);
                let slope = a1.abs() * m * math::abs_pow(n, m - 1.0)
                    + if *l >= 1.0 { a2.abs() * l * math::abs_pow(n, l - 1.0) } else { 0.0 };
                for a in 0..dim {
                    out[a] = slope + b[a].abs();
                }
            }
            LocalHamiltonian::Bellman(cs) => {
                for c in cs {
                    for a in 0..dim {
                        out[a] = out[a].max(c.b[a].abs());
                    }
                }
            }
        }
        out
    }

    /// Bound on `dH/dr`.
    pub fn r_sensitivity(&self) -> f64 {
        match self {
            LocalHamiltonian::Coercive { lambda, .. } => lambda.max(0.0),
            LocalHamiltonian::Bellman(cs) => cs.iter().map(|c| c.lambda).fold(0.0, f64::max),
        }
    }

    /// Whether the flux needs artificial viscosity.
    pub fn uses_viscosity(&self) -> bool {
        matches!(self, LocalHamiltonian::Coercive { flux: FluxKind::LaxFriedrichs, .. })
    }
}

/// Pointwise Hamiltonian value.
pub fn eval_hamiltonian(spec: &HamiltonianSpec, x: &Point, t: f64, r: f64, p: &Point, dim: usize) -> f64 {
    spec.freeze(x, t).value(r, p, dim)
}

/// Monotone numerical Hamiltonian. Fails with `ViscosityUnderflow` when a
/// Lax-Friedrichs `sigma` does not dominate the gradient sensitivity.
pub fn numerical_hamiltonian(
    spec: &HamiltonianSpec,
    x: &Point,
    t: f64,
    r: f64,
    pm: &Point,
    pp: &Point,
    sigma: &Point,
    dim: usize,
) -> Result<f64> {
    let local = spec.freeze(x, t);
    if local.uses_viscosity() {
        let need = local.gradient_sensitivity(pm, pp, dim);
        for a in 0..dim {
            if need[a] > sigma[a] {
                return Err(Error::ViscosityUnderflow { axis: a, needed: need[a], have: sigma[a] });
            }
        }
    }
    Ok(local.flux(r, pm, pp, sigma, dim))
}

fn active_min(lattice: &Lattice, mut g: impl FnMut(&Point) -> f64) -> (f64, Point) {
    let mut best = (f64::INFINITY, [0.0; 2]);
    for &idx in lattice.active() {
        let x = lattice.node(idx);
        let v = g(&x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

/// Exterior mass at every active node, in `lattice.active()` order.
pub fn exterior_masses(lattice: &Lattice, qt: &QuadratureTable) -> Vec<f64> {
    lattice
        .active()
        .iter()
        .map(|&idx| {
            let mut m = qt.tail_mass();
            for &(d, w) in qt.offsets() {
                let ext = match lattice.offset(idx, d) {
                    Some(j) => lattice.class(j) == NodeClass::Exterior,
                    None => true,
                };
                if ext {
                    m += w;
                }
            }
            m
        })
        .collect()
}

fn floor_plus_mass(
    lattice: &Lattice,
    qt: &QuadratureTable,
    floor: &dyn Fn(&Point) -> f64,
) -> (f64, Point) {
    let masses = exterior_masses(lattice, qt);
    let mut best = (f64::INFINITY, [0.0; 2]);
    for (k, &idx) in lattice.active().iter().enumerate() {
        let x = lattice.node(idx);
        let v = floor(&x) + masses[k];
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

/// `min_x h_R(x) + exterior_mass(x)` over the closed domain; passes when it is
/// not below `-tol`.
pub fn check_h2_with(lattice: &Lattice, qt: &QuadratureTable, h_r: &dyn Fn(&Point) -> f64, tol: f64) -> Certificate {
    let (v, x) = floor_plus_mass(lattice, qt, h_r);
    Certificate::new("H2", v, v >= -tol, format!("min of h_R + exterior mass is {v:.6e} at {x:?}"))
}

/// `check_h2_with` using the derived floor of a built-in family over the
/// sampled time window.
pub fn check_h2(spec: &HamiltonianSpec, lattice: &Lattice, qt: &QuadratureTable, window: (f64, f64)) -> Certificate {
    let times = sample_window(window);
    check_h2_with(lattice, qt, &|x| spec.derived_floor(x, &times), 1e-12)
}

/// `mu0 = min_x h(x) + exterior_mass(x)`; passes when `mu0 >= mu_min`.
pub fn check_h2prime_with(
    lattice: &Lattice,
    qt: &QuadratureTable,
    floor: &dyn Fn(&Point) -> f64,
    mu_min: f64,
) -> Certificate {
    let (v, x) = floor_plus_mass(lattice, qt, floor);
    Certificate::new(
        "H2'",
        v,
        v >= mu_min && v > 0.0,
        format!("mu0 = {v:.6e} (attained at {x:?}), required >= {mu_min:.3e}"),
    )
}

pub fn check_h2prime(
    spec: &HamiltonianSpec,
    lattice: &Lattice,
    qt: &QuadratureTable,
    window: (f64, f64),
    mu_min: f64,
) -> Certificate {
    let times = sample_window(window);
    check_h2prime_with(lattice, qt, &|x| spec.derived_floor(x, &times), mu_min)
}

/// `m > alpha` strictly and `a1 >= C0 > 0` on the grid.
pub fn check_superfractional(spec: &CoerciveSpec, kernel: &Kernel, lattice: &Lattice, window: (f64, f64)) -> Certificate {
    let margin = spec.m - kernel.order();
    let times = sample_window(window);
    let (a1_min, x) = active_min(lattice, |x| times.iter().map(|t| spec.a1.eval(x, *t)).fold(f64::INFINITY, f64::min));
    let pass = margin > 0.0 && spec.c0 > 0.0 && a1_min >= spec.c0;
    Certificate::new(
        "A1",
        margin,
        pass,
        format!("m - alpha = {margin:.6e}; min a1 = {a1_min:.6e} at {x:?} vs C0 = {:.6e}", spec.c0),
    )
}

/// Largest `|u0 - phi(., 0)|` over boundary nodes against
/// `tol = 1e-12 (1 + |u0|_inf)` unless a tolerance is given.
pub fn check_compatibility(lattice: &Lattice, u0: &[f64], phi0: &[f64], tol: Option<f64>) -> Certificate {
    let sup = lattice.active().iter().map(|&i| u0[i].abs()).fold(0.0, f64::max);
    let tol = tol.unwrap_or(1e-12 * (1.0 + sup));
    let mut gap = 0.0f64;
    for &idx in lattice.active() {
        if lattice.class(idx) == NodeClass::BoundaryTrace {
            gap = gap.max((u0[idx] - phi0[idx]).abs());
        }
    }
    Certificate::new("H0", gap, gap <= tol, format!("max boundary gap {gap:.6e}, tolerance {tol:.3e}"))
}

/// Samples `H(u) - H(v) >= h_R (u - v)` for `u >= v` at every active node.
pub fn check_h1(spec: &HamiltonianSpec, lattice: &Lattice, r: f64, window: (f64, f64)) -> Certificate {
    let dim = lattice.dim();
    let times = sample_window(window);
    let levels: [f64; 5] = [-1.0, -0.5, 0.0, 0.25, 1.0];
    let grads: [Point; 5] = [[0.0, 0.0], [1.0, -2.0], [-3.0, 0.5], [10.0, 10.0], [-0.1, 7.0]];
    let mut worst = f64::INFINITY;
    for &idx in lattice.active() {
        let x = lattice.node(idx);
        for &t in &times {
            let local = spec.freeze(&x, t);
            let floor = spec.derived_floor(&x, &[t]);
            for (i, &su) in levels.iter().enumerate() {
                for &sv in &levels[..=i] {
                    let (u, v) = (su.max(sv) * r, su.min(sv) * r);
                    if u == v {
                        continue;
                    }
                    for p in &grads {
                        let slack = local.value(u, p, dim) - local.value(v, p, dim) - floor * (u - v);
                        worst = worst.min(slack / (u - v));
                    }
                }
            }
        }
    }
    let tol = 1e-9;
    Certificate::new("H1", worst, worst >= -tol, format!("worst normalised slack {worst:.3e}"))
}

/// Sampled space-time Lipschitz quotients of every drift against the
/// declared constant.
pub fn check_lipschitz(spec: &BellmanSpec, lattice: &Lattice, window: (f64, f64)) -> Certificate {
    let dim = lattice.dim();
    let times = sample_window(window);
    let h = lattice.spacing();
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let mut worst = 0.0f64;
    for c in &spec.controls {
        for &idx in lattice.active() {
            let x = lattice.node(idx);
            for (k, &t) in times.iter().enumerate() {
                let b = c.b.eval(&x, t);
                for a in 0..dim {
                    let mut d = [0isize; 2];
                    d[a] = 1;
                    if let Some(j) = lattice.offset(idx, d) {
                        if lattice.class(j) != NodeClass::Exterior {
                            let by = c.b.eval(&lattice.node(j), t);
                            worst = worst.max(norm(&[b[0] - by[0], b[1] - by[1]], dim) / h);
                        }
                    }
                }
                if k + 1 < times.len() && dt > 0.0 {
                    let bt = c.b.eval(&x, times[k + 1]);
                    worst = worst.max(norm(&[b[0] - bt[0], b[1] - bt[1]], dim) / dt);
                }
            }
        }
    }
    let pass = worst <= spec.lipschitz * (1.0 + 1e-9);
    Certificate::new("L", worst, pass, format!("largest sampled quotient {worst:.6e} vs L = {:.6e}", spec.lipschitz))
}

pub(crate) fn sample_window(window: (f64, f64)) -> Vec<f64> {
    let (t0, t1) = window;
    if t1 <= t0 {
        return alloc::vec![t0];
    }
    (0..=10).map(|k| t0 + (t1 - t0) * k as f64 / 10.0).collect()
}
