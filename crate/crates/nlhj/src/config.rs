//! Run configurations: a TOML file with `domain`, `kernel`, `hamiltonian`,
//! `data` and `scheme` tables plus one table per experiment.
//!
//! Scalar coefficients are a number, an expression string in `x`, `y`, `t`
//! (see [`crate::expr`]) or an inline table `{ table = "file.tsv" }` naming a
//! tabulated grid. Paths are relative to the configuration file.
//!
//! ```toml
//! experiment = "rate"
//!
//! [domain]
//! lower = [-1.0]
//! upper = [1.0]
//!
//! [kernel]
//! name = "fractional_laplacian"
//! order = 0.5
//!
//! [hamiltonian]
//! family = "coercive"
//! m = 1.0
//! f = 1.0
//! flux = "upwind"
//!
//! [data]
//! u0 = 0.0
//! phi = "exp(-8*t)"
//! phi_limit = 0.0
//!
//! [scheme]
//! h = 0.0078125
//! t_final = 5.0
//!
//! [rate]
//! every = 0.05
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use nlhj_core::harness::{Datum, InitialFn};
use nlhj_core::solver::DatumFn;
use nlhj_core::{
    BellmanSpec, Coefficient, CoerciveSpec, Control, Domain, FluxKind, HamiltonianSpec, Kernel, Point, SchemeConfig,
    VectorCoefficient,
};

use crate::expr::Expr;
use crate::io::{read_grid_table, read_radial_profile, GridTable};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}{}: {message}", field.as_ref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Parse { line: usize, column: usize, field: Option<String>, message: String },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Time evolution with field snapshots.
    Evolve,
    /// Pseudo-time march to the steady state.
    Steady,
    Comparison,
    Boundary,
    CoerciveLoss,
    Rate,
    LargeTime,
    /// Two steady runs from different initial data.
    Uniqueness,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Steady => "steady",
            ExperimentKind::Comparison => "comparison",
            ExperimentKind::Boundary => "boundary",
            ExperimentKind::CoerciveLoss => "coercive_loss",
            ExperimentKind::Rate => "rate",
            ExperimentKind::LargeTime => "large_time",
            ExperimentKind::Uniqueness => "uniqueness",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Number(f64),
    Text(String),
    Table { table: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    output: Option<PathBuf>,
    domain: RawDomain,
    kernel: RawKernel,
    hamiltonian: RawHamiltonian,
    limit_hamiltonian: Option<RawHamiltonian>,
    data: RawData,
    scheme: RawScheme,
    boundary: Option<RawBoundary>,
    coercive_loss: Option<RawCoerciveLoss>,
    rate: Option<RawRate>,
    large_time: Option<RawLargeTime>,
    uniqueness: Option<RawUniqueness>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    collar: Option<f64>,
    corner_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    name: String,
    order: f64,
    value: Option<f64>,
    radius: Option<f64>,
    profile: Option<PathBuf>,
    ellipticity: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    family: String,
    m: Option<f64>,
    l: Option<f64>,
    a1: Option<RawValue>,
    a1_min: Option<f64>,
    a2: Option<RawValue>,
    b: Option<Vec<RawValue>>,
    lambda: Option<RawValue>,
    f: Option<RawValue>,
    flux: Option<String>,
    lipschitz: Option<f64>,
    control: Option<Vec<RawControl>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    lambda: Option<RawValue>,
    b: Option<Vec<RawValue>>,
    f: Option<RawValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    u0: RawValue,
    phi: RawValue,
    v0: Option<RawValue>,
    phi_v: Option<RawValue>,
    phi_limit: Option<RawValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    h: f64,
    theta: Option<f64>,
    t_final: Option<f64>,
    snapshot_every: Option<f64>,
    r_max: Option<f64>,
    delta: Option<f64>,
    dt_max: Option<f64>,
    steady_tol: Option<f64>,
    max_steps: Option<usize>,
    blow_up: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    spacings: Vec<f64>,
    loss_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoerciveLoss {
    scales: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRate {
    every: f64,
    slack: Option<f64>,
    mu_min: Option<f64>,
    floor: Option<RawValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLargeTime {
    ladder: Vec<f64>,
    tolerance: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUniqueness {
    mu_min: Option<f64>,
}

/// A scalar field of `(x, t)`.
#[derive(Clone)]
pub enum Scalar {
    Expr(Expr),
    Table { path: PathBuf, table: Arc<GridTable> },
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Expr(e) => write!(f, "{e:?}"),
            Scalar::Table { path, .. } => write!(f, "Table({})", path.display()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Expr(e) => write!(f, "{e}"),
            Scalar::Table { path, .. } => write!(f, "table:{}", path.display()),
        }
    }
}

impl Scalar {
    pub fn constant(c: f64) -> Self {
        Scalar::Expr(Expr::constant(c))
    }

    pub fn eval(&self, x: &Point, t: f64) -> f64 {
        match self {
            Scalar::Expr(e) => e.eval(x[0], x[1], t),
            Scalar::Table { table, .. } => table.eval(x[0], x[1]),
        }
    }

    pub fn depends_on_t(&self) -> bool {
        matches!(self, Scalar::Expr(e) if e.depends_on_t())
    }

    pub fn coefficient(&self) -> Coefficient {
        if let Scalar::Expr(e) = self {
            if let Some(c) = e.as_constant() {
                return Coefficient::Constant(c);
            }
        }
        let s = self.clone();
        if self.depends_on_t() {
            Coefficient::space_time(move |x, t| s.eval(x, t))
        } else {
            Coefficient::space(move |x| s.eval(x, 0.0))
        }
    }

    pub fn datum(&self) -> Datum {
        let s = self.clone();
        let phi: DatumFn = Arc::new(move |x: &Point, t: f64| s.eval(x, t));
        Datum { phi, time_dependent: self.depends_on_t() }
    }

    pub fn initial(&self) -> InitialFn {
        let s = self.clone();
        Arc::new(move |x: &Point| s.eval(x, 0.0))
    }

    pub fn function(&self) -> Arc<dyn Fn(&Point) -> f64 + Send + Sync> {
        self.initial()
    }
}

/// Experiment-specific parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    pub spacings: Vec<f64>,
    pub loss_threshold: Option<f64>,
    pub scales: Vec<f64>,
    pub every: Option<f64>,
    pub slack: f64,
    pub mu_min: f64,
    pub ladder: Vec<f64>,
    pub tolerance: f64,
}

/// Certificate checks a run performs before the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// Uniform ellipticity of the kernel.
    Ellipticity,
    /// Initial and exterior data agree on the boundary.
    Compatibility,
    /// Monotonicity in `r` with modulus `h_R`.
    Monotonicity,
    /// Positivity of `h_R` plus exterior mass.
    Nondegeneracy,
    /// The same with a required margin `mu_min`.
    Rate,
    /// `m > alpha` and `a1 >= C0`.
    Superfractional,
    /// Lipschitz constant of the control data.
    Lipschitz,
    /// Drift-sign classification of the boundary.
    Sigma,
    /// Convergence of the time-dependent data.
    DataConvergence,
}

impl CertificateKind {
    /// Whether failing it stops the run with a precondition error.
    pub fn gates(self, experiment: ExperimentKind) -> bool {
        use CertificateKind::*;
        match self {
            Ellipticity => experiment == ExperimentKind::Boundary,
            Superfractional => experiment == ExperimentKind::CoerciveLoss,
            Rate => matches!(experiment, ExperimentKind::Rate | ExperimentKind::Uniqueness),
            DataConvergence => experiment == ExperimentKind::LargeTime,
            Compatibility | Monotonicity | Nondegeneracy | Lipschitz | Sigma => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: String,
    pub path: PathBuf,
    pub experiment: ExperimentKind,
    pub output: PathBuf,
    pub domain: Domain,
    pub kernel: Kernel,
    pub hamiltonian: HamiltonianSpec,
    pub limit_hamiltonian: Option<HamiltonianSpec>,
    pub u0: Scalar,
    pub phi: Scalar,
    pub v0: Option<Scalar>,
    pub phi_v: Option<Scalar>,
    pub phi_limit: Option<Scalar>,
    pub floor: Option<Scalar>,
    pub scheme: SchemeConfig,
    pub t_final: Option<f64>,
    pub snapshot_every: Option<f64>,
    pub params: Params,
}

impl RunConfig {
    /// Certificates checked before the experiment, in order.
    pub fn scheduled_certificates(&self) -> Vec<CertificateKind> {
        use CertificateKind::*;
        let mut out = vec![Ellipticity, Compatibility, Monotonicity, Nondegeneracy];
        match &self.hamiltonian {
            HamiltonianSpec::Coercive(_) => out.push(Superfractional),
            HamiltonianSpec::Bellman(_) => out.extend([Lipschitz, Sigma]),
        }
        match self.experiment {
            ExperimentKind::Rate | ExperimentKind::Uniqueness => out.push(Rate),
            ExperimentKind::LargeTime => out.push(DataConvergence),
            _ => {}
        }
        out
    }

    /// Limit datum for `rate` and `large_time`: `phi_limit`, else `phi`.
    pub fn limit_datum(&self) -> &Scalar {
        self.phi_limit.as_ref().unwrap_or(&self.phi)
    }

    pub fn limit_spec(&self) -> &HamiltonianSpec {
        self.limit_hamiltonian.as_ref().unwrap_or(&self.hamiltonian)
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_str(&text, path)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses `text` as if read from `path` (used to resolve relative paths).
pub fn parse_str(text: &str, path: &Path) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        let message = e.message().to_string();
        let field = message.split('`').nth(1).map(str::to_string);
        ConfigError::Parse { line, column, field, message }
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Builder { base, errors: Vec::new() }.build(raw, text, path)
}

struct Builder {
    base: PathBuf,
    errors: Vec<String>,
}

impl Builder {
    fn fail<T>(&mut self, msg: impl Into<String>) -> Option<T> {
        self.errors.push(msg.into());
        None
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn scalar(&mut self, field: &str, v: &RawValue, dim: usize) -> Option<Scalar> {
        match v {
            RawValue::Number(c) => Some(Scalar::constant(*c)),
            RawValue::Text(s) => match Expr::parse(s) {
                Ok(e) => Some(Scalar::Expr(e)),
                Err(e) => self.fail(format!("{field}: expression {s:?}: {e}")),
            },
            RawValue::Table { table } => {
                let path = self.resolve(table);
                match read_grid_table(&path, dim) {
                    Ok(t) => Some(Scalar::Table { path, table: Arc::new(t) }),
                    Err(e) => self.fail(format!("{field}: {e}")),
                }
            }
        }
    }

    fn opt_scalar(&mut self, field: &str, v: Option<&RawValue>, dim: usize, default: f64) -> Option<Scalar> {
        match v {
            Some(v) => self.scalar(field, v, dim),
            None => Some(Scalar::constant(default)),
        }
    }

    fn vector(&mut self, field: &str, v: Option<&Vec<RawValue>>, dim: usize) -> Option<Option<VectorCoefficient>> {
        let Some(v) = v else { return Some(None) };
        if v.len() != dim {
            return self.fail(format!("{field}: drift needs {dim} component(s), got {}", v.len()));
        }
        let mut comps = [Coefficient::Constant(0.0), Coefficient::Constant(0.0)];
        for (a, c) in v.iter().enumerate() {
            comps[a] = self.scalar(&format!("{field}[{a}]"), c, dim)?.coefficient();
        }
        Some(Some(VectorCoefficient(comps)))
    }

    fn domain(&mut self, d: &RawDomain) -> Option<Domain> {
        let dim = d.lower.len();
        if dim != d.upper.len() || !(1..=2).contains(&dim) {
            return self.fail(format!(
                "domain: lower and upper need 1 or 2 matching entries, got {} and {}",
                d.lower.len(),
                d.upper.len()
            ));
        }
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        lo[..dim].copy_from_slice(&d.lower);
        hi[..dim].copy_from_slice(&d.upper);
        let mut dom = match Domain::new(dim, lo, hi) {
            Ok(dom) => dom,
            Err(e) => return self.fail(format!("domain: {e}")),
        };
        if let Some(c) = d.collar {
            dom = match dom.with_collar(c) {
                Ok(dom) => dom,
                Err(e) => return self.fail(format!("domain.collar: {e}")),
            };
        }
        if let Some(r) = d.corner_radius {
            dom = dom.with_corner_radius(r);
        }
        Some(dom)
    }

    fn kernel(&mut self, k: &RawKernel, dim: usize) -> Option<Kernel> {
        let built = match k.name.as_str() {
            "fractional_laplacian" => Kernel::constant(dim, k.order, k.value.unwrap_or(1.0)),
            "indicator" => match k.radius {
                Some(r) => Kernel::indicator(dim, k.order, r),
                None => return self.fail("kernel: indicator needs `radius`"),
            },
            "custom_radial" => {
                let Some(p) = &k.profile else { return self.fail("kernel: custom_radial needs `profile`") };
                match read_radial_profile(&self.resolve(p)) {
                    Ok((r, v)) => Kernel::radial(dim, k.order, r, v),
                    Err(e) => return self.fail(format!("kernel.profile: {e}")),
                }
            }
            other => {
                return self.fail(format!(
                    "kernel: unknown name {other:?} (expected fractional_laplacian, indicator or custom_radial)"
                ))
            }
        };
        match built {
            Ok(kernel) => Some(match k.ellipticity {
                Some([c1, c2]) => kernel.with_ellipticity(c1, c2),
                None => kernel,
            }),
            Err(e) => self.fail(format!("kernel: {e}")),
        }
    }

    fn hamiltonian(&mut self, name: &str, h: &RawHamiltonian, dim: usize) -> Option<HamiltonianSpec> {
        match h.family.as_str() {
            "coercive" => {
                if h.control.is_some() || h.lipschitz.is_some() {
                    self.errors.push(format!("{name}: `control` and `lipschitz` belong to the bellman family"));
                }
                let Some(m) = h.m else { return self.fail(format!("{name}: coercive family needs `m`")) };
                let a1 = self.opt_scalar(&format!("{name}.a1"), h.a1.as_ref(), dim, 1.0);
                let a2 = self.opt_scalar(&format!("{name}.a2"), h.a2.as_ref(), dim, 0.0);
                let lambda = self.opt_scalar(&format!("{name}.lambda"), h.lambda.as_ref(), dim, 0.0);
                let f = self.opt_scalar(&format!("{name}.f"), h.f.as_ref(), dim, 0.0);
                let b = self.vector(&format!("{name}.b"), h.b.as_ref(), dim);
                let flux = match h.flux.as_deref() {
                    None | Some("lax_friedrichs") => Some(FluxKind::LaxFriedrichs),
                    Some("upwind") => Some(FluxKind::Upwind),
                    Some(other) => {
                        self.fail(format!("{name}.flux: unknown flux {other:?} (expected lax_friedrichs or upwind)"))
                    }
                };
                let (a1, a2, lambda, f, b, flux) = (a1?, a2?, lambda?, f?, b?, flux?);
                let c0 = match (h.a1_min, &a1) {
                    (Some(c), _) => c,
                    (None, Scalar::Expr(e)) if e.as_constant().is_some() => e.as_constant().unwrap(),
                    _ => return self.fail(format!("{name}: a non-constant `a1` needs its lower bound `a1_min`")),
                };
                let mut spec = CoerciveSpec::new(m)
                    .with_a1(a1.coefficient(), c0)
                    .with_a2(a2.coefficient(), h.l.unwrap_or(0.0))
                    .with_lambda(lambda.coefficient())
                    .with_source(f.coefficient())
                    .with_flux(flux);
                if let Some(b) = b {
                    spec = spec.with_drift(b);
                }
                let spec = HamiltonianSpec::Coercive(spec);
                match spec.validate() {
                    Ok(()) => Some(spec),
                    Err(e) => self.fail(format!("{name}: {e}")),
                }
            }
            "bellman" => {
                let coercive_only = [h.m.is_some(), h.l.is_some(), h.a1.is_some(), h.a1_min.is_some(), h.a2.is_some(), h.flux.is_some()];
                if coercive_only.iter().any(|x| *x) || h.b.is_some() || h.lambda.is_some() || h.f.is_some() {
                    self.errors.push(format!("{name}: bellman coefficients go in [[{name}.control]] entries"));
                }
                let Some(raw) = &h.control else { return self.fail(format!("{name}: bellman family needs [[{name}.control]]")) };
                let mut controls = Vec::new();
                let mut ok = true;
                for (k, c) in raw.iter().enumerate() {
                    let field = format!("{name}.control[{k}]");
                    let lambda = self.opt_scalar(&format!("{field}.lambda"), c.lambda.as_ref(), dim, 0.0);
                    let f = self.opt_scalar(&format!("{field}.f"), c.f.as_ref(), dim, 0.0);
                    let b = self.vector(&format!("{field}.b"), c.b.as_ref(), dim);
                    match (lambda, f, b) {
                        (Some(lambda), Some(f), Some(b)) => controls.push(Control::new(
                            lambda.coefficient(),
                            b.unwrap_or_else(VectorCoefficient::zero),
                            f.coefficient(),
                        )),
                        _ => ok = false,
                    }
                }
                if !ok {
                    return None;
                }
                let spec = BellmanSpec::new(controls, h.lipschitz.unwrap_or(0.0)).map(HamiltonianSpec::Bellman);
                match spec.and_then(|s| s.validate().map(|_| s)) {
                    Ok(s) => Some(s),
                    Err(e) => self.fail(format!("{name}: {e}")),
                }
            }
            other => self.fail(format!("{name}.family: unknown family {other:?} (expected coercive or bellman)")),
        }
    }

    fn build(mut self, raw: RawConfig, text: &str, path: &Path) -> Result<RunConfig, ConfigError> {
        let domain = self.domain(&raw.domain);
        let dim = domain.as_ref().map_or(raw.domain.lower.len().clamp(1, 2), Domain::dim);
        let kernel = self.kernel(&raw.kernel, dim);
        let hamiltonian = self.hamiltonian("hamiltonian", &raw.hamiltonian, dim);
        let limit_hamiltonian = match &raw.limit_hamiltonian {
            Some(h) => self.hamiltonian("limit_hamiltonian", h, dim).map(Some),
            None => Some(None),
        };
        let u0 = self.scalar("data.u0", &raw.data.u0, dim);
        let phi = self.scalar("data.phi", &raw.data.phi, dim);
        let mut opt = |field: &str, v: &Option<RawValue>| match v {
            Some(v) => self.scalar(field, v, dim).map(Some),
            None => Some(None),
        };
        let v0 = opt("data.v0", &raw.data.v0);
        let phi_v = opt("data.phi_v", &raw.data.phi_v);
        let phi_limit = opt("data.phi_limit", &raw.data.phi_limit);
        let floor = opt("rate.floor", &raw.rate.as_ref().and_then(|r| r.floor.clone()));
        if let Some(Scalar::Expr(e)) = u0.as_ref() {
            if e.depends_on_t() {
                self.errors.push("data.u0: the initial datum cannot depend on t".into());
            }
        }

        let s = &raw.scheme;
        if !(s.h > 0.0 && s.h.is_finite()) {
            self.errors.push(format!("scheme.h: must be positive, got {}", s.h));
        } else if let Some(d) = &domain {
            for a in 0..d.dim() {
                let ratio = d.side(a) / s.h;
                if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 2.0 {
                    self.errors.push(format!("scheme.h: {} does not divide the side {} of axis {a}", s.h, d.side(a)));
                }
            }
        }
        let mut scheme = SchemeConfig::new(s.h);
        if let Some(theta) = s.theta {
            if !(theta > 0.0 && theta <= 1.0) {
                self.errors.push(format!("scheme.theta: must lie in (0, 1], got {theta}"));
            }
            scheme.theta = theta;
        }
        scheme.r_max = s.r_max;
        if let Some(d) = s.delta {
            if d < s.h {
                self.errors.push(format!("scheme.delta: must be at least h = {}, got {d}", s.h));
            }
            scheme.delta = d;
        }
        scheme.dt_max = s.dt_max;
        scheme.steady_tol = s.steady_tol;
        if let Some(n) = s.max_steps {
            scheme.max_steps = n;
        }
        if let Some(c) = s.blow_up {
            scheme.m_cap = c;
        }
        for (name, v) in [("t_final", s.t_final), ("snapshot_every", s.snapshot_every), ("dt_max", s.dt_max)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    self.errors.push(format!("scheme.{name}: must be positive, got {v}"));
                }
            }
        }

        let exp = raw.experiment;
        let mut params = Params { slack: 0.05, mu_min: 1e-6, ..Params::default() };
        let needs_t = matches!(
            exp,
            ExperimentKind::Evolve | ExperimentKind::Comparison | ExperimentKind::Boundary | ExperimentKind::Rate
        );
        if needs_t && s.t_final.is_none() {
            self.errors.push(format!("scheme.t_final: required by the {} experiment", exp.label()));
        }
        let fam_bellman = matches!(hamiltonian, Some(HamiltonianSpec::Bellman(_)));
        let fam_coercive = matches!(hamiltonian, Some(HamiltonianSpec::Coercive(_)));
        let stationary = hamiltonian.as_ref().is_some_and(|h| !h.is_time_dependent())
            && phi.as_ref().is_some_and(|p| !p.depends_on_t());
        let missing = |what: &str| format!("[{what}] table: required by the {what} experiment");
        match exp {
            ExperimentKind::Evolve | ExperimentKind::Comparison => {}
            ExperimentKind::Steady | ExperimentKind::Uniqueness => {
                if hamiltonian.is_some() && phi.is_some() && !stationary {
                    self.errors.push(format!("the {} experiment needs time-independent H and phi", exp.label()));
                }
                if exp == ExperimentKind::Uniqueness {
                    if raw.data.v0.is_none() {
                        self.errors.push("data.v0: required by the uniqueness experiment".into());
                    }
                    if let Some(u) = &raw.uniqueness {
                        params.mu_min = u.mu_min.unwrap_or(params.mu_min);
                    }
                }
            }
            ExperimentKind::Boundary => match &raw.boundary {
                None => self.errors.push(missing("boundary")),
                Some(b) => {
                    if !fam_bellman && hamiltonian.is_some() {
                        self.errors.push("hamiltonian.family: the boundary experiment needs the bellman family".into());
                    }
                    if raw.kernel.order >= 1.0 {
                        self.errors.push(format!(
                            "kernel.order: the boundary experiment needs order < 1, got {}",
                            raw.kernel.order
                        ));
                    }
                    if raw.kernel.ellipticity.is_none() {
                        self.errors.push("kernel.ellipticity: (UE) constants are required by the boundary experiment".into());
                    }
                    if b.spacings.len() < 2 || b.spacings.iter().any(|h| !(*h > 0.0)) {
                        self.errors.push("boundary.spacings: need at least two positive spacings".into());
                    }
                    params.spacings = b.spacings.clone();
                    params.loss_threshold = b.loss_threshold;
                }
            },
            ExperimentKind::CoerciveLoss => match &raw.coercive_loss {
                None => self.errors.push(missing("coercive_loss")),
                Some(c) => {
                    if fam_bellman {
                        self.errors.push("hamiltonian.family: the coercive_loss experiment needs the coercive family".into());
                    }
                    if let (Some(m), true) = (raw.hamiltonian.m, fam_coercive || hamiltonian.is_none()) {
                        if m <= raw.kernel.order {
                            self.errors.push(format!(
                                "(A1) superfractional coercivity needs m > alpha, got m = {m}, alpha = {}",
                                raw.kernel.order
                            ));
                        }
                    }
                    if c.scales.len() < 2 {
                        self.errors.push("coercive_loss.scales: need at least two scales".into());
                    }
                    if !stationary && hamiltonian.is_some() {
                        self.errors.push("the coercive_loss experiment needs a time-independent H".into());
                    }
                    params.scales = c.scales.clone();
                }
            },
            ExperimentKind::Rate => match &raw.rate {
                None => self.errors.push(missing("rate")),
                Some(r) => {
                    if hamiltonian.as_ref().is_some_and(HamiltonianSpec::is_time_dependent) {
                        self.errors.push("hamiltonian: the rate experiment needs a time-independent H".into());
                    }
                    if phi.as_ref().is_some_and(Scalar::depends_on_t) && raw.data.phi_limit.is_none() {
                        self.errors.push("data.phi_limit: required when phi depends on t".into());
                    }
                    if !(r.every > 0.0) {
                        self.errors.push(format!("rate.every: must be positive, got {}", r.every));
                    }
                    params.every = Some(r.every);
                    params.slack = r.slack.unwrap_or(0.05);
                    params.mu_min = r.mu_min.unwrap_or(1e-6);
                }
            },
            ExperimentKind::LargeTime => match &raw.large_time {
                None => self.errors.push(missing("large_time")),
                Some(l) => {
                    if l.ladder.is_empty() || l.ladder.windows(2).any(|w| w[1] <= w[0]) || l.ladder[0] <= 0.0 {
                        self.errors.push("large_time.ladder: must be a nonempty increasing list of positive times".into());
                    }
                    if hamiltonian.as_ref().is_some_and(HamiltonianSpec::is_time_dependent) && raw.limit_hamiltonian.is_none() {
                        self.errors.push("limit_hamiltonian: required when H depends on t".into());
                    }
                    if phi.as_ref().is_some_and(Scalar::depends_on_t) && raw.data.phi_limit.is_none() {
                        self.errors.push("data.phi_limit: required when phi depends on t".into());
                    }
                    params.ladder = l.ladder.clone();
                    params.tolerance = l.tolerance;
                }
            },
        }
        if let Some(Some(l)) = &limit_hamiltonian {
            if l.is_time_dependent() {
                self.errors.push("limit_hamiltonian: must not depend on t".into());
            }
        }
        if let Some(Some(p)) = &phi_limit {
            if p.depends_on_t() {
                self.errors.push("data.phi_limit: must not depend on t".into());
            }
        }
        params.every = params.every.or(s.snapshot_every);

        if !self.errors.is_empty() {
            return Err(ConfigError::Validation(self.errors));
        }
        let stem = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
        let output = raw.output.as_ref().map_or_else(|| self.base.join(format!("{stem}.out")), |p| self.resolve(p));
        Ok(RunConfig {
            source: text.to_string(),
            path: path.to_path_buf(),
            experiment: exp,
            output,
            domain: domain.expect("no errors"),
            kernel: kernel.expect("no errors"),
            hamiltonian: hamiltonian.expect("no errors"),
            limit_hamiltonian: limit_hamiltonian.expect("no errors"),
            u0: u0.expect("no errors"),
            phi: phi.expect("no errors"),
            v0: v0.expect("no errors"),
            phi_v: phi_v.expect("no errors"),
            phi_limit: phi_limit.expect("no errors"),
            floor: floor.expect("no errors"),
            scheme,
            t_final: s.t_final,
            snapshot_every: s.snapshot_every,
            params,
        })
    }
}
