use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point is equidistant from two faces or inside a corner exclusion zone")]
    CornerAmbiguity,
    #[error("kernel density is undefined at the origin")]
    OriginSingularity,
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("node {0} is outside the lattice")]
    NodeOutsideGrid(usize),
    #[error("censored operator needs order below 1, got {0}")]
    UnsupportedOrder(f64),
    #[error("viscosity on axis {axis} is {have} but the flux needs {needed}")]
    ViscosityUnderflow { axis: usize, needed: f64, have: f64 },
    #[error("CFL number {number} exceeds the safety factor {limit}")]
    CflViolation { number: f64, limit: f64 },
    #[error("sup-norm {sup} exceeded the cap at t = {t}")]
    BlowUp { t: f64, sup: f64 },
    #[error("no steady state after {steps} steps (residual {residual})")]
    NonConvergence { steps: usize, residual: f64 },
    #[error("rate bound violated at t = {t}: deviation {deviation} > {bound}")]
    BoundViolated { t: f64, deviation: f64, bound: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
