use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {what} = {value} outside the domain of {op}")]
    Domain { op: &'static str, what: &'static str, value: f64 },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("bridge on [{lo}, {hi}] is not monotone")]
    NonMonotoneBridge { lo: f64, hi: f64 },
    #[error("no sign change in bracket [{lo}, {hi}] ({context})")]
    Bracket { lo: f64, hi: f64, context: &'static str },
    #[error("root residual {residual:e} above tolerance ({context})")]
    NonConvergence { residual: f64, context: &'static str },
    #[error("query (t = {t}, x2 = {x2}) lies in the excluded shock cone")]
    ShockCone { t: f64, x2: f64 },
    #[error("characteristics crossed near foot r = {r}")]
    Crossing { r: f64 },
    #[error("radicand {value:e} is not positive")]
    Radicand { value: f64 },
    #[error("density ordering violated: rho_minus = {rho_minus}, rho1 = {rho1}, rho_plus = {rho_plus}")]
    DensityOrdering { rho_minus: f64, rho1: f64, rho_plus: f64 },
    #[error("Picard iteration stopped contracting at iteration {iteration}")]
    NonContraction { iteration: usize },
    #[error("Picard iteration did not reach tolerance in {iterations} iterations")]
    MaxIterations { iterations: usize },
    #[error("iterate left the invariant ball: sup |eps| = {sup} > {radius}")]
    Ball { sup: f64, radius: f64 },
    #[error("fan sandwich violated at t = {t}")]
    Sandwich { t: f64 },
    #[error("stitching mismatch {gap:e} at x2 = {x2}")]
    Stitch { x2: f64, gap: f64 },
    #[error("config: {field}: {msg}")]
    Config { field: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
