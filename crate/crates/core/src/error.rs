use thiserror::Error;

/// Errors surfaced by the numerical layers.
#[derive(Debug, Error)]
pub enum PfError {
    #[error("quadrature did not converge after {subdivisions} subdivisions (best value {value:.6e}, error estimate {estimate:.3e})")]
    QuadratureNonConvergence {
        value: f64,
        estimate: f64,
        subdivisions: usize,
    },

    #[error("fixed-point iteration diverged after {iterations} iterations (residual {residual:.3e})")]
    FixedPointDiverged { iterations: usize, residual: f64 },

    #[error("fixed-point iteration hit the cap of {iterations} iterations (residual {residual:.3e})")]
    FixedPointIterationCap { iterations: usize, residual: f64 },

    #[error("root bracket [{lo:.6e}, {hi:.6e}] does not change sign")]
    BracketSignError { lo: f64, hi: f64 },

    #[error("bracket search exhausted while looking for {what}")]
    BracketExhausted { what: &'static str },

    #[error("momentum on the k3-axis: polarization vectors are undefined there")]
    AxisSingularity,

    #[error("potential has no negative part; no binding transition exists")]
    NoBinding,

    #[error("no bound state for lambda={lambda:.6e}, gamma_reg={gamma_reg:.3e}")]
    NoBoundState { lambda: f64, gamma_reg: f64 },

    #[error("ODE integration failed: {0}")]
    OdeFailure(String),

    #[error("divergent integral in the {branch} branch of the d-functional")]
    DivergentBranch { branch: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, PfError>;
