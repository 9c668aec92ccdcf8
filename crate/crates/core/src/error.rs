use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("field expected to be real, max imaginary part {0:e}")]
    NotReal(f64),
    #[error("unremoved resonance: |coefficient| = {magnitude:e} at xi = {xi:.6} inside the guard band")]
    Resonance { xi: f64, magnitude: f64 },
    #[error("resonant coefficient rejected: |alpha_hat(+sqrt3)| = {plus:e}, |alpha_hat(-sqrt3)| = {minus:e}")]
    ResonantCoefficient { plus: f64, minus: f64 },
    #[error("profile does not decay at the grid boundary (boundary value {0:e})")]
    BoundaryDecay(f64),
    #[error("sup norm {sup:e} at t = {t:.3} exceeded the blow-up guard")]
    BlowUp { t: f64, sup: f64 },
    #[error("relative energy drift {drift:e} at t = {t:.3} exceeded the abort threshold")]
    EnergyDrift { t: f64, drift: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("singular de-resonation system (det = {0:e})")]
    SingularWindow(f64),
    #[error("Newton iteration did not converge: |grad| = {0:e}")]
    Newton(f64),
    #[error("degenerate Hessian (det = {0:e})")]
    DegenerateHessian(f64),
    #[error("quadrature grid of {0} points exceeds the memory guard")]
    GridTooLarge(u64),
    #[error("window of {0} nodes exceeds the dense limit")]
    WindowTooLarge(usize),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors raised by numerical guards rather than bad input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::Resonance { .. }
                | Error::BlowUp { .. }
                | Error::EnergyDrift { .. }
                | Error::Newton(_)
                | Error::DegenerateHessian(_)
                | Error::SingularWindow(_)
                | Error::DegenerateFit(_)
        )
    }
}
