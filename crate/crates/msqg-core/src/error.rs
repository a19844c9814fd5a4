use thiserror::Error;

/// Errors surfaced by grid construction, operator application and the
/// verification drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two in [16, 4096]")]
    InvalidGridSize(usize),

    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),

    #[error("expected field rank {expected}, got {got}")]
    RankMismatch { expected: &'static str, got: &'static str },

    #[error("multiplier violates real-symmetry m(-ξ) = conj(m(ξ)) but the field is flagged real")]
    NotRealSymmetric,

    #[error("multiplier parity does not match the requested case: {0}")]
    ParityMismatch(&'static str),

    #[error("denominator below 1e-300 in ratio")]
    DegenerateRatio,

    #[error("band q={0} carries no occupied modes on this grid")]
    EmptyBand(i32),

    #[error("occupied-mode count {got} exceeds the direct-convolution budget {budget}")]
    ConvolutionBudget { got: usize, budget: usize },

    #[error("wave packet does not fit: {0}")]
    PacketFit(String),

    #[error("tensor mass outside the window is {0:.3e} (limit 1e-6)")]
    MassOutsideWindow(f64),

    #[error("NaN detected during time integration at t={0}")]
    NanAbort(f64),

    #[error("CFL advisory exceeded 4x at t={t}: dt*max|u|*n/(2π) = {cfl:.3e}")]
    CflAbort { t: f64, cfl: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed snapshot or kernel file: {0}")]
    Format(String),
}
