use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Mathieu parameters (a = {a}, q = {q}) lie outside the lowest stability region")]
    Unstable { a: f64, q: f64 },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("Numerov solution for n={n} l={l} 2j={j2} failed: {reason} (nodes {nodes}, expected {expected})")]
    Numerov {
        n: u32,
        l: u32,
        j2: u32,
        nodes: usize,
        expected: usize,
        reason: String,
    },

    #[error("radial grids are not commensurate (steps {0} and {1})")]
    GridMismatch(f64, f64),

    #[error("degenerate energy denominator between {0} and {1}")]
    DegenerateDenominator(String, String),

    #[error("ground-state character dropped to {weight:.3} at R = {r:.3e} m (avoided crossing)")]
    LevelCrossing { r: f64, weight: f64 },

    #[error("ambiguous curve assignment at R = {r:.4e} m for curve {curve}")]
    Ambiguous { r: f64, curve: usize },

    #[error("norm drift {drift:.3e} exceeds tolerance")]
    NormDrift { drift: f64 },

    #[error(
        "phonon cutoff too small: {leakage:.3e} of the population sits in the top Fock layers"
    )]
    CutoffTooSmall { leakage: f64 },

    #[error(
        "wavefunction reached the grid boundary in sector {sector} (edge probability {prob:.3e})"
    )]
    BoundaryLeak { sector: String, prob: f64 },

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::Numerov { .. }
                | Error::DegenerateDenominator(..)
                | Error::LevelCrossing { .. }
                | Error::Ambiguous { .. }
                | Error::NormDrift { .. }
                | Error::CutoffTooSmall { .. }
                | Error::BoundaryLeak { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
