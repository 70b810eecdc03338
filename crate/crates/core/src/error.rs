use thiserror::Error;

/// Errors raised by the library. Messages are single-line and say what to fix.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("direction ({0}, {1}, {2}) is not a unit vector (|norm - 1| > 1e-6)")]
    NotUnit(f64, f64, f64),
    #[error("direction is the zero vector and cannot be normalized")]
    ZeroVector,
    #[error("directions {0} and {1} are equal or antipodal; drop one of them")]
    DegenerateDirections(usize, usize),
    #[error("direction index {index} out of range for a set of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("unknown axis label `{0}`")]
    UnknownAxis(String),
    #[error("configuration does not belong to the space: {0}")]
    InvalidConfiguration(String),
    #[error("null ensemble: every amplitude is zero, Born probabilities are undefined")]
    NullEnsemble,
    #[error("no canonical complex reconstruction exists for quaternion-valued marginals")]
    NotComplex,
    #[error("enumeration of {size} configurations exceeds the dense bound of {bound}")]
    TooLarge { size: u128, bound: u128 },
    #[error("constraint on direction {0} conflicts with an existing constraint")]
    ConflictingConstraint(usize),
    #[error("target direction {0} is already constrained")]
    TargetConstrained(usize),
    #[error("closed form needs exactly one constraint on a direction other than the target; use brute force")]
    UnsupportedConstraints,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("wave packet width {sigma} outside [{min}, {max}] for this grid")]
    WidthOutOfRange { sigma: f64, min: f64, max: f64 },
    #[error("wave function is clipped: {0:.3e} of the probability lies outside the central half of the grid; enlarge the grid")]
    Clipped(f64),
    #[error("anchor sits on a node of the wave function; choose an anchor where it does not vanish")]
    AnchorAtNode,
    #[error("wrong representation: expected {0}")]
    WrongRepresentation(&'static str),
    #[error("near-field geometry: Fresnel number d^2/(lambda D) = {fresnel:.3} exceeds {limit}; increase the screen distance")]
    NearField { fresnel: f64, limit: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
