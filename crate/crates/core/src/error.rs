use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unsupported surface/field combination: {0}")]
    UnsupportedCombination(String),
    #[error("resolution {n} too small (need at least {min})")]
    ResolutionTooSmall { n: usize, min: usize },
    #[error("unrecognized descriptor `{0}`")]
    BadDescriptor(String),
    #[error("integration step underflow at t = {time} (step fell below {h_min})")]
    StepUnderflow { time: f64, h_min: f64 },
    #[error("no convergence within horizon {horizon}; final point {final_param:?} with |grad f| = {final_grad}")]
    HorizonExceeded {
        horizon: f64,
        final_param: [f64; 2],
        final_grad: f64,
    },
    #[error("trajectory does not cross the target within the horizon")]
    NoCrossing,
    #[error("a critical value lies in the level range [{lo}, {hi}]")]
    CriticalLevelInRange { lo: f64, hi: f64 },
    #[error("c ± ε is not certified regular: min |grad f| = {min_grad} in band around level {level}")]
    NonregularEpsilon { level: f64, min_grad: f64 },
    #[error("Conley block is empty for the given parameters")]
    EmptyBlock,
    #[error("shrink search exhausted; smallest block had {smallest_block} vertices")]
    SearchExhausted { smallest_block: usize },
    #[error("arrival at exit locus failed: {0}")]
    ArrivalFailure(String),
    #[error("not a subcomplex: {0}")]
    NotASubcomplex(String),
    #[error("cup product degree {0} exceeds complex dimension {1}")]
    DegreeOverflow(usize, usize),
    #[error("cap product degree {0} exceeds chain degree {1}")]
    DegreeUnderflow(usize, usize),
    #[error("invalid categorical cover: {0}")]
    InvalidCover(String),
    #[error("homology class is trivial")]
    TrivialClass,
    #[error("class does not belong to this complex: {0}")]
    ClassNotInComplex(String),
    #[error("gap detected in the dying set of a class at threshold {0}")]
    GapDetected(f64),
    #[error("classes are not subordinated through the given cohomology class")]
    NotSubordinated,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
