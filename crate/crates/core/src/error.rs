use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point ({re}, {im}) is not on the unit circle")]
    OffCircle { re: f64, im: f64 },

    #[error("Verblunsky parameter at index {index} has modulus {modulus}, expected < 1")]
    OutsideDisk { index: usize, modulus: f64 },

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("invalid randomizer: {0}")]
    InvalidRandomizer(String),

    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("grid size {size} is too small for degree {degree}; need at least {required}")]
    GridTooSmall {
        size: usize,
        degree: usize,
        required: usize,
    },

    #[error("{0} overflows the index type")]
    Overflow(&'static str),

    #[error("sequence of length {len} does not cover index {required}")]
    TooShort { len: usize, required: usize },

    #[error("degree {degree} exceeds the budget of {budget}")]
    BudgetExceeded { degree: usize, budget: usize },

    #[error("alignment set at level {level} has an interval narrower than two grid cells")]
    UnresolvedGrid { level: u32 },

    #[error("alignment sets have empty intersection at level {level}")]
    EmptyIntersection { level: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
