use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// `Indeterminate` is special: it signals that a result exists but could not
/// be certified within the configured precision or search budget, and says
/// which knob to raise.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the p-adic valuation of zero is undefined")]
    ZeroValuation,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("generator {0} must be greater than 1")]
    GeneratorTooSmall(u64),

    #[error(
        "generator {generator} has positive {p}-adic valuation; \
         the dense-case model needs v_p = 0 (use the discrete-case machinery instead)"
    )]
    GeneratorNotUnit { p: u64, generator: u64 },

    #[error(
        "generators {a} and {b} are multiplicatively dependent: {a}^{m} = {b}^{n}; \
         the pair collapses to the cyclic group generated by a common power \
         (a finite-index subgroup), which this model does not cover"
    )]
    DependentGenerators { a: u64, b: u64, m: u64, n: u64 },

    #[error(
        "discrete-case generators must have positive {p}-adic valuation, got v_p({generator}) = 0"
    )]
    GeneratorIsUnit { p: u64, generator: u64 },

    #[error(
        "normalized generators coincide (gamma = 1): alpha and beta generate the same \
         cyclic group up to powers, which the interpretation hypothesis excludes"
    )]
    DegenerateGamma,

    #[error(
        "p-adic logarithm needs v_{p}(x - 1) >= {need}, got {got}; \
         raise the operand to a suitable power first"
    )]
    LogDomain { p: u64, need: u32, got: i64 },

    #[error(
        "valuation could not be certified at precision p^{reached} \
         (max_precision = {max}); raise max_precision"
    )]
    Indeterminate { reached: u32, max: u32 },

    #[error("precision {requested} exceeds max_precision {max}")]
    PrecisionRange { requested: u32, max: u32 },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unsupported fragment: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "enumeration budget {budget} exceeds the ceiling {ceiling}; \
         lower the bound or the number of coefficients, or raise the ceiling"
    )]
    Budget { budget: u128, ceiling: u128 },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}
