use thiserror::Error;

/// Errors produced by the arithmetic layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid radix configuration: omega={omega}, n={n}")]
    InvalidRadix { omega: u32, n: usize },

    #[error("limb {index} value {value:#x} does not fit in {omega} bits")]
    LimbOverflow { index: usize, value: u64, omega: u32 },

    #[error("malformed hex literal: unexpected {found:?} at position {position}")]
    ParseHex { position: usize, found: char },

    #[error("radix mismatch: {left} vs {right} bit limbs")]
    RadixMismatch { left: u32, right: u32 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("value is not invertible modulo the given modulus")]
    NotInvertible,

    #[error("lane shape mismatch: {left_lanes}x{left_bits} vs {right_lanes}x{right_bits}")]
    ShapeMismatch { left_lanes: usize, left_bits: u32, right_lanes: usize, right_bits: u32 },

    #[error("lane width {0} is not supported")]
    LaneWidth(u32),

    #[error("lane {index} holds {value:#x}, which does not fit in {bits} bits")]
    LaneOverflow { index: usize, value: u64, bits: u32 },

    #[error("unknown cost profile {0:?}")]
    UnknownProfile(String),

    #[error("unknown instruction class {0:?}")]
    UnknownClass(String),

    #[error("latency for {class} in profile {profile:?} must be positive")]
    NonPositiveLatency { profile: String, class: String },

    #[error("malformed configuration: {0}")]
    Config(String),

    #[error("strategy {strategy} cannot be used with {omega}-bit limbs")]
    StrategyMismatch { strategy: String, omega: u32 },

    #[error("unknown addition strategy {0:?}")]
    UnknownStrategy(String),

    #[error("carry contract violated at lane {lane}: derived carry {value}")]
    CarryContract { lane: usize, value: u8 },

    #[error("modulus must be odd")]
    EvenModulus,

    #[error("modulus must satisfy 0 < p < 2^{bits}")]
    ModulusRange { bits: usize },

    #[error("precomputed constant M_{index} disagrees with the inverse-power oracle")]
    PrecomputeMismatch { index: usize },

    #[error("input {value} violates bound {bound}")]
    InputBound { value: String, bound: String },

    #[error("p + 1 has only {trailing_zeros} trailing zero bits; at least {required} are needed")]
    NotFriendly { trailing_zeros: usize, required: usize },

    #[error("step size m={m} must satisfy 1 < m <= lambda={lambda}")]
    InvalidStep { m: usize, lambda: usize },

    #[error("half-width split of {split} bits exceeds min(l + omega, 2l) = {limit}")]
    Inadmissible { split: usize, limit: usize },

    #[error("divisibility check failed: remainder {0} is nonzero")]
    Divisibility(String),

    #[error("intermediate bound violated: {0}")]
    BoundViolation(String),

    #[error("lazy reduction requires R > 4p")]
    LazyNotAllowed,

    #[error("field elements belong to different contexts")]
    ContextMismatch,

    #[error("backend {backend} is not available: {reason}")]
    BackendUnavailable { backend: String, reason: String },

    #[error("unknown reduction backend {0:?}")]
    UnknownBackend(String),

    #[error("karatsuba base threshold must be at least one limb")]
    KaratsubaThreshold,

    #[error("unknown prime preset {0:?}")]
    UnknownPreset(String),
}

pub type Result<T> = std::result::Result<T, Error>;
