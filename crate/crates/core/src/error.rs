use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("factorization effort budget exceeded for {n}")]
    FactorEffortExceeded { n: u128 },

    #[error("field of order {order} exceeds the table memory budget of {budget} entries")]
    MemoryBudgetExceeded { order: u128, budget: u64 },

    #[error("no primitive polynomial found for p={p}, degree {degree}")]
    NoPrimitivePolynomial { p: u64, degree: u32 },

    #[error("field order {order} exceeds the exhaustive cap of {cap}")]
    ExhaustiveCapExceeded { order: u64, cap: u64 },

    #[error("inverse of the zero element")]
    ZeroInverse,

    #[error("e-free test on the zero element")]
    ZeroNotEfree,

    #[error("inconsistent sieve partition: {reason}")]
    InconsistentPartition { reason: String },

    #[error("{0} is not a prime power")]
    NotAPrimePower(u64),

    #[error("checkpoint mismatch: {reason}")]
    CheckpointMismatch { reason: String },

    #[error("fixture {name}: {reason}")]
    Fixture { name: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
