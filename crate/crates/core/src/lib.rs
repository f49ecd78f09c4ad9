//! Exact arithmetic for definite quaternion algebras over Q and real
//! quadratic fields: Eichler order towers, right ideal class sets certified
//! by the mass formula, Brandt matrix Hecke operators, Gross point families
//! with Galois/Hecke compatibilities, and finite-level theta elements.
//!
//! Everything is integer, rational or mod-p^k arithmetic; no floating point
//! enters any algebraic predicate.

pub mod arith;
pub mod basefield;
pub mod cache;
pub mod cmfield;
pub mod config;
pub mod context;
pub mod hecke;
pub mod lattices;
pub mod modp;
pub mod points;
pub mod quatalg;
pub mod report;
pub mod theta;


/// Errors across the library. Config violations carry the name of the
/// hypothesis they break so the CLI can report them individually.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("squarefree violation: {0}")]
    SquarefreeViolation(String),
    #[error("indefinite parity: {0}")]
    IndefiniteParity(String),
    #[error("inert violation: {0}")]
    InertViolation(String),
    #[error("coprimality violation: {0}")]
    CoprimalityViolation(String),
    #[error("narrow class number is not 1: {0}")]
    NarrowClassNumber(String),
    #[error("search bound exhausted: {0}")]
    SearchExhausted(String),
    #[error("mass mismatch: expected {expected}, found {found}")]
    MassMismatch { expected: String, found: String },
    #[error("insufficient p-adic precision: {0}")]
    Precision(String),
    #[error("class-group backend required: {0}")]
    ClassGroupBackendRequired(String),
    #[error("multiplicity-one assumption violated: {0}")]
    MultiplicityOne(String),
    #[error("eigenpacket not found: {0}")]
    EigenNotFound(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("cache integrity: {0}")]
    CacheIntegrity(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
