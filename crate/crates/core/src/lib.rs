//! Exact construction and verification of the quantum Toda integrals and the
//! Kim presentation of the quantum cohomology of `G/B` for simple Lie types of
//! small rank.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactalg`]: rationals, sparse polynomials, exact linear solving
//! * [`rootsys`]: root systems, coroot Gram matrices, Weyl groups
//! * [`invariants`]: Reynolds operator and Chevalley generators `u_k`
//! * [`toda`]: normal-ordered `U(b)`, the Hamiltonian `Omega` and its commuting lifts
//! * [`diffop`]: the operators `D_k` and `H` in `e^{t_i}`, `h d/dt_i`, `h`
//! * [`qcoh`]: Schubert basis, quantum Chevalley matrices, hypothesis and relation checks
//! * [`flatsec`]: formal flat sections and annihilation checks
//! * [`pipeline`]: the end-to-end run and its JSON report

pub mod diffop;
pub mod exactalg;
pub mod flatsec;
pub mod invariants;
pub mod json;
pub mod pipeline;
pub mod qcoh;
pub mod rootsys;
pub mod series;
pub mod toda;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable sets differ: {left:?} vs {right:?}")]
    VarMismatch { left: Vec<String>, right: Vec<String> },
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("unsupported root system {lie_type}{rank}")]
    Unsupported { lie_type: char, rank: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant generator search failed at degree {degree}")]
    IndependenceSearch { degree: u32 },
    #[error("commuting lift is not unique or does not exist: {0}")]
    LiftSolve(String),
    #[error("odd X exponent in {0}")]
    OddXExponent(String),
    #[error("lower-order remainder contains a pure lambda term: {0}")]
    PureLambdaRemainder(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("linear ODE matrix is neither invertible nor nilpotent")]
    NotInvertibleOrNilpotent,
    #[error("unknown fault-injection key {0:?}")]
    UnknownFault(String),
    #[error("json error at {path}: {message}")]
    Json { path: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
