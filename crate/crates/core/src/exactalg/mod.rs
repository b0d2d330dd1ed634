//! Exact arithmetic: rationals, sparse polynomials, linear solving.

pub mod linalg;
pub mod poly;
pub mod rational;

pub use linalg::{solve_linear, LinearSolution, SparseSystem};
pub use poly::{MultiIndex, SparsePoly, VarSet};
pub use rational::Rational;
