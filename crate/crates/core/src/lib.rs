//! Perturbative exponential product factorizations of `dx/dt = A(t) x`.
//!
//! Numeric side: the Wilcox product `e^{λW_1} e^{λ²W_2} ⋯` ([`wilcox`]), the
//! standard and modified Fer products ([`fer`]), and the Wilcox–Bellman
//! expansion of `exp(A + εB)` ([`zassenhaus::bellman_numeric`]).
//!
//! Symbolic side, over exact rationals: the Wilcox weights on permutation
//! words and their nested-commutator form ([`perm`]), and the Zassenhaus terms
//! obtained from the same recursion for constant operators ([`zassenhaus`]).
//!
//! [`bounds`] evaluates the convergence-coefficient recursion and extrapolates
//! the Wilcox convergence radius; [`experiments`] reproduces the SU(2) and
//! SO(3) worked examples.

pub mod bounds;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod fer;
pub mod fit;
pub mod linalg;
pub mod operator;
pub mod perm;
pub mod recursion;
pub mod wilcox;
pub mod zassenhaus;

pub use error::{Error, Result};
pub use linalg::{ad_pow, commutator, dexp_series, expm, Matrix};
pub use operator::{
    cumint, Conjugated, Grid, GridSeries, OperatorConfig, OperatorFunction, ScalarFn, TermConfig,
    TimeOperator,
};
