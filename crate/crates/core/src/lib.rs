//! Invariant densities and digit statistics of the random Gauss-Rényi map.
//!
//! At each step the Gauss map `T0` is applied with probability `1-ε` and the
//! Rényi map `T1` with probability `ε`. The stationary density `h_ε` of this
//! random system is the fixed point of the annealed transfer operator
//! `L_ε = (1-ε)L0 + εL1`. This crate computes its Taylor expansion around
//! the Gauss density `h_0(x) = 1/((1+x) ln 2)`,
//!
//! ```text
//! h_ε = h_0 + Σ_{n=1}^{k} εⁿ c_n + o(ε^k),
//! c_1 = (I - L0)^{-1} (L1 h_0 - h_0),    c_n = (I - L0)^{-1} (L1 - L0) c_{n-1},
//! ```
//!
//! and from it the limiting law of the n-th digit of random semi-regular
//! continued fractions. Everything is checked against independent routes:
//! dense eigen-solves of the discretized operator, Neumann series,
//! brute-force branch sums and Monte Carlo simulation of the digit process.
//!
//! Modules:
//! - [`funcspace`]: Chebyshev representation of functions on [0,1]
//! - [`maps`]: forward maps, inverse branches, branch derivatives
//! - [`transfer`]: transfer operators, collocation matrices, resolvents
//! - [`perturbation`]: Taylor coefficients of `ε ↦ h_ε`
//! - [`digits`]: Gauss-Kuzmin law and random-digit probabilities
//! - [`bounds`]: Lasota-Yorke constants and the admissible ε range
//! - [`oracle`]: Monte Carlo and brute-force reference computations

pub mod bounds;
pub mod digits;
pub mod error;
pub mod exec;
pub mod funcspace;
pub mod maps;
pub mod oracle;
pub mod perturbation;
pub mod special;
pub mod transfer;

pub use error::{Error, Result};
pub use exec::Exec;
pub use funcspace::SpectralFn;
pub use maps::{BranchId, MapKind};
pub use transfer::{OperatorMatrix, TailPolicy};

/// Library version, echoed in the provenance header of every emitted table.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
