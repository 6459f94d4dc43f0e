//! Separable stabilizer projectors for pure entangled states.
//!
//! Any bipartite pure state is the unique joint +1 eigenstate of two
//! separable projectors `P` and `Q` with `PQ = QP = |psi><psi|`; recursing
//! along a party ordering gives `2^(n-1)` fully separable projectors for an
//! `n`-party state. The pass probabilities of the corresponding one-way LOCC
//! tests lower-bound the squared fidelity `tr(rho psi)`, and the same algebra
//! bounds a channel's entanglement fidelity by two ensemble fidelities.
//!
//! Modules:
//! - [`linalg`]: kets, operators, density matrices, Schmidt decomposition.
//! - [`stabilizer`]: conjugate bases and the bipartite `(P, Q)` pair.
//! - [`multipartite`]: the recursive binary-word family `P^(u)`.
//! - [`certify`]: exact and sampled LOCC tests with Hoeffding bounds.
//! - [`channels`]: Kraus channels and entanglement-fidelity bounds.
//! - [`config`], [`report`], [`runner`]: the `sepstab` command line tool.

pub mod certify;
pub mod channels;
pub mod config;
pub mod error;
pub mod linalg;
pub mod multipartite;
pub mod random;
pub mod report;
pub mod runner;
pub mod stabilizer;
pub mod tol;

pub use error::{Error, Result};
