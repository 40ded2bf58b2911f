//! Estimates for planar simple random walk and Brownian motion.
//!
//! Every analytic statement in this crate is paired with an independent
//! route to the same number: exact enumeration, a direct linear solve, or
//! a seeded Monte Carlo estimate. The modules are
//!
//! * [`rng`]: seedable, splittable random streams;
//! * [`paths`]: lattice walks, Wiener paths and the diagonal decomposition;
//! * [`exactdist`]: exact walk distributions, the local CLT series and tails;
//! * [`dirichlet`]: spectral solutions of the discrete Dirichlet problem on
//!   rectangles and half-infinite strips, with linear-solve and hitting oracles;
//! * [`beurling`]: slit-disk escape probabilities and Beurling exponents;
//! * [`coupling`]: Skorokhod embedding of the walk into Brownian motion;
//! * [`experiments`]: estimators, fits and the named verification suites.

pub mod beurling;
pub mod coupling;
pub mod dirichlet;
pub mod error;
pub mod exactdist;
pub mod experiments;
pub mod paths;
pub mod rng;
pub mod table;

pub use error::{Error, Result};
