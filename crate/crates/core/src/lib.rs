//! Fine-scale correlation statistics of the directions from a fixed observer
//! point to the integer lattice points of a growing box.
//!
//! The crate is organised around the objects the computations need:
//!
//! - [`lattice`]: lattice points, observers, ray angles and sorted angle multisets.
//! - [`correlations`]: pair and ν-level correlation counters (brute-force oracle and
//!   sorted-window engines) and the Poisson baseline.
//! - [`averaging`]: Monte Carlo and grid averages of the pair correlation over a disc
//!   of observers.
//! - [`analytic`]: the strip/disc area weights, the weighted pair sums and their
//!   closed-form limits, and the section integrals of the quadratic `Φ`.
//! - [`numtheory`]: totient, Möbius, modular inverses, Kloosterman sums, modular
//!   hyperbola counts and the coprime-pair sets used by the cluster construction.
//! - [`divergence`]: simultaneous approximation of the observer, cluster sets of
//!   nearly aligned lattice points and certified lower bounds for the 6-level
//!   correlation.
//! - [`cli`]: experiment configuration, tabular output and the verification suites
//!   behind the `dircorr` binary.
//!
//! ```
//! use dircorr::correlations::{pair_correlation_fast, CorrelationSpec};
//! use dircorr::lattice::Observer;
//!
//! let obs = Observer::new(0.5, 0.5).unwrap();
//! let spec = CorrelationSpec::pair(1, 0.01, obs).unwrap();
//! let res = pair_correlation_fast(&spec).unwrap();
//! assert_eq!(res.tuple_count, 2);
//! ```

pub mod analytic;
pub mod averaging;
pub mod cli;
pub mod correlations;
pub mod divergence;
pub mod error;
pub mod lattice;
pub mod numtheory;
pub mod quadrature;

pub use error::{Error, Result};
