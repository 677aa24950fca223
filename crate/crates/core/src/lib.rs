//! Numerical cross-validation of the integer moments E[𝒵(T,X)ᵏ] of the
//! stochastic heat equation started from a delta mass.
//!
//! The same moment is computed through independent routes:
//!
//! * nested contour integrals over vertical lines ([`she_moments::moment_contour`]),
//! * the partition/determinant residue expansion ([`she_moments::moment_partition`]),
//! * a Gaussian-expectation Monte Carlo form of the Airy-kernel Laplace transform
//!   ([`she_moments::moment_gaussian_mc`]),
//! * Airy point process functionals, both through Fredholm determinants
//!   ([`airy`]) and through sampled edge eigenvalues ([`airy_sampler`]),
//! * intermediate-disorder limits of the semi-discrete polymer ([`polymer`]).
//!
//! [`report`] gathers the estimates into a cross-check report and [`cli`] is the
//! command-line front end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod airy_sampler;
pub mod cli;
pub mod combinatorics;
mod error;
pub mod polymer;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod she_moments;
pub mod tridiag;

pub use error::{Error, Result};
pub use report::{CrossCheckReport, Method, MomentEstimate};
pub use she_moments::MomentRequest;
