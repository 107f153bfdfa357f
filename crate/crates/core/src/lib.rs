//! Expected numbers of common zeros of random Gaussian function systems,
//! computed as volumes and mixed volumes of Banach sets (fields of convex
//! bodies in the cotangent fibers), together with the ring those sets
//! generate, their densities, and an independent Monte Carlo zero counter.
//!
//! The main entry points:
//!
//! * [`function_space::FunctionSpace`] builds the ellipsoid field `ℰ_V` of a space `V`;
//! * [`expectation::expected_zeros`] turns fields into expected zero counts `n!/(2π)ⁿ · vol(ℰ₁, …, ℰₙ)`;
//! * [`zeros::estimate_expectation`] counts zeros of sampled systems;
//! * [`ring::PairingRing`] and [`density`] realize the ring of Banach sets and its densities.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banach_field;
pub mod cli;
pub mod convex;
pub mod density;
pub mod error;
pub mod expectation;
pub mod function_space;
pub mod manifold;
pub mod ring;
pub mod zeros;

pub use banach_field::{BanachField, VirtualBanachField};
pub use convex::{mixed_volume, BodyCombination, ConvexBody};
pub use error::{Error, Result};
pub use expectation::{expected_zeros, expected_zeros_of_spaces};
pub use function_space::{FunctionSpace, InnerProductRule};
pub use manifold::{Manifold, QuadratureGrid, SubdomainBox};
