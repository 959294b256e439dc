//! Exact-arithmetic constructive metric spaces.
//!
//! Reals are interval oracles over exact rationals. On top of them sit
//! separable metric spaces with explicit enumeration and total-boundedness
//! witnesses, their completions, the Baire, Cantor and ℕ• sequence spaces,
//! the Hilbert cube, and a Urysohn universal space built from finite
//! rational tuples.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod completion;
pub mod error;
pub mod numerics;
pub mod metric;
pub mod reals;
pub mod representations;
pub mod spaces;
pub mod urysohn;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::Rational;
pub use reals::{Apartness, Comparison, Interval, Real, RealSeq};
