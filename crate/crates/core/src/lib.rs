//! Minkowski gauges, infimal convolutions and numeric verification of their
//! subdifferential formulas in low-dimensional Euclidean space.

pub mod convex_bodies;
pub mod error;
pub mod fields;
pub mod gauge;
pub mod infconv;
pub mod linalg;
mod lp;
pub mod output;
pub mod scene;
pub mod subdiff;
pub mod verifier;

pub use convex_bodies::ConvexBody;
pub use error::{Error, Result};
pub use fields::{CalmnessEstimate, Region, ScalarField};
pub use gauge::Gauge;
pub use linalg::{Covector, ExtReal, PNorm, Vector};
