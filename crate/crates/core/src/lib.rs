//! Exact classical and higher-rank mixed volumes of polytopes, valuation
//! identities, spherical Hodge-Riemann checks and randomized inequality
//! campaigns.

pub mod error;
pub mod harness;
pub mod higher_rank;
pub mod linalg;
pub mod mixed;
pub mod polytope;
pub mod scalar;
pub mod spherical;
pub mod valuation;

pub use error::{Error, Result};
pub use polytope::{convex_hull, BodyJson, LinearMap, Point, Polytope};
pub use scalar::Scalar;
