//! Planar convex billiards as exact twist maps, with numerical checks of
//! symmetry-rigidity criteria.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiards;
pub mod criteria;
pub mod curves;
pub mod error;
pub mod geom;
pub mod numeric;
pub mod symmetry;
pub mod twistmaps;

pub use error::{Error, Result};
