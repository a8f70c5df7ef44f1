//! Self-supervised video transforms and their measurement harness.
//!
//! The crate generates labeled training clips by transforming videos in
//! space (anisotropic scaling, perspective toward one edge) and in time
//! (constant speed-up, two-stage speed change), where the label is simply
//! which transform was applied. Synthetic scenes with known geometry verify
//! each transform's observable effect, a small two-head probe checks the
//! labels are learnable, and a retrieval evaluator scores learned features.

pub mod error;
pub mod evalkit;
pub mod geometry;
pub mod io;
pub mod pretext;
pub mod probe;
pub mod synthgen;
pub mod temporal;
pub mod video;
pub mod warp;

pub use error::{Error, Result};
pub use geometry::{solve_homography, Homography, Point2, Quad};
pub use temporal::TemporalSpec;
pub use video::{Clip, Frame, Video};
pub use warp::{Side, SpatialSpec};
