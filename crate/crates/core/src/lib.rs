//! Force-directed layouts of anchor-free ad hoc network topologies and
//! boundary-node detection on the resulting drawings.
//!
//! The crate provides topology generation with ground-truth boundaries,
//! the Kamada-Kawai, Fruchterman-Reingold and Davidson-Harel engines, the
//! accelerated Kamada-Kawai variants (signal-strength distances,
//! multi-node selection, growing starting area with decaying stiffness)
//! and the scoring used to compare them.

pub mod accel;
pub mod boundary;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod layout;
pub mod metrics;
pub mod rng;
pub mod topogen;

pub use boundary::{alpha_shape_boundary, BoundaryLabeling};
pub use error::{Error, Result};
pub use geometry::Point;
pub use graph::{DistanceModel, Edge, Topology};
pub use layout::{Budget, Layout, RunTrace, Termination, TraceHook};
