//! Allen-Cahn minimisers on finite truncations of hyperbolic graphs.
//!
//! The crate models a Gromov hyperbolic graph by a ball of radius `R_max`
//! around a base vertex, the boundary at infinity by the sphere of radius
//! `R` (the horizon), and solves truncated Dirichlet problems whose data is
//! prescribed through cones over subsets of that horizon.

pub mod boundary;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod isoperimetry;
pub mod pipeline;
pub mod potential;
mod rng;
pub mod variational;

pub use error::{Error, Result};
pub use graph::{Graph, IdSet, ProxySet, VertexSet};
