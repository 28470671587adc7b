//! First-passage percolation laboratory for the Bernoulli 0/1 edge-weight
//! model on `Z^d`.
//!
//! The crate grows wet balls by deque-based 0-1 shortest-path search, checks
//! their structural invariants exactly (boundary passage times, locality,
//! connectivity), assembles the union of all minimizing paths with its
//! pivotal-edge count, estimates time constants and the asymptotic shape,
//! measures shape fluctuations, verifies the derivative identity between the
//! restricted passage time and the pivotal count by coupled finite
//! differences, and drives reproducible parameter sweeps with scaling fits.
//!
//! All randomness is a pure hash of `(seed, edge)`; every result is
//! bit-reproducible across runs, platforms and worker counts.

pub mod ball;
pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod fit;
pub mod fluct;
pub mod geodesic;
pub mod lattice;
pub mod oracle;
pub mod region;
pub mod russo;
pub mod shape;
pub mod stats;
pub mod table;

pub use ball::{grow_ball, passage_time, Ball};
pub use config::{Configuration, EdgeWeights, UniformField};
pub use error::{Error, Result};
pub use geodesic::{geodesic_field, pivotal_count, restricted_passage_time, GeodesicField};
pub use lattice::{Aabb, Edge, Vertex, MAX_DIM};
pub use region::{Region, RegionKind};
pub use shape::{estimate_shape, estimate_time_constant, ShapeEstimate};
