//! Crossing numbers of geometric graphs on the integer grid.
//!
//! Exact open-segment intersection tests, crossing counters, lower-bound
//! certificates, extremal constructions, totient sums and small-grid
//! enumeration of crossing-free edge sets.

pub mod constructions;
pub mod crossings;
pub mod enumeration;
pub mod geom;
pub mod grid_graph;
pub mod numtheory;

pub use crossings::{count_crossings_naive, count_crossings_pruned, CrossingReport};
pub use geom::{segments_cross, CrossKind, LatticePoint, RationalPoint, Segment};
pub use grid_graph::{GridGraph, GridSpec};
