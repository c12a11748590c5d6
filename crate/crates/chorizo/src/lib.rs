//! Combinatorial models of degenerating families of Riemann surfaces.
//!
//! A pseudoperiodic homeomorphism of negative twist is described by a finite
//! amount of data: the pieces of the cut surface, the annuli around the
//! reducing curves, the permutation the map induces on them, and per-orbit
//! quotient data (valencies, cone points, screw numbers). From that data this
//! crate builds the generalized quotient, a numerical chorizo space: the dual
//! graph of the degenerate central fiber with component multiplicities. It
//! also computes the conjugacy invariants attached to the mapping class: the refined
//! partition graph with its induced periodic action, the weighted quotient
//! graph, and canonical encodings of all three. Conjugacy of two inputs is
//! decided by comparing the invariants in order.
//!
//! All arithmetic is exact (big integers and rationals); nothing is floated.

pub mod canon;
pub mod catalog;
pub mod chains;
pub mod conjugacy;
pub mod generator;
pub mod graphs;
pub mod model;
pub mod quotient;

pub use chains::ChainBounds;
pub use model::{PseudoPeriodicData, Validated, ValidationReport};
