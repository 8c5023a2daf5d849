//! Exact checkers for a handful of combinatorial statements: equilibrium
//! optimisation on graphs, Wilber's interleaving bound, heap working sets,
//! conflict-graph partitions, circle tilings and small-support coarse
//! correlated equilibria.
//!
//! All arithmetic is exact (big rationals and quadratic surds); every checker
//! returns a witness when the property fails.

pub mod cce;
pub mod generate;
pub mod graph;
pub mod heap;
pub mod kkos;
pub mod oracle;
pub mod partition;
pub mod scalar;
pub mod simplex;
pub mod tiling;
pub mod wilber;
