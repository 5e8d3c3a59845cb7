//! Linear programs as weighted bipartite graphs.
//!
//! * [`lp`]: LP data model, simplex solver, minimum-norm optimal solutions.
//! * [`graph`]: lossless LP ⇄ bipartite graph encoding and the permutation action.
//! * [`wl`]: exact color refinement (the WL test specialised to LP graphs).
//! * [`fold`]: stable partitions, solution folding and the twin-certification harness.
//! * [`gnn`]: message-passing GNNs with analytic gradients, Adam and training loops.
//! * [`forge`]: instance generators and dataset labelling.

pub mod error;
pub mod fold;
pub mod forge;
pub mod gnn;
pub mod graph;
pub mod lp;
pub mod wl;

pub use error::{Error, Result};
