//! Random d-uniform hypergraphs and their dominating sets.
//!
//! The crate covers the whole pipeline used to study solution independence
//! for the (weak) dominating set problem on `G_d(n, p)`:
//!
//! * [`hypercore`]: the canonical instance type, domination predicates and
//!   the hitting-set reformulation.
//! * [`modelgen`]: combinatorial counts, calibration of `p` so that the
//!   expected number of size-`k` dominating sets hits a target, and seeded
//!   sampling.
//! * [`moments`]: closed-form first/second moments, quasi-dominating set
//!   moments and the correlation ratios for dominating sets and vertex covers.
//! * [`solvers`]: exhaustive enumeration oracles.
//! * [`selfref`]: the degree-preserving two-edge swap that flips
//!   solvability outside a protected region, and the pair builder.
//! * [`harness`]: seeded Monte-Carlo experiments with CSV output.

#![forbid(unsafe_code)]

pub mod error;
pub mod harness;
pub mod hypercore;
pub mod modelgen;
pub mod moments;
pub mod numeric;
pub mod rng;
pub mod selfref;
pub mod solvers;

pub use error::{Error, Result};
pub use hypercore::{DominationStatus, HittingFamily, Hypergraph, Instance, Vertex, VertexSet};
pub use modelgen::{CombinatorialCounts, ModelParams};
pub use moments::{CorrelationRatio, MomentReport, QuasiMomentReport, Regime};
pub use selfref::{PivotDiagnostics, ProtectedRegion, SwapDirection, SwapRecord};
pub use solvers::{SolveReport, SolverConfig};
pub use harness::{EstimateRecord, Verdict};
