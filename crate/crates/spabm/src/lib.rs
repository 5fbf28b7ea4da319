//! Sparse popularity-adjusted block models.
//!
//! A network of `n` nodes split into `K` communities follows a
//! popularity-adjusted block model when every community-pair block of its
//! connection-probability matrix is the outer product of two popularity
//! vectors; the sparse variant additionally lets whole rows of those blocks
//! vanish, so single nodes can be cut off from single communities. This
//! crate covers the full workflow around that model class:
//!
//! * [`net`] — containers and the block algebra (rearrangement, blocks,
//!   structural supports, projections),
//! * [`synth`] — seeded synthetic generation,
//! * [`ssc`] — sparse subspace clustering: elastic-net self-representation,
//!   affinity, normalized-cut spectral clustering,
//! * [`estimator`] — rank-one block estimation with support recovery and
//!   the penalized residual objective,
//! * [`model_select`] — penalized choice of the number of communities,
//! * [`metrics`] — clustering and estimation error measures,
//! * [`oracle`] — brute-force reference searches for small instances,
//! * [`io`] — plain-text readers and writers for the CLI file formats,
//! * [`eig`] — the dense symmetric eigensolver backing the spectral steps.
//!
//! The numeric core is generic over the floating-point scalar through
//! [`Scalar`]; `f64` aliases for the main containers are exported at the
//! crate root.

pub mod eig;
pub mod error;
pub mod estimator;
pub mod io;
pub mod metrics;
pub mod model_select;
pub mod net;
pub mod oracle;
pub mod scalar;
pub mod ssc;
pub mod synth;

pub use error::{Result, SpabmError};
pub use scalar::Scalar;

// Downstream crates need the same ndarray the containers are built on.
pub use ndarray;

/// Double-precision adjacency matrix.
pub type Adjacency = net::AdjacencyMatrix<f64>;
/// Double-precision probability matrix.
pub type Probability = net::ProbabilityMatrix<f64>;
/// Double-precision popularity parameters.
pub type Popularity = net::PopularityMatrix<f64>;
