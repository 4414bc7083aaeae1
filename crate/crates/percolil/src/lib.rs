//! Monte Carlo toolkit for random walks on supercritical bond percolation
//! clusters.
//!
//! The crate simulates Bernoulli bond percolation on finite boxes of Z^d,
//! conditions on the origin lying in the (finite-box proxy of the) infinite
//! cluster, and runs three coupled random walks on it:
//!
//! * the myopic jump chain `Z`, which jumps along a uniformly chosen open
//!   incident edge at every step;
//! * the continuous-time walk `X_t = Z_{n(t)}`, driven by i.i.d. mean-one
//!   exponential holding times;
//! * the blind walk `Y_n = Z_{m(n)}`, driven by geometric clocks with success
//!   probability `deg/2d`, equivalently the walk that picks one of the 2d
//!   directions uniformly and moves only if that edge is open.
//!
//! On top of the walks sit the measurement layers: chemical-distance
//! geometry (balls, annuli, volume growth), environment statistics seen from
//! the walker (degree histogram and the time-scale constant alpha linking the
//! blind and myopic clocks), exact finite-cluster oracles (transition
//! matrices, uniformized heat kernels, stationarity checks), and the
//! iterated-logarithm scaling diagnostics `|X_t|_1 / sqrt(t log log t)`
//! tracked on geometric checkpoint grids.
//!
//! Start with the runnable examples (`cargo run --release --example ...`) or
//! the `percolil` binary, whose subcommands wrap [`runner`].

pub mod analysis;
pub mod cli;
pub mod cluster;
pub mod environment;
pub mod geometry;
pub mod lattice;
pub mod percolation;
pub mod rng;
pub mod runner;
pub mod walks;

pub use cluster::{label_clusters, sample_conditioned, ClusterLabeling, ClusterView};
pub use lattice::{Boundary, LatticeSpec};
pub use percolation::BondConfiguration;
pub use walks::{CoupledTrajectory, WalkKind};

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("site {0:?} is outside the box")]
    OutsideBox(Vec<i64>),
    #[error("site is not in the chosen cluster")]
    OutsideCluster,
    #[error(
        "no accepted environment in {attempts} attempts (acceptance rate {acceptance:.4}); \
         p may be subcritical or the box too small"
    )]
    ConditioningExhausted { attempts: u32, acceptance: f64 },
    #[error("shift by {0:?} moves the free-boundary box out of range")]
    ShiftOutOfRange(Vec<i64>),
    #[error("walk cannot start on a site with no open edges")]
    IsolatedStart,
    #[error("query at {query} exceeds the simulated horizon {horizon}")]
    BeyondHorizon { query: f64, horizon: f64 },
    #[error("distance cap {0} exceeded")]
    CapExceeded(u32),
    #[error("cluster has {got} sites, the oracle cap is {cap}")]
    OracleCapExceeded { got: usize, cap: usize },
    #[error("need at least {need} {what}, got {got}")]
    TooFew {
        what: &'static str,
        need: usize,
        got: usize,
    },
    #[error("bond file: {0}")]
    BondFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} trials failed; first error: {first}")]
    ExcessiveFailures {
        failed: usize,
        total: usize,
        first: String,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code class: 1 validation, 3 excessive trial failures,
    /// 2 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::TooFew { .. } => 1,
            Error::ExcessiveFailures { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
