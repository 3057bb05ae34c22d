//! Numerical laboratory for quantum best arm identification.
//!
//! * [`hilbert`]: state vectors over the agent/environment register and the
//!   structured unitaries acting on them.
//! * [`bandit`]: problem instances and their classical summary quantities.
//! * [`qbai`]: amplitude-amplification operators, exact simulation and the
//!   closed-form recommendation probabilities.
//! * [`classical`]: the UCB-E baseline, Monte Carlo error estimates and bounds.
//! * [`analysis`]: matched-confidence round counts and scaling sweeps.
//! * [`cli`]: instance files, experiment commands and table output.

pub mod analysis;
pub mod bandit;
pub mod classical;
pub mod cli;
pub mod completion;
pub mod error;
pub mod hilbert;
pub mod qbai;

pub use bandit::{BanditInstance, InstanceSummary};
pub use error::{Error, Result};
pub use hilbert::{Dims, OperatorSpec, StateVector};
