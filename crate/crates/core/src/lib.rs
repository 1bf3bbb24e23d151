//! Capacity-approximating simple schedules for Gaussian half-duplex
//! multi-relay networks.
//!
//! The crate evaluates cut-set rates of a network under fixed listen/transmit
//! schedules, finds the schedule maximizing the minimum cut rate, and shows
//! constructively that an optimum with at most `N+1` active states exists:
//! one small LP per relay ordering, or a cutting-plane loop that alternates
//! between an LP over schedules and submodular minimization over cuts.

pub mod error;
pub mod files;
pub mod generate;
mod linalg;
pub mod network;
pub mod oracle;
pub mod schedule;
pub mod scheduler;
pub mod simplex;
pub mod submodular;

pub use error::{Error, Result};
pub use network::{cut_rate, g_normalized, ifix, CutMask, CutRateTable, NetworkModel, StateMask};
pub use schedule::Schedule;
