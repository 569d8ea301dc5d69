//! Two-process model of video popularity.
//!
//! Information about a video spreads through direct recommendation and word of
//! mouth ([`spread`]); users who intend to watch then react at a finite rate
//! ([`reaction`]). The crate also ships a discrete-time stochastic simulator of
//! the same population process ([`sim`]), a least-squares estimator for daily
//! view counts ([`fit`]) and the windowed view-count entropy ([`metrics`]).

pub mod error;
pub mod fit;
pub mod metrics;
pub mod params;
pub mod reaction;
pub mod sim;
pub mod spread;
pub mod trace;

pub use trace::ViewTrace;

pub use error::{Error, Result};
pub use params::{ModelParams, ReducedParams, TimeGrid};
pub use reaction::{find_peak, solve_reaction, z_quadrature, PeakReport, ReactionTrajectory};
pub use spread::{classify, critical_times, sample_spread, CriticalTimes, Family, Regime, Trajectory};

