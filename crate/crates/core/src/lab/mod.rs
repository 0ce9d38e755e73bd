//! Verification harness: comparison with the limit, rate fits, sweeps,
//! manufactured-solution studies and stability probes.

pub mod compare;
pub mod mms;
pub mod rates;
pub mod stability;
pub mod sweep;

pub use compare::{compare_to_limit, velocity_ratio, ComparisonRow, COLUMNS};
pub use mms::{mms_convergence, MmsReport, MmsRow};
pub use rates::{fit_rate, RateFit};
pub use stability::{epsilon_stability, infsup_study, limit_stability, InfSupRow, Problem, StabilitySample};
pub use sweep::{run_sweep, ConvergenceReport, SweepRow, SweepSetup, DEFAULT_EPSILONS};
