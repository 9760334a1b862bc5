//! Simulators for the reflecting Poisson walkers.
//!
//! Configurations are stored truncated at a cap `d` in conjugate form
//! ([`TruncState`]): walker `i` rings at rate `t^i`, and a blocked ring is
//! taken by the top of the walker's equal-value block.

pub mod clocks;
pub mod engine;
pub mod schedule;
pub mod shift;
pub mod state;
pub mod trajectory;

pub use clocks::ClockStreams;
pub use engine::{
    approx_2inf, approx_2inf_coupled, finite_jump, run_clocked, simulate_edge, simulate_finite, simulate_truncated,
    truncated_snapshots, DEFAULT_EVENT_BUDGET,
};
pub use shift::{shift_stationarity_check, ShiftReport};
pub use state::TruncState;
pub use trajectory::{Event, Initial, Replayed, Trajectory};
