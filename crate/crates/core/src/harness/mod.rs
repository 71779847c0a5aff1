//! Experiments that turn the estimates into measured numbers.

pub mod experiments;
pub mod fit;
pub mod functional;
pub mod initial;
pub mod results;
pub mod selftest;

pub use experiments::{run_experiment, NormRow, Outcome};
pub use fit::{fit_rate, fit_rate_with, FitAxis, RateFit};
pub use functional::{functional_trace, functional_x, required_trackers, FunctionalX};
pub use initial::{make_initial_data, InitialDataSpec, Preparation, Profile};
pub use results::write_results;
