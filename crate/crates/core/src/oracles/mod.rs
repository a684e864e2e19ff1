//! Exact planning on known models.

mod cartesian;
mod diameter;
mod gain;
mod hitting;

pub use cartesian::{cartesian_vi, cartesian_vi_with, decompose, product_partition, raw_vi, BaseMdp, CartesianVi};
pub use diameter::{
    compute_diameter_report, diameter_report, factored_diameter, support_sizes, regret_constant,
    DiameterReport,
};
pub use gain::{average_reward_vi, GainResult, DEFAULT_MAX_ITER, DEFAULT_SPAN_TOL};
pub use hitting::{diameter, hitting_residual, min_hitting_times, HittingTable, HITTING_BOUND, HITTING_TOL};
