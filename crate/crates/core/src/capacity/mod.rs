//! Ergodic capacity of the angular channel under different levels of channel
//! knowledge, by Monte Carlo and by a large-system approximation.

mod asymptotic;
mod montecarlo;
mod waterfill;

pub use asymptotic::{capacity_asymptotic, solve_fixed_point, FixedPoint, Normalization};
pub use montecarlo::{
    capacity_csir_mc, capacity_csir_mc_sweep, capacity_csit_mc, capacity_csit_mc_sweep, capacity_iid_mc, capacity_statistical_csit, csir_capacity_of, CapacityResult, Regime,
};
pub use waterfill::{waterfilling, Waterfilling};

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
