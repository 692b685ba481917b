//! Numerical ground truth for the analytic curves: orbit integration,
//! saddle-manifold shooting, homoclinic continuation and limit cycles.

mod cycle;
mod manifold;

pub use crate::ode::{IntegratorConfig, Trajectory};
pub use cycle::{find_cycle, find_limit_cycle, return_map, LimitCycle};
pub use manifold::{
    continue_point, homoclinic_continuation, homoclinic_splitting, saddle_manifold_shot, ContinuationPoint,
    ContinuationResult, ManifoldBranch, SplittingResult, DEFAULT_DELTA,
};

use crate::error::Result;
use crate::ode::solve;
use crate::unfolding::MuParams;

/// The unfolding as an array-valued field.
pub fn unfolding_vf(mu: MuParams) -> impl Fn(&[f64; 2]) -> [f64; 2] {
    move |s: &[f64; 2]| {
        let (x, y) = (s[0], s[1]);
        let x2 = x * x;
        [y, mu.mu1 + mu.mu2 * x + x2 * x + y * (mu.mu3 - 3.0 * x2)]
    }
}

/// Orbit of the unfolding from `start` over `[0, t_end]`.
pub fn integrate(mu: MuParams, start: [f64; 2], t_end: f64, config: &IntegratorConfig) -> Result<Trajectory<2>> {
    Ok(solve(&unfolding_vf(mu), start, t_end, config, &[])?.trajectory)
}
