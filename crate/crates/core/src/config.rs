//! Numerical tolerances shared by every module.
//!
//! All floating-point comparisons in the crate go through one of these named
//! values. A scenario may override any subset of them; missing keys fall back
//! to the defaults below.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the adaptive integrator.
    pub integrator_rtol: f64,
    /// Absolute tolerance of the adaptive integrator.
    pub integrator_atol: f64,
    /// Smallest accepted integrator step before reporting underflow.
    pub integrator_min_step: f64,
    /// Step budget per integrated orbit.
    pub integrator_max_steps: usize,
    /// Points with `|g| <= boundary` are on the boundary of a region.
    pub boundary: f64,
    /// Width of the final bisection bracket for crossing times.
    pub time: f64,
    /// Largest probe time of the zero-time ladder.
    pub ladder_start: f64,
    /// Ratio between consecutive ladder probes.
    pub ladder_ratio: f64,
    /// Number of ladder probes.
    pub ladder_len: usize,
    /// Time horizon for "undefined" verdicts.
    pub horizon: f64,
    /// Largest marching step.
    pub march_max_step: f64,
    /// Smallest marching step.
    pub march_min_step: f64,
    /// Marching step budget per query.
    pub march_max_steps: usize,
    /// `|F(s) - s| <= fixed_param` counts as a fixed parameter.
    pub fixed_param: f64,
    /// Exit values closer than this (parameter units) count as one value.
    pub merge: f64,
    /// A jump larger than this multiple of the local spacing is a discontinuity.
    pub discontinuity_factor: f64,
    /// Samples skipped on each side of an estimated discontinuity.
    pub discontinuity_collar: usize,
    /// Minimum run length (samples) for a run to take part in a junction.
    pub junction_min_run: usize,
    /// Relative tolerance of the monotone root solvers.
    pub root_rtol: f64,
    /// Residual allowed when checking `h ∘ h⁻¹ = id` on probe grids.
    pub homeomorphism: f64,
    /// Minimum number of jumps before a Zeno verdict is attempted.
    pub zeno_min_events: usize,
    /// Number of trailing inter-event ratios inspected.
    pub zeno_window: usize,
    /// Inter-event ratios must stay below `1 - zeno_eps`.
    pub zeno_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            integrator_rtol: 1e-10,
            integrator_atol: 1e-12,
            integrator_min_step: 1e-14,
            integrator_max_steps: 1_000_000,
            boundary: 1e-10,
            time: 1e-12,
            ladder_start: 1e-2,
            ladder_ratio: 0.25,
            ladder_len: 13,
            horizon: 100.0,
            march_max_step: 0.05,
            march_min_step: 1e-5,
            march_max_steps: 4_000_000,
            fixed_param: 1e-6,
            merge: 1e-6,
            discontinuity_factor: 10.0,
            discontinuity_collar: 3,
            junction_min_run: 2,
            root_rtol: 1e-10,
            homeomorphism: 1e-8,
            zeno_min_events: 8,
            zeno_window: 5,
            zeno_eps: 0.05,
        }
    }
}

impl Tolerances {
    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Probe times of the zero-time ladder, largest first.
    pub fn ladder(&self) -> Vec<f64> {
        (0..self.ladder_len).map(|k| self.ladder_start * self.ladder_ratio.powi(k as i32)).collect()
    }
}
