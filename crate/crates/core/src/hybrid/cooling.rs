use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::first_maps::{exit_time, first_in, MapValue};
use crate::flow::{AffineFlow, FlowModel};
use crate::geometry::make_band;
use crate::point::Point;

/// Stone heating water in a room: `T_s' = −α (T_s − T_w)`,
/// `T_w' = γ (T_s − T_w) − β (T_w − T_r)`, in coordinates `(T_w, T_s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CoolingParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t_room: f64,
    pub t_hot: f64,
}

impl Default for CoolingParams {
    fn default() -> Self {
        CoolingParams { alpha: 1.0, beta: 1.0, gamma: 1.0, t_room: 20.0, t_hot: 80.0 }
    }
}

pub fn cooling_flow(p: &CoolingParams) -> FlowModel {
    let m = [[-(p.gamma + p.beta), p.gamma], [p.alpha, -p.alpha]];
    FlowModel::new(AffineFlow::new("cooling", m, Point::new(p.t_room, p.t_room)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoolingReport {
    pub epsilon: f64,
    /// Time of the first exit from `A_ε`.
    pub exit_time: f64,
    pub exit_point: Point,
    /// `Tʳ` from the exit point back to `A_ε`.
    pub return_time: f64,
    pub return_point: Point,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CoolingError {
    #[error("the water temperature never leaves the band of half-width {epsilon} within the horizon")]
    NeverExits { epsilon: f64 },
    #[error("the orbit never returns to the band of half-width {epsilon} within the horizon")]
    NeverReturns { epsilon: f64 },
    #[error("non-positive band half-width {0}")]
    BadEpsilon(f64),
    #[error("{0}")]
    Unresolved(String),
}

/// Time for the water to leave `A_ε = {|T_w − T_r| ≤ ε}` and come back,
/// starting from `(T_r, T_H)`.
pub fn first_in_time_scenario(
    p: &CoolingParams,
    epsilon: f64,
    horizon: f64,
    cfg: &Tolerances,
) -> Result<CoolingReport, CoolingError> {
    let band = make_band(p.t_room, epsilon).map_err(|_| CoolingError::BadEpsilon(epsilon))?;
    let flow = cooling_flow(p);
    let x0 = Point::new(p.t_room, p.t_hot);
    let out = exit_time(&flow, &band, x0, horizon, cfg);
    let (t_e, x_e) = match out.value {
        MapValue::Defined { time, point } => (time, point),
        MapValue::Undefined { .. } => return Err(CoolingError::NeverExits { epsilon }),
        MapValue::Unresolved { reason } => return Err(CoolingError::Unresolved(reason)),
    };
    let back = first_in(&flow, &band, x_e, horizon - t_e, cfg);
    match back.value {
        MapValue::Defined { time, point } => Ok(CoolingReport {
            epsilon,
            exit_time: t_e,
            exit_point: x_e,
            return_time: time,
            return_point: point,
            total: t_e + time,
        }),
        MapValue::Undefined { .. } => Err(CoolingError::NeverReturns { epsilon }),
        MapValue::Unresolved { reason } => Err(CoolingError::Unresolved(reason)),
    }
}
