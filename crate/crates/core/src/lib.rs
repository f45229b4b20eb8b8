// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod first_maps;
pub mod flow;
pub mod geometry;
pub mod hybrid;
pub mod planar;
pub mod point;
pub mod realization;
pub mod roots;
pub mod scenario;
pub mod svg;

pub use config::Tolerances;
pub use flow::{FlowError, FlowKind, FlowModel};
pub use point::Point;
