//! First-out and first-in maps, computed by a zero-time probe ladder followed
//! by adaptive marching and bisection.

mod classify;

pub use classify::{
    check_backward_invariance, classify_boundary_point, BackwardInvariance, BackwardVerdict, BoundaryLabel,
    BoundaryType,
};

use serde::Serialize;

use crate::config::Tolerances;
use crate::flow::{FlowError, FlowModel, Orbit};
use crate::geometry::{Location, Region};
use crate::point::Point;

/// Value of a first-out or first-in query.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MapValue {
    Defined {
        time: f64,
        point: Point,
    },
    /// The orbit stayed in the region up to `horizon` (or up to a blow-up
    /// of the local flow before the horizon).
    Undefined {
        horizon: f64,
    },
    Unresolved {
        reason: String,
    },
}

impl MapValue {
    pub fn status(&self) -> &'static str {
        match self {
            MapValue::Defined { .. } => "defined",
            MapValue::Undefined { .. } => "undefined",
            MapValue::Unresolved { .. } => "unresolved",
        }
    }
}

/// Outcome of a first-out query `E_A(x)`, with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitOutcome {
    pub value: MapValue,
    /// Zero-time ladder probes, largest first.
    pub probes: Vec<(f64, Location)>,
    /// Successive bisection brackets of the crossing time.
    pub brackets: Vec<(f64, f64)>,
    /// Boundary touches that returned inside and were discarded.
    pub grazes: usize,
    pub march_steps: usize,
    /// Time at which the local flow left its domain, if it did.
    pub blow_up: Option<f64>,
}

/// A first-in query `R_B(x)` is a first-out query on the complement.
pub type ReturnOutcome = ExitOutcome;

impl ExitOutcome {
    fn new(value: MapValue) -> Self {
        ExitOutcome { value, probes: Vec::new(), brackets: Vec::new(), grazes: 0, march_steps: 0, blow_up: None }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self.value, MapValue::Defined { .. })
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self.value, MapValue::Undefined { .. })
    }

    pub fn is_unresolved(&self) -> bool {
        matches!(self.value, MapValue::Unresolved { .. })
    }

    pub fn time(&self) -> Option<f64> {
        match self.value {
            MapValue::Defined { time, .. } => Some(time),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<Point> {
        match self.value {
            MapValue::Defined { point, .. } => Some(point),
            _ => None,
        }
    }

    /// `E(x) = x`, decided by the exit time being zero to time tolerance.
    pub fn is_fixed(&self, cfg: &Tolerances) -> bool {
        self.time().is_some_and(|t| t <= cfg.time)
    }
}

fn unresolved(reason: impl Into<String>) -> MapValue {
    MapValue::Unresolved { reason: reason.into() }
}

/// Number of sign changes in a sequence of informative probe locations.
fn sign_changes(locs: impl Iterator<Item = Location>) -> usize {
    let mut last = None;
    let mut changes = 0;
    for l in locs.filter(|&l| l != Location::Boundary) {
        if last.is_some_and(|p| p != l) {
            changes += 1;
        }
        last = Some(l);
    }
    changes
}

/// `Tᵉ_A(x)` and `E_A(x)` for `x ∈ A ∪ ∂A`.
///
/// The zero-time ladder decides whether the orbit leaves at once. Otherwise
/// the orbit is marched with adaptive steps until it first leaves the open
/// set, and the crossing is bisected to `cfg.time` and projected onto `∂A`.
pub fn exit_time(flow: &FlowModel, a: &Region, x: Point, horizon: f64, cfg: &Tolerances) -> ExitOutcome {
    let tol = cfg.boundary;
    if a.locate(x, tol) == Location::Outside {
        return ExitOutcome::new(unresolved("start point lies outside the closure"));
    }
    let mut orbit = flow.orbit(x);
    let mut out = ExitOutcome::new(MapValue::Undefined { horizon });

    for delta in cfg.ladder() {
        match orbit.at(delta) {
            Ok(p) => out.probes.push((delta, a.locate(p, tol))),
            Err(e) => {
                out.value = unresolved(format!("zero-time probe failed: {e}"));
                return out;
            }
        }
    }
    if sign_changes(out.probes.iter().map(|p| p.1)) >= 2 {
        out.value = unresolved("zero-time ladder alternates between inside and outside");
        return out;
    }
    let start = match out.probes.iter().rev().find(|p| p.1 != Location::Boundary) {
        // the orbit runs along the boundary
        None => {
            out.value = MapValue::Defined { time: 0.0, point: x };
            return out;
        }
        Some(&(_, Location::Outside)) => {
            out.value = MapValue::Defined { time: 0.0, point: x };
            return out;
        }
        Some(&(t, _)) => t,
    };
    out.value = march(&mut *orbit, a, start, horizon, cfg, &mut out);
    out
}

fn march(
    orbit: &mut dyn Orbit,
    a: &Region,
    start: f64,
    horizon: f64,
    cfg: &Tolerances,
    out: &mut ExitOutcome,
) -> MapValue {
    let tol = cfg.boundary;
    let mut t = start;
    let mut g = match orbit.at(t) {
        Ok(p) => a.indicator(p),
        Err(e) => return unresolved(format!("orbit evaluation failed: {e}")),
    };
    let mut h = cfg.march_min_step;
    let mut last_inside = t;
    // first boundary sample of a pending touch
    let mut touch: Option<f64> = None;

    while t < horizon {
        if out.march_steps >= cfg.march_max_steps {
            return unresolved(format!("marching step budget exhausted at t = {t}"));
        }
        out.march_steps += 1;
        let t_next = (t + h).min(horizon);
        let q = match orbit.at(t_next) {
            Ok(q) => q,
            Err(e @ FlowError::OutOfDomain { .. }) => {
                if touch.is_some() {
                    return unresolved(format!("orbit left the flow domain on the boundary: {e}"));
                }
                out.blow_up = Some(t_next);
                return MapValue::Undefined { horizon: t_next.min(horizon) };
            }
            Err(e) => return unresolved(format!("orbit evaluation failed: {e}")),
        };
        let g_next = a.indicator(q);
        match a.locate(q, tol) {
            Location::Inside => {
                if touch.take().is_some() {
                    out.grazes += 1;
                }
                last_inside = t_next;
            }
            Location::Boundary => {
                touch.get_or_insert(t_next);
            }
            Location::Outside => {
                let b = touch.unwrap_or(t_next);
                return bisect(orbit, a, last_inside, b, cfg, out);
            }
        }
        h = match (g, g_next) {
            (Some(g0), Some(g1)) => {
                let rate = ((g1 - g0) / (t_next - t)).abs();
                let guess = if rate > 0.0 { 0.25 * g1.abs() / rate } else { f64::INFINITY };
                (2.0 * h).min(cfg.march_max_step).min(guess.max(cfg.march_min_step))
            }
            _ => (2.0 * h).min(cfg.march_max_step),
        };
        t = t_next;
        g = g_next;
    }
    if touch.is_some() {
        return unresolved("orbit lingers in the boundary band at the horizon");
    }
    MapValue::Undefined { horizon }
}

/// Shrink `[lo, hi]` (inside at `lo`, not inside at `hi`) to `cfg.time`.
///
/// When the indicator changes sign over the bracket, bisection follows its
/// sign so the crossing lands on `g = 0` rather than on the edge of the band.
fn bisect(
    orbit: &mut dyn Orbit,
    a: &Region,
    mut lo: f64,
    mut hi: f64,
    cfg: &Tolerances,
    out: &mut ExitOutcome,
) -> MapValue {
    out.brackets.push((lo, hi));
    let g_at = |orbit: &mut dyn Orbit, t: f64| orbit.at(t).ok().and_then(|p| a.indicator(p));
    let by_sign = matches!((g_at(orbit, lo), g_at(orbit, hi)), (Some(g0), Some(g1)) if g0 < 0.0 && g1 >= 0.0);
    while hi - lo > cfg.time {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = match orbit.at(mid) {
            Ok(p) => p,
            Err(e) => return unresolved(format!("bisection evaluation failed: {e}")),
        };
        let inside = match a.indicator(p) {
            Some(g) if by_sign => g < 0.0,
            _ => a.locate(p, cfg.boundary) == Location::Inside,
        };
        if inside {
            lo = mid;
        } else {
            hi = mid;
        }
        out.brackets.push((lo, hi));
    }
    match orbit.at(hi) {
        Ok(p) => {
            let point = a.project_to_boundary(p);
            if a.locate(point, cfg.boundary) != Location::Boundary {
                return unresolved("crossing point could not be placed on the boundary");
            }
            MapValue::Defined { time: hi, point }
        }
        Err(e) => unresolved(format!("bisection evaluation failed: {e}")),
    }
}

/// `E_A(x)`.
pub fn first_out(flow: &FlowModel, a: &Region, x: Point, horizon: f64, cfg: &Tolerances) -> ExitOutcome {
    exit_time(flow, a, x, horizon, cfg)
}

/// `R_Ā(x)`, the first point of the forward orbit in the closure of `a`,
/// computed as the first-out map of the open complement `X ∖ Ā`.
pub fn first_in(flow: &FlowModel, a: &Region, x: Point, horizon: f64, cfg: &Tolerances) -> ReturnOutcome {
    exit_time(flow, &a.complement(), x, horizon, cfg)
}
