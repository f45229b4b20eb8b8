//! Impacting systems on the closed upper half-plane: a partial reset map on
//! the boundary line, a local flow near `H⁺` and a sliding flow on `R_s`.

mod cooling;
mod induced;
mod zeno;

use std::fmt;
use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::first_maps::{exit_time, ExitOutcome, MapValue};
use crate::flow::{ClosedForm, FlowModel};
use crate::geometry::{make_halfplane, HalfPlane, Region};
use crate::point::Point;

pub use cooling::{cooling_flow, first_in_time_scenario, CoolingError, CoolingParams, CoolingReport};
pub use induced::{
    check_conjugacy_invariance, induced_system, normal_form_conjugate, poincare_composition, ConjugacyReport,
    InduceFailure, InducedSystem, NormalForm, NormalFormError, Poincare, PoincareClass,
};
pub use zeno::{detect_zeno, ZenoReport, ZenoVerdict};

pub type PartialFn = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

/// Scenario-file declaration of a reset map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResetDecl {
    /// `v ↦ max(−r v, v)` on the velocity coordinate.
    Restitution { r: f64 },
    /// `x ↦ max(−μ x, x)`.
    Oscillator { mu: f64 },
    /// Samples `(x, P(x))`, interpolated linearly; undefined outside their range.
    Tabulated { points: Vec<[f64; 2]> },
}

impl ResetDecl {
    pub fn build(&self) -> ResetMap {
        match self {
            ResetDecl::Restitution { r } => ResetMap::restitution(*r),
            ResetDecl::Oscillator { mu } => ResetMap::oscillator(*mu),
            ResetDecl::Tabulated { points } => ResetMap::tabulated(points.iter().map(|p| (p[0], Some(p[1]))).collect()),
        }
    }
}

/// The partial reset map `P` on the boundary line.
#[derive(Clone)]
pub struct ResetMap {
    label: String,
    f: PartialFn,
}

impl fmt::Debug for ResetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ResetMap({})", self.label)
    }
}

impl ResetMap {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> Option<f64> + Send + Sync + 'static) -> Self {
        ResetMap { label: label.into(), f: Arc::new(f) }
    }

    pub fn total(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, move |x| Some(f(x)))
    }

    pub fn oscillator(mu: f64) -> Self {
        Self::total(format!("max(−{mu}x, x)"), move |x| (-mu * x).max(x))
    }

    pub fn restitution(r: f64) -> Self {
        Self::total(format!("restitution({r})"), move |v| (-r * v).max(v))
    }

    /// Linear interpolation between consecutive defined samples; undefined
    /// next to an undefined sample and outside the table.
    pub fn tabulated(mut table: Vec<(f64, Option<f64>)>) -> Self {
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        let label = format!("tabulated({} samples)", table.len());
        Self::new(label, move |x| {
            let k = table.partition_point(|p| p.0 < x);
            if k < table.len() && table[k].0 == x {
                return table[k].1;
            }
            // exit points land on the table ends only up to rounding
            let near = |e: f64| (e - x).abs() <= 1e-9 * (1.0 + x.abs());
            if k == 0 {
                return table.first().filter(|p| near(p.0)).and_then(|p| p.1);
            }
            if k == table.len() {
                return table.last().filter(|p| near(p.0)).and_then(|p| p.1);
            }
            let ((x0, y0), (x1, y1)) = (table[k - 1], table[k]);
            Some(y0? + (y1? - y0?) * (x - x0) / (x1 - x0))
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, x: f64) -> Option<f64> {
        (self.f)(x)
    }
}

/// `Φ_s(t, p) = p`.
pub fn stationary_flow() -> FlowModel {
    FlowModel::new(ClosedForm::new("stationary", |_, p| p))
}

#[derive(Clone, Debug)]
pub struct ImpactingSystem {
    pub label: String,
    pub reset: ResetMap,
    pub flow: FlowModel,
    pub sliding: FlowModel,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SystemCheck {
    /// Boundary samples whose exit point is outside `dom P`.
    pub closure_violations: Vec<f64>,
    /// Boundary samples in `R_s`.
    pub sliding_set: Vec<f64>,
    pub unresolved: Vec<f64>,
}

impl ImpactingSystem {
    pub fn new(label: impl Into<String>, reset: ResetMap, flow: FlowModel, sliding: FlowModel) -> Self {
        ImpactingSystem { label: label.into(), reset, flow, sliding }
    }

    /// The impact oscillator: rotation at speed `π`, `P(x) = max(−μx, x)`, stationary sliding.
    pub fn impact_oscillator(mu: f64) -> Self {
        Self::new(
            format!("impact oscillator μ = {mu}"),
            ResetMap::oscillator(mu),
            crate::flow::linear::builtin::rotation(),
            stationary_flow(),
        )
    }

    /// Bouncing ball in (velocity, height) coordinates: `v' = −g`, `h' = v`,
    /// with the boundary `h = 0` as the floor.
    pub fn bouncing_ball(g: f64, r: f64) -> Self {
        Self::new(
            format!("bouncing ball g = {g}, r = {r}"),
            ResetMap::restitution(r),
            crate::flow::linear::builtin::gravity(g),
            stationary_flow(),
        )
    }

    pub fn region() -> Region {
        make_halfplane(HalfPlane::Upper)
    }

    pub fn first_out(&self, x: f64, horizon: f64, cfg: &Tolerances) -> ExitOutcome {
        exit_time(&self.flow, &Self::region(), Point::new(x, 0.0), horizon, cfg)
    }

    /// `(x, 0) ∈ R_s`: `P(x) = x` and `E_{H⁺}(x, 0) = (x, 0)`.
    pub fn in_sliding_set(&self, x: f64, cfg: &Tolerances) -> bool {
        self.reset.apply(x).is_some_and(|p| (p - x).abs() <= cfg.boundary * (1.0 + x.abs()))
            && self.first_out(x, cfg.horizon, cfg).is_fixed(cfg)
    }

    /// Check `Im E_{H⁺} ⊂ dom P × {0}` and collect `R_s` on boundary samples.
    pub fn check(&self, xs: &[f64], horizon: f64, cfg: &Tolerances) -> SystemCheck {
        let mut c = SystemCheck::default();
        for &x in xs {
            let e = self.first_out(x, horizon, cfg);
            match e.value {
                MapValue::Defined { point, .. } => {
                    if self.reset.apply(point.x).is_none() {
                        c.closure_violations.push(x);
                    }
                    if e.is_fixed(cfg)
                        && self.reset.apply(x).is_some_and(|p| (p - x).abs() <= cfg.boundary * (1.0 + x.abs()))
                    {
                        c.sliding_set.push(x);
                    }
                }
                MapValue::Undefined { .. } => {}
                MapValue::Unresolved { .. } => c.unresolved.push(x),
            }
        }
        c
    }
}

/// Continuation rule at boundary points that admit both a flow and a jump.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    PreferJump,
    PreferFlow,
    /// Slide on `R_s`, otherwise jump.
    #[default]
    PreferSlide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Flow,
    Sliding,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub index: usize,
    pub t0: f64,
    pub t1: f64,
    pub mode: Mode,
    pub path: Vec<(f64, Point)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jump {
    /// Index of the interval that starts with this jump.
    pub index: usize,
    pub time: f64,
    pub pre: Point,
    pub post: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Horizon,
    ZenoDetected,
    LeftDomain,
    MaxEvents,
}

/// Event times `t(n)`: interval `n` is `[t(n), t(n + 1))`, degenerate when
/// the two coincide.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct HybridTimeDomain {
    pub event_times: Vec<f64>,
    /// Accumulation time when the trajectory ends at a Zeno point.
    pub zeno_terminal: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HybridTrajectory {
    pub start: Point,
    pub policy: Policy,
    pub segments: Vec<Segment>,
    pub jumps: Vec<Jump>,
    pub domain: HybridTimeDomain,
    pub termination: Termination,
    pub end_time: f64,
    pub zeno: ZenoReport,
}

impl HybridTrajectory {
    pub fn jump_times(&self) -> Vec<f64> {
        self.jumps.iter().map(|j| j.time).collect()
    }

    /// Rows `(n, t, x, y, mode)`.
    pub fn rows(&self) -> Vec<(usize, f64, f64, f64, Mode)> {
        self.segments.iter().flat_map(|s| s.path.iter().map(move |&(t, p)| (s.index, t, p.x, p.y, s.mode))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum HybridError {
    #[error("start point {0} is outside the closed upper half-plane")]
    StartOutside(Point),
    #[error("reset map undefined at the boundary point {point} reached at t = {time}")]
    ResetUndefined { point: Point, time: f64 },
    #[error("a second jump would be needed at t = {time} from {point}")]
    MultipleJump { point: Point, time: f64 },
    #[error("boundary hit unresolved from {point} at t = {time}: {reason}")]
    Unresolved { point: Point, time: f64, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSettings {
    pub horizon: f64,
    pub max_events: usize,
    pub policy: Policy,
    /// Path samples per segment.
    pub path_samples: usize,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings { horizon: 50.0, max_events: 64, policy: Policy::default(), path_samples: 24 }
    }
}

/// Look slightly past the horizon so that an event landing on it is not
/// mistaken for an orbit lingering at the boundary.
fn past_horizon(remaining: f64) -> f64 {
    remaining + (1e-3 * remaining).max(1e-6)
}

/// What happens next at a boundary point.
enum Continuation {
    Flow,
    Slide,
    Jump(f64),
}

struct Sim<'a> {
    sys: &'a ImpactingSystem,
    settings: &'a SimulationSettings,
    cfg: &'a Tolerances,
    region: Region,
    segments: Vec<Segment>,
    jumps: Vec<Jump>,
    event_times: Vec<f64>,
}

impl Sim<'_> {
    fn index(&self) -> usize {
        self.event_times.len() - 1
    }

    fn continuation(&self, p: Point, t: f64, just_jumped: bool) -> Result<Continuation, HybridError> {
        let e = exit_time(&self.sys.flow, &self.region, p, past_horizon(self.settings.horizon - t), self.cfg);
        if let MapValue::Unresolved { reason } = &e.value {
            return Err(HybridError::Unresolved { point: p, time: t, reason: reason.clone() });
        }
        let e_fixed = e.is_fixed(self.cfg);
        let px = self.sys.reset.apply(p.x);
        let trivial = px.is_some_and(|v| (v - p.x).abs() <= self.cfg.boundary * (1.0 + p.x.abs()));
        if e_fixed && trivial {
            return Ok(Continuation::Slide);
        }
        if just_jumped {
            return if e_fixed { Err(HybridError::MultipleJump { point: p, time: t }) } else { Ok(Continuation::Flow) };
        }
        match (px, e_fixed) {
            (None, true) => Err(HybridError::ResetUndefined { point: p, time: t }),
            (Some(v), true) => Ok(Continuation::Jump(v)),
            (Some(v), false) if !trivial && self.settings.policy != Policy::PreferFlow => Ok(Continuation::Jump(v)),
            _ => Ok(Continuation::Flow),
        }
    }

    fn jump(&mut self, t: f64, pre: Point, x: f64) -> Point {
        let post = Point::new(x, 0.0);
        self.event_times.push(t);
        self.jumps.push(Jump { index: self.index(), time: t, pre, post });
        post
    }

    fn sample(&self, flow: &FlowModel, p: Point, t0: f64, dt: f64, end: Option<Point>) -> Vec<(f64, Point)> {
        let n = self.settings.path_samples.max(1);
        let mut path: Vec<(f64, Point)> = (0..n)
            .filter_map(|k| {
                let s = dt * k as f64 / n as f64;
                flow.evaluate(s, p).ok().map(|q| (t0 + s, q))
            })
            .collect();
        if let Some(q) = end.or_else(|| flow.evaluate(dt, p).ok()) {
            path.push((t0 + dt, q));
        }
        path
    }
}

/// Forward trajectory of an impacting system from `x0`.
///
/// Continuous segments end where the first-out detector finds the boundary;
/// every boundary hit is followed by the jump `(x, 0) ↦ (P(x), 0)`. Points
/// of `R_s` slide under `Φ_s` until they leave `R_s`.
pub fn simulate(
    sys: &ImpactingSystem,
    x0: Point,
    settings: &SimulationSettings,
    cfg: &Tolerances,
) -> Result<HybridTrajectory, HybridError> {
    let region = ImpactingSystem::region();
    if x0.y < -cfg.boundary {
        return Err(HybridError::StartOutside(x0));
    }
    let mut sim = Sim { sys, settings, cfg, region, segments: Vec::new(), jumps: Vec::new(), event_times: vec![0.0] };
    let horizon = settings.horizon;
    let floor = cfg.ladder().last().copied().unwrap_or(0.0) * 100.0;
    let (mut t, mut p, mut just_jumped) = (0.0, x0, false);
    let termination = loop {
        if t >= horizon {
            break Termination::Horizon;
        }
        let on_boundary = p.y.abs() <= cfg.boundary;
        let cont = if on_boundary { sim.continuation(p, t, just_jumped)? } else { Continuation::Flow };
        just_jumped = false;
        match cont {
            Continuation::Jump(v) => {
                if sim.jumps.len() == settings.max_events {
                    break Termination::MaxEvents;
                }
                p = sim.jump(t, p, v);
                just_jumped = true;
            }
            Continuation::Slide => {
                let (t0, start) = (t, p);
                let dt = cfg.march_max_step;
                let mut q = p;
                while t < horizon {
                    let next = sys.sliding.evaluate(t + dt - t0, start).ok();
                    match next {
                        Some(r) if sys.in_sliding_set(r.x, cfg) => {
                            q = r;
                            t = (t + dt).min(horizon);
                        }
                        _ => break,
                    }
                }
                if t == t0 {
                    // Φ_s leaves R_s at once: no continuation within the system
                    break Termination::LeftDomain;
                }
                let path = sim.sample(&sys.sliding, start, t0, t - t0, Some(q));
                let index = sim.index();
                sim.segments.push(Segment { index, t0, t1: t, mode: Mode::Sliding, path });
                if t >= horizon {
                    break Termination::Horizon;
                }
                p = q;
            }
            Continuation::Flow => {
                let remaining = horizon - t;
                let e = exit_time(&sys.flow, &sim.region, p, past_horizon(remaining), cfg);
                let index = sim.index();
                match e.value {
                    MapValue::Defined { time, .. } if time > remaining => {
                        let path = sim.sample(&sys.flow, p, t, remaining, None);
                        sim.segments.push(Segment { index, t0: t, t1: horizon, mode: Mode::Flow, path });
                        t = horizon;
                        break Termination::Horizon;
                    }
                    MapValue::Defined { time, point } => {
                        let q = Point::new(point.x, 0.0);
                        let path = sim.sample(&sys.flow, p, t, time, Some(q));
                        sim.segments.push(Segment { index, t0: t, t1: t + time, mode: Mode::Flow, path });
                        t += time;
                        if sim.jumps.len() == settings.max_events {
                            break Termination::MaxEvents;
                        }
                        let v = sys.reset.apply(q.x).ok_or(HybridError::ResetUndefined { point: q, time: t })?;
                        p = sim.jump(t, q, v);
                        just_jumped = true;
                        let z = detect_zeno(&sim.jumps, horizon, cfg);
                        if z.verdict == ZenoVerdict::Zeno && time < floor {
                            break Termination::ZenoDetected;
                        }
                    }
                    MapValue::Undefined { .. } => {
                        let end = e.blow_up.unwrap_or(remaining).min(remaining);
                        let path = sim.sample(&sys.flow, p, t, end, None);
                        sim.segments.push(Segment { index, t0: t, t1: t + end, mode: Mode::Flow, path });
                        t += end;
                        if e.blow_up.is_some_and(|b| b < remaining) {
                            break Termination::LeftDomain;
                        }
                        break Termination::Horizon;
                    }
                    MapValue::Unresolved { reason } => {
                        return Err(HybridError::Unresolved { point: p, time: t, reason })
                    }
                }
            }
        }
    };
    let zeno = detect_zeno(&sim.jumps, horizon, cfg);
    let zeno_terminal = (termination == Termination::ZenoDetected).then_some(zeno.accumulation).flatten();
    Ok(HybridTrajectory {
        start: x0,
        policy: settings.policy,
        segments: sim.segments,
        jumps: sim.jumps,
        domain: HybridTimeDomain { event_times: sim.event_times, zeno_terminal },
        termination,
        end_time: t,
        zeno,
    })
}
