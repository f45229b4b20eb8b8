//! Flows whose first-out map is a prescribed map.
//!
//! For `P: ℝ → ℝ` that is the identity on `[0, ∞)` and strictly decreasing
//! onto `[0, ∞)` on `(−∞, 0]`, the flow `Φ = H ∘ Ψ ∘ H⁻¹` has
//! `E_{H⁻}(x, 0) = (P(x), 0)`, where `Ψ` rotates at angular speed `π` and
//! `H` preserves polar angle while deforming radii. On the circle of radius
//! `r` the image radius at angle `θ` is `(1 − w) r + w P(−r)`, with the weight
//! `w = 1 − |θ|/π`: `r` on the negative axis, `P(−r)` on the positive one.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::first_maps::{first_out, MapValue};
use crate::flow::{
    conjugate_flow, moebius_conjugate, ConjugationError, Flow, FlowError, FlowKind, FlowModel, Homeomorphism2D,
    MoebiusMap,
};
use crate::geometry::{make_halfplane, unit_disc, HalfPlane};
use crate::point::Point;
use crate::roots::{solve_increasing, BracketError};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RealizationError {
    #[error("map violates the realization hypotheses: {}", .failures.join("; "))]
    Hypothesis { failures: Vec<String> },
    #[error("root bracket failed: {0}")]
    Bracket(#[from] BracketError),
    #[error(transparent)]
    Conjugation(#[from] ConjugationError),
    #[error("first-out map at x = {x} is {status}")]
    Exit { x: f64, status: &'static str },
}

/// Scenario-file declaration of a prescribed map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapDecl {
    Neg,
    Square,
    ScaledNeg {
        mu: f64,
    },
    /// Samples `(x, P(x))`, linear in between and extrapolated from the
    /// outermost segments; see [`RealizableMapSpec::tabulated`].
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

impl MapDecl {
    pub fn build(&self) -> RealizableMapSpec {
        match self {
            MapDecl::Neg => RealizableMapSpec::neg(),
            MapDecl::Square => RealizableMapSpec::square(),
            MapDecl::ScaledNeg { mu } => RealizableMapSpec::scaled_neg(*mu),
            MapDecl::Tabulated { points } => RealizableMapSpec::tabulated(points),
        }
    }
}

/// Probe results for the hypotheses on `P`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Validity {
    pub p_at_zero: f64,
    pub identity_residual: f64,
    pub decreasing: bool,
    /// Largest positive value whose negative-branch preimage was found.
    pub range_probe: f64,
    pub probes: usize,
    pub failures: Vec<String>,
}

impl Validity {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A map `P` on the line together with its negative branch inverse.
#[derive(Clone)]
pub struct RealizableMapSpec {
    label: String,
    p: RealFn,
    p_inv: Option<RealFn>,
}

impl fmt::Debug for RealizableMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealizableMapSpec({})", self.label)
    }
}

const POSITIVE_PROBES: [f64; 9] = [1e-3, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0];
const NEGATIVE_PROBES: usize = 64;

impl RealizableMapSpec {
    /// `P` given on the whole line; the inverse of the negative branch is found numerically.
    pub fn from_fn(label: impl Into<String>, p: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RealizableMapSpec { label: label.into(), p: Arc::new(p), p_inv: None }
    }

    /// `P(x) = branch(x)` for `x < 0` and `x` otherwise.
    pub fn from_branch(label: impl Into<String>, branch: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_fn(label, move |x| if x < 0.0 { branch(x) } else { x })
    }

    pub fn with_inverse(mut self, p_inv: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.p_inv = Some(Arc::new(p_inv));
        self
    }

    pub fn neg() -> Self {
        Self::from_branch("neg", |x| -x).with_inverse(|y| -y)
    }

    pub fn square() -> Self {
        Self::from_branch("square", |x| x * x).with_inverse(|y| -y.sqrt())
    }

    pub fn scaled_neg(mu: f64) -> Self {
        Self::from_branch(format!("scaled_neg({mu})"), move |x| -mu * x).with_inverse(move |y| -y / mu)
    }

    /// Linear interpolation through `(x, P(x))` samples, with `(0, 0)` added
    /// when no sample sits at 0. Without samples at `x > 0` the map is the
    /// identity there; with them, the table is used as given so that
    /// validation can reject it.
    pub fn tabulated(points: &[[f64; 2]]) -> Self {
        let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !pts.iter().any(|p| p.0 == 0.0) {
            let k = pts.partition_point(|p| p.0 < 0.0);
            pts.insert(k, (0.0, 0.0));
        }
        let label = format!("tabulated({} points)", pts.len());
        if pts.last().is_some_and(|p| p.0 > 0.0) {
            Self::from_fn(label, move |x| interpolate(&pts, x))
        } else {
            Self::from_branch(label, move |x| interpolate(&pts, x))
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.p)(x)
    }

    /// The `x ≤ 0` with `P(x) = y`, for `y ≥ 0`.
    pub fn negative_inverse(&self, y: f64, rtol: f64) -> Result<f64, BracketError> {
        if let Some(inv) = &self.p_inv {
            return Ok(inv(y));
        }
        if y <= 0.0 {
            return Ok(0.0);
        }
        solve_increasing(|r| (self.p)(-r), y, rtol).map(|r| -r)
    }

    /// Probe `P(0) = 0`, the identity on positive probes, strict decrease on
    /// a grid of `[−10, 0]`, and that the negative branch reaches every
    /// positive probe value.
    pub fn validate(&self, cfg: &Tolerances) -> Validity {
        let mut v = Validity { p_at_zero: self.eval(0.0), decreasing: true, ..Validity::default() };
        if v.p_at_zero.abs() > 1e-12 {
            v.failures.push(format!("P(0) = {} ≠ 0", v.p_at_zero));
        }
        for &x in &POSITIVE_PROBES {
            v.probes += 1;
            let px = self.eval(x);
            let res = (px - x).abs();
            v.identity_residual = v.identity_residual.max(res);
            if !(res <= 1e-9 * (1.0 + x)) {
                v.failures.push(format!("P({x}) = {px} ≠ {x}"));
            }
        }
        let xs: Vec<f64> = (0..=NEGATIVE_PROBES).map(|k| -10.0 * (1.0 - k as f64 / NEGATIVE_PROBES as f64)).collect();
        for w in xs.windows(2) {
            v.probes += 1;
            let (a, b) = (self.eval(w[0]), self.eval(w[1]));
            if !(a > b) {
                v.decreasing = false;
                v.failures.push(format!("P not strictly decreasing: P({}) = {a}, P({}) = {b}", w[0], w[1]));
                break;
            }
        }
        for &y in &POSITIVE_PROBES {
            v.probes += 1;
            match self.negative_inverse(y, cfg.root_rtol) {
                Ok(x) if x <= 0.0 && (self.eval(x) - y).abs() <= 1e-6 * (1.0 + y) => v.range_probe = y,
                Ok(x) => v
                    .failures
                    .push(format!("negative branch inverse of {y} gives x = {x} with P(x) = {}", self.eval(x))),
                Err(e) => v.failures.push(format!("P(−∞, 0] does not reach {y}: {e}")),
            }
        }
        v
    }
}

/// Piecewise-linear interpolation through sorted `(x, y)` pairs,
/// extrapolating the end segments.
fn interpolate(pts: &[(f64, f64)], x: f64) -> f64 {
    match pts.len() {
        0 => f64::NAN,
        1 => pts[0].1,
        n => {
            let k = pts.partition_point(|p| p.0 <= x).clamp(1, n - 1);
            let ((x0, y0), (x1, y1)) = (pts[k - 1], pts[k]);
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

/// Radial weight of `P(−r)` at polar angle `θ ∈ (−π, π]`.
fn weight(theta: f64) -> f64 {
    (1.0 - theta.abs() / PI).clamp(0.0, 1.0)
}

/// The flow `Φ = H ∘ Ψ ∘ H⁻¹` realizing a map on the lower half-plane.
#[derive(Clone, Debug)]
pub struct RealizedFlow {
    spec: RealizableMapSpec,
    validity: Validity,
    rtol: f64,
}

impl RealizedFlow {
    pub fn spec(&self) -> &RealizableMapSpec {
        &self.spec
    }

    pub fn validity(&self) -> &Validity {
        &self.validity
    }

    /// `γ_r(θ)`: the image radius of the circle of radius `r` at angle `θ`.
    pub fn gamma(&self, r: f64, theta: f64) -> f64 {
        let w = weight(theta);
        (1.0 - w) * r + w * self.spec.eval(-r)
    }

    /// Closed curve `H(circle of radius r)` at `n` angles.
    pub fn orbit_curve(&self, r: f64, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let theta = -PI + TAU * k as f64 / n as f64;
                Point::polar(self.gamma(r, theta), theta)
            })
            .collect()
    }

    pub fn h(&self, p: Point) -> Point {
        if p.norm() == 0.0 {
            return p;
        }
        let theta = p.angle();
        Point::polar(self.gamma(p.norm(), theta), theta)
    }

    pub fn h_inv(&self, q: Point) -> Result<Point, BracketError> {
        let rho = q.norm();
        if rho == 0.0 {
            return Ok(q);
        }
        let theta = q.angle();
        let r = self.radius_of(rho, theta)?;
        Ok(Point::polar(r, theta))
    }

    fn radius_of(&self, rho: f64, theta: f64) -> Result<f64, BracketError> {
        let w = weight(theta);
        if w == 0.0 {
            return Ok(rho);
        }
        if w == 1.0 {
            return self.spec.negative_inverse(rho, self.rtol).map(|x| -x);
        }
        solve_increasing(|r| self.gamma(r, theta), rho, self.rtol)
    }

    /// The rotation `Ψ(t, ·)` at angular speed `π`.
    pub fn psi(t: f64, p: Point) -> Point {
        let (s, c) = (PI * t).sin_cos();
        Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
    }

    pub fn homeomorphism(&self) -> Homeomorphism2D {
        let (f, g) = (self.clone(), self.clone());
        Homeomorphism2D::new(
            format!("H[{}]", self.spec.label),
            move |p| f.h(p),
            move |q| g.h_inv(q).unwrap_or(Point::new(f64::NAN, f64::NAN)),
        )
    }

    pub fn flow(&self) -> FlowModel {
        FlowModel::new(self.clone())
    }
}

impl Flow for RealizedFlow {
    fn kind(&self) -> FlowKind {
        FlowKind::RealizationBuilt
    }

    fn label(&self) -> String {
        format!("realization of {}", self.spec.label)
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        let rho = p.norm();
        if rho == 0.0 {
            return Ok(p);
        }
        let theta = p.angle();
        let r = self.radius_of(rho, theta).map_err(|e| FlowError::Singular(e.to_string()))?;
        // Ψ only advances the angle, so H ∘ Ψ ∘ H⁻¹ stays in polar form
        let phi = (theta + PI * t + PI).rem_euclid(TAU) - PI;
        Ok(Point::polar(self.gamma(r, phi), phi))
    }
}

/// Build `Φ = H ∘ Ψ ∘ H⁻¹` after probing the hypotheses on `spec`.
pub fn build_halfplane_realization(
    spec: RealizableMapSpec,
    cfg: &Tolerances,
) -> Result<RealizedFlow, RealizationError> {
    let validity = spec.validate(cfg);
    if !validity.ok() {
        return Err(RealizationError::Hypothesis { failures: validity.failures });
    }
    Ok(RealizedFlow { spec, validity, rtol: cfg.root_rtol })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrip {
    pub x: f64,
    pub expected: f64,
    pub exit: f64,
    pub time: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationReport {
    pub map: String,
    pub max_error: f64,
    /// Largest `|T − 1|` over samples `x < 0`.
    pub max_time_error: f64,
    pub samples: Vec<RoundTrip>,
}

/// Compare `E_{H⁻}(x, 0)` with `(P(x), 0)` at each sample `x ≤ 0`.
pub fn verify_realization(
    rf: &RealizedFlow,
    samples: &[f64],
    horizon: f64,
    cfg: &Tolerances,
) -> Result<RealizationReport, RealizationError> {
    let flow = rf.flow();
    let region = make_halfplane(HalfPlane::Lower);
    let mut report =
        RealizationReport { map: rf.spec.label.clone(), max_error: 0.0, max_time_error: 0.0, samples: Vec::new() };
    for &x in samples {
        let out = first_out(&flow, &region, Point::new(x, 0.0), horizon, cfg);
        let MapValue::Defined { time, point } = out.value else {
            return Err(RealizationError::Exit { x, status: out.value.status() });
        };
        let expected = rf.spec.eval(x);
        let error = (point.x - expected).abs().max(point.y.abs());
        if x < 0.0 {
            report.max_time_error = report.max_time_error.max((time - 1.0).abs());
        }
        report.max_error = report.max_error.max(error);
        report.samples.push(RoundTrip { x, expected, exit: point.x, time, error });
    }
    Ok(report)
}

/// A unimodal circle map: identity on `[0, α]`, strictly decreasing on
/// `(α, 1)` with `P(t) → 0` as `t → 1`.
#[derive(Clone)]
pub struct CircleMapSpec {
    label: String,
    alpha: f64,
    map: RealFn,
}

impl fmt::Debug for CircleMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CircleMapSpec({}, α = {})", self.label, self.alpha)
    }
}

/// How the hypotheses on a realizable circle map are read.
pub const CIRCLE_MAP_READING: &str = "P is the identity on [0, α] with its maximum P(α) = α, strictly decreasing \
on (α, 1) and tending to 0 at 1; the printed condition P(α) = 0 is read as this limit";

impl CircleMapSpec {
    pub fn new(label: impl Into<String>, alpha: f64, map: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CircleMapSpec { label: label.into(), alpha, map: Arc::new(map) }
    }

    /// Identity on `[0, α]`, then linear down to 0 at 1.
    pub fn tent(alpha: f64) -> Self {
        Self::new(
            format!("tent({alpha})"),
            alpha,
            move |t| if t <= alpha { t } else { alpha * (1.0 - t) / (1.0 - alpha) },
        )
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.map)(t.rem_euclid(1.0))
    }

    pub fn validate(&self) -> Vec<String> {
        let a = self.alpha;
        let mut failures = Vec::new();
        if !(a > 0.0 && a < 1.0) {
            failures.push(format!("α = {a} is not in (0, 1)"));
            return failures;
        }
        let n = 64;
        for k in 0..=n {
            let t = a * k as f64 / n as f64;
            let v = self.eval(t);
            if (v - t).abs() > 1e-9 {
                failures.push(format!("P({t}) = {v} is not the identity on [0, α]"));
                break;
            }
        }
        let ts: Vec<f64> = (0..=n).map(|k| a + (1.0 - a) * (k as f64 + 0.5) / (n as f64 + 1.0)).collect();
        let mut prev = a;
        for &t in &ts {
            let v = self.eval(t);
            if !(v < prev && (0.0..1.0).contains(&v)) {
                failures.push(format!("P({t}) = {v} breaks strict decrease below P(α) = {a}"));
                break;
            }
            prev = v;
        }
        let tail = self.eval(1.0 - 1e-9);
        if tail > 1e-6 {
            failures.push(format!("P(t) does not tend to 0 at 1: P(1 − 1e-9) = {tail}"));
        }
        failures
    }
}

/// Piecewise-linear `h` with `h(0) = 0`, `h(α) = 1/2`, `h(1) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleReparam {
    pub alpha: f64,
}

impl AngleReparam {
    pub fn apply(&self, u: f64) -> f64 {
        let a = self.alpha;
        if u <= a {
            0.5 * u / a
        } else {
            0.5 + 0.5 * (u - a) / (1.0 - a)
        }
    }

    pub fn invert(&self, v: f64) -> f64 {
        let a = self.alpha;
        if v <= 0.5 {
            2.0 * a * v
        } else {
            a + 2.0 * (1.0 - a) * (v - 0.5)
        }
    }

    /// `r e^{iθ} ↦ r e^{2πi h(θ/2π)}`, or its inverse.
    fn rotate(self, p: Point, inverse: bool) -> Point {
        let r = p.norm();
        if r == 0.0 {
            return p;
        }
        let u = (p.angle() / TAU).rem_euclid(1.0);
        let v = if inverse { self.invert(u) } else { self.apply(u) };
        Point::polar(r, TAU * v)
    }

    pub fn homeomorphism(self) -> Homeomorphism2D {
        Homeomorphism2D::new(
            format!("angle reparam α = {}", self.alpha),
            move |p| self.rotate(p, false),
            move |p| self.rotate(p, true),
        )
    }
}

#[derive(Clone, Debug)]
pub struct DiscRealization {
    /// Flow on the plane whose first-out map on the unit disc is the circle map.
    pub flow: FlowModel,
    pub halfplane: RealizedFlow,
    pub reparam: AngleReparam,
    pub interpretation: &'static str,
}

/// Realize a unimodal circle map as `F_E` of the unit disc.
///
/// The map is first moved to `α = 1/2` by `h`, transported to the line by
/// `M(z) = i (z + 1)/(z − 1)`, realized on the lower half-plane, and pulled
/// back by `M` and the angular reparametrization.
pub fn build_disc_realization(spec: &CircleMapSpec, cfg: &Tolerances) -> Result<DiscRealization, RealizationError> {
    let failures = spec.validate();
    if !failures.is_empty() {
        return Err(RealizationError::Hypothesis { failures });
    }
    let h = AngleReparam { alpha: spec.alpha };
    let m = MoebiusMap::disc_to_halfplane();
    let m_inv = m.inverse();
    let circle = spec.clone();
    let q = move |x: f64| {
        let z = m_inv.apply(Complex64::new(x, 0.0)).expect("real points avoid the pole of M⁻¹");
        let t = (z.arg() / TAU).rem_euclid(1.0);
        let tilde = h.apply(circle.eval(h.invert(t)));
        m.apply(Complex64::from_polar(1.0, TAU * tilde)).map_or(f64::INFINITY, |w| w.re)
    };
    let halfplane =
        build_halfplane_realization(RealizableMapSpec::from_branch(format!("M∘{}∘M⁻¹", spec.label), q), cfg)?;
    let tilde = moebius_conjugate(&halfplane.flow(), &m_inv);
    let flow = if (spec.alpha - 0.5).abs() < 1e-15 {
        tilde
    } else {
        let probes = crate::flow::conjugate::probe_grid(2.0, 12);
        conjugate_flow(&tilde, &h.homeomorphism().inverse_map(), &probes, cfg.homeomorphism)?
    };
    Ok(DiscRealization { flow, halfplane, reparam: h, interpretation: CIRCLE_MAP_READING })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscReport {
    pub max_error: f64,
    /// `(s, expected, realized)` per sample.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Parameter-space error of `F_E` against the circle map at `n` equally spaced parameters.
pub fn verify_disc_realization(
    dr: &DiscRealization,
    spec: &CircleMapSpec,
    n: usize,
    horizon: f64,
    cfg: &Tolerances,
) -> Result<DiscReport, RealizationError> {
    let disc = unit_disc();
    let boundary = disc.boundary().expect("unit disc has a boundary").clone();
    let mut report = DiscReport { max_error: 0.0, samples: Vec::with_capacity(n) };
    for k in 0..n {
        let s = k as f64 / n as f64;
        let out = first_out(&dr.flow, &disc, boundary.point(s), horizon, cfg);
        let MapValue::Defined { point, .. } = out.value else {
            return Err(RealizationError::Exit { x: s, status: out.value.status() });
        };
        let got = boundary.param(point, 1e-6).map_err(|_| RealizationError::Exit { x: s, status: "off the circle" })?;
        let expected = spec.eval(s);
        report.max_error = report.max_error.max(boundary.param_distance(got, expected));
        report.samples.push((s, expected, got));
    }
    Ok(report)
}
