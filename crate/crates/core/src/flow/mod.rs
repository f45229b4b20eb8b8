//! Flows and local flows on the plane.
//!
//! A [`FlowModel`] is a cheap, clonable handle to anything implementing
//! [`Flow`]. Evaluation is pure, so handles can be shared across threads.

pub mod conjugate;
pub mod integrator;
pub mod linear;
pub mod moebius;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::Point;

pub use conjugate::{conjugate_flow, ConjugatedFlow, ConjugationError, Homeomorphism2D};
pub use integrator::{IntegratedFlow, IntegratorSettings};
pub use linear::{AffineFlow, Rotation};
pub use moebius::{moebius_conjugate, MoebiusFlow, MoebiusMap};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FlowError {
    /// `t` is outside the open time interval on which the orbit exists.
    #[error("t = {t} is outside the time domain of the orbit ({reason})")]
    OutOfDomain { t: f64, reason: &'static str },
    #[error("integrator step underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("integrator step budget exhausted at t = {t}")]
    StepBudget { t: f64 },
    #[error("evaluation reaches the pole of a Möbius map at t = {t}")]
    Pole { t: f64 },
    #[error("{0}")]
    Singular(String),
}

impl FlowError {
    pub fn is_out_of_domain(&self) -> bool {
        matches!(self, FlowError::OutOfDomain { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    ClosedForm,
    VectorField,
    Conjugated,
    Rotation,
    RealizationBuilt,
}

pub type FieldFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// An autonomous planar vector field.
#[derive(Clone)]
pub struct VectorField {
    label: String,
    f: FieldFn,
}

impl VectorField {
    pub fn new(label: impl Into<String>, f: impl Fn(Point) -> Point + Send + Sync + 'static) -> Self {
        VectorField { label: label.into(), f: Arc::new(f) }
    }

    pub fn at(&self, p: Point) -> Point {
        (self.f)(p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({})", self.label)
    }
}

/// A forward/backward orbit evaluated at arbitrary times.
///
/// Implementations may cache integration state, so repeated queries at
/// nearby times (marching, bisection) are cheap.
pub trait Orbit {
    fn at(&mut self, t: f64) -> Result<Point, FlowError>;
}

pub trait Flow: Send + Sync {
    fn kind(&self) -> FlowKind;

    fn label(&self) -> String;

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError>;

    /// A stateful orbit cursor, when the flow has a cheaper way to evaluate
    /// many times along one orbit than repeated [`Flow::evaluate`] calls.
    fn cursor(&self, _p: Point) -> Option<Box<dyn Orbit + '_>> {
        None
    }

    /// Generating vector field, when known.
    fn vector_field(&self) -> Option<&VectorField> {
        None
    }
}

#[derive(Clone)]
pub struct FlowModel(Arc<dyn Flow>);

impl FlowModel {
    pub fn new(flow: impl Flow + 'static) -> Self {
        FlowModel(Arc::new(flow))
    }

    pub fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        if t == 0.0 {
            return Ok(p);
        }
        self.0.evaluate(t, p)
    }

    pub fn orbit(&self, p: Point) -> Box<dyn Orbit + '_> {
        match self.0.cursor(p) {
            Some(c) => c,
            None => Box::new(PointwiseOrbit { flow: &*self.0, start: p }),
        }
    }

    pub fn kind(&self) -> FlowKind {
        self.0.kind()
    }

    pub fn label(&self) -> String {
        self.0.label()
    }

    pub fn vector_field(&self) -> Option<&VectorField> {
        self.0.vector_field()
    }

    /// The time-reversed flow `(t, x) ↦ Φ(-t, x)`.
    pub fn reversed(&self) -> FlowModel {
        FlowModel::new(Reversed(self.clone()))
    }
}

impl fmt::Debug for FlowModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlowModel({:?}: {})", self.kind(), self.label())
    }
}

struct PointwiseOrbit<'a> {
    flow: &'a dyn Flow,
    start: Point,
}

impl Orbit for PointwiseOrbit<'_> {
    fn at(&mut self, t: f64) -> Result<Point, FlowError> {
        if t == 0.0 {
            return Ok(self.start);
        }
        self.flow.evaluate(t, self.start)
    }
}

struct Reversed(FlowModel);

struct ReversedOrbit<'a>(Box<dyn Orbit + 'a>);

impl Orbit for ReversedOrbit<'_> {
    fn at(&mut self, t: f64) -> Result<Point, FlowError> {
        self.0.at(-t)
    }
}

impl Flow for Reversed {
    fn kind(&self) -> FlowKind {
        self.0.kind()
    }

    fn label(&self) -> String {
        format!("reversed({})", self.0.label())
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        self.0.evaluate(-t, p)
    }

    fn cursor(&self, p: Point) -> Option<Box<dyn Orbit + '_>> {
        Some(Box::new(ReversedOrbit(self.0.orbit(p))))
    }
}

pub type FormulaFn = Arc<dyn Fn(f64, Point) -> Point + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(Point) -> (f64, f64) + Send + Sync>;

/// A flow given by an explicit formula `Φ(t, x)`.
///
/// The generating field is carried along when known so that formula and
/// integrator can be cross-checked. A per-point domain `(α_x, β_x)` turns
/// the formula into a local flow.
#[derive(Clone)]
pub struct ClosedForm {
    label: String,
    formula: FormulaFn,
    field: Option<VectorField>,
    domain: Option<DomainFn>,
}

impl ClosedForm {
    pub fn new(label: impl Into<String>, formula: impl Fn(f64, Point) -> Point + Send + Sync + 'static) -> Self {
        ClosedForm { label: label.into(), formula: Arc::new(formula), field: None, domain: None }
    }

    pub fn with_field(mut self, field: VectorField) -> Self {
        self.field = Some(field);
        self
    }

    /// Declare a local flow whose orbit through `x` exists on `domain(x)`.
    pub fn with_domain(mut self, domain: impl Fn(Point) -> (f64, f64) + Send + Sync + 'static) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    /// The open time interval of the orbit through `p`.
    pub fn time_domain(&self, p: Point) -> (f64, f64) {
        self.domain.as_ref().map_or((f64::NEG_INFINITY, f64::INFINITY), |d| d(p))
    }
}

impl Flow for ClosedForm {
    fn kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        let (alpha, beta) = self.time_domain(p);
        if !(t > alpha && t < beta) {
            return Err(FlowError::OutOfDomain { t, reason: "outside (α_x, β_x)" });
        }
        let q = (self.formula)(t, p);
        if q.is_finite() {
            Ok(q)
        } else {
            Err(FlowError::OutOfDomain { t, reason: "orbit blew up" })
        }
    }

    fn vector_field(&self) -> Option<&VectorField> {
        self.field.as_ref()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GroupLawReport {
    pub max_residual: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Max over probes `(s, t, x)` of `|Φ(s+t, x) − Φ(s, Φ(t, x))|`.
///
/// Probes whose evaluations leave the time domain are skipped and counted.
pub fn group_law_residual(flow: &FlowModel, probes: &[(f64, f64, Point)]) -> GroupLawReport {
    let mut report = GroupLawReport::default();
    for &(s, t, x) in probes {
        let lhs = flow.evaluate(s + t, x);
        let rhs = flow.evaluate(t, x).and_then(|y| flow.evaluate(s, y));
        match (lhs, rhs) {
            (Ok(a), Ok(b)) => {
                report.evaluated += 1;
                report.max_residual = report.max_residual.max(a.dist(b));
            }
            _ => report.skipped += 1,
        }
    }
    report
}

/// Max of `|Φ(0, x) − x|` over the probes.
pub fn identity_residual(flow: &FlowModel, probes: &[Point]) -> f64 {
    probes.iter().filter_map(|&p| flow.evaluate(0.0, p).ok().map(|q| q.dist(p))).fold(0.0, f64::max)
}
