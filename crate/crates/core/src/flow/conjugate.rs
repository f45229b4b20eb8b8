use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{Flow, FlowError, FlowKind, FlowModel, Orbit};
use crate::point::Point;

pub type PlaneMap = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// A homeomorphism of the plane given by a forward map and its inverse.
#[derive(Clone)]
pub struct Homeomorphism2D {
    forward: PlaneMap,
    inverse: PlaneMap,
    tag: String,
}

impl Homeomorphism2D {
    pub fn new(
        tag: impl Into<String>,
        forward: impl Fn(Point) -> Point + Send + Sync + 'static,
        inverse: impl Fn(Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        Homeomorphism2D { forward: Arc::new(forward), inverse: Arc::new(inverse), tag: tag.into() }
    }

    pub fn identity() -> Self {
        Homeomorphism2D::new("identity", |p| p, |p| p)
    }

    pub fn scaling(k: f64) -> Self {
        Homeomorphism2D::new(format!("scale({k})"), move |p| p * k, move |p| p * (1.0 / k))
    }

    /// `(x, y) ↦ (x + k y, y)`.
    pub fn horizontal_shear(k: f64) -> Self {
        Homeomorphism2D::new(
            format!("hshear({k})"),
            move |p| Point::new(p.x + k * p.y, p.y),
            move |p| Point::new(p.x - k * p.y, p.y),
        )
    }

    /// `(x, y) ↦ (x, y + g(x))` for a continuous `g`.
    pub fn vertical_shear(tag: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let g = Arc::new(g);
        let gi = g.clone();
        Homeomorphism2D::new(tag, move |p| Point::new(p.x, p.y + g(p.x)), move |p| Point::new(p.x, p.y - gi(p.x)))
    }

    /// `H(x, y) = (x, y + x sin(1/x))`, with `H(0, y) = (0, y)`.
    pub fn oscillating_shear() -> Self {
        Homeomorphism2D::vertical_shear("x·sin(1/x) shear", |x| if x == 0.0 { 0.0 } else { x * (1.0 / x).sin() })
    }

    pub fn apply(&self, p: Point) -> Point {
        (self.forward)(p)
    }

    pub fn invert(&self, p: Point) -> Point {
        (self.inverse)(p)
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn inverse_map(&self) -> Homeomorphism2D {
        Homeomorphism2D {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            tag: format!("inverse({})", self.tag),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Homeomorphism2D) -> Homeomorphism2D {
        let (f1, f2) = (self.forward.clone(), inner.forward.clone());
        let (i1, i2) = (self.inverse.clone(), inner.inverse.clone());
        Homeomorphism2D {
            forward: Arc::new(move |p| f1(f2(p))),
            inverse: Arc::new(move |p| i2(i1(p))),
            tag: format!("{} ∘ {}", self.tag, inner.tag),
        }
    }

    /// Max of `|h(h⁻¹(p)) − p|` and `|h⁻¹(h(p)) − p|` over the probes.
    pub fn inverse_residual(&self, probes: &[Point]) -> f64 {
        probes
            .iter()
            .map(|&p| self.apply(self.invert(p)).dist(p).max(self.invert(self.apply(p)).dist(p)))
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Homeomorphism2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Homeomorphism2D({})", self.tag)
    }
}

/// Square probe grid `[-r, r]²` with `n × n` points.
pub fn probe_grid(r: f64, n: usize) -> Vec<Point> {
    let step = if n > 1 { 2.0 * r / (n - 1) as f64 } else { 0.0 };
    (0..n).flat_map(|i| (0..n).map(move |j| Point::new(-r + step * i as f64, -r + step * j as f64))).collect()
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConjugationError {
    #[error("homeomorphism '{tag}' fails inverse consistency: residual {residual:e} > {tolerance:e}")]
    InverseMismatch { tag: String, residual: f64, tolerance: f64 },
}

/// `Ψ(t, y) = h(Φ(t, h⁻¹(y)))`, the unique flow with `Ψ(t, h(x)) = h(Φ(t, x))`.
#[derive(Clone, Debug)]
pub struct ConjugatedFlow {
    inner: FlowModel,
    h: Homeomorphism2D,
}

impl ConjugatedFlow {
    pub fn inner(&self) -> &FlowModel {
        &self.inner
    }

    pub fn homeomorphism(&self) -> &Homeomorphism2D {
        &self.h
    }
}

struct ConjugatedOrbit<'a> {
    inner: Box<dyn Orbit + 'a>,
    h: &'a Homeomorphism2D,
}

impl Orbit for ConjugatedOrbit<'_> {
    fn at(&mut self, t: f64) -> Result<Point, FlowError> {
        self.inner.at(t).map(|q| self.h.apply(q))
    }
}

impl Flow for ConjugatedFlow {
    fn kind(&self) -> FlowKind {
        FlowKind::Conjugated
    }

    fn label(&self) -> String {
        format!("{} conjugated by {}", self.inner.label(), self.h.tag())
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        self.inner.evaluate(t, self.h.invert(p)).map(|q| self.h.apply(q))
    }

    fn cursor(&self, p: Point) -> Option<Box<dyn Orbit + '_>> {
        Some(Box::new(ConjugatedOrbit { inner: self.inner.orbit(self.h.invert(p)), h: &self.h }))
    }
}

/// Conjugate `flow` by `h` after checking `h ∘ h⁻¹ = id` on `probes`.
pub fn conjugate_flow(
    flow: &FlowModel,
    h: &Homeomorphism2D,
    probes: &[Point],
    tolerance: f64,
) -> Result<FlowModel, ConjugationError> {
    let residual = h.inverse_residual(probes);
    if !(residual <= tolerance) {
        return Err(ConjugationError::InverseMismatch { tag: h.tag().to_string(), residual, tolerance });
    }
    Ok(FlowModel::new(ConjugatedFlow { inner: flow.clone(), h: h.clone() }))
}
