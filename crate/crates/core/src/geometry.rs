//! Regular open planar sets, their boundaries and boundary parametrizations.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{Homeomorphism2D, MoebiusMap};
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Inside,
    Outside,
    Boundary,
}

impl Location {
    pub fn flipped(self) -> Location {
        match self {
            Location::Inside => Location::Outside,
            Location::Outside => Location::Inside,
            Location::Boundary => Location::Boundary,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum HalfPlane {
    /// `{y < 0}`
    Lower,
    /// `{y > 0}`
    Upper,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GeometryError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("point {point} is {distance:e} away from the boundary curve")]
    FarFromCurve { point: Point, distance: f64 },
    #[error("Möbius image of the boundary passes through the pole")]
    UnboundedImage,
    #[error("region has no boundary parametrization")]
    NoBoundary,
}

/// Parameter domain of a boundary parametrization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum ParamDomain {
    /// `[0, 1)`, periodic.
    Circle,
    /// The whole real line.
    Line,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
    /// Line boundaries: parameter increases with `x`.
    Increasing,
}

type CurveFn = Arc<dyn Fn(f64) -> Point + Send + Sync>;
type MapFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

#[derive(Clone)]
enum Curve {
    Circle {
        center: Point,
        radius: f64,
    },
    XAxis,
    /// Image of another curve under a plane homeomorphism.
    Mapped {
        base: Box<JordanBoundary>,
        forward: MapFn,
        inverse: MapFn,
    },
    /// A closed curve given only by its parametrization.
    Closed(CurveFn),
}

/// A boundary parametrization `c`, either a Jordan curve on `[0, 1)` or a
/// line parametrized by arc length.
#[derive(Clone)]
pub struct JordanBoundary {
    curve: Curve,
    orientation: Orientation,
    resolution: usize,
}

const COARSE_SAMPLES: usize = 1024;
const GOLDEN_ITERS: usize = 200;

impl JordanBoundary {
    pub fn circle(center: Point, radius: f64) -> Self {
        JordanBoundary {
            curve: Curve::Circle { center, radius },
            orientation: Orientation::Counterclockwise,
            resolution: COARSE_SAMPLES,
        }
    }

    pub fn x_axis() -> Self {
        JordanBoundary { curve: Curve::XAxis, orientation: Orientation::Increasing, resolution: COARSE_SAMPLES }
    }

    /// A closed curve from its parametrization; `c(1)` must equal `c(0)`.
    pub fn closed(orientation: Orientation, c: impl Fn(f64) -> Point + Send + Sync + 'static) -> Self {
        JordanBoundary { curve: Curve::Closed(Arc::new(c)), orientation, resolution: COARSE_SAMPLES }
    }

    pub fn mapped(&self, h: &Homeomorphism2D) -> Self {
        let (f, g) = (h.clone(), h.clone());
        JordanBoundary {
            curve: Curve::Mapped {
                base: Box::new(self.clone()),
                forward: Arc::new(move |p| f.apply(p)),
                inverse: Arc::new(move |p| g.invert(p)),
            },
            orientation: self.orientation,
            resolution: self.resolution,
        }
    }

    pub fn domain(&self) -> ParamDomain {
        match &self.curve {
            Curve::XAxis => ParamDomain::Line,
            Curve::Mapped { base, .. } => base.domain(),
            _ => ParamDomain::Circle,
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `c(s)`; circle-type parameters are reduced mod 1.
    pub fn point(&self, s: f64) -> Point {
        match &self.curve {
            Curve::Circle { center, radius } => *center + unit_circle(s) * *radius,
            Curve::XAxis => Point::new(s, 0.0),
            Curve::Mapped { base, forward, .. } => forward(base.point(s)),
            Curve::Closed(c) => c(s.rem_euclid(1.0)),
        }
    }

    /// Parameter of the curve point nearest to `p`.
    ///
    /// Circles and lines are inverted analytically. Other closed curves use
    /// 1024 coarse samples followed by golden-section refinement of the
    /// distance. Fails when `p` is farther than `tol` from the curve.
    pub fn param(&self, p: Point, tol: f64) -> Result<f64, GeometryError> {
        let s = match &self.curve {
            Curve::Circle { center, .. } => ((p - *center).angle() / TAU).rem_euclid(1.0),
            Curve::XAxis => p.x,
            Curve::Mapped { base, inverse, .. } => {
                return base.param(inverse(p), f64::INFINITY).and_then(|s| self.checked(p, s, tol));
            }
            Curve::Closed(c) => nearest_param(|s| c(s), p),
        };
        // rem_euclid can round up to exactly 1.0
        let s = if self.domain() == ParamDomain::Circle && s >= 1.0 { 0.0 } else { s };
        self.checked(p, s, tol)
    }

    fn checked(&self, p: Point, s: f64, tol: f64) -> Result<f64, GeometryError> {
        let distance = self.point(s).dist(p);
        if distance <= tol {
            Ok(s)
        } else {
            Err(GeometryError::FarFromCurve { point: p, distance })
        }
    }

    /// Parameter distance, measured around the circle for circle-type domains.
    pub fn param_distance(&self, a: f64, b: f64) -> f64 {
        match self.domain() {
            ParamDomain::Line => (a - b).abs(),
            ParamDomain::Circle => {
                let d = (a - b).rem_euclid(1.0);
                d.min(1.0 - d)
            }
        }
    }
}

impl fmt::Debug for JordanBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.curve {
            Curve::Circle { center, radius } => format!("circle({center}, {radius})"),
            Curve::XAxis => "x-axis".into(),
            Curve::Mapped { base, .. } => format!("mapped({base:?})"),
            Curve::Closed(_) => "closed curve".into(),
        };
        write!(f, "JordanBoundary({kind}, {:?})", self.orientation)
    }
}

/// `(cos 2πs, sin 2πs)`, exact at multiples of a quarter turn.
fn unit_circle(s: f64) -> Point {
    let s = 4.0 * s.rem_euclid(1.0);
    let k = s.floor();
    let (sin, cos) = (TAU / 4.0 * (s - k)).sin_cos();
    match k as i64 {
        0 => Point::new(cos, sin),
        1 => Point::new(-sin, cos),
        2 => Point::new(-cos, -sin),
        _ => Point::new(sin, -cos),
    }
}

fn nearest_param(c: impl Fn(f64) -> Point, p: Point) -> f64 {
    let n = COARSE_SAMPLES;
    let best =
        (0..n).map(|i| i as f64 / n as f64).min_by(|&a, &b| c(a).dist(p).total_cmp(&c(b).dist(p))).unwrap_or(0.0);
    let h = 1.0 / n as f64;
    let (mut lo, mut hi) = (best - h, best + h);
    let f = |s: f64| c(s.rem_euclid(1.0)).dist(p);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    (0.5 * (lo + hi)).rem_euclid(1.0)
}

type MembershipFn = Arc<dyn Fn(Point) -> bool + Send + Sync>;
type IndicatorFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type ProjectFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// A regular open subset of the plane.
///
/// Membership comes from an oracle; a signed indicator `g` (negative inside,
/// zero on the boundary) is attached whenever one is known. Regularity is
/// asserted by the constructor and never checked.
#[derive(Clone)]
pub struct Region {
    label: String,
    membership: MembershipFn,
    indicator: Option<IndicatorFn>,
    projection: Option<ProjectFn>,
    boundary: Option<JordanBoundary>,
    regular: bool,
}

impl Region {
    /// Region `{g < 0}`.
    pub fn from_indicator(
        label: impl Into<String>,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
        regular: bool,
    ) -> Self {
        let g: IndicatorFn = Arc::new(g);
        let gm = g.clone();
        Region {
            label: label.into(),
            membership: Arc::new(move |p| gm(p) < 0.0),
            indicator: Some(g),
            projection: None,
            boundary: None,
            regular,
        }
    }

    pub fn from_membership(
        label: impl Into<String>,
        inside: impl Fn(Point) -> bool + Send + Sync + 'static,
        regular: bool,
    ) -> Self {
        Region {
            label: label.into(),
            membership: Arc::new(inside),
            indicator: None,
            projection: None,
            boundary: None,
            regular,
        }
    }

    pub fn with_boundary(mut self, boundary: JordanBoundary) -> Self {
        self.boundary = Some(boundary);
        self
    }

    pub fn with_projection(mut self, project: impl Fn(Point) -> Point + Send + Sync + 'static) -> Self {
        self.projection = Some(Arc::new(project));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.membership)(p)
    }

    pub fn indicator(&self, p: Point) -> Option<f64> {
        self.indicator.as_ref().map(|g| g(p))
    }

    pub fn has_indicator(&self) -> bool {
        self.indicator.is_some()
    }

    pub fn boundary(&self) -> Option<&JordanBoundary> {
        self.boundary.as_ref()
    }

    /// Tolerance-banded membership.
    ///
    /// With an indicator, boundary means `|g| ≤ tol`. Without one, boundary
    /// means membership changes somewhere in the ℓ∞ ball of radius `tol`.
    pub fn locate(&self, p: Point, tol: f64) -> Location {
        if let Some(g) = &self.indicator {
            let v = g(p);
            return if v.abs() <= tol {
                Location::Boundary
            } else if v < 0.0 {
                Location::Inside
            } else {
                Location::Outside
            };
        }
        let here = self.contains(p);
        let flips =
            [(-1.0, -1.0), (-1.0, 0.0), (-1.0, 1.0), (0.0, -1.0), (0.0, 1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0)]
                .iter()
                .any(|&(dx, dy)| self.contains(p + Point::new(dx * tol, dy * tol)) != here);
        match (flips, here) {
            (true, _) => Location::Boundary,
            (false, true) => Location::Inside,
            (false, false) => Location::Outside,
        }
    }

    /// The complement of the closure, `X ∖ Ā`, which is again regular open.
    pub fn complement(&self) -> Region {
        let label = format!("complement({})", self.label);
        let mut out = match &self.indicator {
            Some(g) => {
                let g = g.clone();
                Region::from_indicator(label, move |p| -g(p), self.regular)
            }
            None => {
                let m = self.membership.clone();
                Region::from_membership(label, move |p| !m(p), self.regular)
            }
        };
        out.projection = self.projection.clone();
        out.boundary = self.boundary.clone();
        out
    }

    /// A point of `∂A` near `p`.
    ///
    /// Uses the analytic projection when the constructor provides one, else a
    /// few Newton steps on the indicator; without either, `p` is returned.
    pub fn project_to_boundary(&self, p: Point) -> Point {
        if let Some(proj) = &self.projection {
            return proj(p);
        }
        let Some(g) = &self.indicator else { return p };
        let mut q = p;
        for _ in 0..8 {
            let v = g(q);
            if v == 0.0 {
                break;
            }
            let h = 1e-7 * (1.0 + q.norm());
            let grad = Point::new(
                (g(q + Point::new(h, 0.0)) - g(q - Point::new(h, 0.0))) / (2.0 * h),
                (g(q + Point::new(0.0, h)) - g(q - Point::new(0.0, h))) / (2.0 * h),
            );
            let n2 = grad.norm_sq();
            if !(n2 > 0.0) {
                break;
            }
            let next = q - grad * (v / n2);
            if !next.is_finite() || next.dist(q) > 1.0 {
                break;
            }
            q = next;
        }
        if g(q).abs() <= g(p).abs() {
            q
        } else {
            p
        }
    }

    /// `h(A)`, with indicator `g ∘ h⁻¹` and boundary `h ∘ c`.
    pub fn image(&self, h: &Homeomorphism2D) -> Region {
        let label = format!("{}({})", h.tag(), self.label);
        let inv = h.clone();
        let mut out = match &self.indicator {
            Some(g) => {
                let g = g.clone();
                Region::from_indicator(label, move |p| g(inv.invert(p)), self.regular)
            }
            None => {
                let m = self.membership.clone();
                Region::from_membership(label, move |p| m(inv.invert(p)), self.regular)
            }
        };
        let base = self.clone();
        let hh = h.clone();
        out.projection = Some(Arc::new(move |p| hh.apply(base.project_to_boundary(hh.invert(p)))));
        out.boundary = self.boundary.as_ref().map(|b| b.mapped(h));
        out
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("label", &self.label)
            .field("indicator", &self.indicator.is_some())
            .field("boundary", &self.boundary)
            .field("regular", &self.regular)
            .finish()
    }
}

/// Open disc with indicator `|p − center|² − r²` and boundary
/// `c(t) = center + r (cos 2πt, sin 2πt)`.
pub fn make_disc(center: Point, radius: f64) -> Result<Region, GeometryError> {
    if !(radius > 0.0) {
        return Err(GeometryError::NonPositiveRadius(radius));
    }
    Ok(Region::from_indicator(
        format!("disc({center}, {radius})"),
        move |p| (p - center).norm_sq() - radius * radius,
        true,
    )
    .with_projection(move |p| {
        let d = p - center;
        let n = d.norm();
        if n == 0.0 {
            center + Point::new(radius, 0.0)
        } else {
            center + d * (radius / n)
        }
    })
    .with_boundary(JordanBoundary::circle(center, radius)))
}

pub fn unit_disc() -> Region {
    make_disc(Point::ORIGIN, 1.0).expect("positive radius")
}

/// `{y < 0}` or `{y > 0}`, with the x-axis parametrized by `x`.
pub fn make_halfplane(side: HalfPlane) -> Region {
    let (label, sign) = match side {
        HalfPlane::Lower => ("H-", 1.0),
        HalfPlane::Upper => ("H+", -1.0),
    };
    Region::from_indicator(label, move |p| sign * p.y, true)
        .with_projection(|p| Point::new(p.x, 0.0))
        .with_boundary(JordanBoundary::x_axis())
}

/// `{|p.x − center| < half_width}`, an open vertical band.
pub fn make_band(center: f64, half_width: f64) -> Result<Region, GeometryError> {
    if !(half_width > 0.0) {
        return Err(GeometryError::NonPositiveRadius(half_width));
    }
    Ok(Region::from_indicator(format!("band({center}±{half_width})"), move |p| (p.x - center).abs() - half_width, true)
        .with_projection(move |p| {
            let side = if p.x >= center { 1.0 } else { -1.0 };
            Point::new(center + side * half_width, p.y)
        }))
}

/// `M(A)` for a Möbius map `M`.
///
/// The image of a bounded region's boundary must stay bounded, i.e. the pole
/// of `M` may not lie on `∂A`.
pub fn moebius_image(region: &Region, m: &MoebiusMap) -> Result<Region, GeometryError> {
    let (mf, mi) = (*m, m.inverse());
    if let (Some(b), Some(pole)) = (region.boundary(), m.pole()) {
        let pole = Point::from_complex(pole);
        if b.domain() == ParamDomain::Circle && b.param(pole, 1e-9).is_ok() {
            return Err(GeometryError::UnboundedImage);
        }
    }
    // M(∞) is the only point without a finite preimage; send it far outside.
    let far = Point::new(f64::INFINITY, f64::INFINITY);
    let h = Homeomorphism2D::new(
        "moebius",
        move |p| mf.apply_point(p).unwrap_or(far),
        move |p| mi.apply_point(p).unwrap_or(far),
    );
    Ok(region.image(&h))
}
