use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Flow, FlowError, FlowKind, FlowModel, Orbit};
use crate::point::Point;

/// `z ↦ (a z + b) / (c z + d)` with `ad − bc ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

/// Points this close to a pole (relative to the coefficient scale) count as the pole.
const POLE_EPS: f64 = 1e-14;

impl MoebiusMap {
    /// `None` when the determinant vanishes.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Option<Self> {
        let m = MoebiusMap { a, b, c, d };
        m.is_nondegenerate().then_some(m)
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        MoebiusMap { a: o, b: z, c: z, d: o }
    }

    /// `M(z) = i (z + 1) / (z − 1)`: sends −1 to 0, 1 to ∞ and the unit disc to the lower half-plane.
    pub fn disc_to_halfplane() -> Self {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        MoebiusMap { a: i, b: i, c: one, d: -one }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_nondegenerate(&self) -> bool {
        let scale = [self.a, self.b, self.c, self.d].iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.det().norm() > 1e-14 * scale * scale
    }

    /// The finite preimage of ∞, if any.
    pub fn pole(&self) -> Option<Complex64> {
        (self.c.norm() > 0.0).then(|| -self.d / self.c)
    }

    /// `M(∞)`, `None` when `M` fixes ∞.
    pub fn image_of_infinity(&self) -> Option<Complex64> {
        (self.c.norm() > 0.0).then(|| self.a / self.c)
    }

    /// `None` at the pole.
    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        let den = self.c * z + self.d;
        let scale = (self.c * z).norm() + self.d.norm();
        if den.norm() <= POLE_EPS * scale {
            return None;
        }
        let w = (self.a * z + self.b) / den;
        (w.re.is_finite() && w.im.is_finite()).then_some(w)
    }

    pub fn apply_point(&self, p: Point) -> Option<Point> {
        self.apply(p.to_complex()).map(Point::from_complex)
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ inner`, i.e. the matrix product `self · inner`.
    pub fn compose(&self, inner: &MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }
}

/// `Ψ(t, w) = M(Φ(t, M⁻¹(w)))`.
///
/// The point `M(∞)` is the image of the point at infinity, which must be an
/// equilibrium of the extended flow; it is kept fixed.
#[derive(Clone, Debug)]
pub struct MoebiusFlow {
    inner: FlowModel,
    m: MoebiusMap,
    m_inv: MoebiusMap,
}

impl MoebiusFlow {
    pub fn map(&self) -> &MoebiusMap {
        &self.m
    }

    fn pull(&self, p: Point) -> Option<Point> {
        self.m_inv.apply_point(p)
    }

    fn push(&self, t: f64, q: Point) -> Result<Point, FlowError> {
        self.m.apply_point(q).ok_or(FlowError::Pole { t })
    }
}

struct MoebiusOrbit<'a> {
    flow: &'a MoebiusFlow,
    inner: Option<Box<dyn Orbit + 'a>>,
    start: Point,
}

impl Orbit for MoebiusOrbit<'_> {
    fn at(&mut self, t: f64) -> Result<Point, FlowError> {
        match &mut self.inner {
            None => Ok(self.start),
            Some(o) => {
                let q = o.at(t)?;
                self.flow.push(t, q)
            }
        }
    }
}

impl Flow for MoebiusFlow {
    fn kind(&self) -> FlowKind {
        FlowKind::Conjugated
    }

    fn label(&self) -> String {
        format!("{} under Möbius map", self.inner.label())
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        match self.pull(p) {
            None => Ok(p),
            Some(z) => {
                let q = self.inner.evaluate(t, z)?;
                self.push(t, q)
            }
        }
    }

    fn cursor(&self, p: Point) -> Option<Box<dyn Orbit + '_>> {
        let inner = self.pull(p).map(|z| self.inner.orbit(z));
        Some(Box::new(MoebiusOrbit { flow: self, inner, start: p }))
    }
}

pub fn moebius_conjugate(flow: &FlowModel, m: &MoebiusMap) -> FlowModel {
    FlowModel::new(MoebiusFlow { inner: flow.clone(), m: *m, m_inv: m.inverse() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::linear::builtin;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cayley_type_map_sends_disc_to_lower_halfplane() {
        let m = MoebiusMap::disc_to_halfplane();
        assert!(m.apply(c(-1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(m.apply(c(1.0, 0.0)).is_none());
        assert!((m.apply(c(0.0, 0.0)).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        for k in 0..50 {
            let z = Complex64::from_polar(0.9 * (k as f64 / 50.0), 0.37 * k as f64);
            assert!(m.apply(z).unwrap().im < 0.0);
        }
        // unit circle minus {1} onto the real axis: M(e^{iφ}) = cot(φ/2)
        for phi in [0.3, 1.0, 2.5, 4.0, 6.0] {
            let w = m.apply(Complex64::from_polar(1.0, phi)).unwrap();
            assert!(w.im.abs() < 1e-12);
            assert!((w.re - 1.0 / (phi / 2.0).tan()).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_is_matrix_product() {
        let m1 = MoebiusMap::new(c(1.0, 2.0), c(0.5, 0.0), c(0.0, 1.0), c(3.0, -1.0)).unwrap();
        let m2 = MoebiusMap::disc_to_halfplane();
        let z = c(0.3, 0.4);
        let lhs = m1.compose(&m2).apply(z).unwrap();
        let rhs = m1.apply(m2.apply(z).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
        let back = m1.inverse().apply(m1.apply(z).unwrap()).unwrap();
        assert!((back - z).norm() < 1e-14);
    }

    #[test]
    fn degenerate_matrix_rejected() {
        assert!(MoebiusMap::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)).is_none());
    }

    #[test]
    fn identity_map_leaves_flow_unchanged() {
        let phi = builtin::saddle();
        let psi = moebius_conjugate(&phi, &MoebiusMap::identity());
        let p = Point::new(0.3, -0.2);
        assert!(psi.evaluate(0.8, p).unwrap().dist(phi.evaluate(0.8, p).unwrap()) < 1e-15);
    }

    #[test]
    fn rotation_under_cayley_map_satisfies_defining_identity() {
        let m = MoebiusMap::disc_to_halfplane();
        let psi = moebius_conjugate(&builtin::rotation(), &m);
        // M(0) = −i is the image of the equilibrium at the origin
        assert!(psi.evaluate(0.6, Point::new(0.0, -1.0)).unwrap().dist(Point::new(0.0, -1.0)) < 1e-14);
        let rot = builtin::rotation();
        for k in 0..20 {
            let z = Point::polar(0.1 + 0.04 * k as f64, 0.9 * k as f64);
            let lhs = psi.evaluate(0.3, m.apply_point(z).unwrap()).unwrap();
            let rhs = m.apply_point(rot.evaluate(0.3, z).unwrap()).unwrap();
            assert!(lhs.dist(rhs) < 1e-10 * (1.0 + rhs.norm()));
        }
        // image of ∞ stays put
        assert_eq!(psi.evaluate(0.5, Point::new(0.0, 1.0)).unwrap(), Point::new(0.0, 1.0));
    }

    #[test]
    fn conjugating_back_recovers_the_flow() {
        let m = MoebiusMap::disc_to_halfplane();
        let phi = builtin::sink();
        let back = moebius_conjugate(&moebius_conjugate(&phi, &m), &m.inverse());
        for k in 0..20 {
            let z = Point::polar(0.2 + 0.03 * k as f64, 0.7 * k as f64);
            let a = back.evaluate(0.4, z).unwrap();
            let b = phi.evaluate(0.4, z).unwrap();
            assert!(a.dist(b) < 1e-10);
        }
    }

    #[test]
    fn reaching_the_pole_is_reported() {
        let m = MoebiusMap::disc_to_halfplane();
        let psi = moebius_conjugate(&builtin::rotation(), &m);
        // M(−1) = 0; half a turn brings −1 to the pole at 1
        let err = psi.evaluate(1.0, Point::ORIGIN).unwrap_err();
        assert!(matches!(err, FlowError::Pole { .. }));
    }
}
