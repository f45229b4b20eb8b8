//! Closed-form linear and affine flows, rotations, and the built-in flow
//! catalogue.

use std::f64::consts::PI;

use super::{ClosedForm, Flow, FlowError, FlowKind, FlowModel, VectorField};
use crate::point::Point;

pub type Matrix2 = [[f64; 2]; 2];

/// `exp(t M)` for a 2×2 matrix, via the Cayley–Hamilton closed form.
pub fn expm2(m: Matrix2, t: f64) -> Matrix2 {
    let s = 0.5 * (m[0][0] + m[1][1]);
    let b = [[m[0][0] - s, m[0][1]], [m[1][0], m[1][1] - s]];
    // B² = q I
    let q = b[0][0] * b[0][0] + b[0][1] * b[1][0];
    let qt2 = q * t * t;
    let (c, k) = if qt2.abs() < 1e-8 {
        // series for cosh(√q t) and sinh(√q t)/√q
        (1.0 + qt2 / 2.0 + qt2 * qt2 / 24.0, t * (1.0 + qt2 / 6.0 + qt2 * qt2 / 120.0))
    } else if q > 0.0 {
        // from the eigen-exponentials: cosh − sinh on the diagonal cancels for large |t|
        let w = q.sqrt();
        let (up, down) = (((s + w) * t).exp(), ((s - w) * t).exp());
        let k = 0.5 * (up - down) / w;
        let diag = |d: f64| 0.5 * ((1.0 + d / w) * up + (1.0 - d / w) * down);
        return [[diag(b[0][0]), k * b[0][1]], [k * b[1][0], diag(b[1][1])]];
    } else {
        let w = (-q).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    };
    let e = (s * t).exp();
    [[e * (c + k * b[0][0]), e * k * b[0][1]], [e * k * b[1][0], e * (c + k * b[1][1])]]
}

fn apply(m: Matrix2, p: Point) -> Point {
    Point::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
}

/// The flow of `x' = M (x − center)`.
#[derive(Clone, Debug)]
pub struct AffineFlow {
    label: String,
    matrix: Matrix2,
    center: Point,
    field: VectorField,
}

impl AffineFlow {
    pub fn new(label: impl Into<String>, matrix: Matrix2, center: Point) -> Self {
        let label = label.into();
        let field = VectorField::new(label.clone(), move |p| apply(matrix, p - center));
        AffineFlow { label, matrix, center, field }
    }

    pub fn matrix(&self) -> Matrix2 {
        self.matrix
    }

    pub fn center(&self) -> Point {
        self.center
    }
}

impl Flow for AffineFlow {
    fn kind(&self) -> FlowKind {
        FlowKind::ClosedForm
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        let q = self.center + apply(expm2(self.matrix, t), p - self.center);
        if q.is_finite() {
            Ok(q)
        } else {
            Err(FlowError::OutOfDomain { t, reason: "orbit blew up" })
        }
    }

    fn vector_field(&self) -> Option<&VectorField> {
        Some(&self.field)
    }
}

/// Rigid rotation about `center` with angular speed `omega` (counterclockwise).
#[derive(Clone, Debug)]
pub struct Rotation {
    omega: f64,
    center: Point,
    field: VectorField,
}

impl Rotation {
    pub fn new(omega: f64, center: Point) -> Self {
        let field = VectorField::new("rotation", move |p| {
            let d = p - center;
            Point::new(-omega * d.y, omega * d.x)
        });
        Rotation { omega, center, field }
    }

    /// `Ψ(t, x, y) = (cos(πt)x − sin(πt)y, sin(πt)x + cos(πt)y)`, period 2.
    pub fn half_turn_per_unit() -> Self {
        Rotation::new(PI, Point::ORIGIN)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega.abs()
    }
}

impl Flow for Rotation {
    fn kind(&self) -> FlowKind {
        FlowKind::Rotation
    }

    fn label(&self) -> String {
        format!("rotation(ω={})", self.omega)
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        let (s, c) = (self.omega * t).sin_cos();
        let d = p - self.center;
        Ok(self.center + Point::new(c * d.x - s * d.y, s * d.x + c * d.y))
    }

    fn vector_field(&self) -> Option<&VectorField> {
        Some(&self.field)
    }
}

/// Built-in flows used by the scenario registry and the tests.
pub mod builtin {
    use super::*;

    /// Flow of `v(x, y) = (x, −y)`: `Φ(t, x, y) = (x eᵗ, y e⁻ᵗ)`.
    pub fn saddle() -> FlowModel {
        FlowModel::new(AffineFlow::new("saddle", [[1.0, 0.0], [0.0, -1.0]], Point::ORIGIN))
    }

    /// `Φ(t, x, y) = (x eᵗ, y eᵗ)`.
    pub fn source() -> FlowModel {
        FlowModel::new(AffineFlow::new("source", [[1.0, 0.0], [0.0, 1.0]], Point::ORIGIN))
    }

    /// `Φ(t, x, y) = (x e⁻ᵗ, y e⁻ᵗ)`.
    pub fn sink() -> FlowModel {
        FlowModel::new(AffineFlow::new("sink", [[-1.0, 0.0], [0.0, -1.0]], Point::ORIGIN))
    }

    /// `(x, y)' = [[−λ, −μ], [μ, −λ]] (x, y − p)`.
    pub fn affine_focus(lambda: f64, mu: f64, p: f64) -> FlowModel {
        FlowModel::new(AffineFlow::new(
            format!("affine_focus(λ={lambda}, μ={mu}, p={p})"),
            [[-lambda, -mu], [mu, -lambda]],
            Point::new(0.0, p),
        ))
    }

    pub fn rotation() -> FlowModel {
        FlowModel::new(Rotation::half_turn_per_unit())
    }

    /// `Φ(t, x, y) = (x + t, y)`.
    pub fn translation() -> FlowModel {
        FlowModel::new(
            ClosedForm::new("translation", |t, p| Point::new(p.x + t, p.y))
                .with_field(VectorField::new("translation", |_| Point::new(1.0, 0.0))),
        )
    }

    /// Free flight under gravity in (velocity, height) coordinates:
    /// `v' = −g`, `h' = v`.
    pub fn gravity(g: f64) -> FlowModel {
        FlowModel::new(
            ClosedForm::new(format!("gravity(g={g})"), move |t, p| {
                Point::new(p.x - g * t, p.y + p.x * t - 0.5 * g * t * t)
            })
            .with_field(VectorField::new("gravity", move |p| Point::new(-g, p.x))),
        )
    }

    /// `x' = 1`, `y' = −x`: orbits are downward parabolas `y = c − x²/2`.
    pub fn fold() -> FlowModel {
        FlowModel::new(
            ClosedForm::new("fold", |t, p| Point::new(p.x + t, p.y - p.x * t - 0.5 * t * t))
                .with_field(VectorField::new("fold", |p| Point::new(1.0, -p.x))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Truncated Taylor series of exp(tM); independent of the closed form.
    fn expm_series(m: Matrix2, t: f64) -> Matrix2 {
        let mut sum = [[1.0, 0.0], [0.0, 1.0]];
        let mut term = sum;
        for k in 1..60 {
            let mut next = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (term[i][0] * m[0][j] + term[i][1] * m[1][j]) * t / k as f64;
                }
            }
            term = next;
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        sum
    }

    #[test]
    fn expm_matches_series_for_all_spectral_cases() {
        let cases: [Matrix2; 5] = [
            [[1.0, 0.0], [0.0, -1.0]],
            [[-1.0, -1.0], [1.0, -1.0]],
            [[0.0, 1.0], [0.0, 0.0]],
            [[-2.0, 1.0], [1.0, -1.0]],
            [[0.3, -2.0], [0.5, 0.1]],
        ];
        for m in cases {
            for t in [-1.3, -0.2, 0.0, 0.7, 1.9] {
                let a = expm2(m, t);
                let b = expm_series(m, t);
                for i in 0..2 {
                    for j in 0..2 {
                        assert_abs_diff_eq!(a[i][j], b[i][j], epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn saddle_at_ln2() {
        let p = builtin::saddle().evaluate(2f64.ln(), Point::new(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(p.x, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.y, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn contracting_direction_keeps_relative_accuracy() {
        for t in [20.0, 30.0, 37.0, 60.0] {
            let p = builtin::saddle().evaluate(t, Point::new(0.0, 1.0)).unwrap();
            assert_eq!(p.x, 0.0);
            assert!((p.y / (-t).exp() - 1.0).abs() < 1e-12, "t = {t}: {}", p.y);
            let q = builtin::saddle().evaluate(-t, Point::new(1.0, 0.0)).unwrap();
            assert!((q.x / (-t).exp() - 1.0).abs() < 1e-12, "t = -{t}: {}", q.x);
        }
    }

    #[test]
    fn rotation_half_turn() {
        let p = builtin::rotation().evaluate(1.0, Point::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.x, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_at_zero_for_every_builtin() {
        let x = Point::new(0.3, -0.7);
        for f in [
            builtin::saddle(),
            builtin::source(),
            builtin::sink(),
            builtin::affine_focus(1.0, 1.0, 1.0),
            builtin::rotation(),
            builtin::translation(),
            builtin::gravity(1.0),
            builtin::fold(),
        ] {
            assert_eq!(f.evaluate(0.0, x).unwrap(), x, "{}", f.label());
        }
    }

    #[test]
    fn fields_match_formula_derivatives() {
        let h = 1e-6;
        let x = Point::new(0.4, -0.3);
        for f in [builtin::affine_focus(1.0, 2.0, -0.5), builtin::gravity(9.8), builtin::fold()] {
            let v = f.vector_field().unwrap().at(x);
            let d = (f.evaluate(h, x).unwrap() - f.evaluate(-h, x).unwrap()) * (0.5 / h);
            assert!(v.dist(d) < 1e-7, "{}", f.label());
        }
    }
}
