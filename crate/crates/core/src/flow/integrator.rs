//! Dormand–Prince 5(4) integration with continuous (dense) output.
//!
//! Every accepted step keeps its interpolation coefficients, so an orbit
//! cursor can answer queries at arbitrary intermediate times without
//! re-integrating.

use serde::{Deserialize, Serialize};

use super::{Flow, FlowError, FlowKind, Orbit, VectorField};
use crate::config::Tolerances;
use crate::point::Point;

// The field is autonomous, so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const BLOWUP_NORM: f64 = 1e100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings::from(&Tolerances::default())
    }
}

impl From<&Tolerances> for IntegratorSettings {
    fn from(tol: &Tolerances) -> Self {
        IntegratorSettings {
            rtol: tol.integrator_rtol,
            atol: tol.integrator_atol,
            min_step: tol.integrator_min_step,
            max_step: f64::INFINITY,
            max_steps: tol.integrator_max_steps,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct DenseStep {
    t0: f64,
    h: f64,
    r: [Point; 5],
}

impl DenseStep {
    fn eval(&self, t: f64) -> Point {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = self.r;
        r1 + (r2 + (r3 + (r4 + r5 * s1) * s) * s1) * s
    }
}

/// One-directional integration state along a single orbit.
struct Stepper<'a> {
    field: &'a VectorField,
    settings: IntegratorSettings,
    dir: f64,
    y0: Point,
    t: f64,
    y: Point,
    k1: Point,
    h: f64,
    steps: Vec<DenseStep>,
    failure: Option<FlowError>,
}

impl<'a> Stepper<'a> {
    fn new(field: &'a VectorField, settings: IntegratorSettings, y0: Point, dir: f64) -> Self {
        let k1 = field.at(y0);
        let mut s = Stepper { field, settings, dir, y0, t: 0.0, y: y0, k1, h: 0.0, steps: Vec::new(), failure: None };
        s.h = s.initial_step();
        s
    }

    fn scale(&self, a: Point, b: Point) -> Point {
        let s = &self.settings;
        Point::new(s.atol + s.rtol * a.x.abs().max(b.x.abs()), s.atol + s.rtol * a.y.abs().max(b.y.abs()))
    }

    fn norm(v: Point, sc: Point) -> f64 {
        (((v.x / sc.x).powi(2) + (v.y / sc.y).powi(2)) / 2.0).sqrt()
    }

    fn initial_step(&self) -> f64 {
        let sc = self.scale(self.y, self.y);
        let d0 = Self::norm(self.y, sc);
        let d1 = Self::norm(self.k1, sc);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = self.y + self.k1 * (self.dir * h0);
        let f1 = self.field.at(y1);
        let d2 = Self::norm(f1 - self.k1, sc) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
        (100.0 * h0).min(h1).min(self.settings.max_step)
    }

    fn covered(&self) -> f64 {
        self.t
    }

    /// Integrate until the orbit reaches signed time `target`.
    fn advance_to(&mut self, target: f64) -> Result<(), FlowError> {
        if let Some(e) = &self.failure {
            return Err(e.clone());
        }
        while self.dir * (target - self.t) > 0.0 {
            if let Err(e) = self.step() {
                self.failure = Some(e.clone());
                return Err(e);
            }
        }
        Ok(())
    }

    fn step(&mut self) -> Result<(), FlowError> {
        let f = self.field;
        loop {
            if self.steps.len() >= self.settings.max_steps {
                return Err(FlowError::StepBudget { t: self.t });
            }
            let h = self.dir * self.h;
            if self.h < self.settings.min_step * self.t.abs().max(1.0) {
                return Err(if self.y.norm() > 1e6 * self.y0.norm().max(1.0) {
                    FlowError::OutOfDomain { t: self.t, reason: "orbit blew up" }
                } else {
                    FlowError::StepUnderflow { t: self.t }
                });
            }
            let y = self.y;
            let k1 = self.k1;
            let k2 = f.at(y + k1 * (h * A21));
            let k3 = f.at(y + (k1 * A31 + k2 * A32) * h);
            let k4 = f.at(y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
            let k5 = f.at(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
            let k6 = f.at(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
            let y1 = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
            let k7 = f.at(y1);
            let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
            let err = Self::norm(err_vec, self.scale(y, y1));

            if !y1.is_finite() || !err.is_finite() {
                if y.norm() > 1e6 * self.y0.norm().max(1.0) {
                    return Err(FlowError::OutOfDomain { t: self.t, reason: "orbit blew up" });
                }
                self.h *= 0.2;
                continue;
            }

            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                let r2 = y1 - y;
                let r3 = k1 * h - r2;
                let r4 = r2 - k7 * h - r3;
                let r5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h;
                self.steps.push(DenseStep { t0: self.t, h, r: [y, r2, r3, r4, r5] });
                self.t += h;
                self.y = y1;
                self.k1 = k7;
                self.h = (self.h * fac).min(self.settings.max_step);
                if y1.norm() > BLOWUP_NORM {
                    return Err(FlowError::OutOfDomain { t: self.t, reason: "orbit blew up" });
                }
                return Ok(());
            }
            self.h *= fac.min(1.0);
        }
    }

    fn interpolate(&self, t: f64) -> Point {
        if t == 0.0 || self.steps.is_empty() {
            return self.y0;
        }
        let dir = self.dir;
        let idx = self.steps.partition_point(|s| dir * s.t0 <= dir * t).saturating_sub(1);
        self.steps[idx].eval(t)
    }
}

/// Orbit cursor for an integrated flow; forward and backward histories are
/// kept separately.
pub struct IntegratedOrbit<'a> {
    forward: Stepper<'a>,
    backward: Option<Stepper<'a>>,
}

impl<'a> IntegratedOrbit<'a> {
    pub fn new(field: &'a VectorField, settings: IntegratorSettings, start: Point) -> Self {
        IntegratedOrbit { forward: Stepper::new(field, settings, start, 1.0), backward: None }
    }
}

impl Orbit for IntegratedOrbit<'_> {
    fn at(&mut self, t: f64) -> Result<Point, FlowError> {
        if t == 0.0 {
            return Ok(self.forward.y0);
        }
        let stepper = if t > 0.0 {
            &mut self.forward
        } else {
            let fwd = &self.forward;
            self.backward.get_or_insert_with(|| Stepper::new(fwd.field, fwd.settings, fwd.y0, -1.0))
        };
        if stepper.dir * (t - stepper.covered()) > 0.0 {
            stepper.advance_to(t)?;
        }
        Ok(stepper.interpolate(t))
    }
}

/// Flow of a vector field, evaluated by numerical integration.
///
/// Time domains of local flows are discovered lazily: evaluation reports
/// [`FlowError::OutOfDomain`] when the orbit blows up before reaching `t`.
#[derive(Clone, Debug)]
pub struct IntegratedFlow {
    field: VectorField,
    settings: IntegratorSettings,
}

impl IntegratedFlow {
    pub fn new(field: VectorField, settings: IntegratorSettings) -> Self {
        IntegratedFlow { field, settings }
    }

    pub fn settings(&self) -> IntegratorSettings {
        self.settings
    }
}

impl Flow for IntegratedFlow {
    fn kind(&self) -> FlowKind {
        FlowKind::VectorField
    }

    fn label(&self) -> String {
        format!("integrated({})", self.field.label())
    }

    fn evaluate(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        IntegratedOrbit::new(&self.field, self.settings, p).at(t)
    }

    fn cursor(&self, p: Point) -> Option<Box<dyn Orbit + '_>> {
        Some(Box::new(IntegratedOrbit::new(&self.field, self.settings, p)))
    }

    fn vector_field(&self) -> Option<&VectorField> {
        Some(&self.field)
    }
}
