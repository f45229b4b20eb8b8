//! Scenario files: JSON declarations of a flow, a region, the analyses to
//! run on them, and optional hybrid, realization and cooling sections.

mod builtin;
mod suite;

pub use builtin::{builtin, builtin_names, planar_builtins};
pub use suite::{run_property_suite, SuiteReport, CHECKS};

use num_complex::Complex64;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::config::Tolerances;
use crate::first_maps::BoundaryLabel;
use crate::flow::conjugate::probe_grid;
use crate::flow::linear::builtin as flows;
use crate::flow::{
    conjugate_flow, moebius_conjugate, AffineFlow, FlowModel, Homeomorphism2D, IntegratedFlow, IntegratorSettings,
    MoebiusMap, VectorField,
};
use crate::geometry::{make_band, make_disc, make_halfplane, moebius_image, HalfPlane, ParamDomain, Region};
use crate::hybrid::{stationary_flow, CoolingParams, ImpactingSystem, Policy, ResetDecl, SimulationSettings};
use crate::planar::{ParametricMapSample, SampleGrid, TypeSequence};
use crate::point::Point;
use crate::realization::{build_halfplane_realization, MapDecl};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Schema(String),
    #[error("unknown builtin scenario `{0}`; known: {known}", known = builtin_names().join(", "))]
    UnknownBuiltin(String),
    #[error("scenario `{scenario}` declares no {what}")]
    Missing { scenario: String, what: &'static str },
    #[error("cannot build {what}: {reason}")]
    Build { what: &'static str, reason: String },
}

impl ScenarioError {
    /// Schema problems are the user's input; everything else is a computation failure.
    pub fn is_schema(&self) -> bool {
        !matches!(self, ScenarioError::Build { .. })
    }

    fn build(what: &'static str, e: impl std::fmt::Display) -> Self {
        ScenarioError::Build { what, reason: e.to_string() }
    }
}

/// `[[a, b], [c, d]]` with complex entries written `[re, im]`.
pub type ComplexMatrix = [[[f64; 2]; 2]; 2];

fn moebius_from(m: &ComplexMatrix) -> Result<MoebiusMap, ScenarioError> {
    let c = |z: [f64; 2]| Complex64::new(z[0], z[1]);
    MoebiusMap::new(c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1]))
        .ok_or_else(|| ScenarioError::Schema("Möbius matrix is singular".into()))
}

/// Monomial `coef · x^i · y^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Monomial {
    pub coef: f64,
    #[serde(default)]
    pub i: u32,
    #[serde(default)]
    pub j: u32,
}

fn poly(terms: &[Monomial], p: Point) -> f64 {
    terms.iter().map(|m| m.coef * p.x.powi(m.i as i32) * p.y.powi(m.j as i32)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowDecl {
    /// `p' = M (p − center)`, in closed form or integrated.
    Linear {
        matrix: [[f64; 2]; 2],
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        integrated: bool,
    },
    /// `v = (x, −y)`.
    Saddle,
    Source,
    Sink,
    AffineFocus {
        lambda: f64,
        mu: f64,
        p: f64,
    },
    /// Rotation at angular speed `π`.
    Rotation,
    Translation,
    Gravity {
        g: f64,
    },
    Fold,
    Cooling {
        #[serde(default)]
        params: CoolingParams,
    },
    /// Integrated polynomial vector field.
    Polynomial {
        x: Vec<Monomial>,
        y: Vec<Monomial>,
    },
    Conjugated {
        flow: Box<FlowDecl>,
        by: HomeoDecl,
    },
    Moebius {
        flow: Box<FlowDecl>,
        matrix: ComplexMatrix,
    },
    /// The flow built from a prescribed map on the lower half-plane.
    Realization {
        map: MapDecl,
    },
}

impl FlowDecl {
    pub fn build(&self, cfg: &Tolerances) -> Result<FlowModel, ScenarioError> {
        Ok(match self {
            FlowDecl::Linear { matrix, center, integrated } => {
                let (m, c) = (*matrix, Point::from(*center));
                if *integrated {
                    let field = VectorField::new("linear", move |p| {
                        let d = p - c;
                        Point::new(m[0][0] * d.x + m[0][1] * d.y, m[1][0] * d.x + m[1][1] * d.y)
                    });
                    FlowModel::new(IntegratedFlow::new(field, IntegratorSettings::from(cfg)))
                } else {
                    FlowModel::new(AffineFlow::new("linear", m, c))
                }
            }
            FlowDecl::Saddle => flows::saddle(),
            FlowDecl::Source => flows::source(),
            FlowDecl::Sink => flows::sink(),
            FlowDecl::AffineFocus { lambda, mu, p } => flows::affine_focus(*lambda, *mu, *p),
            FlowDecl::Rotation => flows::rotation(),
            FlowDecl::Translation => flows::translation(),
            FlowDecl::Gravity { g } => flows::gravity(*g),
            FlowDecl::Fold => flows::fold(),
            FlowDecl::Cooling { params } => crate::hybrid::cooling_flow(params),
            FlowDecl::Polynomial { x, y } => {
                let (x, y) = (x.clone(), y.clone());
                let field = VectorField::new("polynomial", move |p| Point::new(poly(&x, p), poly(&y, p)));
                FlowModel::new(IntegratedFlow::new(field, IntegratorSettings::from(cfg)))
            }
            FlowDecl::Conjugated { flow, by } => {
                let inner = flow.build(cfg)?;
                conjugate_flow(&inner, &by.build(), &probe_grid(2.0, 10), cfg.homeomorphism)
                    .map_err(|e| ScenarioError::build("conjugated flow", e))?
            }
            FlowDecl::Moebius { flow, matrix } => moebius_conjugate(&flow.build(cfg)?, &moebius_from(matrix)?),
            FlowDecl::Realization { map } => build_halfplane_realization(map.build(), cfg)
                .map_err(|e| ScenarioError::build("realization flow", e))?
                .flow(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HomeoDecl {
    Identity,
    Scaling {
        k: f64,
    },
    /// `(x, y) ↦ (x + k y, y)`.
    HorizontalShear {
        k: f64,
    },
    /// `(x, y) ↦ (x, y + k x)`.
    VerticalShear {
        k: f64,
    },
    /// `(x, y) ↦ (x, y + x sin(1/x))`.
    OscillatingShear,
}

impl HomeoDecl {
    pub fn build(&self) -> Homeomorphism2D {
        match *self {
            HomeoDecl::Identity => Homeomorphism2D::identity(),
            HomeoDecl::Scaling { k } => Homeomorphism2D::scaling(k),
            HomeoDecl::HorizontalShear { k } => Homeomorphism2D::horizontal_shear(k),
            HomeoDecl::VerticalShear { k } => Homeomorphism2D::vertical_shear(format!("vshear({k})"), move |x| k * x),
            HomeoDecl::OscillatingShear => Homeomorphism2D::oscillating_shear(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionDecl {
    Disc {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Halfplane {
        side: HalfPlane,
    },
    /// `{|x − center| < half_width}`.
    Band {
        center: f64,
        half_width: f64,
    },
    Image {
        region: Box<RegionDecl>,
        by: HomeoDecl,
    },
    MoebiusImage {
        region: Box<RegionDecl>,
        matrix: ComplexMatrix,
    },
}

impl RegionDecl {
    pub fn build(&self) -> Result<Region, ScenarioError> {
        Ok(match self {
            RegionDecl::Disc { center, radius } => {
                make_disc(Point::from(*center), *radius).map_err(|e| ScenarioError::Schema(e.to_string()))?
            }
            RegionDecl::Halfplane { side } => make_halfplane(*side),
            RegionDecl::Band { center, half_width } => {
                make_band(*center, *half_width).map_err(|e| ScenarioError::Schema(e.to_string()))?
            }
            RegionDecl::Image { region, by } => region.build()?.image(&by.build()),
            RegionDecl::MoebiusImage { region, matrix } => moebius_image(&region.build()?, &moebius_from(matrix)?)
                .map_err(|e| ScenarioError::build("region", e))?,
        })
    }

    /// Sample grid used when the analysis section names none.
    pub fn default_grid(&self, n: usize) -> SampleGrid {
        match self {
            RegionDecl::Halfplane { .. } => SampleGrid::Line { lo: -3.0, hi: 3.0, n },
            RegionDecl::Image { region, .. } | RegionDecl::MoebiusImage { region, .. } => region.default_grid(n),
            _ => SampleGrid::Circle { n },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisDecl {
    pub grid: Option<SampleGrid>,
    /// Overrides the sample count of the grid.
    pub samples: Option<usize>,
    pub horizon: Option<f64>,
}

/// Hand-written samples used by the negative controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SyntheticDecl {
    /// `(s, F(s))` pairs; `null` marks an undefined sample.
    Map {
        domain: ParamDomain,
        samples: Vec<(f64, Option<f64>)>,
    },
    Sequence {
        domain: ParamDomain,
        params: Vec<f64>,
        labels: Vec<BoundaryLabel>,
    },
}

impl SyntheticDecl {
    pub fn map(&self, cfg: &Tolerances) -> Option<ParametricMapSample> {
        match self {
            SyntheticDecl::Map { domain, samples } => {
                let params: Vec<f64> = samples.iter().map(|s| s.0).collect();
                Some(ParametricMapSample::from_fn(
                    *domain,
                    &params,
                    |s| samples.iter().find(|p| p.0 == s).and_then(|p| p.1),
                    cfg,
                ))
            }
            SyntheticDecl::Sequence { .. } => None,
        }
    }

    pub fn sequence(&self) -> Option<TypeSequence> {
        match self {
            SyntheticDecl::Sequence { domain, params, labels } => {
                Some(TypeSequence::from_labels(*domain, params, labels))
            }
            SyntheticDecl::Map { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HybridDecl {
    pub flow: FlowDecl,
    pub reset: ResetDecl,
    /// Defaults to the stationary flow.
    #[serde(default)]
    pub sliding: Option<FlowDecl>,
    pub x0: [f64; 2],
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub max_events: Option<usize>,
    #[serde(default)]
    pub policy: Policy,
    /// How the physical state variables map onto the plane.
    #[serde(default)]
    pub coordinates: Option<String>,
    /// Boundary coordinates at which to evaluate `x ↦ E(P(x))`.
    #[serde(default)]
    pub poincare: Vec<f64>,
    /// Also compute the impact-oscillator normal form.
    #[serde(default)]
    pub normal_form: bool,
}

impl HybridDecl {
    pub fn system(&self, cfg: &Tolerances) -> Result<ImpactingSystem, ScenarioError> {
        let sliding = match &self.sliding {
            Some(f) => f.build(cfg)?,
            None => stationary_flow(),
        };
        let flow = self.flow.build(cfg)?;
        let label = format!("{} with reset {}", flow.label(), self.reset.build().label());
        Ok(ImpactingSystem::new(label, self.reset.build(), flow, sliding))
    }

    pub fn settings(&self) -> SimulationSettings {
        let d = SimulationSettings::default();
        SimulationSettings {
            horizon: self.horizon.unwrap_or(d.horizon),
            max_events: self.max_events.unwrap_or(d.max_events),
            policy: self.policy,
            path_samples: d.path_samples,
        }
    }
}

/// Two flows that may induce an impacting system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct InduceDecl {
    pub phi1: FlowDecl,
    pub phi2: FlowDecl,
    pub grid: SampleGrid,
    #[serde(default)]
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RealizeDecl {
    /// Realize `P` on the lower half-plane and check it at `samples`
    /// equally spaced points of `[lo, 0]`.
    Halfplane {
        map: MapDecl,
        #[serde(default = "default_realize_samples")]
        samples: usize,
        #[serde(default = "default_realize_lo")]
        lo: f64,
    },
    /// Realize the tent circle map with identity part `[0, α]` on the unit disc.
    Disc {
        alpha: f64,
        #[serde(default = "default_disc_samples")]
        samples: usize,
    },
}

fn default_realize_samples() -> usize {
    32
}
fn default_realize_lo() -> f64 {
    -3.0
}
fn default_disc_samples() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CoolingDecl {
    #[serde(default)]
    pub params: CoolingParams,
    pub epsilon: f64,
    #[serde(default)]
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsDecl {
    pub dir: Option<String>,
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionDecl>,
    #[serde(default)]
    pub analysis: AnalysisDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybrid: Option<HybridDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub induce: Option<InduceDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realize: Option<RealizeDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooling: Option<CoolingDecl>,
    /// Partial tolerance overrides.
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub tolerances: Map<String, Value>,
    #[serde(default)]
    pub outputs: OutputsDecl,
}

/// Built flow and region of a scenario.
#[derive(Clone, Debug)]
pub struct Planar {
    pub flow: FlowModel,
    pub region: Region,
    pub grid: SampleGrid,
    pub horizon: f64,
}

pub const DEFAULT_SAMPLES: usize = 64;

/// JSON Schema of the scenario file format.
pub fn scenario_schema() -> Value {
    serde_json::to_value(schemars::schema_for!(Scenario)).expect("schemas serialize")
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(ScenarioError::Schema("name must not be empty".into()));
        }
        if self.flow.is_some() != self.region.is_some() {
            let what = if self.flow.is_some() { "region" } else { "flow" };
            return Err(ScenarioError::Missing { scenario: self.name.clone(), what });
        }
        if let Some(n) = self.analysis.samples {
            if n < 8 {
                return Err(ScenarioError::Schema(format!("analysis.samples must be at least 8, got {n}")));
            }
        }
        if let Some(h) = self.analysis.horizon {
            if !(h > 0.0) {
                return Err(ScenarioError::Schema(format!("analysis.horizon must be positive, got {h}")));
            }
        }
        self.tolerances(&Map::new()).map(|_| ())
    }

    /// Defaults, then the scenario's overrides, then `extra` (a tolerance file).
    pub fn tolerances(&self, extra: &Map<String, Value>) -> Result<Tolerances, ScenarioError> {
        let mut merged = match serde_json::to_value(Tolerances::default()) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("tolerances serialize to an object"),
        };
        for (k, v) in self.tolerances.iter().chain(extra) {
            merged.insert(k.clone(), v.clone());
        }
        serde_json::from_value(Value::Object(merged)).map_err(|e| ScenarioError::Schema(format!("tolerances: {e}")))
    }

    pub fn has_planar(&self) -> bool {
        self.flow.is_some() && self.region.is_some()
    }

    /// Flow, region and grid, with `samples` and `horizon` overriding the
    /// analysis section when given.
    pub fn planar(
        &self,
        samples: Option<usize>,
        horizon: Option<f64>,
        cfg: &Tolerances,
    ) -> Result<Planar, ScenarioError> {
        let (Some(f), Some(r)) = (&self.flow, &self.region) else {
            let what = if self.flow.is_none() { "flow" } else { "region" };
            return Err(ScenarioError::Missing { scenario: self.name.clone(), what });
        };
        let n = samples.or(self.analysis.samples);
        let mut grid = self.analysis.grid.unwrap_or_else(|| r.default_grid(n.unwrap_or(DEFAULT_SAMPLES)));
        if let Some(n) = n {
            match &mut grid {
                SampleGrid::Circle { n: m } | SampleGrid::Line { n: m, .. } => *m = n,
            }
        }
        let region = r.build()?;
        if region.boundary().is_none() {
            return Err(ScenarioError::Schema(format!("region of `{}` has no boundary parametrization", self.name)));
        }
        Ok(Planar {
            flow: f.build(cfg)?,
            region,
            grid,
            horizon: horizon.or(self.analysis.horizon).unwrap_or(cfg.horizon),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_parses() {
        let s = Scenario::from_json(
            r#"{"name": "x", "flow": {"kind": "saddle"}, "region": {"kind": "disc", "radius": 1.0},
                "analysis": {"samples": 16}}"#,
        )
        .unwrap();
        let cfg = s.tolerances(&Map::new()).unwrap();
        let p = s.planar(None, None, &cfg).unwrap();
        assert_eq!(p.grid, SampleGrid::Circle { n: 16 });
        assert_eq!(p.horizon, 100.0);
    }

    #[test]
    fn missing_region_is_a_schema_error() {
        let e = Scenario::from_json(r#"{"name": "x", "flow": {"kind": "sink"}}"#).unwrap_err();
        assert!(matches!(e, ScenarioError::Missing { what: "region", .. }));
        assert!(e.is_schema());
    }

    #[test]
    fn unknown_fields_and_tolerances_are_rejected() {
        assert!(Scenario::from_json(r#"{"name": "x", "flw": {}}"#).is_err());
        let e = Scenario::from_json(r#"{"name": "x", "tolerances": {"horizn": 3}}"#).unwrap_err();
        assert!(e.to_string().contains("horizn"), "{e}");
    }

    #[test]
    fn tolerance_layers_apply_in_order() {
        let s = Scenario::from_json(r#"{"name": "x", "tolerances": {"horizon": 7, "merge": 1e-5}}"#).unwrap();
        let extra: Map<String, Value> = serde_json::from_str(r#"{"horizon": 9}"#).unwrap();
        let t = s.tolerances(&extra).unwrap();
        assert_eq!((t.horizon, t.merge), (9.0, 1e-5));
    }

    #[test]
    fn nested_declarations_round_trip() {
        let json = r#"{"name": "shear", "flow": {"kind": "conjugated", "flow": {"kind": "saddle"},
            "by": {"kind": "horizontal_shear", "k": 0.5}},
            "region": {"kind": "image", "region": {"kind": "disc", "radius": 1.0},
            "by": {"kind": "horizontal_shear", "k": 0.5}}}"#;
        let s = Scenario::from_json(json).unwrap();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        let cfg = Tolerances::default();
        let p = s.planar(Some(8), None, &cfg).unwrap();
        let q = p.region.boundary().unwrap().point(0.25);
        assert!(q.dist(Point::new(0.5, 1.0)) < 1e-12, "{q}");
    }

    #[test]
    fn schema_names_every_section() {
        let schema = scenario_schema();
        let props = schema["properties"].as_object().unwrap();
        for key in [
            "name",
            "flow",
            "region",
            "analysis",
            "synthetic",
            "hybrid",
            "induce",
            "realize",
            "cooling",
            "tolerances",
            "outputs",
        ] {
            assert!(props.contains_key(key), "{key}");
        }
        assert_eq!(schema["required"], serde_json::json!(["name"]));
    }

    #[test]
    fn integrated_polynomial_matches_closed_form() {
        let cfg = Tolerances::default();
        let f = FlowDecl::Polynomial {
            x: vec![Monomial { coef: 1.0, i: 1, j: 0 }],
            y: vec![Monomial { coef: -1.0, i: 0, j: 1 }],
        }
        .build(&cfg)
        .unwrap();
        let p = f.evaluate(2f64.ln(), Point::new(1.0, 1.0)).unwrap();
        assert!(p.dist(Point::new(2.0, 0.5)) < 1e-8, "{p}");
    }
}
