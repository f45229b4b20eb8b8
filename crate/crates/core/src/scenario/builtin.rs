//! Registry of ready-made scenarios: the worked examples and a few
//! synthetic negative controls for the property checks.

use std::f64::consts::PI;

use serde_json::Map;

use super::{
    AnalysisDecl, CoolingDecl, FlowDecl, HomeoDecl, HybridDecl, InduceDecl, OutputsDecl, RealizeDecl, RegionDecl,
    Scenario, ScenarioError, SyntheticDecl,
};
use crate::first_maps::BoundaryLabel;
use crate::geometry::{HalfPlane, ParamDomain};
use crate::hybrid::{CoolingParams, Policy, ResetDecl};
use crate::planar::SampleGrid;
use crate::realization::MapDecl;

const NAMES: &[&str] = &[
    "exmap",
    "exmap_shear",
    "affine(p)",
    "source",
    "sink",
    "rotation",
    "fold_junction",
    "bouncing_ball(r)",
    "impact_oscillator(mu)",
    "zeno_shear",
    "cooling(eps)",
    "realize_neg",
    "realize_square",
    "realize_disc(alpha)",
    "control_monotonicity",
    "control_two_to_one",
    "control_bc",
    "control_two_peak",
];

/// Registry names; a parenthesized argument is optional and has a default.
pub fn builtin_names() -> Vec<&'static str> {
    NAMES.to_vec()
}

/// Names whose scenarios carry a flow and a region.
pub fn planar_builtins() -> Vec<String> {
    [
        "exmap",
        "exmap_shear",
        "affine(1)",
        "affine(0)",
        "affine(-1)",
        "source",
        "sink",
        "rotation",
        "fold_junction",
        "realize_neg",
        "realize_square",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// `1/3`, `-0.5`, `2`.
fn number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

/// `name`, `name(v)` or `name(key=v)`.
fn parse(spec: &str) -> Result<(&str, Option<f64>), ScenarioError> {
    let spec = spec.trim();
    let Some((name, rest)) = spec.split_once('(') else { return Ok((spec, None)) };
    let arg =
        rest.strip_suffix(')').ok_or_else(|| ScenarioError::Schema(format!("unbalanced parenthesis in `{spec}`")))?;
    let value = arg.rsplit_once('=').map_or(arg, |(_, v)| v);
    let v = number(value).ok_or_else(|| ScenarioError::Schema(format!("bad argument `{arg}` in `{spec}`")))?;
    Ok((name.trim(), Some(v)))
}

fn unit_disc() -> RegionDecl {
    RegionDecl::Disc { center: [0.0, 0.0], radius: 1.0 }
}

fn lower() -> RegionDecl {
    RegionDecl::Halfplane { side: HalfPlane::Lower }
}

fn base(name: String, description: &str) -> Scenario {
    Scenario {
        name,
        description: Some(description.to_string()),
        flow: None,
        region: None,
        analysis: AnalysisDecl::default(),
        synthetic: None,
        hybrid: None,
        induce: None,
        realize: None,
        cooling: None,
        tolerances: Map::new(),
        outputs: OutputsDecl::default(),
    }
}

fn planar(
    name: String,
    description: &str,
    flow: FlowDecl,
    region: RegionDecl,
    grid: SampleGrid,
    horizon: f64,
) -> Scenario {
    Scenario {
        flow: Some(flow),
        region: Some(region),
        analysis: AnalysisDecl { grid: Some(grid), samples: None, horizon: Some(horizon) },
        ..base(name, description)
    }
}

fn circle_map(name: String, description: &str, n: usize, f: impl Fn(f64) -> Option<f64>) -> Scenario {
    let samples = (0..n).map(|i| i as f64 / n as f64).map(|s| (s, f(s))).collect();
    Scenario { synthetic: Some(SyntheticDecl::Map { domain: ParamDomain::Circle, samples }), ..base(name, description) }
}

pub fn builtin(spec: &str) -> Result<Scenario, ScenarioError> {
    let (name, arg) = parse(spec)?;
    let label = |v: f64| format!("{name}({v})");
    let s = match name {
        "exmap" => planar(
            name.into(),
            "v = (x, -y) on the unit disc",
            FlowDecl::Saddle,
            unit_disc(),
            SampleGrid::Circle { n: 64 },
            100.0,
        ),
        "exmap_shear" => {
            let by = HomeoDecl::HorizontalShear { k: 0.5 };
            planar(
                name.into(),
                "the exmap scenario conjugated by the shear (x, y) -> (x + y/2, y)",
                FlowDecl::Conjugated { flow: Box::new(FlowDecl::Saddle), by: by.clone() },
                RegionDecl::Image { region: Box::new(unit_disc()), by },
                SampleGrid::Circle { n: 64 },
                100.0,
            )
        }
        "affine" => {
            let p = arg.unwrap_or(1.0);
            planar(
                label(p),
                "affine focus with lambda = mu = 1 on the lower half-plane",
                FlowDecl::AffineFocus { lambda: 1.0, mu: 1.0, p },
                lower(),
                SampleGrid::Line { lo: -3.0, hi: 3.0, n: 33 },
                100.0,
            )
        }
        "source" => planar(
            name.into(),
            "(x e^t, y e^t) on the unit disc",
            FlowDecl::Source,
            unit_disc(),
            SampleGrid::Circle { n: 64 },
            50.0,
        ),
        "sink" => planar(
            name.into(),
            "(x e^-t, y e^-t) on the unit disc",
            FlowDecl::Sink,
            unit_disc(),
            SampleGrid::Circle { n: 64 },
            50.0,
        ),
        "rotation" => planar(
            name.into(),
            "rotation at angular speed pi on the unit disc",
            FlowDecl::Rotation,
            unit_disc(),
            SampleGrid::Circle { n: 64 },
            50.0,
        ),
        "fold_junction" => planar(
            name.into(),
            "x' = 1, y' = -x on the lower half-plane: an A-1 run meets a C run at x = 0",
            FlowDecl::Fold,
            lower(),
            SampleGrid::Line { lo: -2.0, hi: 2.0, n: 33 },
            20.0,
        ),
        "bouncing_ball" => {
            let r = arg.unwrap_or(0.5);
            Scenario {
                hybrid: Some(HybridDecl {
                    flow: FlowDecl::Gravity { g: 1.0 },
                    reset: ResetDecl::Restitution { r },
                    sliding: None,
                    x0: [1.0, 0.0],
                    horizon: Some(50.0),
                    max_events: Some(200),
                    policy: Policy::default(),
                    coordinates: Some(
                        "plane point (v, h): v is the velocity, h >= 0 the height; the floor h = 0 is the boundary line"
                            .into(),
                    ),
                    poincare: vec![-1.0, -0.5, 0.0],
                    normal_form: false,
                }),
                ..base(label(r), "bouncing ball with g = 1 launched upward at speed 1 from the floor")
            }
        }
        "impact_oscillator" => {
            let mu = arg.unwrap_or(1.0);
            Scenario {
                hybrid: Some(HybridDecl {
                    flow: FlowDecl::Rotation,
                    reset: ResetDecl::Oscillator { mu },
                    sliding: None,
                    x0: [-1.0, 0.0],
                    horizon: Some(20.0),
                    max_events: Some(64),
                    policy: Policy::default(),
                    coordinates: None,
                    poincare: vec![-1.0, 1.0],
                    normal_form: true,
                }),
                ..base(label(mu), "rotation flow with reset max(-mu x, x)")
            }
        }
        "zeno_shear" => Scenario {
            induce: Some(InduceDecl {
                phi1: FlowDecl::Conjugated { flow: Box::new(FlowDecl::Translation), by: HomeoDecl::OscillatingShear },
                phi2: FlowDecl::Gravity { g: 1.0 },
                grid: SampleGrid::Line { lo: -1.0, hi: 1.0, n: 41 },
                horizon: Some(10.0),
            }),
            ..base(
                name.into(),
                "translation conjugated by (x, y) -> (x, y + x sin(1/x)); does not induce an impacting system",
            )
        },
        "cooling" => {
            let epsilon = arg.unwrap_or(1.0);
            Scenario {
                cooling: Some(CoolingDecl { params: CoolingParams::default(), epsilon, horizon: Some(100.0) }),
                ..base(label(epsilon), "hot stone in water: time to leave and re-enter the band |T_w - T_r| <= eps")
            }
        }
        "realize_neg" | "realize_square" => {
            let map = if name == "realize_neg" { MapDecl::Neg } else { MapDecl::Square };
            Scenario {
                realize: Some(RealizeDecl::Halfplane { map: map.clone(), samples: 32, lo: -3.0 }),
                ..planar(
                    name.into(),
                    "flow whose first-out map of the lower half-plane is P",
                    FlowDecl::Realization { map },
                    lower(),
                    SampleGrid::Line { lo: -3.0, hi: 3.0, n: 33 },
                    20.0,
                )
            }
        }
        "realize_disc" => {
            let alpha = arg.unwrap_or(0.5);
            Scenario {
                realize: Some(RealizeDecl::Disc { alpha, samples: 64 }),
                ..base(label(alpha), "unimodal circle map realized as the first-out map of the unit disc")
            }
        }
        "control_monotonicity" => {
            circle_map(name.into(), "F(s) = s + 0.1 on (0, 0.5): increasing and not fixed", 64, |s| {
                (s > 0.0 && s < 0.5).then_some(s + 0.1)
            })
        }
        "control_two_to_one" => circle_map(name.into(), "a sawtooth hitting every value three times", 63, |s| {
            Some((3.0 * s).fract() * 0.3 + 0.6)
        }),
        "control_two_peak" => {
            circle_map(name.into(), "0.5 + 0.3 sin(4 pi s): two maxima", 64, |s| Some(0.5 + 0.3 * (4.0 * PI * s).sin()))
        }
        "control_bc" => {
            let params: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
            let labels = params.iter().map(|&s| if s < 0.5 { BoundaryLabel::B } else { BoundaryLabel::C }).collect();
            Scenario {
                synthetic: Some(SyntheticDecl::Sequence { domain: ParamDomain::Circle, params, labels }),
                ..base(name.into(), "B on [0, 1/2), C on [1/2, 1)")
            }
        }
        _ => return Err(ScenarioError::UnknownBuiltin(spec.to_string())),
    };
    if arg.is_some() && !NAMES.iter().any(|n| n.starts_with(&format!("{name}("))) {
        return Err(ScenarioError::Schema(format!("builtin `{name}` takes no argument")));
    }
    Ok(s)
}
