use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{exit_time, first_in, ExitOutcome, ReturnOutcome};
use crate::config::Tolerances;
use crate::flow::FlowModel;
use crate::geometry::Region;
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub enum BoundaryLabel {
    #[serde(rename = "A-1")]
    A1,
    #[serde(rename = "A-2")]
    A2,
    #[serde(rename = "A-3")]
    A3,
    B,
    C,
    Unresolved,
}

impl BoundaryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryLabel::A1 => "A-1",
            BoundaryLabel::A2 => "A-2",
            BoundaryLabel::A3 => "A-3",
            BoundaryLabel::B => "B",
            BoundaryLabel::C => "C",
            BoundaryLabel::Unresolved => "Unresolved",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "A-1" => BoundaryLabel::A1,
            "A-2" => BoundaryLabel::A2,
            "A-3" => BoundaryLabel::A3,
            "B" => BoundaryLabel::B,
            "C" => BoundaryLabel::C,
            "Unresolved" => BoundaryLabel::Unresolved,
            _ => return None,
        })
    }

    pub fn is_type_a(self) -> bool {
        matches!(self, BoundaryLabel::A1 | BoundaryLabel::A2 | BoundaryLabel::A3)
    }
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Type of a boundary point with the first-out and first-in evidence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryType {
    pub label: BoundaryLabel,
    pub exit: ExitOutcome,
    pub ret: ReturnOutcome,
    /// Horizon behind any "undefined" evidence; B and C are horizon-relative.
    pub horizon: f64,
    pub note: Option<String>,
}

/// Label `x ∈ ∂A` by the five-type taxonomy.
///
/// A point must satisfy `E(x) = x` or `R(x) = x`; evidence contradicting
/// that is reported as `Unresolved` with a note.
pub fn classify_boundary_point(flow: &FlowModel, a: &Region, x: Point, horizon: f64, cfg: &Tolerances) -> BoundaryType {
    let exit = exit_time(flow, a, x, horizon, cfg);
    let ret = first_in(flow, a, x, horizon, cfg);
    let (label, note) = label_from(&exit, &ret, cfg);
    BoundaryType { label, exit, ret, horizon, note }
}

fn label_from(e: &ExitOutcome, r: &ReturnOutcome, cfg: &Tolerances) -> (BoundaryLabel, Option<String>) {
    use BoundaryLabel::*;
    if e.is_unresolved() || r.is_unresolved() {
        let which = if e.is_unresolved() { "first-out" } else { "first-in" };
        return (Unresolved, Some(format!("{which} query unresolved")));
    }
    let (ef, rf) = (e.is_fixed(cfg), r.is_fixed(cfg));
    match (e.is_defined(), r.is_defined()) {
        (false, false) => (Unresolved, Some("neither map defined within the horizon".into())),
        (true, false) if ef => (B, None),
        (false, true) if rf => (C, None),
        (true, true) => match (ef, rf) {
            (true, false) => (A1, None),
            (false, true) => (A2, None),
            (true, true) => (A3, None),
            (false, false) => (Unresolved, Some("neither E(x) = x nor R(x) = x".into())),
        },
        _ => (Unresolved, Some("defined map is not fixed while the other is undefined".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackwardVerdict {
    BackwardInvariant,
    NotBackwardInvariant,
    /// Backward orbits stay in `A` although the boundary is not all type B.
    /// Happens when boundary orbits stay on `∂A`, which makes them A-3.
    InvariantNotViaTypeB,
    /// All boundary samples are B but some backward orbit leaves `A`.
    Disagreement,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackwardInvariance {
    pub verdict: BackwardVerdict,
    pub all_type_b: bool,
    /// `Some(true)` when every sampled backward orbit stays in `A` up to the horizon.
    pub backward_orbits_stay: Option<bool>,
    pub labels: Vec<BoundaryLabel>,
    /// Interior samples whose backward orbit left `A`.
    pub escapes: Vec<Point>,
}

/// Compare "all boundary points are type B" with a direct sampled test of
/// backward invariance.
pub fn check_backward_invariance(
    flow: &FlowModel,
    a: &Region,
    boundary_samples: &[Point],
    interior_samples: &[Point],
    horizon: f64,
    cfg: &Tolerances,
) -> BackwardInvariance {
    let labels: Vec<_> =
        boundary_samples.iter().map(|&x| classify_boundary_point(flow, a, x, horizon, cfg).label).collect();
    let all_type_b = labels.iter().all(|&l| l == BoundaryLabel::B);

    let backward = flow.reversed();
    let mut escapes = Vec::new();
    let mut inconclusive = false;
    for &x in interior_samples {
        let out = exit_time(&backward, a, x, horizon, cfg);
        if out.is_unresolved() {
            inconclusive = true;
        } else if out.is_defined() {
            escapes.push(x);
        }
    }
    let backward_orbits_stay = (!inconclusive).then_some(escapes.is_empty());

    let verdict = if labels.contains(&BoundaryLabel::Unresolved) {
        BackwardVerdict::Inconclusive
    } else {
        match (all_type_b, backward_orbits_stay) {
            (_, None) => BackwardVerdict::Inconclusive,
            (true, Some(true)) => BackwardVerdict::BackwardInvariant,
            (false, Some(false)) => BackwardVerdict::NotBackwardInvariant,
            (false, Some(true)) => BackwardVerdict::InvariantNotViaTypeB,
            (true, Some(false)) => BackwardVerdict::Disagreement,
        }
    };
    BackwardInvariance { verdict, all_type_b, backward_orbits_stay, labels, escapes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::linear::builtin;
    use crate::geometry::{make_halfplane, unit_disc, HalfPlane};
    use std::f64::consts::PI;

    fn classify(flow: &FlowModel, a: &Region, x: Point) -> BoundaryLabel {
        classify_boundary_point(flow, a, x, 100.0, &Tolerances::default()).label
    }

    #[test]
    fn exmap_types() {
        let (f, d) = (builtin::saddle(), unit_disc());
        assert_eq!(classify(&f, &d, Point::new(1.0, 0.0)), BoundaryLabel::B);
        assert_eq!(classify(&f, &d, Point::new(0.0, 1.0)), BoundaryLabel::C);
        assert_eq!(classify(&f, &d, Point::polar(1.0, PI / 3.0)), BoundaryLabel::A2);
    }

    #[test]
    fn affine_focus_cases() {
        let h = make_halfplane(HalfPlane::Lower);
        let f0 = builtin::affine_focus(1.0, 1.0, 0.0);
        assert_eq!(classify(&f0, &h, Point::new(1.0, 0.0)), BoundaryLabel::A1);
        assert_eq!(classify(&f0, &h, Point::new(-1.0, 0.0)), BoundaryLabel::A2);
        assert_eq!(classify(&f0, &h, Point::ORIGIN), BoundaryLabel::A3);
        let f1 = builtin::affine_focus(1.0, 1.0, 1.0);
        assert_eq!(classify(&f1, &h, Point::new(0.5, 0.0)), BoundaryLabel::B);
        let fm = builtin::affine_focus(1.0, 1.0, -1.0);
        assert_eq!(classify(&fm, &h, Point::new(0.5, 0.0)), BoundaryLabel::C);
        assert_eq!(classify(&fm, &h, Point::new(2.0, 0.0)), BoundaryLabel::A1);
    }

    #[test]
    fn inconsistent_evidence_is_unresolved() {
        let e = ExitOutcome::new(super::super::MapValue::Defined { time: 1.0, point: Point::ORIGIN });
        let r = ExitOutcome::new(super::super::MapValue::Defined { time: 2.0, point: Point::ORIGIN });
        let (label, note) = label_from(&e, &r, &Tolerances::default());
        assert_eq!(label, BoundaryLabel::Unresolved);
        assert!(note.is_some());
    }

    fn circle(n: usize) -> Vec<Point> {
        (0..n).map(|k| Point::polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
    }

    fn interior() -> Vec<Point> {
        (0..8).map(|k| Point::polar(0.5, 0.8 * k as f64)).collect()
    }

    #[test]
    fn backward_invariance_verdicts() {
        let d = unit_disc();
        let cfg = Tolerances::default();
        let src = check_backward_invariance(&builtin::source(), &d, &circle(16), &interior(), 50.0, &cfg);
        assert_eq!(src.verdict, BackwardVerdict::BackwardInvariant);
        let sink = check_backward_invariance(&builtin::sink(), &d, &circle(16), &interior(), 50.0, &cfg);
        assert_eq!(sink.verdict, BackwardVerdict::NotBackwardInvariant);
        assert!(sink.labels.iter().all(|&l| l == BoundaryLabel::C));
        let rot = check_backward_invariance(&builtin::rotation(), &d, &circle(16), &interior(), 50.0, &cfg);
        assert_eq!(rot.verdict, BackwardVerdict::InvariantNotViaTypeB);
        assert!(rot.labels.iter().all(|&l| l == BoundaryLabel::A3));
    }
}
