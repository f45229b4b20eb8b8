//! Parametric representations `F_E`, `F_R` and type sequences along a
//! boundary parametrization, plus checkers for the structural theorems.

mod checks;

pub use checks::{
    check_duality, check_extremum_count, check_forbidden_bc, check_junction_behavior, check_monotonicity,
    check_two_to_one, unimodal_normalize, CheckReport, Unimodal, Verdict,
};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::first_maps::{classify_boundary_point, exit_time, BoundaryLabel, BoundaryType, ExitOutcome, MapValue};
use crate::flow::FlowModel;
use crate::geometry::{JordanBoundary, ParamDomain, Region};

/// Parameters at which a boundary is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SampleGrid {
    /// `s = i / n`, `i = 0..n`.
    Circle { n: usize },
    /// `n` equally spaced parameters from `lo` to `hi` inclusive.
    Line { lo: f64, hi: f64, n: usize },
}

impl SampleGrid {
    pub fn params(&self) -> Vec<f64> {
        match *self {
            SampleGrid::Circle { n } => (0..n).map(|i| i as f64 / n as f64).collect(),
            SampleGrid::Line { lo, hi, n } => {
                if n < 2 {
                    return vec![lo; n];
                }
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            SampleGrid::Circle { n } | SampleGrid::Line { n, .. } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain(&self) -> ParamDomain {
        match self {
            SampleGrid::Circle { .. } => ParamDomain::Circle,
            SampleGrid::Line { .. } => ParamDomain::Line,
        }
    }

    pub fn spacing(&self) -> f64 {
        match *self {
            SampleGrid::Circle { n } => 1.0 / n.max(1) as f64,
            SampleGrid::Line { lo, hi, n } => (hi - lo) / (n.max(2) - 1) as f64,
        }
    }
}

/// Map `f` over `items` preserving order, in parallel when enabled.
pub(crate) fn ordered_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStatus {
    Defined,
    Undefined,
    Unresolved,
}

impl SampleStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleStatus::Defined => "defined",
            SampleStatus::Undefined => "undefined",
            SampleStatus::Unresolved => "unresolved",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapSample {
    pub s: f64,
    pub status: SampleStatus,
    /// `F(s)`, when defined.
    pub value: Option<f64>,
    pub time: Option<f64>,
    /// The map fixes `c(s)` (zero exit time).
    pub fixed: bool,
    pub grazes: usize,
    pub horizon: f64,
    pub label: Option<BoundaryLabel>,
    pub note: Option<String>,
}

impl MapSample {
    pub fn is_defined(&self) -> bool {
        self.status == SampleStatus::Defined
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    FirstOut,
    FirstIn,
    Synthetic,
}

/// Samples `(sᵢ, F(sᵢ))` of a parametric map, with estimated discontinuities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParametricMapSample {
    pub kind: MapKind,
    pub domain: ParamDomain,
    pub samples: Vec<MapSample>,
    pub resolution: f64,
    /// Parameters midway between adjacent defined samples with a value jump.
    pub discontinuities: Vec<f64>,
    /// Index `i` marks a jump between samples `i` and `i + 1`.
    #[serde(skip)]
    pub jump_after: Vec<usize>,
}

/// Signed difference `b − a` of two parameter values, wrapped into
/// `(−1/2, 1/2]` for circle-type domains.
pub fn param_delta(domain: ParamDomain, a: f64, b: f64) -> f64 {
    match domain {
        ParamDomain::Line => b - a,
        ParamDomain::Circle => {
            let d = (b - a).rem_euclid(1.0);
            if d > 0.5 {
                d - 1.0
            } else {
                d
            }
        }
    }
}

impl ParametricMapSample {
    fn assemble(kind: MapKind, domain: ParamDomain, samples: Vec<MapSample>, cfg: &Tolerances) -> Self {
        let resolution = samples.windows(2).map(|w| w[1].s - w[0].s).fold(f64::INFINITY, f64::min);
        let mut out = ParametricMapSample {
            kind,
            domain,
            samples,
            resolution: if resolution.is_finite() { resolution } else { 0.0 },
            discontinuities: Vec::new(),
            jump_after: Vec::new(),
        };
        out.mark_discontinuities(cfg);
        out
    }

    /// Synthetic samples from `f`, for tests and negative controls.
    pub fn from_fn(domain: ParamDomain, params: &[f64], f: impl Fn(f64) -> Option<f64>, cfg: &Tolerances) -> Self {
        let samples = params
            .iter()
            .map(|&s| {
                let value = f(s);
                MapSample {
                    s,
                    status: if value.is_some() { SampleStatus::Defined } else { SampleStatus::Undefined },
                    value,
                    time: None,
                    fixed: value.is_some_and(|v| param_delta(domain, s, v).abs() <= cfg.fixed_param),
                    grazes: 0,
                    horizon: f64::INFINITY,
                    label: None,
                    note: None,
                }
            })
            .collect();
        ParametricMapSample::assemble(MapKind::Synthetic, domain, samples, cfg)
    }

    fn mark_discontinuities(&mut self, cfg: &Tolerances) {
        self.discontinuities.clear();
        self.jump_after.clear();
        for (i, w) in self.samples.windows(2).enumerate() {
            if let (Some(a), Some(b)) = (w[0].value, w[1].value) {
                let spacing = w[1].s - w[0].s;
                if param_delta(self.domain, a, b).abs() > cfg.discontinuity_factor * spacing {
                    self.discontinuities.push(0.5 * (w[0].s + w[1].s));
                    self.jump_after.push(i);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn all_defined(&self) -> bool {
        self.samples.iter().all(MapSample::is_defined)
    }

    pub fn value_at(&self, i: usize) -> Option<f64> {
        self.samples.get(i).and_then(|s| s.value)
    }

    /// True when sample `i` is defined and no jump, undefined sample or
    /// domain edge lies within `collar` samples of it.
    pub fn is_continuous_at(&self, i: usize, collar: usize) -> bool {
        let n = self.samples.len();
        if !self.samples[i].is_defined() {
            return false;
        }
        let lo = i.saturating_sub(collar);
        let hi = (i + collar).min(n - 1);
        if self.samples[lo..=hi].iter().any(|s| !s.is_defined()) {
            return false;
        }
        !self.jump_after.iter().any(|&j| j + 1 >= lo && j < hi)
    }
}

fn map_sample(b: &JordanBoundary, s: f64, out: &ExitOutcome, horizon: f64, cfg: &Tolerances) -> MapSample {
    let mut sample = MapSample {
        s,
        status: SampleStatus::Undefined,
        value: None,
        time: out.time(),
        fixed: out.is_fixed(cfg),
        grazes: out.grazes,
        horizon,
        label: None,
        note: None,
    };
    match &out.value {
        MapValue::Defined { point, .. } => {
            if sample.fixed {
                sample.status = SampleStatus::Defined;
                sample.value = Some(s);
            } else {
                match b.param(*point, 1e-6) {
                    Ok(v) => {
                        sample.status = SampleStatus::Defined;
                        sample.value = Some(v);
                    }
                    Err(e) => {
                        sample.status = SampleStatus::Unresolved;
                        sample.note = Some(e.to_string());
                    }
                }
            }
        }
        MapValue::Undefined { .. } => {}
        MapValue::Unresolved { reason } => {
            sample.status = SampleStatus::Unresolved;
            sample.note = Some(reason.clone());
        }
    }
    sample
}

fn boundary_of(a: &Region) -> &JordanBoundary {
    a.boundary().expect("region needs a boundary parametrization for parametric sampling")
}

/// `F_E` on the sample grid: `c(F_E(s)) = E_A(c(s))`.
pub fn sample_f_e(
    flow: &FlowModel,
    a: &Region,
    grid: SampleGrid,
    horizon: f64,
    cfg: &Tolerances,
) -> ParametricMapSample {
    let b = boundary_of(a);
    let samples = ordered_map(&grid.params(), |&s| {
        let out = exit_time(flow, a, b.point(s), horizon, cfg);
        map_sample(b, s, &out, horizon, cfg)
    });
    ParametricMapSample::assemble(MapKind::FirstOut, grid.domain(), samples, cfg)
}

/// `F_R` on the sample grid: `c(F_R(s)) = R_Ā(c(s))`.
pub fn sample_f_r(
    flow: &FlowModel,
    a: &Region,
    grid: SampleGrid,
    horizon: f64,
    cfg: &Tolerances,
) -> ParametricMapSample {
    let b = boundary_of(a);
    let complement = a.complement();
    let samples = ordered_map(&grid.params(), |&s| {
        let out = exit_time(flow, &complement, b.point(s), horizon, cfg);
        map_sample(b, s, &out, horizon, cfg)
    });
    ParametricMapSample::assemble(MapKind::FirstIn, grid.domain(), samples, cfg)
}

/// Full boundary sweep: classification, `F_E` and `F_R` from one set of queries.
#[derive(Clone, Debug, Serialize)]
pub struct BoundarySweep {
    pub grid: SampleGrid,
    pub types: Vec<BoundaryType>,
    pub f_e: ParametricMapSample,
    pub f_r: ParametricMapSample,
    pub sequence: TypeSequence,
}

pub fn sweep_boundary(flow: &FlowModel, a: &Region, grid: SampleGrid, horizon: f64, cfg: &Tolerances) -> BoundarySweep {
    let b = boundary_of(a);
    let params = grid.params();
    let types = ordered_map(&params, |&s| classify_boundary_point(flow, a, b.point(s), horizon, cfg));
    let mut e = Vec::with_capacity(params.len());
    let mut r = Vec::with_capacity(params.len());
    for (&s, t) in params.iter().zip(&types) {
        let mut se = map_sample(b, s, &t.exit, horizon, cfg);
        let mut sr = map_sample(b, s, &t.ret, horizon, cfg);
        se.label = Some(t.label);
        sr.label = Some(t.label);
        e.push(se);
        r.push(sr);
    }
    let labels: Vec<_> = types.iter().map(|t| t.label).collect();
    BoundarySweep {
        grid,
        sequence: TypeSequence::from_labels(grid.domain(), &params, &labels),
        f_e: ParametricMapSample::assemble(MapKind::FirstOut, grid.domain(), e, cfg),
        f_r: ParametricMapSample::assemble(MapKind::FirstIn, grid.domain(), r, cfg),
        types,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Run {
    pub label: BoundaryLabel,
    /// Parameters of the first and last sample of the run.
    pub start: f64,
    pub end: f64,
    pub first: usize,
    pub len: usize,
}

/// Run-length encoded boundary types.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeSequence {
    pub domain: ParamDomain,
    pub params: Vec<f64>,
    pub labels: Vec<BoundaryLabel>,
    pub runs: Vec<Run>,
    pub resolution: f64,
}

impl TypeSequence {
    pub fn from_labels(domain: ParamDomain, params: &[f64], labels: &[BoundaryLabel]) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for (i, (&s, &l)) in params.iter().zip(labels).enumerate() {
            match runs.last_mut() {
                Some(r) if r.label == l => {
                    r.end = s;
                    r.len += 1;
                }
                _ => runs.push(Run { label: l, start: s, end: s, first: i, len: 1 }),
            }
        }
        let resolution = params.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        TypeSequence {
            domain,
            params: params.to_vec(),
            labels: labels.to_vec(),
            runs,
            resolution: if resolution.is_finite() { resolution } else { 0.0 },
        }
    }

    /// Estimated parameters where the label changes (midpoints between samples).
    pub fn run_boundaries(&self) -> Vec<f64> {
        self.runs.windows(2).map(|w| 0.5 * (w[0].end + w[1].start)).collect()
    }

    pub fn has_unresolved(&self) -> bool {
        self.labels.contains(&BoundaryLabel::Unresolved)
    }

    /// Compact textual form, e.g. `B[0, 0.125] A-2[0.129, 0.246] ...`.
    pub fn describe(&self) -> String {
        self.runs.iter().map(|r| format!("{}[{}, {}]", r.label, r.start, r.end)).collect::<Vec<_>>().join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::linear::builtin;
    use crate::geometry::unit_disc;

    #[test]
    fn exmap_f_e_spot_values() {
        let cfg = Tolerances::default();
        let f = sample_f_e(&builtin::saddle(), &unit_disc(), SampleGrid::Circle { n: 12 }, 100.0, &cfg);
        // s = 1/6 (θ = π/3) exits at θ = π/6
        assert!((f.samples[2].value.unwrap() - 1.0 / 12.0).abs() < 1e-9);
        assert_eq!(f.samples[0].value, Some(0.0));
        assert_eq!(f.samples[6].value, Some(0.5));
        assert_eq!(f.samples[3].status, SampleStatus::Undefined);
    }

    #[test]
    fn source_sequence_is_single_b_run() {
        let cfg = Tolerances::default();
        let sw = sweep_boundary(&builtin::source(), &unit_disc(), SampleGrid::Circle { n: 16 }, 50.0, &cfg);
        assert_eq!(sw.sequence.runs.len(), 1);
        assert_eq!(sw.sequence.runs[0].label, BoundaryLabel::B);
    }

    #[test]
    fn rotation_sequence_is_single_a3_run() {
        let cfg = Tolerances::default();
        let sw = sweep_boundary(&builtin::rotation(), &unit_disc(), SampleGrid::Circle { n: 16 }, 50.0, &cfg);
        assert_eq!(sw.sequence.runs.len(), 1);
        assert_eq!(sw.sequence.runs[0].label, BoundaryLabel::A3);
    }

    #[test]
    fn run_length_encoding() {
        use BoundaryLabel::*;
        let params: Vec<f64> = (0..6).map(|i| i as f64 / 6.0).collect();
        let seq = TypeSequence::from_labels(ParamDomain::Circle, &params, &[B, B, A2, C, A2, A2]);
        assert_eq!(seq.runs.iter().map(|r| (r.label, r.len)).collect::<Vec<_>>(), [(B, 2), (A2, 1), (C, 1), (A2, 2)]);
    }

    #[test]
    fn line_grid_is_inclusive() {
        let g = SampleGrid::Line { lo: -3.0, hi: 3.0, n: 33 };
        let p = g.params();
        assert_eq!(p.len(), 33);
        assert_eq!(p[0], -3.0);
        assert_eq!(p[32], 3.0);
        assert_eq!(p[16], 0.0);
    }
}
