use serde::Serialize;

use super::{ordered_map, param_delta, MapSample, ParametricMapSample, Run, SampleGrid, TypeSequence};
use crate::config::Tolerances;
use crate::first_maps::{first_in, first_out, BoundaryLabel, MapValue};
use crate::flow::FlowModel;
use crate::geometry::{JordanBoundary, Location, ParamDomain, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    pub verdict: Verdict,
    /// Pass with nothing to check.
    pub vacuous: bool,
    /// Number of samples, pairs or junctions actually examined.
    pub eligible: usize,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &'static str) -> Self {
        CheckReport {
            check,
            verdict: Verdict::Pass,
            vacuous: false,
            eligible: 0,
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn not_applicable(check: &'static str, why: impl Into<String>) -> Self {
        let mut r = CheckReport::new(check);
        r.verdict = Verdict::NotApplicable;
        r.notes.push(why.into());
        r
    }

    fn finish(mut self) -> Self {
        if !self.violations.is_empty() {
            self.verdict = Verdict::Fail;
        } else if self.verdict == Verdict::Pass && self.eligible == 0 {
            self.vacuous = true;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// B and C runs may never be adjacent.
pub fn check_forbidden_bc(seq: &TypeSequence) -> CheckReport {
    use BoundaryLabel::{Unresolved, B, C};
    let mut r = CheckReport::new("forbidden-bc");
    let runs = &seq.runs;
    let n = runs.len();
    let mut pairs: Vec<(&Run, &Run)> = runs.windows(2).map(|w| (&w[0], &w[1])).collect();
    if seq.domain == ParamDomain::Circle && n > 1 {
        pairs.push((&runs[n - 1], &runs[0]));
    }
    r.eligible = pairs.len();
    for (a, b) in &pairs {
        if matches!((a.label, b.label), (B, C) | (C, B)) {
            r.violations
                .push(format!("{} run ending at {} abuts {} run starting at {}", a.label, a.end, b.label, b.start));
        }
    }
    // an unresolved run sandwiched between B and C hides the junction
    for i in 0..n {
        if runs[i].label != Unresolved {
            continue;
        }
        let prev = if i > 0 {
            Some(&runs[i - 1])
        } else if seq.domain == ParamDomain::Circle && n > 2 {
            runs.last()
        } else {
            None
        };
        let next = runs.get(i + 1).or(if seq.domain == ParamDomain::Circle && n > 2 { runs.first() } else { None });
        if let (Some(p), Some(q)) = (prev, next) {
            if matches!((p.label, q.label), (B, C) | (C, B)) {
                r.verdict = Verdict::Inconclusive;
                r.notes.push(format!(
                    "unresolved samples at [{}, {}] between {} and {}",
                    runs[i].start, runs[i].end, p.label, q.label
                ));
            }
        }
    }
    r.finish()
}

/// Local monotonicity at continuous non-fixed samples, and interval
/// trapping on every pair of defined samples.
///
/// At sample `s` with `ε = |F(s) − s|`, samples `t` in the same continuous
/// run with `|t − s| < ε` must satisfy `F(t) > F(s)` on the left and
/// `F(t) < F(s)` on the right. Trapping: if `F(s) = t ≠ s`, every defined
/// `s'` strictly between `s` and `t` has `F(s')` between `s` and `t`.
pub fn check_monotonicity(f: &ParametricMapSample, cfg: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new("monotonicity");
    let n = f.samples.len();
    let d = f.domain;
    let jump = |i: usize| f.jump_after.contains(&i);
    for i in 0..n {
        if !f.is_continuous_at(i, cfg.discontinuity_collar) {
            continue;
        }
        let (s, v) = (f.samples[i].s, f.samples[i].value.unwrap());
        let eps = param_delta(d, s, v).abs();
        if eps <= cfg.fixed_param {
            continue;
        }
        r.eligible += 1;
        let mut j = i;
        while j > 0 && !jump(j - 1) && (s - f.samples[j - 1].s) < eps {
            j -= 1;
            let Some(w) = f.samples[j].value else { break };
            if param_delta(d, v, w) <= 0.0 {
                r.violations.push(format!("F({}) = {} is not above F({}) = {}", f.samples[j].s, w, s, v));
            }
        }
        let mut j = i;
        while j + 1 < n && !jump(j) && (f.samples[j + 1].s - s) < eps {
            j += 1;
            let Some(w) = f.samples[j].value else { break };
            if param_delta(d, v, w) >= 0.0 {
                r.violations.push(format!("F({}) = {} is not below F({}) = {}", f.samples[j].s, w, s, v));
            }
        }
    }
    let tol = cfg.merge;
    let defined: Vec<&MapSample> = f.samples.iter().filter(|s| s.is_defined()).collect();
    let mut pairs = 0usize;
    for a in &defined {
        let t = a.value.unwrap();
        if (t - a.s).abs() <= cfg.fixed_param {
            continue;
        }
        let (lo, hi) = if a.s < t { (a.s, t) } else { (t, a.s) };
        for b in &defined {
            if b.s <= lo + tol || b.s >= hi - tol {
                continue;
            }
            pairs += 1;
            let w = b.value.unwrap();
            if w < lo - tol || w > hi + tol {
                r.violations
                    .push(format!("trapping: F({}) = {} leaves ({lo}, {hi}) spanned by F({}) = {t}", b.s, w, a.s));
            }
        }
    }
    r.eligible += pairs;
    if r.violations.len() > 20 {
        let extra = r.violations.len() - 20;
        r.violations.truncate(20);
        r.notes.push(format!("{extra} further violations omitted"));
    }
    r.finish()
}

/// Indices of plateau-merged strict local extrema: `(index, is_max)`.
fn local_extrema(values: &[f64], merge: f64) -> Vec<(usize, bool)> {
    // plateaus as (first, last) index ranges
    let mut plateaus: Vec<(usize, usize)> = Vec::new();
    for i in 0..values.len() {
        match plateaus.last_mut() {
            Some(p) if (values[i] - values[p.1]).abs() <= merge => p.1 = i,
            _ => plateaus.push((i, i)),
        }
    }
    let mut out = Vec::new();
    for k in 1..plateaus.len().saturating_sub(1) {
        let (prev, here, next) = (values[plateaus[k - 1].1], values[plateaus[k].0], values[plateaus[k + 1].0]);
        if here > prev && here > next {
            out.push((plateaus[k].0, true));
        } else if here < prev && here < next {
            out.push((plateaus[k].0, false));
        }
    }
    out
}

/// At most one strict local minimum and one maximum on a total, continuous
/// `F`; continuous interior extrema must be fixed.
///
/// Fixedness is judged at sample resolution: the extremal sample or one of
/// its neighbours must be fixed.
pub fn check_extremum_count(f: &ParametricMapSample, cfg: &Tolerances) -> CheckReport {
    if f.is_empty() || !f.all_defined() {
        return CheckReport::not_applicable("extremum-count", "F has undefined samples");
    }
    let mut r = CheckReport::new("extremum-count");
    let values: Vec<f64> = f.samples.iter().map(|s| s.value.unwrap()).collect();
    let extrema = local_extrema(&values, cfg.merge);
    r.eligible = values.len();
    let fixed = |i: usize| {
        let s = &f.samples[i];
        s.fixed || param_delta(f.domain, s.s, values[i]).abs() <= cfg.fixed_param
    };
    let (maxima, minima) = extrema.iter().fold((0, 0), |(a, b), &(_, m)| if m { (a + 1, b) } else { (a, b + 1) });
    if f.discontinuities.is_empty() {
        if maxima > 1 {
            r.violations.push(format!("{maxima} local maxima"));
        }
        if minima > 1 {
            r.violations.push(format!("{minima} local minima"));
        }
    } else {
        r.notes.push(format!("{} estimated discontinuities; count not constrained", f.discontinuities.len()));
    }
    for &(i, is_max) in &extrema {
        if !f.is_continuous_at(i, 1) {
            continue;
        }
        let near_fixed = fixed(i) || (i > 0 && fixed(i - 1)) || (i + 1 < values.len() && fixed(i + 1));
        if !near_fixed {
            let kind = if is_max { "maximum" } else { "minimum" };
            r.violations
                .push(format!("continuous local {kind} at s = {} with F(s) = {} ≠ s", f.samples[i].s, values[i]));
        }
    }
    r.notes.push(format!("{maxima} maxima, {minima} minima"));
    r.finish()
}

/// Output of [`unimodal_normalize`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Unimodal {
    pub map: ParametricMapSample,
    /// `sup{t | F(t) > t}`, 0 when the set is empty.
    pub alpha: f64,
    /// `inf{t | F(t) < t}`, 1 when the set is empty.
    pub beta: f64,
    /// Parameter (in the original coordinates) where `F̃` peaks.
    pub peak: f64,
    pub unimodal: bool,
}

/// Shift the circle parametrization by `α` so that `F̃(t) = F(t + α) − α` is unimodal.
pub fn unimodal_normalize(f: &ParametricMapSample, cfg: &Tolerances) -> Result<Unimodal, CheckReport> {
    const NAME: &str = "unimodal-normalize";
    if f.domain != ParamDomain::Circle {
        return Err(CheckReport::not_applicable(NAME, "needs a circle-type parameter domain"));
    }
    if f.is_empty() || !f.all_defined() {
        return Err(CheckReport::not_applicable(NAME, "F has undefined samples"));
    }
    if !f.discontinuities.is_empty() {
        return Err(CheckReport::not_applicable(NAME, "F has estimated discontinuities"));
    }
    let n = f.samples.len();
    let above = |s: &MapSample| s.value.unwrap() > s.s + cfg.fixed_param;
    let below = |s: &MapSample| s.value.unwrap() < s.s - cfg.fixed_param;
    let alpha = match f.samples.iter().rposition(above) {
        None => 0.0,
        Some(i) if i + 1 < n => f.samples[i + 1].s,
        Some(_) => 0.0,
    };
    let beta = f.samples.iter().find(|s| below(s)).map_or(1.0, |s| s.s);

    let mut shifted: Vec<MapSample> = f
        .samples
        .iter()
        .map(|s| {
            let mut t = s.clone();
            t.s = (s.s - alpha).rem_euclid(1.0);
            t.value = s.value.map(|v| (v - alpha).rem_euclid(1.0));
            t
        })
        .collect();
    shifted.sort_by(|a, b| a.s.total_cmp(&b.s));
    let map = ParametricMapSample::assemble(f.kind, f.domain, shifted, cfg);

    let values: Vec<f64> = map.samples.iter().map(|s| s.value.unwrap()).collect();
    let extrema = local_extrema(&values, cfg.merge);
    let unimodal = extrema.iter().all(|&(_, m)| m) && extrema.len() <= 1;
    let top = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i);
    let peak = (map.samples[top].s + alpha).rem_euclid(1.0);
    Ok(Unimodal { map, alpha, beta, peak, unimodal })
}

/// `E_A` is at most two-to-one: merged exit values have at most two
/// preimages, and when there are two, one of them is fixed.
pub fn check_two_to_one(f: &ParametricMapSample, cfg: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new("two-to-one");
    let mut defined: Vec<(f64, &MapSample)> = f.samples.iter().filter_map(|s| s.value.map(|v| (v, s))).collect();
    defined.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<Vec<&MapSample>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (v, s) in defined {
        if v - last <= cfg.merge {
            groups.last_mut().unwrap().push(s);
        } else {
            groups.push(vec![s]);
        }
        last = v;
    }
    if f.domain == ParamDomain::Circle && groups.len() > 1 {
        let first = groups[0][0].value.unwrap();
        let end = groups.last().unwrap().last().unwrap().value.unwrap();
        if param_delta(f.domain, end, first).abs() <= cfg.merge {
            let head = groups.remove(0);
            groups.last_mut().unwrap().extend(head);
        }
    }
    r.eligible = groups.len();
    for g in &groups {
        let value = g[0].value.unwrap();
        let fixed = g.iter().filter(|s| s.fixed || param_delta(f.domain, s.s, value).abs() <= cfg.fixed_param).count();
        if g.len() >= 3 {
            r.violations.push(format!("value {value} has {} preimages", g.len()));
        } else if g.len() == 2 && fixed == 0 {
            r.violations.push(format!("value {value} has two non-fixed preimages {} and {}", g[0].s, g[1].s));
        }
    }
    r.finish()
}

/// Point between two boundary samples where `Φ(h, c(s))` changes between
/// outside and inside `A`, found by bisection; `h` is a tiny probe time.
/// Falls back to the sample on the non-launching side without a sign change.
fn refine_junction(
    flow: &FlowModel,
    a: &Region,
    b: &JordanBoundary,
    lo: f64,
    hi: f64,
    h: f64,
    cfg: &Tolerances,
) -> f64 {
    let out = |s: f64| flow.evaluate(h, b.point(s)).ok().map(|p| a.locate(p, 0.0) == Location::Outside);
    let (Some(o_lo), Some(o_hi)) = (out(lo), out(hi)) else { return lo };
    if o_lo == o_hi {
        return if o_lo { hi } else { lo };
    }
    let (mut l, mut r) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (l + r);
        if m <= l || m >= r || r - l <= cfg.time {
            break;
        }
        match out(m) {
            Some(o) if o == o_lo => l = m,
            Some(_) => r = m,
            None => break,
        }
    }
    0.5 * (l + r)
}

/// The junction of an A-1 run with an A-2 or C run: both one-sided orbits
/// of the junction point enter `A`.
///
/// Junctions need runs of at least `cfg.junction_min_run` samples on both
/// sides, possibly separated by one odd sample. The junction point is
/// located between the samples by bisection on short-time exits, and probed
/// only at ladder times well above that localization error. Equilibria are
/// skipped.
pub fn check_junction_behavior(flow: &FlowModel, a: &Region, seq: &TypeSequence, cfg: &Tolerances) -> CheckReport {
    use BoundaryLabel::{A1, A2, C};
    const NAME: &str = "junction";
    let Some(b) = a.boundary() else {
        return CheckReport::not_applicable(NAME, "region has no boundary parametrization");
    };
    let runs = &seq.runs;
    let long = |r: &Run| r.len >= cfg.junction_min_run;
    // (last sample before the junction, first sample after it)
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for i in 0..runs.len() {
        for gap in 0..=1 {
            let Some(next) = runs.get(i + 1 + gap) else { continue };
            if gap == 1 && runs[i + 1].len > 1 {
                continue;
            }
            let (l, rr) = (&runs[i], next);
            if !long(l) || !long(rr) {
                continue;
            }
            let forward = l.label == A1 && matches!(rr.label, A2 | C);
            let mirrored = rr.label == A1 && matches!(l.label, A2 | C);
            if forward || mirrored {
                brackets.push((l.end, rr.start));
            }
        }
    }
    let ladder = cfg.ladder();
    let h = ladder.last().copied().unwrap_or(cfg.time);
    let junctions: Vec<f64> = brackets.iter().map(|&(lo, hi)| refine_junction(flow, a, b, lo, hi, h, cfg)).collect();
    if junctions.is_empty() {
        return CheckReport::not_applicable(NAME, "no A-1 run abuts an A-2 or C run");
    }
    let mut r = CheckReport::new(NAME);
    // probes far above the localization error of the junction
    let small: Vec<f64> = ladder.iter().copied().filter(|&t| t >= 64.0 * h).collect();
    let mut skipped = 0;
    let mut inconclusive = false;
    for q in junctions {
        let x = b.point(q);
        let moves = small.iter().any(|&t| flow.evaluate(t, x).is_ok_and(|p| p.dist(x) > 1e-3 * t));
        if !moves {
            skipped += 1;
            r.notes.push(format!("equilibrium junction at s = {q} skipped"));
            continue;
        }
        r.eligible += 1;
        let mut informative = [0usize; 2];
        for &t in &small {
            for (k, dir) in [1.0, -1.0].into_iter().enumerate() {
                match flow.evaluate(dir * t, x).map(|p| a.locate(p, cfg.boundary)) {
                    Ok(Location::Inside) => informative[k] += 1,
                    Ok(Location::Outside) => {
                        informative[k] += 1;
                        r.violations.push(format!("Φ({}, c({q})) lies outside A", dir * t));
                    }
                    Ok(Location::Boundary) => {}
                    Err(e) => {
                        inconclusive = true;
                        r.notes.push(format!("probe at t = {} failed: {e}", dir * t));
                    }
                }
            }
        }
        if informative.contains(&0) {
            inconclusive = true;
            r.notes.push(format!("junction at s = {q}: a one-sided orbit never leaves the boundary band"));
        }
    }
    if r.eligible == 0 && skipped > 0 {
        r.verdict = Verdict::NotApplicable;
    } else if inconclusive {
        r.verdict = Verdict::Inconclusive;
    }
    r.finish()
}

/// `E_A = R_{X∖A}`: first-out of `A` against first-in of the closed
/// complement, compared in status, time and point at every sample.
pub fn check_duality(flow: &FlowModel, a: &Region, grid: SampleGrid, horizon: f64, cfg: &Tolerances) -> CheckReport {
    const NAME: &str = "duality";
    let Some(b) = a.boundary() else {
        return CheckReport::not_applicable(NAME, "region has no boundary parametrization");
    };
    let closed_complement = a.complement();
    let params = grid.params();
    let pairs = ordered_map(&params, |&s| {
        let x = b.point(s);
        (s, first_out(flow, a, x, horizon, cfg), first_in(flow, &closed_complement, x, horizon, cfg))
    });
    let mut r = CheckReport::new(NAME);
    r.eligible = pairs.len();
    let close = |u: f64, v: f64| (u - v).abs() <= cfg.merge * (1.0 + u.abs());
    for (s, e, ret) in pairs {
        let same = match (&e.value, &ret.value) {
            (MapValue::Defined { time: t1, point: p1 }, MapValue::Defined { time: t2, point: p2 }) => {
                close(*t1, *t2) && p1.dist(*p2) <= cfg.merge * (1.0 + p1.norm())
            }
            (MapValue::Undefined { .. }, MapValue::Undefined { .. }) => true,
            (MapValue::Unresolved { .. }, MapValue::Unresolved { .. }) => true,
            _ => false,
        };
        if !same {
            r.violations.push(format!("s = {s}: E gives {}, R gives {}", e.value.status(), ret.value.status()));
        }
    }
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::linear::builtin;
    use crate::geometry::{make_halfplane, HalfPlane};
    use crate::planar::sweep_boundary;

    fn cfg() -> Tolerances {
        Tolerances::default()
    }

    fn circle(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / n as f64).collect()
    }

    fn seq(labels: &[BoundaryLabel]) -> TypeSequence {
        let p = circle(labels.len());
        TypeSequence::from_labels(ParamDomain::Circle, &p, labels)
    }

    #[test]
    fn duality_holds_for_exmap_and_sink() {
        let d = crate::geometry::unit_disc();
        for f in [builtin::saddle(), builtin::sink()] {
            let r = check_duality(&f, &d, SampleGrid::Circle { n: 32 }, 50.0, &cfg());
            assert!(r.passed() && r.eligible == 32, "{r:?}");
        }
    }

    #[test]
    fn bc_rule() {
        use BoundaryLabel::*;
        assert!(check_forbidden_bc(&seq(&[B, B, A2, C, A2, B])).passed());
        assert!(check_forbidden_bc(&seq(&[B, B, B])).passed());
        assert_eq!(check_forbidden_bc(&seq(&[B, B, C, C])).verdict, Verdict::Fail);
        assert_eq!(check_forbidden_bc(&seq(&[B, Unresolved, C, A2])).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn monotonicity_controls() {
        let p = circle(64);
        let id = ParametricMapSample::from_fn(ParamDomain::Circle, &p, Some, &cfg());
        let r = check_monotonicity(&id, &cfg());
        assert!(r.passed() && r.vacuous);
        let bad =
            ParametricMapSample::from_fn(ParamDomain::Circle, &p, |s| (s > 0.0 && s < 0.5).then_some(s + 0.1), &cfg());
        let r = check_monotonicity(&bad, &cfg());
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(!r.violations.is_empty());
        let dec =
            ParametricMapSample::from_fn(ParamDomain::Circle, &p, |s| Some(if s <= 0.5 { s } else { 1.0 - s }), &cfg());
        assert!(check_monotonicity(&dec, &cfg()).passed());
    }

    #[test]
    fn extremum_controls() {
        let p = circle(64);
        let id = ParametricMapSample::from_fn(ParamDomain::Circle, &p, Some, &cfg());
        assert!(check_extremum_count(&id, &cfg()).passed());
        let two_peak = ParametricMapSample::from_fn(
            ParamDomain::Circle,
            &p,
            |s| Some(0.5 + 0.3 * (4.0 * std::f64::consts::PI * s).sin()),
            &cfg(),
        );
        assert_eq!(check_extremum_count(&two_peak, &cfg()).verdict, Verdict::Fail);
        let partial = ParametricMapSample::from_fn(ParamDomain::Circle, &p, |s| (s < 0.5).then_some(s), &cfg());
        assert_eq!(check_extremum_count(&partial, &cfg()).verdict, Verdict::NotApplicable);
    }

    #[test]
    fn unimodal_shift() {
        let p = circle(64);
        let id = ParametricMapSample::from_fn(ParamDomain::Circle, &p, Some, &cfg());
        let u = unimodal_normalize(&id, &cfg()).unwrap();
        assert_eq!(u.alpha, 0.0);
        assert_eq!(u.map.samples, id.samples);
        // decreasing on [0, 0.25), identity on [0.25, 0.75], decreasing after
        let g = |s: f64| {
            if s < 0.25 {
                0.25 + 0.5 * (0.25 - s)
            } else if s <= 0.75 {
                s
            } else {
                0.75 - 0.5 * (s - 0.75) * 4.0 / 1.0 * 0.25
            }
        };
        let f = ParametricMapSample::from_fn(ParamDomain::Circle, &p, |s| Some(g(s)), &cfg());
        let u = unimodal_normalize(&f, &cfg()).unwrap();
        assert!((u.alpha - 0.25).abs() <= 1.0 / 64.0);
        assert!(u.unimodal);
    }

    #[test]
    fn two_to_one_controls() {
        let p = circle(63);
        let id = ParametricMapSample::from_fn(ParamDomain::Circle, &p, Some, &cfg());
        assert!(check_two_to_one(&id, &cfg()).passed());
        let folded =
            ParametricMapSample::from_fn(ParamDomain::Circle, &p, |s| Some(if s <= 0.5 { s } else { 1.0 - s }), &cfg());
        assert!(check_two_to_one(&folded, &cfg()).passed());
        let three =
            ParametricMapSample::from_fn(ParamDomain::Circle, &p, |s| Some((3.0 * s).fract() * 0.3 + 0.6), &cfg());
        assert_eq!(check_two_to_one(&three, &cfg()).verdict, Verdict::Fail);
    }

    #[test]
    fn fold_junction_passes() {
        let h = make_halfplane(HalfPlane::Lower);
        let grid = SampleGrid::Line { lo: -2.0, hi: 2.0, n: 17 };
        let sw = sweep_boundary(&builtin::fold(), &h, grid, 20.0, &cfg());
        let labels: Vec<_> = sw.sequence.runs.iter().map(|r| r.label).collect();
        assert_eq!(labels, [BoundaryLabel::A1, BoundaryLabel::C]);
        let r = check_junction_behavior(&builtin::fold(), &h, &sw.sequence, &cfg());
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.eligible, 1);
    }

    #[test]
    fn off_grid_junction_is_located() {
        let h = make_halfplane(HalfPlane::Lower);
        // no sample at x = 0
        let grid = SampleGrid::Line { lo: -2.0, hi: 2.0, n: 16 };
        let sw = sweep_boundary(&builtin::fold(), &h, grid, 20.0, &cfg());
        let r = check_junction_behavior(&builtin::fold(), &h, &sw.sequence, &cfg());
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }

    #[test]
    fn equilibrium_junction_is_skipped() {
        let h = make_halfplane(HalfPlane::Lower);
        let f = builtin::affine_focus(1.0, 1.0, 0.0);
        let grid = SampleGrid::Line { lo: -2.0, hi: 2.0, n: 17 };
        let sw = sweep_boundary(&f, &h, grid, 50.0, &cfg());
        let r = check_junction_behavior(&f, &h, &sw.sequence, &cfg());
        assert_eq!(r.verdict, Verdict::NotApplicable, "{r:?}");
        assert!(r.notes.iter().any(|n| n.contains("equilibrium")));
    }
}
