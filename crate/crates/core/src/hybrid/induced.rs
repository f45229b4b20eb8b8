use serde::Serialize;
use thiserror::Error;

use super::{ImpactingSystem, ResetMap};
use crate::config::Tolerances;
use crate::first_maps::{exit_time, MapValue};
use crate::flow::{conjugate_flow, FlowModel, Homeomorphism2D};
use crate::geometry::{make_halfplane, HalfPlane};
use crate::point::Point;
use crate::roots::solve_increasing;

/// One sample of the first-out map of `Φ₁` on the lower half-plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResetSample {
    pub x: f64,
    pub status: &'static str,
    pub value: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct InducedSystem {
    pub system: ImpactingSystem,
    pub table: Vec<ResetSample>,
    /// Boundary samples in `R_s`.
    pub sliding_set: Vec<f64>,
}

/// Why a pair of flows does not induce an impacting system.
#[derive(Clone, Debug, PartialEq, Serialize, Error)]
#[error("does not induce an impacting system: {reason}")]
pub struct InduceFailure {
    pub reason: String,
    /// Samples of `E_{H⁻}` or `E_{H⁺}` that could not be resolved.
    pub unresolved: Vec<f64>,
    /// Samples whose `E_{H⁺}` image lies outside `dom P`.
    pub closure_violations: Vec<f64>,
}

/// Build `P` from the first-out map of `Φ₁` on `H⁻` sampled at `xs`, take
/// `Φ₂` as the flow and its restriction to `R_s` as the sliding flow, and
/// check `Im E_{H⁺} ⊂ dom P × {0}` on the same samples.
pub fn induced_system(
    phi1: &FlowModel,
    phi2: &FlowModel,
    xs: &[f64],
    horizon: f64,
    cfg: &Tolerances,
) -> Result<InducedSystem, InduceFailure> {
    let lower = make_halfplane(HalfPlane::Lower);
    let mut table = Vec::with_capacity(xs.len());
    let mut unresolved = Vec::new();
    for &x in xs {
        let e = exit_time(phi1, &lower, Point::new(x, 0.0), horizon, cfg);
        let value = e.point().map(|p| p.x);
        if e.is_unresolved() {
            unresolved.push(x);
        }
        table.push(ResetSample { x, status: e.value.status(), value });
    }
    if !unresolved.is_empty() {
        let near = unresolved.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        let reason = format!(
            "{} of {} first-out samples of Φ₁ are unresolved (switching not well-ordered), the closest at |x| = {near:.3e}",
            unresolved.len(),
            xs.len()
        );
        return Err(InduceFailure { reason, unresolved, closure_violations: Vec::new() });
    }
    if table.iter().all(|s| s.value.is_none()) {
        return Err(InduceFailure {
            reason: "no exits within horizon: P has empty domain".into(),
            unresolved,
            closure_violations: Vec::new(),
        });
    }
    let reset = ResetMap::tabulated(table.iter().map(|s| (s.x, s.value)).collect());
    let system = ImpactingSystem::new(
        format!("induced by {} and {}", phi1.label(), phi2.label()),
        reset,
        phi2.clone(),
        phi2.clone(),
    );
    let check = system.check(xs, horizon, cfg);
    if !check.unresolved.is_empty() || !check.closure_violations.is_empty() {
        return Err(InduceFailure {
            reason: format!(
                "Im E_H⁺ ⊄ dom P × {{0}} on {} samples ({} unresolved)",
                check.closure_violations.len(),
                check.unresolved.len()
            ),
            unresolved: check.unresolved,
            closure_violations: check.closure_violations,
        });
    }
    Ok(InducedSystem { system, table, sliding_set: check.sliding_set })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoincareClass {
    Regular,
    /// Fixed point of `x ↦ E(P(x))`: an equilibrium or periodic orbit.
    FixedPoint,
    Sliding,
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poincare {
    pub x: f64,
    pub value: Option<f64>,
    pub class: PoincareClass,
    pub time: Option<f64>,
}

/// One bounce: the boundary coordinate of `E_{H⁺}(P(x), 0)`.
pub fn poincare_composition(
    sys: &ImpactingSystem,
    x: f64,
    horizon: f64,
    cfg: &Tolerances,
) -> Result<Poincare, super::HybridError> {
    if sys.in_sliding_set(x, cfg) {
        return Ok(Poincare { x, value: Some(x), class: PoincareClass::Sliding, time: Some(0.0) });
    }
    let px = sys.reset.apply(x).ok_or(super::HybridError::ResetUndefined { point: Point::new(x, 0.0), time: 0.0 })?;
    let e = sys.first_out(px, horizon, cfg);
    Ok(match e.value {
        MapValue::Defined { time, point } => {
            let class =
                if (point.x - x).abs() <= cfg.fixed_param { PoincareClass::FixedPoint } else { PoincareClass::Regular };
            Poincare { x, value: Some(point.x), class, time: Some(time) }
        }
        _ => Poincare { x, value: None, class: PoincareClass::Undefined, time: None },
    })
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NormalFormError {
    #[error("P is not total: undefined at x = {0}")]
    NotTotal(f64),
    #[error("P is the identity on the probe grid")]
    Identity,
    #[error("P has a jump between x = {0} and x = {1}")]
    Discontinuous(f64, f64),
    #[error("P is not unimodal with an identity half-line: {0}")]
    NotUnimodal(String),
    #[error(transparent)]
    Conjugation(#[from] crate::flow::ConjugationError),
}

/// Output of [`normal_form_conjugate`]: the conjugate system with
/// `Q(x) = −x` for `x ≤ 0` and the conjugacy `H(x, y) = (h(σx − α), y)`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub system: ImpactingSystem,
    pub h: Homeomorphism2D,
    /// `−1` when the identity half-line of `P` was on the left.
    pub flip: f64,
    pub alpha: f64,
}

const GRID_HALF_WIDTH: f64 = 10.0;
const GRID_LEN: usize = 401;

fn is_identity_at(p: &ResetMap, x: f64) -> bool {
    p.apply(x).is_some_and(|v| (v - x).abs() <= 1e-9 * (1.0 + x.abs()))
}

/// Conjugate an impacting system with total continuous non-identity reset
/// to one whose reset is `−x` on the non-positive half-line.
pub fn normal_form_conjugate(sys: &ImpactingSystem, cfg: &Tolerances) -> Result<NormalForm, NormalFormError> {
    let xs: Vec<f64> =
        (0..GRID_LEN).map(|k| -GRID_HALF_WIDTH + 2.0 * GRID_HALF_WIDTH * k as f64 / (GRID_LEN - 1) as f64).collect();
    let mut vals = Vec::with_capacity(xs.len());
    for &x in &xs {
        vals.push(sys.reset.apply(x).ok_or(NormalFormError::NotTotal(x))?);
    }
    let spacing = xs[1] - xs[0];
    let steps: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for k in 0..steps.len() {
        let neighbours = [k.checked_sub(1).map(|j| steps[j]), steps.get(k + 1).copied()];
        let local = neighbours.iter().flatten().fold(spacing, |m, &s| m.max(s));
        if steps[k] > cfg.discontinuity_factor * local {
            return Err(NormalFormError::Discontinuous(xs[k], xs[k + 1]));
        }
    }
    let ident: Vec<bool> = xs.iter().map(|&x| is_identity_at(&sys.reset, x)).collect();
    if ident.iter().all(|&b| b) {
        return Err(NormalFormError::Identity);
    }
    let flip = match (ident[0], ident[ident.len() - 1]) {
        (false, true) => 1.0,
        (true, false) => -1.0,
        _ => return Err(NormalFormError::NotUnimodal("no identity half-line on the probe grid".into())),
    };
    let reset = sys.reset.clone();
    let p_flip = move |x: f64| flip * reset.apply(flip * x).unwrap_or(f64::NAN);
    // identity threshold α of the flipped map, refined by bisection
    let ident_f = |x: f64| (p_flip(x) - x).abs() <= 1e-9 * (1.0 + x.abs());
    let grid_f: Vec<f64> = if flip > 0.0 { xs.clone() } else { xs.iter().rev().map(|x| -x).collect() };
    let first_ident = grid_f
        .iter()
        .rposition(|&x| !ident_f(x))
        .map(|k| k + 1)
        .filter(|&k| k < grid_f.len())
        .ok_or_else(|| NormalFormError::NotUnimodal("no identity half-line".into()))?;
    if grid_f[first_ident..].iter().any(|&x| !ident_f(x)) {
        return Err(NormalFormError::NotUnimodal("identity set is not a half-line".into()));
    }
    let (mut lo, mut hi) = (grid_f[first_ident - 1], grid_f[first_ident]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ident_f(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let alpha = hi;
    let p0 = move |x: f64| p_flip(x + alpha) - alpha;
    for w in grid_f[..first_ident].windows(2) {
        if !(p0(w[0] - alpha) > p0(w[1] - alpha)) {
            return Err(NormalFormError::NotUnimodal(format!("P is not decreasing between {} and {}", w[0], w[1])));
        }
    }
    let rtol = cfg.root_rtol.min(1e-13);
    let p0h = p0.clone();
    // h(u) = −P₀⁻¹(u) for u ≥ 0, u otherwise
    let h = move |u: f64| if u >= 0.0 { solve_increasing(|r| p0h(-r), u, rtol).unwrap_or(f64::NAN) } else { u };
    let p0i = p0.clone();
    let h_inv = move |v: f64| if v >= 0.0 { p0i(-v) } else { v };
    let (hf, hi_) = (h.clone(), h_inv.clone());
    let big_h = Homeomorphism2D::new(
        format!("normal form (σ = {flip}, α = {alpha:.3e})"),
        move |p| Point::new(hf(flip * p.x - alpha), p.y),
        move |q| Point::new(flip * (hi_(q.x) + alpha), q.y),
    );
    let q_map = ResetMap::total("Q", move |v| h(p0(h_inv(v))));
    let probes: Vec<Point> =
        (0..15).flat_map(|i| (0..8).map(move |j| Point::new(-3.0 + 0.4 * i as f64, 0.3 * j as f64))).collect();
    let flow = conjugate_flow(&sys.flow, &big_h, &probes, cfg.homeomorphism)?;
    let sliding = conjugate_flow(&sys.sliding, &big_h, &probes, cfg.homeomorphism)?;
    let system = ImpactingSystem::new(format!("normal form of {}", sys.label), q_map, flow, sliding);
    Ok(NormalForm { system, h: big_h, flip, alpha })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConjugacyReport {
    /// `max |H(P(x), 0) − (Q(H(x, 0)₁), 0)|`.
    pub reset_residual: f64,
    /// `max |Ψ(t, H(p)) − H(Φ(t, p))|`.
    pub flow_residual: f64,
    /// Same for the sliding flows on sampled `R_s`.
    pub sliding_residual: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

impl ConjugacyReport {
    pub fn max_residual(&self) -> f64 {
        self.reset_residual.max(self.flow_residual).max(self.sliding_residual)
    }
}

/// Check the three conjugacy identities between impacting systems on sample grids.
pub fn check_conjugacy_invariance(
    a: &ImpactingSystem,
    b: &ImpactingSystem,
    h: &Homeomorphism2D,
    cfg: &Tolerances,
) -> ConjugacyReport {
    let mut r = ConjugacyReport::default();
    let xs: Vec<f64> = (0..64).map(|k| -3.0 + 6.0 * k as f64 / 63.0).collect();
    for &x in &xs {
        let hx = h.apply(Point::new(x, 0.0));
        match (a.reset.apply(x), b.reset.apply(hx.x)) {
            (Some(px), Some(q)) => {
                r.evaluated += 1;
                let lhs = h.apply(Point::new(px, 0.0));
                r.reset_residual = r.reset_residual.max(lhs.dist(Point::new(q, 0.0)));
            }
            _ => r.skipped += 1,
        }
    }
    let times = [0.1, 0.45, 1.3];
    for i in 0..13 {
        for j in 0..7 {
            let p = Point::new(-3.0 + 0.5 * i as f64, 0.35 * j as f64);
            for &t in &times {
                match (b.flow.evaluate(t, h.apply(p)), a.flow.evaluate(t, p)) {
                    (Ok(lhs), Ok(q)) => {
                        r.evaluated += 1;
                        r.flow_residual = r.flow_residual.max(lhs.dist(h.apply(q)));
                    }
                    _ => r.skipped += 1,
                }
            }
        }
    }
    for &x in xs.iter().filter(|&&x| a.in_sliding_set(x, cfg)) {
        let p = Point::new(x, 0.0);
        for &t in &times {
            match (b.sliding.evaluate(t, h.apply(p)), a.sliding.evaluate(t, p)) {
                (Ok(lhs), Ok(q)) => {
                    r.evaluated += 1;
                    r.sliding_residual = r.sliding_residual.max(lhs.dist(h.apply(q)));
                }
                _ => r.skipped += 1,
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::linear::builtin;
    use crate::realization::{build_halfplane_realization, RealizableMapSpec};

    fn cfg() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn oscillator_normal_form() {
        let sys = ImpactingSystem::impact_oscillator(2.0);
        let nf = normal_form_conjugate(&sys, &cfg()).unwrap();
        assert_eq!(nf.flip, 1.0);
        assert!(nf.alpha.abs() < 1e-9);
        for k in 0..64 {
            let x = -3.0 * k as f64 / 63.0;
            assert!((nf.system.reset.apply(x).unwrap() + x).abs() < 1e-8);
        }
        // h(x) = x/2 on x ≥ 0
        assert!((nf.h.apply(Point::new(3.0, 1.0)).x - 1.5).abs() < 1e-9);
        let rep = check_conjugacy_invariance(&sys, &nf.system, &nf.h, &cfg());
        assert!(rep.max_residual() < 1e-8, "{rep:?}");
    }

    #[test]
    fn mirrored_map_is_flipped() {
        let sys = ImpactingSystem::new(
            "mirror",
            ResetMap::total("min(−2x, x)", |x| (-2.0 * x).min(x)),
            builtin::rotation(),
            super::super::stationary_flow(),
        );
        let nf = normal_form_conjugate(&sys, &cfg()).unwrap();
        assert_eq!(nf.flip, -1.0);
        assert!((nf.system.reset.apply(-1.5).unwrap() - 1.5).abs() < 1e-8);
    }

    #[test]
    fn identity_and_partial_resets_are_rejected() {
        let id = ImpactingSystem::new(
            "id",
            ResetMap::total("id", |x| x),
            builtin::rotation(),
            super::super::stationary_flow(),
        );
        assert!(matches!(normal_form_conjugate(&id, &cfg()), Err(NormalFormError::Identity)));
        let partial = ImpactingSystem::new(
            "p",
            ResetMap::new("p", |x| (x > -5.0).then_some(x.abs())),
            builtin::rotation(),
            super::super::stationary_flow(),
        );
        assert!(matches!(normal_form_conjugate(&partial, &cfg()), Err(NormalFormError::NotTotal(_))));
    }

    #[test]
    fn identity_conjugacy_residuals() {
        let a = ImpactingSystem::impact_oscillator(1.0);
        let b = ImpactingSystem::impact_oscillator(2.0);
        let id = Homeomorphism2D::identity();
        assert_eq!(check_conjugacy_invariance(&a, &a, &id, &cfg()).max_residual(), 0.0);
        assert!(check_conjugacy_invariance(&a, &b, &id, &cfg()).reset_residual > 0.1);
    }

    #[test]
    fn oscillator_poincare_fixed_point() {
        let sys = ImpactingSystem::impact_oscillator(1.0);
        let p = poincare_composition(&sys, -1.0, 10.0, &cfg()).unwrap();
        assert_eq!(p.class, PoincareClass::FixedPoint);
        assert!((p.value.unwrap() + 1.0).abs() < 1e-9);
        let s = poincare_composition(&sys, 0.0, 10.0, &cfg()).unwrap();
        assert_eq!(s.class, PoincareClass::Sliding);
    }

    #[test]
    fn ball_poincare_scales_velocity() {
        let sys = ImpactingSystem::bouncing_ball(1.0, 0.5);
        for v in [-2.0, -1.0, -0.3] {
            let p = poincare_composition(&sys, v, 50.0, &cfg()).unwrap();
            assert!((p.value.unwrap() - 0.5 * v).abs() < 1e-9);
        }
    }

    #[test]
    fn realization_and_gravity_induce_a_ball() {
        let rf = build_halfplane_realization(RealizableMapSpec::neg(), &cfg()).unwrap();
        let xs: Vec<f64> = (0..33).map(|k| -2.0 + 4.0 * k as f64 / 32.0).collect();
        let ind = induced_system(&rf.flow(), &builtin::gravity(1.0), &xs, 20.0, &cfg()).unwrap();
        assert!((ind.system.reset.apply(-1.5).unwrap() - 1.5).abs() < 1e-6);
        assert!((ind.system.reset.apply(0.75).unwrap() - 0.75).abs() < 1e-6);
        assert_eq!(ind.sliding_set, vec![0.0]);
    }

    #[test]
    fn staying_flow_induces_nothing() {
        // the sink at (0, −1) keeps every orbit from the axis inside H⁻ after entering it
        let sink =
            FlowModel::new(crate::flow::AffineFlow::new("sink", [[-1.0, 0.0], [0.0, -1.0]], Point::new(0.0, -1.0)));
        let xs: Vec<f64> = (0..9).map(|k| -1.0 + 0.25 * k as f64).collect();
        let f = induced_system(&sink, &builtin::gravity(1.0), &xs, 20.0, &cfg()).unwrap_err();
        assert!(f.reason.contains("no exits"), "{f:?}");
    }

    #[test]
    fn comsin_does_not_induce() {
        let phi1 = conjugate_flow(&builtin::translation(), &Homeomorphism2D::oscillating_shear(), &[], 1.0).unwrap();
        let xs: Vec<f64> = (0..41).map(|k| -1.0 + 0.05 * k as f64).collect();
        let f = induced_system(&phi1, &builtin::gravity(1.0), &xs, 5.0, &cfg()).unwrap_err();
        assert!(!f.unresolved.is_empty());
        assert!(f.unresolved.iter().any(|x| x.abs() < 0.1), "{f:?}");
    }
}
