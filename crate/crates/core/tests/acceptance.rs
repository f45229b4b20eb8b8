//! One line per acceptance criterion, then a non-zero exit if any failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use exitmap::first_maps::BoundaryLabel;
use exitmap::hybrid::{
    check_conjugacy_invariance, induced_system, normal_form_conjugate, poincare_composition, simulate, PoincareClass,
    ZenoVerdict,
};
use exitmap::planar::{sweep_boundary, SampleStatus, Verdict};
use exitmap::realization::{
    build_disc_realization, build_halfplane_realization, verify_disc_realization, verify_realization, CircleMapSpec,
    RealizableMapSpec,
};
use exitmap::scenario::{builtin, planar_builtins, run_property_suite, Scenario};
use exitmap::{Point, Tolerances};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn load(name: &str) -> Scenario {
    builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// The piecewise first-out map of `(x, -y)` on the unit disc, in angle.
fn exmap_e(th: f64) -> Option<f64> {
    let q = PI / 4.0;
    Some(match th {
        t if t < q => t,
        t if t < 2.0 * q => PI / 2.0 - t,
        t if t == 2.0 * q => return None,
        t if t <= 3.0 * q => 1.5 * PI - t,
        t if t <= 5.0 * q => t,
        t if t < 6.0 * q => 2.5 * PI - t,
        t if t == 6.0 * q => return None,
        t if t <= 7.0 * q => 3.5 * PI - t,
        t => t,
    })
}

/// The piecewise first-in map of the closed disc, in angle.
fn exmap_r(th: f64) -> Option<f64> {
    let q = PI / 4.0;
    let inside = (th > q && th < 3.0 * q) || (th > 5.0 * q && th < 7.0 * q);
    inside.then_some(th)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = Tolerances::default();
    let p = load("exmap").planar(Some(64), None, &cfg).map_err(|e| e.to_string())?;
    let sw = sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, &cfg);
    let took = within(Duration::from_secs(5), start)?;
    let endpoints = [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0];
    let mut worst = 0.0f64;
    for (k, (e, r)) in sw.f_e.samples.iter().zip(&sw.f_r.samples).enumerate() {
        let th = 2.0 * PI * k as f64 / 64.0;
        let far = endpoints.iter().all(|&b| (e.s - b).abs() >= 2.0 / 64.0 - 1e-12);
        for (got, want, map) in [(e, exmap_e(th), "E_D"), (r, exmap_r(th), "R_D")] {
            let status = if want.is_some() { SampleStatus::Defined } else { SampleStatus::Undefined };
            ensure(got.status == status, || format!("{map} at s = {}: {:?}, expected {status:?}", got.s, got.status))?;
            if let (true, Some(v), Some(w)) = (far, got.value, want) {
                let d = circle_dist(v, w / (2.0 * PI));
                worst = worst.max(d);
                ensure(d < 1e-5, || format!("{map} at s = {}: {v} vs {}", got.s, w / (2.0 * PI)))?;
            }
        }
    }
    Ok(format!("64 samples, max value error {worst:.1e}, {took:.2?}"))
}

fn affine_oracle(p: f64, x: f64) -> BoundaryLabel {
    use BoundaryLabel::*;
    let t = -p;
    if p > 0.0 {
        if x < t {
            A2
        } else {
            B
        }
    } else if p == 0.0 {
        if x < 0.0 {
            A2
        } else if x == 0.0 {
            A3
        } else {
            A1
        }
    } else if x <= t {
        C
    } else {
        A1
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cfg = Tolerances::default();
    let mut checked = 0;
    for p in [1.0, 0.0, -1.0] {
        let pl = load(&format!("affine({p})")).planar(Some(33), None, &cfg).map_err(|e| e.to_string())?;
        let sw = sweep_boundary(&pl.flow, &pl.region, pl.grid, pl.horizon, &cfg);
        let h = pl.grid.spacing();
        for (x, t) in pl.grid.params().into_iter().zip(&sw.types) {
            // neighbours of a threshold are excluded; a sample on a threshold is still checked
            if [-p, 0.0].iter().any(|&c| (x - c).abs() > 1e-12 && (x - c).abs() <= h + 1e-12) {
                continue;
            }
            let want = affine_oracle(p, x);
            ensure(t.label == want, || format!("p = {p}, x = {x}: {} vs {want}", t.label))?;
            checked += 1;
        }
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("{checked} points over p in {{1, 0, -1}}, {took:.2?}"))
}

fn criterion_3() -> Outcome {
    use BoundaryLabel::*;
    let cfg = Tolerances::default();
    let p = load("exmap").planar(Some(256), None, &cfg).map_err(|e| e.to_string())?;
    let seq = sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, &cfg).sequence;
    let labels: Vec<_> = seq.runs.iter().map(|r| r.label).collect();
    ensure(labels == [B, A2, C, A2, B, A2, C, A2, B], || format!("runs {}", seq.describe()))?;
    let targets = [0.125, 0.25, 0.375, 0.625, 0.75, 0.875];
    let mut worst = 0.0f64;
    for b in seq.run_boundaries() {
        let d = targets.iter().map(|t| (b - t).abs()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        ensure(d <= 2.0 / 256.0, || format!("run boundary {b} is {d} from the nearest target"))?;
    }
    Ok(format!("nine runs, boundaries within {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let cfg = Tolerances::default();
    let mut scenarios = 0;
    for name in planar_builtins() {
        let s = load(&name);
        let rep = run_property_suite(&s, None, None, &cfg).map_err(|e| e.to_string())?;
        for r in &rep.reports {
            ensure(r.verdict != Verdict::Fail, || format!("{name}: {} fails: {:?}", r.check, r.violations.first()))?;
        }
        scenarios += 1;
    }
    let controls = [
        ("control_monotonicity", "monotonicity"),
        ("control_two_to_one", "two-to-one"),
        ("control_two_peak", "extremum-count"),
        ("control_bc", "forbidden-bc"),
    ];
    for (name, check) in controls {
        let rep = run_property_suite(&load(name), None, None, &cfg).map_err(|e| e.to_string())?;
        let verdict = rep.get(check).map(|r| r.verdict);
        ensure(verdict == Some(Verdict::Fail), || format!("{name}: {check} gave {verdict:?}"))?;
    }
    Ok(format!("{scenarios} builtins clean, {} controls caught", controls.len()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cfg = Tolerances::default();
    let xs: Vec<f64> = (0..32).map(|k| -3.0 * (1.0 - k as f64 / 31.0)).collect();
    let mut parts = Vec::new();
    for spec in [RealizableMapSpec::neg(), RealizableMapSpec::square()] {
        let label = spec.label().to_string();
        let rf = build_halfplane_realization(spec, &cfg).map_err(|e| e.to_string())?;
        let rep = verify_realization(&rf, &xs, 20.0, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.max_error < 1e-5, || format!("{label}: max error {}", rep.max_error))?;
        ensure(rep.max_time_error < 1e-6, || format!("{label}: max |T - 1| {}", rep.max_time_error))?;
        parts.push(format!("{label} err {:.1e} |T-1| {:.1e}", rep.max_error, rep.max_time_error));
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("{}, {took:.2?}", parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let cfg = Tolerances::default();
    let mut parts = Vec::new();
    for alpha in [1.0 / 3.0, 0.5] {
        let spec = CircleMapSpec::tent(alpha);
        let dr = build_disc_realization(&spec, &cfg).map_err(|e| e.to_string())?;
        let rep = verify_disc_realization(&dr, &spec, 64, 50.0, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.max_error < 1e-4, || format!("alpha = {alpha}: max error {}", rep.max_error))?;
        parts.push(format!("alpha {alpha:.3} err {:.1e}", rep.max_error));
    }
    Ok(parts.join(", "))
}

fn criterion_7() -> Outcome {
    let cfg = Tolerances::default();
    let sweep = |name: &str| -> Result<Vec<BoundaryLabel>, String> {
        let p = load(name).planar(Some(64), None, &cfg).map_err(|e| e.to_string())?;
        Ok(sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, &cfg).types.iter().map(|t| t.label).collect())
    };
    let (a, b) = (sweep("exmap")?, sweep("exmap_shear")?);
    ensure(a.len() == 64 && a.len() == b.len(), || format!("{} vs {} samples", a.len(), b.len()))?;
    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
        ensure(x == y, || format!("s = {}: {x} before, {y} after the shear", k as f64 / 64.0))?;
    }
    Ok("64 labels identical under (x, y) -> (x + y/2, y)".into())
}

fn criterion_8() -> Outcome {
    let cfg = Tolerances::default();
    let mut parts = Vec::new();
    for r in [0.3, 0.5, 0.8] {
        let h = load(&format!("bouncing_ball({r})")).hybrid.expect("hybrid section");
        let sys = h.system(&cfg).map_err(|e| e.to_string())?;
        let tr = simulate(&sys, Point::new(h.x0[0], h.x0[1]), &h.settings(), &cfg).map_err(|e| e.to_string())?;
        let expected = 2.0 * h.x0[0] / (1.0 - r);
        ensure(tr.zeno.verdict == ZenoVerdict::Zeno, || format!("r = {r}: {:?}", tr.zeno.verdict))?;
        let t = tr.zeno.accumulation.unwrap_or(f64::NAN);
        ensure((t - expected).abs() < 1e-3, || format!("r = {r}: accumulation {t}, expected {expected}"))?;
        parts.push(format!("r {r}: {:.1e}", (t - expected).abs()));
    }
    let h = load("impact_oscillator(1)").hybrid.expect("hybrid section");
    let sys = h.system(&cfg).map_err(|e| e.to_string())?;
    let tr = simulate(&sys, Point::new(h.x0[0], h.x0[1]), &h.settings(), &cfg).map_err(|e| e.to_string())?;
    ensure(tr.zeno.verdict == ZenoVerdict::NotZeno, || format!("oscillator: {:?}", tr.zeno.verdict))?;
    let x = h.x0[0];
    let pc = poincare_composition(&sys, x, 20.0, &cfg).map_err(|e| e.to_string())?;
    let v = pc.value.unwrap_or(f64::NAN);
    ensure(pc.class == PoincareClass::FixedPoint && (v - x).abs() < 1e-6, || format!("oscillator: {pc:?}"))?;
    Ok(format!("{}; oscillator fixed point {v} ({:.1e})", parts.join(", "), (v - x).abs()))
}

fn criterion_9() -> Outcome {
    let cfg = Tolerances::default();
    let mut parts = Vec::new();
    for mu in [2.0, 5.0] {
        let sys = load(&format!("impact_oscillator({mu})"))
            .hybrid
            .expect("hybrid section")
            .system(&cfg)
            .map_err(|e| e.to_string())?;
        let nf = normal_form_conjugate(&sys, &cfg).map_err(|e| e.to_string())?;
        let mut q_err = 0.0f64;
        for k in 0..64 {
            let x = -3.0 * k as f64 / 63.0;
            let q = nf.system.reset.apply(x).ok_or_else(|| format!("mu = {mu}: Q undefined at {x}"))?;
            q_err = q_err.max((q + x).abs());
        }
        ensure(q_err < 1e-6, || format!("mu = {mu}: max |Q(x) + x| = {q_err}"))?;
        let rep = check_conjugacy_invariance(&sys, &nf.system, &nf.h, &cfg);
        ensure(rep.evaluated > 0 && rep.max_residual() < 1e-6, || format!("mu = {mu}: {rep:?}"))?;
        parts.push(format!("mu {mu}: |Q+x| {q_err:.1e}, residual {:.1e}", rep.max_residual()));
    }
    Ok(parts.join(", "))
}

fn criterion_10() -> Outcome {
    let cfg = Tolerances::default();
    let ind = load("zeno_shear").induce.expect("induce section");
    let phi1 = ind.phi1.build(&cfg).map_err(|e| e.to_string())?;
    let phi2 = ind.phi2.build(&cfg).map_err(|e| e.to_string())?;
    let xs = ind.grid.params();
    match induced_system(&phi1, &phi2, &xs, ind.horizon.unwrap_or(cfg.horizon), &cfg) {
        Ok(_) => Err("zeno_shear induced an impacting system".into()),
        Err(f) => {
            let near = f.unresolved.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            let spacing = ind.grid.spacing();
            ensure(near <= spacing, || format!("closest unresolved sample at |x| = {near}: {}", f.reason))?;
            Ok(format!("{} unresolved samples, closest at |x| = {near:.2e}", f.unresolved.len()))
        }
    }
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("exmap first-out and first-in oracle", criterion_1),
        ("affine classification", criterion_2),
        ("exmap type sequence", criterion_3),
        ("structural property suite", criterion_4),
        ("half-plane realization round trip", criterion_5),
        ("disc realization", criterion_6),
        ("conjugation invariance", criterion_7),
        ("bouncing ball and impact oscillator", criterion_8),
        ("normal form", criterion_9),
        ("non-inducing detection", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: pass  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria pass", criteria.len());
}
