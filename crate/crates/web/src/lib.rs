//! Browser demo: three small computations, each returning an SVG plot and a
//! summary as a JSON string `{"svg": ..., "summary": ..., ...}`.

use exitmap::hybrid::{simulate, ImpactingSystem, SimulationSettings, ZenoVerdict};
use exitmap::planar::sweep_boundary;
use exitmap::scenario::{builtin, planar_builtins};
use exitmap::svg::{map_plot, trajectory_plot, types_plot};
use exitmap::{Point, Tolerances};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_SAMPLES: usize = 512;

/// First-out and first-in maps of a planar builtin scenario.
pub fn exit_map_demo(name: &str, samples: usize) -> Result<String, String> {
    if !planar_builtins().iter().any(|n| n == name) && !name.starts_with("affine(") {
        return Err(format!("`{name}` is not a planar builtin"));
    }
    let s = builtin(name).map_err(|e| e.to_string())?;
    let cfg = s.tolerances(&Default::default()).map_err(|e| e.to_string())?;
    let p = s.planar(Some(samples.clamp(8, MAX_SAMPLES)), None, &cfg).map_err(|e| e.to_string())?;
    let sw = sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, &cfg);
    let plot =
        map_plot(&format!("{}: F_E and F_R", s.name), &[(&sw.f_e, "F_E", "#d95f02"), (&sw.f_r, "F_R", "#386cb0")]);
    let defined = sw.f_e.samples.iter().filter(|m| m.is_defined()).count();
    let summary = format!(
        "{}: F_E defined at {defined} of {} samples; type sequence {}",
        s.name,
        sw.f_e.samples.len(),
        sw.sequence.describe()
    );
    Ok(json!({ "svg": plot.to_svg(), "summary": summary }).to_string())
}

/// Boundary types of the affine focus with `λ = μ = 1` on the lower half-plane.
pub fn affine_demo(p: f64, samples: usize) -> Result<String, String> {
    if !p.is_finite() {
        return Err("p must be finite".into());
    }
    let s = builtin(&format!("affine({p})")).map_err(|e| e.to_string())?;
    let cfg = Tolerances::default();
    let pl = s.planar(Some(samples.clamp(8, MAX_SAMPLES)), None, &cfg).map_err(|e| e.to_string())?;
    let sw = sweep_boundary(&pl.flow, &pl.region, pl.grid, pl.horizon, &cfg);
    let b = pl.region.boundary().ok_or("region has no boundary")?;
    let points: Vec<_> = sw.grid.params().into_iter().zip(&sw.types).map(|(x, t)| (b.point(x), t.label)).collect();
    let mut plot = types_plot(&format!("affine focus, p = {p}"), &points);
    plot.equal_aspect = false;
    plot.y_range = Some((-1.0, 1.0));
    let t = -p;
    let predicted = if p > 0.0 {
        format!("A-2 for x < {t}, B for x >= {t}")
    } else if p == 0.0 {
        "A-2 for x < 0, A-3 at 0, A-1 for x > 0".to_string()
    } else {
        format!("C for x <= {t}, A-1 for x > {t}")
    };
    let summary = format!("p = {p}: {}\npredicted: {predicted}", sw.sequence.describe());
    Ok(json!({ "svg": plot.to_svg(), "summary": summary }).to_string())
}

/// Bouncing ball launched upward at speed 1 under `g = 1` with restitution `r`.
pub fn bouncing_ball_demo(r: f64) -> Result<String, String> {
    if !(r > 0.0 && r < 1.0) {
        return Err(format!("restitution must lie in (0, 1), got {r}"));
    }
    let cfg = Tolerances::default();
    let sys = ImpactingSystem::bouncing_ball(1.0, r);
    let settings = SimulationSettings { horizon: 50.0, max_events: 200, ..Default::default() };
    let traj = simulate(&sys, Point::new(1.0, 0.0), &settings, &cfg).map_err(|e| e.to_string())?;
    let expected = 2.0 / (1.0 - r);
    let summary = match (traj.zeno.verdict, traj.zeno.accumulation) {
        (ZenoVerdict::Zeno, Some(t)) => {
            format!(
                "{} jumps; Zeno with accumulation time {t:.6} (closed form 2/(1 - r) = {expected:.6})",
                traj.jumps.len()
            )
        }
        _ => format!("{} jumps; no Zeno verdict", traj.jumps.len()),
    };
    let mut plot = trajectory_plot(&format!("bouncing ball, r = {r}"), &traj);
    plot.x_label = "velocity".into();
    plot.y_label = "height".into();
    Ok(json!({
        "svg": plot.to_svg(),
        "summary": summary,
        "accumulation": traj.zeno.accumulation,
        "closed_form": expected,
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn exit_map(name: &str, samples: u32) -> Result<String, JsValue> {
    js(exit_map_demo(name, samples as usize))
}

#[wasm_bindgen]
pub fn classify_affine(p: f64, samples: u32) -> Result<String, JsValue> {
    js(affine_demo(p, samples as usize))
}

#[wasm_bindgen]
pub fn bouncing_ball(r: f64) -> Result<String, JsValue> {
    js(bouncing_ball_demo(r))
}

#[wasm_bindgen]
pub fn planar_scenarios() -> String {
    json!(planar_builtins()).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn exit_map_returns_a_plot() {
        let v = parse(exit_map_demo("exmap", 32).unwrap());
        assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
        assert!(v["summary"].as_str().unwrap().contains("A-2"));
        assert!(exit_map_demo("bouncing_ball", 32).is_err());
    }

    #[test]
    fn affine_summary_tracks_p() {
        let v = parse(affine_demo(1.0, 33).unwrap());
        assert!(v["summary"].as_str().unwrap().starts_with("p = 1: A-2"));
        let v = parse(affine_demo(-1.0, 33).unwrap());
        assert!(v["summary"].as_str().unwrap().ends_with("predicted: C for x <= 1, A-1 for x > 1"));
        assert!(affine_demo(f64::NAN, 33).is_err());
    }

    #[test]
    fn ball_matches_closed_form() {
        let v = parse(bouncing_ball_demo(0.5).unwrap());
        assert!((v["accumulation"].as_f64().unwrap() - 4.0).abs() < 1e-3);
        assert!(bouncing_ball_demo(1.0).is_err());
    }
}
