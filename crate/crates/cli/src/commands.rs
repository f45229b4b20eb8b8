use std::collections::BTreeMap;

use exitmap::first_maps::BoundaryLabel;
use exitmap::geometry::HalfPlane;
use exitmap::hybrid::{
    check_conjugacy_invariance, first_in_time_scenario, induced_system, normal_form_conjugate, poincare_composition,
    simulate, ZenoVerdict,
};
use exitmap::planar::{sweep_boundary, MapSample, ParametricMapSample, SampleGrid, Verdict};
use exitmap::realization::{
    build_disc_realization, build_halfplane_realization, verify_disc_realization, verify_realization, CircleMapSpec,
    MapDecl,
};
use exitmap::scenario::{
    run_property_suite, AnalysisDecl, FlowDecl, OutputsDecl, RealizeDecl, RegionDecl, Scenario, ScenarioError, CHECKS,
};
use exitmap::svg::{map_plot, trajectory_plot, types_plot, Plot, Series, Style};
use exitmap::{Point, Tolerances};
use serde_json::{json, Map, Value};

use crate::error::{CliError, EXIT_COMPUTATION};
use crate::output::{num, opt, Output, Table};
use crate::Common;

const MAP_COLUMNS: [&str; 7] = ["s", "status", "T", "exit_s", "type_label", "horizon", "graze_count"];

fn map_table(name: &'static str, m: &ParametricMapSample) -> Table {
    let mut t = Table::new(name, &MAP_COLUMNS);
    for s in &m.samples {
        t.push(map_row(s));
    }
    t
}

fn map_row(s: &MapSample) -> Vec<String> {
    vec![
        num(s.s),
        s.status.as_str().into(),
        opt(s.time),
        opt(s.value),
        s.label.map(|l| l.as_str().to_string()).unwrap_or_default(),
        num(s.horizon),
        s.grazes.to_string(),
    ]
}

fn map_summary(name: &str, m: &ParametricMapSample) -> String {
    let count = |f: fn(&MapSample) -> bool| m.samples.iter().filter(|s| f(s)).count();
    let defined = count(|s| s.is_defined());
    let fixed = count(|s| s.fixed);
    let unresolved = count(|s| s.status == exitmap::planar::SampleStatus::Unresolved);
    format!(
        "{name}: {defined}/{} defined ({fixed} fixed), {unresolved} unresolved, {} discontinuities",
        m.samples.len(),
        m.discontinuities.len()
    )
}

pub fn exitmap(s: &Scenario, c: &Common, cfg: &Tolerances) -> Result<Output, CliError> {
    let p = s.planar(c.samples, c.horizon, cfg)?;
    let sw = sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, cfg);
    let mut out = Output::new(&s.name, "exitmap");
    out.line(format!("{}: {} samples, horizon {}", s.name, p.grid.len(), p.horizon));
    out.line(map_summary("F_E", &sw.f_e));
    out.line(map_summary("F_R", &sw.f_r));
    out.tables.push(map_table("first_out", &sw.f_e));
    out.tables.push(map_table("first_in", &sw.f_r));
    out.json = json!({
        "scenario": s.name,
        "grid": p.grid,
        "horizon": p.horizon,
        "first_out": sw.f_e,
        "first_in": sw.f_r,
    });
    let plot = map_plot(
        &format!("{}: first-out and first-in maps", s.name),
        &[(&sw.f_e, "F_E", "#d95f02"), (&sw.f_r, "F_R", "#386cb0")],
    );
    out.svgs.push(("exitmap", plot.to_svg()));
    Ok(out)
}

pub fn classify(s: &Scenario, c: &Common, cfg: &Tolerances) -> Result<Output, CliError> {
    let p = s.planar(c.samples, c.horizon, cfg)?;
    let sw = sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, cfg);
    let b = p.region.boundary().expect("planar scenarios have a boundary");
    let mut t = Table::new(
        "classify",
        &["s", "x", "y", "type_label", "exit_status", "exit_T", "return_status", "return_T", "note"],
    );
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for (s_, ty) in sw.grid.params().into_iter().zip(&sw.types) {
        let q = b.point(s_);
        *counts.entry(ty.label.as_str()).or_default() += 1;
        points.push((q, ty.label));
        t.push(vec![
            num(s_),
            num(q.x),
            num(q.y),
            ty.label.as_str().into(),
            ty.exit.value.status().into(),
            opt(ty.exit.time()),
            ty.ret.value.status().into(),
            opt(ty.ret.time()),
            ty.note.clone().unwrap_or_default(),
        ]);
        rows.push(json!({ "s": s_, "point": q, "type": ty }));
    }
    let mut out = Output::new(&s.name, "classify");
    let summary: Vec<String> = counts.iter().map(|(l, n)| format!("{l}: {n}")).collect();
    out.line(format!("{}: {} samples, horizon {}; {}", s.name, p.grid.len(), p.horizon, summary.join(", ")));
    out.tables.push(t);
    out.json = json!({ "scenario": s.name, "grid": p.grid, "horizon": p.horizon, "points": rows });
    out.svgs.push(("classify", types_plot(&format!("{}: boundary types", s.name), &points).to_svg()));
    Ok(out)
}

pub fn typeseq(s: &Scenario, c: &Common, cfg: &Tolerances) -> Result<Output, CliError> {
    let p = s.planar(c.samples, c.horizon, cfg)?;
    let sw = sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, cfg);
    let b = p.region.boundary().expect("planar scenarios have a boundary");
    let seq = &sw.sequence;
    let mut t = Table::new("typeseq", &["run", "type_label", "start", "end", "first", "len"]);
    for (i, r) in seq.runs.iter().enumerate() {
        t.push(vec![
            i.to_string(),
            r.label.as_str().into(),
            num(r.start),
            num(r.end),
            r.first.to_string(),
            r.len.to_string(),
        ]);
    }
    let mut out = Output::new(&s.name, "typeseq");
    out.line(format!("{}: {} runs at resolution {}", s.name, seq.runs.len(), seq.resolution));
    out.line(seq.describe());
    out.tables.push(t);
    out.json = json!({ "scenario": s.name, "grid": p.grid, "horizon": p.horizon, "sequence": seq, "boundaries": seq.run_boundaries() });
    let points: Vec<(Point, BoundaryLabel)> =
        seq.params.iter().zip(&seq.labels).map(|(&s_, &l)| (b.point(s_), l)).collect();
    out.svgs.push(("typeseq", types_plot(&format!("{}: type sequence", s.name), &points).to_svg()));
    Ok(out)
}

fn is_control(s: &Scenario) -> bool {
    s.name.starts_with("control_")
}

/// Scenarios named `control_*` are negative controls: they must fail at
/// least one check. Every other scenario must fail none.
pub fn check(scenarios: &[Scenario], c: &Common, extra: &Map<String, Value>) -> Result<Output, CliError> {
    let slug = if scenarios.len() == 1 { scenarios[0].name.as_str() } else { "all" };
    let mut out = Output::new(slug, "check");
    out.text_primary = true;
    let mut t =
        Table::new("check", &["scenario", "check", "verdict", "vacuous", "eligible", "violations", "first_violation"]);
    let width = scenarios.iter().map(|s| s.name.len()).max().unwrap_or(8).max(8);
    let mut header = format!("{:width$}", "scenario");
    for ch in CHECKS {
        header.push_str(&format!("  {ch:>14}"));
    }
    out.line(header);
    let mut reports = Vec::new();
    let mut problems = Vec::new();
    for s in scenarios {
        let cfg = s.tolerances(extra)?;
        let r = run_property_suite(s, c.samples, c.horizon, &cfg)?;
        let mut line = format!("{:width$}", s.name);
        for ch in CHECKS {
            let rep = r.get(ch).expect("suite runs every check");
            let mark = if rep.vacuous { "pass (vacuous)" } else { rep.verdict.as_str() };
            line.push_str(&format!("  {mark:>14}"));
            t.push(vec![
                s.name.clone(),
                ch.into(),
                rep.verdict.as_str().into(),
                rep.vacuous.to_string(),
                rep.eligible.to_string(),
                rep.violations.len().to_string(),
                rep.violations.first().cloned().unwrap_or_default(),
            ]);
        }
        out.line(line);
        let failed: Vec<&str> = r.reports.iter().filter(|x| x.verdict == Verdict::Fail).map(|x| x.check).collect();
        match (is_control(s), failed.is_empty()) {
            (true, true) => problems.push(format!("negative control {} passed every check", s.name)),
            (false, false) => problems.push(format!("{} fails {}", s.name, failed.join(", "))),
            _ => {}
        }
        reports.push(r);
    }
    out.line("");
    for r in &reports {
        for rep in r.reports.iter().filter(|x| x.verdict == Verdict::Fail) {
            let tag = if r.scenario.starts_with("control_") { " (negative control)" } else { "" };
            out.line(format!("{} / {}{tag}: {} violation(s)", r.scenario, rep.check, rep.violations.len()));
            for v in rep.violations.iter().take(3) {
                out.line(format!("  {v}"));
            }
        }
    }
    if problems.is_empty() {
        out.line("overall: ok");
    } else {
        for p in &problems {
            out.line(format!("unexpected: {p}"));
        }
        out.line("overall: FAILED");
        out.exit_code = EXIT_COMPUTATION;
    }
    out.tables.push(t);
    out.json = json!({ "ok": problems.is_empty(), "problems": problems, "suites": reports });
    Ok(out)
}

fn number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

/// `neg`, `square`, `scaled_neg(mu)`, `tent(alpha)` or a JSON map declaration.
pub fn parse_map(m: &str) -> Result<RealizeDecl, CliError> {
    let m = m.trim();
    let halfplane = |map| RealizeDecl::Halfplane { map, samples: 32, lo: -3.0 };
    if m.starts_with('{') {
        let map: MapDecl = serde_json::from_str(m).map_err(|e| CliError::schema(format!("--map: {e}")))?;
        return Ok(halfplane(map));
    }
    let (name, arg) = match m.split_once('(') {
        Some((n, rest)) => {
            let a = rest.strip_suffix(')').and_then(number);
            (n.trim(), Some(a.ok_or_else(|| CliError::schema(format!("--map: bad argument in `{m}`")))?))
        }
        None => (m, None),
    };
    Ok(match (name, arg) {
        ("neg", None) => halfplane(MapDecl::Neg),
        ("square", None) => halfplane(MapDecl::Square),
        ("scaled_neg", Some(mu)) => halfplane(MapDecl::ScaledNeg { mu }),
        ("tent", Some(alpha)) => RealizeDecl::Disc { alpha, samples: 64 },
        _ => {
            return Err(CliError::schema(format!(
                "--map: unknown map `{m}`; expected neg, square, scaled_neg(mu), tent(alpha) or a JSON declaration"
            )))
        }
    })
}

pub fn map_name(raw: &str, decl: &RealizeDecl) -> String {
    match decl {
        RealizeDecl::Halfplane { map: MapDecl::Tabulated { .. }, .. } => "realize_tabulated".into(),
        _ => format!("realize_{}", raw.trim()),
    }
}

pub fn realize(decl: &RealizeDecl, name: &str, c: &Common, cfg: &Tolerances) -> Result<Output, CliError> {
    let horizon = c.horizon.unwrap_or(20.0);
    let mut out = Output::new(name, "realize");
    match decl {
        RealizeDecl::Halfplane { map, samples, lo } => {
            let n = c.samples.unwrap_or(*samples).max(2);
            let rf = build_halfplane_realization(map.build(), cfg)?;
            let xs: Vec<f64> = (0..n).map(|k| lo * (1.0 - k as f64 / (n - 1) as f64)).collect();
            let rep = verify_realization(&rf, &xs, horizon, cfg)?;
            let mut t = Table::new("realize", &["x", "expected", "exit", "T", "error"]);
            for r in &rep.samples {
                t.push(vec![num(r.x), num(r.expected), num(r.exit), num(r.time), num(r.error)]);
            }
            out.line(format!("{}: map {}, {n} samples on [{lo}, 0]", name, rep.map));
            out.line(format!("max error {:e}", rep.max_error));
            out.line(format!("max |T - 1| {:e}", rep.max_time_error));
            let scenario = Scenario {
                name: name.to_string(),
                description: Some(format!("flow whose first-out map of the lower half-plane is {}", rep.map)),
                flow: Some(FlowDecl::Realization { map: map.clone() }),
                region: Some(RegionDecl::Halfplane { side: HalfPlane::Lower }),
                analysis: AnalysisDecl {
                    grid: Some(SampleGrid::Line { lo: *lo, hi: -lo, n: 33 }),
                    samples: None,
                    horizon: Some(horizon),
                },
                synthetic: None,
                hybrid: None,
                induce: None,
                realize: Some(decl.clone()),
                cooling: None,
                tolerances: Map::new(),
                outputs: OutputsDecl::default(),
            };
            out.files.push((format!("{}_scenario.json", out.slug), scenario.to_json() + "\n"));
            out.json = json!({
                "map": rep.map,
                "max_error": rep.max_error,
                "max_time_error": rep.max_time_error,
                "validity": rf.validity(),
                "samples": rep.samples,
                "scenario": serde_json::to_value(&scenario).expect("scenarios serialize"),
            });
            let mut plot = Plot::new(format!("{}: prescribed and realized exits", rep.map), "x", "exit point");
            plot.push(Series::new(
                "P(x)",
                "#bbbbbb",
                Style::Line,
                rep.samples.iter().map(|r| (r.x, r.expected)).collect(),
            ));
            plot.push(Series::new("E(x)", "#d95f02", Style::Dots, rep.samples.iter().map(|r| (r.x, r.exit)).collect()));
            out.svgs.push(("realize", plot.to_svg()));
            out.tables.push(t);
        }
        RealizeDecl::Disc { alpha, samples } => {
            let n = c.samples.unwrap_or(*samples).max(2);
            let spec = CircleMapSpec::tent(*alpha);
            let dr = build_disc_realization(&spec, cfg)?;
            let rep = verify_disc_realization(&dr, &spec, n, horizon, cfg)?;
            let mut t = Table::new("realize", &["s", "expected", "realized", "error"]);
            for &(s_, e, g) in &rep.samples {
                let d = (g - e).rem_euclid(1.0);
                t.push(vec![num(s_), num(e), num(g), num(d.min(1.0 - d))]);
            }
            out.line(format!("{name}: tent map with alpha = {alpha} on the unit disc, {n} samples"));
            out.line(format!("max error {:e}", rep.max_error));
            out.line(dr.interpretation);
            out.json = json!({ "alpha": alpha, "max_error": rep.max_error, "samples": rep.samples, "interpretation": dr.interpretation });
            let mut plot = Plot::new(format!("tent map, alpha = {alpha}"), "s", "F(s)").ranges((0.0, 1.0), (0.0, 1.0));
            plot.push(Series::new("P(s)", "#bbbbbb", Style::Line, rep.samples.iter().map(|r| (r.0, r.1)).collect()));
            plot.push(Series::new("F_E(s)", "#d95f02", Style::Dots, rep.samples.iter().map(|r| (r.0, r.2)).collect()));
            out.svgs.push(("realize", plot.to_svg()));
            out.tables.push(t);
        }
    }
    Ok(out)
}

pub fn hybrid(s: &Scenario, c: &Common, cfg: &Tolerances) -> Result<Output, CliError> {
    if s.hybrid.is_none() && s.induce.is_none() && s.cooling.is_none() {
        return Err(
            ScenarioError::Missing { scenario: s.name.clone(), what: "hybrid, induce or cooling section" }.into()
        );
    }
    let mut out = Output::new(&s.name, "hybrid");
    let mut doc = Map::new();
    doc.insert("scenario".into(), json!(s.name));
    if let Some(h) = &s.hybrid {
        let sys = h.system(cfg)?;
        let mut settings = h.settings();
        if let Some(t) = c.horizon {
            settings.horizon = t;
        }
        let traj =
            simulate(&sys, Point::from(h.x0), &settings, cfg).map_err(|e| CliError::computation(e.to_string()))?;
        let mut rows = Table::new("trajectory", &["n", "t", "x", "y", "mode"]);
        for (n, t, x, y, mode) in traj.rows() {
            let mode = if mode == exitmap::hybrid::Mode::Flow { "flow" } else { "sliding" };
            rows.push(vec![n.to_string(), num(t), num(x), num(y), mode.into()]);
        }
        let mut jumps = Table::new("jumps", &["n", "t", "pre_x", "pre_y", "post_x", "post_y"]);
        for j in &traj.jumps {
            jumps.push(vec![
                j.index.to_string(),
                num(j.time),
                num(j.pre.x),
                num(j.pre.y),
                num(j.post.x),
                num(j.post.y),
            ]);
        }
        out.line(format!("{}: {}", s.name, sys.label));
        if let Some(coords) = &h.coordinates {
            out.line(format!("coordinates: {coords}"));
        }
        out.line(format!(
            "{} jumps, ended at t = {} ({})",
            traj.jumps.len(),
            traj.end_time,
            serde_json::to_value(traj.termination).expect("serializes").as_str().unwrap_or("")
        ));
        let z = &traj.zeno;
        let verdict = match z.verdict {
            ZenoVerdict::Zeno => "zeno",
            ZenoVerdict::NotZeno => "not zeno",
            ZenoVerdict::Inconclusive => "inconclusive",
        };
        match z.accumulation {
            Some(a) => out.line(format!("zeno: {verdict}, accumulation time {a}")),
            None => out.line(format!("zeno: {verdict}")),
        }
        let mut poincare = Table::new("poincare", &["x", "value", "class", "T"]);
        let mut pc = Vec::new();
        for &x in &h.poincare {
            let r = poincare_composition(&sys, x, settings.horizon, cfg)
                .map_err(|e| CliError::computation(e.to_string()))?;
            let class = serde_json::to_value(r.class).expect("serializes");
            out.line(format!("E(P({x})) = {} [{}]", opt(r.value), class.as_str().unwrap_or("")));
            poincare.push(vec![num(x), opt(r.value), class.as_str().unwrap_or("").into(), opt(r.time)]);
            pc.push(r);
        }
        let mut nf_doc = Value::Null;
        if h.normal_form {
            match normal_form_conjugate(&sys, cfg) {
                Ok(nf) => {
                    let rep = check_conjugacy_invariance(&sys, &nf.system, &nf.h, cfg);
                    out.line(format!(
                        "normal form: flip {}, alpha {}, Q(-1) = {}, conjugacy residual {:e}",
                        nf.flip,
                        nf.alpha,
                        opt(nf.system.reset.apply(-1.0)),
                        rep.max_residual()
                    ));
                    nf_doc = json!({ "flip": nf.flip, "alpha": nf.alpha, "conjugacy": rep });
                }
                Err(e) => {
                    out.line(format!("normal form: not available ({e})"));
                    nf_doc = json!({ "error": e.to_string() });
                }
            }
        }
        out.tables.push(rows);
        out.tables.push(jumps);
        if !h.poincare.is_empty() {
            out.tables.push(poincare);
        }
        out.svgs.push(("trajectory", trajectory_plot(&format!("{}: trajectory", s.name), &traj).to_svg()));
        doc.insert(
            "hybrid".into(),
            json!({ "trajectory": traj, "poincare": pc, "normal_form": nf_doc, "coordinates": h.coordinates }),
        );
    }
    if let Some(ind) = &s.induce {
        let phi1 = ind.phi1.build(cfg)?;
        let phi2 = ind.phi2.build(cfg)?;
        let mut grid = ind.grid;
        if let Some(n) = c.samples {
            match &mut grid {
                SampleGrid::Circle { n: m } | SampleGrid::Line { n: m, .. } => *m = n,
            }
        }
        let horizon = c.horizon.or(ind.horizon).unwrap_or(cfg.horizon);
        let sys = induced_system(&phi1, &phi2, &grid.params(), horizon, cfg)?;
        let mut t = Table::new("reset", &["x", "status", "P"]);
        for r in &sys.table {
            t.push(vec![num(r.x), r.status.into(), opt(r.value)]);
        }
        out.line(format!("{}: induced {} with {} sliding samples", s.name, sys.system.label, sys.sliding_set.len()));
        out.tables.push(t);
        doc.insert("induce".into(), json!({ "table": sys.table, "sliding_set": sys.sliding_set }));
    }
    if let Some(cd) = &s.cooling {
        let horizon = c.horizon.or(cd.horizon).unwrap_or(cfg.horizon);
        let r = first_in_time_scenario(&cd.params, cd.epsilon, horizon, cfg)
            .map_err(|e| CliError::computation(e.to_string()))?;
        let mut t = Table::new(
            "cooling",
            &["epsilon", "exit_T", "exit_Tw", "exit_Ts", "return_T", "return_Tw", "return_Ts", "total"],
        );
        t.push(vec![
            num(r.epsilon),
            num(r.exit_time),
            num(r.exit_point.x),
            num(r.exit_point.y),
            num(r.return_time),
            num(r.return_point.x),
            num(r.return_point.y),
            num(r.total),
        ]);
        out.line(format!(
            "{}: water leaves the band after {} and returns after a further {} (total {})",
            s.name, r.exit_time, r.return_time, r.total
        ));
        out.tables.push(t);
        doc.insert("cooling".into(), serde_json::to_value(&r).expect("serializes"));
    }
    out.json = Value::Object(doc);
    Ok(out)
}
