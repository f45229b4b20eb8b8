use serde::Serialize;

use super::{Scenario, ScenarioError};
use crate::config::Tolerances;
use crate::planar::{
    check_duality, check_extremum_count, check_forbidden_bc, check_junction_behavior, check_monotonicity,
    check_two_to_one, sweep_boundary, CheckReport, Verdict,
};

/// Check names in matrix order.
pub const CHECKS: [&str; 6] = ["two-to-one", "forbidden-bc", "monotonicity", "extremum-count", "duality", "junction"];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub scenario: String,
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn get(&self, check: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.check == check)
    }

    /// No check failed. Not-applicable and inconclusive rows do not count as failures.
    pub fn no_failures(&self) -> bool {
        self.reports.iter().all(|r| r.verdict != Verdict::Fail)
    }
}

fn not_applicable(check: &'static str, why: &str) -> CheckReport {
    CheckReport {
        check,
        verdict: Verdict::NotApplicable,
        vacuous: false,
        eligible: 0,
        violations: Vec::new(),
        notes: vec![why.to_string()],
    }
}

/// Run every structural check that applies to the scenario.
///
/// Planar scenarios get one boundary sweep feeding the map and sequence
/// checks, plus a separate duality sweep. Synthetic scenarios get the checks
/// that their samples support. Everything else is not applicable.
pub fn run_property_suite(
    s: &Scenario,
    samples: Option<usize>,
    horizon: Option<f64>,
    cfg: &Tolerances,
) -> Result<SuiteReport, ScenarioError> {
    let mut reports = Vec::with_capacity(CHECKS.len());
    if s.has_planar() {
        let p = s.planar(samples, horizon, cfg)?;
        let sw = sweep_boundary(&p.flow, &p.region, p.grid, p.horizon, cfg);
        reports.push(check_two_to_one(&sw.f_e, cfg));
        reports.push(check_forbidden_bc(&sw.sequence));
        reports.push(check_monotonicity(&sw.f_e, cfg));
        reports.push(check_extremum_count(&sw.f_e, cfg));
        reports.push(check_duality(&p.flow, &p.region, p.grid, p.horizon, cfg));
        reports.push(check_junction_behavior(&p.flow, &p.region, &sw.sequence, cfg));
    } else if let Some(syn) = &s.synthetic {
        let map = syn.map(cfg);
        let seq = syn.sequence();
        for check in CHECKS {
            let r = match (check, &map, &seq) {
                ("two-to-one", Some(m), _) => check_two_to_one(m, cfg),
                ("monotonicity", Some(m), _) => check_monotonicity(m, cfg),
                ("extremum-count", Some(m), _) => check_extremum_count(m, cfg),
                ("forbidden-bc", _, Some(q)) => check_forbidden_bc(q),
                _ => not_applicable(check, "synthetic samples do not support this check"),
            };
            reports.push(r);
        }
    } else {
        reports.extend(CHECKS.iter().map(|c| not_applicable(c, "scenario has no flow and region")));
    }
    Ok(SuiteReport { scenario: s.name.clone(), reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;

    fn verdict(name: &str, check: &str) -> Verdict {
        let s = builtin(name).unwrap();
        run_property_suite(&s, None, None, &Tolerances::default()).unwrap().get(check).unwrap().verdict
    }

    #[test]
    fn controls_fail_their_checks() {
        assert_eq!(verdict("control_monotonicity", "monotonicity"), Verdict::Fail);
        assert_eq!(verdict("control_two_to_one", "two-to-one"), Verdict::Fail);
        assert_eq!(verdict("control_bc", "forbidden-bc"), Verdict::Fail);
        assert_eq!(verdict("control_two_peak", "extremum-count"), Verdict::Fail);
    }

    #[test]
    fn exmap_suite_has_no_failures() {
        let s = builtin("exmap").unwrap();
        let r = run_property_suite(&s, Some(32), None, &Tolerances::default()).unwrap();
        assert!(r.no_failures(), "{r:#?}");
        assert_eq!(r.get("duality").unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn hybrid_only_scenario_is_not_applicable() {
        let s = builtin("bouncing_ball").unwrap();
        let r = run_property_suite(&s, None, None, &Tolerances::default()).unwrap();
        assert!(r.reports.iter().all(|c| c.verdict == Verdict::NotApplicable));
    }
}
