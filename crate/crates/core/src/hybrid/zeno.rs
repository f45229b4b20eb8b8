use serde::Serialize;

use super::Jump;
use crate::config::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZenoVerdict {
    Zeno,
    NotZeno,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZenoReport {
    pub verdict: ZenoVerdict,
    pub events: usize,
    /// Ratios of consecutive inter-event times over the inspected window.
    pub ratios: Vec<f64>,
    /// `t_last + τ_last ρ / (1 − ρ)` with `ρ` the mean window ratio.
    pub accumulation: Option<f64>,
}

/// Geometric decrease of inter-event times over the last `cfg.zeno_window`
/// ratios, with a convergent sum inside the horizon, suggests Zeno behaviour.
pub fn detect_zeno(jumps: &[Jump], horizon: f64, cfg: &Tolerances) -> ZenoReport {
    let times: Vec<f64> = jumps.iter().map(|j| j.time).collect();
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let mut report =
        ZenoReport { verdict: ZenoVerdict::Inconclusive, events: jumps.len(), ratios: Vec::new(), accumulation: None };
    if jumps.len() < cfg.zeno_min_events || gaps.len() < cfg.zeno_window + 1 {
        return report;
    }
    let tail = &gaps[gaps.len() - cfg.zeno_window - 1..];
    report.ratios = tail.windows(2).map(|w| w[1] / w[0]).collect();
    let shrinking = report.ratios.iter().all(|&r| r < 1.0 - cfg.zeno_eps);
    let steady = report.ratios.iter().all(|&r| r >= 1.0 - cfg.zeno_eps);
    if shrinking {
        let rho = report.ratios.iter().sum::<f64>() / report.ratios.len() as f64;
        let last = *tail.last().unwrap();
        let acc = times.last().unwrap() + last * rho / (1.0 - rho);
        report.accumulation = Some(acc);
        if acc <= horizon {
            report.verdict = ZenoVerdict::Zeno;
        }
    } else if steady {
        report.verdict = ZenoVerdict::NotZeno;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn jumps(times: &[f64]) -> Vec<Jump> {
        times
            .iter()
            .enumerate()
            .map(|(k, &t)| Jump { index: k + 1, time: t, pre: Point::ORIGIN, post: Point::ORIGIN })
            .collect()
    }

    #[test]
    fn geometric_times_are_zeno() {
        let times: Vec<f64> = (1..=12).map(|n| 4.0 * (1.0 - 0.5f64.powi(n))).collect();
        let z = detect_zeno(&jumps(&times), 50.0, &Tolerances::default());
        assert_eq!(z.verdict, ZenoVerdict::Zeno);
        assert!((z.accumulation.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn steady_times_are_not_zeno() {
        let times: Vec<f64> = (0..12).map(|n| n as f64).collect();
        assert_eq!(detect_zeno(&jumps(&times), 50.0, &Tolerances::default()).verdict, ZenoVerdict::NotZeno);
    }

    #[test]
    fn few_events_are_inconclusive() {
        let z = detect_zeno(&jumps(&[2.0, 3.0]), 50.0, &Tolerances::default());
        assert_eq!(z.verdict, ZenoVerdict::Inconclusive);
    }

    #[test]
    fn accumulation_beyond_horizon_is_inconclusive() {
        let times: Vec<f64> = (1..=12).map(|n| 400.0 * (1.0 - 0.9f64.powi(n))).collect();
        let z = detect_zeno(&jumps(&times), 100.0, &Tolerances::default());
        assert_eq!(z.verdict, ZenoVerdict::Inconclusive);
    }
}
