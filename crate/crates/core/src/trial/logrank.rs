//! Log-rank statistic over calendar-time risk sets.
//!
//! A patient is at risk just before calendar time `c` when they entered
//! before `c` and their event or censoring has not happened before `c`.
//! Observation stops at the analysis cutoff: later events are treated as
//! censored at the cutoff and later entrants are excluded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trial::data::{Arm, TrialData};

/// One observed event and the experimental share of its risk set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventContribution {
    pub calendar_time: f64,
    pub arm: Arm,
    /// p_j: fraction of the at-risk patients who are on the experimental arm.
    pub p_experimental: f64,
}

impl EventContribution {
    pub fn score(&self) -> f64 {
        self.arm.indicator() - self.p_experimental
    }

    pub fn variance(&self) -> f64 {
        self.p_experimental * (1.0 - self.p_experimental)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRankResult {
    /// L: standardized log-rank statistic.
    pub statistic: f64,
    pub n_events: u64,
    /// θ̂ = (1+r)/√(r·d) · L.
    pub theta_hat: f64,
    /// Σ (X_j - p_j).
    pub score: f64,
    /// Σ p_j (1 - p_j).
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRankIncrements {
    pub l1: f64,
    pub l2: f64,
    pub theta_hat_1: f64,
    pub theta_hat_2: f64,
    pub d1: u64,
    pub d2: u64,
}

/// Estimator θ̂ from a standardized statistic.
pub fn theta_hat(statistic: f64, events: u64, rand_ratio: f64) -> f64 {
    (1.0 + rand_ratio) / (rand_ratio * events as f64).sqrt() * statistic
}

fn count_before(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&x| x < t)
}

/// Observed events up to `cutoff`, ordered by calendar time, with their
/// risk-set proportions.
pub fn event_contributions(data: &TrialData, cutoff: f64) -> Result<Vec<EventContribution>> {
    if cutoff.is_nan() {
        return Err(Error::invalid("cutoff", "NaN cutoff"));
    }
    // [control, experimental]
    let mut entries: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut exits: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut events = Vec::new();
    for p in data.patients() {
        if p.entry_time >= cutoff {
            continue;
        }
        let k = p.arm.indicator() as usize;
        let end = p.calendar_time();
        entries[k].push(p.entry_time);
        exits[k].push(end.min(cutoff));
        if p.observed && end <= cutoff {
            events.push((end, p.arm));
        }
    }
    for v in entries.iter_mut().chain(exits.iter_mut()) {
        v.sort_by(f64::total_cmp);
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = events.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::TiedEventTimes { time: w[0].0 });
    }

    Ok(events
        .into_iter()
        .map(|(t, arm)| {
            let at_risk = |k: usize| count_before(&entries[k], t) - count_before(&exits[k], t);
            let (n0, n1) = (at_risk(0), at_risk(1));
            EventContribution {
                calendar_time: t,
                arm,
                p_experimental: n1 as f64 / (n0 + n1) as f64,
            }
        })
        .collect())
}

fn standardize(events: &[EventContribution], rand_ratio: f64) -> Result<LogRankResult> {
    if events.is_empty() {
        return Err(Error::UndefinedStatistic("no observed events".into()));
    }
    let score: f64 = events.iter().map(EventContribution::score).sum();
    let variance: f64 = events.iter().map(EventContribution::variance).sum();
    if !(variance > 0.0) {
        return Err(Error::DegenerateRiskSet);
    }
    let statistic = score / variance.sqrt();
    let n = events.len() as u64;
    Ok(LogRankResult {
        statistic,
        n_events: n,
        theta_hat: theta_hat(statistic, n, rand_ratio),
        score,
        variance,
    })
}

pub fn log_rank(data: &TrialData, cutoff: f64) -> Result<LogRankResult> {
    let events = event_contributions(data, cutoff)?;
    standardize(&events, data.rand_ratio())
}

/// Separate statistics for the events up to `cutoff_interim` and those
/// between the two cutoffs. Risk sets always come from the full data.
pub fn log_rank_increment(
    data: &TrialData,
    cutoff_interim: f64,
    cutoff_final: f64,
) -> Result<LogRankIncrements> {
    if !(cutoff_interim < cutoff_final) {
        return Err(Error::invalid(
            "cutoff_interim",
            "interim cutoff must precede the final cutoff",
        ));
    }
    let events = event_contributions(data, cutoff_final)?;
    let split = events.partition_point(|e| e.calendar_time <= cutoff_interim);
    let (first, second) = events.split_at(split);
    let r = data.rand_ratio();
    let one =
        standardize(first, r).map_err(|e| relabel(e, "no events before the interim cutoff"))?;
    let two = standardize(second, r)
        .map_err(|e| relabel(e, "no events between the interim and final cutoffs"))?;
    Ok(LogRankIncrements {
        l1: one.statistic,
        l2: two.statistic,
        theta_hat_1: one.theta_hat,
        theta_hat_2: two.theta_hat,
        d1: one.n_events,
        d2: two.n_events,
    })
}

fn relabel(e: Error, reason: &str) -> Error {
    match e {
        Error::UndefinedStatistic(_) => Error::UndefinedStatistic(reason.into()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial::data::PatientRecord;

    fn rec(arm: u8, entry: f64, time: f64, observed: bool) -> PatientRecord {
        PatientRecord {
            arm: Arm::from_indicator(arm).unwrap(),
            entry_time: entry,
            event_time: time,
            observed,
        }
    }

    #[test]
    fn two_patient_example() {
        let data =
            TrialData::new(vec![rec(1, 0.0, 1.0, true), rec(0, 0.0, 2.0, false)], 1.0).unwrap();
        let r = log_rank(&data, 10.0).unwrap();
        assert_eq!(r.n_events, 1);
        assert!((r.statistic - 1.0).abs() < 1e-15);
        assert!((r.theta_hat - 2.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let data =
            TrialData::new(vec![rec(1, 0.0, 5.0, true), rec(0, 0.0, 6.0, true)], 1.0).unwrap();
        assert_eq!(
            log_rank(&data, 1.0).unwrap_err().code(),
            "undefined-statistic"
        );
        // Only one patient at risk: p = 1, zero variance.
        let data = TrialData::new(vec![rec(1, 0.0, 1.0, true)], 1.0).unwrap();
        assert_eq!(
            log_rank(&data, 2.0).unwrap_err().code(),
            "degenerate-risk-set"
        );
        let data = TrialData::new(
            vec![
                rec(1, 0.0, 1.0, true),
                rec(0, 0.5, 0.5, true),
                rec(0, 0.0, 3.0, true),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(log_rank(&data, 5.0).unwrap_err().code(), "tied-event-times");
    }

    #[test]
    fn staggered_entry_risk_sets() {
        // Patient 2 enters after the first event and must not be counted then.
        let data = TrialData::new(
            vec![
                rec(1, 0.0, 1.0, true),
                rec(0, 0.0, 4.0, true),
                rec(1, 2.0, 1.0, true),
                rec(0, 0.0, 10.0, true),
            ],
            1.0,
        )
        .unwrap();
        let ev = event_contributions(&data, 5.0).unwrap();
        assert_eq!(ev.len(), 3);
        assert!((ev[0].p_experimental - 1.0 / 3.0).abs() < 1e-15);
        assert!((ev[1].p_experimental - 1.0 / 3.0).abs() < 1e-15);
        assert!((ev[2].p_experimental - 0.0).abs() < 1e-15);
        // Cutoff censors the last control patient and drops the late event.
        let ev = event_contributions(&data, 3.5).unwrap();
        assert_eq!(ev.len(), 2);
    }

    #[test]
    fn increments_partition() {
        let data = TrialData::new(
            vec![
                rec(1, 0.0, 1.0, true),
                rec(0, 0.0, 2.0, true),
                rec(1, 0.0, 3.0, true),
                rec(0, 0.0, 4.0, true),
                rec(1, 0.0, 9.0, false),
                rec(0, 0.0, 9.5, false),
            ],
            1.0,
        )
        .unwrap();
        let inc = log_rank_increment(&data, 2.5, 5.0).unwrap();
        assert_eq!((inc.d1, inc.d2), (2, 2));
        let interim = log_rank(&data, 2.5).unwrap();
        assert!((inc.l1 - interim.statistic).abs() < 1e-15);
        assert_eq!(
            log_rank_increment(&data, 4.5, 5.0).unwrap_err().code(),
            "undefined-statistic"
        );
    }
}
