//! Monte-Carlo trials for checking a design's operating characteristics.
//!
//! Each replication accrues patients uniformly over the accrual period,
//! draws proportional-hazards event times, and runs the analyses when the
//! required numbers of events have occurred (administrative censoring at
//! each analysis). Replication `i` uses ChaCha8 seeded from `rng_seed` on
//! stream `i`, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{Decision, FixedDesign};
use crate::error::{Error, Result};
use crate::gs::GsDesign;
use crate::trial::data::{Arm, PatientRecord, TrialData};
use crate::trial::logrank::{event_contributions, theta_hat, EventContribution};

pub const RNG_ALGORITHM: &str = "chacha8:seed_from_u64:stream=replication";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EventTimeModel {
    /// Constant hazards.
    Exponential,
    /// Weibull with a shape common to both arms; `control_hazard` is the
    /// reciprocal of the control scale.
    Weibull { shape: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AnalysisTrigger {
    Final { d: u64 },
    Interim { d1: u64, d: u64 },
}

impl AnalysisTrigger {
    pub fn total_events(&self) -> u64 {
        match *self {
            AnalysisTrigger::Final { d } | AnalysisTrigger::Interim { d, .. } => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    /// True log hazard ratio, experimental over control.
    pub true_log_hr: f64,
    /// Control-arm event rate per time unit.
    pub control_hazard: f64,
    pub n_patients: u64,
    pub accrual_duration: f64,
    #[serde(rename = "r")]
    pub rand_ratio: f64,
    pub event_model: EventTimeModel,
    /// Derived from the design when absent.
    pub analysis_trigger: Option<AnalysisTrigger>,
    pub rng_seed: u64,
    pub n_replications: u64,
}

impl SimScenario {
    /// Exponential scenario with 1:1 allocation and the trigger taken from
    /// the design.
    pub fn exponential(
        true_log_hr: f64,
        control_hazard: f64,
        n_patients: u64,
        accrual_duration: f64,
        rng_seed: u64,
        n_replications: u64,
    ) -> Self {
        SimScenario {
            true_log_hr,
            control_hazard,
            n_patients,
            accrual_duration,
            rand_ratio: 1.0,
            event_model: EventTimeModel::Exponential,
            analysis_trigger: None,
            rng_seed,
            n_replications,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.true_log_hr.is_finite() {
            return Err(Error::invalid(
                "theta",
                "true log hazard ratio must be finite",
            ));
        }
        for (name, v) in [
            ("hazard", self.control_hazard),
            ("accrual", self.accrual_duration),
            ("r", self.rand_ratio),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be positive")));
            }
        }
        if let EventTimeModel::Weibull { shape } = self.event_model {
            if !(shape > 0.0 && shape.is_finite()) {
                return Err(Error::invalid("shape", format!("{shape} must be positive")));
            }
        }
        if self.n_replications == 0 {
            return Err(Error::invalid("reps", "need at least one replication"));
        }
        if self.n_patients < 2 {
            return Err(Error::invalid("n_patients", "need at least two patients"));
        }
        if let Some(t) = self.analysis_trigger {
            if let AnalysisTrigger::Interim { d1, d } = t {
                if d1 == 0 || d1 >= d {
                    return Err(Error::invalid("analysis_trigger", "need d > d1 >= 1"));
                }
            }
            let d = t.total_events();
            if d == 0 {
                return Err(Error::invalid(
                    "analysis_trigger",
                    "need at least one event",
                ));
            }
            if d > self.n_patients {
                return Err(Error::InfeasibleScenario {
                    required: d,
                    available: self.n_patients,
                });
            }
        }
        Ok(())
    }

    fn experimental_count(&self) -> u64 {
        let share = self.rand_ratio / (1.0 + self.rand_ratio);
        ((self.n_patients as f64 * share).round() as u64).clamp(1, self.n_patients - 1)
    }

    /// Patient-level data for replication `replication`, with every event
    /// time observed (cutoffs are applied at analysis).
    pub fn simulate_patients(&self, replication: u64) -> TrialData {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(replication);
        let n_exp = self.experimental_count();
        let shape = match self.event_model {
            EventTimeModel::Exponential => 1.0,
            EventTimeModel::Weibull { shape } => shape,
        };
        let hr = self.true_log_hr.exp();
        let patients = (0..self.n_patients)
            .map(|i| {
                let arm = if i < n_exp {
                    Arm::Experimental
                } else {
                    Arm::Control
                };
                let entry = rng.random::<f64>() * self.accrual_duration;
                // S(t) = exp(-(λt)^k · HR^X)  =>  t = (E / HR^X)^(1/k) / λ
                let e: f64 = rng.sample(Exp1);
                let relative = if arm == Arm::Experimental { hr } else { 1.0 };
                let t = (e / relative).powf(1.0 / shape) / self.control_hazard;
                PatientRecord {
                    arm,
                    entry_time: entry,
                    event_time: t.max(f64::MIN_POSITIVE),
                    observed: true,
                }
            })
            .collect();
        TrialData::from_trusted(patients, self.rand_ratio)
    }
}

/// A design the simulator can run: when to analyse and how to decide.
pub trait DecisionRule: Sync {
    fn rand_ratio(&self) -> f64;
    fn trigger(&self) -> AnalysisTrigger;
    /// Verdict at the interim, or `None` to continue.
    fn interim_verdict(&self, theta_hat_1: f64) -> Option<Decision>;
    fn final_verdict(&self, theta_hat: f64) -> Decision;
}

impl DecisionRule for FixedDesign {
    fn rand_ratio(&self) -> f64 {
        self.spec.rand_ratio
    }
    fn trigger(&self) -> AnalysisTrigger {
        AnalysisTrigger::Final { d: self.n_events_d }
    }
    fn interim_verdict(&self, _: f64) -> Option<Decision> {
        None
    }
    fn final_verdict(&self, theta_hat: f64) -> Decision {
        self.classify(theta_hat)
    }
}

impl DecisionRule for GsDesign {
    fn rand_ratio(&self) -> f64 {
        self.spec.base.rand_ratio
    }
    fn trigger(&self) -> AnalysisTrigger {
        AnalysisTrigger::Interim {
            d1: self.d1_interim,
            d: self.d_total,
        }
    }
    fn interim_verdict(&self, theta_hat_1: f64) -> Option<Decision> {
        self.classify_interim(theta_hat_1)
    }
    fn final_verdict(&self, theta_hat: f64) -> Decision {
        self.classify_final(theta_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Outcome {
    decision: Decision,
    stopped_at_interim: bool,
}

/// Events of one replication up to the `d`-th, with risk-set proportions.
fn first_events(data: &TrialData, d: u64) -> Result<Vec<EventContribution>> {
    let mut times: Vec<f64> = data
        .patients()
        .iter()
        .map(PatientRecord::calendar_time)
        .collect();
    let idx = (d - 1) as usize;
    let (_, cutoff, _) = times.select_nth_unstable_by(idx, f64::total_cmp);
    let events = event_contributions(data, *cutoff)?;
    debug_assert_eq!(events.len() as u64, d);
    Ok(events)
}

fn statistic(events: &[EventContribution]) -> Result<f64> {
    let (score, var) = events
        .iter()
        .fold((0.0, 0.0), |(s, v), e| (s + e.score(), v + e.variance()));
    if !(var > 0.0) {
        return Err(Error::DegenerateRiskSet);
    }
    Ok(score / var.sqrt())
}

fn run_replication(scenario: &SimScenario, rule: &dyn DecisionRule, rep: u64) -> Result<Outcome> {
    let data = scenario.simulate_patients(rep);
    let r = rule.rand_ratio();
    let (d1, d) = match rule.trigger() {
        AnalysisTrigger::Final { d } => (None, d),
        AnalysisTrigger::Interim { d1, d } => (Some(d1), d),
    };
    let events = first_events(&data, d)?;
    if let Some(d1) = d1 {
        let l1 = statistic(&events[..d1 as usize])?;
        if let Some(decision) = rule.interim_verdict(theta_hat(l1, d1, r)) {
            return Ok(Outcome {
                decision,
                stopped_at_interim: true,
            });
        }
    }
    let l = statistic(&events)?;
    Ok(Outcome {
        decision: rule.final_verdict(theta_hat(l, d, r)),
        stopped_at_interim: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub reject_h0: u64,
    pub reject_h1: u64,
    pub inconclusive: u64,
    pub stop_interim_reject_h0: u64,
    pub stop_interim_reject_h1: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub p_reject_h0: f64,
    pub p_reject_h1: f64,
    pub p_inconclusive: f64,
    pub p_stop_interim: f64,
}

/// Empirical operating characteristics. Interim stops are counted inside
/// `p_reject_h0` / `p_reject_h1` as well as in `p_stop_interim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcEstimate {
    pub p_reject_h0: f64,
    pub p_reject_h1: f64,
    pub p_inconclusive: f64,
    pub p_stop_interim: f64,
    pub p_stop_interim_reject_h0: f64,
    pub p_stop_interim_reject_h1: f64,
    pub mc_standard_errors: StandardErrors,
    /// Binomial standard errors are meaningless with a single replication.
    pub standard_errors_degenerate: bool,
    pub counts: OutcomeCounts,
    pub n_replications: u64,
    pub rng_seed: u64,
    pub rng_algorithm: String,
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn check_against_design(
    scenario: &SimScenario,
    rule: &dyn DecisionRule,
) -> Result<AnalysisTrigger> {
    scenario.validate()?;
    let trigger = rule.trigger();
    if let Some(t) = scenario.analysis_trigger {
        if t != trigger {
            return Err(Error::invalid(
                "analysis_trigger",
                format!("{t:?} does not match the design's {trigger:?}"),
            ));
        }
    }
    if (scenario.rand_ratio - rule.rand_ratio()).abs() > 1e-12 {
        return Err(Error::invalid(
            "r",
            "scenario allocation ratio differs from the design's",
        ));
    }
    let d = trigger.total_events();
    if d > scenario.n_patients {
        return Err(Error::InfeasibleScenario {
            required: d,
            available: scenario.n_patients,
        });
    }
    Ok(trigger)
}

pub fn simulate_trial(scenario: &SimScenario, design: &dyn DecisionRule) -> Result<OcEstimate> {
    check_against_design(scenario, design)?;
    let outcomes: Vec<Outcome> = (0..scenario.n_replications)
        .into_par_iter()
        .map(|rep| run_replication(scenario, design, rep))
        .collect::<Result<_>>()?;

    let mut counts = OutcomeCounts::default();
    for o in &outcomes {
        match o.decision {
            Decision::RejectH0 => counts.reject_h0 += 1,
            Decision::RejectH1 => counts.reject_h1 += 1,
            Decision::Inconclusive => counts.inconclusive += 1,
        }
        if o.stopped_at_interim {
            match o.decision {
                Decision::RejectH0 => counts.stop_interim_reject_h0 += 1,
                Decision::RejectH1 => counts.stop_interim_reject_h1 += 1,
                Decision::Inconclusive => unreachable!("interim stops always carry a verdict"),
            }
        }
    }

    let n = scenario.n_replications;
    let frac = |k: u64| k as f64 / n as f64;
    let stop = counts.stop_interim_reject_h0 + counts.stop_interim_reject_h1;
    let (p0, p1, pi, ps) = (
        frac(counts.reject_h0),
        frac(counts.reject_h1),
        frac(counts.inconclusive),
        frac(stop),
    );
    Ok(OcEstimate {
        p_reject_h0: p0,
        p_reject_h1: p1,
        p_inconclusive: pi,
        p_stop_interim: ps,
        p_stop_interim_reject_h0: frac(counts.stop_interim_reject_h0),
        p_stop_interim_reject_h1: frac(counts.stop_interim_reject_h1),
        mc_standard_errors: StandardErrors {
            p_reject_h0: binomial_se(p0, n),
            p_reject_h1: binomial_se(p1, n),
            p_inconclusive: binomial_se(pi, n),
            p_stop_interim: binomial_se(ps, n),
        },
        standard_errors_degenerate: n < 2,
        counts,
        n_replications: n,
        rng_seed: scenario.rng_seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaHatSummary {
    pub n_events: u64,
    pub n_replications: u64,
    pub mean: f64,
    /// Sample variance (n - 1 denominator).
    pub variance: f64,
    pub se_mean: f64,
    /// (1+r)²/(r·d).
    pub expected_variance: f64,
}

/// Sampling distribution of θ̂ at the scenario's final event count.
pub fn theta_hat_sampling_check(scenario: &SimScenario) -> Result<ThetaHatSummary> {
    scenario.validate()?;
    let d = scenario
        .analysis_trigger
        .ok_or_else(|| Error::invalid("analysis_trigger", "an event count is required"))?
        .total_events();
    let r = scenario.rand_ratio;
    let draws: Vec<f64> = (0..scenario.n_replications)
        .into_par_iter()
        .map(|rep| {
            let data = scenario.simulate_patients(rep);
            let events = first_events(&data, d)?;
            Ok(theta_hat(statistic(&events)?, d, r))
        })
        .collect::<Result<_>>()?;
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let variance = if draws.len() > 1 {
        draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(ThetaHatSummary {
        n_events: d,
        n_replications: scenario.n_replications,
        mean,
        variance,
        se_mean: (variance / n).sqrt(),
        expected_variance: (1.0 + r).powi(2) / (r * d as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{solve_fixed_design, DesignSpec};

    fn reference_fixed() -> FixedDesign {
        solve_fixed_design(
            &DesignSpec::new(1.0, 0.65, 0.15, 0.15, 0.75, 0.75, 1.0),
            true,
        )
        .unwrap()
    }

    #[test]
    fn reproducible_and_sums_to_one() {
        let s = SimScenario::exponential(0.0, 2f64.ln() / 6.0, 200, 12.0, 7, 500);
        let a = simulate_trial(&s, &reference_fixed()).unwrap();
        let b = simulate_trial(&s, &reference_fixed()).unwrap();
        assert_eq!(a, b);
        let c = a.counts;
        assert_eq!(c.reject_h0 + c.reject_h1 + c.inconclusive, 500);
        assert_eq!(a.p_stop_interim, 0.0);
        let mut s2 = s;
        s2.rng_seed = 8;
        assert_ne!(simulate_trial(&s2, &reference_fixed()).unwrap().counts, c);
    }

    #[test]
    fn single_replication() {
        let s = SimScenario::exponential(0.0, 0.1, 100, 12.0, 1, 1);
        let oc = simulate_trial(&s, &reference_fixed()).unwrap();
        for p in [oc.p_reject_h0, oc.p_reject_h1, oc.p_inconclusive] {
            assert!(p == 0.0 || p == 1.0);
        }
        assert!(oc.standard_errors_degenerate);
        assert_eq!(oc.mc_standard_errors.p_reject_h0, 0.0);
    }

    #[test]
    fn too_few_patients() {
        let s = SimScenario::exponential(0.0, 0.1, 50, 12.0, 1, 10);
        assert_eq!(
            simulate_trial(&s, &reference_fixed()).unwrap_err(),
            Error::InfeasibleScenario {
                required: 64,
                available: 50
            }
        );
    }

    #[test]
    fn mismatched_trigger_or_ratio() {
        let mut s = SimScenario::exponential(0.0, 0.1, 100, 12.0, 1, 10);
        s.analysis_trigger = Some(AnalysisTrigger::Final { d: 60 });
        assert!(simulate_trial(&s, &reference_fixed()).is_err());
        let mut s = SimScenario::exponential(0.0, 0.1, 100, 12.0, 1, 10);
        s.rand_ratio = 2.0;
        assert!(simulate_trial(&s, &reference_fixed()).is_err());
    }

    #[test]
    fn allocation_follows_ratio() {
        let mut s = SimScenario::exponential(0.0, 0.1, 90, 12.0, 1, 1);
        s.rand_ratio = 2.0;
        let data = s.simulate_patients(0);
        let n_exp = data
            .patients()
            .iter()
            .filter(|p| p.arm == Arm::Experimental)
            .count();
        assert_eq!(n_exp, 60);
    }

    #[test]
    fn weibull_shape_validated() {
        let mut s = SimScenario::exponential(0.0, 0.1, 100, 12.0, 1, 10);
        s.event_model = EventTimeModel::Weibull { shape: 0.0 };
        assert!(s.validate().is_err());
    }
}
