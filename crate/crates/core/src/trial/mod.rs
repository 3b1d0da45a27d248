//! Patient-level trial data, the log-rank statistic, and a Monte-Carlo
//! simulator used to check designs empirically.

pub mod data;
pub mod logrank;
pub mod simulate;

pub use data::{Arm, PatientRecord, TrialData};
pub use logrank::{
    event_contributions, log_rank, log_rank_increment, theta_hat, EventContribution,
    LogRankIncrements, LogRankResult,
};
pub use simulate::{
    simulate_trial, theta_hat_sampling_check, AnalysisTrigger, DecisionRule, EventTimeModel,
    OcEstimate, OutcomeCounts, SimScenario, StandardErrors, ThetaHatSummary, RNG_ALGORITHM,
};
