//! Randomized three-outcome time-to-event trial designs.
//!
//! A three-outcome design ends with one of three verdicts: reject H0
//! (promising), reject H1 (not promising), or inconclusive. This crate
//! computes the minimum number of events and the decision boundaries for
//! such designs, with or without one interim analysis, and simulates trials
//! to check their operating characteristics.
//!
//! ```
//! use tte3o_core::{solve_fixed_design, DesignSpec};
//!
//! let spec = DesignSpec::new(1.0, 0.65, 0.15, 0.15, 0.75, 0.75, 1.0);
//! let design = solve_fixed_design(&spec, true).unwrap();
//! assert_eq!(design.n_events_d, 64);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod gs;
pub mod numeric;
pub mod trial;

pub use design::{
    classify_outcome, raw_event_counts, solve_fixed_design, validate_spec, Decision, DesignSpec,
    FixedDesign, RawEventCounts,
};
pub use error::{Error, ErrorClass, Result};
pub use gs::{
    continue_and_reject_h0_prob, continue_and_reject_h1_prob, evaluate_candidate,
    interim_boundaries, solve_final_boundaries, solve_gs_design, FinalBoundaries, GsCandidate,
    GsDesign, GsSpec, InterimBoundaries, StagewiseProbabilities,
};
