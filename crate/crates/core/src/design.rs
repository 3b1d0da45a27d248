//! Fixed-sample (no interim) three-outcome design.
//!
//! The estimator `θ̂ = (1+r)/√(rd) · L` is treated as `N(θ, (1+r)²/(rd))`.
//! Two boundaries split its range into three verdicts: reject H0 below the
//! lower boundary, reject H1 above the upper boundary, inconclusive between.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{std_normal_cdf, std_normal_sf, Probability};

/// Slack used when checking that gray-zone probabilities are nonnegative, so
/// decimal inputs such as `0.15 + 0.85` are not rejected by rounding.
const GRAY_ZONE_SLACK: f64 = 1e-12;

fn one() -> f64 {
    1.0
}

/// Hypotheses, operating-characteristic targets and allocation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    /// Hazard ratio under H0.
    pub hr0: f64,
    /// Hazard ratio under H1; must be below `hr0`.
    pub hr1: f64,
    /// Maximum false positive rate, P(reject H0 | H0).
    pub alpha: f64,
    /// Maximum false negative rate, P(reject H1 | H1).
    pub beta: f64,
    /// Minimum power, P(reject H0 | H1).
    pub pi: f64,
    /// Minimum correct negative rate, P(reject H1 | H0).
    pub eta: f64,
    /// Experimental:control allocation `r:1`.
    #[serde(rename = "r", default = "one")]
    pub rand_ratio: f64,
}

impl DesignSpec {
    pub fn new(hr0: f64, hr1: f64, alpha: f64, beta: f64, pi: f64, eta: f64, r: f64) -> Self {
        DesignSpec {
            hr0,
            hr1,
            alpha,
            beta,
            pi,
            eta,
            rand_ratio: r,
        }
    }

    /// Log hazard ratio under H0.
    pub fn theta0(&self) -> f64 {
        self.hr0.ln()
    }

    /// Log hazard ratio under H1.
    pub fn theta1(&self) -> f64 {
        self.hr1.ln()
    }

    /// `(1+r)/√r`; the standard deviation of θ̂ at `d` events is this over `√d`.
    pub fn scale(&self) -> f64 {
        (1.0 + self.rand_ratio) / self.rand_ratio.sqrt()
    }

    /// Standard deviation of θ̂ after `events` events.
    pub fn estimator_sd(&self, events: f64) -> f64 {
        self.scale() / events.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("pi", self.pi),
            ("eta", self.eta),
        ] {
            Probability::new(value).map_err(|_| {
                Error::invalid(name, format!("{value} is not strictly between 0 and 1"))
            })?;
        }
        for (name, value) in [("hr0", self.hr0), ("hr1", self.hr1), ("r", self.rand_ratio)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("{value} must be positive and finite"),
                ));
            }
        }
        if self.hr1 >= self.hr0 {
            return Err(Error::HypothesisOrdering {
                hr0: self.hr0,
                hr1: self.hr1,
            });
        }
        if self.alpha + self.eta > 1.0 + GRAY_ZONE_SLACK {
            return Err(Error::InfeasibleGrayZone {
                which: "alpha + eta",
                sum: self.alpha + self.eta,
            });
        }
        if self.beta + self.pi > 1.0 + GRAY_ZONE_SLACK {
            return Err(Error::InfeasibleGrayZone {
                which: "beta + pi",
                sum: self.beta + self.pi,
            });
        }
        if self.pi <= self.alpha {
            return Err(Error::invalid("pi", "power must exceed alpha"));
        }
        if self.eta <= self.beta {
            return Err(Error::invalid(
                "eta",
                "correct negative rate must exceed beta",
            ));
        }
        Ok(())
    }

    /// True when both gray-zone probabilities are zero.
    pub fn is_two_outcome(&self) -> bool {
        (1.0 - self.alpha - self.eta).abs() <= GRAY_ZONE_SLACK
            && (1.0 - self.beta - self.pi).abs() <= GRAY_ZONE_SLACK
    }
}

pub fn validate_spec(spec: DesignSpec) -> Result<DesignSpec> {
    spec.validate()?;
    Ok(spec)
}

/// Unrounded event counts implied by each pair of constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawEventCounts {
    /// From (alpha, pi); accompanies the lower boundary.
    pub d_lower: f64,
    /// From (beta, eta); accompanies the upper boundary.
    pub d_upper: f64,
}

pub fn raw_event_counts(spec: &DesignSpec) -> Result<RawEventCounts> {
    spec.validate()?;
    let z = ZScores::of(spec);
    let gap = spec.theta0() - spec.theta1();
    let k = spec.scale();
    Ok(RawEventCounts {
        d_lower: ((z.pi - z.alpha) * k / gap).powi(2),
        d_upper: ((z.eta - z.beta) * k / gap).powi(2),
    })
}

#[derive(Debug, Clone, Copy)]
struct ZScores {
    alpha: f64,
    beta: f64,
    pi: f64,
    eta: f64,
}

impl ZScores {
    fn of(spec: &DesignSpec) -> Self {
        let z = |p: f64| Probability::new(p).expect("validated").z();
        ZScores {
            alpha: z(spec.alpha),
            beta: z(spec.beta),
            pi: z(spec.pi),
            eta: z(spec.eta),
        }
    }
}

/// Verdict of a three-outcome analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    RejectH0,
    RejectH1,
    Inconclusive,
}

/// Three-way split of θ̂ given a lower and an upper boundary.
pub fn classify(theta_hat: f64, lower: f64, upper: f64) -> Decision {
    if theta_hat < lower {
        Decision::RejectH0
    } else if theta_hat > upper {
        Decision::RejectH1
    } else {
        Decision::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedDesign {
    /// Required events, rounded up to a whole number.
    pub n_events_d: u64,
    /// Balanced event count before any final ceiling; equals `n_events_d`
    /// when the design was solved with rounding.
    pub n_events_exact: f64,
    /// θ̃₀: reject H1 when θ̂ exceeds it.
    pub boundary_upper_loghr: f64,
    /// θ̃₁: reject H0 when θ̂ falls below it.
    pub boundary_lower_loghr: f64,
    pub boundary_upper_hr: f64,
    pub boundary_lower_hr: f64,
    pub achieved_alpha: f64,
    pub achieved_beta: f64,
    pub achieved_pi: f64,
    pub achieved_eta: f64,
    pub raw: RawEventCounts,
    pub round_events: bool,
    /// The gray zone has zero probability under both hypotheses.
    pub two_outcome_equivalent: bool,
    pub spec: DesignSpec,
}

impl FixedDesign {
    /// Analytic `(P(reject H0), P(reject H1))` when the true log hazard
    /// ratio is `theta`.
    pub fn rejection_probabilities(&self, theta: f64) -> (f64, f64) {
        let sd = self.spec.estimator_sd(self.n_events_exact);
        (
            std_normal_cdf((self.boundary_lower_loghr - theta) / sd),
            std_normal_sf((self.boundary_upper_loghr - theta) / sd),
        )
    }

    pub fn classify(&self, theta_hat: f64) -> Decision {
        classify(
            theta_hat,
            self.boundary_lower_loghr,
            self.boundary_upper_loghr,
        )
    }
}

/// Minimum-event three-outcome design.
///
/// Each pair of constraints, (alpha, pi) and (beta, eta), implies its own
/// event count. With `round_events` both are first ceiled and the free rate
/// of each pair (pi, respectively beta) recomputed at the ceiled count. The
/// smaller count is then raised to the larger one by lowering beta or raising
/// pi, so every constraint holds at a single `d`. Alpha and eta are never
/// adjusted.
pub fn solve_fixed_design(spec: &DesignSpec, round_events: bool) -> Result<FixedDesign> {
    let raw = raw_event_counts(spec)?;
    let z = ZScores::of(spec);
    let (theta0, theta1) = (spec.theta0(), spec.theta1());
    let gap = theta0 - theta1;
    let k = spec.scale();

    let pi_at = |d: f64| z.alpha + d.sqrt() * gap / k;
    let beta_at = |d: f64| z.eta - d.sqrt() * gap / k;

    let (mut d_lower, mut d_upper) = (raw.d_lower, raw.d_upper);
    let (mut z_pi, mut z_beta) = (z.pi, z.beta);
    if round_events {
        d_lower = d_lower.ceil();
        z_pi = pi_at(d_lower);
        d_upper = d_upper.ceil();
        z_beta = beta_at(d_upper);
    }
    if d_lower > d_upper {
        z_beta = beta_at(d_lower);
    } else if d_upper > d_lower {
        z_pi = pi_at(d_upper);
    }
    let events = d_lower.max(d_upper);

    let lower = (z_pi * theta0 - z.alpha * theta1) / (z_pi - z.alpha);
    let upper = (z.eta * theta1 - z_beta * theta0) / (z.eta - z_beta);

    Ok(FixedDesign {
        n_events_d: events.ceil() as u64,
        n_events_exact: events,
        boundary_upper_loghr: upper,
        boundary_lower_loghr: lower,
        boundary_upper_hr: upper.exp(),
        boundary_lower_hr: lower.exp(),
        achieved_alpha: spec.alpha,
        achieved_beta: std_normal_cdf(z_beta),
        achieved_pi: std_normal_cdf(z_pi),
        achieved_eta: spec.eta,
        raw,
        round_events,
        two_outcome_equivalent: spec.is_two_outcome(),
        spec: *spec,
    })
}

pub fn classify_outcome(design: &FixedDesign, theta_hat: f64) -> Decision {
    design.classify(theta_hat)
}
