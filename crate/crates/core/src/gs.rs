//! Three-outcome design with a single interim analysis.
//!
//! At the interim, after `d1` events, θ̂₁ is compared with the interim
//! boundaries; crossing either one stops the trial with a verdict. Otherwise
//! the final analysis at `d` events uses the pooled estimator
//! `θ̂ = (d1/d)·θ̂₁ + (d2/d)·θ̂₂`, where the increments θ̂₁ and θ̂₂ are
//! independent normals with variances `(1+r)²/(r·d_k)`.
//!
//! Interim boundaries follow directly from the interim spending levels
//! (alpha1, beta1). Final boundaries are found by root finding on the
//! continuation probabilities, and the minimum `d` by integer binary search
//! on study-wise power and correct-negative rate.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::design::{classify, solve_fixed_design, Decision, DesignSpec};
use crate::error::{Error, Result};
use crate::numeric::{
    bracket_root, integrate, std_normal_cdf, std_normal_pdf, std_normal_sf, Probability,
    QuadratureSettings,
};

const BOUNDARY_TOLERANCE: f64 = 1e-10;
const SEARCH_SPAN: u64 = 100;
// Two-outcome specs put both final boundaries at the same point.
const CROSSING_SLACK: f64 = 1e-8;

fn quadrature() -> QuadratureSettings {
    QuadratureSettings {
        absolute_tolerance: 1e-11,
        max_subdivisions: 400,
        truncation_sigmas: 8.5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsSpec {
    pub base: DesignSpec,
    /// Information fraction `d1/d` at which the interim is run.
    pub t1: f64,
    /// False positive rate spent at the interim; 0 disables efficacy stopping.
    pub alpha1: f64,
    /// False negative rate spent at the interim; 0 disables futility stopping.
    pub beta1: f64,
}

impl GsSpec {
    pub fn new(base: DesignSpec, t1: f64, alpha1: f64, beta1: f64) -> Self {
        GsSpec {
            base,
            t1,
            alpha1,
            beta1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.t1 > 0.0 && self.t1 < 1.0) {
            return Err(Error::invalid(
                "t1",
                format!("{} must lie in (0, 1)", self.t1),
            ));
        }
        for (name, spent, total) in [
            ("alpha1", self.alpha1, self.base.alpha),
            ("beta1", self.beta1, self.base.beta),
        ] {
            if !(spent >= 0.0) || !spent.is_finite() {
                return Err(Error::invalid(name, format!("{spent} must be nonnegative")));
            }
            if spent >= total {
                return Err(Error::SpendingExceedsTotal { name, spent, total });
            }
        }
        Ok(())
    }

    /// Interim event count for a total of `d`: `t1·d` rounded half up.
    pub fn interim_events(&self, d: u64) -> u64 {
        (self.t1 * d as f64 + 0.5).floor() as u64
    }
}

/// Interim decision boundaries on the log hazard ratio scale.
///
/// `lower` is −∞ when no false positive rate is spent at the interim and
/// `upper` is +∞ when no false negative rate is spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterimBoundaries {
    pub lower: f64,
    pub upper: f64,
}

pub fn interim_boundaries(spec: &GsSpec, d1: u64) -> Result<InterimBoundaries> {
    spec.validate()?;
    if d1 == 0 {
        return Err(Error::invalid("d1", "interim needs at least one event"));
    }
    let sd1 = spec.base.estimator_sd(d1 as f64);
    let lower = if spec.alpha1 == 0.0 {
        f64::NEG_INFINITY
    } else {
        spec.base.theta0() + Probability::new(spec.alpha1)?.z() * sd1
    };
    let upper = if spec.beta1 == 0.0 {
        f64::INFINITY
    } else {
        spec.base.theta1() - Probability::new(spec.beta1)?.z() * sd1
    };
    Ok(InterimBoundaries { lower, upper })
}

#[derive(Debug, Clone, Copy)]
struct Stages {
    d: f64,
    d1: f64,
    d2: f64,
    sd1: f64,
    sd2: f64,
}

impl Stages {
    fn new(spec: &GsSpec, d: u64, d1: u64) -> Result<Self> {
        if d1 == 0 || d1 >= d {
            return Err(Error::invalid(
                "d1",
                format!("need d > d1 >= 1, got d = {d}, d1 = {d1}"),
            ));
        }
        let d2 = d - d1;
        Ok(Stages {
            d: d as f64,
            d1: d1 as f64,
            d2: d2 as f64,
            sd1: spec.base.estimator_sd(d1 as f64),
            sd2: spec.base.estimator_sd(d2 as f64),
        })
    }

    /// ∫ over the continuation region of f₁(x₁|θ)·tail(x₁) dx₁.
    fn continuation_integral<T>(
        &self,
        theta: f64,
        interim: &InterimBoundaries,
        tail: T,
    ) -> Result<f64>
    where
        T: Fn(f64) -> f64,
    {
        let settings = quadrature();
        let reach = settings.truncation_sigmas * self.sd1;
        let lo = interim.lower.max(theta - reach);
        let hi = interim.upper.min(theta + reach);
        if !(lo < hi) {
            return Ok(0.0);
        }
        let sd1 = self.sd1;
        let value = integrate(
            |x| std_normal_pdf((x - theta) / sd1) / sd1 * tail(x),
            lo,
            hi,
            None,
            &settings,
        )?;
        Ok(value.clamp(0.0, 1.0))
    }

    /// Second-stage standardized threshold for a final boundary `b` given θ̂₁ = x.
    fn z2(&self, boundary: f64, x: f64, theta: f64) -> f64 {
        ((self.d * boundary - self.d1 * x) / self.d2 - theta) / self.sd2
    }

    fn reject_h0(&self, theta: f64, interim: &InterimBoundaries, final_lower: f64) -> Result<f64> {
        if final_lower == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        self.continuation_integral(theta, interim, |x| {
            std_normal_cdf(self.z2(final_lower, x, theta))
        })
    }

    fn reject_h1(&self, theta: f64, interim: &InterimBoundaries, final_upper: f64) -> Result<f64> {
        if final_upper == f64::INFINITY {
            return Ok(0.0);
        }
        self.continuation_integral(theta, interim, |x| {
            std_normal_sf(self.z2(final_upper, x, theta))
        })
    }

    fn stop_interim(&self, theta: f64, interim: &InterimBoundaries) -> (f64, f64) {
        let below = if interim.lower == f64::NEG_INFINITY {
            0.0
        } else {
            std_normal_cdf((interim.lower - theta) / self.sd1)
        };
        let above = if interim.upper == f64::INFINITY {
            0.0
        } else {
            std_normal_sf((interim.upper - theta) / self.sd1)
        };
        (below, above)
    }
}

/// A(θ): probability of continuing past the interim and then rejecting H0
/// at the final analysis.
pub fn continue_and_reject_h0_prob(
    theta: f64,
    d: u64,
    d1: u64,
    interim: &InterimBoundaries,
    final_lower: f64,
    spec: &GsSpec,
) -> Result<f64> {
    Stages::new(spec, d, d1)?.reject_h0(theta, interim, final_lower)
}

/// B(θ): probability of continuing past the interim and then rejecting H1
/// at the final analysis.
pub fn continue_and_reject_h1_prob(
    theta: f64,
    d: u64,
    d1: u64,
    interim: &InterimBoundaries,
    final_upper: f64,
    spec: &GsSpec,
) -> Result<f64> {
    Stages::new(spec, d, d1)?.reject_h1(theta, interim, final_upper)
}

/// Final-analysis boundaries on the log hazard ratio scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalBoundaries {
    pub lower: f64,
    pub upper: f64,
}

fn solve_boundary<F>(target: f64, bracket: (f64, f64), prob: F, name: &str) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let g = |b: f64| match prob(b) {
        Ok(p) => p - target,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let found = bracket_root(g, bracket.0, bracket.1, BOUNDARY_TOLERANCE);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    match found {
        Ok(b) => Ok(b.root),
        Err(Error::Bracketing { .. }) => Err(Error::InfeasibleDesign(format!(
            "final {name} boundary not bracketed in [{}, {}] for target {target}",
            bracket.0, bracket.1
        ))),
        Err(e) => Err(e),
    }
}

pub fn solve_final_boundaries(spec: &GsSpec, d: u64) -> Result<FinalBoundaries> {
    spec.validate()?;
    let d1 = spec.interim_events(d);
    let stages = Stages::new(spec, d, d1)?;
    let interim = interim_boundaries(spec, d1)?;
    if !(interim.lower < interim.upper) {
        return Err(Error::InfeasibleDesign(format!(
            "interim boundaries cross at d1 = {d1}"
        )));
    }
    let (theta0, theta1) = (spec.base.theta0(), spec.base.theta1());
    let reach = 10.0 * spec.base.estimator_sd(d as f64);
    let bracket = (theta1 - reach, theta0 + reach);

    let lower = solve_boundary(
        spec.base.alpha - spec.alpha1,
        bracket,
        |b| stages.reject_h0(theta0, &interim, b),
        "lower",
    )?;
    let upper = solve_boundary(
        spec.base.beta - spec.beta1,
        bracket,
        |b| stages.reject_h1(theta1, &interim, b),
        "upper",
    )?;
    if lower > upper + CROSSING_SLACK {
        return Err(Error::InfeasibleDesign(format!(
            "final boundaries cross at d = {d} ({lower} > {upper})"
        )));
    }
    Ok(FinalBoundaries { lower, upper })
}

/// Probabilities of every terminal verdict at a given true θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagewiseProbabilities {
    pub reject_h0_interim: f64,
    pub reject_h1_interim: f64,
    pub reject_h0_final: f64,
    pub reject_h1_final: f64,
    pub inconclusive: f64,
}

impl StagewiseProbabilities {
    pub fn reject_h0(&self) -> f64 {
        self.reject_h0_interim + self.reject_h0_final
    }

    pub fn reject_h1(&self) -> f64 {
        self.reject_h1_interim + self.reject_h1_final
    }

    pub fn stop_interim(&self) -> f64 {
        self.reject_h0_interim + self.reject_h1_interim
    }
}

fn stagewise(
    stages: &Stages,
    theta: f64,
    interim: &InterimBoundaries,
    fin: &FinalBoundaries,
) -> Result<StagewiseProbabilities> {
    let (below, above) = stages.stop_interim(theta, interim);
    let a = stages.reject_h0(theta, interim, fin.lower)?;
    let b = stages.reject_h1(theta, interim, fin.upper)?;
    Ok(StagewiseProbabilities {
        reject_h0_interim: below,
        reject_h1_interim: above,
        reject_h0_final: a,
        reject_h1_final: b,
        inconclusive: (1.0 - below - above - a - b).max(0.0),
    })
}

/// Fully evaluated design at one candidate total event count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsCandidate {
    pub d: u64,
    pub d1: u64,
    pub interim: InterimBoundaries,
    pub final_boundaries: FinalBoundaries,
    /// Study-wise power π(d).
    pub pi: f64,
    /// Study-wise correct negative rate η(d).
    pub eta: f64,
}

pub fn evaluate_candidate(spec: &GsSpec, d: u64) -> Result<GsCandidate> {
    let fin = solve_final_boundaries(spec, d)?;
    let d1 = spec.interim_events(d);
    let stages = Stages::new(spec, d, d1)?;
    let interim = interim_boundaries(spec, d1)?;
    let under_h1 = stagewise(&stages, spec.base.theta1(), &interim, &fin)?;
    let under_h0 = stagewise(&stages, spec.base.theta0(), &interim, &fin)?;
    Ok(GsCandidate {
        d,
        d1,
        interim,
        final_boundaries: fin,
        pi: under_h1.reject_h0(),
        eta: under_h0.reject_h1(),
    })
}

mod extended {
    //! JSON has no infinities; an infinite interim boundary is written as null.
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn lower<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }

    pub fn upper<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsDesign {
    pub d_total: u64,
    pub d1_interim: u64,
    pub d2_post: u64,
    /// θ̃₀⁽¹⁾: stop for futility (reject H1) when θ̂₁ exceeds it.
    #[serde(
        serialize_with = "extended::serialize",
        deserialize_with = "extended::upper"
    )]
    pub interim_upper_loghr: f64,
    /// θ̃₁⁽¹⁾: stop for efficacy (reject H0) when θ̂₁ falls below it.
    #[serde(
        serialize_with = "extended::serialize",
        deserialize_with = "extended::lower"
    )]
    pub interim_lower_loghr: f64,
    pub final_upper_loghr: f64,
    pub final_lower_loghr: f64,
    #[serde(
        serialize_with = "extended::serialize",
        deserialize_with = "extended::upper"
    )]
    pub interim_upper_hr: f64,
    #[serde(
        serialize_with = "extended::serialize",
        deserialize_with = "extended::lower"
    )]
    pub interim_lower_hr: f64,
    pub final_upper_hr: f64,
    pub final_lower_hr: f64,
    pub achieved_alpha: f64,
    pub achieved_beta: f64,
    pub achieved_pi: f64,
    pub achieved_eta: f64,
    /// Probability of stopping at the interim under H1 and under H0.
    pub stop_interim_h1: f64,
    pub stop_interim_h0: f64,
    /// Set when π(d), η(d) were not monotone over the evaluated candidates
    /// and the minimum was located by linear scan instead.
    pub linear_scan_fallback: bool,
    pub spec: GsSpec,
}

impl GsDesign {
    pub fn interim(&self) -> InterimBoundaries {
        InterimBoundaries {
            lower: self.interim_lower_loghr,
            upper: self.interim_upper_loghr,
        }
    }

    pub fn final_boundaries(&self) -> FinalBoundaries {
        FinalBoundaries {
            lower: self.final_lower_loghr,
            upper: self.final_upper_loghr,
        }
    }

    /// Verdict at the interim, or `None` to continue.
    pub fn classify_interim(&self, theta_hat_1: f64) -> Option<Decision> {
        match classify(
            theta_hat_1,
            self.interim_lower_loghr,
            self.interim_upper_loghr,
        ) {
            Decision::Inconclusive => None,
            stop => Some(stop),
        }
    }

    pub fn classify_final(&self, theta_hat: f64) -> Decision {
        classify(theta_hat, self.final_lower_loghr, self.final_upper_loghr)
    }

    /// Analytic verdict probabilities when the true log hazard ratio is `theta`.
    pub fn stagewise_probabilities(&self, theta: f64) -> Result<StagewiseProbabilities> {
        let stages = Stages::new(&self.spec, self.d_total, self.d1_interim)?;
        stagewise(&stages, theta, &self.interim(), &self.final_boundaries())
    }

    fn from_candidate(spec: &GsSpec, c: &GsCandidate, linear_scan_fallback: bool) -> Result<Self> {
        let stages = Stages::new(spec, c.d, c.d1)?;
        let h0 = stagewise(&stages, spec.base.theta0(), &c.interim, &c.final_boundaries)?;
        let h1 = stagewise(&stages, spec.base.theta1(), &c.interim, &c.final_boundaries)?;
        Ok(GsDesign {
            d_total: c.d,
            d1_interim: c.d1,
            d2_post: c.d - c.d1,
            interim_upper_loghr: c.interim.upper,
            interim_lower_loghr: c.interim.lower,
            final_upper_loghr: c.final_boundaries.upper,
            final_lower_loghr: c.final_boundaries.lower,
            interim_upper_hr: c.interim.upper.exp(),
            interim_lower_hr: c.interim.lower.exp(),
            final_upper_hr: c.final_boundaries.upper.exp(),
            final_lower_hr: c.final_boundaries.lower.exp(),
            achieved_alpha: h0.reject_h0(),
            achieved_beta: h1.reject_h1(),
            achieved_pi: c.pi,
            achieved_eta: c.eta,
            stop_interim_h1: h1.stop_interim(),
            stop_interim_h0: h0.stop_interim(),
            linear_scan_fallback,
            spec: *spec,
        })
    }
}

struct Search<'a> {
    spec: &'a GsSpec,
    seen: BTreeMap<u64, Option<GsCandidate>>,
}

impl Search<'_> {
    /// `Some(candidate)` when `d` is evaluable; infeasible boundaries count as
    /// "not feasible" rather than failing the search.
    fn eval(&mut self, d: u64) -> Result<Option<GsCandidate>> {
        if let Some(c) = self.seen.get(&d) {
            return Ok(*c);
        }
        let c = match evaluate_candidate(self.spec, d) {
            Ok(c) => Some(c),
            Err(Error::InfeasibleDesign(_)) | Err(Error::InvalidParameter { name: "d1", .. }) => {
                None
            }
            Err(e) => return Err(e),
        };
        self.seen.insert(d, c);
        Ok(c)
    }

    fn feasible(&mut self, d: u64) -> Result<bool> {
        let (pi, eta) = (self.spec.base.pi, self.spec.base.eta);
        Ok(self.eval(d)?.is_some_and(|c| c.pi >= pi && c.eta >= eta))
    }

    /// π and η must be non-decreasing, and feasibility monotone, across every
    /// candidate evaluated so far.
    fn monotone(&self) -> bool {
        let mut prev: Option<(f64, f64)> = None;
        let mut seen_feasible = false;
        for c in self.seen.values() {
            match c {
                Some(c) => {
                    if let Some((pi, eta)) = prev {
                        if c.pi < pi || c.eta < eta {
                            return false;
                        }
                    }
                    prev = Some((c.pi, c.eta));
                    let ok = c.pi >= self.spec.base.pi && c.eta >= self.spec.base.eta;
                    if seen_feasible && !ok {
                        return false;
                    }
                    seen_feasible |= ok;
                }
                None => {
                    if seen_feasible {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Minimum total events `d` (and the matching boundaries) such that study-wise
/// power and correct-negative rate both reach their targets.
pub fn solve_gs_design(spec: &GsSpec) -> Result<GsDesign> {
    spec.validate()?;
    let fixed = solve_fixed_design(&spec.base, false)?;
    let start = fixed.n_events_exact.ceil() as u64;
    let floor = start.saturating_sub(2).max(2);
    let ceiling = (SEARCH_SPAN * start).max(floor + 1);

    let mut search = Search {
        spec,
        seen: BTreeMap::new(),
    };

    // Feasibility holds on a window of d: far beyond the minimum, interim
    // stopping can leave too little probability to spend at the final
    // analysis. Probe upward geometrically for a feasible count, then bisect.
    let mut best = if search.feasible(floor)? {
        let mut d = floor;
        while d > 2 && search.feasible(d - 1)? {
            d -= 1;
        }
        d
    } else {
        let mut lo = floor;
        let mut hi = None;
        while lo < ceiling {
            let probe = (lo + (lo / 4).max(1)).min(ceiling);
            if search.feasible(probe)? {
                hi = Some(probe);
                break;
            }
            lo = probe;
        }
        let mut hi = hi.ok_or_else(|| {
            Error::InfeasibleDesign(format!("no feasible event count up to {ceiling}"))
        })?;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if search.feasible(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let fallback = !search.monotone();
    if fallback {
        best = (2..=ceiling)
            .find_map(|d| match search.feasible(d) {
                Ok(true) => Some(Ok(d)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            })
            .expect("a feasible count was found")?;
    }

    let candidate = search
        .eval(best)?
        .expect("feasible candidate was evaluated");
    GsDesign::from_candidate(spec, &candidate, fallback)
}
