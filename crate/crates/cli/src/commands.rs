use serde::Serialize;
use tte3o_core::numeric::normal_pdf;
use tte3o_core::trial::{
    log_rank, simulate_trial, DecisionRule, EventTimeModel, SimScenario, TrialData,
};
use tte3o_core::{solve_fixed_design, solve_gs_design, Error, FixedDesign, GsDesign, Result};

use crate::output::{aligned, csv_text, emit, fmt, ResultDocument};
use crate::request::{DesignRequest, DesignSection, InterimSection, SCHEMA_VERSION};
use crate::table;
use crate::{DensityArgs, DesignArgs, Format, GsArgs, LogrankArgs, SimulateArgs, TableArgs};

pub struct Context {
    pub format: Format,
    pub precision: usize,
}

impl Context {
    fn no_csv(&self, command: &str) -> Result<()> {
        if self.format == Format::Csv {
            return Err(Error::InvalidParameter {
                name: "format",
                reason: format!("csv output is not available for `{command}`"),
            });
        }
        Ok(())
    }

    fn f(&self, x: f64) -> String {
        fmt(x, self.precision)
    }
}

#[derive(Serialize)]
struct RequestInputs {
    request: DesignRequest,
}

fn request_from_flags(a: &DesignArgs, interim: Option<InterimSection>) -> Result<DesignRequest> {
    let req = match &a.request {
        Some(path) => DesignRequest::from_path(path)?,
        None => {
            let missing = |name| Error::InvalidParameter {
                name,
                reason: "flag is required".into(),
            };
            DesignRequest {
                schema_version: SCHEMA_VERSION,
                design: DesignSection {
                    hr0: a.hr0,
                    hr1: a.hr1.ok_or_else(|| missing("hr1"))?,
                    alpha: a.alpha.ok_or_else(|| missing("alpha"))?,
                    beta: a.beta.ok_or_else(|| missing("beta"))?,
                    pi: a.pi.ok_or_else(|| missing("pi"))?,
                    eta: a.eta.ok_or_else(|| missing("eta"))?,
                    r: a.r,
                    round_events: a.round_events,
                },
                interim,
            }
        }
    };
    req.validate()?;
    Ok(req)
}

/// Either kind of solved design, as selected by the request.
enum Solved {
    Fixed(FixedDesign),
    Sequential(GsDesign),
}

impl Solved {
    fn rule(&self) -> &dyn DecisionRule {
        match self {
            Solved::Fixed(d) => d,
            Solved::Sequential(d) => d,
        }
    }
}

fn solve(req: &DesignRequest) -> Result<Solved> {
    Ok(match req.gs_spec() {
        Some(gs) => Solved::Sequential(solve_gs_design(&gs)?),
        None => Solved::Fixed(solve_fixed_design(&req.spec(), req.design.round_events)?),
    })
}

fn spec_line(req: &DesignRequest) -> String {
    let d = &req.design;
    format!(
        "  HR0 = {}, HR1 = {}, alpha = {}, beta = {}, pi = {}, eta = {}, r = {}\n",
        d.hr0, d.hr1, d.alpha, d.beta, d.pi, d.eta, d.r
    )
}

fn fixed_text(ctx: &Context, req: &DesignRequest, d: &FixedDesign) -> String {
    let f = |x| ctx.f(x);
    let mut t = String::from("Fixed three-outcome design\n");
    t += &spec_line(req);
    t += &format!(
        "  events required          {} (unrounded {})\n",
        d.n_events_d,
        f(d.raw.d_lower.max(d.raw.d_upper))
    );
    t += &format!(
        "  reject H0 if log-HR <    {}  (HR < {})\n",
        f(d.boundary_lower_loghr),
        f(d.boundary_lower_hr)
    );
    t += &format!(
        "  reject H1 if log-HR >    {}  (HR > {})\n",
        f(d.boundary_upper_loghr),
        f(d.boundary_upper_hr)
    );
    t += &format!(
        "  achieved alpha {}  beta {}  pi {}  eta {}\n",
        f(d.achieved_alpha),
        f(d.achieved_beta),
        f(d.achieved_pi),
        f(d.achieved_eta)
    );
    if d.two_outcome_equivalent {
        t += "  boundaries coincide: equivalent to a two-outcome design\n";
    }
    t
}

fn gs_text(ctx: &Context, req: &DesignRequest, g: &GsDesign) -> String {
    let f = |x| ctx.f(x);
    // An absent interim boundary has HR 0 or infinity; show it as absent.
    let hr = |loghr: f64, hr: f64| {
        if loghr.is_finite() {
            ctx.f(hr)
        } else {
            fmt(loghr, 0)
        }
    };
    let gs = g.spec;
    let mut t = String::from("Two-stage three-outcome design\n");
    t += &spec_line(req);
    t += &format!(
        "  t1 = {}, alpha1 = {}, beta1 = {}\n",
        gs.t1, gs.alpha1, gs.beta1
    );
    t += &format!(
        "  events: total {}, interim {}, after interim {}\n",
        g.d_total, g.d1_interim, g.d2_post
    );
    t += &format!(
        "  interim: reject H0 if log-HR < {} (HR < {}); reject H1 if log-HR > {} (HR > {})\n",
        f(g.interim_lower_loghr),
        hr(g.interim_lower_loghr, g.interim_lower_hr),
        f(g.interim_upper_loghr),
        hr(g.interim_upper_loghr, g.interim_upper_hr)
    );
    t += &format!(
        "  final:   reject H0 if log-HR < {} (HR < {}); reject H1 if log-HR > {} (HR > {})\n",
        f(g.final_lower_loghr),
        f(g.final_lower_hr),
        f(g.final_upper_loghr),
        f(g.final_upper_hr)
    );
    t += &format!(
        "  achieved alpha {}  beta {}  pi {}  eta {}\n",
        f(g.achieved_alpha),
        f(g.achieved_beta),
        f(g.achieved_pi),
        f(g.achieved_eta)
    );
    t += &format!(
        "  interim stop probability: under H0 {}, under H1 {}\n",
        f(g.stop_interim_h0),
        f(g.stop_interim_h1)
    );
    if g.linear_scan_fallback {
        t += "  note: event count located by linear scan (non-monotone power)\n";
    }
    t
}

fn print_design(ctx: &Context, command: &'static str, req: DesignRequest) -> Result<()> {
    ctx.no_csv(command)?;
    let solved = solve(&req)?;
    let text = match (ctx.format, &solved) {
        (Format::Json, Solved::Fixed(d)) => {
            ResultDocument::new(command, RequestInputs { request: req }, d).to_json()
        }
        (Format::Json, Solved::Sequential(g)) => {
            ResultDocument::new(command, RequestInputs { request: req }, g).to_json()
        }
        (_, Solved::Fixed(d)) => fixed_text(ctx, &req, d),
        (_, Solved::Sequential(g)) => gs_text(ctx, &req, g),
    };
    emit(&text, None)
}

pub fn design(ctx: &Context, a: &DesignArgs) -> Result<()> {
    let mut req = request_from_flags(a, None)?;
    // A request file for a two-stage design is still solved as fixed here.
    req.interim = None;
    print_design(ctx, "design", req)
}

pub fn gs_design(ctx: &Context, a: &GsArgs) -> Result<()> {
    let interim = InterimSection {
        t1: a.t1,
        alpha1: a.alpha1,
        beta1: a.beta1,
    };
    let req = request_from_flags(&a.design, Some(interim))?;
    if req.interim.is_none() {
        return Err(Error::InvalidParameter {
            name: "interim",
            reason: "request has no interim section".into(),
        });
    }
    print_design(ctx, "gs-design", req)
}

const TABLE_HEADER: [&str; 9] = [
    "hr0", "hr1", "alpha", "beta", "eta", "pi", "d", "hr_lower", "hr_upper",
];

pub fn table(ctx: &Context, a: &TableArgs) -> Result<()> {
    let rows = table::rows()?;
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.hr0.to_string(),
                r.hr1.to_string(),
                r.alpha.to_string(),
                r.beta.to_string(),
                r.eta.to_string(),
                r.pi.to_string(),
                r.d.to_string(),
                ctx.f(r.hr_lower),
                ctx.f(r.hr_upper),
            ]
        })
        .collect();
    let text = match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Inputs {
                r: f64,
                round_events: bool,
            }
            let inputs = Inputs {
                r: 1.0,
                round_events: true,
            };
            ResultDocument::new("table", inputs, &rows).to_json()
        }
        Format::Csv => csv_text(&TABLE_HEADER, |w| {
            cells.iter().try_for_each(|row| w.write_record(row))
        }),
        Format::Text => aligned(&TABLE_HEADER, &cells),
    };
    emit(&text, a.output.as_deref())
}

#[derive(Debug, Clone, Copy, Serialize)]
struct DensityPoint {
    theta: f64,
    density_h0: f64,
    density_h1: f64,
    region: &'static str,
}

#[derive(Serialize)]
struct RegionProbabilities {
    /// Probability of each region under H0 and H1.
    reject_h0: [f64; 2],
    gray_zone: [f64; 2],
    reject_h1: [f64; 2],
}

#[derive(Serialize)]
struct DensityOutputs {
    sd: f64,
    boundary_lower: f64,
    boundary_upper: f64,
    /// Region names for the error and power rates: reject_h0 carries
    /// alpha under H0 and pi under H1; reject_h1 carries eta under H0 and
    /// beta under H1.
    regions: RegionProbabilities,
    points: Vec<DensityPoint>,
}

pub fn density(ctx: &Context, a: &DensityArgs) -> Result<()> {
    let mut req = request_from_flags(&a.design, None)?;
    req.interim = None;
    if a.grid_points < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            reason: "need at least two grid points".into(),
        });
    }
    let d = solve_fixed_design(&req.spec(), req.design.round_events)?;
    let spec = d.spec;
    let sd = spec.estimator_sd(d.n_events_exact);
    let (t0, t1) = (spec.theta0(), spec.theta1());
    let lo = t0.min(t1) - 4.0 * sd;
    let hi = t0.max(t1) + 4.0 * sd;
    let step = (hi - lo) / (a.grid_points - 1) as f64;
    let (lower, upper) = (d.boundary_lower_loghr, d.boundary_upper_loghr);
    let points = (0..a.grid_points)
        .map(|i| {
            let theta = lo + i as f64 * step;
            Ok(DensityPoint {
                theta,
                density_h0: normal_pdf(theta, t0, sd)?,
                density_h1: normal_pdf(theta, t1, sd)?,
                region: if theta < lower {
                    "reject_h0"
                } else if theta > upper {
                    "reject_h1"
                } else {
                    "gray_zone"
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (a0, e0) = d.rejection_probabilities(t0);
    let (p1, b1) = d.rejection_probabilities(t1);
    let outputs = DensityOutputs {
        sd,
        boundary_lower: lower,
        boundary_upper: upper,
        regions: RegionProbabilities {
            reject_h0: [a0, p1],
            gray_zone: [1.0 - a0 - e0, 1.0 - p1 - b1],
            reject_h1: [e0, b1],
        },
        points,
    };
    let header = [
        "theta",
        "density_h0",
        "density_h1",
        "region",
        "boundary_lower",
        "boundary_upper",
    ];
    let p = ctx.precision.max(6);
    let cells: Vec<Vec<String>> = outputs
        .points
        .iter()
        .map(|pt| {
            vec![
                fmt(pt.theta, p),
                fmt(pt.density_h0, p),
                fmt(pt.density_h1, p),
                pt.region.to_string(),
                ctx.f(lower),
                ctx.f(upper),
            ]
        })
        .collect();
    let text = match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Inputs {
                request: DesignRequest,
                grid_points: usize,
            }
            let inputs = Inputs {
                request: req,
                grid_points: a.grid_points,
            };
            ResultDocument::new("density", inputs, outputs).to_json()
        }
        Format::Csv => csv_text(&header, |w| {
            cells.iter().try_for_each(|row| w.write_record(row))
        }),
        Format::Text => aligned(&header, &cells),
    };
    emit(&text, a.output.as_deref())
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<()> {
    ctx.no_csv("simulate")?;
    let req = DesignRequest::from_path(&a.design)?;
    let solved = solve(&req)?;
    let rule = solved.rule();
    let scenario = SimScenario {
        true_log_hr: a.theta,
        control_hazard: a.hazard,
        n_patients: a.n_patients,
        accrual_duration: a.accrual,
        rand_ratio: rule.rand_ratio(),
        event_model: match a.weibull_shape {
            Some(shape) => EventTimeModel::Weibull { shape },
            None => EventTimeModel::Exponential,
        },
        analysis_trigger: None,
        rng_seed: a.seed,
        n_replications: a.reps,
    };
    let oc = simulate_trial(&scenario, rule)?;
    let text = match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Inputs {
                request: DesignRequest,
                scenario: SimScenario,
            }
            let inputs = Inputs {
                request: req,
                scenario,
            };
            ResultDocument::new("simulate", inputs, &oc).to_json()
        }
        _ => {
            let f = |x| ctx.f(x);
            let se = &oc.mc_standard_errors;
            let mut t = format!(
                "Simulated operating characteristics ({} replications, seed {}, {})\n",
                oc.n_replications, oc.rng_seed, oc.rng_algorithm
            );
            t += &format!("  true log-HR {}\n", a.theta);
            for (name, p, s) in [
                ("reject H0", oc.p_reject_h0, se.p_reject_h0),
                ("reject H1", oc.p_reject_h1, se.p_reject_h1),
                ("inconclusive", oc.p_inconclusive, se.p_inconclusive),
                ("stop at interim", oc.p_stop_interim, se.p_stop_interim),
            ] {
                t += &format!("  {name:<16} {}  (SE {})\n", f(p), f(s));
            }
            if oc.standard_errors_degenerate {
                t += "  note: standard errors are degenerate (too few replications)\n";
            }
            t
        }
    };
    emit(&text, None)
}

pub fn logrank(ctx: &Context, a: &LogrankArgs) -> Result<()> {
    ctx.no_csv("logrank")?;
    let data = TrialData::read_csv_path(&a.data, a.r)?;
    let cutoff = a.cutoff.unwrap_or(f64::INFINITY);
    let result = log_rank(&data, cutoff)?;
    let text = match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Inputs {
                data: String,
                cutoff: Option<f64>,
                r: f64,
            }
            let inputs = Inputs {
                data: a.data.display().to_string(),
                cutoff: a.cutoff,
                r: a.r,
            };
            ResultDocument::new("logrank", inputs, result).to_json()
        }
        _ => format!(
            "Log-rank statistic {} over {} events; estimated log-HR {} (HR {})\n",
            ctx.f(result.statistic),
            result.n_events,
            ctx.f(result.theta_hat),
            ctx.f(result.theta_hat.exp())
        ),
    };
    emit(&text, None)
}
