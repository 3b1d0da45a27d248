use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tte3o_core::{
    continue_and_reject_h0_prob, continue_and_reject_h1_prob, interim_boundaries,
    solve_final_boundaries, solve_gs_design, DesignSpec, GsSpec, InterimBoundaries,
};

const DRAWS: u64 = 10_000_000;

/// Path frequencies from independent stage-wise estimates:
/// θ̂₁ ~ N(θ, k²/d1), increment ~ N(θ, k²/d2), θ̂ their event-weighted mean.
#[derive(Debug, Default)]
struct PathFrequencies {
    stop_low: f64,
    stop_high: f64,
    continue_low: f64,
    continue_high: f64,
}

fn simulate_paths(
    theta: f64,
    d: u64,
    d1: u64,
    interim: &InterimBoundaries,
    final_lower: f64,
    final_upper: f64,
    seed: u64,
) -> PathFrequencies {
    let k = 2.0; // (1 + r)/√r at r = 1
    let d2 = d - d1;
    let (sd1, sd2) = (k / (d1 as f64).sqrt(), k / (d2 as f64).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    for _ in 0..DRAWS {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let t1 = theta + sd1 * z1;
        if t1 < interim.lower {
            counts[0] += 1;
            continue;
        }
        if t1 > interim.upper {
            counts[1] += 1;
            continue;
        }
        let t2 = theta + sd2 * z2;
        let t = (d1 as f64 * t1 + d2 as f64 * t2) / d as f64;
        if t < final_lower {
            counts[2] += 1;
        } else if t > final_upper {
            counts[3] += 1;
        }
    }
    let n = DRAWS as f64;
    PathFrequencies {
        stop_low: counts[0] as f64 / n,
        stop_high: counts[1] as f64 / n,
        continue_low: counts[2] as f64 / n,
        continue_high: counts[3] as f64 / n,
    }
}

fn within_mc_error(estimate: f64, exact: f64) -> bool {
    let se = (exact * (1.0 - exact) / DRAWS as f64).sqrt();
    (estimate - exact).abs() <= 4.0 * se.max(1e-7)
}

fn spec(alpha1: f64, beta1: f64) -> GsSpec {
    GsSpec::new(
        DesignSpec::new(1.0, 0.65, 0.15, 0.15, 0.75, 0.75, 1.0),
        0.5,
        alpha1,
        beta1,
    )
}

#[test]
fn continuation_probabilities_match_paired_normal_simulation() {
    for (i, (a1, b1)) in [(0.0, 0.05), (0.03, 0.05), (0.05, 0.0)]
        .into_iter()
        .enumerate()
    {
        let s = spec(a1, b1);
        let (d, d1) = (66, s.interim_events(66));
        let interim = interim_boundaries(&s, d1).unwrap();
        let fin = solve_final_boundaries(&s, d).unwrap();
        let (t0, t1) = (s.base.theta0(), s.base.theta1());

        let a = continue_and_reject_h0_prob(t0, d, d1, &interim, fin.lower, &s).unwrap();
        let b = continue_and_reject_h1_prob(t1, d, d1, &interim, fin.upper, &s).unwrap();
        assert!((a - (0.15 - a1)).abs() < 1e-6, "A(θ0) = {a}");
        assert!((b - (0.15 - b1)).abs() < 1e-6, "B(θ1) = {b}");

        let h0 = simulate_paths(t0, d, d1, &interim, fin.lower, fin.upper, 100 + i as u64);
        let h1 = simulate_paths(t1, d, d1, &interim, fin.lower, fin.upper, 200 + i as u64);
        assert!(within_mc_error(h0.continue_low, a), "{h0:?} vs {a}");
        assert!(within_mc_error(h1.continue_high, b), "{h1:?} vs {b}");
        assert!(within_mc_error(h0.stop_low, a1), "{h0:?}");
        assert!(within_mc_error(h1.stop_high, b1), "{h1:?}");
    }
}

#[test]
fn operating_characteristics_match_simulation_off_hypothesis() {
    let g = solve_gs_design(&spec(0.02, 0.05)).unwrap();
    let theta = 0.5 * (g.spec.base.theta0() + g.spec.base.theta1());
    let p = g.stagewise_probabilities(theta).unwrap();
    let sim = simulate_paths(
        theta,
        g.d_total,
        g.d1_interim,
        &g.interim(),
        g.final_lower_loghr,
        g.final_upper_loghr,
        7,
    );
    assert!(
        within_mc_error(sim.stop_low, p.reject_h0_interim),
        "{sim:?} {p:?}"
    );
    assert!(
        within_mc_error(sim.stop_high, p.reject_h1_interim),
        "{sim:?} {p:?}"
    );
    assert!(
        within_mc_error(sim.continue_low, p.reject_h0_final),
        "{sim:?} {p:?}"
    );
    assert!(
        within_mc_error(sim.continue_high, p.reject_h1_final),
        "{sim:?} {p:?}"
    );
}
