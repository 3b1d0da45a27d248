use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tte3o_core::trial::{
    log_rank, log_rank_increment, theta_hat_sampling_check, AnalysisTrigger, Arm, PatientRecord,
    SimScenario, TrialData,
};

fn rec(arm: u8, entry: f64, time: f64, observed: bool) -> PatientRecord {
    PatientRecord {
        arm: Arm::from_indicator(arm).unwrap(),
        entry_time: entry,
        event_time: time,
        observed,
    }
}

/// Builds the full risk table by scanning every patient at every event.
fn brute_force(data: &TrialData, cutoff: f64) -> Option<(f64, usize)> {
    let ps = data.patients();
    let mut score = 0.0;
    let mut var = 0.0;
    let mut events = 0;
    let mut times: Vec<(f64, Arm)> = ps
        .iter()
        .filter(|p| p.observed && p.entry_time < cutoff && p.entry_time + p.event_time <= cutoff)
        .map(|p| (p.entry_time + p.event_time, p.arm))
        .collect();
    times.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (c, arm) in times {
        let (mut n0, mut n1) = (0usize, 0usize);
        for p in ps {
            let exit = (p.entry_time + p.event_time).min(cutoff);
            if p.entry_time < c && exit >= c {
                match p.arm {
                    Arm::Control => n0 += 1,
                    Arm::Experimental => n1 += 1,
                }
            }
        }
        let pj = n1 as f64 / (n0 + n1) as f64;
        score += arm.indicator() - pj;
        var += pj * (1.0 - pj);
        events += 1;
    }
    (events > 0 && var > 0.0).then(|| (score / var.sqrt(), events))
}

fn hand_dataset() -> TrialData {
    let rows = [
        (1, 0.0, 3.1, true),
        (0, 0.2, 1.62, true),
        (1, 0.5, 6.0, false),
        (0, 0.9, 2.4, true),
        (1, 1.1, 0.8, true),
        (0, 1.3, 4.45, true),
        (1, 1.6, 5.2, true),
        (0, 2.0, 0.35, true),
        (1, 2.2, 7.0, false),
        (0, 2.5, 3.3, true),
        (1, 3.0, 1.15, true),
        (0, 3.3, 2.9, false),
        (1, 3.7, 2.15, true),
        (0, 4.0, 0.6, true),
        (1, 4.4, 3.75, true),
        (0, 4.8, 1.45, true),
        (1, 5.1, 0.25, true),
        (0, 5.5, 2.72, true),
        (1, 5.9, 1.95, false),
        (0, 6.2, 0.45, true),
    ];
    TrialData::new(
        rows.iter().map(|&(a, e, t, o)| rec(a, e, t, o)).collect(),
        1.0,
    )
    .unwrap()
}

#[test]
fn hand_dataset_matches_risk_table() {
    let data = hand_dataset();
    for cutoff in [4.0, 6.0, 7.5, 100.0] {
        let (l, d) = brute_force(&data, cutoff).unwrap();
        let r = log_rank(&data, cutoff).unwrap();
        assert_eq!(r.n_events as usize, d);
        assert!((r.statistic - l).abs() < 1e-12, "cutoff {cutoff}");
    }
}

fn random_dataset(rng: &mut ChaCha8Rng) -> TrialData {
    let n = rng.random_range(2..=25);
    let r = [0.5, 1.0, 2.0][rng.random_range(0..3)];
    let patients = (0..n)
        .map(|_| {
            rec(
                rng.random_range(0..=1),
                rng.random::<f64>() * 10.0,
                0.01 + rng.random::<f64>() * 10.0,
                rng.random::<f64>() < 0.8,
            )
        })
        .collect();
    TrialData::new(patients, r).unwrap()
}

#[test]
fn random_datasets_match_risk_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    while compared < 200 {
        let data = random_dataset(&mut rng);
        let cutoff = rng.random::<f64>() * 25.0;
        match (brute_force(&data, cutoff), log_rank(&data, cutoff)) {
            (Some((l, d)), Ok(r)) => {
                assert_eq!(r.n_events as usize, d);
                assert!((r.statistic - l).abs() < 1e-12);
                compared += 1;
            }
            (None, Err(_)) => {}
            (oracle, ours) => panic!("disagreement: {oracle:?} vs {ours:?}"),
        }
    }
}

#[test]
fn arm_swap_negates_statistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let data = random_dataset(&mut rng);
        let (Ok(a), Ok(b)) = (log_rank(&data, 30.0), log_rank(&data.swap_arms(), 30.0)) else {
            continue;
        };
        assert!((a.statistic + b.statistic).abs() < 1e-12);
        assert!((a.theta_hat + b.theta_hat).abs() < 1e-12);
    }
}

#[test]
fn invariant_under_monotone_calendar_transform() {
    let g = |x: f64| (x / 3.0).exp() + x * x;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let data = random_dataset(&mut rng);
        let warped: Vec<PatientRecord> = data
            .patients()
            .iter()
            .map(|p| PatientRecord {
                entry_time: g(p.entry_time),
                event_time: g(p.calendar_time()) - g(p.entry_time),
                ..*p
            })
            .collect();
        let warped = TrialData::new(warped, data.rand_ratio()).unwrap();
        let (Ok(a), Ok(b)) = (log_rank(&data, 15.0), log_rank(&warped, g(15.0))) else {
            continue;
        };
        assert_eq!(a.n_events, b.n_events);
        assert!((a.statistic - b.statistic).abs() < 1e-12);
    }
}

fn nth_event_time(data: &TrialData, n: usize) -> f64 {
    let mut t: Vec<f64> = data
        .patients()
        .iter()
        .map(PatientRecord::calendar_time)
        .collect();
    t.sort_by(f64::total_cmp);
    t[n - 1]
}

#[test]
fn increments_combine_to_full_statistic() {
    let s = SimScenario::exponential(0.0, 2f64.ln() / 6.0, 600, 12.0, 17, 20);
    for rep in 0..20 {
        let data = s.simulate_patients(rep);
        let (c1, c2) = (nth_event_time(&data, 150), nth_event_time(&data, 300));
        let inc = log_rank_increment(&data, c1, c2).unwrap();
        let full = log_rank(&data, c2).unwrap();
        assert_eq!((inc.d1, inc.d2, full.n_events), (150, 150, 300));
        let d = full.n_events as f64;
        let combined = (inc.d1 as f64 / d).sqrt() * inc.l1 + (inc.d2 as f64 / d).sqrt() * inc.l2;
        assert!((combined - full.statistic).abs() < 0.05, "rep {rep}");
    }
}

fn sampling(theta: f64, r: f64, d: u64, reps: u64) -> tte3o_core::trial::ThetaHatSummary {
    let mut s = SimScenario::exponential(theta, 2f64.ln() / 6.0, 4 * d, 12.0, 31, reps);
    s.rand_ratio = r;
    s.analysis_trigger = Some(AnalysisTrigger::Final { d });
    theta_hat_sampling_check(&s).unwrap()
}

#[test]
fn estimator_unbiased_under_null() {
    let s = sampling(0.0, 1.0, 32, 100_000);
    assert!(s.mean.abs() < 4.0 * s.se_mean, "{s:?}");
}

#[test]
fn estimator_variance_matches_event_count() {
    let s = sampling(0.0, 1.0, 64, 20_000);
    assert!((s.expected_variance - 0.0625).abs() < 1e-15);
    assert!(
        (s.variance / s.expected_variance - 1.0).abs() < 0.1,
        "{s:?}"
    );

    let s = sampling(0.0, 2.0, 90, 20_000);
    assert!((s.expected_variance - 0.05).abs() < 1e-15);
    assert!(
        (s.variance / s.expected_variance - 1.0).abs() < 0.1,
        "{s:?}"
    );

    let theta = 0.65f64.ln();
    let s = sampling(theta, 1.0, 64, 20_000);
    assert!((s.mean - theta).abs() < 0.02, "{s:?}");
    assert!(
        (s.variance / s.expected_variance - 1.0).abs() < 0.1,
        "{s:?}"
    );
}
