use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symdisc::sim::{exact_click_table, summarize, trial_records, Outcome};
use symdisc::verify::random_angles;
use symdisc::{run_trials, AngleVector, Dimension, SimConfig, SimReport};

fn four_angles(seed: u64) -> AngleVector<f64> {
    random_angles(Dimension::new(4).unwrap(), &mut ChaCha8Rng::seed_from_u64(seed))
}

fn leaky(trials: u64, seed: u64, extinction: f64) -> SimConfig {
    SimConfig {
        pbs_extinction: Some(extinction),
        ..SimConfig::ideal(trials, seed)
    }
}

#[test]
fn ideal_rate_converges_to_bound() {
    let angles = four_angles(7);
    let r = run_trials(&SimConfig::ideal(1_000_000, 42), &angles).unwrap();
    let sigma = r.conclusive_rate.sigma_at(r.analytic_p_d);
    let dev = (r.conclusive_rate.estimate - r.analytic_p_d).abs();
    assert!(dev < 4.0 * sigma, "deviation {dev} vs sigma {sigma}");
    assert_eq!(r.misidentified_count, 0);
    assert_eq!(r.discarded_count, 0);
    assert_eq!(r.trials, 1_000_000);
}

#[test]
fn leakage_matches_exact_click_table() {
    let angles = four_angles(3);
    let cfg = leaky(400_000, 9, 1000.0);
    let table = exact_click_table(&angles, &cfg).unwrap();
    let r = run_trials(&cfg, &angles).unwrap();
    // Detector order: monitors for the three filtered paths, then D1..D4.
    for l in 0..4 {
        let n_l = r.per_index_counts[l] as f64;
        for k in 0..4 {
            let p = table[l][3 + k];
            let freq = r.confusion_matrix[l][k] as f64 / n_l;
            let sigma = (p * (1.0 - p) / n_l).sqrt().max(1.0 / n_l);
            assert!((freq - p).abs() < 4.0 * sigma + 1e-12, "l={l} k={k}: {freq} vs {p}");
        }
    }
}

#[test]
fn better_extinction_means_fewer_errors() {
    let angles = four_angles(5);
    let low = run_trials(&leaky(300_000, 4, 1000.0), &angles).unwrap();
    let high = run_trials(&leaky(300_000, 4, 1e5), &angles).unwrap();
    assert!(low.off_diagonal_total() > 0);
    assert!(high.off_diagonal_total() < low.off_diagonal_total());
}

#[test]
fn phase_noise_degrades_identification() {
    let angles = four_angles(8);
    let reports: Vec<SimReport> = [0.0, 0.05, 0.1, 0.2]
        .into_iter()
        .map(|sigma| {
            let cfg = SimConfig {
                phase_noise_sigma: sigma,
                ..SimConfig::ideal(100_000, 17)
            };
            run_trials(&cfg, &angles).unwrap()
        })
        .collect();
    let ideal = &reports[0];
    for pair in reports.windows(2) {
        assert!(pair[1].success_rate.estimate < pair[0].success_rate.estimate);
        assert!(pair[1].misidentified_count > pair[0].misidentified_count);
    }
    for noisy in &reports[1..] {
        // Phase errors act after the filter, so they never create conclusive events.
        assert!(noisy.conclusive_rate.estimate <= ideal.conclusive_rate.estimate);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let angles = four_angles(2);
    let run = |threads| {
        let cfg = SimConfig {
            threads,
            phase_noise_sigma: 0.05,
            pbs_extinction: Some(1000.0),
            heralding_efficiency: 0.9,
            ..SimConfig::ideal(50_000, 123)
        };
        run_trials(&cfg, &angles).unwrap()
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn interval_coverage_over_seeds() {
    let angles = four_angles(12);
    let covered = (0..20)
        .filter(|&seed| {
            let r = run_trials(&SimConfig::ideal(100_000, 1000 + seed), &angles).unwrap();
            r.conclusive_rate.contains(r.analytic_p_d)
        })
        .count();
    assert!(covered >= 17, "covered {covered}/20");
}

#[test]
fn records_aggregate_to_the_same_report() {
    let angles = four_angles(4);
    let cfg = SimConfig {
        detector_efficiency: 0.8,
        ..leaky(20_000, 31, 500.0)
    };
    let records = trial_records(&cfg, &angles).unwrap();
    let direct = run_trials(&cfg, &angles).unwrap();
    let mut shuffled = records.clone();
    shuffled.reverse();
    assert_eq!(summarize(&shuffled, 4, direct.analytic_p_d).unwrap(), direct);
}

#[test]
fn efficiencies_thin_the_registered_events() {
    let angles = four_angles(6);
    let cfg = SimConfig {
        heralding_efficiency: 0.7,
        detector_efficiency: 0.5,
        ..SimConfig::ideal(200_000, 8)
    };
    let r = run_trials(&cfg, &angles).unwrap();
    let kept = 1.0 - r.discarded_count as f64 / r.trials as f64;
    let sigma = (0.35 * 0.65 / r.trials as f64).sqrt();
    assert!((kept - 0.35).abs() < 4.0 * sigma);
    // Losses are independent of the outcome, so the rate is unbiased.
    let s = r.conclusive_rate.sigma_at(r.analytic_p_d);
    assert!((r.conclusive_rate.estimate - r.analytic_p_d).abs() < 4.0 * s);
}

#[test]
fn ideal_outcomes_are_never_wrong() {
    let angles = four_angles(10);
    for rec in trial_records(&SimConfig::ideal(5_000, 2), &angles).unwrap() {
        if let Outcome::Conclusive(k) = rec.outcome {
            assert_eq!(k, rec.prepared);
        }
    }
}
