//! Acceptance criteria, one line of output each. Exits non-zero if any fails.

use std::process::{Command, ExitCode};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symdisc::optics::{
    abstract_discrimination_map, click_probabilities, default_angles, detector_label,
    expected_core_counts, simulate_netlist, verify_equivalence, Mode, Polarization,
};
use symdisc::verify::random_angles;
use symdisc::{
    apply_protocol, apply_protocol_all, build_family, build_povm, coefficients_from_angles,
    compile_full, count_components, idp_probability, optimal_probability, run_trials,
    verify_completeness, AngleVector, Dimension, Element, SimConfig, Stage,
};

type Outcome = Result<String, String>;

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn fail_if(bad: bool, detail: String) -> Outcome {
    if bad {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn saturation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut bound_err, mut spread) = (0.0f64, 0.0f64);
    for n in [2, 3, 4, 8] {
        for _ in 0..100 {
            let c = coefficients_from_angles(&random_angles(dim(n), &mut rng)).map_err(|e| e.to_string())?;
            let p_d = optimal_probability(&c);
            let n_cmin2 = n as f64 * c.min_coefficient().1.powi(2);
            let p: Vec<f64> = apply_protocol_all(&c)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|o| o.p_conclusive)
                .collect();
            for &x in &p {
                bound_err = bound_err.max((x - n_cmin2).abs()).max((p_d - n_cmin2).abs());
                spread = spread.max((x - p[0]).abs());
            }
        }
    }
    fail_if(
        bound_err >= 1e-10 || spread >= 1e-12,
        format!("max |P - N c_min^2| = {bound_err:.2e}, max spread over l = {spread:.2e}"),
    )
}

fn two_state_limit() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..=50 {
        let theta = std::f64::consts::FRAC_PI_4 * i as f64 / 50.0;
        let c = coefficients_from_angles(&AngleVector::new(vec![theta]).unwrap()).map_err(|e| e.to_string())?;
        let fam = build_family(&c).map_err(|e| e.to_string())?;
        let limit = idp_probability(&fam.states[0], &fam.states[1]);
        for l in 0..2 {
            let p = apply_protocol(&c, l).map_err(|e| e.to_string())?.p_conclusive;
            worst = worst.max((p - limit).abs()).max((p - (1.0 - (2.0 * theta).cos())).abs());
        }
    }
    fail_if(worst >= 1e-12, format!("max deviation from 1 - |<0|1>| = {worst:.2e}"))
}

fn completeness_and_biorthogonality() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut comp, mut bio) = (0.0f64, 0.0f64);
    for n in 2..=8 {
        for _ in 0..100 {
            let c = coefficients_from_angles(&random_angles(dim(n), &mut rng)).unwrap();
            comp = comp.max(verify_completeness(&build_povm(&c).unwrap()));
            bio = bio.max(build_family(&c).unwrap().biorthogonality_defect());
        }
    }
    (
        fail_if(comp >= 1e-10, format!("max ||sum E - I|| = {comp:.2e}")),
        fail_if(bio >= 1e-10, format!("max |<r_k|s_l> - delta| = {bio:.2e}")),
    )
}

fn component_counts() -> Outcome {
    let mut rows = Vec::new();
    let mut ok = true;
    for (n, want) in [(4, (7, 6, 4)), (8, (15, 14, 12)), (16, (31, 30, 32))] {
        let net = compile_full(&default_angles::<f64>(dim(n)), 0).map_err(|e| e.to_string())?;
        let count = count_components(&net);
        let got = (count.hwp, count.pbs, count.bs);
        let butterflies = net
            .stages
            .iter()
            .filter(|s| s.stage == Stage::Detection)
            .flat_map(|s| &s.elements)
            .filter(|e| matches!(e, Element::Bs { .. }))
            .count();
        ok &= got == want
            && expected_core_counts(dim(n)).ok() == Some(want)
            && butterflies == n / 2 * n.trailing_zeros() as usize;
        rows.push(format!("N={n} {got:?}"));
    }
    fail_if(!ok, rows.join(" "))
}

fn netlist_equivalence() -> Outcome {
    let input = Mode::new(0, Polarization::H).index();
    let (mut residual, mut click_err, mut crosstalk) = (0.0f64, 0.0f64, 0.0f64);
    for (n, draws, seed) in [(4, 20, 404), (8, 5, 405)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..draws {
            let angles = random_angles(dim(n), &mut rng);
            let c = coefficients_from_angles(&angles).map_err(|e| e.to_string())?;
            let p_d = optimal_probability(&c);
            for l in 0..n {
                let net = compile_full(&angles, l).map_err(|e| e.to_string())?;
                if l == 0 {
                    let core = net.restricted_to(&[Stage::Conditional, Stage::Projection, Stage::Detection]);
                    let map = abstract_discrimination_map(&c, net.reference_path).map_err(|e| e.to_string())?;
                    let u = simulate_netlist(&core).map_err(|e| e.to_string())?;
                    residual = residual.max(verify_equivalence(&u, &map).map_err(|e| e.to_string())?);
                }
                let out = simulate_netlist(&net).map_err(|e| e.to_string())?.column(input);
                let clicks = click_probabilities(&net, &out);
                for ((label, _), p) in net.detectors().iter().zip(&clicks) {
                    if *label == detector_label(l) {
                        click_err = click_err.max((p - p_d).abs());
                    } else if label.starts_with('D') {
                        crosstalk = crosstalk.max(*p);
                    }
                }
            }
        }
    }
    fail_if(
        residual >= 1e-8 || click_err >= 1e-10 || crosstalk >= 1e-20,
        format!("gauge residual {residual:.2e}, |D_l - P_D| {click_err:.2e}, cross-talk {crosstalk:.2e}"),
    )
}

fn monte_carlo() -> Outcome {
    let angles = random_angles(dim(4), &mut ChaCha8Rng::seed_from_u64(707));
    let ideal = run_trials(&SimConfig::ideal(1_000_000, 2024), &angles).map_err(|e| e.to_string())?;
    let sigma = ideal.conclusive_rate.sigma_at(ideal.analytic_p_d);
    let dev = (ideal.conclusive_rate.estimate - ideal.analytic_p_d).abs();
    let leaky = |extinction: f64| {
        let cfg = SimConfig {
            pbs_extinction: Some(extinction),
            ..SimConfig::ideal(1_000_000, 2025)
        };
        run_trials(&cfg, &angles).map_err(|e| e.to_string())
    };
    let low = leaky(1000.0)?.off_diagonal_total();
    let high = leaky(1e5)?.off_diagonal_total();
    fail_if(
        dev >= 4.0 * sigma || ideal.off_diagonal_total() != 0 || low == 0 || high >= low,
        format!(
            "|rate - P_D| = {:.2}σ, ideal off-diagonal {}, off-diagonal at 1e3 / 1e5 = {low} / {high}",
            dev / sigma,
            ideal.off_diagonal_total()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(format!("threads-{threads}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_symdisc"))
            .args([
                "simulate", "--angles", "0.9,0.5,1.2", "--trials", "200000", "--seed", "31337",
                "--extinction", "1000", "--phase-noise", "0.05", "--threads", threads, "--out",
            ])
            .arg(&path)
            .env_remove("SYMDISC_OUT_DIR")
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let a = run("1")?;
    let b = run("4")?;
    fail_if(a != b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() -> ExitCode {
    let (completeness, biorthogonality) = completeness_and_biorthogonality();
    let results = [
        ("optimal-bound-saturation", saturation()),
        ("two-state-reduction", two_state_limit()),
        ("povm-completeness", completeness),
        ("reciprocal-biorthogonality", biorthogonality),
        ("component-counts", component_counts()),
        ("netlist-equivalence", netlist_equivalence()),
        ("monte-carlo-convergence", monte_carlo()),
        ("thread-determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
