//! Self-check battery over randomly drawn angle vectors.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discrimination::{
    apply_protocol, build_povm, conditional_unitary, idp_probability, inverse_fourier,
    optimal_probability, verify_completeness,
};
use crate::error::Result;
use crate::optics::{
    abstract_discrimination_map, butterfly_unitary, click_probabilities, compile_full,
    count_components, default_angles, expected_core_counts, simulate_netlist, verify_equivalence,
    Mode, Polarization, Stage,
};
use crate::states::{build_family, coefficients_from_angles, AngleVector, Dimension};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest deviation seen (0 for exact integer checks).
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &str, worst: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: worst.is_finite() && worst < tolerance,
            worst,
            tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub dim: Dimension,
    pub seed: u64,
    /// Random angle vectors per check.
    pub draws: usize,
    /// Adds this much to entry (0, 0) of the reference `F⁻¹` before the
    /// butterfly comparison. Test hook; zero in normal use.
    pub fourier_fault: f64,
}

impl VerifyOptions {
    pub fn new(dim: Dimension) -> Self {
        Self {
            dim,
            seed: 0,
            draws: 20,
            fourier_fault: 0.0,
        }
    }
}

/// Angles drawn uniformly from `[0.05, π/2 − 0.05]`.
pub fn random_angles<R: Rng + ?Sized>(dim: Dimension, rng: &mut R) -> AngleVector<f64> {
    let thetas = (0..dim.get() - 1)
        .map(|_| rng.random_range(0.05..FRAC_PI_2 - 0.05))
        .collect();
    AngleVector::new(thetas).expect("angles drawn inside the open domain")
}

const DERIVED_TOL: f64 = 1e-10;
const EQUIVALENCE_TOL: f64 = 1e-8;
const CROSSTALK_TOL: f64 = 1e-20;

/// Runs every check and returns one result per check, in a fixed order.
pub fn run_battery(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let dim = opts.dim;
    let n = dim.get();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws: Vec<_> = (0..opts.draws).map(|_| random_angles(dim, &mut rng)).collect();

    let mut completeness = 0.0f64;
    let mut biorth = 0.0f64;
    let mut unitarity = 0.0f64;
    let mut chefles = 0.0f64;
    for angles in &draws {
        let c = coefficients_from_angles(angles)?;
        completeness = completeness.max(verify_completeness(&build_povm(&c)?));
        biorth = biorth.max(build_family(&c)?.biorthogonality_defect());
        unitarity = unitarity.max(conditional_unitary(&c)?.matrix.unitarity_defect());
        let bound = optimal_probability(&c);
        for l in 0..n {
            chefles = chefles.max((apply_protocol(&c, l)?.p_conclusive - bound).abs());
        }
    }
    let mut results = vec![
        CheckResult::measured("completeness", completeness, DERIVED_TOL, format!("N={n}, {} draws", opts.draws)),
        CheckResult::measured("biorthogonality", biorth, DERIVED_TOL, format!("N={n}, {} draws", opts.draws)),
        CheckResult::measured("unitarity", unitarity, DERIVED_TOL, format!("N={n}, {} draws", opts.draws)),
        CheckResult::measured("chefles-bound", chefles, DERIVED_TOL, format!("N={n}, all l")),
    ];

    let two = Dimension::new(2)?;
    let mut idp = 0.0f64;
    for _ in 0..opts.draws.max(1) {
        let angles = random_angles(two, &mut rng);
        let c = coefficients_from_angles(&angles)?;
        let family = build_family(&c)?;
        let limit = idp_probability(&family.states[0], &family.states[1]);
        idp = idp.max((apply_protocol(&c, 0)?.p_conclusive - limit).abs());
    }
    results.push(CheckResult::measured("idp-reduction", idp, 1e-12, "N=2".into()));

    if !dim.is_power_of_two() {
        for name in ["fourier-butterfly", "netlist-equivalence"] {
            results.push(CheckResult {
                name: name.into(),
                passed: true,
                worst: 0.0,
                tolerance: 0.0,
                detail: format!("skipped: N={n} is not a power of two"),
            });
        }
    } else {
        let mut reference = inverse_fourier::<f64>(dim);
        reference[(0, 0)] += Complex::new(opts.fourier_fault, 0.0);
        let fourier = (&butterfly_unitary::<f64>(dim)? - &reference).max_abs();
        results.push(CheckResult::measured("fourier-butterfly", fourier, DERIVED_TOL, format!("N={n}")));

        let (mut residual, mut click_err, mut crosstalk) = (0.0f64, 0.0f64, 0.0f64);
        for angles in &draws {
            let c = coefficients_from_angles(angles)?;
            let p_d = optimal_probability(&c);
            for l in 0..n {
                let net = compile_full(angles, l)?;
                if l == 0 {
                    let core = net.restricted_to(&[Stage::Conditional, Stage::Projection, Stage::Detection]);
                    let map = abstract_discrimination_map(&c, net.reference_path)?;
                    residual = residual.max(verify_equivalence(&simulate_netlist(&core)?, &map)?);
                }
                let out = simulate_netlist(&net)?.column(Mode::new(0, Polarization::H).index());
                let clicks = click_probabilities(&net, &out);
                for ((label, _), p) in net.detectors().iter().zip(clicks) {
                    if *label == crate::optics::detector_label(l) {
                        click_err = click_err.max((p - p_d).abs());
                    } else if label.starts_with('D') {
                        crosstalk = crosstalk.max(p);
                    }
                }
            }
        }
        let mut check = CheckResult::measured(
            "netlist-equivalence",
            residual,
            EQUIVALENCE_TOL,
            format!("gauge residual {residual:.3e}, click error {click_err:.3e}, cross-talk {crosstalk:.3e}"),
        );
        check.passed &= click_err < DERIVED_TOL && crosstalk < CROSSTALK_TOL;
        results.push(check);
    }

    let mut mismatches = Vec::new();
    for size in [4usize, 8, 16] {
        let d = Dimension::new(size)?;
        let count = count_components(&compile_full(&default_angles::<f64>(d), 0)?);
        let got = (count.hwp, count.pbs, count.bs);
        let expect = expected_core_counts(d)?;
        if got != expect {
            mismatches.push(format!("N={size}: got {got:?}, expected {expect:?}"));
        }
    }
    results.push(CheckResult {
        name: "component-counts".into(),
        passed: mismatches.is_empty(),
        worst: mismatches.len() as f64,
        tolerance: 0.0,
        detail: if mismatches.is_empty() {
            "N=4,8,16 match".into()
        } else {
            mismatches.join("; ")
        },
    });

    Ok(results)
}
