use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use symdisc::discrimination::fourier_state;
use symdisc::states::z_operator;
use symdisc::{
    angles_from_coefficients, apply_protocol, apply_protocol_all, build_family, build_povm,
    coefficients_from_angles, conditional_unitary, failure_rank, idp_probability,
    optimal_probability, verify_completeness, AngleVector, CoefficientVector,
};

fn angles(max_dim: usize) -> impl Strategy<Value = AngleVector<f64>> {
    (2..=max_dim)
        .prop_flat_map(|n| prop::collection::vec(0.02..FRAC_PI_2 - 0.02, n - 1))
        .prop_map(|t| AngleVector::new(t).unwrap())
}

fn coefficients(max_dim: usize) -> impl Strategy<Value = CoefficientVector<f64>> {
    angles(max_dim).prop_map(|a| coefficients_from_angles(&a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn angle_round_trip(a in angles(8)) {
        let c = coefficients_from_angles(&a).unwrap();
        let back = angles_from_coefficients(&c).unwrap();
        for (x, y) in a.as_slice().iter().zip(back.as_slice()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn states_normalized_and_symmetric(c in coefficients(8)) {
        let fam = build_family(&c).unwrap();
        let z = z_operator::<f64>(fam.dim);
        for l in 0..fam.dim.get() {
            prop_assert!((fam.states[l].norm() - 1.0).abs() < 1e-12);
            prop_assert!(z.pow(l).matvec(&fam.states[0]).max_abs_diff(&fam.states[l]) < 1e-12);
            prop_assert!(z.pow(l).matvec(&fam.reciprocals[0]).max_abs_diff(&fam.reciprocals[l]) < 1e-10);
        }
    }

    #[test]
    fn reciprocals_biorthogonal(c in coefficients(8)) {
        prop_assert!(build_family(&c).unwrap().biorthogonality_defect() < 1e-10);
    }

    #[test]
    fn gram_determinant_is_product_of_eigenvalues(c in coefficients(6)) {
        let fam = build_family(&c).unwrap();
        let n = fam.dim.get() as f64;
        let closed: f64 = c.as_slice().iter().map(|x| n * x * x).product();
        let det = fam.gram_determinant();
        prop_assert!(det > 0.0);
        prop_assert!((det - closed).abs() <= 1e-10 * closed.max(1e-300) + 1e-14);
    }

    #[test]
    fn povm_complete(c in coefficients(8)) {
        prop_assert!(verify_completeness(&build_povm(&c).unwrap()) < 1e-10);
    }

    #[test]
    fn conditional_unitary_is_unitary(c in coefficients(8)) {
        let u = conditional_unitary(&c).unwrap();
        prop_assert!(u.matrix.unitarity_defect() < 1e-10);
        prop_assert!(u.has_block_structure(0.0));
    }

    #[test]
    fn conclusive_clicks_never_misidentify(c in coefficients(8)) {
        let n = c.dim().get();
        for out in apply_protocol_all(&c).unwrap() {
            for k in (0..n).filter(|&k| k != out.input_index) {
                let u_k = fourier_state::<f64>(c.dim(), k);
                prop_assert!(u_k.inner(&out.conclusive_state).norm_sqr() < 1e-20);
                prop_assert!(out.fourier_click_distribution[k] < 1e-20);
            }
        }
    }

    #[test]
    fn success_is_uniform_and_saturates_bound(c in coefficients(8)) {
        let bound = optimal_probability(&c);
        let ps: Vec<f64> = apply_protocol_all(&c).unwrap().iter().map(|o| o.p_conclusive).collect();
        let (lo, hi) = ps.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        prop_assert!(hi - lo < 1e-12);
        prop_assert!((ps[0] - bound).abs() < 1e-12);
    }

    #[test]
    fn two_states_reach_overlap_limit(theta in 1e-3..=std::f64::consts::FRAC_PI_4) {
        let c = coefficients_from_angles(&AngleVector::new(vec![theta]).unwrap()).unwrap();
        let fam = build_family(&c).unwrap();
        let limit = idp_probability(&fam.states[0], &fam.states[1]);
        prop_assert!((apply_protocol(&c, 0).unwrap().p_conclusive - limit).abs() < 1e-12);
        prop_assert!((limit - (1.0 - (2.0 * theta).cos())).abs() < 1e-12);
    }

    #[test]
    fn shrinking_the_minimum_never_helps(c in coefficients(8), shrink in 0.05..1.0f64) {
        let (kmin, _) = c.min_coefficient();
        let mut raw = c.as_slice().to_vec();
        raw[kmin] *= shrink;
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let smaller = CoefficientVector::new(raw.iter().map(|x| x / norm).collect()).unwrap();
        prop_assert!(optimal_probability(&smaller) <= optimal_probability(&c) + 1e-15);
    }

    #[test]
    fn failure_states_dependent(c in coefficients(8)) {
        let n = c.dim().get();
        let outcomes = apply_protocol_all(&c).unwrap();
        prop_assert!(failure_rank(&outcomes, 1e-9) < n);
    }
}
