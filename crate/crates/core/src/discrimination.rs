//! POVM synthesis for optimal unambiguous discrimination of symmetric states.
//!
//! The conclusive branch is the diagonal filter `A_s = diag(c_min / c_k)`, the
//! inconclusive branch `A_I = diag(√(1 − (c_min/c_k)²))`, and both are embedded
//! in the system⊗ancilla unitary `[[A_s, −A_I], [A_I, A_s]]`. Composite
//! vectors are ordered ancilla-major: index `a·N + k` for ancilla `a` and
//! logical state `k`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, numerical_rank, CMatrix, StateVector};
use crate::scalar::{re, root_of_unity, Real};
use crate::states::{build_family, CoefficientVector, Dimension, SymmetricFamily};

/// Chefles bound `N · min_k c_k²`.
pub fn optimal_probability<T: Real>(c: &CoefficientVector<T>) -> T {
    let (_, cmin) = c.min_coefficient();
    T::of(c.dim().get() as f64) * cmin * cmin
}

/// Diagonal entries `c_min / c_k` of the conclusive filter.
///
/// Ratios within a few ulps of one are rounded to one, so coefficients that
/// tie mathematically but differ in the last bit get no filter.
pub fn success_diagonal<T: Real>(c: &CoefficientVector<T>) -> Result<Vec<T>> {
    c.require_nonzero()?;
    let (_, cmin) = c.min_coefficient();
    let unit = T::one() - T::of(4.0) * T::epsilon();
    Ok(c
        .as_slice()
        .iter()
        .map(|&ck| {
            let s = cmin / ck;
            if s >= unit {
                T::one()
            } else {
                s
            }
        })
        .collect())
}

/// Diagonal entries `√(1 − (c_min/c_k)²)` of the inconclusive filter.
pub fn failure_diagonal<T: Real>(c: &CoefficientVector<T>) -> Result<Vec<T>> {
    Ok(success_diagonal(c)?
        .into_iter()
        .map(|s| (T::one() - s * s).max(T::zero()).sqrt())
        .collect())
}

/// `A_s`, the conclusive (success) operator.
pub fn success_operator<T: Real>(c: &CoefficientVector<T>) -> Result<CMatrix<T>> {
    Ok(CMatrix::from_real_diag(&success_diagonal(c)?))
}

/// `A_I`, the inconclusive (failure) operator.
pub fn failure_operator<T: Real>(c: &CoefficientVector<T>) -> Result<CMatrix<T>> {
    Ok(CMatrix::from_real_diag(&failure_diagonal(c)?))
}

/// System⊗ancilla unitary in block form over the ancilla basis `{|0⟩_a, |1⟩_a}`.
#[derive(Debug, Clone)]
pub struct ConditionalUnitary<T> {
    pub matrix: CMatrix<T>,
}

impl<T: Real> ConditionalUnitary<T> {
    pub fn dim(&self) -> usize {
        self.matrix.rows() / 2
    }

    /// Block `(row, col)` with `row, col ∈ {0, 1}` indexing the ancilla.
    pub fn block(&self, row: usize, col: usize) -> CMatrix<T> {
        let n = self.dim();
        self.matrix.submatrix(row * n, col * n, n, n)
    }

    /// Whether the diagonal blocks coincide and the off-diagonal blocks are opposite.
    pub fn has_block_structure(&self, tol: T) -> bool {
        let same = (&self.block(0, 0) - &self.block(1, 1)).max_abs() <= tol;
        let opposite = (&self.block(0, 1) + &self.block(1, 0)).max_abs() <= tol;
        same && opposite
    }
}

pub fn conditional_unitary<T: Real>(c: &CoefficientVector<T>) -> Result<ConditionalUnitary<T>> {
    let a_s = success_operator(c)?;
    let a_i = failure_operator(c)?;
    let minus_a_i = a_i.scale(re(-T::one()));
    Ok(ConditionalUnitary {
        matrix: CMatrix::block2(&a_s, &minus_a_i, &a_i, &a_s),
    })
}

/// `F` with `F_{kl} = N^{-1/2} e^{2πikl/N}`, so that `F|l⟩ = |u_l⟩`.
pub fn fourier<T: Real>(dim: Dimension) -> CMatrix<T> {
    let n = dim.get();
    let norm = re(T::of(n as f64).sqrt().recip());
    CMatrix::from_fn(n, n, |k, l| root_of_unity::<T>(k * l, n) * norm)
}

/// `F⁻¹ = F†`, the transform realized by the multiport interferometer.
pub fn inverse_fourier<T: Real>(dim: Dimension) -> CMatrix<T> {
    let n = dim.get();
    let norm = re(T::of(n as f64).sqrt().recip());
    CMatrix::from_fn(n, n, |k, l| root_of_unity::<T>(k * l, n).conj() * norm)
}

/// Conclusive Fourier state `|u_l⟩`.
pub fn fourier_state<T: Real>(dim: Dimension, l: usize) -> StateVector<T> {
    fourier(dim).column(l)
}

/// Chefles detection operators `A_k = √p / ⟨Ψ_k^⊥|Ψ_k⟩ · |u_k⟩⟨Ψ_k^⊥|`.
///
/// Any `p` up to the Chefles bound is accepted; beyond it `I − Σ A_k†A_k`
/// has a negative eigenvalue and no inconclusive element exists.
pub fn detection_operators<T: Real>(family: &SymmetricFamily<T>, p: T) -> Result<Vec<CMatrix<T>>> {
    let n = family.dim.get();
    let bound = optimal_probability(&family.coefficients);
    if !(p >= T::zero()) || p > T::one() {
        return Err(Error::ProbabilityOutOfRange {
            p: p.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
        });
    }
    let ops: Vec<CMatrix<T>> = (0..n)
        .map(|k| {
            let u = fourier_state(family.dim, k);
            let denom = family.reciprocals[k].inner(&family.states[k]);
            CMatrix::outer(&u, &family.reciprocals[k]).scale(re(p.sqrt()) / denom)
        })
        .collect();

    let residual = &CMatrix::identity(n) - &sum_of_effects(&ops, n);
    let min_eig = hermitian_eigenvalues(&residual)?[0];
    if min_eig < -T::derived_tol() {
        return Err(Error::ProbabilityOutOfRange {
            p: p.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
        });
    }
    Ok(ops)
}

fn sum_of_effects<T: Real>(ops: &[CMatrix<T>], n: usize) -> CMatrix<T> {
    ops.iter()
        .fold(CMatrix::zeros(n, n), |acc, a| &acc + &(&a.adjoint() * a))
}

/// The complete measurement: detection operators plus the two filters.
#[derive(Debug, Clone)]
pub struct Povm<T> {
    pub detection_ops: Vec<CMatrix<T>>,
    pub success_op: CMatrix<T>,
    pub failure_op: CMatrix<T>,
    pub p_success: T,
}

impl<T: Real> Povm<T> {
    /// `Σ_k A_k†A_k`
    pub fn conclusive_effect(&self) -> CMatrix<T> {
        sum_of_effects(&self.detection_ops, self.success_op.rows())
    }
}

/// Optimal POVM at `p = p_D`.
pub fn build_povm<T: Real>(c: &CoefficientVector<T>) -> Result<Povm<T>> {
    let family = build_family(c)?;
    let p = optimal_probability(c);
    Ok(Povm {
        detection_ops: detection_operators(&family, p)?,
        success_op: success_operator(c)?,
        failure_op: failure_operator(c)?,
        p_success: p,
    })
}

/// Operator-norm residual `‖Σ A_k†A_k + A_I†A_I − I‖`.
pub fn verify_completeness<T: Real>(povm: &Povm<T>) -> T {
    let n = povm.success_op.rows();
    let fail = &povm.failure_op.adjoint() * &povm.failure_op;
    let total = &povm.conclusive_effect() + &fail;
    (&total - &CMatrix::identity(n)).operator_norm()
}

/// Two-state unambiguous discrimination limit `1 − |⟨Ψ_+|Ψ_−⟩|`.
pub fn idp_probability<T: Real>(psi_plus: &StateVector<T>, psi_minus: &StateVector<T>) -> T {
    T::one() - psi_plus.inner(psi_minus).norm()
}

/// Result of running one prepared state through the protocol.
#[derive(Debug, Clone)]
pub struct ProtocolOutcome<T> {
    pub input_index: usize,
    pub p_conclusive: T,
    /// Normalized ancilla-|0⟩ branch; equals `|u_l⟩`.
    pub conclusive_state: StateVector<T>,
    /// Normalized ancilla-|1⟩ branch `|φ_l⟩`; absent when the failure branch vanishes.
    pub failure_state: Option<StateVector<T>>,
    /// Unnormalized failure branch `√(1 − p) |φ_l⟩`.
    pub failure_branch: StateVector<T>,
    /// Path-click distribution after `F⁻¹` on the conclusive branch.
    pub fourier_click_distribution: Vec<T>,
}

/// Applies `U` to `|Ψ_l⟩ ⊗ |0⟩_a`, projects the ancilla and reads out the conclusive branch in the Fourier basis.
pub fn apply_protocol<T: Real>(c: &CoefficientVector<T>, l: usize) -> Result<ProtocolOutcome<T>> {
    let family = build_family(c)?;
    let dim = family.dim;
    dim.check_index(l)?;
    let n = dim.get();
    let u = conditional_unitary(c)?;

    let mut input = family.states[l].amplitudes().to_vec();
    input.resize(2 * n, Complex::zero());
    let out = u.matrix.matvec(&StateVector::new_unchecked(input));
    let (conclusive, failure) = out.amplitudes().split_at(n);
    let conclusive = StateVector::new_unchecked(conclusive.to_vec());
    let failure_branch = StateVector::new_unchecked(failure.to_vec());

    let p_conclusive = conclusive.norm_sqr();
    let conclusive_state = conclusive
        .normalized()
        .expect("conclusive branch is nonzero for nonzero coefficients");
    let failure_state = if failure_branch.norm_sqr() > T::construction_tol() {
        failure_branch.normalized()
    } else {
        None
    };
    let fourier_click_distribution = inverse_fourier(dim).matvec(&conclusive_state).probabilities();

    Ok(ProtocolOutcome {
        input_index: l,
        p_conclusive,
        conclusive_state,
        failure_state,
        failure_branch,
        fourier_click_distribution,
    })
}

/// Runs every prepared index through the protocol.
pub fn apply_protocol_all<T: Real>(c: &CoefficientVector<T>) -> Result<Vec<ProtocolOutcome<T>>> {
    (0..c.dim().get()).map(|l| apply_protocol(c, l)).collect()
}

/// Rank of the matrix whose columns are the unnormalized failure branches.
pub fn failure_rank<T: Real>(outcomes: &[ProtocolOutcome<T>], threshold: T) -> usize {
    let cols: Vec<_> = outcomes.iter().map(|o| o.failure_branch.clone()).collect();
    numerical_rank(&CMatrix::from_columns(&cols), threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{coefficients_from_angles, AngleVector};
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    fn paper_case() -> CoefficientVector<f64> {
        coefficients_from_angles(&AngleVector::new(vec![FRAC_PI_3, 0.3 * PI, FRAC_PI_4]).unwrap()).unwrap()
    }

    #[test]
    fn equal_amplitudes_saturate() {
        let c = CoefficientVector::new(vec![0.5; 4]).unwrap();
        assert!((optimal_probability(&c) - 1.0f64).abs() < 1e-15);
        assert_eq!(success_operator(&c).unwrap(), CMatrix::identity(4));
        assert_eq!(failure_operator(&c).unwrap(), CMatrix::zeros(4, 4));
        let u = conditional_unitary(&c).unwrap();
        assert_eq!(u.matrix, CMatrix::identity(8));
        let povm = build_povm(&c).unwrap();
        assert!(verify_completeness(&povm) < 1e-12);
    }

    #[test]
    fn four_state_filters_match_closed_forms() {
        let (t1, t2, t3) = (FRAC_PI_3, 0.3 * PI, FRAC_PI_4);
        let c = paper_case();
        let s = success_diagonal(&c).unwrap();
        let expect = [t3.sin() * t2.sin() * t1.tan(), t3.sin() * t2.tan(), t3.tan(), 1.0];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let f = failure_diagonal(&c).unwrap();
        for (a, b) in f.iter().zip(expect) {
            assert!((a - (1.0 - b * b).max(0.0).sqrt()).abs() < 1e-7, "{a}");
        }
        assert_eq!(f[3], 0.0);
    }

    #[test]
    fn zero_coefficient_rejected() {
        let c = CoefficientVector::new(vec![0.6, 0.8, 0.0]).unwrap();
        assert!(matches!(success_operator(&c), Err(Error::ZeroCoefficient { index: 2 })));
        assert!(matches!(apply_protocol(&c, 0), Err(Error::ZeroCoefficient { .. })));
    }

    #[test]
    fn state_index_checked() {
        let c = paper_case();
        assert!(matches!(
            apply_protocol(&c, 4),
            Err(Error::IndexOutOfRange { index: 4, dim: 4 })
        ));
    }

    #[test]
    fn detection_operators_zero_probability() {
        let fam = build_family(&paper_case()).unwrap();
        for a in detection_operators(&fam, 0.0).unwrap() {
            assert_eq!(a.max_abs(), 0.0);
        }
    }

    #[test]
    fn detection_operators_reject_above_bound() {
        let c = paper_case();
        let fam = build_family(&c).unwrap();
        let p = optimal_probability(&c);
        assert!(matches!(
            detection_operators(&fam, p + 0.01),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(detection_operators(&fam, 0.5 * p).is_ok());
    }

    #[test]
    fn detection_operator_maps_state_to_fourier_vector() {
        let c = paper_case();
        let fam = build_family(&c).unwrap();
        let p = optimal_probability(&c);
        let ops = detection_operators(&fam, p).unwrap();
        for (k, a) in ops.iter().enumerate() {
            let img = a.matvec(&fam.states[k]);
            let expect = fourier_state::<f64>(fam.dim, k).scaled(re(p.sqrt()));
            assert!(img.max_abs_diff(&expect) < 1e-10);
        }
    }

    #[test]
    fn inverse_fourier_second_row() {
        let f = inverse_fourier::<f64>(Dimension::new(4).unwrap());
        let row = [
            Complex::new(0.5, 0.0),
            Complex::new(0.0, -0.5),
            Complex::new(-0.5, 0.0),
            Complex::new(0.0, 0.5),
        ];
        for (j, v) in row.iter().enumerate() {
            assert!((f[(1, j)] - v).norm() < 1e-15);
        }
    }

    #[test]
    fn two_point_fourier() {
        let f = fourier::<f64>(Dimension::new(2).unwrap());
        let h = 1.0 / 2f64.sqrt();
        let expect = [[h, h], [h, -h]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((f[(i, j)] - re(expect[i][j])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn idp_extremes() {
        let a = StateVector::<f64>::basis(2, 0);
        let b = StateVector::<f64>::basis(2, 1);
        assert_eq!(idp_probability(&a, &b), 1.0);
        assert_eq!(idp_probability(&a, &a), 0.0);
    }

    #[test]
    fn failure_states_are_dependent() {
        let c = coefficients_from_angles(&AngleVector::new(vec![0.9, 1.0, 0.4]).unwrap()).unwrap();
        let outcomes = apply_protocol_all(&c).unwrap();
        assert_eq!(failure_rank(&outcomes, 1e-10), 3);
    }

    #[test]
    fn works_in_single_precision() {
        let c = coefficients_from_angles(&AngleVector::new(vec![0.9f32, 1.0, 0.4]).unwrap()).unwrap();
        let out = apply_protocol(&c, 2).unwrap();
        assert!((out.p_conclusive - optimal_probability(&c)).abs() < f32::derived_tol());
        let povm = build_povm(&c).unwrap();
        assert!(verify_completeness(&povm) < f32::derived_tol());
    }
}
