//! Single-photon simulation of netlists and comparison with the abstract protocol.

use std::collections::VecDeque;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::discrimination::{conditional_unitary, inverse_fourier};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, StateVector};
use crate::scalar::{re, Real};
use crate::states::{build_family, CoefficientVector};

use super::{Element, Mode, OpticalNetlist, Polarization};

/// Elementary action on the mode space.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeOp<T> {
    Phase { mode: usize, factor: Complex<T> },
    Pair { modes: [usize; 2], matrix: [[Complex<T>; 2]; 2] },
}

/// A netlist lowered to an ordered sequence of mode operations.
#[derive(Debug, Clone)]
pub struct ModeMap<T> {
    pub num_modes: usize,
    pub ops: Vec<ModeOp<T>>,
}

impl<T: Real> ModeMap<T> {
    /// Dense unitary `U_last ⋯ U_first`.
    pub fn to_matrix(&self) -> CMatrix<T> {
        let mut m = CMatrix::identity(self.num_modes);
        for op in &self.ops {
            match op {
                ModeOp::Phase { mode, factor } => {
                    for j in 0..self.num_modes {
                        m[(*mode, j)] = m[(*mode, j)] * factor;
                    }
                }
                ModeOp::Pair { modes, matrix } => m.rotate_rows(modes[0], modes[1], matrix),
            }
        }
        m
    }

    /// Pushes a state vector through the map in place.
    pub fn propagate(&self, state: &mut [Complex<T>]) {
        for op in &self.ops {
            match op {
                ModeOp::Phase { mode, factor } => state[*mode] = state[*mode] * factor,
                ModeOp::Pair { modes, matrix } => {
                    let (a, b) = (state[modes[0]], state[modes[1]]);
                    state[modes[0]] = matrix[0][0] * a + matrix[0][1] * b;
                    state[modes[1]] = matrix[1][0] * a + matrix[1][1] * b;
                }
            }
        }
    }

    /// Output state for a photon injected in `input`.
    pub fn output_for(&self, input: Mode) -> StateVector<T> {
        let mut state = vec![Complex::zero(); self.num_modes];
        state[input.index()] = Complex::one();
        self.propagate(&mut state);
        StateVector::new_unchecked(state)
    }
}

fn mode(path: usize, pol: Polarization) -> usize {
    Mode::new(path, pol).index()
}

fn real2<T: Real>(m: [[T; 2]; 2]) -> [[Complex<T>; 2]; 2] {
    [[re(m[0][0]), re(m[0][1])], [re(m[1][0]), re(m[1][1])]]
}

/// Lowers a netlist to mode operations.
///
/// `pbs_leakage` is the power fraction a PBS sends to the wrong port (the
/// inverse extinction ratio; zero for ideal splitters). `arm_phase`, when
/// given, is drawn once for each input arm of every beam splitter and applied
/// as a phase error on that arm.
pub fn lower<T: Real>(
    netlist: &OpticalNetlist<T>,
    pbs_leakage: T,
    mut arm_phase: Option<&mut dyn FnMut() -> T>,
) -> Result<ModeMap<T>> {
    netlist.validate()?;
    let (zero, one) = (T::zero(), T::one());
    let swap = real2([[zero, one], [one, zero]]);
    let leak = pbs_leakage.max(zero).min(one);
    let (t, r) = (leak.sqrt(), (one - leak).sqrt());
    let pbs_h = real2([[t, r], [r, -t]]);
    let pbs_v = real2([[r, -t], [t, r]]);
    let h = re(T::FRAC_1_SQRT_2());
    let ih = Complex::new(zero, T::FRAC_1_SQRT_2());
    let bs = [[h, ih], [ih, h]];

    let mut ops = Vec::new();
    for (_, element) in netlist.elements() {
        match element {
            Element::Hwp { angle, path } => {
                let (s, c) = angle.sin_cos();
                ops.push(ModeOp::Pair {
                    modes: [mode(*path, Polarization::H), mode(*path, Polarization::V)],
                    matrix: real2([[c, -s], [s, c]]),
                });
            }
            Element::Pbs { paths: [a, b] } => {
                ops.push(ModeOp::Pair {
                    modes: [mode(*a, Polarization::H), mode(*b, Polarization::H)],
                    matrix: pbs_h,
                });
                if leak > zero {
                    ops.push(ModeOp::Pair {
                        modes: [mode(*a, Polarization::V), mode(*b, Polarization::V)],
                        matrix: pbs_v,
                    });
                }
            }
            Element::Ps { phase, path, pol } => {
                let factor = Complex::from_polar(one, *phase);
                let pols = match pol {
                    Some(p) => vec![*p],
                    None => vec![Polarization::H, Polarization::V],
                };
                for p in pols {
                    ops.push(ModeOp::Phase {
                        mode: mode(*path, p),
                        factor,
                    });
                }
            }
            Element::Bs { paths } => {
                if let Some(draw) = arm_phase.as_mut() {
                    for &p in paths {
                        let factor = Complex::from_polar(one, draw());
                        for pol in [Polarization::H, Polarization::V] {
                            ops.push(ModeOp::Phase {
                                mode: mode(p, pol),
                                factor,
                            });
                        }
                    }
                }
                for pol in [Polarization::H, Polarization::V] {
                    ops.push(ModeOp::Pair {
                        modes: [mode(paths[0], pol), mode(paths[1], pol)],
                        matrix: bs,
                    });
                }
            }
            Element::Mirror { paths } => {
                for pol in [Polarization::H, Polarization::V] {
                    ops.push(ModeOp::Pair {
                        modes: [mode(paths[0], pol), mode(paths[1], pol)],
                        matrix: swap,
                    });
                }
            }
            Element::Det { .. } => {}
        }
    }
    Ok(ModeMap {
        num_modes: netlist.num_modes(),
        ops,
    })
}

/// Composite unitary of an ideal netlist over all `4N` modes.
pub fn simulate_netlist<T: Real>(netlist: &OpticalNetlist<T>) -> Result<CMatrix<T>> {
    Ok(lower(netlist, T::zero(), None)?.to_matrix())
}

/// Click probability of every detector, in netlist order.
pub fn click_probabilities<T: Real>(netlist: &OpticalNetlist<T>, output: &StateVector<T>) -> Vec<T> {
    let amps = output.amplitudes();
    netlist
        .detectors()
        .iter()
        .map(|(_, p)| {
            amps[mode(*p, Polarization::H)].norm_sqr() + amps[mode(*p, Polarization::V)].norm_sqr()
        })
        .collect()
}

/// The map realized by stages II–IV, built from the abstract operators:
/// the system⊗ancilla unitary (ancilla `|0⟩_a` = V), routing of the H light of
/// every non-reference path to its monitor port, and `F⁻¹` on the logical
/// paths of both polarizations.
pub fn abstract_discrimination_map<T: Real>(
    c: &CoefficientVector<T>,
    reference_path: usize,
) -> Result<CMatrix<T>> {
    let dim = c.dim();
    let n = dim.get();
    dim.check_index(reference_path)?;
    let modes = 4 * n;
    let u = conditional_unitary(c)?;
    // Ancilla a ∈ {0, 1} ↦ polarization V, H.
    let ancilla_pol = |a: usize| if a == 0 { Polarization::V } else { Polarization::H };

    let mut u_emb = CMatrix::identity(modes);
    for a in 0..2 {
        for k in 0..n {
            for b in 0..2 {
                for j in 0..n {
                    u_emb[(mode(k, ancilla_pol(a)), mode(j, ancilla_pol(b)))] = u.matrix[(a * n + k, b * n + j)];
                }
            }
        }
    }

    let mut route = CMatrix::identity(modes);
    for k in (0..n).filter(|&k| k != reference_path) {
        let (x, y) = (mode(k, Polarization::H), mode(n + k, Polarization::H));
        route[(x, x)] = Complex::zero();
        route[(y, y)] = Complex::zero();
        route[(x, y)] = Complex::one();
        route[(y, x)] = Complex::one();
    }

    let finv = inverse_fourier::<T>(dim);
    let mut f_emb = CMatrix::identity(modes);
    for pol in [Polarization::H, Polarization::V] {
        for i in 0..n {
            for j in 0..n {
                f_emb[(mode(i, pol), mode(j, pol))] = finv[(i, j)];
            }
        }
    }
    Ok(&(&f_emb * &route) * &u_emb)
}

/// Abstract output for prepared index `l`: `|Ψ_l⟩` on the V modes pushed
/// through [`abstract_discrimination_map`].
pub fn abstract_output_state<T: Real>(
    c: &CoefficientVector<T>,
    l: usize,
    reference_path: usize,
) -> Result<StateVector<T>> {
    let family = build_family(c)?;
    family.dim.check_index(l)?;
    let n = family.dim.get();
    let mut input = vec![Complex::zero(); 4 * n];
    for (k, amp) in family.states[l].amplitudes().iter().enumerate() {
        input[mode(k, Polarization::V)] = *amp;
    }
    Ok(abstract_discrimination_map(c, reference_path)?.matvec(&StateVector::new_unchecked(input)))
}

/// `N×N` path unitary of the butterfly network, read off the V modes of the logical paths.
pub fn butterfly_unitary<T: Real>(dim: crate::states::Dimension) -> Result<CMatrix<T>> {
    let block = super::compile_fourier_inverse::<T>(dim)?;
    let n = dim.get();
    let net = OpticalNetlist {
        dim,
        reference_path: 0,
        prepared_state: None,
        stages: vec![block],
    };
    let u = simulate_netlist(&net)?;
    Ok(CMatrix::from_fn(n, n, |i, j| {
        u[(mode(i, Polarization::V), mode(j, Polarization::V))]
    }))
}

/// Diagonal phase gauges with `D_out · U · D_in ≈ target`.
#[derive(Debug, Clone)]
pub struct GaugeFit<T> {
    pub input_phases: Vec<Complex<T>>,
    pub output_phases: Vec<Complex<T>>,
    /// Frobenius norm of `D_out · U · D_in − target`.
    pub residual: T,
}

fn unit_phase<T: Real>(z: Complex<T>) -> Complex<T> {
    let n = z.norm();
    if n <= T::min_positive_value() {
        Complex::one()
    } else {
        z.unscale(n)
    }
}

fn gauge_residual<T: Real>(u: &CMatrix<T>, target: &CMatrix<T>, d_in: &[Complex<T>], d_out: &[Complex<T>]) -> T {
    let mut acc = T::zero();
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            acc = acc + (d_out[i] * u[(i, j)] * d_in[j] - target[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Fits per-mode input and output phases.
///
/// Phases are seeded by a breadth-first walk over entries significant in both
/// matrices, then refined by alternating exact maximization of
/// `Re Σ conj(target_ij) · o_i U_ij d_j`.
pub fn fit_gauge<T: Real>(u: &CMatrix<T>, target: &CMatrix<T>) -> Result<GaugeFit<T>> {
    if (u.rows(), u.cols()) != (target.rows(), target.cols()) {
        return Err(Error::DimensionMismatch {
            expected: target.rows() * target.cols(),
            found: u.rows() * u.cols(),
        });
    }
    let (rows, cols) = (u.rows(), u.cols());
    let significant = T::of(1e-6) * u.max_abs().max(target.max_abs());
    let mut d_in: Vec<Option<Complex<T>>> = vec![None; cols];
    let mut d_out: Vec<Option<Complex<T>>> = vec![None; rows];

    for root in 0..cols {
        if d_in[root].is_some() {
            continue;
        }
        d_in[root] = Some(Complex::one());
        // Queue entries: (is_column, index)
        let mut queue = VecDeque::from([(true, root)]);
        while let Some((is_col, idx)) = queue.pop_front() {
            if is_col {
                let dj = d_in[idx].expect("visited column");
                for i in 0..rows {
                    let (a, x) = (target[(i, idx)], u[(i, idx)]);
                    if d_out[i].is_none() && a.norm() > significant && x.norm() > significant {
                        d_out[i] = Some(unit_phase(a / (x * dj)));
                        queue.push_back((false, i));
                    }
                }
            } else {
                let oi = d_out[idx].expect("visited row");
                for j in 0..cols {
                    let (a, x) = (target[(idx, j)], u[(idx, j)]);
                    if d_in[j].is_none() && a.norm() > significant && x.norm() > significant {
                        d_in[j] = Some(unit_phase(a / (x * oi)));
                        queue.push_back((true, j));
                    }
                }
            }
        }
    }
    let mut d_in: Vec<_> = d_in.into_iter().map(|d| d.unwrap_or(Complex::one())).collect();
    let mut d_out: Vec<_> = d_out.into_iter().map(|d| d.unwrap_or(Complex::one())).collect();

    let mut residual = gauge_residual(u, target, &d_in, &d_out);
    for _ in 0..200 {
        for i in 0..rows {
            let x = (0..cols).fold(Complex::zero(), |acc, j| acc + target[(i, j)].conj() * u[(i, j)] * d_in[j]);
            d_out[i] = unit_phase(x.conj());
        }
        for j in 0..cols {
            let y = (0..rows).fold(Complex::zero(), |acc, i| acc + target[(i, j)].conj() * d_out[i] * u[(i, j)]);
            d_in[j] = unit_phase(y.conj());
        }
        let next = gauge_residual(u, target, &d_in, &d_out);
        let improved = residual - next;
        residual = next;
        if improved <= T::epsilon() * (T::one() + residual) {
            break;
        }
    }
    Ok(GaugeFit {
        input_phases: d_in,
        output_phases: d_out,
        residual,
    })
}

/// Gauge-fixed distance between a simulated netlist unitary and an abstract map.
pub fn verify_equivalence<T: Real>(netlist_unitary: &CMatrix<T>, abstract_map: &CMatrix<T>) -> Result<T> {
    Ok(fit_gauge(netlist_unitary, abstract_map)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{Stage, StageBlock};
    use crate::states::Dimension;

    fn netlist(n: usize, elements: Vec<Element<f64>>) -> OpticalNetlist<f64> {
        OpticalNetlist {
            dim: Dimension::new(n).unwrap(),
            reference_path: 0,
            prepared_state: None,
            stages: vec![StageBlock {
                stage: Stage::Detection,
                elements,
            }],
        }
    }

    #[test]
    fn single_mode_phase_is_diagonal() {
        let net = netlist(
            2,
            vec![Element::Ps {
                phase: 0.3,
                path: 1,
                pol: Some(Polarization::V),
            }],
        );
        let u = simulate_netlist(&net).unwrap();
        let mut expect = CMatrix::identity(8);
        expect[(3, 3)] = Complex::from_polar(1.0, 0.3);
        assert!((&u - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn disjoint_elements_commute() {
        let a = Element::Hwp { angle: 0.7, path: 0 };
        let b = Element::Bs { paths: [1, 2] };
        let u1 = simulate_netlist(&netlist(2, vec![a.clone(), b.clone()])).unwrap();
        let u2 = simulate_netlist(&netlist(2, vec![b, a])).unwrap();
        assert!((&u1 - &u2).max_abs() < 1e-14);
    }

    #[test]
    fn leaky_pbs_stays_unitary() {
        let net = netlist(2, vec![Element::Pbs { paths: [0, 1] }, Element::Pbs { paths: [1, 3] }]);
        let u = lower(&net, 1e-3, None).unwrap().to_matrix();
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn gauge_identity_and_phases() {
        let u = simulate_netlist(&netlist(2, vec![Element::Bs { paths: [0, 1] }])).unwrap();
        assert_eq!(verify_equivalence(&u, &u).unwrap(), 0.0);
        let phases: Vec<_> = (0..8).map(|k| Complex::from_polar(1.0, 0.37 * k as f64)).collect();
        let dressed = &(&CMatrix::from_diag(&phases) * &u) * &CMatrix::from_diag(&phases[..].iter().rev().copied().collect::<Vec<_>>());
        assert!(verify_equivalence(&dressed, &u).unwrap() < 1e-12);
    }

    #[test]
    fn gauge_rejects_shape_mismatch() {
        let a = CMatrix::<f64>::identity(2);
        let b = CMatrix::<f64>::identity(3);
        assert!(matches!(verify_equivalence(&a, &b), Err(Error::DimensionMismatch { .. })));
    }
}
