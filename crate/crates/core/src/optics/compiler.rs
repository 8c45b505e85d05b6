use crate::discrimination::success_diagonal;
use crate::error::Result;
use crate::scalar::Real;
use crate::states::{coefficients_from_angles, AngleVector, CoefficientVector, Dimension};

use super::{Element, OpticalNetlist, Stage, StageBlock};

fn require_power_of_two(dim: Dimension) -> Result<usize> {
    dim.log2()?;
    Ok(dim.get())
}

/// Detector label for prepared index `l`.
pub fn detector_label(l: usize) -> String {
    format!("D{}", l + 1)
}

/// Monitor label for the inconclusive port of logical path `k`.
pub fn monitor_label(k: usize) -> String {
    format!("M{k}")
}

/// Generic angles with a unique smallest coefficient on the last path:
/// `θ_j = π/3` for `j < N − 1` and `θ_{N−1} = π/6`.
pub fn default_angles<T: Real>(dim: Dimension) -> AngleVector<T> {
    let n = dim.get();
    let mut thetas = vec![T::FRAC_PI_3(); n - 1];
    thetas[n - 2] = T::FRAC_PI_6();
    AngleVector::new(thetas).expect("default angles are inside the domain")
}

/// Stage I: HWP/PBS cascade leaving `Σ c_k |k⟩` with V polarization on every
/// path, then the phase shifters realizing `Z^l`.
pub fn compile_preparation<T: Real>(angles: &AngleVector<T>, l: usize) -> Result<StageBlock<T>> {
    let dim = angles.dim();
    let n = require_power_of_two(dim)?;
    dim.check_index(l)?;
    let mut block = StageBlock::new(Stage::Preparation);
    for (k, &theta) in angles.as_slice().iter().enumerate() {
        // H → sin θ H + cos θ V; the V part stays on path k, H crosses to k + 1.
        block.push(Element::Hwp {
            angle: T::FRAC_PI_2() - theta,
            path: k,
        });
        block.push(Element::Pbs { paths: [k, k + 1] });
    }
    block.push(Element::Hwp {
        angle: T::FRAC_PI_2(),
        path: n - 1,
    });
    for k in 1..n {
        let turns = (l * k) % n;
        if turns != 0 {
            block.push(Element::Ps {
                phase: T::TAU() * T::of(turns as f64) / T::of(n as f64),
                path: k,
                pol: None,
            });
        }
    }
    Ok(block)
}

/// Stage II from explicit coefficients.
pub(crate) fn conditional_block<T: Real>(c: &CoefficientVector<T>) -> Result<StageBlock<T>> {
    require_power_of_two(c.dim())?;
    let mut block = StageBlock::new(Stage::Conditional);
    for (k, s) in success_diagonal(c)?.into_iter().enumerate() {
        if s >= T::one() {
            continue;
        }
        // V → s V + √(1 − s²) H, i.e. a rotation by −arccos(s).
        block.push(Element::Hwp {
            angle: -s.acos(),
            path: k,
        });
    }
    Ok(block)
}

/// Stage II: one polarization rotation per path whose conclusive filter is below one.
pub fn compile_conditional<T: Real>(angles: &AngleVector<T>) -> Result<StageBlock<T>> {
    conditional_block(&coefficients_from_angles(angles)?)
}

/// Stage III: a PBS on every logical path except the reference one, sending
/// H light to that path's monitor port.
pub fn compile_projection<T: Real>(dim: Dimension, reference_path: usize) -> Result<StageBlock<T>> {
    let n = require_power_of_two(dim)?;
    dim.check_index(reference_path)?;
    let mut block = StageBlock::new(Stage::Projection);
    for k in (0..n).filter(|&k| k != reference_path) {
        block.push(Element::Pbs { paths: [k, n + k] });
    }
    Ok(block)
}

fn wrap_phase<T: Real>(phi: T) -> T {
    let tau = T::TAU();
    let mut w = phi % tau;
    if w > T::PI() {
        w = w - tau;
    } else if w <= -T::PI() {
        w = w + tau;
    }
    w
}

struct PhaseLedger<T> {
    pending: Vec<T>,
}

impl<T: Real> PhaseLedger<T> {
    fn flush(&mut self, path: usize, block: &mut StageBlock<T>) {
        let phase = wrap_phase(self.pending[path]);
        self.pending[path] = T::zero();
        if phase.abs() > T::of(1e-12) {
            block.push(Element::Ps {
                phase,
                path,
                pol: None,
            });
        }
    }
}

/// Stage IV optics: radix-2 butterfly network realizing `F⁻¹` on the logical paths.
///
/// Inputs are put in bit-reversed order with mirror exchanges, then each
/// butterfly `(a, b) → ((a + w b)/√2, (a − w b)/√2)` is a 50:50 coupler
/// dressed by phase shifters, `diag(1, −i) · BS · diag(1, −i·w)`. Adjacent
/// phase shifters on a path are merged.
pub fn compile_fourier_inverse<T: Real>(dim: Dimension) -> Result<StageBlock<T>> {
    let n = require_power_of_two(dim)?;
    let bits = dim.log2()?;
    let mut block = StageBlock::new(Stage::Detection);

    for i in 0..n {
        let r = i.reverse_bits() >> (usize::BITS - bits);
        if i < r {
            block.push(Element::Mirror { paths: [i, r] });
        }
    }

    let mut ledger = PhaseLedger {
        pending: vec![T::zero(); n],
    };
    let mut m = 2;
    while m <= n {
        let half = m / 2;
        for start in (0..n).step_by(m) {
            for j in 0..half {
                let (a, b) = (start + j, start + j + half);
                // twiddle e^{−2πi j/m}
                let twiddle = -T::TAU() * T::of(j as f64) / T::of(m as f64);
                ledger.pending[b] = ledger.pending[b] + twiddle - T::FRAC_PI_2();
                ledger.flush(a, &mut block);
                ledger.flush(b, &mut block);
                block.push(Element::Bs { paths: [a, b] });
                ledger.pending[b] = ledger.pending[b] - T::FRAC_PI_2();
            }
        }
        m *= 2;
    }
    for p in 0..n {
        ledger.flush(p, &mut block);
    }
    Ok(block)
}

/// Full setup for prepared index `l`: stages I–IV with monitor detectors on
/// the inconclusive ports and `D_1 … D_N` on the Fourier outputs.
pub fn compile_full<T: Real>(angles: &AngleVector<T>, l: usize) -> Result<OpticalNetlist<T>> {
    let dim = angles.dim();
    let n = require_power_of_two(dim)?;
    let c = coefficients_from_angles(angles)?;
    let (reference_path, _) = c.min_coefficient();

    let preparation = compile_preparation(angles, l)?;
    let conditional = conditional_block(&c)?;
    let mut projection = compile_projection(dim, reference_path)?;
    for k in (0..n).filter(|&k| k != reference_path) {
        projection.push(Element::Det {
            label: monitor_label(k),
            path: n + k,
        });
    }
    let mut detection = compile_fourier_inverse(dim)?;
    for p in 0..n {
        detection.push(Element::Det {
            label: detector_label(p),
            path: p,
        });
    }

    let netlist = OpticalNetlist {
        dim,
        reference_path,
        prepared_state: Some(l),
        stages: vec![preparation, conditional, projection, detection],
    };
    netlist.validate()?;
    Ok(netlist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::optics::{count_components, Element};

    #[test]
    fn non_power_of_two_rejected() {
        let angles = AngleVector::new(vec![0.5, 0.6]).unwrap();
        assert_eq!(
            compile_preparation(&angles, 0).unwrap_err(),
            Error::DimensionNotPowerOfTwo(3)
        );
        assert_eq!(
            compile_fourier_inverse::<f64>(Dimension::new(6).unwrap()).unwrap_err(),
            Error::DimensionNotPowerOfTwo(6)
        );
    }

    #[test]
    fn preparation_shape_four_paths() {
        let angles = default_angles::<f64>(Dimension::new(4).unwrap());
        let block = compile_preparation(&angles, 0).unwrap();
        let hwp = block.elements.iter().filter(|e| matches!(e, Element::Hwp { .. })).count();
        let pbs = block.elements.iter().filter(|e| matches!(e, Element::Pbs { .. })).count();
        let ps = block.elements.iter().filter(|e| matches!(e, Element::Ps { .. })).count();
        assert_eq!((hwp, pbs, ps), (4, 3, 0));
    }

    #[test]
    fn equal_amplitudes_need_no_conditional_rotation() {
        let c = CoefficientVector::new(vec![0.5; 4]).unwrap();
        assert!(conditional_block(&c).unwrap().elements.is_empty());
    }

    #[test]
    fn butterfly_counts() {
        for (n, bs) in [(2, 1), (4, 4), (8, 12), (16, 32)] {
            let block = compile_fourier_inverse::<f64>(Dimension::new(n).unwrap()).unwrap();
            let count = block.elements.iter().filter(|e| matches!(e, Element::Bs { .. })).count();
            assert_eq!(count, bs, "N = {n}");
        }
    }

    #[test]
    fn default_angles_have_unique_minimum_last() {
        for n in [2, 4, 8, 16] {
            let dim = Dimension::new(n).unwrap();
            let c = coefficients_from_angles(&default_angles::<f64>(dim)).unwrap();
            let (k, cmin) = c.min_coefficient();
            assert_eq!(k, n - 1);
            assert!(c.as_slice()[..n - 1].iter().all(|&x| x > cmin * (1.0 + 1e-6)));
            let net = compile_full(&default_angles::<f64>(dim), 0).unwrap();
            let count = count_components(&net);
            assert_eq!(count.detectors, 2 * n - 1);
        }
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_phase(-0.25f64) + 0.25).abs() < 1e-15);
    }
}
