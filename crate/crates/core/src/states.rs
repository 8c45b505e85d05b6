//! Symmetric state families `|Ψ_l⟩ = Z^l |Ψ_0⟩`, their hyperspherical
//! parametrization and the biorthogonal reciprocal states.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, StateVector};
use crate::scalar::{re, root_of_unity, Real};

/// Hilbert-space dimension `N`, equal to the number of states in the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn is_power_of_two(self) -> bool {
        self.0.is_power_of_two()
    }

    /// `M` with `N = 2^M`, or an error when `N` is not a power of two.
    pub fn log2(self) -> Result<u32> {
        if self.is_power_of_two() {
            Ok(self.0.trailing_zeros())
        } else {
            Err(Error::DimensionNotPowerOfTwo(self.0))
        }
    }

    pub fn check_index(self, index: usize) -> Result<usize> {
        if index < self.0 {
            Ok(index)
        } else {
            Err(Error::IndexOutOfRange { index, dim: self.0 })
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

/// Hyperspherical angles `θ_1 … θ_{N−1}`, each in the open interval `(0, π/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleVector<T> {
    thetas: Vec<T>,
}

impl<T: Real> AngleVector<T> {
    pub fn new(thetas: Vec<T>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::DimensionTooSmall(1));
        }
        for (i, &t) in thetas.iter().enumerate() {
            if !(t > T::zero() && t < T::FRAC_PI_2()) {
                return Err(Error::AngleOutOfDomain {
                    index: i + 1,
                    value: t.to_f64_lossy(),
                });
            }
        }
        Ok(Self { thetas })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.thetas
    }

    pub fn dim(&self) -> Dimension {
        Dimension(self.thetas.len() + 1)
    }
}

/// Real, non-negative amplitudes `c_k` of the seed state, normalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientVector<T> {
    c: Vec<T>,
}

impl<T: Real> CoefficientVector<T> {
    /// Accepts non-negative, normalized amplitudes. Zeros are allowed here and
    /// rejected by the operations that need invertibility.
    pub fn new(c: Vec<T>) -> Result<Self> {
        Dimension::new(c.len())?;
        for (index, &v) in c.iter().enumerate() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::NonPositiveCoefficient {
                    index,
                    value: v.to_f64_lossy(),
                });
            }
        }
        let sum_sq = c.iter().fold(T::zero(), |acc, &x| acc + x * x);
        if (sum_sq - T::one()).abs() > T::construction_tol() {
            return Err(Error::NotNormalized {
                sum_sq: sum_sq.to_f64_lossy(),
            });
        }
        Ok(Self { c })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.c
    }

    pub fn dim(&self) -> Dimension {
        Dimension(self.c.len())
    }

    /// Index and magnitude of the smallest coefficient; ties go to the lowest index.
    pub fn min_coefficient(&self) -> (usize, T) {
        let mut best = (0, self.c[0].abs());
        for (k, &v) in self.c.iter().enumerate().skip(1) {
            if v.abs() < best.1 {
                best = (k, v.abs());
            }
        }
        best
    }

    /// Fails with [`Error::ZeroCoefficient`] on the first vanishing amplitude.
    pub fn require_nonzero(&self) -> Result<()> {
        match self.c.iter().position(|&v| v == T::zero()) {
            Some(index) => Err(Error::ZeroCoefficient { index }),
            None => Ok(()),
        }
    }

    /// The seed state `|Ψ_0⟩ = Σ c_k |k⟩`.
    pub fn seed_state(&self) -> StateVector<T> {
        StateVector::new_unchecked(self.c.iter().map(|&x| re(x)).collect())
    }
}

/// Maps hyperspherical angles to amplitudes:
/// `c_0 = cos θ_1`, `c_k = cos θ_{k+1} Π_{j≤k} sin θ_j`, `c_{N−1} = Π_j sin θ_j`.
pub fn coefficients_from_angles<T: Real>(angles: &AngleVector<T>) -> Result<CoefficientVector<T>> {
    let thetas = angles.as_slice();
    let mut c = Vec::with_capacity(thetas.len() + 1);
    let mut sin_prod = T::one();
    for &t in thetas {
        let (s, co) = t.sin_cos();
        c.push(co * sin_prod);
        sin_prod = sin_prod * s;
    }
    c.push(sin_prod);
    CoefficientVector::new(c)
}

/// Inverse of [`coefficients_from_angles`] for strictly positive amplitudes.
pub fn angles_from_coefficients<T: Real>(c: &CoefficientVector<T>) -> Result<AngleVector<T>> {
    let c = c.as_slice();
    if let Some(index) = c.iter().position(|&v| v <= T::zero()) {
        return Err(Error::NonPositiveCoefficient {
            index,
            value: c[index].to_f64_lossy(),
        });
    }
    // tail[k] = ‖(c_k, …, c_{N−1})‖
    let mut tail = vec![T::zero(); c.len() + 1];
    for k in (0..c.len()).rev() {
        tail[k] = (tail[k + 1] * tail[k + 1] + c[k] * c[k]).sqrt();
    }
    let thetas = (0..c.len() - 1).map(|k| tail[k + 1].atan2(c[k])).collect();
    AngleVector::new(thetas)
}

/// The cyclic phase operator `Z = diag(e^{2πik/N})`.
pub fn z_operator<T: Real>(dim: Dimension) -> CMatrix<T> {
    let n = dim.get();
    let diag: Vec<_> = (0..n).map(|k| root_of_unity(k, n)).collect();
    CMatrix::from_diag(&diag)
}

/// A symmetric family together with its reciprocal states.
#[derive(Debug, Clone)]
pub struct SymmetricFamily<T> {
    pub dim: Dimension,
    pub coefficients: CoefficientVector<T>,
    pub states: Vec<StateVector<T>>,
    pub reciprocals: Vec<StateVector<T>>,
    /// `q = Σ_j c_j^{-2}`
    pub q: T,
}

/// Builds `|Ψ_l⟩ = Z^l|Ψ_0⟩` and `|Ψ_k^⊥⟩ = q^{-1/2} Σ_r c_r^{-1} e^{2πikr/N} |r⟩`.
pub fn build_family<T: Real>(c: &CoefficientVector<T>) -> Result<SymmetricFamily<T>> {
    c.require_nonzero()?;
    let dim = c.dim();
    let n = dim.get();
    let amps = c.as_slice();
    let q = amps.iter().fold(T::zero(), |acc, &x| acc + (x * x).recip());
    let inv_sqrt_q = q.sqrt().recip();

    let states = (0..n)
        .map(|l| {
            StateVector::new_unchecked(
                (0..n).map(|k| root_of_unity::<T>(l * k, n) * re(amps[k])).collect(),
            )
        })
        .collect();
    let reciprocals = (0..n)
        .map(|k| {
            StateVector::new_unchecked(
                (0..n)
                    .map(|r| root_of_unity::<T>(k * r, n) * re(inv_sqrt_q / amps[r]))
                    .collect(),
            )
        })
        .collect();

    Ok(SymmetricFamily {
        dim,
        coefficients: c.clone(),
        states,
        reciprocals,
        q,
    })
}

impl<T: Real> SymmetricFamily<T> {
    /// Gram matrix `G_{kl} = ⟨Ψ_k|Ψ_l⟩`.
    pub fn gram_matrix(&self) -> CMatrix<T> {
        let n = self.dim.get();
        CMatrix::from_fn(n, n, |k, l| self.states[k].inner(&self.states[l]))
    }

    /// Determinant of the (positive semidefinite) Gram matrix.
    pub fn gram_determinant(&self) -> T {
        hermitian_eigenvalues(&self.gram_matrix())
            .expect("Gram matrix is square")
            .into_iter()
            .fold(T::one(), |acc, e| acc * e)
    }

    /// `⟨Ψ_k^⊥|Ψ_k⟩ = N/√q`, the same for every `k`.
    pub fn reciprocal_overlap(&self) -> T {
        T::of(self.dim.get() as f64) / self.q.sqrt()
    }

    /// Largest `|⟨Ψ_k^⊥|Ψ_l⟩ − (N/√q)δ_{kl}|` over all pairs.
    pub fn biorthogonality_defect(&self) -> T {
        let target = self.reciprocal_overlap();
        let mut worst = T::zero();
        for (k, rk) in self.reciprocals.iter().enumerate() {
            for (l, sl) in self.states.iter().enumerate() {
                let expect = if k == l { target } else { T::zero() };
                worst = worst.max((rk.inner(sl) - re(expect)).norm());
            }
        }
        worst
    }
}

/// Convenience: overlap `⟨a|b⟩` as a complex number.
pub fn overlap<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Complex<T> {
    a.inner(b)
}
