//! Coherence, predictability and concurrence of two-qubit states, the
//! purity-limited concurrence bound, and the combined triality record.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, sqrt_psd, Matrix, Pauli};
use crate::scalar::Real;
use crate::state::{partial_trace, purity, DensityMatrix, PureTwoQubitState, Qubit, Subsystem};

/// One evaluated state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialityRecord<T: Real> {
    pub v_a: T,
    pub v_b: T,
    pub p_a: T,
    pub p_b: T,
    pub c: T,
    pub c_max: T,
    pub purity: T,
    /// `v_a^2 + p_a^2 + c^2`
    pub sum_a: T,
    /// `v_b^2 + p_b^2 + c^2`
    pub sum_b: T,
}

impl<T: Real> TrialityRecord<T> {
    /// Local share `v_k^2 + p_k^2` for qubit k.
    pub fn locality(&self, q: Qubit) -> T {
        match q {
            Qubit::A => self.sum_a - self.c * self.c,
            Qubit::B => self.sum_b - self.c * self.c,
        }
    }
}

/// `2 |a00 a11 - a01 a10|`.
pub fn concurrence_pure<T: Real>(s: &PureTwoQubitState<T>) -> T {
    let [a, b, g, d] = *s.amplitudes();
    (a * d - b * g).norm() * T::of(2.0)
}

/// `sigma_y (x) sigma_y`.
pub fn spin_flip<T: Real>() -> Matrix<T> {
    let y = Pauli::Y.matrix();
    kron(&y, &y)
}

fn require_pair<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    if rho.label() != Subsystem::AB {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit quantity on a {:?} state",
            rho.label()
        )));
    }
    Ok(())
}

fn require_single<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "single-qubit quantity on a {:?} state",
            rho.label()
        )));
    }
    Ok(())
}

/// Eigenvalues of `rho Sigma rho* Sigma`, descending and unclipped.
///
/// Computed as the spectrum of the Hermitian matrix
/// `sqrt(rho) (Sigma rho* Sigma) sqrt(rho)`, which is similar to the
/// non-Hermitian product on the support of `rho`.
pub fn wootters_spectrum<T: Real>(rho: &DensityMatrix<T>) -> Result<Vec<T>> {
    require_pair(rho)?;
    let sigma = spin_flip::<T>();
    let flipped = sigma.matmul(&rho.matrix().conj()).matmul(&sigma);
    let root = sqrt_psd(rho.matrix())?;
    let m = root.matmul(&flipped).matmul(&root).hermitian_part();
    Ok(hermitian_eigen(&m)?.values)
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence_mixed<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let r = wootters_spectrum(rho)?;
    // Spin-flip eigenvalues below the rounding floor of the 4x4 products
    // carry no information; their square roots would otherwise leak
    // ~1e-8 into a quantity built from differences.
    let floor = T::noise_floor() * r[0].max(T::one());
    let roots: Vec<T> = r
        .iter()
        .map(|&x| if x <= floor { T::zero() } else { x.sqrt() })
        .collect();
    let c = roots[0] - roots[1] - roots[2] - roots[3];
    Ok(if c <= T::noise_floor() { T::zero() } else { c })
}

/// `sum_{i != j} |rho_ij|` of a single-qubit state.
pub fn coherence<T: Real>(rho_k: &DensityMatrix<T>) -> Result<T> {
    require_single(rho_k)?;
    let m = rho_k.matrix();
    Ok(m[(0, 1)].norm() + m[(1, 0)].norm())
}

/// `|rho_22 - rho_11|` of a single-qubit state.
pub fn predictability<T: Real>(rho_k: &DensityMatrix<T>) -> Result<T> {
    require_single(rho_k)?;
    let m = rho_k.matrix();
    Ok((m[(1, 1)].re - m[(0, 0)].re).abs())
}

/// Largest concurrence reachable with the spectrum of `rho`:
/// `max(0, l1 - l3 - 2 sqrt(l2 l4))`.
pub fn c_max<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    require_pair(rho)?;
    let l: Vec<T> = rho
        .spectrum()
        .into_iter()
        .map(|x| x.max(T::zero()))
        .collect();
    let bound = l[0] - l[2] - T::of(2.0) * (l[1] * l[3]).sqrt();
    Ok(if bound <= T::noise_floor() {
        T::zero()
    } else {
        bound
    })
}

pub fn evaluate<T: Real>(rho: &DensityMatrix<T>) -> Result<TrialityRecord<T>> {
    require_pair(rho)?;
    let ra = partial_trace(rho, Qubit::A)?;
    let rb = partial_trace(rho, Qubit::B)?;
    let (v_a, p_a) = (coherence(&ra)?, predictability(&ra)?);
    let (v_b, p_b) = (coherence(&rb)?, predictability(&rb)?);
    let c = concurrence_mixed(rho)?;
    let c2 = c * c;
    Ok(TrialityRecord {
        v_a,
        v_b,
        p_a,
        p_b,
        c,
        c_max: c_max(rho)?,
        purity: purity(rho),
        sum_a: v_a * v_a + p_a * p_a + c2,
        sum_b: v_b * v_b + p_b * p_b + c2,
    })
}

/// Record of a pure state using the pure-state concurrence formula.
pub fn evaluate_pure<T: Real>(s: &PureTwoQubitState<T>) -> Result<TrialityRecord<T>> {
    let rho = crate::state::density_from_pure(s);
    let mut rec = evaluate(&rho)?;
    let c = concurrence_pure(s);
    rec.c = c;
    rec.sum_a = rec.v_a * rec.v_a + rec.p_a * rec.p_a + c * c;
    rec.sum_b = rec.v_b * rec.v_b + rec.p_b * rec.p_b + c * c;
    Ok(rec)
}

/// `2 |Tr(rho_k sigma_+)|`; equal to [`coherence`] by Hermiticity.
pub fn coherence_raising<T: Real>(rho_k: &DensityMatrix<T>) -> Result<T> {
    require_single(rho_k)?;
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let raise = Matrix::new(2, 2, vec![zero, one, zero, zero])?;
    Ok(rho_k.matrix().matmul(&raise).trace().norm() * T::of(2.0))
}
