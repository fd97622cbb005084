//! Two-qubit states, the Ry / controlled-rotation preparation circuit, and
//! reduced states.
//!
//! Basis order is `|00>, |01>, |10>, |11>` with qubit A as the most
//! significant bit.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, Matrix};
use crate::scalar::Real;

/// Which system a density matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    AB,
    A,
    B,
}

impl Subsystem {
    pub fn dim(self) -> usize {
        match self {
            Subsystem::AB => 4,
            Subsystem::A | Subsystem::B => 2,
        }
    }
}

/// One of the two qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    A,
    B,
}

/// Angles of the preparation circuit, in radians, each in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepParams {
    pub alpha: f64,
    pub theta: f64,
}

impl PrepParams {
    const ANGLE_SLACK: f64 = 1e-12;

    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        let p = Self { alpha, theta };
        p.validate()?;
        Ok(p)
    }

    /// Angles given as multiples of pi.
    pub fn from_pi_units(alpha: f64, theta: f64) -> Result<Self> {
        Self::new(alpha * std::f64::consts::PI, theta * std::f64::consts::PI)
    }

    pub fn bell() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_PI_2,
            theta: std::f64::consts::PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| {
            x.is_finite()
                && (-Self::ANGLE_SLACK..=std::f64::consts::PI + Self::ANGLE_SLACK).contains(&x)
        };
        if !ok(self.alpha) {
            return Err(Error::InvalidAngle(format!(
                "alpha = {} not in [0, pi]",
                self.alpha
            )));
        }
        if !ok(self.theta) {
            return Err(Error::InvalidAngle(format!(
                "theta = {} not in [0, pi]",
                self.theta
            )));
        }
        Ok(())
    }
}

/// `alpha|00> + beta|01> + gamma|10> + delta|11>`, unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureTwoQubitState<T: Real> {
    amps: [Complex<T>; 4],
}

impl<T: Real> PureTwoQubitState<T> {
    pub fn new(amps: [Complex<T>; 4]) -> Result<Self> {
        let norm_sqr: T = amps.iter().map(|z| z.norm_sqr()).sum();
        if !((norm_sqr - T::one()).abs() <= T::VALIDATION_TOL) {
            return Err(Error::NotNormalized {
                norm_sqr: norm_sqr.as_f64(),
            });
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: [Complex<T>; 4]) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: (norm * norm).as_f64(),
            });
        }
        Ok(Self {
            amps: amps.map(|z| z / norm),
        })
    }

    /// Computational basis state `|k>`, `k` in `0..4`.
    pub fn basis(k: usize) -> Self {
        let mut amps = [Complex::zero(); 4];
        amps[k] = Complex::one();
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `u |psi>`; `u` must be unitary.
    pub fn evolve(&self, u: &Matrix<T>) -> Result<Self> {
        if u.rows() != 4 || u.cols() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} gate on two qubits",
                u.rows(),
                u.cols()
            )));
        }
        let out = u.apply(&self.amps);
        Self::new([out[0], out[1], out[2], out[3]])
    }
}

/// Real rotation `[[cos a/2, -sin a/2], [sin a/2, cos a/2]]`.
pub fn ry<T: Real>(alpha: T) -> Matrix<T> {
    let half = alpha / T::of(2.0);
    let (s, c) = half.sin_cos();
    Matrix::from_real(2, 2, &[c, -s, s, c]).expect("2x2")
}

/// Controlled rotation CU3(theta, 0, 0) with qubit A as control:
/// identity on the `|0x>` block, `ry(theta)` on the `|1x>` block.
pub fn cu3_theta<T: Real>(theta: T) -> Matrix<T> {
    let r = ry(theta);
    Matrix::from_fn(4, 4, |i, j| match (i < 2, j < 2) {
        (true, true) => {
            if i == j {
                Complex::one()
            } else {
                Complex::zero()
            }
        }
        (false, false) => r[(i - 2, j - 2)],
        _ => Complex::zero(),
    })
}

/// Full preparation unitary `CU3(theta) (Ry(alpha) x I)`.
pub fn preparation_unitary<T: Real>(p: &PrepParams) -> Matrix<T> {
    let first = kron(&ry(T::of(p.alpha)), &Matrix::identity(2));
    cu3_theta(T::of(p.theta)).matmul(&first)
}

/// Closed-form output of the preparation circuit on `|00>`:
/// `cos(a/2)|00> + cos(t/2) sin(a/2)|10> + sin(t/2) sin(a/2)|11>`.
pub fn prepare_state<T: Real>(p: &PrepParams) -> PureTwoQubitState<T> {
    let (sa, ca) = (T::of(p.alpha) / T::of(2.0)).sin_cos();
    let (st, ct) = (T::of(p.theta) / T::of(2.0)).sin_cos();
    let re = |x: T| Complex::new(x, T::zero());
    PureTwoQubitState {
        amps: [re(ca), Complex::zero(), re(ct * sa), re(st * sa)],
    }
}

/// The same state obtained by multiplying out the circuit.
pub fn prepare_state_by_circuit<T: Real>(p: &PrepParams) -> PureTwoQubitState<T> {
    PureTwoQubitState::basis(0)
        .evolve(&preparation_unitary(p))
        .expect("unitary preserves norm")
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityJson", into = "DensityJson")]
pub struct DensityMatrix<T: Real> {
    matrix: Matrix<T>,
    label: Subsystem,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates and sanitizes a candidate density matrix.
    ///
    /// Eigenvalues in `[-VALIDATION_TOL, 0)` are clipped to zero and the
    /// trace renormalized; anything further off is an error.
    pub fn new(matrix: Matrix<T>, label: Subsystem) -> Result<Self> {
        let d = label.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix labelled {:?}",
                matrix.rows(),
                matrix.cols(),
                label
            )));
        }
        let deviation = matrix.hermitian_deviation();
        if !(deviation <= T::VALIDATION_TOL) {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
            });
        }
        let tr = matrix.trace();
        if !((tr.re - T::one()).abs() <= T::VALIDATION_TOL && tr.im.abs() <= T::VALIDATION_TOL) {
            return Err(Error::BadTrace {
                trace: tr.re.as_f64(),
            });
        }
        let eig = hermitian_eigen(&matrix)?;
        let min = *eig.values.last().expect("non-empty");
        if min < -T::VALIDATION_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min.as_f64(),
            });
        }
        if min < -T::noise_floor() {
            let total: T = eig.values.iter().map(|&x| x.max(T::zero())).sum();
            let matrix = eig.reconstruct_with(|x| x.max(T::zero()) / total);
            return Ok(Self { matrix, label });
        }
        Ok(Self { matrix, label })
    }

    pub fn maximally_mixed(label: Subsystem) -> Self {
        let d = label.dim();
        Self {
            matrix: Matrix::identity(d).scale(T::one() / T::of(d as f64)),
            label,
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn label(&self) -> Subsystem {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Vec<T> {
        hermitian_eigen(&self.matrix)
            .expect("validated Hermitian")
            .values
    }

    /// `u rho u^dagger`, revalidated.
    pub fn evolve(&self, u: &Matrix<T>) -> Result<Self> {
        Self::new(self.matrix.conjugate_by(u), self.label)
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        if self.label != other.label {
            return Err(Error::DimensionMismatch(format!(
                "mixing {:?} with {:?}",
                self.label, other.label
            )));
        }
        Self::new(
            &self.matrix.scale(w) + &other.matrix.scale(T::one() - w),
            self.label,
        )
    }
}

/// `|psi><psi|`.
pub fn density_from_pure<T: Real>(s: &PureTwoQubitState<T>) -> DensityMatrix<T> {
    DensityMatrix {
        matrix: Matrix::outer(&s.amps, &s.amps),
        label: Subsystem::AB,
    }
}

/// Reduced state of one qubit of a two-qubit density matrix.
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: Qubit) -> Result<DensityMatrix<T>> {
    if rho.label != Subsystem::AB {
        return Err(Error::DimensionMismatch(format!(
            "partial trace of a {:?} state",
            rho.label
        )));
    }
    let m = &rho.matrix;
    let (reduced, label) = match keep {
        Qubit::A => (
            Matrix::from_fn(2, 2, |i, j| m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)]),
            Subsystem::A,
        ),
        Qubit::B => (
            Matrix::from_fn(2, 2, |i, j| m[(i, j)] + m[(2 + i, 2 + j)]),
            Subsystem::B,
        ),
    };
    DensityMatrix::new(reduced, label)
}

/// `Tr(rho^2)`, clamped to `[0, 1]`.
pub fn purity<T: Real>(rho: &DensityMatrix<T>) -> T {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    let p: T = rho.matrix.data().iter().map(|z| z.norm_sqr()).sum();
    p.max(T::zero()).min(T::one())
}

/// `<psi| rho |psi>`.
pub fn fidelity_with_pure<T: Real>(rho: &DensityMatrix<T>, psi: &PureTwoQubitState<T>) -> T {
    let rpsi = rho.matrix.apply(&psi.amps);
    psi.amps
        .iter()
        .zip(&rpsi)
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    label: Subsystem,
    entries: Vec<[f64; 2]>,
}

impl<T: Real> From<DensityMatrix<T>> for DensityJson {
    fn from(rho: DensityMatrix<T>) -> Self {
        Self {
            label: rho.label,
            entries: rho
                .matrix
                .data()
                .iter()
                .map(|z| [z.re.as_f64(), z.im.as_f64()])
                .collect(),
        }
    }
}

impl<T: Real> TryFrom<DensityJson> for DensityMatrix<T> {
    type Error = Error;

    fn try_from(json: DensityJson) -> Result<Self> {
        let d = json.label.dim();
        let data = json
            .entries
            .iter()
            .map(|&[re, im]| Complex::new(T::of(re), T::of(im)))
            .collect();
        DensityMatrix::new(Matrix::new(d, d, data)?, json.label)
    }
}
