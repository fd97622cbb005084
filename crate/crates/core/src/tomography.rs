//! Two-qubit state tomography from nine local Pauli measurement settings:
//! correlator estimation, linear inversion, and projection onto the set of
//! physical density matrices.

use std::fmt;
use std::io::Write;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, Eigen, Matrix, Pauli};
use crate::noise::{run_noisy_prep, sample_counts, CountsTable, NoiseModel};
use crate::scalar::Real;
use crate::seed::derive_seed;
use crate::state::{DensityMatrix, PrepParams, Subsystem};

/// Local measurement bases of qubits A and B (X, Y or Z each).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisSetting {
    basis_a: Pauli,
    basis_b: Pauli,
}

const MEASURED: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

impl BasisSetting {
    pub fn new(basis_a: Pauli, basis_b: Pauli) -> Result<Self> {
        if basis_a == Pauli::I || basis_b == Pauli::I {
            return Err(Error::InvalidConfig(
                "measurement basis must be X, Y or Z".into(),
            ));
        }
        Ok(Self { basis_a, basis_b })
    }

    /// The nine settings in order XX, XY, XZ, YX, ..., ZZ.
    pub fn all() -> [BasisSetting; 9] {
        let mut out = [BasisSetting {
            basis_a: Pauli::X,
            basis_b: Pauli::X,
        }; 9];
        for (i, &a) in MEASURED.iter().enumerate() {
            for (j, &b) in MEASURED.iter().enumerate() {
                out[3 * i + j] = BasisSetting {
                    basis_a: a,
                    basis_b: b,
                };
            }
        }
        out
    }

    pub fn basis_a(&self) -> Pauli {
        self.basis_a
    }

    pub fn basis_b(&self) -> Pauli {
        self.basis_b
    }

    /// Position in [`BasisSetting::all`].
    pub fn index(&self) -> usize {
        let pos = |p: Pauli| {
            MEASURED
                .iter()
                .position(|&m| m == p)
                .expect("measured basis")
        };
        3 * pos(self.basis_a) + pos(self.basis_b)
    }

    /// Rotation applied before a computational-basis readout.
    pub fn rotation<T: Real>(&self) -> Matrix<T> {
        kron(&local_rotation(self.basis_a), &local_rotation(self.basis_b))
    }
}

impl fmt::Display for BasisSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.basis_a.symbol(), self.basis_b.symbol())
    }
}

impl Serialize for BasisSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Maps the +1 eigenvector of the basis onto `|0>`: `H` for X, `H S^dagger`
/// for Y, identity for Z.
fn local_rotation<T: Real>(basis: Pauli) -> Matrix<T> {
    let h = T::FRAC_1_SQRT_2();
    let r = |x: T| Complex::new(x, T::zero());
    let data = match basis {
        Pauli::X => vec![r(h), r(h), r(h), r(-h)],
        Pauli::Y => vec![
            r(h),
            Complex::new(T::zero(), -h),
            r(h),
            Complex::new(T::zero(), h),
        ],
        Pauli::Z | Pauli::I => vec![
            Complex::one(),
            Complex::zero(),
            Complex::zero(),
            Complex::one(),
        ],
    };
    Matrix::new(2, 2, data).expect("2x2")
}

/// The 15 non-trivial two-qubit Pauli expectations `<s_i (x) s_j>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationSet<T: Real> {
    values: [[T; 4]; 4],
}

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

impl<T: Real> ExpectationSet<T> {
    /// `values[i][j]` is `<P_i (x) P_j>` in the order I, X, Y, Z; the
    /// `(I, I)` entry is ignored and fixed to 1.
    pub fn new(mut values: [[T; 4]; 4]) -> Result<Self> {
        values[0][0] = T::one();
        let lim = T::one() + T::of(1e-9);
        for row in &values {
            for &v in row {
                if !(v.abs() <= lim) {
                    return Err(Error::InvalidConfig(format!(
                        "expectation value {v} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    /// Exact expectations `Tr(rho P_i (x) P_j)`.
    pub fn from_state(rho: &DensityMatrix<T>) -> Result<Self> {
        if rho.label() != Subsystem::AB {
            return Err(Error::DimensionMismatch(
                "expectations of a single-qubit state".into(),
            ));
        }
        let mut values = [[T::zero(); 4]; 4];
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let op = kron(&a.matrix(), &b.matrix());
                values[pauli_index(a)][pauli_index(b)] = rho.matrix().matmul(&op).trace().re;
            }
        }
        Self::new(values)
    }

    pub fn get(&self, a: Pauli, b: Pauli) -> T {
        self.values[pauli_index(a)][pauli_index(b)]
    }
}

fn sign(bit: usize) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Correlators from their own setting; single-qubit terms averaged over the
/// three settings that share the local basis.
pub fn estimate_expectations<T: Real>(tables: &[CountsTable]) -> Result<ExpectationSet<T>> {
    let mut by_setting: [Option<&CountsTable>; 9] = [None; 9];
    for t in tables {
        let slot = &mut by_setting[t.setting.index()];
        if slot.is_some() {
            return Err(Error::InvalidConfig(format!(
                "duplicate setting {}",
                t.setting
            )));
        }
        *slot = Some(t);
    }
    let mut values = [[0.0f64; 4]; 4];
    values[0][0] = 1.0;
    for (k, setting) in BasisSetting::all().iter().enumerate() {
        let table = by_setting[k].ok_or_else(|| Error::MissingSetting(setting.to_string()))?;
        let f = table.frequencies();
        let (mut za, mut zb, mut zab) = (0.0, 0.0, 0.0);
        for (outcome, &freq) in f.iter().enumerate() {
            let (sa, sb) = (sign(outcome >> 1), sign(outcome & 1));
            za += sa * freq;
            zb += sb * freq;
            zab += sa * sb * freq;
        }
        let (ia, ib) = (pauli_index(setting.basis_a), pauli_index(setting.basis_b));
        values[ia][ib] = zab;
        values[ia][0] += za / 3.0;
        values[0][ib] += zb / 3.0;
    }
    ExpectationSet::new(values.map(|row| row.map(T::of)))
}

/// `(1/4) sum_{ij} e_ij P_i (x) P_j`; Hermitian and unit trace, possibly
/// not positive.
pub fn linear_inversion<T: Real>(e: &ExpectationSet<T>) -> Matrix<T> {
    let mut acc = Matrix::zeros(4, 4);
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let w = e.get(a, b);
            if w != T::zero() {
                acc = &acc + &kron(&a.matrix(), &b.matrix()).scale(w);
            }
        }
    }
    acc.scale(T::of(0.25))
}

/// Closest unit-trace non-negative spectrum (Euclidean norm) to a
/// descending list, by pushing negative weight onto the remaining values.
pub fn redistribute_spectrum<T: Real>(descending: &[T]) -> Vec<T> {
    let n = descending.len();
    let mut out = vec![T::zero(); n];
    let mut deficit = T::zero();
    let mut i = n;
    while i > 0 && descending[i - 1] + deficit / T::of(i as f64) < T::zero() {
        deficit += descending[i - 1];
        i -= 1;
    }
    for j in 0..i {
        out[j] = descending[j] + deficit / T::of(i as f64);
    }
    out
}

/// Nearest density matrix (Frobenius norm) to a Hermitian, unit-trace
/// estimate.
pub fn project_to_physical<T: Real>(raw: &Matrix<T>) -> Result<DensityMatrix<T>> {
    let label = match (raw.rows(), raw.cols()) {
        (4, 4) => Subsystem::AB,
        (2, 2) => Subsystem::A,
        (r, c) => {
            return Err(Error::DimensionMismatch(format!(
                "{r}x{c} tomography estimate"
            )))
        }
    };
    let tr = raw.trace();
    if (tr.re - T::one()).abs() > T::of(1e-6) || tr.im.abs() > T::of(1e-6) {
        return Err(Error::BadTrace {
            trace: tr.re.as_f64(),
        });
    }
    let eig = hermitian_eigen(raw)?;
    let mut values = redistribute_spectrum(&eig.values);
    let total: T = values.iter().copied().sum();
    for v in &mut values {
        *v /= total;
    }
    if eig.values.iter().all(|&x| x >= T::zero()) {
        return DensityMatrix::new(raw.hermitian_part().scale(T::one() / tr.re), label);
    }
    let fixed = Eigen {
        values,
        vectors: eig.vectors,
    };
    DensityMatrix::new(fixed.reconstruct(), label)
}

/// Everything produced by one tomography run.
#[derive(Debug, Clone)]
pub struct TomographyRun<T: Real> {
    pub counts: Vec<CountsTable>,
    pub raw: Matrix<T>,
    pub rho: DensityMatrix<T>,
}

/// Noisy preparation, nine sampled settings (seed per setting derived from
/// `seed`), linear inversion and physical projection.
pub fn run_tomography<T: Real>(
    p: &PrepParams,
    nm: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<TomographyRun<T>> {
    let prepared = run_noisy_prep::<T>(p, nm)?;
    tomograph_state(&prepared, nm, shots, seed)
}

/// Tomography of an already prepared state.
pub fn tomograph_state<T: Real>(
    rho: &DensityMatrix<T>,
    nm: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<TomographyRun<T>> {
    let counts = BasisSetting::all()
        .iter()
        .map(|s| sample_counts(rho, *s, shots, nm, derive_seed(seed, &[s.index() as u64])))
        .collect::<Result<Vec<_>>>()?;
    let raw = linear_inversion(&estimate_expectations::<T>(&counts)?);
    let rho = project_to_physical(&raw)?;
    Ok(TomographyRun { counts, raw, rho })
}

pub fn tomography_pipeline<T: Real>(
    p: &PrepParams,
    nm: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<DensityMatrix<T>> {
    Ok(run_tomography(p, nm, shots, seed)?.rho)
}

/// Writes `setting,outcome,count,shots,seed` rows.
pub fn write_counts_csv<W: Write>(out: W, tables: &[CountsTable]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["setting", "outcome", "count", "shots", "seed"])?;
    for t in tables {
        for (k, outcome) in CountsTable::OUTCOMES.iter().enumerate() {
            w.write_record([
                t.setting.to_string(),
                outcome.to_string(),
                t.counts[k].to_string(),
                t.shots.to_string(),
                t.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
