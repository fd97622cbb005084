//! Dense complex linear algebra for 2x2 and 4x4 operators.
//!
//! Only what the state, channel and entanglement code needs: products,
//! adjoints, Kronecker products, and a Hermitian eigensolver built on cyclic
//! complex Jacobi rotations. Everything works on immutable values.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::one()
            } else {
                Complex::zero()
            }
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries
                .iter()
                .map(|&x| Complex::new(x, T::zero()))
                .collect(),
        )
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(diag[i], T::zero())
            } else {
                Complex::zero()
            }
        })
    }

    /// Outer product |u><v|.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)] * v[j])
                    .fold(Complex::zero(), |acc, z| acc + z)
            })
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate in the stored basis.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex<T> {
        assert!(self.is_square());
        (0..self.rows)
            .map(|i| self[(i, i)])
            .fold(Complex::zero(), |acc, z| acc + z)
    }

    /// U A U^dagger.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Largest entrywise deviation of `self - self^dagger`.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// (A + A^dagger) / 2.
    pub fn hermitian_part(&self) -> Self {
        let half = T::of(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    fn off_diagonal_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Kronecker product. The first factor is the most significant index, so
/// `kron(a, b)` acts on `|q_a q_b>` with `q_a` as the high bit.
pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    Matrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// Single-qubit Pauli operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix<T: Real>(self) -> Matrix<T> {
        let o = Complex::zero();
        let one = Complex::one();
        let i = Complex::i();
        let data = match self {
            Pauli::I => vec![one, o, o, one],
            Pauli::X => vec![o, one, one, o],
            Pauli::Y => vec![o, -i, i, o],
            Pauli::Z => vec![one, o, o, -one],
        };
        Matrix {
            rows: 2,
            cols: 2,
            data,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen<T: Real> {
    /// Descending.
    pub values: Vec<T>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix<T>,
}

impl<T: Real> Eigen<T> {
    /// V diag(f(lambda)) V^dagger.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let mapped: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        Matrix::from_fn(n, n, |i, j| {
            let mut acc = Complex::zero();
            for (k, &w) in mapped.iter().enumerate() {
                if w != T::zero() {
                    acc += v[(i, k)] * v[(j, k)].conj() * w;
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.reconstruct_with(|x| x)
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations, eigenvalues sorted descending (stable on ties).
pub fn hermitian_eigen<T: Real>(h: &Matrix<T>) -> Result<Eigen<T>> {
    let deviation = h.hermitian_deviation();
    if !(deviation <= T::VALIDATION_TOL) {
        return Err(Error::NotHermitian {
            deviation: deviation.as_f64(),
        });
    }
    let n = h.rows;
    let mut a = h.hermitian_part();
    let mut v = Matrix::<T>::identity(n);
    let stop = T::JACOBI_TOL * a.frobenius_norm().max(T::one());
    let two = T::of(2.0);

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() < stop {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                // Phase-rotate column q so the pivot is real, then apply a
                // real symmetric Jacobi rotation.
                let phase = apq / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (two * mag);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let ph_conj = phase.conj();

                // A <- A G, V <- V G
                for m in [&mut a, &mut v] {
                    for i in 0..n {
                        let xp = m[(i, p)];
                        let xq = m[(i, q)];
                        m[(i, p)] = xp * c - xq * ph_conj * s;
                        m[(i, q)] = xp * s + xq * ph_conj * c;
                    }
                }
                // A <- G^dagger A
                for j in 0..n {
                    let yp = a[(p, j)];
                    let yq = a[(q, j)];
                    a[(p, j)] = yp * c - yq * phase * s;
                    a[(q, j)] = yp * s + yq * phase * c;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)].im = T::zero();
                a[(q, q)].im = T::zero();
            }
        }
    }

    let raw: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        raw[j]
            .partial_cmp(&raw[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| raw[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-VALIDATION_TOL, 0)` are clipped to zero.
pub fn sqrt_psd<T: Real>(h: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = hermitian_eigen(h)?;
    let min = eig.values.last().copied().unwrap_or(T::zero());
    if min < -T::VALIDATION_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(eig.reconstruct_with(|x| x.max(T::zero()).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    type M = Matrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_matrix(n: usize, entries: &[(f64, f64)]) -> M {
        M::new(n, n, entries.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    fn bell_projector() -> M {
        let h = FRAC_1_SQRT_2;
        let psi = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        M::outer(&psi, &psi)
    }

    #[test]
    fn kron_of_sigma_y_is_spin_flip() {
        let y = Pauli::Y.matrix::<f64>();
        let s = kron(&y, &y);
        let expected = M::from_real(
            4,
            4,
            &[
                0.0, 0.0, 0.0, -1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                -1.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn kron_identities_and_diagonals() {
        assert_eq!(kron(&M::identity(2), &M::identity(2)), M::identity(4));
        let a = M::from_diag(&[1.0, 2.0]);
        let b = M::from_diag(&[3.0, 4.0]);
        assert_eq!(kron(&a, &b), M::from_diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_dimensions() {
        let a = M::zeros(2, 3);
        let b = M::zeros(4, 1);
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (8, 3));
    }

    #[test]
    fn new_rejects_wrong_length() {
        assert!(matches!(
            M::new(2, 2, vec![c(0.0, 0.0); 3]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn eigen_identity_and_diagonal() {
        let e = hermitian_eigen(&M::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        let e = hermitian_eigen(&M::from_diag(&[0.1, 0.7, 0.05, 0.15])).unwrap();
        assert_eq!(e.values, vec![0.7, 0.15, 0.1, 0.05]);
    }

    #[test]
    fn eigen_werner_half() {
        let w = &bell_projector().scale(0.5) + &M::identity(4).scale(0.125);
        let e = hermitian_eigen(&w).unwrap();
        let expected = [0.625, 0.125, 0.125, 0.125];
        for (got, want) in e.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{:?}", e.values);
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let mut m = M::identity(2);
        m[(0, 1)] = c(1e-6, 0.0);
        assert!(matches!(
            hermitian_eigen(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigen_ties_keep_spectrum() {
        // Degenerate spectra: downstream only reads the sorted multiset.
        let m = M::from_diag(&[0.25, 0.25, 0.5, 0.0]);
        let e = hermitian_eigen(&m).unwrap();
        assert_eq!(e.values, vec![0.5, 0.25, 0.25, 0.0]);
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn eigen_complex_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let m = random_matrix(2, &[(2.0, 0.0), (0.0, 1.0), (0.0, -1.0), (2.0, 0.0)]);
        let e = hermitian_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_psd_examples() {
        let s = sqrt_psd(&M::from_diag(&[4.0, 1.0, 0.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&M::from_diag(&[2.0, 1.0, 0.0, 3.0])) < 1e-12);
        assert!(
            sqrt_psd(&M::identity(4))
                .unwrap()
                .max_abs_diff(&M::identity(4))
                < 1e-12
        );
        let bell = bell_projector();
        assert!(sqrt_psd(&bell).unwrap().max_abs_diff(&bell) < 1e-12);
    }

    #[test]
    fn sqrt_psd_clips_tiny_negatives_and_rejects_large() {
        let s = sqrt_psd(&M::from_diag(&[1.0, -1e-12])).unwrap();
        assert!(s.max_abs_diff(&M::from_diag(&[1.0, 0.0])) < 1e-15);
        assert!(matches!(
            sqrt_psd(&M::from_diag(&[1.0, -1e-6])),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn single_precision_eigen() {
        let m = Matrix::<f32>::from_diag(&[0.1, 0.7, 0.05, 0.15]);
        let e = hermitian_eigen(&m).unwrap();
        assert_eq!(e.values, vec![0.7, 0.15, 0.1, 0.05]);
    }

    fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
    }

    proptest! {
        #[test]
        fn kron_is_bilinear(a in entries(2), b in entries(2), cc in entries(2)) {
            let (a, b, cm) = (random_matrix(2, &a), random_matrix(2, &b), random_matrix(2, &cc));
            let lhs = kron(&(&a + &b), &cm);
            let rhs = &kron(&a, &cm) + &kron(&b, &cm);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn trace_is_cyclic(a in entries(4), b in entries(4)) {
            let (a, b) = (random_matrix(4, &a), random_matrix(4, &b));
            prop_assert!(((&a * &b).trace() - (&b * &a).trace()).norm() < 1e-12);
        }

        #[test]
        fn eigen_reconstructs_hermitian(g in entries(4)) {
            let g = random_matrix(4, &g);
            let h = (&g + &g.adjoint()).scale(0.5);
            let e = hermitian_eigen(&h).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&h) < 1e-8);
            let vdv = &e.vectors.adjoint() * &e.vectors;
            prop_assert!(vdv.max_abs_diff(&M::identity(4)) < 1e-9);
            for k in 0..4 {
                let v = e.vectors.column(k);
                let hv = h.apply(&v);
                for i in 0..4 {
                    prop_assert!((hv[i] - v[i] * e.values[k]).norm() < 1e-9);
                }
            }
            for w in e.values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn sqrt_squares_back(g in entries(4)) {
            let g = random_matrix(4, &g);
            let h = &g * &g.adjoint();
            let s = sqrt_psd(&h).unwrap();
            prop_assert!(s.hermitian_deviation() < 1e-12);
            prop_assert!((&s * &s).max_abs_diff(&h) < 1e-8);
            let e = hermitian_eigen(&s).unwrap();
            prop_assert!(*e.values.last().unwrap() > -1e-10);
        }
    }
}
