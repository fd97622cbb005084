//! Independent reference computations shared by the integration tests.
//! Nothing here goes through the library's eigensolver.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use triality::state::{density_from_pure, prepare_state};
use triality::{kron, Density, Matrix, PrepParams, PureState, Subsystem};

pub type Array4 = [[C; 4]; 4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure two-qubit state.
pub fn random_pure(rng: &mut ChaCha8Rng) -> PureState {
    let amps = [(); 4].map(|_| gaussian_complex(rng));
    PureState::normalized(amps).unwrap()
}

/// Random convex combination of `k` random pure states.
pub fn random_mixed(rng: &mut ChaCha8Rng, k: usize) -> Density {
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = Matrix::<f64>::zeros(4, 4);
    for w in weights {
        let rho = density_from_pure(&random_pure(rng));
        acc = &acc + &rho.matrix().scale(w / total);
    }
    Density::new(acc, Subsystem::AB).unwrap()
}

/// Full-rank state dominated by one random pure state, so that a good
/// share of samples is entangled.
pub fn random_mostly_pure(rng: &mut ChaCha8Rng) -> Density {
    let w = rng.random_range(0.6..0.95);
    let pure = density_from_pure(&random_pure(rng));
    pure.mix(&random_mixed(rng, 4), w).unwrap()
}

/// Random SU(2) from a normalized quaternion.
pub fn random_su2(rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let q: [f64; 4] = [(); 4].map(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|x| x / n);
    Matrix::new(
        2,
        2,
        vec![C::new(a, b), C::new(c, d), C::new(-c, d), C::new(a, -b)],
    )
    .unwrap()
}

pub fn random_local_unitary(rng: &mut ChaCha8Rng) -> Matrix<f64> {
    kron(&random_su2(rng), &random_su2(rng))
}

pub fn bell() -> Density {
    density_from_pure(&prepare_state(&PrepParams::bell()))
}

/// `p |Phi+><Phi+| + (1 - p) I/4`.
pub fn werner(p: f64) -> Density {
    bell()
        .mix(&Density::maximally_mixed(Subsystem::AB), p)
        .unwrap()
}

pub fn to_array(m: &Matrix<f64>) -> Array4 {
    let mut out = [[C::new(0.0, 0.0); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    out
}

pub fn mul(a: &Array4, b: &Array4) -> Array4 {
    let mut out = [[C::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// `rho (Y x Y) rho* (Y x Y)`, built entrywise: `(Y x Y)_{ij}` is
/// `-1, 1, 1, -1` on the anti-diagonal.
pub fn spin_flip_product(rho: &Array4) -> Array4 {
    let sign = [-1.0, 1.0, 1.0, -1.0];
    let mut flipped = [[C::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            flipped[i][j] = rho[3 - i][3 - j].conj() * (sign[i] * sign[j]);
        }
    }
    mul(rho, &flipped)
}

/// Characteristic polynomial coefficients `c[0..=4]` (monic, `c[4] = 1`)
/// by the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &Array4) -> [C; 5] {
    let n = 4;
    let mut c = [C::new(0.0, 0.0); 5];
    c[n] = C::new(1.0, 0.0);
    let mut m = [[C::new(0.0, 0.0); 4]; 4];
    for k in 1..=n {
        let mut next = mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[n - k + 1];
        }
        m = next;
        let am = mul(a, &m);
        let tr: C = (0..4).map(|i| am[i][i]).sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

fn eval_poly(c: &[C], z: C) -> C {
    c.iter().rev().fold(C::new(0.0, 0.0), |acc, &x| acc * z + x)
}

fn eval_deriv(c: &[C], z: C) -> C {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C::new(0.0, 0.0), |acc, (k, &x)| acc * z + x * k as f64)
}

/// Roots of a monic polynomial by Durand-Kerner with Newton polishing.
pub fn poly_roots(c: &[C]) -> Vec<C> {
    let n = c.len() - 1;
    let seed = C::new(0.4, 0.9);
    let mut z: Vec<C> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = C::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval_poly(c, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let d = eval_deriv(c, *r);
            if d.norm() > 1e-300 {
                *r -= eval_poly(c, *r) / d;
            }
        }
    }
    z
}

/// Real parts of the eigenvalues, descending.
pub fn eigenvalues_bruteforce(a: &Array4) -> Vec<f64> {
    let mut v: Vec<f64> = poly_roots(&char_poly(a))
        .into_iter()
        .map(|z| z.re)
        .collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Euclidean projection onto the probability simplex by bisection on the
/// shift `tau` in `max(0, mu_i - tau)`.
pub fn simplex_projection(mu: &[f64]) -> Vec<f64> {
    let mass = |tau: f64| mu.iter().map(|&m| (m - tau).max(0.0)).sum::<f64>();
    let mut lo = mu.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    mu.iter().map(|&m| (m - tau).max(0.0)).collect()
}

/// Reduced state by explicit index summation; `keep_a` selects qubit A.
pub fn partial_trace_oracle(rho: &Array4, keep_a: bool) -> [[C; 2]; 2] {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j] += if keep_a {
                    rho[2 * i + k][2 * j + k]
                } else {
                    rho[2 * k + i][2 * k + j]
                };
            }
        }
    }
    out
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}
