//! Parametric noise: depolarizing and damping channels applied as exact
//! maps on density matrices, readout confusion, and seeded shot sampling.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, Matrix};
use crate::scalar::Real;
use crate::state::{
    cu3_theta, partial_trace, ry, DensityMatrix, PrepParams, PureTwoQubitState, Qubit, Subsystem,
};
use crate::tomography::BasisSetting;

const PRESET_IBMQX2_LIKE: &str = include_str!("../presets/ibmqx2-like.json");

/// Row-stochastic readout matrix `[[P(0|0), P(1|0)], [P(0|1), P(1|1)]]`.
pub type Confusion = [[f64; 2]; 2];

pub const IDEAL_READOUT: Confusion = [[1.0, 0.0], [0.0, 1.0]];

/// Gate-level error strengths and per-qubit readout confusion.
///
/// Missing JSON fields fall back to the ideal (noise-free) value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Depolarizing probability after each single-qubit gate.
    pub depol_1q: f64,
    /// Two-qubit depolarizing probability after each two-qubit gate.
    pub depol_2q: f64,
    /// Amplitude damping per gate layer per qubit.
    pub amp_damping_gamma: f64,
    /// Phase damping per gate layer per qubit.
    pub phase_damping_gamma: f64,
    /// Indexed by qubit, A then B.
    pub readout_confusion: [Confusion; 2],
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self {
            depol_1q: 0.0,
            depol_2q: 0.0,
            amp_damping_gamma: 0.0,
            phase_damping_gamma: 0.0,
            readout_confusion: [IDEAL_READOUT; 2],
        }
    }

    /// Representative superconducting-hardware preset shipped with the crate
    /// (`presets/ibmqx2-like.json`). Not calibration data.
    pub fn preset() -> Self {
        Self::from_json_str(PRESET_IBMQX2_LIKE).expect("bundled preset is valid")
    }

    /// Same readout flip probability on both qubits and both outcomes.
    pub fn with_symmetric_readout(mut self, flip: f64) -> Self {
        self.readout_confusion = [[[1.0 - flip, flip], [flip, 1.0 - flip]]; 2];
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let nm: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidNoiseModel(e.to_string()))?;
        nm.validate()?;
        Ok(nm)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("depol_1q", self.depol_1q),
            ("depol_2q", self.depol_2q),
            ("amp_damping_gamma", self.amp_damping_gamma),
            ("phase_damping_gamma", self.phase_damping_gamma),
        ] {
            check_probability(name, p)?;
        }
        for (q, conf) in self.readout_confusion.iter().enumerate() {
            for (t, row) in conf.iter().enumerate() {
                for &x in row {
                    check_probability("readout_confusion", x)?;
                }
                if (row[0] + row[1] - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidNoiseModel(format!(
                        "readout_confusion[{q}][{t}] sums to {}",
                        row[0] + row[1]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        *self == Self::ideal()
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidNoiseModel(format!(
            "{name} = {p} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Which part of a two-qubit state a channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    A,
    B,
    Both,
}

/// Partial depolarization: `(1 - p) rho + p (I/d on the target, untouched
/// elsewhere)`. Single-qubit inputs are depolarized whatever the target.
pub fn depolarize<T: Real>(
    rho: &DensityMatrix<T>,
    p: T,
    target: Target,
) -> Result<DensityMatrix<T>> {
    check_probability("depolarizing probability", p.as_f64())?;
    if p.is_zero() {
        return Ok(rho.clone());
    }
    let half = Matrix::<T>::identity(2).scale(T::of(0.5));
    let replacement = if rho.label() != Subsystem::AB {
        half
    } else {
        match target {
            Target::Both => Matrix::identity(4).scale(T::of(0.25)),
            Target::A => kron(&half, partial_trace(rho, Qubit::B)?.matrix()),
            Target::B => kron(partial_trace(rho, Qubit::A)?.matrix(), &half),
        }
    };
    let out = &rho.matrix().scale(T::one() - p) + &replacement.scale(p);
    DensityMatrix::new(out, rho.label())
}

/// `sum_k K rho K^dagger`.
pub fn apply_kraus<T: Real>(rho: &DensityMatrix<T>, ops: &[Matrix<T>]) -> Result<DensityMatrix<T>> {
    let d = rho.dim();
    let mut acc = Matrix::zeros(d, d);
    for k in ops {
        acc = &acc + &rho.matrix().conjugate_by(k);
    }
    DensityMatrix::new(acc, rho.label())
}

fn real2<T: Real>(entries: [f64; 4]) -> Matrix<T> {
    Matrix::from_real(2, 2, &entries.map(T::of)).expect("2x2")
}

/// Amplitude-damping Kraus pair.
pub fn amplitude_damping_kraus<T: Real>(gamma: T) -> [Matrix<T>; 2] {
    let g = gamma.as_f64();
    [
        real2([1.0, 0.0, 0.0, (1.0 - g).sqrt()]),
        real2([0.0, g.sqrt(), 0.0, 0.0]),
    ]
}

/// Phase-damping Kraus pair; coherences shrink by `sqrt(1 - lambda)`.
pub fn phase_damping_kraus<T: Real>(lambda: T) -> [Matrix<T>; 2] {
    let l = lambda.as_f64();
    [
        real2([1.0, 0.0, 0.0, (1.0 - l).sqrt()]),
        real2([0.0, 0.0, 0.0, l.sqrt()]),
    ]
}

fn lift<T: Real>(op: &Matrix<T>, qubit: Qubit) -> Matrix<T> {
    match qubit {
        Qubit::A => kron(op, &Matrix::identity(2)),
        Qubit::B => kron(&Matrix::identity(2), op),
    }
}

/// Amplitude damping followed by phase damping on one qubit of the pair.
pub fn damp<T: Real>(
    rho: &DensityMatrix<T>,
    gamma_amp: T,
    gamma_phase: T,
    qubit: Qubit,
) -> Result<DensityMatrix<T>> {
    check_probability("amp_damping_gamma", gamma_amp.as_f64())?;
    check_probability("phase_damping_gamma", gamma_phase.as_f64())?;
    let on_pair = rho.label() == Subsystem::AB;
    let prepare = |ops: [Matrix<T>; 2]| -> Vec<Matrix<T>> {
        ops.iter()
            .map(|k| if on_pair { lift(k, qubit) } else { k.clone() })
            .collect()
    };
    let mut out = rho.clone();
    if !gamma_amp.is_zero() {
        out = apply_kraus(&out, &prepare(amplitude_damping_kraus(gamma_amp)))?;
    }
    if !gamma_phase.is_zero() {
        out = apply_kraus(&out, &prepare(phase_damping_kraus(gamma_phase)))?;
    }
    Ok(out)
}

fn damp_both<T: Real>(rho: &DensityMatrix<T>, nm: &NoiseModel) -> Result<DensityMatrix<T>> {
    let (ga, gp) = (T::of(nm.amp_damping_gamma), T::of(nm.phase_damping_gamma));
    let rho = damp(rho, ga, gp, Qubit::A)?;
    damp(&rho, ga, gp, Qubit::B)
}

/// Runs the preparation circuit on `|00><00|` with a noise layer after each
/// gate: gate, then depolarizing, then damping on both qubits.
pub fn run_noisy_prep<T: Real>(p: &PrepParams, nm: &NoiseModel) -> Result<DensityMatrix<T>> {
    p.validate()?;
    nm.validate()?;
    let mut rho = crate::state::density_from_pure(&PureTwoQubitState::<T>::basis(0));

    rho = rho.evolve(&kron(&ry(T::of(p.alpha)), &Matrix::identity(2)))?;
    rho = depolarize(&rho, T::of(nm.depol_1q), Target::A)?;
    rho = damp_both(&rho, nm)?;

    rho = rho.evolve(&cu3_theta(T::of(p.theta)))?;
    rho = depolarize(&rho, T::of(nm.depol_2q), Target::Both)?;
    damp_both(&rho, nm)
}

/// Shot counts for one measurement setting. Outcome index is `2 a + b`
/// with bits read as `00, 01, 10, 11`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountsTable {
    pub setting: BasisSetting,
    pub counts: [u64; 4],
    pub shots: u64,
    pub seed: u64,
}

impl CountsTable {
    pub const OUTCOMES: [&'static str; 4] = ["00", "01", "10", "11"];

    pub fn new(setting: BasisSetting, counts: [u64; 4], seed: u64) -> Result<Self> {
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return Err(Error::InvalidConfig(format!(
                "no shots recorded for setting {setting}"
            )));
        }
        Ok(Self {
            setting,
            counts,
            shots,
            seed,
        })
    }

    pub fn count(&self, outcome: &str) -> Option<u64> {
        Self::OUTCOMES
            .iter()
            .position(|&o| o == outcome)
            .map(|i| self.counts[i])
    }

    pub fn frequencies(&self) -> [f64; 4] {
        let n = self.shots as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

/// Outcome distribution of `setting` on `rho`, including readout confusion,
/// clipped and renormalized.
pub fn outcome_probabilities<T: Real>(
    rho: &DensityMatrix<T>,
    setting: BasisSetting,
    nm: &NoiseModel,
) -> Result<[f64; 4]> {
    if rho.label() != Subsystem::AB {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit measurement of a {:?} state",
            rho.label()
        )));
    }
    let rotated = rho.matrix().conjugate_by(&setting.rotation::<T>());
    let ideal: [f64; 4] = [0, 1, 2, 3].map(|k| rotated[(k, k)].re.as_f64());
    let tol = 1e-9;
    if ideal.iter().any(|&p| !(-tol..=1.0 + tol).contains(&p)) {
        return Err(Error::InvalidProbabilities(ideal.to_vec()));
    }
    let [ca, cb] = &nm.readout_confusion;
    let mut read = [0.0; 4];
    for (t, &pt) in ideal.iter().enumerate() {
        let (ta, tb) = (t >> 1, t & 1);
        for (r, slot) in read.iter_mut().enumerate() {
            *slot += pt * ca[ta][r >> 1] * cb[tb][r & 1];
        }
    }
    if read.iter().any(|&p| !(-tol..=1.0 + tol).contains(&p)) {
        return Err(Error::InvalidProbabilities(read.to_vec()));
    }
    let clipped = read.map(|p| p.max(0.0));
    let total: f64 = clipped.iter().sum();
    Ok(clipped.map(|p| p / total))
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_multinomial(probs: &[f64; 4], shots: u64, rng: &mut ChaCha8Rng) -> [u64; 4] {
    let mut counts = [0u64; 4];
    let mut remaining = shots;
    let mut mass = 1.0;
    for k in 0..3 {
        if remaining == 0 {
            break;
        }
        let q = if mass > 0.0 {
            (probs[k] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n = Binomial::new(remaining, q)
            .expect("q in [0, 1]")
            .sample(rng);
        counts[k] = n;
        remaining -= n;
        mass -= probs[k];
    }
    counts[3] = remaining;
    counts
}

/// Measures `shots` copies of `rho` in `setting` through the readout model.
pub fn sample_counts<T: Real>(
    rho: &DensityMatrix<T>,
    setting: BasisSetting,
    shots: u64,
    nm: &NoiseModel,
    seed: u64,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be positive".into()));
    }
    let probs = outcome_probabilities(rho, setting, nm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CountsTable::new(setting, sample_multinomial(&probs, shots, &mut rng), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Pauli;
    use crate::metrics::{concurrence_mixed, evaluate};
    use crate::state::{density_from_pure, prepare_state, purity};
    use proptest::prelude::*;

    type D = DensityMatrix<f64>;
    type M = Matrix<f64>;

    fn bell() -> D {
        density_from_pure(&prepare_state(&PrepParams::bell()))
    }

    fn zz() -> BasisSetting {
        BasisSetting::new(Pauli::Z, Pauli::Z).unwrap()
    }

    #[test]
    fn preset_has_documented_values() {
        let nm = NoiseModel::preset();
        assert_eq!(nm.depol_1q, 0.002);
        assert_eq!(nm.depol_2q, 0.03);
        assert_eq!(nm.amp_damping_gamma, 0.002);
        assert_eq!(nm.phase_damping_gamma, 0.002);
        assert_eq!(nm.readout_confusion[0], [[0.97, 0.03], [0.03, 0.97]]);
        assert_eq!(nm.readout_confusion[1], [[0.97, 0.03], [0.03, 0.97]]);
    }

    #[test]
    fn json_defaults_and_errors() {
        let nm = NoiseModel::from_json_str(r#"{"depol_2q": 0.1}"#).unwrap();
        assert_eq!(nm.depol_2q, 0.1);
        assert_eq!(nm.depol_1q, 0.0);
        assert_eq!(nm.readout_confusion, [IDEAL_READOUT; 2]);
        assert!(NoiseModel::from_json_str("{}").unwrap().is_ideal());
        assert!(NoiseModel::from_json_str(r#"{"depol_1q": 1.5}"#).is_err());
        assert!(NoiseModel::from_json_str(r#"{"depol_1q": "x"}"#).is_err());
        assert!(NoiseModel::from_json_str(r#"{"depolarizing": 0.1}"#).is_err());
        let bad_rows =
            r#"{"readout_confusion": [[[0.9, 0.2], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]]}"#;
        assert!(matches!(
            NoiseModel::from_json_str(bad_rows),
            Err(Error::InvalidNoiseModel(_))
        ));
    }

    #[test]
    fn depolarize_examples() {
        let rho = bell();
        assert_eq!(depolarize(&rho, 0.0, Target::Both).unwrap(), rho);
        let full = depolarize(&rho, 1.0, Target::Both).unwrap();
        assert!(full.matrix().max_abs_diff(&M::identity(4).scale(0.25)) < 1e-15);
        for p in [0.1, 0.4, 0.8] {
            let w = depolarize(&rho, p, Target::Both).unwrap();
            let q: f64 = 1.0 - p;
            assert!((purity(&w) - (1.0 + 3.0 * q * q) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarize_one_side_keeps_other_marginal() {
        let rho = density_from_pure(&prepare_state::<f64>(&PrepParams::new(1.0, 2.0).unwrap()));
        let out = depolarize(&rho, 1.0, Target::A).unwrap();
        let ra = partial_trace(&out, Qubit::A).unwrap();
        assert!(ra.matrix().max_abs_diff(&M::identity(2).scale(0.5)) < 1e-15);
        let rb_before = partial_trace(&rho, Qubit::B).unwrap();
        let rb_after = partial_trace(&out, Qubit::B).unwrap();
        assert!(rb_before.matrix().max_abs_diff(rb_after.matrix()) < 1e-15);
        assert!(depolarize(&rho, 1.1, Target::A).is_err());
    }

    #[test]
    fn damp_examples() {
        let rho = density_from_pure(&prepare_state::<f64>(&PrepParams::new(1.3, 2.2).unwrap()));
        assert!(
            damp(&rho, 0.0, 0.0, Qubit::A)
                .unwrap()
                .matrix()
                .max_abs_diff(rho.matrix())
                < 1e-15
        );
        let relaxed = damp(&damp(&rho, 1.0, 0.0, Qubit::A).unwrap(), 1.0, 0.0, Qubit::B).unwrap();
        assert!(
            relaxed
                .matrix()
                .max_abs_diff(&M::from_diag(&[1.0, 0.0, 0.0, 0.0]))
                < 1e-15
        );

        // |+><+| (x) |0><0|: the A coherence sits at (0, 2).
        let plus0 = density_from_pure(&prepare_state::<f64>(
            &PrepParams::new(std::f64::consts::FRAC_PI_2, 0.0).unwrap(),
        ));
        let g = 0.36;
        let out = damp(&plus0, 0.0, g, Qubit::A).unwrap();
        assert!((out.matrix()[(0, 2)].re - 0.5 * (1.0f64 - g).sqrt()).abs() < 1e-15);
        assert!((out.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn noisy_prep_zero_noise_matches_pure() {
        for p in [
            PrepParams::bell(),
            PrepParams::new(0.4, 2.7).unwrap(),
            PrepParams::new(3.0, 0.2).unwrap(),
        ] {
            let a = run_noisy_prep::<f64>(&p, &NoiseModel::ideal()).unwrap();
            let b = density_from_pure(&prepare_state(&p));
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        }
    }

    #[test]
    fn noisy_prep_bell_two_qubit_depolarizing() {
        let nm = NoiseModel {
            depol_2q: 0.1,
            ..NoiseModel::ideal()
        };
        let rho = run_noisy_prep::<f64>(&PrepParams::bell(), &nm).unwrap();
        // Werner weight 0.9: C = (3*0.9 - 1)/2, purity = (1 + 3*0.81)/4.
        assert!((concurrence_mixed(&rho).unwrap() - 0.85).abs() < 1e-12);
        assert!((purity(&rho) - 0.8575).abs() < 1e-12);
    }

    #[test]
    fn noisy_prep_full_depolarization() {
        let nm = NoiseModel {
            depol_1q: 1.0,
            depol_2q: 1.0,
            ..NoiseModel::ideal()
        };
        let rho = run_noisy_prep::<f64>(&PrepParams::new(1.0, 1.0).unwrap(), &nm).unwrap();
        assert!((purity(&rho) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn preset_channel_stays_physical() {
        let rho = run_noisy_prep::<f64>(&PrepParams::bell(), &NoiseModel::preset()).unwrap();
        let r = evaluate(&rho).unwrap();
        assert!(r.c < 1.0 && r.c > 0.8);
        assert!(r.c <= r.c_max + 1e-9);
    }

    #[test]
    fn sample_examples() {
        let zero = density_from_pure(&PureTwoQubitState::<f64>::basis(0));
        let t = sample_counts(&zero, zz(), 1000, &NoiseModel::ideal(), 3).unwrap();
        assert_eq!(t.counts, [1000, 0, 0, 0]);
        assert_eq!(t.count("00"), Some(1000));
        assert_eq!(t.shots, 1000);

        let probs = outcome_probabilities(&bell(), zz(), &NoiseModel::ideal()).unwrap();
        for (p, want) in probs.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((p - want).abs() < 1e-15);
        }

        let nm = NoiseModel::ideal().with_symmetric_readout(0.05);
        let probs = outcome_probabilities(&zero, zz(), &nm).unwrap();
        // Marginal of qubit A reading 1.
        assert!((probs[2] + probs[3] - 0.05).abs() < 1e-15);
        let t = sample_counts(&zero, zz(), 100_000, &nm, 11).unwrap();
        let ones_a = (t.counts[2] + t.counts[3]) as f64 / 1e5;
        assert!((ones_a - 0.05).abs() < 5.0 * (0.05 * 0.95 / 1e5f64).sqrt());
    }

    #[test]
    fn sampling_is_reproducible() {
        let rho = run_noisy_prep::<f64>(&PrepParams::new(1.0, 2.0).unwrap(), &NoiseModel::preset())
            .unwrap();
        let s = BasisSetting::new(Pauli::X, Pauli::Y).unwrap();
        let a = sample_counts(&rho, s, 1000, &NoiseModel::preset(), 99).unwrap();
        let b = sample_counts(&rho, s, 1000, &NoiseModel::preset(), 99).unwrap();
        assert_eq!(a, b);
        assert!(sample_counts(&rho, s, 0, &NoiseModel::preset(), 99).is_err());
    }

    #[test]
    fn frequencies_converge() {
        let rho = run_noisy_prep::<f64>(&PrepParams::new(1.1, 2.4).unwrap(), &NoiseModel::ideal())
            .unwrap();
        let s = BasisSetting::new(Pauli::X, Pauli::Z).unwrap();
        let probs = outcome_probabilities(&rho, s, &NoiseModel::ideal()).unwrap();
        let shots = 1_000_000u64;
        let t = sample_counts(&rho, s, shots, &NoiseModel::ideal(), 2024).unwrap();
        for (f, p) in t.frequencies().iter().zip(probs) {
            let bound = 5.0 * (p * (1.0 - p) / shots as f64).sqrt();
            assert!((f - p).abs() <= bound.max(1e-12), "{f} vs {p}");
        }
    }

    fn random_state() -> impl Strategy<Value = D> {
        (
            0.0f64..std::f64::consts::PI,
            0.0f64..std::f64::consts::PI,
            0.0f64..1.0,
        )
            .prop_map(|(a, t, w)| {
                let pure = density_from_pure(&prepare_state(&PrepParams::new(a, t).unwrap()));
                pure.mix(&D::maximally_mixed(Subsystem::AB), w).unwrap()
            })
    }

    proptest! {
        #[test]
        fn channels_are_linear(r1 in random_state(), r2 in random_state(), lam in 0.0f64..1.0,
                               p in 0.0f64..1.0, ga in 0.0f64..1.0, gp in 0.0f64..1.0) {
            let mixed = r1.mix(&r2, lam).unwrap();
            for target in [Target::A, Target::B, Target::Both] {
                let lhs = depolarize(&mixed, p, target).unwrap();
                let rhs = depolarize(&r1, p, target).unwrap().mix(&depolarize(&r2, p, target).unwrap(), lam).unwrap();
                prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-12);
            }
            for q in [Qubit::A, Qubit::B] {
                let lhs = damp(&mixed, ga, gp, q).unwrap();
                let rhs = damp(&r1, ga, gp, q).unwrap().mix(&damp(&r2, ga, gp, q).unwrap(), lam).unwrap();
                prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-12);
                prop_assert!((lhs.matrix().trace().re - 1.0).abs() < 1e-10);
                prop_assert!(*lhs.spectrum().last().unwrap() >= -1e-10);
            }
        }
    }
}
