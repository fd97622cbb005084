//! Experiment harness: the 13-state sweep with repetitions, per-axis 4-sigma
//! statistics, normalization against a noise simulation, and the slice,
//! purity and random-angle studies. Everything here runs in `f64`.
//!
//! All randomness is keyed by `(master seed, state, repetition, setting)`
//! through [`derive_seed`], so parallel execution order never changes the
//! output.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{evaluate, evaluate_pure};
use crate::noise::{run_noisy_prep, NoiseModel};
use crate::seed::derive_seed;
use crate::state::{density_from_pure, prepare_state, PrepParams};
use crate::tomography::tomography_pipeline;
use crate::Record;

/// Records with a noise-sim mean below this cannot be rescaled.
pub const NORMALIZATION_EPS: f64 = 1e-3;
/// Ideal values below this make an axis degenerate under normalization.
pub const IDEAL_ZERO: f64 = 1e-9;
/// Confidence half-width in standard deviations.
pub const SIGMA_MULTIPLIER: f64 = 4.0;

/// How a state is turned into a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Exact pure state from the closed-form preparation.
    Analytic,
    /// Exact noisy channel output.
    Channel,
    /// Noisy channel, sampled measurements and tomography.
    Sampled,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Analytic => "analytic",
            Mode::Channel => "channel",
            Mode::Sampled => "sampled",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "channel" => Ok(Mode::Channel),
            "sampled" | "sampled-tomography" => Ok(Mode::Sampled),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// The fixed 13 preparation angles: the theta = pi arc between P and C, the
/// alpha = pi/2 arc between V and C, and four interior points.
pub fn thirteen_states() -> Vec<PrepParams> {
    let mut out = Vec::with_capacity(13);
    for alpha in [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI] {
        out.push(PrepParams { alpha, theta: PI });
    }
    for theta in [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
        out.push(PrepParams {
            alpha: FRAC_PI_2,
            theta,
        });
    }
    for (alpha, theta) in [
        (FRAC_PI_4, FRAC_PI_2),
        (3.0 * FRAC_PI_4, FRAC_PI_2),
        (FRAC_PI_3, FRAC_PI_3),
        (2.0 * FRAC_PI_3, 2.0 * FRAC_PI_3),
    ] {
        out.push(PrepParams { alpha, theta });
    }
    out
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub states: Vec<PrepParams>,
    pub repetitions: usize,
    pub shots: u64,
    pub noise: NoiseModel,
    pub master_seed: u64,
    pub mode: Mode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            states: thirteen_states(),
            repetitions: 10,
            shots: 1000,
            noise: NoiseModel::preset(),
            master_seed: 0,
            mode: Mode::Sampled,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidConfig("no states to sweep".into()));
        }
        if self.repetitions == 0 || self.shots == 0 {
            return Err(Error::InvalidConfig(
                "repetitions and shots must be positive".into(),
            ));
        }
        for p in &self.states {
            p.validate()?;
        }
        self.noise.validate()
    }
}

/// One repetition of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub repetition: usize,
    pub seed: u64,
    pub record: Record,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateRun {
    pub index: usize,
    pub params: PrepParams,
    pub trials: Vec<Trial>,
}

impl StateRun {
    pub fn records(&self) -> Vec<Record> {
        self.trials.iter().map(|t| t.record).collect()
    }
}

/// Record for a single point in the given mode.
pub fn evaluate_point(
    p: &PrepParams,
    mode: Mode,
    nm: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Record> {
    match mode {
        Mode::Analytic => evaluate_pure(&prepare_state::<f64>(p)),
        Mode::Channel => evaluate(&run_noisy_prep::<f64>(p, nm)?),
        Mode::Sampled => evaluate(&tomography_pipeline::<f64>(p, nm, shots, seed)?),
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<StateRun>> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> = (0..cfg.states.len())
        .flat_map(|s| (0..cfg.repetitions).map(move |r| (s, r)))
        .collect();
    let trials = tasks
        .par_iter()
        .map(|&(s, r)| {
            let seed = derive_seed(cfg.master_seed, &[s as u64, r as u64]);
            let record = evaluate_point(&cfg.states[s], cfg.mode, &cfg.noise, cfg.shots, seed)?;
            Ok(Trial {
                repetition: r,
                seed,
                record,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut trials = trials.into_iter();
    Ok(cfg
        .states
        .iter()
        .enumerate()
        .map(|(index, &params)| StateRun {
            index,
            params,
            trials: trials.by_ref().take(cfg.repetitions).collect(),
        })
        .collect())
}

/// The three plotted axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    CoherenceA,
    PredictabilityA,
    Concurrence,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::CoherenceA, Axis::PredictabilityA, Axis::Concurrence];

    pub fn of(self, r: &Record) -> f64 {
        match self {
            Axis::CoherenceA => r.v_a,
            Axis::PredictabilityA => r.p_a,
            Axis::Concurrence => r.c,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::CoherenceA => "v_a",
            Axis::PredictabilityA => "p_a",
            Axis::Concurrence => "c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    /// `SIGMA_MULTIPLIER * std_dev`.
    pub half_width: f64,
}

/// Axis-aligned 4-sigma confidence ellipsoid over (v_a, p_a, c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidStats {
    pub n: usize,
    pub axes: [AxisStats; 3],
}

impl EllipsoidStats {
    pub fn axis(&self, a: Axis) -> &AxisStats {
        &self.axes[a as usize]
    }

    /// Whether `point` (v_a, p_a, c) lies inside the ellipsoid. Zero-width
    /// axes only admit their exact mean.
    pub fn contains(&self, point: [f64; 3]) -> bool {
        let mut q = 0.0;
        for (s, x) in self.axes.iter().zip(point) {
            let d = x - s.mean;
            if s.half_width > 0.0 {
                q += (d / s.half_width).powi(2);
            } else if d.abs() > 1e-12 {
                return false;
            }
        }
        q <= 1.0
    }
}

pub fn ellipsoid_stats(records: &[Record]) -> Result<EllipsoidStats> {
    let n = records.len();
    if n < 2 {
        return Err(Error::InsufficientData(n));
    }
    let axes = Axis::ALL.map(|a| {
        let xs: Vec<f64> = records.iter().map(|r| a.of(r)).collect();
        // Shifted by the first sample so identical inputs give exactly zero spread.
        let mean = xs[0] + xs.iter().map(|x| x - xs[0]).sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std_dev = var.sqrt();
        AxisStats {
            mean,
            std_dev,
            half_width: SIGMA_MULTIPLIER * std_dev,
        }
    });
    Ok(EllipsoidStats { n, axes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisStatus {
    Normalized,
    /// Ideal value is zero, so the rescaled value is pinned to zero.
    Degenerate,
    /// Noise-sim mean below [`NORMALIZATION_EPS`]; raw value kept.
    Unnormalizable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisNormalization {
    pub raw_mean: f64,
    pub noise_sim_mean: f64,
    pub ideal: f64,
    pub normalized: f64,
    pub half_width: f64,
    pub status: AxisStatus,
}

/// Measured means rescaled by `ideal / noise_sim` on each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPoint {
    pub axes: [AxisNormalization; 3],
}

impl NormalizedPoint {
    pub fn axis(&self, a: Axis) -> &AxisNormalization {
        &self.axes[a as usize]
    }

    /// `v_a^2 + p_a^2 + c^2` of the normalized point.
    pub fn sum(&self) -> f64 {
        self.axes.iter().map(|a| a.normalized * a.normalized).sum()
    }

    /// Range of `v_a^2 + p_a^2 + c^2` over the box of per-axis half-widths.
    pub fn sum_interval(&self) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for a in &self.axes {
            let x = a.normalized.abs();
            lo += (x - a.half_width).max(0.0).powi(2);
            hi += (x + a.half_width).powi(2);
        }
        (lo, hi)
    }

    pub fn sum_within_bound_of(&self, target: f64) -> bool {
        let (lo, hi) = self.sum_interval();
        let slack = 1e-12;
        lo - slack <= target && target <= hi + slack
    }
}

pub fn normalize_against_noise_sim(
    measured: &EllipsoidStats,
    noise_sim: &EllipsoidStats,
    ideal: &Record,
) -> NormalizedPoint {
    let axes = Axis::ALL.map(|a| {
        let m = measured.axis(a);
        let sim = noise_sim.axis(a).mean;
        let target = a.of(ideal);
        if sim >= NORMALIZATION_EPS {
            let factor = target / sim;
            AxisNormalization {
                raw_mean: m.mean,
                noise_sim_mean: sim,
                ideal: target,
                normalized: m.mean * factor,
                half_width: m.half_width * factor.abs(),
                status: if target.abs() < IDEAL_ZERO {
                    AxisStatus::Degenerate
                } else {
                    AxisStatus::Normalized
                },
            }
        } else {
            AxisNormalization {
                raw_mean: m.mean,
                noise_sim_mean: sim,
                ideal: target,
                normalized: m.mean,
                half_width: m.half_width,
                status: AxisStatus::Unnormalizable,
            }
        }
    });
    NormalizedPoint { axes }
}

/// Measured vs. noise-simulation runs of the same configuration, with
/// disjoint seed families, plus the derived statistics.
#[derive(Debug, Clone)]
pub struct SweepOutputs {
    pub config: SweepConfig,
    pub measured: Vec<StateRun>,
    pub noise_sim: Vec<StateRun>,
    pub ideal: Vec<Record>,
    pub measured_stats: Vec<EllipsoidStats>,
    pub noise_sim_stats: Vec<EllipsoidStats>,
    pub normalized: Vec<NormalizedPoint>,
}

pub const MEASURED_FAMILY: u64 = 0;
pub const NOISE_SIM_FAMILY: u64 = 1;

pub fn run_normalized_sweep(cfg: &SweepConfig) -> Result<SweepOutputs> {
    cfg.validate()?;
    let family = |f: u64| SweepConfig {
        master_seed: derive_seed(cfg.master_seed, &[f]),
        ..cfg.clone()
    };
    let measured = run_sweep(&family(MEASURED_FAMILY))?;
    let noise_sim = run_sweep(&family(NOISE_SIM_FAMILY))?;
    let ideal = cfg
        .states
        .iter()
        .map(|p| evaluate_pure(&prepare_state::<f64>(p)))
        .collect::<Result<Vec<_>>>()?;
    let measured_stats = measured
        .iter()
        .map(|r| ellipsoid_stats(&r.records()))
        .collect::<Result<Vec<_>>>()?;
    let noise_sim_stats = noise_sim
        .iter()
        .map(|r| ellipsoid_stats(&r.records()))
        .collect::<Result<Vec<_>>>()?;
    let normalized = measured_stats
        .iter()
        .zip(&noise_sim_stats)
        .zip(&ideal)
        .map(|((m, s), i)| normalize_against_noise_sim(m, s, i))
        .collect();
    Ok(SweepOutputs {
        config: cfg.clone(),
        measured,
        noise_sim,
        ideal,
        measured_stats,
        noise_sim_stats,
        normalized,
    })
}

/// One point of the theta = pi slice (where V_A vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceRow {
    pub alpha: f64,
    pub p_a: f64,
    pub v_a: f64,
    pub c_ideal: f64,
    pub c_channel: f64,
    pub c_sampled_mean: Option<f64>,
    pub c_max: f64,
    /// `c_channel / c_ideal` where `c_ideal > SLICE_RATIO_FLOOR`.
    pub ratio: Option<f64>,
}

pub const SLICE_RATIO_FLOOR: f64 = 0.05;

pub fn slice_study(
    nm: &NoiseModel,
    n_alpha: usize,
    shots: u64,
    reps: usize,
    seed: u64,
) -> Result<Vec<SliceRow>> {
    if n_alpha < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 alpha points, got {n_alpha}"
        )));
    }
    nm.validate()?;
    (0..n_alpha)
        .into_par_iter()
        .map(|k| {
            let alpha = PI * k as f64 / (n_alpha - 1) as f64;
            let p = PrepParams { alpha, theta: PI };
            let rho = run_noisy_prep::<f64>(&p, nm)?;
            let rec = evaluate(&rho)?;
            let c_ideal = alpha.sin();
            let c_sampled_mean = if reps > 0 && shots > 0 {
                let mut total = 0.0;
                for r in 0..reps {
                    let s = derive_seed(seed, &[k as u64, r as u64]);
                    total += evaluate(&tomography_pipeline::<f64>(&p, nm, shots, s)?)?.c;
                }
                Some(total / reps as f64)
            } else {
                None
            };
            Ok(SliceRow {
                alpha,
                p_a: rec.p_a,
                v_a: rec.v_a,
                c_ideal,
                c_channel: rec.c,
                c_sampled_mean,
                c_max: rec.c_max,
                ratio: (c_ideal > SLICE_RATIO_FLOOR).then(|| rec.c / c_ideal),
            })
        })
        .collect()
}

/// Sample standard deviation of the defined ratios over their mean.
pub fn ratio_relative_std(rows: &[SliceRow]) -> Option<f64> {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    if ratios.len() < 2 {
        return None;
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(var.sqrt() / mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityRow {
    pub level: f64,
    pub purity: f64,
    pub c: f64,
    pub c_max: f64,
}

/// Two-qubit depolarization of `state` at each level, sorted by purity
/// descending. A fully depolarized point is appended when no level drives
/// the purity below 1/3.
pub fn purity_study(state: &PrepParams, levels: &[f64]) -> Result<Vec<PurityRow>> {
    if levels.is_empty() {
        return Err(Error::InvalidConfig("empty noise grid".into()));
    }
    let row = |level: f64| -> Result<PurityRow> {
        let nm = NoiseModel {
            depol_2q: level,
            ..NoiseModel::ideal()
        };
        let rec = evaluate(&run_noisy_prep::<f64>(state, &nm)?)?;
        Ok(PurityRow {
            level,
            purity: rec.purity,
            c: rec.c,
            c_max: rec.c_max,
        })
    };
    let mut rows = levels.iter().map(|&l| row(l)).collect::<Result<Vec<_>>>()?;
    if !rows.iter().any(|r| r.purity < 1.0 / 3.0) {
        rows.push(row(1.0)?);
    }
    rows.sort_by(|a, b| {
        b.purity
            .total_cmp(&a.purity)
            .then(a.level.total_cmp(&b.level))
    });
    Ok(rows)
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_levels(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("bad level grid {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let levels = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|k| (start + k as f64 * step).min(stop))
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if levels.is_empty() || levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(bad());
    }
    Ok(levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub theta: f64,
    pub v_a: f64,
    pub p_a: f64,
    pub c: f64,
    pub v_a_closed: f64,
    pub p_a_closed: f64,
    pub c_closed: f64,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub max_discrepancy: f64,
}

/// Uniform random angles in `[0, pi]` evaluated exactly and against
/// `V_A = sin a |cos t/2|`, `P_A = |cos a|`, `C = sin a sin t/2`.
pub fn random_scan(n: usize, seed: u64) -> Result<ScanResult> {
    if n == 0 {
        return Err(Error::InvalidConfig("scan needs at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(0.0..=PI), rng.random_range(0.0..=PI)))
        .collect();
    let rows = angles
        .into_iter()
        .map(|(alpha, theta)| {
            let rec = evaluate_pure(&prepare_state::<f64>(&PrepParams { alpha, theta }))?;
            Ok(ScanRow {
                alpha,
                theta,
                v_a: rec.v_a,
                p_a: rec.p_a,
                c: rec.c,
                v_a_closed: alpha.sin() * (theta / 2.0).cos().abs(),
                p_a_closed: alpha.cos().abs(),
                c_closed: alpha.sin() * (theta / 2.0).sin(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = rows
        .iter()
        .flat_map(|r| {
            [
                (r.v_a - r.v_a_closed).abs(),
                (r.p_a - r.p_a_closed).abs(),
                (r.c - r.c_closed).abs(),
            ]
        })
        .fold(0.0, f64::max);
    Ok(ScanResult {
        rows,
        max_discrepancy,
    })
}

/// Exact pure-state record for every state (the ideal sphere).
pub fn analytic_records(states: &[PrepParams]) -> Result<Vec<Record>> {
    states
        .iter()
        .map(|p| evaluate(&density_from_pure(&prepare_state::<f64>(p))))
        .collect()
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TrialRow {
    state_index: usize,
    repetition: usize,
    mode: String,
    seed: u64,
    alpha: Option<f64>,
    theta: Option<f64>,
    v_a: f64,
    p_a: f64,
    v_b: f64,
    p_b: f64,
    c: f64,
    c_max: f64,
    purity: f64,
    sum_a: f64,
    sum_b: f64,
}

pub fn write_trials_csv<W: Write>(out: W, runs: &[StateRun], mode: Mode) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for run in runs {
        for t in &run.trials {
            let r = &t.record;
            w.serialize(TrialRow {
                state_index: run.index,
                repetition: t.repetition,
                mode: mode.to_string(),
                seed: t.seed,
                alpha: Some(run.params.alpha),
                theta: Some(run.params.theta),
                v_a: r.v_a,
                p_a: r.p_a,
                v_b: r.v_b,
                p_b: r.p_b,
                c: r.c,
                c_max: r.c_max,
                purity: r.purity,
                sum_a: r.sum_a,
                sum_b: r.sum_b,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EllipsoidRow<'a> {
    state_index: usize,
    alpha: f64,
    theta: f64,
    source: &'a str,
    n: usize,
    v_a_mean: f64,
    v_a_std: f64,
    v_a_half_width: f64,
    p_a_mean: f64,
    p_a_std: f64,
    p_a_half_width: f64,
    c_mean: f64,
    c_std: f64,
    c_half_width: f64,
}

fn ellipsoid_row<'a>(
    index: usize,
    p: &PrepParams,
    source: &'a str,
    s: &EllipsoidStats,
) -> EllipsoidRow<'a> {
    let [v, pa, c] = s.axes;
    EllipsoidRow {
        state_index: index,
        alpha: p.alpha,
        theta: p.theta,
        source,
        n: s.n,
        v_a_mean: v.mean,
        v_a_std: v.std_dev,
        v_a_half_width: v.half_width,
        p_a_mean: pa.mean,
        p_a_std: pa.std_dev,
        p_a_half_width: pa.half_width,
        c_mean: c.mean,
        c_std: c.std_dev,
        c_half_width: c.half_width,
    }
}

#[derive(Serialize)]
struct NormalizedRow {
    state_index: usize,
    alpha: f64,
    theta: f64,
    v_a_raw_mean: f64,
    v_a_noise_sim_mean: f64,
    v_a_ideal: f64,
    v_a_normalized: f64,
    v_a_half_width: f64,
    v_a_status: AxisStatus,
    p_a_raw_mean: f64,
    p_a_noise_sim_mean: f64,
    p_a_ideal: f64,
    p_a_normalized: f64,
    p_a_half_width: f64,
    p_a_status: AxisStatus,
    c_raw_mean: f64,
    c_noise_sim_mean: f64,
    c_ideal: f64,
    c_normalized: f64,
    c_half_width: f64,
    c_status: AxisStatus,
    sum_a: f64,
    sum_a_lo: f64,
    sum_a_hi: f64,
}

fn normalized_row(index: usize, p: &PrepParams, n: &NormalizedPoint) -> NormalizedRow {
    let [v, pa, c] = n.axes;
    let (lo, hi) = n.sum_interval();
    NormalizedRow {
        state_index: index,
        alpha: p.alpha,
        theta: p.theta,
        v_a_raw_mean: v.raw_mean,
        v_a_noise_sim_mean: v.noise_sim_mean,
        v_a_ideal: v.ideal,
        v_a_normalized: v.normalized,
        v_a_half_width: v.half_width,
        v_a_status: v.status,
        p_a_raw_mean: pa.raw_mean,
        p_a_noise_sim_mean: pa.noise_sim_mean,
        p_a_ideal: pa.ideal,
        p_a_normalized: pa.normalized,
        p_a_half_width: pa.half_width,
        p_a_status: pa.status,
        c_raw_mean: c.raw_mean,
        c_noise_sim_mean: c.noise_sim_mean,
        c_ideal: c.ideal,
        c_normalized: c.normalized,
        c_half_width: c.half_width,
        c_status: c.status,
        sum_a: n.sum(),
        sum_a_lo: lo,
        sum_a_hi: hi,
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes `raw.csv`, `noise_sim.csv`, `normalized.csv` and `ellipsoids.csv`.
pub fn write_sweep_outputs(out: &SweepOutputs, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mode = out.config.mode;
    write_trials_csv(create(dir, "raw.csv")?, &out.measured, mode)?;
    write_trials_csv(create(dir, "noise_sim.csv")?, &out.noise_sim, mode)?;

    let mut w = csv::Writer::from_writer(create(dir, "ellipsoids.csv")?);
    for (i, p) in out.config.states.iter().enumerate() {
        w.serialize(ellipsoid_row(i, p, "raw", &out.measured_stats[i]))?;
        w.serialize(ellipsoid_row(i, p, "noise_sim", &out.noise_sim_stats[i]))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(create(dir, "normalized.csv")?);
    for (i, (p, n)) in out.config.states.iter().zip(&out.normalized).enumerate() {
        w.serialize(normalized_row(i, p, n))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads preparation angles, one `alpha,theta` pair per line in units of pi.
/// Blank lines, `#` comments and a non-numeric header line are skipped.
pub fn read_states_file(path: &Path) -> Result<Vec<PrepParams>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<std::result::Result<f64, _>> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        if out.is_empty() && parsed.iter().all(|p| p.is_err()) {
            continue;
        }
        match parsed.as_slice() {
            [Ok(a), Ok(t)] => out.push(PrepParams::from_pi_units(*a, *t)?),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "{}:{}: expected `alpha,theta`",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{}: no states",
            path.display()
        )));
    }
    Ok(out)
}
