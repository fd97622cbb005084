use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use triality::experiments::{
    parse_levels, purity_study, random_scan, ratio_relative_std, read_states_file,
    run_normalized_sweep, slice_study, thirteen_states, write_rows_csv, write_sweep_outputs, Mode,
    SweepConfig,
};
use triality::noise::run_noisy_prep;
use triality::state::{density_from_pure, prepare_state};
use triality::tomography::tomography_pipeline;
use triality::{evaluate, evaluate_pure, Density, Error, NoiseModel, PrepParams};

#[derive(Parser)]
#[command(
    name = "triality",
    version,
    about = "Coherence, predictability and concurrence of two-qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one preparation and print its record as JSON.
    Triality {
        /// Preparation angle alpha in units of pi.
        #[arg(long, value_parser = angle)]
        alpha: f64,
        /// Preparation angle theta in units of pi.
        #[arg(long, value_parser = angle)]
        theta: f64,
        /// Noise model JSON (defaults to the built-in preset).
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, default_value = "analytic", value_parser = mode)]
        mode: Mode,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the evaluated density matrix as JSON to this file.
        #[arg(long)]
        dump_rho: Option<PathBuf>,
    },
    /// Repeated sampled tomography of a set of states, normalized against a
    /// second run with a disjoint seed family.
    Sweep {
        /// `default13` or a file of `alpha,theta` lines in units of pi.
        #[arg(long, default_value = "default13")]
        states: String,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
        reps: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Concurrence along theta = pi, where the local coherence vanishes.
    Slice {
        #[arg(long, default_value_t = 21, value_parser = clap::value_parser!(u64).range(3..))]
        n_alpha: u64,
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Sampled-tomography repetitions per point (0 to skip sampling).
        #[arg(long, default_value_t = 10)]
        reps: u64,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Concurrence and its bound against purity under two-qubit depolarization.
    PurityStudy {
        /// `start:stop:step` or a comma-separated list of depolarizing levels.
        #[arg(long, default_value = "0:1:0.05")]
        levels: String,
        #[arg(long, default_value_t = 0.5, value_parser = angle)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, value_parser = angle)]
        theta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random angles checked against the closed-form expressions.
    Scan {
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn angle(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x * std::f64::consts::PI)
    } else {
        Err(format!("angle {x} outside [0, 1] (units of pi)"))
    }
}

fn mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_noise(path: Option<&Path>) -> triality::Result<NoiseModel> {
    match path {
        Some(p) => NoiseModel::from_path(p),
        None => Ok(NoiseModel::preset()),
    }
}

fn create(dir: &Path, name: &str) -> triality::Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn run(cmd: Command) -> triality::Result<()> {
    match cmd {
        Command::Triality {
            alpha,
            theta,
            noise,
            mode,
            shots,
            seed,
            dump_rho,
        } => {
            let p = PrepParams::new(alpha, theta)?;
            let nm = load_noise(noise.as_deref())?;
            let (rho, record) = match mode {
                Mode::Analytic => {
                    let psi = prepare_state::<f64>(&p);
                    (density_from_pure(&psi), evaluate_pure(&psi)?)
                }
                Mode::Channel => {
                    let rho: Density = run_noisy_prep(&p, &nm)?;
                    let rec = evaluate(&rho)?;
                    (rho, rec)
                }
                Mode::Sampled => {
                    let rho: Density = tomography_pipeline(&p, &nm, shots, seed)?;
                    let rec = evaluate(&rho)?;
                    (rho, rec)
                }
            };
            if let Some(path) = dump_rho {
                serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &rho)?;
            }
            println!("{}", serde_json::to_string_pretty(&record)?);
        }
        Command::Sweep {
            states,
            reps,
            shots,
            noise,
            seed,
            out,
        } => {
            let states = match states.as_str() {
                "default13" => thirteen_states(),
                file => read_states_file(Path::new(file))?,
            };
            let cfg = SweepConfig {
                states,
                repetitions: reps as usize,
                shots,
                noise: load_noise(noise.as_deref())?,
                master_seed: seed,
                mode: Mode::Sampled,
            };
            let result = run_normalized_sweep(&cfg)?;
            write_sweep_outputs(&result, &out)?;
            let inside = result
                .normalized
                .iter()
                .filter(|n| n.sum_within_bound_of(1.0))
                .count();
            println!(
                "{} states, {inside} normalized sums within 4 sigma of 1",
                cfg.states.len()
            );
        }
        Command::Slice {
            n_alpha,
            noise,
            reps,
            shots,
            seed,
            out,
        } => {
            let nm = load_noise(noise.as_deref())?;
            let rows = slice_study(&nm, n_alpha as usize, shots, reps as usize, seed)?;
            write_rows_csv(create(&out, "slice.csv")?, &rows)?;
            if let Some(r) = ratio_relative_std(&rows) {
                println!("relative std of c/c_ideal: {r:.3e}");
            }
        }
        Command::PurityStudy {
            levels,
            alpha,
            theta,
            out,
        } => {
            let rows = purity_study(&PrepParams::new(alpha, theta)?, &parse_levels(&levels)?)?;
            write_rows_csv(create(&out, "purity.csv")?, &rows)?;
        }
        Command::Scan { n, seed, out } => {
            let scan = random_scan(n as usize, seed)?;
            write_rows_csv(create(&out, "scan.csv")?, &scan.rows)?;
            println!(
                "max discrepancy from closed form: {:.3e}",
                scan.max_discrepancy
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(1),
                Error::InvalidConfig(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
