//! Command-line front end for hyperspectral impulse denoising: cube
//! synthesis and corruption, running any of the five algorithms, PSNR
//! benchmarking, parameter sweeps, and PNG export.

mod bench;
mod config;
mod png;
mod run;
mod sweep;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hsdenoise_core::{
    corrupt, cube_to_bytes, dematricize, matricize, read_cube, synth_cube, write_cube,
    BandMatrix, HyperCube, KbcsParams, NoiseSpec, TvParams,
};

use config::{BenchConfig, BregmanArg, NoiseKindArg};
use run::{Algorithm, AlgoSpec};

#[derive(Parser)]
#[command(
    name = "hsdenoise",
    version,
    about = "Hyperspectral impulse-noise removal via blind compressed sensing, with baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cube from a sparse separable model.
    Synth(SynthArgs),
    /// Corrupt a cube with impulse noise; writes the noisy cube and a mask.
    Corrupt(CorruptArgs),
    /// Run one denoising algorithm; writes the estimate and a run report.
    Denoise(DenoiseArgs),
    /// Run the benchmark grid from a JSON config; writes CSV and PNGs.
    Bench(BenchArgs),
    /// Sweep one parameter over a grid and recommend the best value.
    Sweep(SweepArgs),
    /// Print the PSNR between two cubes in dB.
    Psnr(PsnrArgs),
    /// Export one band of a cube as an 8-bit grayscale PNG.
    ExportPng(ExportPngArgs),
}

#[derive(Args)]
struct SynthArgs {
    rows: usize,
    cols: usize,
    bands: usize,
    /// Spatial dictionary atoms in the generating model.
    #[arg(long, default_value_t = 12)]
    spatial_atoms: usize,
    /// Spectral dictionary atoms in the generating model.
    #[arg(long, default_value_t = 4)]
    spectral_atoms: usize,
    /// Fraction of nonzero generating coefficients.
    #[arg(long, default_value_t = 0.15)]
    sparsity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, default_value = "cube.hsc1")]
    output: PathBuf,
}

#[derive(Args)]
struct CorruptArgs {
    input: PathBuf,
    /// Fraction of entries to corrupt, in [0, 1].
    #[arg(long, default_value_t = 0.3)]
    fraction: f64,
    #[arg(long, value_enum, default_value_t = NoiseKindArg::RandomValued)]
    kind: NoiseKindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Mask output path (default: <output>.mask).
    #[arg(long)]
    mask: Option<PathBuf>,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Run report path (default: <output>.report.txt).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Clean cube; when given, the report includes PSNR against it.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[command(flatten)]
    tuning: TuningFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON benchmark config; omitted, the documented defaults run.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    /// Parameter to sweep: lambda1/lambda2/lambda3/mu/mu1/mu2/mu3 for the
    /// solver variants, lambda_tv/mu_tv for l1tv, window for mf.
    #[arg(long)]
    param: String,
    /// Comma-separated grid values (default: 100,10,1,0.1,0.01).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Noisy input cube the algorithm runs on.
    input: PathBuf,
    /// Clean cube the validation PSNR is measured against.
    #[arg(long)]
    reference: PathBuf,
    #[arg(short, long, default_value = "sweep.csv")]
    output: PathBuf,
    #[command(flatten)]
    tuning: TuningFlags,
}

#[derive(Args)]
struct PsnrArgs {
    reference: PathBuf,
    estimate: PathBuf,
}

#[derive(Args)]
struct ExportPngArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    band: usize,
    #[arg(short, long)]
    output: PathBuf,
}

/// Parameter overrides shared by `denoise` and `sweep`. Flags that do not
/// apply to the chosen algorithm are ignored; unset flags keep the
/// algorithm's reference defaults.
#[derive(Args, Clone)]
struct TuningFlags {
    /// Coefficient sparsity weight.
    #[arg(long)]
    lambda1: Option<f64>,
    /// Spatial dictionary energy weight.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Spectral dictionary energy weight.
    #[arg(long)]
    lambda3: Option<f64>,
    /// Residual split weight.
    #[arg(long)]
    mu: Option<f64>,
    /// Coefficient split weight.
    #[arg(long)]
    mu1: Option<f64>,
    /// Spatial dictionary split weight.
    #[arg(long)]
    mu2: Option<f64>,
    /// Spectral dictionary split weight.
    #[arg(long)]
    mu3: Option<f64>,
    /// Relative objective-change stopping threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Outer iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Seed for dictionary and relaxation initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Spatial atom count (default: one per pixel).
    #[arg(long)]
    k1: Option<usize>,
    /// Spectral atom count (default: one per band).
    #[arg(long)]
    k2: Option<usize>,
    /// Correction-variable update rule.
    #[arg(long, value_enum)]
    bregman: Option<BregmanArg>,
    /// Total-variation weight (l1tv only).
    #[arg(long)]
    lambda_tv: Option<f64>,
    /// Total-variation split weight (l1tv only).
    #[arg(long)]
    mu_tv: Option<f64>,
    /// Median filter window edge length (mf only).
    #[arg(long)]
    window: Option<usize>,
}

impl TuningFlags {
    fn resolve(&self, algo: Algorithm) -> AlgoSpec {
        match algo {
            Algorithm::Mf => AlgoSpec::Median {
                window: self.window.unwrap_or(3),
            },
            Algorithm::L1tv => {
                let mut p = TvParams::default();
                if let Some(v) = self.lambda_tv {
                    p.lambda_tv = v;
                }
                if let Some(v) = self.mu_tv {
                    p.mu_tv = v;
                }
                if let Some(v) = self.tol {
                    p.tol = v;
                }
                if let Some(v) = self.max_iter {
                    p.max_iter = v;
                }
                AlgoSpec::Tv(p)
            }
            Algorithm::L1bcs | Algorithm::L1kbcs | Algorithm::L1kcs => {
                let mut p = KbcsParams {
                    mode: algo.solver_mode().expect("solver variants have a mode"),
                    ..KbcsParams::default()
                };
                if let Some(v) = self.lambda1 {
                    p.lambda1 = v;
                }
                if let Some(v) = self.lambda2 {
                    p.lambda2 = v;
                }
                if let Some(v) = self.lambda3 {
                    p.lambda3 = v;
                }
                if let Some(v) = self.mu {
                    p.mu = v;
                }
                if let Some(v) = self.mu1 {
                    p.mu1 = v;
                }
                if let Some(v) = self.mu2 {
                    p.mu2 = v;
                }
                if let Some(v) = self.mu3 {
                    p.mu3 = v;
                }
                if let Some(v) = self.tol {
                    p.tol = v;
                }
                if let Some(v) = self.max_iter {
                    p.max_iter = v;
                }
                if let Some(v) = self.seed {
                    p.seed = v;
                }
                if let Some(v) = self.bregman {
                    p.bregman_form = v.into();
                }
                AlgoSpec::Solver {
                    params: p,
                    k1: self.k1,
                    k2: self.k2,
                }
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Corrupt(args) => cmd_corrupt(args),
        Command::Denoise(args) => cmd_denoise(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Psnr(args) => cmd_psnr(args),
        Command::ExportPng(args) => cmd_export_png(args),
    }
}

fn load_cube(path: &PathBuf) -> Result<HyperCube> {
    read_cube(path).with_context(|| format!("reading cube {}", path.display()))
}

fn save_cube(path: &PathBuf, cube: &HyperCube) -> Result<()> {
    write_cube(path, cube).with_context(|| format!("writing cube {}", path.display()))
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let (cube, _) = synth_cube(
        args.rows,
        args.cols,
        args.bands,
        args.spatial_atoms,
        args.spectral_atoms,
        args.sparsity,
        args.seed,
    )?;
    let bytes = cube_to_bytes(&cube)?;
    hsdenoise_core::atomic_write(&args.output, &bytes)
        .with_context(|| format!("writing cube {}", args.output.display()))?;

    let data = cube.data();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in data {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    println!(
        "wrote {} x {} x {} cube to {} ({} bytes)",
        cube.rows(),
        cube.cols(),
        cube.bands(),
        args.output.display(),
        bytes.len()
    );
    println!(
        "spatial atoms {}, spectral atoms {}, sparsity {}, seed {}",
        args.spatial_atoms, args.spectral_atoms, args.sparsity, args.seed
    );
    println!(
        "value range [{min:.3}, {max:.3}], mean {:.3}",
        sum / data.len() as f64
    );
    Ok(())
}

fn cmd_corrupt(args: CorruptArgs) -> Result<()> {
    let clean = load_cube(&args.input)?;
    let spec = NoiseSpec {
        fraction: args.fraction,
        kind: args.kind.into(),
        seed: args.seed,
    };
    let (noisy_m, mask) = corrupt(&matricize(&clean), &spec)?;
    let noisy = dematricize(&noisy_m, clean.rows(), clean.cols())?;
    save_cube(&args.output, &noisy)?;

    let count = mask.iter().filter(|&&hit| hit).count();
    let mask_matrix = BandMatrix::new(mask.mapv(|hit| if hit { 1.0 } else { 0.0 }))?;
    let mask_cube = dematricize(&mask_matrix, clean.rows(), clean.cols())?;
    let mask_path = args
        .mask
        .unwrap_or_else(|| PathBuf::from(format!("{}.mask", args.output.display())));
    save_cube(&mask_path, &mask_cube)?;

    println!("corrupted entries: {count} of {}", clean.len());
    println!("noisy cube written to {}", args.output.display());
    println!("mask written to {}", mask_path.display());
    Ok(())
}

fn cmd_denoise(args: DenoiseArgs) -> Result<()> {
    let noisy = load_cube(&args.input)?;
    let spec = args.tuning.resolve(args.algorithm);
    let start = Instant::now();
    let out = run::run(&noisy, &spec)?;
    let wall = start.elapsed().as_secs_f64();
    save_cube(&args.output, &out.cube)?;

    let mut report = String::new();
    writeln!(report, "algorithm: {}", args.algorithm.label())?;
    writeln!(
        report,
        "input: {} ({} x {} x {})",
        args.input.display(),
        noisy.rows(),
        noisy.cols(),
        noisy.bands()
    )?;
    writeln!(report, "output: {}", args.output.display())?;
    writeln!(report, "parameters: {}", spec.describe(&noisy))?;
    writeln!(report, "iterations: {}", out.iterations)?;
    if let Some(converged) = out.converged {
        writeln!(report, "converged: {converged}")?;
    }
    if let Some(j) = out.initial_objective {
        writeln!(report, "initial objective: {j:.6}")?;
    }
    if let Some(j) = out.final_objective {
        writeln!(report, "final objective: {j:.6}")?;
    }
    if let Some(ref reference_path) = args.reference {
        let reference = load_cube(reference_path)?;
        let psnr_db = run::scored_psnr(&reference, &out.cube)?;
        writeln!(report, "psnr vs reference: {psnr_db:.2} dB")?;
    }
    writeln!(report, "wall time: {wall:.3} s")?;

    let report_path = args
        .report
        .unwrap_or_else(|| PathBuf::from(format!("{}.report.txt", args.output.display())));
    hsdenoise_core::atomic_write(&report_path, report.as_bytes())
        .with_context(|| format!("writing report {}", report_path.display()))?;
    print!("{report}");
    println!("report written to {}", report_path.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut cfg = match args.config {
        Some(ref path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    if let Some(dir) = args.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(workers) = args.workers {
        cfg.workers = Some(workers);
    }
    bench::run(&cfg)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let noisy = load_cube(&args.input)?;
    let reference = load_cube(&args.reference)?;
    if noisy.rows() != reference.rows()
        || noisy.cols() != reference.cols()
        || noisy.bands() != reference.bands()
    {
        bail!(
            "cube shapes differ: input is {} x {} x {}, reference is {} x {} x {}",
            noisy.rows(),
            noisy.cols(),
            noisy.bands(),
            reference.rows(),
            reference.cols(),
            reference.bands()
        );
    }
    let base = args.tuning.resolve(args.algorithm);
    let grid = args.grid.unwrap_or_else(|| sweep::DEFAULT_GRID.to_vec());
    sweep::run(
        args.algorithm,
        &args.param,
        &grid,
        &noisy,
        &reference,
        &base,
        &args.output,
    )?;
    Ok(())
}

fn cmd_psnr(args: PsnrArgs) -> Result<()> {
    let reference = load_cube(&args.reference)?;
    let estimate = load_cube(&args.estimate)?;
    if reference.rows() != estimate.rows()
        || reference.cols() != estimate.cols()
        || reference.bands() != estimate.bands()
    {
        bail!(
            "cube shapes differ: reference is {} x {} x {}, estimate is {} x {} x {}",
            reference.rows(),
            reference.cols(),
            reference.bands(),
            estimate.rows(),
            estimate.cols(),
            estimate.bands()
        );
    }
    let value = hsdenoise_core::psnr(&matricize(&reference), &matricize(&estimate))?;
    println!("{value:.2}");
    Ok(())
}

fn cmd_export_png(args: ExportPngArgs) -> Result<()> {
    let cube = load_cube(&args.input)?;
    png::write_band_png(&cube, args.band, &args.output)?;
    println!(
        "wrote band {} of {} to {}",
        args.band,
        args.input.display(),
        args.output.display()
    );
    Ok(())
}
