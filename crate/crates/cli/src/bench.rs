//! The benchmark grid: every (algorithm, noise fraction, seed) cell runs
//! once, producing a CSV table, per-algorithm parameter digests, and a PNG
//! panel of one band per cell group.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use hsdenoise_core::{atomic_write, corrupt, dematricize, matricize, HyperCube, NoiseSpec};
use rayon::prelude::*;

use crate::config::BenchConfig;
use crate::png::write_band_png;
use crate::run::{self, Algorithm};

/// One benchmark cell's outcome.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub algorithm: &'static str,
    pub noise_fraction: f64,
    pub seed: u64,
    pub psnr_db: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub params_digest: String,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    algo: Algorithm,
    fraction_index: usize,
    fraction: f64,
    seed: u64,
}

impl Cell {
    fn id(&self) -> String {
        format!(
            "{} at fraction {} seed {}",
            self.algo.label(),
            self.fraction,
            self.seed
        )
    }
}

fn group_prefix(fraction: f64, seed: u64) -> String {
    format!("f{fraction:.2}_s{seed}")
}

/// Runs the whole grid described by `cfg`. Cell failures are reported and
/// logged without stopping the remaining cells; any failure makes the
/// command exit nonzero after the CSV is written.
pub fn run(cfg: &BenchConfig) -> Result<()> {
    let algos = cfg.validate()?;
    let clean = cfg.cube.load()?;
    if let Some(band) = cfg.png_band {
        if band >= clean.bands() {
            bail!(
                "png_band {band} out of range, cube has {} bands (valid 0..={})",
                clean.bands(),
                clean.bands() - 1
            );
        }
    }
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;

    write_params_manifest(cfg, &algos, &cfg.output_dir.join("params.json"))?;

    let y_clean = matricize(&clean);
    let mut noisy: BTreeMap<(usize, u64), HyperCube> = BTreeMap::new();
    for (fi, &fraction) in cfg.noise_fractions.iter().enumerate() {
        for &seed in &cfg.seeds {
            let spec = NoiseSpec {
                fraction,
                kind: cfg.noise_kind.into(),
                seed,
            };
            let (noisy_m, _) = corrupt(&y_clean, &spec)?;
            let cube = dematricize(&noisy_m, clean.rows(), clean.cols())?;
            if let Some(band) = cfg.png_band {
                let prefix = group_prefix(fraction, seed);
                let dir = &cfg.output_dir;
                write_band_png(&clean, band, &dir.join(format!("{prefix}_00_truth.png")))?;
                write_band_png(&cube, band, &dir.join(format!("{prefix}_01_noisy.png")))?;
            }
            noisy.insert((fi, seed), cube);
        }
    }

    let mut cells = Vec::new();
    for &algo in &algos {
        for (fi, &fraction) in cfg.noise_fractions.iter().enumerate() {
            for &seed in &cfg.seeds {
                cells.push(Cell {
                    algo,
                    fraction_index: fi,
                    fraction,
                    seed,
                });
            }
        }
    }

    let run_cells = || -> Vec<(Cell, Result<BenchRecord>)> {
        cells
            .par_iter()
            .map(|&cell| (cell, run_cell(cfg, &clean, &noisy, cell)))
            .collect()
    };
    let outcomes = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(run_cells),
        None => run_cells(),
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (cell, outcome) in outcomes {
        match outcome {
            Ok(record) => records.push(record),
            Err(err) => failures.push(format!("{}: {err:#}", cell.id())),
        }
    }
    records.sort_by(|a, b| {
        (a.algorithm, a.noise_fraction, a.seed)
            .partial_cmp(&(b.algorithm, b.noise_fraction, b.seed))
            .expect("fractions were validated finite")
    });

    let csv_path = cfg.output_dir.join("results.csv");
    atomic_write(&csv_path, render_csv(&records).as_bytes())
        .with_context(|| format!("writing {}", csv_path.display()))?;
    println!(
        "wrote {} of {} records to {}",
        records.len(),
        cells.len(),
        csv_path.display()
    );

    if !failures.is_empty() {
        let log_path = cfg.output_dir.join("errors.log");
        atomic_write(&log_path, (failures.join("\n") + "\n").as_bytes())
            .with_context(|| format!("writing {}", log_path.display()))?;
        for line in &failures {
            eprintln!("cell failed: {line}");
        }
        bail!(
            "{} of {} benchmark cells failed; see {}",
            failures.len(),
            cells.len(),
            log_path.display()
        );
    }
    Ok(())
}

fn run_cell(
    cfg: &BenchConfig,
    clean: &HyperCube,
    noisy: &BTreeMap<(usize, u64), HyperCube>,
    cell: Cell,
) -> Result<BenchRecord> {
    let input = &noisy[&(cell.fraction_index, cell.seed)];
    let spec = cfg.params.spec_for(cell.algo, cell.seed);
    let start = Instant::now();
    let output = run::run(input, &spec)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let psnr_db = run::scored_psnr(clean, &output.cube)?;

    if let Some(band) = cfg.png_band {
        let name = format!(
            "{}_{:02}_{}.png",
            group_prefix(cell.fraction, cell.seed),
            cell.algo.panel_slot(),
            cell.algo.label()
        );
        write_band_png(&output.cube, band, &cfg.output_dir.join(name))?;
    }

    let record = BenchRecord {
        algorithm: cell.algo.label(),
        noise_fraction: cell.fraction,
        seed: cell.seed,
        psnr_db,
        iterations: output.iterations,
        wall_time_s,
        params_digest: cfg.params.digest_for(cell.algo)?,
    };
    eprintln!(
        "[bench] {}: {psnr_db:.2} dB, {} iterations, {wall_time_s:.1} s (params {})",
        cell.id(),
        record.iterations,
        &record.params_digest[..12]
    );
    Ok(record)
}

fn render_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("algorithm,noise_fraction,seed,psnr_db,iterations,wall_time_s\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{:.4},{},{:.4}",
            r.algorithm, r.noise_fraction, r.seed, r.psnr_db, r.iterations, r.wall_time_s
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// Writes `params.json`: per enabled algorithm, the resolved parameter block
/// and its digest, so every CSV row's `params_digest` can be looked up.
fn write_params_manifest(cfg: &BenchConfig, algos: &[Algorithm], path: &Path) -> Result<()> {
    let mut manifest = serde_json::Map::new();
    for &algo in algos {
        let mut entry = serde_json::Map::new();
        entry.insert(
            "digest".to_owned(),
            serde_json::Value::String(cfg.params.digest_for(algo)?),
        );
        entry.insert("params".to_owned(), cfg.params.json_for(algo)?);
        manifest.insert(algo.label().to_owned(), serde_json::Value::Object(entry));
    }
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(manifest))?;
    atomic_write(path, (text + "\n").as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
