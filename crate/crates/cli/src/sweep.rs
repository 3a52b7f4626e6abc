//! Single-parameter sweeps: run one algorithm across a grid of values for
//! one parameter, holding everything else fixed, and emit the trade-off
//! curve (residual norm against regularizer norm) plus validation PSNR per
//! value. Parameters are meant to be tuned one at a time, largest first on a
//! log grid; the recommendation picks the PSNR-maximizing value as a
//! pragmatic stand-in for reading the curve's corner.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hsdenoise_core::{atomic_write, matricize, tv_value, HyperCube, TvVariant};

use crate::run::{self, Algorithm, AlgoSpec};

/// Outcome for one grid value. Failed values keep their error text so the
/// sweep can continue and still report what happened.
struct SweepRow {
    value: f64,
    outcome: Result<SweepPoint, String>,
}

struct SweepPoint {
    residual_norm: f64,
    regularizer_norm: f64,
    objective: Option<f64>,
    psnr_db: f64,
}

/// The default grid when none is given: four decades around 1.
pub const DEFAULT_GRID: [f64; 5] = [100.0, 10.0, 1.0, 0.1, 0.01];

fn allowed_params(algo: Algorithm) -> &'static [&'static str] {
    match algo {
        Algorithm::Mf => &["window"],
        Algorithm::L1tv => &["lambda_tv", "mu_tv"],
        Algorithm::L1bcs | Algorithm::L1kbcs | Algorithm::L1kcs => &[
            "lambda1", "lambda2", "lambda3", "mu", "mu1", "mu2", "mu3",
        ],
    }
}

fn apply(spec: &mut AlgoSpec, name: &str, value: f64) -> Result<()> {
    match spec {
        AlgoSpec::Median { window } => {
            if name != "window" {
                unreachable!("parameter names are validated before the sweep starts");
            }
            if value != value.trunc() || value < 3.0 || (value as usize) % 2 == 0 {
                bail!("window must be an odd integer of at least 3, got {value}");
            }
            *window = value as usize;
        }
        AlgoSpec::Tv(p) => match name {
            "lambda_tv" => p.lambda_tv = value,
            "mu_tv" => p.mu_tv = value,
            _ => unreachable!("parameter names are validated before the sweep starts"),
        },
        AlgoSpec::Solver { params, .. } => match name {
            "lambda1" => params.lambda1 = value,
            "lambda2" => params.lambda2 = value,
            "lambda3" => params.lambda3 = value,
            "mu" => params.mu = value,
            "mu1" => params.mu1 = value,
            "mu2" => params.mu2 = value,
            "mu3" => params.mu3 = value,
            _ => unreachable!("parameter names are validated before the sweep starts"),
        },
    }
    Ok(())
}

fn l1_difference(a: &HyperCube, b: &HyperCube) -> f64 {
    a.data()
        .iter()
        .zip(b.data().iter())
        .map(|(x, y)| (x - y).abs())
        .sum()
}

/// The (residual, regularizer) pair for the curve: the residual is the
/// unweighted data-fit term of the algorithm's objective; the regularizer is
/// the unweighted term the swept parameter multiplies, or zero when the
/// swept parameter is a split weight or a window size and so multiplies no
/// objective term.
fn tradeoff(
    noisy: &HyperCube,
    out: &run::RunOutput,
    spec: &AlgoSpec,
    param: &str,
) -> Result<(f64, f64)> {
    match spec {
        AlgoSpec::Median { .. } => Ok((l1_difference(noisy, &out.cube), 0.0)),
        AlgoSpec::Tv(_) => {
            let residual = l1_difference(noisy, &out.cube);
            let regularizer = if param == "lambda_tv" {
                let mut total = 0.0;
                for b in 0..out.cube.bands() {
                    total += tv_value(&out.cube.band(b)?, TvVariant::Anisotropic);
                }
                total
            } else {
                0.0
            };
            Ok((residual, regularizer))
        }
        AlgoSpec::Solver { .. } => {
            let state = &out
                .solver
                .as_ref()
                .expect("solver runs always carry their result")
                .state;
            let y = matricize(noisy);
            let residual = (y.entries() - state.synthesize())
                .iter()
                .map(|v| v.abs())
                .sum();
            let regularizer = match param {
                "lambda1" => state.coeffs.iter().map(|v| v.abs()).sum(),
                "lambda2" => state.spatial_dict.iter().map(|v| v * v).sum(),
                "lambda3" => state.spectral_dict.iter().map(|v| v * v).sum(),
                _ => 0.0,
            };
            Ok((residual, regularizer))
        }
    }
}

/// Runs the sweep and writes its CSV. Returns the recommended value.
pub fn run(
    algo: Algorithm,
    param: &str,
    grid: &[f64],
    noisy: &HyperCube,
    reference: &HyperCube,
    base: &AlgoSpec,
    output: &Path,
) -> Result<f64> {
    let param = param.replace('-', "_");
    if grid.is_empty() {
        bail!("sweep grid is empty");
    }
    let allowed = allowed_params(algo);
    if !allowed.contains(&param.as_str()) {
        bail!(
            "parameter {param:?} cannot be swept for {}; choose one of {}",
            algo.label(),
            allowed.join(", ")
        );
    }

    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let outcome = sweep_value(&param, value, noisy, reference, base);
        match &outcome {
            Ok(point) => {
                let objective = point
                    .objective
                    .map(|j| format!(" objective={j:.6}"))
                    .unwrap_or_default();
                println!(
                    "{param}={value}: residual={:.6} regularizer={:.6}{objective} psnr={:.2} dB",
                    point.residual_norm, point.regularizer_norm, point.psnr_db
                );
            }
            Err(err) => eprintln!("{param}={value}: failed: {err}"),
        }
        rows.push(SweepRow {
            value,
            outcome: outcome.map_err(|e| format!("{e:#}")),
        });
    }

    atomic_write(output, render_csv(&rows).as_bytes())
        .with_context(|| format!("writing {}", output.display()))?;
    println!("sweep table written to {}", output.display());

    let best = rows
        .iter()
        .filter_map(|row| match &row.outcome {
            Ok(point) => Some((row.value, point.psnr_db)),
            Err(_) => None,
        })
        .reduce(|best, candidate| if candidate.1 > best.1 { candidate } else { best });
    match best {
        Some((value, psnr)) => {
            println!("recommended {param} = {value} (psnr {psnr:.2} dB)");
            Ok(value)
        }
        None => bail!("every grid value failed; no recommendation"),
    }
}

fn sweep_value(
    param: &str,
    value: f64,
    noisy: &HyperCube,
    reference: &HyperCube,
    base: &AlgoSpec,
) -> Result<SweepPoint> {
    let mut spec = base.clone();
    apply(&mut spec, param, value)?;
    let out = run::run(noisy, &spec)?;
    let (residual_norm, regularizer_norm) = tradeoff(noisy, &out, &spec, param)?;
    Ok(SweepPoint {
        residual_norm,
        regularizer_norm,
        objective: out.final_objective,
        psnr_db: run::scored_psnr(reference, &out.cube)?,
    })
}

fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,residual_norm,regularizer_norm,objective,psnr_db\n");
    for row in rows {
        match &row.outcome {
            Ok(point) => {
                let objective = point
                    .objective
                    .map(|j| format!("{j:.6}"))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{},{:.6},{:.6},{objective},{:.4}",
                    row.value, point.residual_norm, point.regularizer_norm, point.psnr_db
                )
            }
            Err(_) => writeln!(out, "{},,,,", row.value),
        }
        .expect("writing to a string cannot fail");
    }
    out
}
