//! Algorithm dispatch shared by the `denoise`, `bench`, and `sweep`
//! commands: one entry point that accepts a noisy cube plus resolved
//! parameters and returns the estimate together with run diagnostics.

use anyhow::{bail, Result};
use hsdenoise_core::{
    dematricize, denoise, l1tv_denoise_traced, l1tv_objective, matricize, median_filter,
    BregmanForm, DenoiseResult, HyperCube, KbcsParams, SolverMode, TvParams,
};

/// The five benchmarked algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    /// Per-band median filter.
    Mf,
    /// Per-band total-variation restoration.
    L1tv,
    /// Learned spatial dictionary, identity spectral dictionary.
    L1bcs,
    /// Learned spatial and spectral dictionaries.
    L1kbcs,
    /// Fixed wavelet/DCT dictionary pair.
    L1kcs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Mf,
        Algorithm::L1tv,
        Algorithm::L1bcs,
        Algorithm::L1kbcs,
        Algorithm::L1kcs,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Mf => "mf",
            Algorithm::L1tv => "l1tv",
            Algorithm::L1bcs => "l1bcs",
            Algorithm::L1kbcs => "l1kbcs",
            Algorithm::L1kcs => "l1kcs",
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        for algo in Self::ALL {
            if algo.label() == label {
                return Ok(algo);
            }
        }
        bail!("unknown algorithm {label:?}; expected one of mf, l1tv, l1bcs, l1kbcs, l1kcs");
    }

    /// Position in the image panel: ground truth, noisy, mf, l1bcs, l1kbcs,
    /// l1tv, l1kcs.
    pub fn panel_slot(self) -> usize {
        match self {
            Algorithm::Mf => 2,
            Algorithm::L1bcs => 3,
            Algorithm::L1kbcs => 4,
            Algorithm::L1tv => 5,
            Algorithm::L1kcs => 6,
        }
    }

    pub fn solver_mode(self) -> Option<SolverMode> {
        match self {
            Algorithm::Mf | Algorithm::L1tv => None,
            Algorithm::L1bcs => Some(SolverMode::Bcs),
            Algorithm::L1kbcs => Some(SolverMode::Kbcs),
            Algorithm::L1kcs => Some(SolverMode::Kcs),
        }
    }
}

/// Fully resolved parameters for one algorithm run.
#[derive(Debug, Clone)]
pub enum AlgoSpec {
    Median {
        window: usize,
    },
    Tv(TvParams),
    Solver {
        params: KbcsParams,
        /// Spatial atom count; `None` resolves to the pixel count.
        k1: Option<usize>,
        /// Spectral atom count; `None` resolves to the band count.
        k2: Option<usize>,
    },
}

impl AlgoSpec {
    /// One-line `key=value` rendering for run reports, with the dictionary
    /// sizes resolved against the input cube.
    pub fn describe(&self, input: &HyperCube) -> String {
        match self {
            AlgoSpec::Median { window } => format!("window={window}"),
            AlgoSpec::Tv(p) => format!(
                "lambda_tv={} mu_tv={} tol={} max_iter={}",
                p.lambda_tv, p.mu_tv, p.tol, p.max_iter
            ),
            AlgoSpec::Solver { params: p, k1, k2 } => {
                let form = match p.bregman_form {
                    BregmanForm::Reflected => "reflected",
                    BregmanForm::Additive => "additive",
                };
                format!(
                    "lambda1={} lambda2={} lambda3={} mu={} mu1={} mu2={} mu3={} \
                     tol={} max_iter={} bregman={form} seed={} k1={} k2={}",
                    p.lambda1,
                    p.lambda2,
                    p.lambda3,
                    p.mu,
                    p.mu1,
                    p.mu2,
                    p.mu3,
                    p.tol,
                    p.max_iter,
                    p.seed,
                    k1.unwrap_or_else(|| input.n_pixels()),
                    k2.unwrap_or_else(|| input.bands()),
                )
            }
        }
    }
}

/// Estimate plus diagnostics from one algorithm run. The baselines leave the
/// solver-specific fields empty: the median filter is a single pass with no
/// objective, and the total-variation runner reports the summed per-band
/// objective but has no convergence flag because bands stop independently.
pub struct RunOutput {
    pub cube: HyperCube,
    pub iterations: usize,
    pub converged: Option<bool>,
    pub initial_objective: Option<f64>,
    pub final_objective: Option<f64>,
    /// Full solver result, kept for sweep diagnostics.
    pub solver: Option<DenoiseResult>,
}

/// Runs one algorithm on `noisy` and collects its diagnostics.
pub fn run(noisy: &HyperCube, spec: &AlgoSpec) -> Result<RunOutput> {
    match spec {
        AlgoSpec::Median { window } => {
            let cube = median_filter(noisy, *window)?;
            Ok(RunOutput {
                cube,
                iterations: 1,
                converged: None,
                initial_objective: None,
                final_objective: None,
                solver: None,
            })
        }
        AlgoSpec::Tv(params) => {
            let (cube, sweeps) = l1tv_denoise_traced(noisy, params)?;
            let mut before = 0.0;
            let mut after = 0.0;
            for b in 0..noisy.bands() {
                let yb = noisy.band(b)?;
                let xb = cube.band(b)?;
                before += l1tv_objective(&yb, &yb, params)?;
                after += l1tv_objective(&yb, &xb, params)?;
            }
            Ok(RunOutput {
                cube,
                iterations: sweeps,
                converged: None,
                initial_objective: Some(before),
                final_objective: Some(after),
                solver: None,
            })
        }
        AlgoSpec::Solver { params, k1, k2 } => {
            let y = matricize(noisy);
            let k1 = k1.unwrap_or_else(|| noisy.n_pixels());
            let k2 = k2.unwrap_or_else(|| noisy.bands());
            let result = denoise(&y, params, k1, k2)?;
            let cube = dematricize(&result.estimate, noisy.rows(), noisy.cols())?;
            Ok(RunOutput {
                cube,
                iterations: result.iterations,
                converged: Some(result.converged),
                initial_objective: Some(result.initial_objective),
                final_objective: Some(result.final_objective()),
                solver: Some(result),
            })
        }
    }
}

/// PSNR of `estimate` against `reference` with the estimate clamped into
/// [0, 1] first, so every algorithm is scored on the same displayable range.
pub fn scored_psnr(reference: &HyperCube, estimate: &HyperCube) -> Result<f64> {
    let reference = matricize(reference);
    let clamped = matricize(estimate).clamped_unit();
    Ok(hsdenoise_core::psnr(&reference, &clamped)?)
}
