//! Benchmark configuration schema and per-algorithm parameter blocks.
//!
//! A benchmark run is described by a JSON document deserialized into
//! [`BenchConfig`]. Every field has a default, so `{}` is a valid config and
//! `hsdenoise bench` with no `--config` runs the documented default grid.
//! The parameter blocks mirror the solver and baseline parameter structs
//! one-to-one; their serialized form doubles as the `params_digest` input,
//! so a digest changes exactly when a parameter does.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hsdenoise_core::{
    synth_cube, BregmanForm, HyperCube, KbcsParams, NoiseKind, SolverMode, TvParams,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::run::{Algorithm, AlgoSpec};

/// Impulse replacement model, shared by the `corrupt` flags and the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKindArg {
    /// Hit entries are replaced by uniform draws from [0, 1].
    RandomValued,
    /// Hit entries are replaced by 0 or 1 with equal probability.
    SaltAndPepper,
}

impl From<NoiseKindArg> for NoiseKind {
    fn from(value: NoiseKindArg) -> Self {
        match value {
            NoiseKindArg::RandomValued => NoiseKind::RandomValued,
            NoiseKindArg::SaltAndPepper => NoiseKind::SaltAndPepper,
        }
    }
}

/// Correction-variable update rule exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BregmanArg {
    Reflected,
    Additive,
}

impl From<BregmanArg> for BregmanForm {
    fn from(value: BregmanArg) -> Self {
        match value {
            BregmanArg::Reflected => BregmanForm::Reflected,
            BregmanArg::Additive => BregmanForm::Additive,
        }
    }
}

impl BregmanArg {
    pub fn label(self) -> &'static str {
        match self {
            BregmanArg::Reflected => "reflected",
            BregmanArg::Additive => "additive",
        }
    }
}

/// Synthetic cube description, the default benchmark input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub spatial_atoms: usize,
    pub spectral_atoms: usize,
    pub sparsity: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            rows: 32,
            cols: 32,
            bands: 32,
            spatial_atoms: 12,
            spectral_atoms: 4,
            sparsity: 0.25,
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn build(&self) -> Result<HyperCube> {
        let (cube, _) = synth_cube(
            self.rows,
            self.cols,
            self.bands,
            self.spatial_atoms,
            self.spectral_atoms,
            self.sparsity,
            self.seed,
        )?;
        Ok(cube)
    }
}

/// Where the ground-truth cube comes from: generated or loaded from disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CubeSource {
    Synth(SynthSpec),
    File(PathBuf),
}

impl Default for CubeSource {
    fn default() -> Self {
        CubeSource::Synth(SynthSpec::default())
    }
}

impl CubeSource {
    pub fn load(&self) -> Result<HyperCube> {
        match self {
            CubeSource::Synth(spec) => spec.build(),
            CubeSource::File(path) => hsdenoise_core::read_cube(path)
                .with_context(|| format!("reading cube {}", path.display())),
        }
    }
}

/// Median filter parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfBlock {
    /// Odd window edge length, at least 3.
    pub window: usize,
}

impl Default for MfBlock {
    fn default() -> Self {
        Self { window: 3 }
    }
}

/// Total-variation baseline parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TvBlock {
    pub lambda_tv: f64,
    pub mu_tv: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TvBlock {
    fn default() -> Self {
        let p = TvParams::default();
        Self {
            lambda_tv: p.lambda_tv,
            mu_tv: p.mu_tv,
            tol: p.tol,
            max_iter: p.max_iter,
        }
    }
}

impl TvBlock {
    pub fn to_params(&self) -> TvParams {
        TvParams {
            lambda_tv: self.lambda_tv,
            mu_tv: self.mu_tv,
            tol: self.tol,
            max_iter: self.max_iter,
            ..TvParams::default()
        }
    }
}

/// Dictionary-solver parameters shared by the bcs/kbcs/kcs variants. The
/// seed is deliberately absent: benchmark cells stamp their own cell seed so
/// that one seed column controls both the corruption draw and the solver
/// initialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub mu: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub bregman: BregmanArg,
    /// Spatial atom count; `null` means one atom per pixel.
    pub k1: Option<usize>,
    /// Spectral atom count; `null` means one atom per band.
    pub k2: Option<usize>,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let p = KbcsParams::default();
        Self {
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            lambda3: p.lambda3,
            mu: p.mu,
            mu1: p.mu1,
            mu2: p.mu2,
            mu3: p.mu3,
            tol: p.tol,
            max_iter: p.max_iter,
            bregman: BregmanArg::Reflected,
            k1: None,
            k2: None,
        }
    }
}

impl SolverBlock {
    pub fn to_params(&self, mode: SolverMode, seed: u64) -> KbcsParams {
        KbcsParams {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            mu: self.mu,
            mu1: self.mu1,
            mu2: self.mu2,
            mu3: self.mu3,
            tol: self.tol,
            max_iter: self.max_iter,
            mode,
            bregman_form: self.bregman.into(),
            seed,
            ..KbcsParams::default()
        }
    }
}

/// Per-algorithm parameter blocks, each defaulting to the reference values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsBlock {
    pub mf: MfBlock,
    pub l1tv: TvBlock,
    pub l1bcs: SolverBlock,
    pub l1kbcs: SolverBlock,
    pub l1kcs: SolverBlock,
}

impl ParamsBlock {
    /// Resolves the block for `algo` into a runnable spec, stamping `seed`
    /// into the solver variants.
    pub fn spec_for(&self, algo: Algorithm, seed: u64) -> AlgoSpec {
        match algo {
            Algorithm::Mf => AlgoSpec::Median {
                window: self.mf.window,
            },
            Algorithm::L1tv => AlgoSpec::Tv(self.l1tv.to_params()),
            Algorithm::L1bcs => AlgoSpec::Solver {
                params: self.l1bcs.to_params(SolverMode::Bcs, seed),
                k1: self.l1bcs.k1,
                k2: self.l1bcs.k2,
            },
            Algorithm::L1kbcs => AlgoSpec::Solver {
                params: self.l1kbcs.to_params(SolverMode::Kbcs, seed),
                k1: self.l1kbcs.k1,
                k2: self.l1kbcs.k2,
            },
            Algorithm::L1kcs => AlgoSpec::Solver {
                params: self.l1kcs.to_params(SolverMode::Kcs, seed),
                k1: self.l1kcs.k1,
                k2: self.l1kcs.k2,
            },
        }
    }

    /// The canonical JSON for one algorithm's block.
    pub fn json_for(&self, algo: Algorithm) -> Result<serde_json::Value> {
        let value = match algo {
            Algorithm::Mf => serde_json::to_value(&self.mf),
            Algorithm::L1tv => serde_json::to_value(&self.l1tv),
            Algorithm::L1bcs => serde_json::to_value(&self.l1bcs),
            Algorithm::L1kbcs => serde_json::to_value(&self.l1kbcs),
            Algorithm::L1kcs => serde_json::to_value(&self.l1kcs),
        };
        Ok(value?)
    }

    /// SHA-256 over the canonical JSON of one algorithm's block.
    pub fn digest_for(&self, algo: Algorithm) -> Result<String> {
        let json = serde_json::to_string(&self.json_for(algo)?)?;
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            write!(hex, "{byte:02x}").expect("writing to a string cannot fail");
        }
        Ok(hex)
    }
}

/// Full benchmark description: input cube, corruption grid, algorithm set,
/// parameters, and output layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub cube: CubeSource,
    pub noise_fractions: Vec<f64>,
    pub noise_kind: NoiseKindArg,
    pub algorithms: Vec<String>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Band exported as PNG per cell; `null` disables image output.
    pub png_band: Option<usize>,
    /// Worker threads for the benchmark cells; `null` uses all cores.
    pub workers: Option<usize>,
    pub params: ParamsBlock,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            cube: CubeSource::default(),
            noise_fractions: vec![0.1, 0.3, 0.5],
            noise_kind: NoiseKindArg::RandomValued,
            algorithms: Algorithm::ALL.iter().map(|a| a.label().to_owned()).collect(),
            seeds: vec![1],
            output_dir: PathBuf::from("bench-out"),
            png_band: Some(0),
            workers: None,
            params: ParamsBlock::default(),
        }
    }
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: BenchConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Checks the grid axes and resolves the algorithm labels. Duplicates on
    /// any axis are rejected because each (algorithm, fraction, seed) cell
    /// must produce exactly one record.
    pub fn validate(&self) -> Result<Vec<Algorithm>> {
        if self.noise_fractions.is_empty() {
            bail!("config lists no noise fractions");
        }
        for &f in &self.noise_fractions {
            if !f.is_finite() || !(0.0..=1.0).contains(&f) {
                bail!("noise fraction {f} lies outside [0, 1]");
            }
        }
        if has_duplicate(&self.noise_fractions, |a, b| a == b) {
            bail!("config repeats a noise fraction");
        }
        if self.algorithms.is_empty() {
            bail!("config lists no algorithms");
        }
        let mut algos = Vec::with_capacity(self.algorithms.len());
        for label in &self.algorithms {
            algos.push(Algorithm::from_label(label)?);
        }
        if has_duplicate(&algos, |a, b| a == b) {
            bail!("config repeats an algorithm");
        }
        if self.seeds.is_empty() {
            bail!("config lists no seeds");
        }
        if has_duplicate(&self.seeds, |a, b| a == b) {
            bail!("config repeats a seed");
        }
        Ok(algos)
    }
}

fn has_duplicate<T>(items: &[T], eq: impl Fn(&T, &T) -> bool) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, a)| items[..i].iter().any(|b| eq(a, b)))
}
