//! Removal of sparse impulse noise from hyperspectral datacubes by blind
//! compressed sensing: the cube is matricized into a pixels-by-bands matrix,
//! modeled as `D1 C D2` with a spatial dictionary `D1`, sparse coefficients
//! `C` and a spectral dictionary `D2`, and all three blocks are recovered
//! jointly from the corrupted observation by a split alternating scheme
//! that is robust to impulses through l1 data fidelity.
//!
//! The crate provides the datacube container and its binary file format,
//! synthetic cube generation and impulse corruption, the solver in its
//! three modes (learn both dictionaries, learn the spatial one only, keep
//! both fixed), and the median filter and l1-TV baselines used for
//! comparison.
//!
//! ```
//! use hsdenoise_core::{
//!     corrupt, denoise, matricize, psnr, synth_cube, KbcsParams, NoiseKind, NoiseSpec,
//! };
//!
//! let (cube, _model) = synth_cube(4, 4, 3, 6, 2, 0.3, 7)?;
//! let clean = matricize(&cube);
//! let spec = NoiseSpec { fraction: 0.2, kind: NoiseKind::RandomValued, seed: 1 };
//! let (noisy, _mask) = corrupt(&clean, &spec)?;
//! let params = KbcsParams { max_iter: 3, ..KbcsParams::default() };
//! let result = denoise(&noisy, &params, 8, 3)?;
//! assert!(psnr(&clean, &result.estimate)?.is_finite());
//! # Ok::<(), hsdenoise_core::Error>(())
//! ```

pub mod baselines;
pub mod cube;
pub mod dictionaries;
pub mod error;
pub mod io;
pub mod linops;
pub mod solver;

pub use baselines::{
    l1tv_denoise, l1tv_denoise_band, l1tv_denoise_band_traced, l1tv_denoise_traced,
    l1tv_objective, median_filter, median_filter_band, tv_value, TvParams, TvVariant,
};
pub use cube::{
    corrupt, dematricize, matricize, psnr, psnr_with_cap, synth_cube, BandMatrix, HyperCube,
    KroneckerModel, NoiseKind, NoiseSpec, PSNR_CAP_DB,
};
pub use dictionaries::{build as build_dictionary, DictionaryKind, DictionarySpec};
pub use error::{Error, Result};
pub use io::{atomic_write, cube_from_bytes, cube_to_bytes, read_cube, write_cube};
pub use linops::{
    cg_solve, ridge_shrink, soft_threshold, soft_threshold_scalar, solve_coeffs, solve_left,
    solve_right, BilinearMap, CgOutcome, LsqConfig,
};
pub use solver::{
    denoise, denoise_with_init, init_state, iterate, objective, split_objective, BregmanForm,
    DenoiseResult, KbcsParams, SolverMode, SolverState,
};
