//! Construction of spatial and spectral dictionaries: seeded random
//! initialization for the learning modes, and fixed orthonormal transforms
//! for the fixed-dictionary mode.
//!
//! [`build`] always returns a synthesis matrix whose columns are atoms:
//! multiplying a coefficient vector by it produces a signal. A dictionary
//! meant to act from the right (rows as atoms, as the spectral factor does)
//! is the transpose of what [`build`] returns; orthonormal kinds make that
//! transpose an exact inverse.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Available dictionary constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictionaryKind {
    /// I.i.d. standard normal entries with every column scaled to unit
    /// l2 norm. The initialization for learned dictionaries.
    RandomGaussian,
    /// Orthonormal 2D Haar synthesis for a square image whose side is a
    /// power of two; `rows == cols == side^2`.
    Haar2d,
    /// Orthonormal DCT-II synthesis matrix; square.
    Dct1d,
    /// Identity matrix; square.
    Identity,
}

/// A dictionary request: kind, output shape and (for the random kind) seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DictionarySpec {
    pub kind: DictionaryKind,
    pub rows: usize,
    pub cols: usize,
    /// Consumed by `RandomGaussian` only.
    pub seed: u64,
}

impl DictionarySpec {
    pub fn random_gaussian(rows: usize, cols: usize, seed: u64) -> Self {
        Self {
            kind: DictionaryKind::RandomGaussian,
            rows,
            cols,
            seed,
        }
    }

    pub fn haar_2d(size: usize) -> Self {
        Self {
            kind: DictionaryKind::Haar2d,
            rows: size,
            cols: size,
            seed: 0,
        }
    }

    pub fn dct_1d(size: usize) -> Self {
        Self {
            kind: DictionaryKind::Dct1d,
            rows: size,
            cols: size,
            seed: 0,
        }
    }

    pub fn identity(size: usize) -> Self {
        Self {
            kind: DictionaryKind::Identity,
            rows: size,
            cols: size,
            seed: 0,
        }
    }
}

/// Builds the requested dictionary. Deterministic per spec (the random kind
/// is a pure function of its seed).
pub fn build(spec: &DictionarySpec) -> Result<Array2<f64>> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::invalid(format!(
            "dictionary dimensions must be positive, got {}x{}",
            spec.rows, spec.cols
        )));
    }
    match spec.kind {
        DictionaryKind::RandomGaussian => Ok(random_gaussian(spec.rows, spec.cols, spec.seed)),
        DictionaryKind::Haar2d => {
            ensure_square("haar_2d", spec)?;
            let side = integer_sqrt(spec.rows).ok_or_else(|| {
                Error::invalid(format!(
                    "haar_2d needs rows == side^2 for an integer side, got {}",
                    spec.rows
                ))
            })?;
            if !side.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "haar_2d needs the image side to be a power of two, got side {side}"
                )));
            }
            let h = haar_matrix(side);
            let ht = h.t().to_owned();
            Ok(kron(&ht, &ht))
        }
        DictionaryKind::Dct1d => {
            ensure_square("dct_1d", spec)?;
            Ok(dct_synthesis(spec.rows))
        }
        DictionaryKind::Identity => {
            ensure_square("identity", spec)?;
            Ok(Array2::eye(spec.rows))
        }
    }
}

fn ensure_square(kind: &str, spec: &DictionarySpec) -> Result<()> {
    if spec.rows != spec.cols {
        return Err(Error::invalid(format!(
            "{kind} dictionary must be square, got {}x{}",
            spec.rows, spec.cols
        )));
    }
    Ok(())
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n).then_some(s)
}

fn random_gaussian(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Array2::zeros((rows, cols));
    for j in 0..cols {
        let mut norm_sq = 0.0;
        for i in 0..rows {
            let v: f64 = StandardNormal.sample(&mut rng);
            m[[i, j]] = v;
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm > 0.0 {
            for i in 0..rows {
                m[[i, j]] /= norm;
            }
        }
    }
    m
}

/// Orthonormal 1D Haar matrix of size n x n (n a power of two) with rows as
/// analysis vectors. Built by the doubling recursion: stack the coarse
/// transform applied to pairwise sums on top of pairwise differences, then
/// normalize every row.
fn haar_matrix(n: usize) -> Array2<f64> {
    debug_assert!(n.is_power_of_two());
    let mut h = Array2::from_elem((1, 1), 1.0);
    let mut size = 1;
    while size < n {
        let mut next = Array2::zeros((2 * size, 2 * size));
        for i in 0..size {
            for j in 0..size {
                let v = h[[i, j]];
                next[[i, 2 * j]] = v;
                next[[i, 2 * j + 1]] = v;
            }
        }
        for i in 0..size {
            next[[size + i, 2 * i]] = 1.0;
            next[[size + i, 2 * i + 1]] = -1.0;
        }
        h = next;
        size *= 2;
    }
    for mut row in h.rows_mut() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        row.mapv_inplace(|v| v / norm);
    }
    h
}

/// Orthonormal DCT-II synthesis matrix: column k holds the k-th cosine atom.
fn dct_synthesis(n: usize) -> Array2<f64> {
    let nf = n as f64;
    Array2::from_shape_fn((n, n), |(t, k)| {
        let alpha = if k == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt()
        };
        alpha * (std::f64::consts::PI * k as f64 * (2.0 * t as f64 + 1.0) / (2.0 * nf)).cos()
    })
}

fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let scale = a[[i, j]];
            if scale == 0.0 {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[[i * br + p, j * bc + q]] = scale * b[[p, q]];
                }
            }
        }
    }
    out
}
