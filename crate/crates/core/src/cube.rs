//! Datacube representation, matricization, impulse corruption, quality
//! metrics and synthetic ground-truth generation.
//!
//! A [`HyperCube`] stores a rows x cols x bands volume of intensities,
//! normalized to [0, 1] by convention. Storage is band major with column
//! major layout inside each band: band `b` occupies the contiguous slice
//! `[b * rows * cols, (b + 1) * rows * cols)` and pixel (r, c) sits at
//! offset `c * rows + r` inside it. That makes the flat buffer of a cube
//! exactly the column major buffer of its matricized form, so
//! [`matricize`] is a reshape, not a shuffle.

use ndarray::{Array2, ShapeBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// PSNR reported for a zero-MSE comparison, and the ceiling for all PSNR
/// values, so CSV output stays finite.
pub const PSNR_CAP_DB: f64 = 120.0;

/// A rows x cols x bands volume of real intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    rows: usize,
    cols: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HyperCube {
    /// All-zero cube of the given shape.
    pub fn zeros(rows: usize, cols: usize, bands: usize) -> Result<Self> {
        check_dims(rows, cols, bands)?;
        Ok(Self {
            rows,
            cols,
            bands,
            data: vec![0.0; rows * cols * bands],
        })
    }

    /// Builds a cube from a flat buffer in band major, column major within
    /// band order. Rejects a buffer of the wrong length or with non-finite
    /// samples.
    pub fn from_vec(rows: usize, cols: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols, bands)?;
        let expected = rows * cols * bands;
        if data.len() != expected {
            return Err(Error::shape(format!(
                "cube data holds {} samples but {rows}x{cols}x{bands} needs {expected}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "cube data has a non-finite sample at flat index {pos}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            bands,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Pixels per band, `rows * cols`.
    pub fn n_pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// Total sample count, `rows * cols * bands`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat buffer in band major, column major within band order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn flat_index(&self, r: usize, c: usize, b: usize) -> usize {
        debug_assert!(r < self.rows && c < self.cols && b < self.bands);
        (b * self.cols + c) * self.rows + r
    }

    /// Sample at (row, col, band). Panics on out-of-range indices.
    pub fn get(&self, r: usize, c: usize, b: usize) -> f64 {
        self.data[self.flat_index(r, c, b)]
    }

    /// Overwrites the sample at (row, col, band). Panics on out-of-range
    /// indices.
    pub fn set(&mut self, r: usize, c: usize, b: usize, value: f64) {
        let i = self.flat_index(r, c, b);
        self.data[i] = value;
    }

    /// Copies band `b` out as a rows x cols image.
    pub fn band(&self, b: usize) -> Result<Array2<f64>> {
        self.check_band(b)?;
        let np = self.n_pixels();
        let slice = self.data[b * np..(b + 1) * np].to_vec();
        Ok(Array2::from_shape_vec((self.rows, self.cols).f(), slice)
            .expect("band slice length matches rows x cols"))
    }

    /// Replaces band `b` with the given rows x cols image.
    pub fn set_band(&mut self, b: usize, img: &Array2<f64>) -> Result<()> {
        self.check_band(b)?;
        if img.dim() != (self.rows, self.cols) {
            return Err(Error::shape(format!(
                "band image is {}x{} but the cube is {}x{}",
                img.nrows(),
                img.ncols(),
                self.rows,
                self.cols
            )));
        }
        let np = self.n_pixels();
        let base = b * np;
        for c in 0..self.cols {
            for r in 0..self.rows {
                self.data[base + c * self.rows + r] = img[[r, c]];
            }
        }
        Ok(())
    }

    fn check_band(&self, b: usize) -> Result<()> {
        if b >= self.bands {
            return Err(Error::invalid(format!(
                "band {b} out of range, cube has {} bands (valid 0..={})",
                self.bands,
                self.bands - 1
            )));
        }
        Ok(())
    }
}

fn check_dims(rows: usize, cols: usize, bands: usize) -> Result<()> {
    if rows == 0 || cols == 0 || bands == 0 {
        return Err(Error::invalid(format!(
            "cube dimensions must be positive, got {rows}x{cols}x{bands}"
        )));
    }
    Ok(())
}

/// The matricized cube: an n_pixels x n_bands matrix whose column `j` is
/// the column major vectorization of band `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    entries: Array2<f64>,
}

impl BandMatrix {
    /// Wraps an n_pixels x n_bands matrix. Both dimensions must be
    /// positive.
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid(format!(
                "band matrix must be non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    pub fn n_pixels(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_bands(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    /// Copy with every entry clamped into [0, 1], for metric evaluation of
    /// estimates that may overshoot the intensity range.
    pub fn clamped_unit(&self) -> BandMatrix {
        BandMatrix {
            entries: self.entries.mapv(|v| v.clamp(0.0, 1.0)),
        }
    }
}

/// Reshapes a cube into its band matrix. Total on valid cubes.
pub fn matricize(cube: &HyperCube) -> BandMatrix {
    let shape = (cube.n_pixels(), cube.bands()).f();
    let entries = Array2::from_shape_vec(shape, cube.data().to_vec())
        .expect("cube buffer length matches n_pixels x bands");
    BandMatrix { entries }
}

/// Inverse of [`matricize`]: reassembles a cube of the given spatial shape.
/// Fails when `rows * cols` does not match the matrix height.
pub fn dematricize(m: &BandMatrix, rows: usize, cols: usize) -> Result<HyperCube> {
    check_dims(rows, cols, m.n_bands())?;
    if rows * cols != m.n_pixels() {
        return Err(Error::shape(format!(
            "matrix has {} pixel rows but {rows}x{cols} needs {}",
            m.n_pixels(),
            rows * cols
        )));
    }
    let np = m.n_pixels();
    let mut data = Vec::with_capacity(np * m.n_bands());
    for b in 0..m.n_bands() {
        for p in 0..np {
            data.push(m.entries[[p, b]]);
        }
    }
    HyperCube::from_vec(rows, cols, m.n_bands(), data)
}

/// How impulse corruption replaces the entries it hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Replacement drawn uniformly from [0, 1].
    RandomValued,
    /// Replacement is 0 or 1 with equal probability.
    SaltAndPepper,
}

/// Impulse noise description: which fraction of entries to hit, how to
/// replace them, and the seed that makes the corruption reproducible.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    /// Fraction of corrupted entries, in [0, 1].
    pub fraction: f64,
    pub kind: NoiseKind,
    pub seed: u64,
}

/// Corrupts exactly `round(fraction * n_pixels * n_bands)` entries of `x`,
/// sampled without replacement over the whole matrix, and returns the noisy
/// matrix together with a mask marking the corrupted entries.
pub fn corrupt(x: &BandMatrix, spec: &NoiseSpec) -> Result<(BandMatrix, Array2<bool>)> {
    if !spec.fraction.is_finite() || !(0.0..=1.0).contains(&spec.fraction) {
        return Err(Error::invalid(format!(
            "noise fraction must lie in [0, 1], got {}",
            spec.fraction
        )));
    }
    let np = x.n_pixels();
    let total = np * x.n_bands();
    let count = (spec.fraction * total as f64).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noisy = x.entries.clone();
    let mut mask = Array2::from_elem(noisy.dim(), false);
    for flat in rand::seq::index::sample(&mut rng, total, count) {
        let cell = (flat % np, flat / np);
        noisy[cell] = match spec.kind {
            NoiseKind::RandomValued => rng.random::<f64>(),
            NoiseKind::SaltAndPepper => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    0.0
                }
            }
        };
        mask[cell] = true;
    }
    Ok((BandMatrix { entries: noisy }, mask))
}

/// Peak signal-to-noise ratio in dB against a unit dynamic range, capped at
/// [`PSNR_CAP_DB`].
pub fn psnr(reference: &BandMatrix, estimate: &BandMatrix) -> Result<f64> {
    psnr_with_cap(reference, estimate, PSNR_CAP_DB)
}

/// PSNR with an explicit cap: returns `10 * log10(1 / MSE)` clipped to
/// `cap`, and `cap` itself when the MSE is zero.
pub fn psnr_with_cap(reference: &BandMatrix, estimate: &BandMatrix, cap: f64) -> Result<f64> {
    if reference.entries.dim() != estimate.entries.dim() {
        return Err(Error::shape(format!(
            "psnr inputs differ: reference is {}x{}, estimate is {}x{}",
            reference.n_pixels(),
            reference.n_bands(),
            estimate.n_pixels(),
            estimate.n_bands()
        )));
    }
    let n = reference.entries.len() as f64;
    let mut sq = 0.0;
    for (a, b) in reference.entries.iter().zip(estimate.entries.iter()) {
        let d = a - b;
        sq += d * d;
    }
    let mse = sq / n;
    if mse == 0.0 {
        return Ok(cap);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(cap))
}

/// A separable generative model: `spatial * coeffs * spectral` produces a
/// band matrix. Spatial atoms live in the columns of `spatial`, spectral
/// atoms in the rows of `spectral`.
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerModel {
    /// n_pixels x spatial_atoms, unit columns, leading column constant.
    pub spatial: Array2<f64>,
    /// spatial_atoms x spectral_atoms sparse mixing matrix.
    pub coeffs: Array2<f64>,
    /// spectral_atoms x bands, unit rows, leading row constant.
    pub spectral: Array2<f64>,
}

impl KroneckerModel {
    /// The band matrix this model generates.
    pub fn synthesize(&self) -> Array2<f64> {
        self.spatial.dot(&self.coeffs).dot(&self.spectral)
    }
}

/// Generates a synthetic ground-truth cube with an exactly known separable
/// structure.
///
/// Draws a spatial dictionary with unit columns, a spectral dictionary with
/// unit rows, and a coefficient matrix with `round(sparsity * atoms)`
/// nonzeros, then affinely rescales the product into [0, 1] to form the
/// cube. The returned model is the pre-rescale generative triple; because
/// both dictionaries lead with a constant (DC) atom, the rescaled cube is
/// still exactly representable in the same dictionaries (the affine shift
/// folds into the leading coefficient), which is what makes fixed-dictionary
/// self-consistency runs meaningful.
///
/// A coefficient matrix with no nonzeros (or any other constant product)
/// degenerates: the rescale maps the cube to all zeros.
pub fn synth_cube(
    rows: usize,
    cols: usize,
    bands: usize,
    spatial_atoms: usize,
    spectral_atoms: usize,
    sparsity: f64,
    seed: u64,
) -> Result<(HyperCube, KroneckerModel)> {
    check_dims(rows, cols, bands)?;
    let np = rows * cols;
    if spatial_atoms == 0 || spatial_atoms > np {
        return Err(Error::invalid(format!(
            "spatial_atoms must lie in 1..={np}, got {spatial_atoms}"
        )));
    }
    if spectral_atoms == 0 || spectral_atoms > bands {
        return Err(Error::invalid(format!(
            "spectral_atoms must lie in 1..={bands}, got {spectral_atoms}"
        )));
    }
    if !sparsity.is_finite() || sparsity <= 0.0 || sparsity > 1.0 {
        return Err(Error::invalid(format!(
            "sparsity must lie in (0, 1], got {sparsity}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Spatial dictionary: leading DC column, then unit-normalized Gaussian
    // columns.
    let mut spatial = Array2::zeros((np, spatial_atoms));
    let dc = 1.0 / (np as f64).sqrt();
    for r in 0..np {
        spatial[[r, 0]] = dc;
    }
    for j in 1..spatial_atoms {
        let mut norm_sq = 0.0;
        for i in 0..np {
            let v: f64 = StandardNormal.sample(&mut rng);
            spatial[[i, j]] = v;
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm > 0.0 {
            for i in 0..np {
                spatial[[i, j]] /= norm;
            }
        }
    }

    // Spectral dictionary: leading DC row, then unit-normalized Gaussian
    // rows.
    let mut spectral = Array2::zeros((spectral_atoms, bands));
    let dc = 1.0 / (bands as f64).sqrt();
    for c in 0..bands {
        spectral[[0, c]] = dc;
    }
    for i in 1..spectral_atoms {
        let mut norm_sq = 0.0;
        for j in 0..bands {
            let v: f64 = StandardNormal.sample(&mut rng);
            spectral[[i, j]] = v;
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm > 0.0 {
            for j in 0..bands {
                spectral[[i, j]] /= norm;
            }
        }
    }

    // Sparse coefficients: values bounded away from zero so every selected
    // entry genuinely counts as a nonzero.
    let cells = spatial_atoms * spectral_atoms;
    let nnz = (sparsity * cells as f64).round() as usize;
    let mut coeffs = Array2::zeros((spatial_atoms, spectral_atoms));
    for flat in rand::seq::index::sample(&mut rng, cells, nnz) {
        let magnitude = rng.random_range(0.5..1.5);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        coeffs[[flat % spatial_atoms, flat / spatial_atoms]] = sign * magnitude;
    }

    let model = KroneckerModel {
        spatial,
        coeffs,
        spectral,
    };
    let raw = model.synthesize();
    let mn = raw.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let mx = raw.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));

    let mut data = vec![0.0; np * bands];
    if mx > mn {
        // Elementwise (v - mn) / (mx - mn); monotone rounding keeps every
        // quotient inside [0, 1] with the extremes mapped to exactly 0 and 1.
        let span = mx - mn;
        for b in 0..bands {
            for p in 0..np {
                data[b * np + p] = (raw[[p, b]] - mn) / span;
            }
        }
    }
    let cube = HyperCube::from_vec(rows, cols, bands, data)?;
    Ok((cube, model))
}
