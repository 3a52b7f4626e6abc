//! Grayscale PNG export of single cube bands.

use std::path::Path;

use anyhow::{Context, Result};
use hsdenoise_core::{atomic_write, HyperCube};
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};

/// Encodes band `band` of `cube` as an 8-bit grayscale PNG. Samples are
/// clamped into [0, 1] and rounded onto 0..=255.
pub fn band_png_bytes(cube: &HyperCube, band: usize) -> Result<Vec<u8>> {
    let img = cube.band(band)?;
    let (rows, cols) = img.dim();
    let mut raster = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            raster.push((img[[r, c]].clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    let mut bytes = Vec::new();
    PngEncoder::new(&mut bytes)
        .write_image(&raster, cols as u32, rows as u32, ExtendedColorType::L8)
        .context("encoding PNG")?;
    Ok(bytes)
}

/// Renders one band to a PNG file, atomically.
pub fn write_band_png(cube: &HyperCube, band: usize, path: &Path) -> Result<()> {
    let bytes = band_png_bytes(cube, band)?;
    atomic_write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
