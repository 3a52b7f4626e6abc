//! Binary cube I/O in the HSC1 format.
//!
//! Layout: 8-byte magic `HSCUBE01`, three little-endian u32 fields
//! (rows, cols, bands), then `rows * cols * bands` little-endian f64
//! samples in band major, column major within band order, which is the
//! cube's native buffer order. Writes go through a temporary file in the
//! destination directory followed by a rename, so interrupted runs never
//! leave truncated files behind.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::cube::HyperCube;
use crate::error::{Error, Result};

/// Leading magic bytes of every HSC1 file.
pub const MAGIC: &[u8; 8] = b"HSCUBE01";

const HEADER_LEN: usize = 8 + 3 * 4;

/// Serializes a cube to HSC1 bytes.
pub fn cube_to_bytes(cube: &HyperCube) -> Result<Vec<u8>> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + cube.len() * 8);
    bytes.extend_from_slice(MAGIC);
    for dim in [cube.rows(), cube.cols(), cube.bands()] {
        let v = u32::try_from(dim).map_err(|_| {
            Error::invalid(format!("dimension {dim} does not fit the u32 header field"))
        })?;
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for v in cube.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Ok(bytes)
}

/// Parses HSC1 bytes into a cube, rejecting wrong magic, truncated or
/// oversized payloads, zero dimensions and non-finite samples.
pub fn cube_from_bytes(bytes: &[u8]) -> Result<HyperCube> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "file holds {} bytes, the HSC1 header alone needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?} (not an HSC1 cube?)",
            &bytes[..8],
            MAGIC
        )));
    }
    let mut dims = [0usize; 3];
    for (i, dim) in dims.iter_mut().enumerate() {
        let start = 8 + 4 * i;
        let raw: [u8; 4] = bytes[start..start + 4].try_into().expect("4-byte slice");
        *dim = u32::from_le_bytes(raw) as usize;
    }
    let [rows, cols, bands] = dims;
    if rows == 0 || cols == 0 || bands == 0 {
        return Err(Error::Format(format!(
            "header declares a zero dimension: {rows}x{cols}x{bands}"
        )));
    }
    let samples = (rows as u64)
        .checked_mul(cols as u64)
        .and_then(|v| v.checked_mul(bands as u64))
        .ok_or_else(|| {
            Error::Format(format!("header dimensions {rows}x{cols}x{bands} overflow"))
        })?;
    let expected = samples
        .checked_mul(8)
        .ok_or_else(|| Error::Format("payload size overflows".to_string()))?;
    let actual = (bytes.len() - HEADER_LEN) as u64;
    if actual != expected {
        return Err(Error::Format(format!(
            "payload holds {actual} bytes but the header promises {expected} \
             ({rows}x{cols}x{bands} samples of 8 bytes)"
        )));
    }
    let mut data = Vec::with_capacity(samples as usize);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let raw: [u8; 8] = chunk.try_into().expect("8-byte chunk");
        let v = f64::from_le_bytes(raw);
        if !v.is_finite() {
            return Err(Error::Format(format!(
                "non-finite sample at flat index {i}"
            )));
        }
        data.push(v);
    }
    HyperCube::from_vec(rows, cols, bands, data)
}

/// Writes a cube to an HSC1 file atomically.
pub fn write_cube(path: impl AsRef<Path>, cube: &HyperCube) -> Result<()> {
    let bytes = cube_to_bytes(cube)?;
    atomic_write(path.as_ref(), &bytes)
}

/// Reads a cube from an HSC1 file.
pub fn read_cube(path: impl AsRef<Path>) -> Result<HyperCube> {
    let bytes = fs::read(path.as_ref())?;
    cube_from_bytes(&bytes)
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// plus a rename, so readers never observe a partially written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
