//! File formats.
//!
//! Arrays are stored as raw little-endian `f64`, row-major, at `PATH`, with
//! a JSON sidecar at `PATH.json` holding at least `{"type", "shape"}`.
//! Masks store the real plane followed by the imaginary plane. Sparse
//! matrices are `(i64 row, i64 col, f64 value)` triplets with the same kind
//! of sidecar. Images can also be exported as 8-bit PGM for viewing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::circulant::SpectralMask;
use crate::error::{Error, Result};
use crate::models::GeometrySpec;
use crate::ops::{CsrMatrix, ImageGrid, Sinogram};
use crate::simulate::NoiseSpec;

pub const DTYPE: &str = "float64-le";
pub const MASK_CONVENTION: &str = "unnormalized-forward";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    #[serde(rename = "type")]
    pub kind: String,
    pub shape: Vec<usize>,
    #[serde(default = "default_dtype")]
    pub dtype: String,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

fn default_dtype() -> String {
    DTYPE.into()
}

impl Header {
    pub fn new(kind: &str, shape: Vec<usize>) -> Self {
        Self {
            kind: kind.into(),
            shape,
            dtype: DTYPE.into(),
            extra: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra
            .insert(key.into(), serde_json::to_value(value).expect("metadata serializes"));
        self
    }

    fn field<T: for<'de> Deserialize<'de>>(&self, key: &str, path: &Path) -> Result<Option<T>> {
        self.extra
            .get(key)
            .map(|v| {
                serde_json::from_value(v.clone()).map_err(|e| Error::MalformedHeader {
                    path: path.to_path_buf(),
                    reason: format!("field `{key}`: {e}"),
                })
            })
            .transpose()
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_header(path: &Path, header: &Header) -> Result<()> {
    let text = serde_json::to_string_pretty(header).expect("header serializes");
    write_text(&sidecar_path(path), &text)
}

pub fn read_header(path: &Path) -> Result<Header> {
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedHeader {
        path: side,
        reason: e.to_string(),
    })
}

fn f64_bytes(data: &[f64]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Write `data` and its sidecar.
pub fn write_raw(path: &Path, header: &Header, data: &[f64]) -> Result<()> {
    std::fs::write(path, f64_bytes(data)).map_err(|e| Error::io(path, e))?;
    write_header(path, header)
}

/// Read a raw array whose sidecar has type `kind`; `values_per_cell` is 2
/// for complex payloads.
pub fn read_raw(path: &Path, kind: &str, values_per_cell: usize) -> Result<(Header, Vec<f64>)> {
    let header = read_header(path)?;
    if header.kind != kind {
        return Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            reason: format!("expected type `{kind}`, header says `{}`", header.kind),
        });
    }
    if header.dtype != DTYPE {
        return Err(Error::MalformedHeader {
            path: sidecar_path(path),
            reason: format!("unsupported dtype `{}`", header.dtype),
        });
    }
    let count = header.shape.iter().product::<usize>() * values_per_cell;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = 8 * count as u64;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            reason: format!("payload has {found} bytes, shape {:?} needs {expected}", header.shape),
        });
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, data))
}

fn square_side(header: &Header, path: &Path) -> Result<usize> {
    match header.shape[..] {
        [a, b] if a == b => Ok(a),
        _ => Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            reason: format!("expected a square shape, got {:?}", header.shape),
        }),
    }
}

pub fn write_image(path: &Path, img: &ImageGrid) -> Result<()> {
    write_raw(path, &Header::new("image", vec![img.size(), img.size()]), img.as_slice())
}

pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let (header, data) = read_raw(path, "image", 1)?;
    let n = square_side(&header, path)?;
    ImageGrid::from_vec(n, data)
}

/// A sinogram with the acquisition metadata stored beside it.
#[derive(Clone, Debug, PartialEq)]
pub struct SinogramFile {
    pub sinogram: Sinogram,
    pub geometry: Option<GeometrySpec>,
    pub noise: Option<NoiseSpec>,
}

pub fn write_sinogram(path: &Path, file: &SinogramFile) -> Result<()> {
    let (rows, cols) = file.sinogram.shape();
    let mut header = Header::new("sinogram", vec![rows, cols]);
    if let Some(g) = &file.geometry {
        header = header.with("geometry", g);
    }
    if let Some(n) = &file.noise {
        header = header.with("noise", n);
    }
    write_raw(path, &header, file.sinogram.as_slice())
}

pub fn read_sinogram(path: &Path) -> Result<SinogramFile> {
    let (header, data) = read_raw(path, "sinogram", 1)?;
    let [rows, cols] = header.shape[..] else {
        return Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            reason: format!("sinograms are 2D, got shape {:?}", header.shape),
        });
    };
    Ok(SinogramFile {
        sinogram: Sinogram::from_vec(rows, cols, data)?,
        geometry: header.field("geometry", path)?,
        noise: header.field("noise", path)?,
    })
}

/// Writes real then imaginary planes; `extra` entries join the sidecar.
pub fn write_mask(path: &Path, mask: &SpectralMask, extra: Map<String, Value>) -> Result<()> {
    let n = mask.size();
    let mut data: Vec<f64> = mask.values().iter().map(|c| c.re).collect();
    data.extend(mask.values().iter().map(|c| c.im));
    let mut header = Header::new("mask", vec![n, n])
        .with("N", n)
        .with("convention", MASK_CONVENTION);
    header.extra.extend(extra);
    write_raw(path, &header, &data)
}

pub fn read_mask(path: &Path) -> Result<SpectralMask> {
    let (header, data) = read_raw(path, "mask", 2)?;
    let n = square_side(&header, path)?;
    match header.field::<String>("convention", path)? {
        Some(c) if c == MASK_CONVENTION => {}
        other => {
            return Err(Error::MalformedHeader {
                path: sidecar_path(path),
                reason: format!("mask convention must be `{MASK_CONVENTION}`, found {other:?}"),
            })
        }
    }
    let (re, im) = data.split_at(n * n);
    let values = re
        .iter()
        .zip(im)
        .map(|(&a, &b)| rustfft::num_complex::Complex64::new(a, b))
        .collect();
    SpectralMask::new(n, values)
}

/// Sparse matrix as `(i64, i64, f64)` little-endian triplets.
pub fn write_coo(path: &Path, matrix: &CsrMatrix, extra: Map<String, Value>) -> Result<()> {
    let mut bytes = Vec::with_capacity(24 * matrix.nnz());
    for (r, c, v) in matrix.triplets() {
        bytes.extend((r as i64).to_le_bytes());
        bytes.extend((c as i64).to_le_bytes());
        bytes.extend(v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let mut header = Header::new("coo", vec![matrix.rows(), matrix.cols()])
        .with("nnz", matrix.nnz())
        .with("entry", "i64-le,i64-le,float64-le");
    header.extra.extend(extra);
    write_header(path, &header)
}

pub fn read_coo(path: &Path) -> Result<(Header, CsrMatrix)> {
    let header = read_header(path)?;
    if header.kind != "coo" {
        return Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            reason: format!("expected type `coo`, header says `{}`", header.kind),
        });
    }
    let [rows, cols] = header.shape[..] else {
        return Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            reason: "sparse matrices are 2D".into(),
        });
    };
    let nnz: usize = header.field("nnz", path)?.ok_or_else(|| Error::MalformedHeader {
        path: sidecar_path(path),
        reason: "missing `nnz`".into(),
    })?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = 24 * nnz as u64;
    if (bytes.len() as u64) < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len() as u64,
        });
    }
    if bytes.len() as u64 > expected {
        return Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            reason: format!("payload holds more than {nnz} entries"),
        });
    }
    let mut triplets = Vec::with_capacity(nnz);
    for chunk in bytes.chunks_exact(24) {
        let r = i64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let c = i64::from_le_bytes(chunk[8..16].try_into().unwrap());
        let v = f64::from_le_bytes(chunk[16..24].try_into().unwrap());
        if r < 0 || c < 0 || r as usize >= rows || c as usize >= cols {
            return Err(Error::ShapeMismatch {
                path: path.to_path_buf(),
                reason: format!("entry ({r}, {c}) outside {rows}×{cols}"),
            });
        }
        triplets.push((r as usize, c as usize, v));
    }
    Ok((header, CsrMatrix::from_triplets(rows, cols, &triplets)))
}

/// 8-bit gray levels with min-max windowing; a constant image maps to 128.
pub fn to_gray(img: &ImageGrid) -> Vec<u8> {
    let (lo, hi) = img.min_max();
    let span = hi - lo;
    img.as_slice()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
            } else {
                128
            }
        })
        .collect()
}

/// Binary (P5) PGM.
pub fn write_pgm(path: &Path, img: &ImageGrid) -> Result<()> {
    let n = img.size();
    let mut bytes = format!("P5\n{n} {n}\n255\n").into_bytes();
    bytes.extend(to_gray(img));
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
