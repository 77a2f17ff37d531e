//! Radar cubes, 2-D range-azimuth planes and the RADC file format.
//!
//! A cube is a temporal stack of range-azimuth amplitude maps stored
//! row-major as `[frame][row][col]`. The canonical radar geometry is
//! 12 range bins by 91 azimuth bins, with 60-frame samples.
//!
//! RADC layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "RADC"
//! 4       2     version (u16 = 1)
//! 6       2     reserved (u16 = 0)
//! 8       2     rows (u16)
//! 10      2     cols (u16)
//! 12      4     frames (u32)
//! 16      ...   rows*cols*frames f32 values
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Number of range bins in a paper-conformant cube.
pub const RANGE_BINS: usize = 12;
/// Number of azimuth bins in a paper-conformant cube.
pub const AZIMUTH_BINS: usize = 91;
/// Frames per recorded sample.
pub const SAMPLE_FRAMES: usize = 60;

pub const RADC_MAGIC: [u8; 4] = *b"RADC";
pub const RADC_VERSION: u16 = 1;
pub const RADC_HEADER_LEN: usize = 16;

/// 3-D amplitude tensor, row-major `[frame][row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarCube {
    rows: usize,
    cols: usize,
    frames: usize,
    data: Vec<f32>,
}

impl RadarCube {
    /// Builds a cube, checking the payload length and that every value is finite.
    pub fn new(rows: usize, cols: usize, frames: usize, data: Vec<f32>) -> Result<Self> {
        let declared = rows * cols * frames;
        if data.len() != declared {
            return Err(Error::DimensionMismatch {
                declared,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            rows,
            cols,
            frames,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, frames: usize) -> Self {
        Self {
            rows,
            cols,
            frames,
            data: vec![0.0; rows * cols * frames],
        }
    }

    /// Builds a cube from `f(frame, row, col)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        frames: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * frames);
        for t in 0..frames {
            for r in 0..rows {
                for c in 0..cols {
                    data.push(f(t, r, c));
                }
            }
        }
        Self::new(rows, cols, frames, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn plane_len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// True for the 12 x 91 geometry of the recorded dataset.
    pub fn is_conformant(&self) -> bool {
        self.rows == RANGE_BINS && self.cols == AZIMUTH_BINS
    }

    pub fn get(&self, frame: usize, row: usize, col: usize) -> f32 {
        self.data[(frame * self.rows + row) * self.cols + col]
    }

    /// Values of one frame, row-major.
    pub fn frame(&self, frame: usize) -> &[f32] {
        let n = self.plane_len();
        &self.data[frame * n..(frame + 1) * n]
    }

    pub fn frame_map(&self, frame: usize) -> FrameMap {
        FrameMap {
            rows: self.rows,
            cols: self.cols,
            data: self.frame(frame).iter().map(|&v| f64::from(v)).collect(),
        }
    }

    /// Applies `f` to every value. The result must stay finite.
    pub fn map(&self, mut f: impl FnMut(f32) -> f32) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.frames,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Sub-cube of `length` frames starting at `start`.
    pub fn slice_window(&self, start: usize, length: usize) -> Result<Self> {
        let end = start.checked_add(length);
        if length == 0 || end.is_none_or(|e| e > self.frames) {
            return Err(Error::InvalidWindow {
                start,
                length,
                frames: self.frames,
            });
        }
        let n = self.plane_len();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            frames: length,
            data: self.data[start * n..(start + length) * n].to_vec(),
        })
    }

    /// Stacks cubes of equal plane geometry along the frame axis.
    pub fn concat_frames(parts: &[RadarCube]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyCube)?;
        let mut data = Vec::new();
        let mut frames = 0;
        for p in parts {
            if (p.rows, p.cols) != (first.rows, first.cols) {
                return Err(Error::ShapeMismatch {
                    expected: (first.rows, first.cols),
                    got: (p.rows, p.cols),
                });
            }
            data.extend_from_slice(&p.data);
            frames += p.frames;
        }
        Self::new(first.rows, first.cols, frames, data)
    }

    /// Serializes to the RADC byte layout.
    pub fn to_radc_bytes(&self) -> Result<Vec<u8>> {
        let rows = u16::try_from(self.rows).map_err(|_| Error::DimensionOverflow {
            name: "rows",
            value: self.rows,
        })?;
        let cols = u16::try_from(self.cols).map_err(|_| Error::DimensionOverflow {
            name: "cols",
            value: self.cols,
        })?;
        let frames = u32::try_from(self.frames).map_err(|_| Error::DimensionOverflow {
            name: "frames",
            value: self.frames,
        })?;
        if let Some(i) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut out = Vec::with_capacity(RADC_HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&RADC_MAGIC);
        out.extend_from_slice(&RADC_VERSION.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&rows.to_le_bytes());
        out.extend_from_slice(&cols.to_le_bytes());
        out.extend_from_slice(&frames.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    /// Parses the RADC byte layout.
    pub fn from_radc_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < RADC_HEADER_LEN {
            return Err(Error::Truncated(format!(
                "header needs {RADC_HEADER_LEN} bytes, file has {}",
                bytes.len()
            )));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
        if magic != RADC_MAGIC {
            return Err(Error::BadMagic(magic));
        }
        let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
        let version = u16_at(4);
        if version != RADC_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let rows = usize::from(u16_at(8));
        let cols = usize::from(u16_at(10));
        let frames = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
        let payload = &bytes[RADC_HEADER_LEN..];
        if !payload.len().is_multiple_of(4) {
            return Err(Error::Truncated(format!(
                "payload of {} bytes ends mid-value",
                payload.len()
            )));
        }
        let declared = rows * cols * frames;
        let found = payload.len() / 4;
        if found != declared {
            return Err(Error::DimensionMismatch { declared, found });
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Self::new(rows, cols, frames, data)
    }
}

/// Writes `cube` to `path` in RADC format.
pub fn save_cube(cube: &RadarCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = cube.to_radc_bytes()?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// Reads a RADC file.
pub fn load_cube(path: impl AsRef<Path>) -> Result<RadarCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    RadarCube::from_radc_bytes(&bytes)
}

/// A 2-D real-valued plane (range x azimuth), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMap {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FrameMap {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                declared: rows * cols,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
