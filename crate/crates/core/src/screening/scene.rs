//! Synthetic scene grids and buffered point extraction.
//!
//! File layout (`<scene_date>.sgrid`): one line of compact JSON header
//! terminated by `\n`, then one little-endian `f32` plane per band in header
//! band order, then one byte per cell for the land mask (0 water, 1 land).
//! Planes are row-major; row 0 is the southernmost row and cell `(row, col)`
//! has its centre at `origin + ((col + 0.5) * cell_size, (row + 0.5) * cell_size)`.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::{BandId, Spectrum};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene header: {0}")]
    Header(String),
    #[error("scene body: {0}")]
    Body(String),
    #[error("point ({0}, {1}) lies outside the scene")]
    OutOfBounds(f64, f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    width: usize,
    height: usize,
    cell_size: f64,
    origin: [f64; 2],
    bands: Vec<String>,
    date: NaiveDate,
}

/// Per-band reflectance grids over a local planar frame in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGrid {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub origin: (f64, f64),
    pub date: NaiveDate,
    /// Indexed by `BandId::index()`, each `width * height` long.
    bands: Vec<Vec<f32>>,
    land: Vec<bool>,
}

/// Modified normalized difference water index `(green - swir) / (green + swir)`.
pub fn mndwi(green: f64, swir: f64) -> Option<f64> {
    let den = green + swir;
    (den != 0.0).then(|| (green - swir) / den)
}

/// Water when MNDWI is strictly positive; undefined MNDWI is not water.
pub fn is_water(green: f64, swir: f64) -> bool {
    mndwi(green, swir).is_some_and(|v| v > 0.0)
}

impl SceneGrid {
    /// Builds a scene; `bands` is in [`BandId::ALL`] order.
    pub fn new(
        (width, height): (usize, usize),
        cell_size: f64,
        origin: (f64, f64),
        date: NaiveDate,
        bands: Vec<Vec<f32>>,
        land: Vec<bool>,
    ) -> Result<Self, SceneError> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(SceneError::Header(format!("cell size must be positive, got {cell_size}")));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(SceneError::Header("non-finite origin".into()));
        }
        let cells = width
            .checked_mul(height)
            .ok_or_else(|| SceneError::Header("dimensions overflow".into()))?;
        if bands.len() != BandId::COUNT {
            return Err(SceneError::Body(format!("expected {} bands, got {}", BandId::COUNT, bands.len())));
        }
        if let Some(b) = bands.iter().position(|p| p.len() != cells) {
            return Err(SceneError::Body(format!("band {} has the wrong size", BandId::ALL[b])));
        }
        if land.len() != cells {
            return Err(SceneError::Body("land mask has the wrong size".into()));
        }
        Ok(SceneGrid { width, height, cell_size, origin, date, bands, land })
    }

    /// Every cell set to `spectrum`, no land.
    pub fn uniform(
        (width, height): (usize, usize),
        cell_size: f64,
        date: NaiveDate,
        spectrum: &Spectrum,
    ) -> Self {
        let cells = width * height;
        let bands = BandId::ALL.iter().map(|&b| vec![spectrum.get(b) as f32; cells]).collect();
        SceneGrid::new((width, height), cell_size, (0.0, 0.0), date, bands, vec![false; cells])
            .expect("consistent dimensions")
    }

    pub fn value(&self, band: BandId, row: usize, col: usize) -> f32 {
        self.bands[band.index()][row * self.width + col]
    }

    pub fn set_value(&mut self, band: BandId, row: usize, col: usize, value: f32) {
        self.bands[band.index()][row * self.width + col] = value;
    }

    pub fn is_land(&self, row: usize, col: usize) -> bool {
        self.land[row * self.width + col]
    }

    pub fn set_land(&mut self, row: usize, col: usize, land: bool) {
        self.land[row * self.width + col] = land;
    }

    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.cell_size,
            self.origin.1 + (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        let x_max = self.origin.0 + self.width as f64 * self.cell_size;
        let y_max = self.origin.1 + self.height as f64 * self.cell_size;
        x >= self.origin.0 && x <= x_max && y >= self.origin.1 && y <= y_max
    }

    fn cell_is_water(&self, i: usize) -> bool {
        let green = f64::from(self.bands[BandId::B3.index()][i]);
        let swir = f64::from(self.bands[BandId::B11.index()][i]);
        is_water(green, swir)
    }

    /// Distance from `point` to the nearest land cell centre, if any land exists.
    pub fn nearest_land_distance(&self, (x, y): (f64, f64)) -> Option<f64> {
        let mut best: Option<f64> = None;
        for row in 0..self.height {
            for col in 0..self.width {
                if self.is_land(row, col) {
                    let (cx, cy) = self.cell_center(row, col);
                    let d = (cx - x).hypot(cy - y);
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
            }
        }
        best
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            width: self.width,
            height: self.height,
            cell_size: self.cell_size,
            origin: [self.origin.0, self.origin.1],
            bands: BandId::ALL.iter().map(|b| b.name().to_string()).collect(),
            date: self.date,
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        for plane in &self.bands {
            for v in plane {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend(self.land.iter().map(|&l| u8::from(l)));
        out
    }

    /// Decodes the `.sgrid` byte layout. Never panics on malformed input.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SceneError> {
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| SceneError::Header("missing header terminator".into()))?;
        let header: Header = serde_json::from_slice(&bytes[..newline])
            .map_err(|e| SceneError::Header(e.to_string()))?;
        let body = &bytes[newline + 1..];

        let mut order = Vec::with_capacity(header.bands.len());
        for name in &header.bands {
            let band = BandId::from_name(name)
                .ok_or_else(|| SceneError::Header(format!("unknown band `{name}`")))?;
            if order.contains(&band) {
                return Err(SceneError::Header(format!("duplicate band `{name}`")));
            }
            order.push(band);
        }
        if order.len() != BandId::COUNT {
            return Err(SceneError::Header(format!(
                "expected all {} retained bands, got {}",
                BandId::COUNT,
                order.len()
            )));
        }

        let cells = header
            .width
            .checked_mul(header.height)
            .ok_or_else(|| SceneError::Header("dimensions overflow".into()))?;
        let expected = cells
            .checked_mul(4 * BandId::COUNT + 1)
            .ok_or_else(|| SceneError::Header("dimensions overflow".into()))?;
        if body.len() != expected {
            return Err(SceneError::Body(format!("expected {expected} bytes, found {}", body.len())));
        }

        let mut bands = vec![Vec::new(); BandId::COUNT];
        for (p, band) in order.iter().enumerate() {
            let plane = &body[p * cells * 4..(p + 1) * cells * 4];
            bands[band.index()] = plane
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
        }
        let land = body[BandId::COUNT * cells * 4..]
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(SceneError::Body(format!("land mask byte {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>, _>>()?;

        SceneGrid::new(
            (header.width, header.height),
            header.cell_size,
            (header.origin[0], header.origin[1]),
            header.date,
            bands,
            land,
        )
    }

    pub fn read(path: &Path) -> Result<Self, SceneError> {
        let bytes = std::fs::read(path)
            .map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
        SceneGrid::from_bytes(&bytes)
    }

    /// File name following the `<scene_date>.sgrid` convention.
    pub fn file_name(&self) -> String {
        format!("{}.sgrid", self.date.format("%Y-%m-%d"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    /// Nearest land cell is closer than the minimum distance.
    Adjacency { distance: f64 },
    /// No water cell lies inside the buffer.
    NoWaterPixels,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extraction {
    Spectrum { spectrum: Spectrum, cells: usize },
    Rejected(Rejection),
}

/// Mean reflectance over water cells whose centres lie within
/// `buffer_radius` of `point`, unless land is closer than `min_land_distance`.
pub fn extract_point(
    scene: &SceneGrid,
    point: (f64, f64),
    buffer_radius: f64,
    min_land_distance: f64,
) -> Result<Extraction, SceneError> {
    if !scene.contains(point) {
        return Err(SceneError::OutOfBounds(point.0, point.1));
    }
    if let Some(distance) = scene.nearest_land_distance(point) {
        if distance < min_land_distance {
            return Ok(Extraction::Rejected(Rejection::Adjacency { distance }));
        }
    }

    let mut sums = [0.0f64; BandId::COUNT];
    let mut cells = 0usize;
    for row in 0..scene.height {
        for col in 0..scene.width {
            let (cx, cy) = scene.cell_center(row, col);
            if (cx - point.0).hypot(cy - point.1) > buffer_radius {
                continue;
            }
            let i = row * scene.width + col;
            let pixel: Vec<f64> = scene.bands.iter().map(|p| f64::from(p[i])).collect();
            if pixel.iter().any(|v| !v.is_finite()) || !scene.cell_is_water(i) {
                continue;
            }
            for (s, v) in sums.iter_mut().zip(&pixel) {
                *s += v;
            }
            cells += 1;
        }
    }
    if cells == 0 {
        return Ok(Extraction::Rejected(Rejection::NoWaterPixels));
    }
    let mean = sums.map(|s| s / cells as f64);
    let spectrum = Spectrum::new(mean).expect("finite mean");
    Ok(Extraction::Spectrum { spectrum, cells })
}
