//! Candidate spectral predictors: raw bands, their powers, normalized
//! ratios, three-band ratios and line heights.

mod matrix;
mod parse;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::spectra::{BandId, Spectrum};

pub use matrix::{evaluate_features, EvaluationLog, FeatureMatrix, RowKey};
pub use parse::{parse_feature, parse_feature_list};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("unknown band `{0}`")]
    UnknownBand(String),
    #[error("band `{0}` is excluded from the retained band set")]
    ExcludedBand(String),
    #[error("syntax error at byte {pos} in `{input}`: {message}")]
    Syntax { input: String, pos: usize, message: String },
    #[error("bands {0:?} are not consecutive in retained-band order")]
    NotConsecutive([BandId; 3]),
    #[error("normalized ratio needs two distinct bands, got {0} twice")]
    SameBand(BandId),
    #[error("unsupported exponent {0} (expected 2 or 3)")]
    BadExponent(u32),
    #[error("wavelengths must satisfy l_i < l_j < l_k, got ({0}, {1}, {2})")]
    DegenerateWavelengths(f64, f64, f64),
}

/// A parsed feature descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureExpr {
    Band(BandId),
    Power(BandId, u8),
    NormRatio(BandId, BandId),
    ThreeBand(BandId, BandId, BandId),
    LineHeight(BandId, BandId, BandId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Band,
    Power,
    NormRatio,
    ThreeBand,
    LineHeight,
}

fn check_consecutive(bands: [BandId; 3]) -> Result<(), FeatureError> {
    if bands[0].next() == Some(bands[1]) && bands[1].next() == Some(bands[2]) {
        Ok(())
    } else {
        Err(FeatureError::NotConsecutive(bands))
    }
}

impl FeatureExpr {
    pub fn power(band: BandId, exponent: u32) -> Result<Self, FeatureError> {
        match exponent {
            2 | 3 => Ok(FeatureExpr::Power(band, exponent as u8)),
            e => Err(FeatureError::BadExponent(e)),
        }
    }

    pub fn norm_ratio(i: BandId, j: BandId) -> Result<Self, FeatureError> {
        if i == j {
            return Err(FeatureError::SameBand(i));
        }
        Ok(FeatureExpr::NormRatio(i, j))
    }

    pub fn three_band(i: BandId, j: BandId, k: BandId) -> Result<Self, FeatureError> {
        check_consecutive([i, j, k])?;
        Ok(FeatureExpr::ThreeBand(i, j, k))
    }

    pub fn line_height(i: BandId, j: BandId, k: BandId) -> Result<Self, FeatureError> {
        check_consecutive([i, j, k])?;
        Ok(FeatureExpr::LineHeight(i, j, k))
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureExpr::Band(_) => FeatureKind::Band,
            FeatureExpr::Power(..) => FeatureKind::Power,
            FeatureExpr::NormRatio(..) => FeatureKind::NormRatio,
            FeatureExpr::ThreeBand(..) => FeatureKind::ThreeBand,
            FeatureExpr::LineHeight(..) => FeatureKind::LineHeight,
        }
    }

    /// Canonical textual form; [`parse_feature`] inverts it.
    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Value for one spectrum, or `None` where the formula is undefined
    /// (zero denominator or a non-finite result).
    pub fn evaluate(&self, s: &Spectrum) -> Option<f64> {
        let v = match *self {
            FeatureExpr::Band(b) => s.get(b),
            FeatureExpr::Power(b, e) => s.get(b).powi(i32::from(e)),
            FeatureExpr::NormRatio(i, j) => norm_ratio(s.get(i), s.get(j))?,
            FeatureExpr::ThreeBand(i, j, k) => three_band(s.get(i), s.get(j), s.get(k))?,
            FeatureExpr::LineHeight(i, j, k) => line_height(
                [s.get(i), s.get(j), s.get(k)],
                [i.central_wavelength_nm(), j.central_wavelength_nm(), k.central_wavelength_nm()],
            )
            .ok()?,
        };
        v.is_finite().then_some(v)
    }
}

impl fmt::Display for FeatureExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureExpr::Band(b) => write!(f, "{b}"),
            FeatureExpr::Power(b, e) => write!(f, "({b})^{e}"),
            FeatureExpr::NormRatio(i, j) => write!(f, "NR({i},{j})"),
            FeatureExpr::ThreeBand(i, j, k) => write!(f, "TB({i},{j},{k})"),
            FeatureExpr::LineHeight(i, j, k) => write!(f, "LH({i},{j},{k})"),
        }
    }
}

impl Serialize for FeatureExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_feature(&s).map_err(serde::de::Error::custom)
    }
}

/// Normalized ratio `(r_i - r_j) / (r_i + r_j)`; `None` on a zero denominator.
pub fn norm_ratio(r_i: f64, r_j: f64) -> Option<f64> {
    let den = r_i + r_j;
    (den != 0.0).then(|| (r_i - r_j) / den)
}

/// Three-band ratio `(1/r_i - 1/r_j) * r_k`; `None` when `r_i` or `r_j` is zero.
pub fn three_band(r_i: f64, r_j: f64, r_k: f64) -> Option<f64> {
    if r_i == 0.0 || r_j == 0.0 {
        return None;
    }
    Some((1.0 / r_i - 1.0 / r_j) * r_k)
}

/// Height of `r[1]` above the chord joining `(nm[0], r[0])` and `(nm[2], r[2])`.
pub fn line_height(r: [f64; 3], nm: [f64; 3]) -> Result<f64, FeatureError> {
    if !(nm[0] < nm[1] && nm[1] < nm[2]) {
        return Err(FeatureError::DegenerateWavelengths(nm[0], nm[1], nm[2]));
    }
    Ok(r[1] - r[0] - (r[2] - r[0]) * (nm[1] - nm[0]) / (nm[2] - nm[0]))
}

/// Every consecutive triple in retained-band order.
pub fn consecutive_triples() -> impl Iterator<Item = [BandId; 3]> {
    BandId::ALL.windows(3).map(|w| [w[0], w[1], w[2]])
}

/// The full candidate predictor space in a fixed order: bands, squares,
/// cubes, ordered normalized-ratio pairs, three-band ratios, line heights.
pub fn enumerate_candidates() -> Vec<FeatureExpr> {
    let mut out = Vec::with_capacity(136);
    out.extend(BandId::ALL.map(FeatureExpr::Band));
    out.extend(BandId::ALL.map(|b| FeatureExpr::Power(b, 2)));
    out.extend(BandId::ALL.map(|b| FeatureExpr::Power(b, 3)));
    for i in BandId::ALL {
        for j in BandId::ALL {
            if i != j {
                out.push(FeatureExpr::NormRatio(i, j));
            }
        }
    }
    out.extend(consecutive_triples().map(|[i, j, k]| FeatureExpr::ThreeBand(i, j, k)));
    out.extend(consecutive_triples().map(|[i, j, k]| FeatureExpr::LineHeight(i, j, k)));
    out
}
