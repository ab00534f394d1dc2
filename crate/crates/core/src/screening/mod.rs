//! Outlier screening and raster-side match-up extraction.

mod scene;
mod temporal;

use serde::Serialize;
use thiserror::Error;

use crate::spectra::{MatchupTable, ParameterId};

pub use scene::{extract_point, is_water, mndwi, Extraction, Rejection, SceneError, SceneGrid};
pub use temporal::{temporal_match, MatchOutcome};

/// Default fence multiplier.
pub const TUKEY_K: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScreenError {
    #[error("Tukey fences need at least 4 values, got {0}")]
    TooFewValues(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("fence multiplier must be non-negative, got {0}")]
    BadMultiplier(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FenceResult {
    pub kept: Vec<usize>,
    pub rejected: Vec<usize>,
    pub q1: f64,
    pub q3: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    pub k: f64,
}

/// Quantile of sorted data by linear interpolation between closest ranks
/// (position `(n - 1) * p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Flags values outside `[Q1 - k*IQR, Q3 + k*IQR]`. Fences are inclusive.
pub fn tukey_fences(values: &[f64], k: f64) -> Result<FenceResult, ScreenError> {
    if values.len() < 4 {
        return Err(ScreenError::TooFewValues(values.len()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(ScreenError::NonFinite(i));
    }
    if k.is_nan() || k < 0.0 {
        return Err(ScreenError::BadMultiplier(k));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let (lower_fence, upper_fence) = if k.is_infinite() {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let iqr = q3 - q1;
        (q1 - k * iqr, q3 + k * iqr)
    };
    let (kept, rejected) =
        (0..values.len()).partition(|&i| (lower_fence..=upper_fence).contains(&values[i]));
    Ok(FenceResult { kept, rejected, q1, q3, lower_fence, upper_fence, k })
}

/// Result of screening one target parameter over a table.
#[derive(Debug, Clone)]
pub struct ScreenOutcome {
    pub parameter: ParameterId,
    /// Records with the target present and inside the fences.
    pub kept: MatchupTable,
    pub fences: FenceResult,
    /// Records dropped because the target was absent.
    pub missing_target: usize,
}

/// Applies Tukey's fences to one target variable. Records lacking the
/// target are dropped; fences are computed from the remaining values.
pub fn screen_target(
    table: &MatchupTable,
    parameter: ParameterId,
    k: f64,
) -> Result<ScreenOutcome, ScreenError> {
    let present = table.filtered(|r| r.target(parameter).is_some());
    let missing_target = table.len() - present.len();
    let values: Vec<f64> = present.records().iter().filter_map(|r| r.target(parameter)).collect();
    let fences = tukey_fences(&values, k)?;
    let mut idx = 0;
    let kept = present.filtered(|_| {
        let keep = fences.kept.binary_search(&idx).is_ok();
        idx += 1;
        keep
    });
    Ok(ScreenOutcome { parameter, kept, fences, missing_target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_outlier_rejected() {
        let r = tukey_fences(&[1.0, 2.0, 3.0, 4.0, 100.0], 1.5).unwrap();
        assert_eq!(r.rejected, vec![4]);
        assert_eq!((r.q1, r.q3), (2.0, 4.0));
        assert_eq!((r.lower_fence, r.upper_fence), (-1.0, 7.0));
    }

    #[test]
    fn constant_values_all_kept() {
        for k in [0.0, 1.5, 3.0] {
            let r = tukey_fences(&[5.0; 5], k).unwrap();
            assert!(r.rejected.is_empty());
            assert_eq!(r.kept.len(), 5);
        }
    }

    #[test]
    fn monotone_run_all_kept() {
        let v: Vec<f64> = (1..=8).map(f64::from).collect();
        let r = tukey_fences(&v, 1.5).unwrap();
        assert!(r.rejected.is_empty());
        assert_eq!((r.q1, r.q3), (2.75, 6.25));
        assert_eq!((r.lower_fence, r.upper_fence), (-2.5, 11.5));
    }

    #[test]
    fn errors() {
        assert_eq!(tukey_fences(&[1.0, 2.0, 3.0], 1.5), Err(ScreenError::TooFewValues(3)));
        assert_eq!(
            tukey_fences(&[1.0, f64::NAN, 3.0, 4.0], 1.5),
            Err(ScreenError::NonFinite(1))
        );
        assert!(matches!(tukey_fences(&[1.0; 4], -1.0), Err(ScreenError::BadMultiplier(_))));
    }

    #[test]
    fn infinite_k_keeps_everything() {
        let r = tukey_fences(&[1.0, 1.0, 1.0, 1.0, 1e300], f64::INFINITY).unwrap();
        assert!(r.rejected.is_empty());
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut v in prop::collection::vec(-100.0f64..100.0, 4..40), seed in any::<u64>()) {
            let kept = |v: &[f64]| {
                let r = tukey_fences(v, 1.5).unwrap();
                let mut k: Vec<f64> = r.kept.iter().map(|&i| v[i]).collect();
                k.sort_by(f64::total_cmp);
                k
            };
            let before = kept(&v);
            use rand::{seq::SliceRandom, SeedableRng};
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(before, kept(&v));
        }

        #[test]
        fn zero_k_keeps_interquartile(v in prop::collection::vec(-100.0f64..100.0, 4..40)) {
            let r = tukey_fences(&v, 0.0).unwrap();
            for (i, x) in v.iter().enumerate() {
                let inside = *x >= r.q1 && *x <= r.q3;
                prop_assert_eq!(inside, r.kept.contains(&i));
            }
            prop_assert_eq!(r.kept.len() + r.rejected.len(), v.len());
        }
    }
}
