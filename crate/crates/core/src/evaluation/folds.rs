use std::ops::Range;

use serde::Serialize;

use super::EvalError;

/// Expanding-window splits over a chronologically ordered index range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub n: usize,
    pub folds: Vec<Fold>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

/// Splits `0..n` into `folds + 1` contiguous chunks; fold `j` tests on chunk
/// `j + 1` and trains on everything before it.
///
/// Test chunks have size `n / (folds + 1)`; the remainder goes to the first
/// training chunk.
pub fn time_series_folds(n: usize, folds: usize) -> Result<FoldPlan, EvalError> {
    if folds == 0 {
        return Err(EvalError::InvalidFolds("fold count must be positive".into()));
    }
    if n < folds + 1 {
        return Err(EvalError::InvalidFolds(format!("{n} samples cannot form {folds} folds")));
    }
    let test_size = n / (folds + 1);
    let first = n - folds * test_size;
    let folds = (0..folds)
        .map(|j| {
            let start = first + j * test_size;
            Fold { train: 0..start, test: start..start + test_size }
        })
        .collect();
    Ok(FoldPlan { n, folds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_into_five() {
        let plan = time_series_folds(12, 5).unwrap();
        assert!(plan.folds.iter().all(|f| f.test.len() == 2));
        assert_eq!(plan.folds[0].train, 0..2);
        assert_eq!(plan.folds[4].test, 10..12);
    }

    #[test]
    fn minimal_case() {
        let plan = time_series_folds(6, 5).unwrap();
        let sizes: Vec<_> = plan.folds.iter().map(|f| (f.train.len(), f.test.len())).collect();
        assert_eq!(sizes, [(1, 1), (2, 1), (3, 1), (4, 1), (5, 1)]);
    }

    #[test]
    fn too_few_samples() {
        assert!(time_series_folds(5, 5).is_err());
        assert!(time_series_folds(10, 0).is_err());
    }

    #[test]
    fn remainder_goes_to_first_train_block() {
        let plan = time_series_folds(13, 5).unwrap();
        assert_eq!(plan.folds[0].train, 0..3);
        assert_eq!(plan.folds[4].test.end, 13);
    }
}
