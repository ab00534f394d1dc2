//! Correlation-ranked feature selection with fold-based choice of subset size.

use rayon::prelude::*;
use serde::Serialize;

use super::{metrics::pearson_r, EvalError, FoldPlan};
use crate::features::FeatureMatrix;

/// |r| at or above this between two columns counts as exact collinearity.
const COLLINEAR: f64 = 1.0 - 1e-12;

/// Scores a candidate column subset across the folds of a plan.
pub trait FoldScorer: Sync {
    /// Mean validation RMSE over every fold of `plan` using matrix `columns`.
    fn mean_fold_rmse(&self, columns: &[usize], plan: &FoldPlan) -> Result<f64, EvalError>;
}

impl<F> FoldScorer for F
where
    F: Fn(&[usize], &FoldPlan) -> Result<f64, EvalError> + Sync,
{
    fn mean_fold_rmse(&self, columns: &[usize], plan: &FoldPlan) -> Result<f64, EvalError> {
        self(columns, plan)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ranking {
    /// `(column, |r|)`, strongest first, after de-duplication.
    pub order: Vec<(usize, f64)>,
    pub constant: Vec<String>,
    /// `(dropped, kept)` name pairs with |r| = 1 between them.
    pub collinear: Vec<(String, String)>,
}

/// Ranks matrix columns by |Pearson r| against `target`, skipping constant
/// columns and any column exactly collinear with a stronger one. Stops once
/// `limit` columns survive. Ties keep candidate order.
pub fn rank_candidates(matrix: &FeatureMatrix, target: &[f64], limit: usize) -> Result<Ranking, EvalError> {
    if target.len() != matrix.n_rows() {
        return Err(EvalError::Selection(format!(
            "target has {} values for {} rows",
            target.len(),
            matrix.n_rows()
        )));
    }
    let mut ranking = Ranking::default();
    let mut scored = Vec::with_capacity(matrix.n_cols());
    let columns: Vec<Vec<f64>> = (0..matrix.n_cols()).map(|c| matrix.column(c)).collect();
    for (c, col) in columns.iter().enumerate() {
        match pearson_r(target, col) {
            Ok(r) => scored.push((c, r.abs())),
            Err(_) => {
                log::info!("skipping constant candidate {}", matrix.names()[c]);
                ranking.constant.push(matrix.names()[c].clone());
            }
        }
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    for (c, score) in scored {
        if ranking.order.len() >= limit {
            break;
        }
        let twin = ranking
            .order
            .iter()
            .find(|(k, _)| pearson_r(&columns[*k], &columns[c]).is_ok_and(|r| r.abs() >= COLLINEAR));
        match twin {
            Some((k, _)) => ranking.collinear.push((matrix.names()[c].clone(), matrix.names()[*k].clone())),
            None => ranking.order.push((c, score)),
        }
    }
    Ok(ranking)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Chosen feature names, strongest correlation first.
    pub names: Vec<String>,
    pub columns: Vec<usize>,
    /// `(k, mean fold RMSE)` for every evaluated subset size.
    pub scores: Vec<(usize, f64)>,
    pub ranking: Ranking,
}

/// Picks the top-`k` ranked features, `k` in `k_min..=k_max`, minimising mean
/// fold RMSE. Ties go to the smaller `k`.
pub fn select_features(
    matrix: &FeatureMatrix,
    target: &[f64],
    (k_min, k_max): (usize, usize),
    plan: &FoldPlan,
    scorer: &dyn FoldScorer,
) -> Result<Selection, EvalError> {
    if k_min == 0 || k_min > k_max {
        return Err(EvalError::Selection(format!("invalid bounds {k_min}..={k_max}")));
    }
    let ranking = rank_candidates(matrix, target, k_max)?;
    let available = ranking.order.len();
    if available < k_min {
        return Err(EvalError::Selection(format!(
            "only {available} usable candidate(s), need at least {k_min}"
        )));
    }
    let k_max = k_max.min(available);
    let ranked: Vec<usize> = ranking.order.iter().map(|(c, _)| *c).collect();

    let scores: Vec<(usize, f64)> = (k_min..=k_max)
        .into_par_iter()
        .map(|k| scorer.mean_fold_rmse(&ranked[..k], plan).map(|s| (k, s)))
        .collect::<Result<_, _>>()?;

    let (best_k, _) = scores
        .iter()
        .map(|&(k, s)| (k, if s.is_finite() { s } else { f64::INFINITY }))
        .fold((k_min, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });

    let columns = ranked[..best_k].to_vec();
    let names = columns.iter().map(|&c| matrix.names()[c].clone()).collect();
    Ok(Selection { names, columns, scores, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::time_series_folds;
    use crate::features::{evaluate_features, parse_feature, FeatureExpr};
    use crate::spectra::{BandId, MatchupRecord, MatchupTable, Spectrum};
    use chrono::NaiveDate;

    fn table(n: usize) -> MatchupTable {
        let records = (0..n)
            .map(|i| {
                let v: [f64; 10] = std::array::from_fn(|b| 0.01 + 0.05 * (((i * 7 + b * 13) % 17) as f64 / 17.0) + 0.001 * b as f64);
                let date = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap() + chrono::Duration::days(i as i64 * 9);
                MatchupRecord::new("S", date, (0.0, 0.0), Spectrum::new(v).unwrap(), [Some(1.0), None, None]).unwrap()
            })
            .collect();
        MatchupTable::from_records(records, String::new())
    }

    #[test]
    fn exact_target_ranked_first() {
        let t = table(30);
        let exprs: Vec<FeatureExpr> = ["B1", "B2", "NR(B2,B3)", "(B4)^2"].iter().map(|n| parse_feature(n).unwrap()).collect();
        let (m, _) = evaluate_features(&t, &exprs).unwrap();
        let target = m.column(2);
        let r = rank_candidates(&m, &target, 10).unwrap();
        assert_eq!(r.order[0].0, 2);
        assert!((r.order[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_pair_deduplicated() {
        let t = table(30);
        let exprs: Vec<FeatureExpr> =
            ["NR(B2,B3)", "NR(B3,B2)", "B5"].iter().map(|n| parse_feature(n).unwrap()).collect();
        let (m, _) = evaluate_features(&t, &exprs).unwrap();
        let target = m.column(0);
        let r = rank_candidates(&m, &target, 10).unwrap();
        let kept: Vec<usize> = r.order.iter().map(|(c, _)| *c).collect();
        assert_eq!(kept, vec![0, 2]);
        assert_eq!(r.collinear, vec![("NR(B3,B2)".to_string(), "NR(B2,B3)".to_string())]);
    }

    #[test]
    fn constant_columns_skipped() {
        let records = (0..10)
            .map(|i| {
                let mut v = [0.02; 10];
                v[0] = 0.01 * (i + 1) as f64;
                let date = NaiveDate::from_ymd_opt(2016, 1, 1 + i as u32).unwrap();
                MatchupRecord::new("S", date, (0.0, 0.0), Spectrum::new(v).unwrap(), [Some(1.0), None, None]).unwrap()
            })
            .collect();
        let t = MatchupTable::from_records(records, String::new());
        let (m, _) = evaluate_features(&t, &[FeatureExpr::Band(BandId::B1), FeatureExpr::Band(BandId::B2)]).unwrap();
        let r = rank_candidates(&m, &m.column(0), 10).unwrap();
        assert_eq!(r.constant, vec!["B2"]);
        assert_eq!(r.order.len(), 1);
    }

    #[test]
    fn chooses_lowest_score_with_small_k_on_ties() {
        let t = table(40);
        let (m, _) = evaluate_features(&t, &crate::features::enumerate_candidates()).unwrap();
        let target = m.column(0);
        let plan = time_series_folds(40, 5).unwrap();
        let flat = |_: &[usize], _: &FoldPlan| Ok(1.0);
        let sel = select_features(&m, &target, (4, 12), &plan, &flat).unwrap();
        assert_eq!(sel.names.len(), 4);
        let dip = |c: &[usize], _: &FoldPlan| Ok(if c.len() == 7 { 0.5 } else { 1.0 });
        let sel = select_features(&m, &target, (4, 12), &plan, &dip).unwrap();
        assert_eq!(sel.columns.len(), 7);
        assert_eq!(sel.scores.len(), 9);
        assert_eq!(sel.names[0], "B1");
    }

    #[test]
    fn bounds_checked() {
        let t = table(10);
        let (m, _) = evaluate_features(&t, &[FeatureExpr::Band(BandId::B1)]).unwrap();
        let plan = time_series_folds(10, 5).unwrap();
        let s = |_: &[usize], _: &FoldPlan| Ok(1.0);
        assert!(select_features(&m, &m.column(0), (4, 12), &plan, &s).is_err());
        assert!(select_features(&m, &m.column(0), (5, 4), &plan, &s).is_err());
    }
}
