use chrono::NaiveDate;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MatchOutcome {
    /// `(sample index, scene index)` pairs, in sample order.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched: Vec<usize>,
}

/// Pairs each sample with the nearest scene no more than one day away.
///
/// Equidistant scenes resolve to the earlier date; each sample is matched at most once.
pub fn temporal_match(samples: &[NaiveDate], scenes: &[NaiveDate]) -> MatchOutcome {
    let mut out = MatchOutcome::default();
    for (s, sample) in samples.iter().enumerate() {
        let best = scenes
            .iter()
            .enumerate()
            .map(|(i, scene)| ((*scene - *sample).num_days().abs(), *scene, i))
            .filter(|(gap, ..)| *gap <= 1)
            .min();
        match best {
            Some((_, _, scene)) => out.pairs.push((s, scene)),
            None => out.unmatched.push(s),
        }
    }
    if !out.unmatched.is_empty() {
        log::info!("{} sample(s) without a scene within one day", out.unmatched.len());
    }
    out
}
