//! Study-level contrasts over the four composite scores.
//!
//! Two designs cover the group-difference questions: comparing the OCD and
//! no-OCD groups within each interview chapter, and comparing the two
//! chapters within each group via per-participant difference vectors.

use std::collections::BTreeMap;

use crate::codes::ClipScores;
use crate::ingest::{Chapter, Group};

use super::manova::{hotelling_one_sample, manova_two_group};
use super::StatsError;

/// One clip's composite values with the labels the contrasts need.
#[derive(Debug, Clone)]
pub struct CompositeRow {
    pub participant_id: String,
    pub group: Group,
    pub chapter: Chapter,
    pub values: [f64; 4],
}

/// Builds contrast input rows from scored clips.
///
/// With `use_scores` the composite 1-5 scores are used (the primary scale);
/// otherwise the composite fractions. Clips missing any composite are
/// dropped; the second return value lists them.
pub fn composite_rows(
    scores: &[ClipScores],
    use_scores: bool,
) -> (Vec<CompositeRow>, Vec<String>) {
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for clip in scores {
        let values = if use_scores {
            clip.scored.scores.composites()
        } else {
            clip.scored.rates.composite_fractions()
        };
        if values.iter().all(|v| v.is_some()) {
            rows.push(CompositeRow {
                participant_id: clip.participant_id.clone(),
                group: clip.group,
                chapter: clip.chapter,
                values: values.map(|v| v.unwrap()),
            });
        } else {
            dropped.push(clip.clip_id());
        }
    }
    (rows, dropped)
}

/// Which family of contrasts to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContrastDesign {
    /// OCD vs no-OCD on per-clip composites, once per chapter.
    BetweenGroupsWithinChapter,
    /// Depression vs mania chapter within participant, once per group,
    /// testing the mean difference vector against zero.
    BetweenChapters,
}

/// One tested contrast.
#[derive(Debug, Clone)]
pub struct Contrast {
    pub label: String,
    pub design: ContrastDesign,
    pub wilks_lambda: f64,
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
    /// Observations entering each side: group sizes, or (participants, 0)
    /// for the paired design.
    pub n: (usize, usize),
}

/// Runs every contrast of the requested design.
///
/// The between-chapters design pairs each participant's two chapters and
/// reports the one-sample Hotelling test of the mean difference vector; its
/// equivalent Wilks lambda is `(n-1) / (n-1 + T^2)`.
pub fn chapter_contrast(
    rows: &[CompositeRow],
    design: ContrastDesign,
) -> Result<Vec<Contrast>, StatsError> {
    let mut out = Vec::new();
    match design {
        ContrastDesign::BetweenGroupsWithinChapter => {
            for chapter in Chapter::ALL {
                let side = |group: Group| -> Vec<Vec<f64>> {
                    rows.iter()
                        .filter(|r| r.chapter == chapter && r.group == group)
                        .map(|r| r.values.to_vec())
                        .collect()
                };
                let a = side(Group::Ocd);
                let b = side(Group::NoOcd);
                let (n_a, n_b) = (a.len(), b.len());
                let m = manova_two_group(&a, &b)?;
                out.push(Contrast {
                    label: format!("groups_within_{chapter}"),
                    design,
                    wilks_lambda: m.wilks_lambda,
                    f: m.f,
                    df1: m.df1,
                    df2: m.df2,
                    p: m.p_value,
                    n: (n_a, n_b),
                });
            }
        }
        ContrastDesign::BetweenChapters => {
            for group in [Group::Ocd, Group::NoOcd] {
                let mut per_participant: BTreeMap<&str, [Option<[f64; 4]>; 2]> = BTreeMap::new();
                for r in rows.iter().filter(|r| r.group == group) {
                    let slot = per_participant.entry(&r.participant_id).or_default();
                    let idx = usize::from(r.chapter == Chapter::Mania);
                    slot[idx] = Some(r.values);
                }
                let diffs: Vec<Vec<f64>> = per_participant
                    .values()
                    .filter_map(|slot| match (slot[0], slot[1]) {
                        (Some(dep), Some(man)) => {
                            Some((0..4).map(|k| dep[k] - man[k]).collect())
                        }
                        _ => None,
                    })
                    .collect();
                let n = diffs.len();
                let h = hotelling_one_sample(&diffs)?;
                let lambda = (n as f64 - 1.0) / (n as f64 - 1.0 + h.t_squared);
                out.push(Contrast {
                    label: format!("chapters_within_{group}"),
                    design,
                    wilks_lambda: lambda,
                    f: h.f,
                    df1: h.df1,
                    df2: h.df2,
                    p: h.p_value,
                    n: (n, 0),
                });
            }
        }
    }
    Ok(out)
}
