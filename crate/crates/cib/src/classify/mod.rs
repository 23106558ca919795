//! Group classification from per-clip scores: dataset assembly at the
//! participant level, two classifier families, rebalancing, and
//! leakage-guarded cross-validation.

pub mod cv;
pub mod forest;
pub mod logistic;
pub mod metrics;
pub mod resample;

pub use cv::{cross_validate, stratified_folds, CvReport, CvSettings, ModelKind, OofScore};
pub use forest::{mtry, train_forest, ForestConfig, ForestModel, Tree};
pub use logistic::{penalized_grad, penalized_nll, train_logistic, LogisticModel};
pub use metrics::{
    auc_mann_whitney, auc_trapezoid, confusion_at, evaluate, f1_score, roc_points, Confusion,
    Metrics,
};
pub use resample::{rebalance, Resample};

use crate::codes::{ClipScores, CODE_NAMES, COMPOSITE_NAMES};
use crate::ingest::{Chapter, Group};
use std::collections::BTreeMap;

/// Errors from dataset assembly, training, or evaluation.
#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("bad input: {0}")]
    BadInput(String),

    #[error("need both classes present, found only one")]
    OneClassOnly,

    #[error("optimizer did not converge after {iters} iterations (gradient norm {grad_norm:.3e})")]
    NonConvergence { iters: usize, grad_norm: f64 },

    #[error("need at least 2 participants per class, got {pos} positive and {neg} negative")]
    TooFewPerClass { pos: usize, neg: usize },

    #[error("participant {participant} appears with conflicting group labels")]
    InconsistentGroup { participant: String },

    #[error("no participant had complete scores for both chapters")]
    EmptyDataset,
}

/// One participant-level feature row.
#[derive(Debug, Clone)]
pub struct DatasetRow {
    pub participant_id: String,
    /// True for the clinical group.
    pub label: bool,
    pub features: Vec<f64>,
}

/// The assembled classification dataset: one row per participant with
/// complete scores in both chapters.
#[derive(Debug, Clone)]
pub struct StudyDataset {
    /// Feature names as "{chapter}:{code}", chapters in fixed order.
    pub feature_names: Vec<String>,
    pub rows: Vec<DatasetRow>,
    /// Participants left out, with the reason.
    pub excluded: Vec<(String, String)>,
    /// Whether features are scale scores rather than raw fractions.
    pub used_scores: bool,
}

impl StudyDataset {
    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.features.clone()).collect()
    }

    pub fn n_pos(&self) -> usize {
        self.rows.iter().filter(|r| r.label).count()
    }

    pub fn n_neg(&self) -> usize {
        self.rows.len() - self.n_pos()
    }
}

/// The feature names used by [`build_dataset`], in order: for each
/// chapter, the seven codes then the four composites. Composites carry a
/// "composite_" prefix because three of them share their code's name.
pub fn dataset_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(22);
    for chapter in [Chapter::Depression, Chapter::Mania] {
        for code in CODE_NAMES {
            names.push(format!("{chapter}:{code}"));
        }
        for comp in COMPOSITE_NAMES {
            names.push(format!("{chapter}:composite_{comp}"));
        }
    }
    names
}

struct ParticipantClips<'a> {
    group: Group,
    depression: Option<&'a ClipScores>,
    mania: Option<&'a ClipScores>,
}

fn clip_features(clip: &ClipScores, use_scores: bool) -> Result<Vec<f64>, String> {
    let (codes, comps) = if use_scores {
        (
            clip.scored.scores.code_scores(),
            clip.scored.scores.composites(),
        )
    } else {
        (
            clip.scored.rates.code_fractions(),
            clip.scored.rates.composite_fractions(),
        )
    };
    let mut out = Vec::with_capacity(11);
    for (name, value) in CODE_NAMES.iter().zip(codes) {
        match value {
            Some(v) => out.push(v),
            None => return Err(format!("missing {name} in {} chapter", clip.chapter)),
        }
    }
    for (name, value) in COMPOSITE_NAMES.iter().zip(comps) {
        match value {
            Some(v) => out.push(v),
            None => {
                return Err(format!(
                    "missing composite_{name} in {} chapter",
                    clip.chapter
                ))
            }
        }
    }
    Ok(out)
}

/// Assemble the participant-level dataset from per-clip scores.
///
/// Each row concatenates the eleven per-chapter values for the depression
/// chapter then the mania chapter. Participants lacking either chapter or
/// any individual value are excluded (listed with reasons); a participant
/// whose two clips disagree on group membership is an error.
pub fn build_dataset(
    clips: &[ClipScores],
    use_scores: bool,
) -> Result<StudyDataset, ClassifyError> {
    let mut by_participant: BTreeMap<&str, ParticipantClips> = BTreeMap::new();
    for clip in clips {
        let entry = by_participant
            .entry(clip.participant_id.as_str())
            .or_insert(ParticipantClips {
                group: clip.group,
                depression: None,
                mania: None,
            });
        if entry.group != clip.group {
            return Err(ClassifyError::InconsistentGroup {
                participant: clip.participant_id.clone(),
            });
        }
        let slot = match clip.chapter {
            Chapter::Depression => &mut entry.depression,
            Chapter::Mania => &mut entry.mania,
        };
        if slot.is_some() {
            return Err(ClassifyError::BadInput(format!(
                "participant {} has duplicate {} clips",
                clip.participant_id, clip.chapter
            )));
        }
        *slot = Some(clip);
    }

    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (id, entry) in &by_participant {
        let (dep, mania) = match (entry.depression, entry.mania) {
            (Some(d), Some(m)) => (d, m),
            (None, _) => {
                excluded.push((id.to_string(), "missing depression chapter".to_string()));
                continue;
            }
            (_, None) => {
                excluded.push((id.to_string(), "missing mania chapter".to_string()));
                continue;
            }
        };
        let mut features = Vec::with_capacity(22);
        let mut reason = None;
        for clip in [dep, mania] {
            match clip_features(clip, use_scores) {
                Ok(vals) => features.extend(vals),
                Err(why) => {
                    reason = Some(why);
                    break;
                }
            }
        }
        if let Some(why) = reason {
            excluded.push((id.to_string(), why));
            continue;
        }
        rows.push(DatasetRow {
            participant_id: id.to_string(),
            label: entry.group == Group::Ocd,
            features,
        });
    }
    if rows.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    Ok(StudyDataset {
        feature_names: dataset_feature_names(),
        rows,
        excluded,
        used_scores: use_scores,
    })
}
