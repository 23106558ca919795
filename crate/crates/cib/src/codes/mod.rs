//! Behavioral code detection: per-clip event rates, 1-5 scores, composites.

use thiserror::Error;

use crate::config::Config;
use crate::ingest::{Chapter, ClipSegment, Group};

pub mod body;
pub mod face;
pub mod head;
pub mod scale;

pub use body::{detect_activity, detect_anxiety, movement_energy, ActivityResult, EnergySeries};
pub use face::{
    detect_expression_codes, detect_vocalization, mouth_aspect_ratio, ExpressionResult,
    VocalizationResult,
};
pub use head::{detect_attention, detect_gaze, AttentionResult, GazeResult};
pub use scale::{on_half_point_lattice, percentage_to_score, try_percentage_to_score};

#[derive(Debug, Error)]
pub enum CodesError {
    #[error("required channel {channel} has no observed frames")]
    MissingChannel { channel: String },
    #[error("degenerate body geometry (zero torso length) at t = {t:.3}")]
    DegenerateGeometry { t: f64 },
    #[error("fraction {value} outside [0,1]")]
    OutOfRange { value: f64 },
}

/// The seven behavioral codes in canonical order.
pub const CODE_NAMES: [&str; 7] = [
    "gaze",
    "attention",
    "positive_affect",
    "negative_emotionality",
    "vocalization",
    "anxiety",
    "activity",
];

/// Composite names in canonical order.
pub const COMPOSITE_NAMES: [&str; 4] = [
    "social_engagement",
    "negative_emotionality",
    "anxiety",
    "activity",
];

/// Per-clip event percentages and raw sub-signals.
///
/// A `None` means the code's channel had no observed frames; the code is
/// reported as absent rather than defaulted.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionRates {
    pub p_gaze: Option<f64>,
    pub p_attention: Option<f64>,
    pub p_positive_affect: Option<f64>,
    pub p_negative_emotionality: Option<f64>,
    pub p_vocalization: Option<f64>,
    pub p_anxiety: Option<f64>,
    pub p_activity: Option<f64>,
    pub nod_events_per_min: Option<f64>,
    pub shake_events_per_min: Option<f64>,
    pub stillness_fraction: Option<f64>,
    pub mean_movement_energy: Option<f64>,
    pub hand_away_fraction: Option<f64>,
    pub hand_to_head_fraction: Option<f64>,
    pub arms_crossed_fraction: Option<f64>,
    pub mar_active_fraction: Option<f64>,
    pub expression_fractions: Option<[f64; 7]>,
    /// True when the gaze reference came from the global default rather than
    /// per-clip calibration.
    pub gaze_ref_defaulted: bool,
}

impl ActionRates {
    /// Code fractions in canonical order.
    pub fn code_fractions(&self) -> [Option<f64>; 7] {
        [
            self.p_gaze,
            self.p_attention,
            self.p_positive_affect,
            self.p_negative_emotionality,
            self.p_vocalization,
            self.p_anxiety,
            self.p_activity,
        ]
    }

    /// Percentage-scale composites: mean engagement fraction plus the three
    /// pass-through fractions, in [`COMPOSITE_NAMES`] order.
    pub fn composite_fractions(&self) -> [Option<f64>; 4] {
        let engagement = match (
            self.p_gaze,
            self.p_attention,
            self.p_positive_affect,
            self.p_vocalization,
        ) {
            (Some(a), Some(b), Some(c), Some(d)) => Some((a + b + c + d) / 4.0),
            _ => None,
        };
        [
            engagement,
            self.p_negative_emotionality,
            self.p_anxiety,
            self.p_activity,
        ]
    }
}

/// The seven code scores plus composites, all on the 1-5 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CibScores {
    pub gaze: Option<f64>,
    pub attention: Option<f64>,
    pub positive_affect: Option<f64>,
    pub negative_emotionality: Option<f64>,
    pub vocalization: Option<f64>,
    pub anxiety: Option<f64>,
    pub activity: Option<f64>,
    /// Mean of the gaze, attention, positive-affect, and vocalization
    /// scores; not re-rounded to the half-point lattice.
    pub social_engagement: Option<f64>,
}

impl CibScores {
    /// Maps each available fraction to its score.
    pub fn from_rates(rates: &ActionRates) -> CibScores {
        let score = |p: Option<f64>| p.map(percentage_to_score);
        let gaze = score(rates.p_gaze);
        let attention = score(rates.p_attention);
        let positive_affect = score(rates.p_positive_affect);
        let vocalization = score(rates.p_vocalization);
        let social_engagement = match (gaze, attention, positive_affect, vocalization) {
            (Some(a), Some(b), Some(c), Some(d)) => Some((a + b + c + d) / 4.0),
            _ => None,
        };
        CibScores {
            gaze,
            attention,
            positive_affect,
            negative_emotionality: score(rates.p_negative_emotionality),
            vocalization,
            anxiety: score(rates.p_anxiety),
            activity: score(rates.p_activity),
            social_engagement,
        }
    }

    /// Code scores in canonical order.
    pub fn code_scores(&self) -> [Option<f64>; 7] {
        [
            self.gaze,
            self.attention,
            self.positive_affect,
            self.negative_emotionality,
            self.vocalization,
            self.anxiety,
            self.activity,
        ]
    }

    /// Score-scale composites in [`COMPOSITE_NAMES`] order.
    pub fn composites(&self) -> [Option<f64>; 4] {
        [
            self.social_engagement,
            self.negative_emotionality,
            self.anxiety,
            self.activity,
        ]
    }
}

/// A code that could not be computed and the channel that was missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingCode {
    pub code: &'static str,
    pub channel: String,
}

/// Full scoring result for one clip.
#[derive(Debug, Clone)]
pub struct ScoredClip {
    pub rates: ActionRates,
    pub scores: CibScores,
    pub missing: Vec<MissingCode>,
}

/// Runs every detector on a clip and derives scores and composites.
///
/// Codes whose input channel has no observed frames come back absent and are
/// listed in `missing`; structural errors (degenerate geometry) abort.
pub fn score_clip(seg: &ClipSegment, cfg: &Config) -> Result<ScoredClip, CodesError> {
    let mut missing = Vec::new();
    // Distinguishes "channel absent" (tolerated) from structural errors.
    fn tolerate<T>(
        result: Result<T, CodesError>,
        code: &'static str,
        missing: &mut Vec<MissingCode>,
    ) -> Result<Option<T>, CodesError> {
        match result {
            Ok(v) => Ok(Some(v)),
            Err(CodesError::MissingChannel { channel }) => {
                missing.push(MissingCode { code, channel });
                Ok(None)
            }
            Err(other) => Err(other),
        }
    }

    let gaze = tolerate(detect_gaze(seg, cfg), "gaze", &mut missing)?;
    let attention = tolerate(detect_attention(seg, cfg), "attention", &mut missing)?;
    let expressions = tolerate(
        detect_expression_codes(seg, cfg),
        "positive_affect",
        &mut missing,
    )?;
    if expressions.is_none() {
        // The same channel feeds both affect codes.
        missing.push(MissingCode {
            code: "negative_emotionality",
            channel: "expression".to_string(),
        });
    }
    let vocalization = tolerate(detect_vocalization(seg, cfg), "vocalization", &mut missing)?;
    let anxiety = tolerate(detect_anxiety(seg, cfg), "anxiety", &mut missing)?;
    let activity = tolerate(detect_activity(seg, cfg), "activity", &mut missing)?;

    let rates = ActionRates {
        p_gaze: gaze.map(|g| g.p_gaze),
        p_attention: attention.map(|a| a.p_attention),
        p_positive_affect: expressions.map(|e| e.p_positive_affect),
        p_negative_emotionality: expressions.map(|e| e.p_negative_emotionality),
        p_vocalization: vocalization.map(|v| v.p_vocalization),
        p_anxiety: anxiety,
        p_activity: activity.as_ref().map(|a| a.p_activity),
        nod_events_per_min: attention.map(|a| a.nod_events_per_min),
        shake_events_per_min: attention.map(|a| a.shake_events_per_min),
        stillness_fraction: attention.map(|a| a.stillness_fraction),
        mean_movement_energy: activity.as_ref().map(|a| a.mean_movement_energy),
        hand_away_fraction: activity.as_ref().map(|a| a.hand_away_fraction),
        hand_to_head_fraction: activity.as_ref().map(|a| a.hand_to_head_fraction),
        arms_crossed_fraction: activity.as_ref().map(|a| a.arms_crossed_fraction),
        mar_active_fraction: vocalization.map(|v| v.mar_active_fraction),
        expression_fractions: expressions.map(|e| e.fractions),
        gaze_ref_defaulted: gaze.map(|g| g.ref_defaulted).unwrap_or(true),
    };
    let scores = CibScores::from_rates(&rates);
    Ok(ScoredClip {
        rates,
        scores,
        missing,
    })
}

/// Scores for one clip together with its study identity.
#[derive(Debug, Clone)]
pub struct ClipScores {
    pub participant_id: String,
    pub chapter: Chapter,
    pub group: Group,
    pub scored: ScoredClip,
}

impl ClipScores {
    /// The clip identifier, "{participant}/{chapter}".
    pub fn clip_id(&self) -> String {
        format!("{}/{}", self.participant_id, self.chapter)
    }
}

/// Score a loaded clip, keeping its study identity attached.
pub fn score_segment(seg: &ClipSegment, cfg: &Config) -> Result<ClipScores, CodesError> {
    Ok(ClipScores {
        participant_id: seg.participant_id.clone(),
        chapter: seg.chapter,
        group: seg.group,
        scored: score_clip(seg, cfg)?,
    })
}
