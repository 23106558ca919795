//! Facial codes: expression-based affect and mouth-based vocalization.

use crate::config::Config;
use crate::ingest::frame::{Keypoint, ANGER, HAPPINESS, SADNESS};
use crate::ingest::ClipSegment;

use super::CodesError;

/// Expression-derived code fractions.
#[derive(Debug, Clone, Copy)]
pub struct ExpressionResult {
    pub p_positive_affect: f64,
    pub p_negative_emotionality: f64,
    /// Per-class fraction of frames where that class won with probability at
    /// least the expression threshold, in fixed class order.
    pub fractions: [f64; 7],
}

/// Detects positive affect (happiness) and negative emotionality
/// (sadness or anger) from the per-frame expression distributions.
pub fn detect_expression_codes(
    seg: &ClipSegment,
    cfg: &Config,
) -> Result<ExpressionResult, CodesError> {
    let mut observed = 0usize;
    let mut counts = [0usize; 7];
    for f in &seg.frames {
        if let Some(expr) = &f.expression {
            observed += 1;
            let (class, p) = expr.argmax();
            if p >= cfg.tau_expr {
                counts[class] += 1;
            }
        }
    }
    if observed == 0 {
        return Err(CodesError::MissingChannel {
            channel: "expression".to_string(),
        });
    }
    let mut fractions = [0.0; 7];
    for (frac, count) in fractions.iter_mut().zip(counts) {
        *frac = count as f64 / observed as f64;
    }
    Ok(ExpressionResult {
        p_positive_affect: fractions[HAPPINESS],
        p_negative_emotionality: fractions[SADNESS] + fractions[ANGER],
        fractions,
    })
}

/// Mouth landmark indices (0-based) in the 68-point convention:
/// corners 48/54, inner-lip pairs (61,67), (62,66), (63,65).
const MOUTH_CORNER_L: usize = 48;
const MOUTH_CORNER_R: usize = 54;
const INNER_PAIRS: [(usize, usize); 3] = [(61, 67), (62, 66), (63, 65)];

/// Mouth aspect ratio: mean inner-lip gap over mouth width.
pub fn mouth_aspect_ratio(face: &[Keypoint]) -> Option<f64> {
    let width = face[MOUTH_CORNER_L].distance(&face[MOUTH_CORNER_R]);
    if width < 1e-6 {
        return None;
    }
    let gap: f64 = INNER_PAIRS
        .iter()
        .map(|&(a, b)| face[a].distance(&face[b]))
        .sum::<f64>()
        / INNER_PAIRS.len() as f64;
    Some(gap / width)
}

/// Vocalization detection result.
#[derive(Debug, Clone, Copy)]
pub struct VocalizationResult {
    /// Speaking fraction after median smoothing.
    pub p_vocalization: f64,
    /// Raw (unsmoothed) fraction of frames at or above the MAR threshold.
    pub mar_active_fraction: f64,
}

/// Detects vocalization: frames whose mouth aspect ratio reaches the
/// threshold, median-smoothed over the configured window.
///
/// Median smoothing uses a strict majority of the observed frames in each
/// centered window, so exact ties smooth to "not speaking".
pub fn detect_vocalization(
    seg: &ClipSegment,
    cfg: &Config,
) -> Result<VocalizationResult, CodesError> {
    // Per-frame speaking state; None where the face (or mouth) is unusable.
    let speaking: Vec<Option<bool>> = seg
        .frames
        .iter()
        .map(|f| {
            f.face
                .as_ref()
                .and_then(|face| mouth_aspect_ratio(face))
                .map(|mar| mar >= cfg.tau_mar)
        })
        .collect();
    let observed: Vec<usize> = (0..speaking.len())
        .filter(|&i| speaking[i].is_some())
        .collect();
    if observed.is_empty() {
        return Err(CodesError::MissingChannel {
            channel: "face".to_string(),
        });
    }
    let raw_active = observed
        .iter()
        .filter(|&&i| speaking[i] == Some(true))
        .count() as f64
        / observed.len() as f64;

    let w = cfg.smooth_win.max(1);
    let half_lo = (w - 1) / 2;
    let half_hi = w / 2;
    let n = speaking.len();
    let mut smoothed_active = 0usize;
    for &i in &observed {
        let lo = i.saturating_sub(half_lo);
        let hi = (i + half_hi).min(n - 1);
        let mut trues = 0usize;
        let mut total = 0usize;
        for s in speaking[lo..=hi].iter().flatten() {
            total += 1;
            if *s {
                trues += 1;
            }
        }
        if 2 * trues > total {
            smoothed_active += 1;
        }
    }
    Ok(VocalizationResult {
        p_vocalization: smoothed_active as f64 / observed.len() as f64,
        mar_active_fraction: raw_active,
    })
}
