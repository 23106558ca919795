//! Head-pose codes: gaze direction and attention (stillness + nodding).

use crate::config::Config;
use crate::ingest::ClipSegment;

use super::body::movement_energy;
use super::CodesError;

/// Gaze detection result.
#[derive(Debug, Clone, Copy)]
pub struct GazeResult {
    pub p_gaze: f64,
    /// True when no per-clip calibration existed and the global reference
    /// angles were used.
    pub ref_defaulted: bool,
}

/// Fraction of observed head-pose frames inside the gaze cone around the
/// clip's reference direction.
pub fn detect_gaze(seg: &ClipSegment, cfg: &Config) -> Result<GazeResult, CodesError> {
    let (reference, ref_defaulted) = cfg.gaze_ref_for(&seg.clip_id());
    let mut observed = 0usize;
    let mut inside = 0usize;
    for f in &seg.frames {
        if let Some(hp) = &f.head_pose {
            observed += 1;
            if (hp.yaw - reference.yaw_deg).abs() <= cfg.gaze_yaw_deg
                && (hp.pitch - reference.pitch_deg).abs() <= cfg.gaze_pitch_deg
            {
                inside += 1;
            }
        }
    }
    if observed == 0 {
        return Err(CodesError::MissingChannel {
            channel: "head_pose".to_string(),
        });
    }
    Ok(GazeResult {
        p_gaze: inside as f64 / observed as f64,
        ref_defaulted,
    })
}

/// Attention detection result with its sub-signals.
#[derive(Debug, Clone, Copy)]
pub struct AttentionResult {
    pub p_attention: f64,
    pub nod_events_per_min: f64,
    pub shake_events_per_min: f64,
    pub stillness_fraction: f64,
}

/// Band-passes an angle series with a centered difference of moving
/// averages: a short window tracking up to `hi_hz` minus a long window
/// passing everything below `lo_hz`.
fn band_pass(series: &[f64], fps: f64, lo_hz: f64, hi_hz: f64) -> Vec<f64> {
    let n = series.len();
    let w_short = ((fps / (2.0 * hi_hz)).round() as usize).max(1);
    let w_long = ((fps / lo_hz).round() as usize).max(w_short + 1);
    let centered_mean = |i: usize, w: usize| -> f64 {
        let half_lo = (w - 1) / 2;
        let half_hi = w / 2;
        let lo = i.saturating_sub(half_lo);
        let hi = (i + half_hi).min(n - 1);
        series[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
    };
    (0..n)
        .map(|i| centered_mean(i, w_short) - centered_mean(i, w_long))
        .collect()
}

/// Counts oscillation events: zero-crossing pairs of the band-passed series
/// where the excursion between crossings reaches `min_amp`.
fn count_events(band: &[f64], min_amp: f64) -> f64 {
    let mut crossings = 0usize;
    let mut peak = 0.0f64;
    let mut prev_sign = 0i8;
    for &v in band {
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            prev_sign
        };
        if prev_sign != 0 && sign != 0 && sign != prev_sign {
            if peak >= min_amp {
                crossings += 1;
            }
            peak = 0.0;
        }
        peak = peak.max(v.abs());
        if sign != 0 {
            prev_sign = sign;
        }
    }
    crossings as f64 / 2.0
}

/// Detects attention: weighted stillness plus capped nod/shake rate.
///
/// Nods are oscillations of pitch, shakes of yaw, both restricted to the
/// configured frequency band and amplitude floor.
pub fn detect_attention(seg: &ClipSegment, cfg: &Config) -> Result<AttentionResult, CodesError> {
    let mut pitch = Vec::new();
    let mut yaw = Vec::new();
    for f in &seg.frames {
        if let Some(hp) = &f.head_pose {
            pitch.push(hp.pitch);
            yaw.push(hp.yaw);
        }
    }
    if pitch.is_empty() {
        return Err(CodesError::MissingChannel {
            channel: "head_pose".to_string(),
        });
    }
    let duration_min = seg.duration_s() / 60.0;
    if duration_min <= 0.0 {
        return Err(CodesError::MissingChannel {
            channel: "head_pose".to_string(),
        });
    }

    let nod_pairs = count_events(
        &band_pass(&pitch, seg.fps, cfg.nod_lo_hz, cfg.nod_hi_hz),
        cfg.nod_min_amp_deg,
    );
    let shake_pairs = count_events(
        &band_pass(&yaw, seg.fps, cfg.nod_lo_hz, cfg.nod_hi_hz),
        cfg.nod_min_amp_deg,
    );
    let nod_events_per_min = nod_pairs / duration_min;
    let shake_events_per_min = shake_pairs / duration_min;

    let stillness_fraction = movement_energy(seg, cfg)?
        .fraction(|e| e < cfg.still_thresh)
        .ok_or_else(|| CodesError::MissingChannel {
            channel: "body".to_string(),
        })?;

    let nod_term =
        ((nod_events_per_min + shake_events_per_min) / cfg.nod_cap_per_min).min(1.0);
    let p_attention = (cfg.w_still * stillness_fraction + cfg.w_nod * nod_term).min(1.0);
    Ok(AttentionResult {
        p_attention,
        nod_events_per_min,
        shake_events_per_min,
        stillness_fraction,
    })
}
