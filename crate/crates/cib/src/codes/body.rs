//! Body-movement energy, activity, posture events, and the anxiety code.

use crate::config::Config;
use crate::ingest::frame::{BodyPart, Keypoint, DISGUST, FEAR};
use crate::ingest::ClipSegment;

use super::CodesError;

const GEOMETRY_EPS: f64 = 1e-6;

/// Per-frame normalized movement energy (torso-lengths per second).
#[derive(Debug, Clone)]
pub struct EnergySeries {
    /// Raw energy: displacement from the previous fully-observed frame.
    pub raw: Vec<Option<f64>>,
    /// Centered moving average of `raw` over the configured horizon.
    pub smoothed: Vec<Option<f64>>,
}

impl EnergySeries {
    /// Fraction of evaluable frames whose smoothed energy satisfies `pred`.
    pub fn fraction<F: Fn(f64) -> bool>(&self, pred: F) -> Option<f64> {
        let mut total = 0usize;
        let mut hits = 0usize;
        for e in self.smoothed.iter().flatten() {
            total += 1;
            if pred(*e) {
                hits += 1;
            }
        }
        if total == 0 {
            None
        } else {
            Some(hits as f64 / total as f64)
        }
    }

    pub fn mean(&self) -> Option<f64> {
        let values: Vec<f64> = self.smoothed.iter().flatten().copied().collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}

const TRACKED: [BodyPart; 4] = [
    BodyPart::WristL,
    BodyPart::WristR,
    BodyPart::Nose,
    BodyPart::Neck, // stands in for torso center, computed below
];

fn midpoint(a: &Keypoint, b: &Keypoint) -> (f64, f64) {
    ((a.x() + b.x()) / 2.0, (a.y() + b.y()) / 2.0)
}

/// Torso geometry of one frame: center point and neck-to-hip length.
fn torso(frame_body: &std::collections::BTreeMap<BodyPart, Keypoint>) -> Option<((f64, f64), f64)> {
    let neck = frame_body.get(&BodyPart::Neck)?;
    let hip_l = frame_body.get(&BodyPart::HipL)?;
    let hip_r = frame_body.get(&BodyPart::HipR)?;
    let hip_mid = midpoint(hip_l, hip_r);
    let length = ((neck.x() - hip_mid.0).powi(2) + (neck.y() - hip_mid.1).powi(2)).sqrt();
    let center = ((neck.x() + hip_mid.0) / 2.0, (neck.y() + hip_mid.1) / 2.0);
    Some((center, length))
}

fn tracked_positions(
    frame_body: &std::collections::BTreeMap<BodyPart, Keypoint>,
) -> Option<[(f64, f64); 4]> {
    let (center, _) = torso(frame_body)?;
    let mut out = [(0.0, 0.0); 4];
    for (slot, part) in TRACKED.iter().enumerate() {
        if *part == BodyPart::Neck {
            out[slot] = center;
        } else {
            let kp = frame_body.get(part)?;
            out[slot] = (kp.x(), kp.y());
        }
    }
    Some(out)
}

/// Computes the movement-energy series for a clip.
///
/// A frame is evaluable when the wrists, nose, neck, and both hips are all
/// observed and a previous such frame exists. Energy is the summed
/// displacement of the wrists, nose, and torso center since that frame,
/// divided by the current torso length and the elapsed time, which makes it
/// invariant to translation and uniform scaling of the keypoints.
pub fn movement_energy(seg: &ClipSegment, cfg: &Config) -> Result<EnergySeries, CodesError> {
    let n = seg.frames.len();
    let mut raw: Vec<Option<f64>> = vec![None; n];
    let mut prev: Option<(f64, [(f64, f64); 4])> = None;
    let mut any_observed = false;

    for (i, f) in seg.frames.iter().enumerate() {
        let Some(positions) = tracked_positions(&f.body) else {
            continue;
        };
        let (_, length) = torso(&f.body).unwrap();
        if length < GEOMETRY_EPS {
            return Err(CodesError::DegenerateGeometry { t: f.t });
        }
        any_observed = true;
        if let Some((pt, ppos)) = prev {
            let dt = f.t - pt;
            if dt > 0.0 {
                let displacement: f64 = positions
                    .iter()
                    .zip(ppos.iter())
                    .map(|(a, b)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                    .sum();
                raw[i] = Some(displacement / length / dt);
            }
        }
        prev = Some((f.t, positions));
    }
    if !any_observed {
        return Err(CodesError::MissingChannel {
            channel: "body".to_string(),
        });
    }

    // Centered moving average over the configured time horizon.
    let w = ((seg.fps * cfg.energy_smooth_s).round() as usize).max(1);
    let half_lo = (w - 1) / 2;
    let half_hi = w / 2;
    let mut smoothed: Vec<Option<f64>> = vec![None; n];
    for i in 0..n {
        if raw[i].is_none() {
            continue;
        }
        let lo = i.saturating_sub(half_lo);
        let hi = (i + half_hi).min(n - 1);
        let window: Vec<f64> = raw[lo..=hi].iter().flatten().copied().collect();
        if !window.is_empty() {
            smoothed[i] = Some(window.iter().sum::<f64>() / window.len() as f64);
        }
    }
    Ok(EnergySeries { raw, smoothed })
}

/// Activity detection results, including the posture sub-signals.
#[derive(Debug, Clone)]
pub struct ActivityResult {
    pub p_activity: f64,
    pub stillness_fraction: f64,
    pub mean_movement_energy: f64,
    pub hand_away_fraction: f64,
    pub hand_to_head_fraction: f64,
    pub arms_crossed_fraction: f64,
}

fn cross_side(axis_from: (f64, f64), axis_to: (f64, f64), p: (f64, f64)) -> f64 {
    let ax = axis_to.0 - axis_from.0;
    let ay = axis_to.1 - axis_from.1;
    ax * (p.1 - axis_from.1) - ay * (p.0 - axis_from.0)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn point(kp: &Keypoint) -> (f64, f64) {
    (kp.x(), kp.y())
}

/// Detects the activity code: high-movement fraction plus posture events.
pub fn detect_activity(seg: &ClipSegment, cfg: &Config) -> Result<ActivityResult, CodesError> {
    let energy = movement_energy(seg, cfg)?;
    let p_activity = energy
        .fraction(|e| e >= cfg.act_thresh)
        .ok_or_else(|| CodesError::MissingChannel {
            channel: "body".to_string(),
        })?;
    let stillness_fraction = energy.fraction(|e| e < cfg.still_thresh).unwrap();
    let mean_movement_energy = energy.mean().unwrap();

    let mut away = (0usize, 0usize);
    let mut to_head = (0usize, 0usize);
    let mut crossed = (0usize, 0usize);
    for f in &seg.frames {
        let b = &f.body;
        let Some((center, length)) = torso(b) else {
            continue;
        };
        if length < GEOMETRY_EPS {
            return Err(CodesError::DegenerateGeometry { t: f.t });
        }
        let wrists = (b.get(&BodyPart::WristL), b.get(&BodyPart::WristR));
        if let (Some(wl), Some(wr)) = wrists {
            away.1 += 1;
            if dist(point(wl), center) > 1.2 * length || dist(point(wr), center) > 1.2 * length {
                away.0 += 1;
            }
            if let Some(nose) = b.get(&BodyPart::Nose) {
                to_head.1 += 1;
                if dist(point(wl), point(nose)) < 0.35 * length
                    || dist(point(wr), point(nose)) < 0.35 * length
                {
                    to_head.0 += 1;
                }
            }
            let shoulders = (b.get(&BodyPart::ShoulderL), b.get(&BodyPart::ShoulderR));
            let elbows = (b.get(&BodyPart::ElbowL), b.get(&BodyPart::ElbowR));
            if let ((Some(sl), Some(sr)), (Some(el), Some(er))) = (shoulders, elbows) {
                crossed.1 += 1;
                let neck = point(&b[&BodyPart::Neck]);
                let hip_mid = midpoint(&b[&BodyPart::HipL], &b[&BodyPart::HipR]);
                let side = |p: (f64, f64)| cross_side(neck, hip_mid, p);
                let wl_crossed = side(point(wl)) * side(point(sl)) < 0.0
                    && dist(point(wl), point(er)) <= 0.4 * length;
                let wr_crossed = side(point(wr)) * side(point(sr)) < 0.0
                    && dist(point(wr), point(el)) <= 0.4 * length;
                if wl_crossed && wr_crossed {
                    crossed.0 += 1;
                }
            }
        }
    }
    let frac = |(hits, total): (usize, usize)| if total == 0 { 0.0 } else { hits as f64 / total as f64 };

    Ok(ActivityResult {
        p_activity,
        stillness_fraction,
        mean_movement_energy,
        hand_away_fraction: frac(away),
        hand_to_head_fraction: frac(to_head),
        arms_crossed_fraction: frac(crossed),
    })
}

/// Detects the anxiety code: weighted fear/disgust expression fraction plus
/// high-movement fraction.
pub fn detect_anxiety(seg: &ClipSegment, cfg: &Config) -> Result<f64, CodesError> {
    let mut observed = 0usize;
    let mut fearful = 0usize;
    for f in &seg.frames {
        if let Some(expr) = &f.expression {
            observed += 1;
            let (class, p) = expr.argmax();
            if (class == FEAR || class == DISGUST) && p >= cfg.tau_expr {
                fearful += 1;
            }
        }
    }
    if observed == 0 {
        return Err(CodesError::MissingChannel {
            channel: "expression".to_string(),
        });
    }
    let fear_fraction = fearful as f64 / observed as f64;

    let energy = movement_energy(seg, cfg)?;
    let high_fraction = energy
        .fraction(|e| e >= cfg.anx_act_thresh)
        .ok_or_else(|| CodesError::MissingChannel {
            channel: "body".to_string(),
        })?;

    Ok((cfg.w_fear * fear_fraction + cfg.w_act * high_fraction).min(1.0))
}
