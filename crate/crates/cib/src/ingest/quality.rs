//! Confidence masking, gap interpolation, and missingness accounting.

use serde::Serialize;

use super::frame::{BodyPart, Expression, FrameRecord, HeadPose, Keypoint};
use super::IngestError;
use crate::config::Config;

/// Missingness of one channel before and after interpolation.
///
/// "Before" counts frames where the channel was absent or below the
/// confidence floor; "after" counts what interpolation could not bridge.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelQuality {
    pub channel: String,
    pub missing_before: f64,
    pub missing_after: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct QualityReport {
    pub channels: Vec<ChannelQuality>,
    pub interpolated_samples: usize,
}

impl QualityReport {
    pub fn channel(&self, name: &str) -> Option<&ChannelQuality> {
        self.channels.iter().find(|c| c.channel == name)
    }
}

fn observed_indices<F: Fn(&FrameRecord) -> bool>(frames: &[FrameRecord], has: F) -> Vec<usize> {
    frames
        .iter()
        .enumerate()
        .filter_map(|(i, f)| if has(f) { Some(i) } else { None })
        .collect()
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a + (b - a) * w
}

/// Fills interior gaps of at most `gap_max` frames between consecutive
/// observations, calling `fill(frame_index, left_index, right_index, weight)`
/// for each interpolated frame. Returns the number of filled samples.
fn fill_gaps<F: FnMut(usize, usize, usize, f64)>(
    frames: &[FrameRecord],
    observed: &[usize],
    gap_max: usize,
    mut fill: F,
) -> usize {
    let mut filled = 0;
    for pair in observed.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let gap = j - i - 1;
        if gap == 0 || gap > gap_max {
            continue;
        }
        let (ti, tj) = (frames[i].t, frames[j].t);
        for k in i + 1..j {
            let w = if tj > ti {
                (frames[k].t - ti) / (tj - ti)
            } else {
                0.5
            };
            fill(k, i, j, w);
            filled += 1;
        }
    }
    filled
}

/// Applies the quality filter: masks low-confidence samples, interpolates
/// short interior gaps, and reports per-channel missingness.
///
/// Required channels (`head_pose`, `expression`) must end up observed in at
/// least `1 - max_gap_fraction` of frames, otherwise
/// [`IngestError::ExcessiveMissingness`] is returned.
pub fn quality_filter(
    mut frames: Vec<FrameRecord>,
    fps: f64,
    cfg: &Config,
) -> Result<(Vec<FrameRecord>, QualityReport), IngestError> {
    let n = frames.len();
    let mut report = QualityReport::default();
    if n == 0 {
        return Ok((frames, report));
    }
    let gap_max = (fps * cfg.gap_max_s).round() as usize;
    let conf_min = cfg.conf_min;

    // Mask low-confidence samples.
    for f in frames.iter_mut() {
        f.body.retain(|_, kp| kp.confidence() >= conf_min);
        if let Some(face) = &f.face {
            let mean_conf = face.iter().map(Keypoint::confidence).sum::<f64>() / face.len() as f64;
            if mean_conf < conf_min {
                f.face = None;
            }
        }
    }

    let missing_fraction = |count_observed: usize| (n - count_observed) as f64 / n as f64;

    // Body keypoints: one channel per part.
    for part in BodyPart::ALL {
        let observed = observed_indices(&frames, |f| f.body.contains_key(&part));
        let before = missing_fraction(observed.len());
        let mut fills: Vec<(usize, Keypoint)> = Vec::new();
        report.interpolated_samples += fill_gaps(&frames, &observed, gap_max, |k, i, j, w| {
            let a = frames[i].body[&part];
            let b = frames[j].body[&part];
            fills.push((
                k,
                Keypoint(lerp(a.x(), b.x(), w), lerp(a.y(), b.y(), w), conf_min),
            ));
        });
        for (k, kp) in fills {
            frames[k].body.insert(part, kp);
        }
        let after = missing_fraction(observed_indices(&frames, |f| f.body.contains_key(&part)).len());
        report.channels.push(ChannelQuality {
            channel: part.name().to_string(),
            missing_before: before,
            missing_after: after,
        });
    }

    // Face: interpolated landmark-wise between whole observed faces.
    {
        let observed = observed_indices(&frames, |f| f.face.is_some());
        let before = missing_fraction(observed.len());
        let mut fills: Vec<(usize, Vec<Keypoint>)> = Vec::new();
        report.interpolated_samples += fill_gaps(&frames, &observed, gap_max, |k, i, j, w| {
            let a = frames[i].face.as_ref().unwrap();
            let b = frames[j].face.as_ref().unwrap();
            let face: Vec<Keypoint> = a
                .iter()
                .zip(b.iter())
                .map(|(p, q)| Keypoint(lerp(p.x(), q.x(), w), lerp(p.y(), q.y(), w), conf_min))
                .collect();
            fills.push((k, face));
        });
        for (k, face) in fills {
            frames[k].face = Some(face);
        }
        let after = missing_fraction(observed_indices(&frames, |f| f.face.is_some()).len());
        report.channels.push(ChannelQuality {
            channel: "face".to_string(),
            missing_before: before,
            missing_after: after,
        });
    }

    // Head pose.
    {
        let observed = observed_indices(&frames, |f| f.head_pose.is_some());
        let before = missing_fraction(observed.len());
        let mut fills: Vec<(usize, HeadPose)> = Vec::new();
        report.interpolated_samples += fill_gaps(&frames, &observed, gap_max, |k, i, j, w| {
            let a = frames[i].head_pose.unwrap();
            let b = frames[j].head_pose.unwrap();
            fills.push((
                k,
                HeadPose {
                    yaw: lerp(a.yaw, b.yaw, w),
                    pitch: lerp(a.pitch, b.pitch, w),
                    roll: lerp(a.roll, b.roll, w),
                },
            ));
        });
        for (k, hp) in fills {
            frames[k].head_pose = Some(hp);
        }
        let after = missing_fraction(observed_indices(&frames, |f| f.head_pose.is_some()).len());
        report.channels.push(ChannelQuality {
            channel: "head_pose".to_string(),
            missing_before: before,
            missing_after: after,
        });
    }

    // Expression: convex combination keeps each entry in [0,1] and the sum at 1.
    {
        let observed = observed_indices(&frames, |f| f.expression.is_some());
        let before = missing_fraction(observed.len());
        let mut fills: Vec<(usize, Expression)> = Vec::new();
        report.interpolated_samples += fill_gaps(&frames, &observed, gap_max, |k, i, j, w| {
            let a = frames[i].expression.unwrap().as_array();
            let b = frames[j].expression.unwrap().as_array();
            let mut p = [0.0; 7];
            for c in 0..7 {
                p[c] = lerp(a[c], b[c], w);
            }
            fills.push((k, Expression::from_array(p)));
        });
        for (k, e) in fills {
            frames[k].expression = Some(e);
        }
        let after = missing_fraction(observed_indices(&frames, |f| f.expression.is_some()).len());
        report.channels.push(ChannelQuality {
            channel: "expression".to_string(),
            missing_before: before,
            missing_after: after,
        });
    }

    for required in ["head_pose", "expression"] {
        let q = report.channel(required).unwrap();
        if q.missing_after > cfg.max_gap_fraction {
            return Err(IngestError::ExcessiveMissingness {
                channel: required.to_string(),
                fraction: q.missing_after,
                max: cfg.max_gap_fraction,
            });
        }
    }

    Ok((frames, report))
}
