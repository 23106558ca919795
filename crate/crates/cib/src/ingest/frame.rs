//! Frame records and the line-delimited stream format.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Named body keypoints tracked per frame.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum BodyPart {
    Nose,
    Neck,
    ShoulderL,
    ShoulderR,
    ElbowL,
    ElbowR,
    WristL,
    WristR,
    HipL,
    HipR,
}

impl BodyPart {
    pub const ALL: [BodyPart; 10] = [
        BodyPart::Nose,
        BodyPart::Neck,
        BodyPart::ShoulderL,
        BodyPart::ShoulderR,
        BodyPart::ElbowL,
        BodyPart::ElbowR,
        BodyPart::WristL,
        BodyPart::WristR,
        BodyPart::HipL,
        BodyPart::HipR,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BodyPart::Nose => "nose",
            BodyPart::Neck => "neck",
            BodyPart::ShoulderL => "shoulder_l",
            BodyPart::ShoulderR => "shoulder_r",
            BodyPart::ElbowL => "elbow_l",
            BodyPart::ElbowR => "elbow_r",
            BodyPart::WristL => "wrist_l",
            BodyPart::WristR => "wrist_r",
            BodyPart::HipL => "hip_l",
            BodyPart::HipR => "hip_r",
        }
    }
}

/// One observed 2-D point: x, y in pixels plus detector confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint(pub f64, pub f64, pub f64);

impl Keypoint {
    pub fn x(&self) -> f64 {
        self.0
    }
    pub fn y(&self) -> f64 {
        self.1
    }
    pub fn confidence(&self) -> f64 {
        self.2
    }
    pub fn distance(&self, other: &Keypoint) -> f64 {
        ((self.0 - other.0).powi(2) + (self.1 - other.1).powi(2)).sqrt()
    }
}

/// Head orientation in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadPose {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

/// Expression class order used everywhere ties must break deterministically.
pub const EXPRESSION_CLASSES: [&str; 7] = [
    "anger",
    "disgust",
    "fear",
    "happiness",
    "sadness",
    "surprise",
    "neutral",
];

pub const ANGER: usize = 0;
pub const DISGUST: usize = 1;
pub const FEAR: usize = 2;
pub const HAPPINESS: usize = 3;
pub const SADNESS: usize = 4;
pub const SURPRISE: usize = 5;
pub const NEUTRAL: usize = 6;

/// Probability distribution over the seven expression classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expression {
    pub anger: f64,
    pub disgust: f64,
    pub fear: f64,
    pub happiness: f64,
    pub sadness: f64,
    pub surprise: f64,
    pub neutral: f64,
}

impl Expression {
    /// Probabilities in the fixed class order.
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.anger,
            self.disgust,
            self.fear,
            self.happiness,
            self.sadness,
            self.surprise,
            self.neutral,
        ]
    }

    pub fn from_array(p: [f64; 7]) -> Expression {
        Expression {
            anger: p[0],
            disgust: p[1],
            fear: p[2],
            happiness: p[3],
            sadness: p[4],
            surprise: p[5],
            neutral: p[6],
        }
    }

    /// One-hot distribution on a single class index.
    pub fn one_hot(class: usize) -> Expression {
        let mut p = [0.0; 7];
        p[class] = 1.0;
        Expression::from_array(p)
    }

    /// Winning class and probability; ties go to the earlier class in the
    /// fixed order.
    pub fn argmax(&self) -> (usize, f64) {
        let p = self.as_array();
        let mut best = 0;
        for (i, v) in p.iter().enumerate().skip(1) {
            if *v > p[best] {
                best = i;
            }
        }
        (best, p[best])
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

/// One timestamped observation from the upstream feature extractors.
///
/// Channels may be absent (occlusion, tracker dropout): missing body
/// keypoints are simply omitted from the map, and `face`, `head_pose`, and
/// `expression` are optional wholesale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    /// Seconds from clip start.
    pub t: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub body: BTreeMap<BodyPart, Keypoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face: Option<Vec<Keypoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_pose: Option<HeadPose>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<Expression>,
}

impl FrameRecord {
    /// Schema validation beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), String> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(format!("t must be a non-negative number, got {}", self.t));
        }
        for (part, kp) in &self.body {
            if !kp.x().is_finite() || !kp.y().is_finite() {
                return Err(format!("{} has non-finite coordinates", part.name()));
            }
            if !(0.0..=1.0).contains(&kp.confidence()) {
                return Err(format!(
                    "{} confidence {} outside [0,1]",
                    part.name(),
                    kp.confidence()
                ));
            }
        }
        if let Some(face) = &self.face {
            if face.len() != 68 {
                return Err(format!("face has {} landmarks, expected 68", face.len()));
            }
            for (i, kp) in face.iter().enumerate() {
                if !kp.x().is_finite() || !kp.y().is_finite() {
                    return Err(format!("face landmark {i} has non-finite coordinates"));
                }
                if !(0.0..=1.0).contains(&kp.confidence()) {
                    return Err(format!(
                        "face landmark {i} confidence {} outside [0,1]",
                        kp.confidence()
                    ));
                }
            }
        }
        if let Some(hp) = &self.head_pose {
            for (name, v) in [("yaw", hp.yaw), ("pitch", hp.pitch), ("roll", hp.roll)] {
                if !(-90.0..=90.0).contains(&v) {
                    return Err(format!("head_pose {name} {v} outside [-90,90]"));
                }
            }
        }
        if let Some(expr) = &self.expression {
            for (i, p) in expr.as_array().iter().enumerate() {
                if !(0.0..=1.0).contains(p) {
                    return Err(format!(
                        "expression {} probability {p} outside [0,1]",
                        EXPRESSION_CLASSES[i]
                    ));
                }
            }
            if (expr.sum() - 1.0).abs() > 1e-6 {
                return Err(format!(
                    "expression probabilities sum to {}, expected 1",
                    expr.sum()
                ));
            }
        }
        Ok(())
    }

    /// Serializes the record as one stream line (no trailing newline).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("frame records always serialize")
    }
}

/// Result of parsing one stream file.
#[derive(Debug, Clone, Default)]
pub struct ParsedStream {
    pub frames: Vec<FrameRecord>,
    /// (line number, reason) for lines skipped in lenient mode.
    pub malformed: Vec<(usize, String)>,
}

/// Parses a line-delimited frame stream.
///
/// In strict mode any malformed line aborts with [`IngestError::MalformedFrame`];
/// in lenient mode malformed lines are collected as warnings and skipped.
/// Timestamps must strictly increase in both modes.
pub fn parse_stream(path: &Path, strict: bool) -> Result<ParsedStream, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut out = ParsedStream::default();
    let mut prev_t: Option<f64> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| IngestError::UnreadableFile {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Result<FrameRecord, String> = serde_json::from_str::<FrameRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|rec| rec.validate().map(|_| rec));
        match parsed {
            Ok(rec) => {
                if let Some(prev) = prev_t {
                    if rec.t <= prev {
                        return Err(IngestError::NonMonotonicTime {
                            line: line_no,
                            t: rec.t,
                            prev,
                        });
                    }
                }
                prev_t = Some(rec.t);
                out.frames.push(rec);
            }
            Err(reason) => {
                if strict {
                    return Err(IngestError::MalformedFrame {
                        line: line_no,
                        reason,
                    });
                }
                out.malformed.push((line_no, reason));
            }
        }
    }
    Ok(out)
}
