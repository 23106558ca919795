//! Frame-stream parsing, study manifests, windowing, and quality filtering.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::Config;

pub mod frame;
pub mod manifest;
pub mod quality;
pub mod window;

pub use frame::{
    parse_stream, BodyPart, Expression, FrameRecord, HeadPose, Keypoint, ParsedStream,
    EXPRESSION_CLASSES,
};
pub use manifest::{Chapter, Group, Manifest, ManifestRow, MANIFEST_HEADER};
pub use quality::{quality_filter, ChannelQuality, QualityReport};
pub use window::extract_middle_window;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: malformed frame: {reason}")]
    MalformedFrame { line: usize, reason: String },
    #[error("line {line}: timestamp {t} does not increase past {prev}")]
    NonMonotonicTime { line: usize, t: f64, prev: f64 },
    #[error("clip lasts {actual_s:.2} s, need at least {required_s:.2} s")]
    ClipTooShort { actual_s: f64, required_s: f64 },
    #[error("channel {channel} missing in {fraction:.3} of frames after interpolation (max {max})")]
    ExcessiveMissingness {
        channel: String,
        fraction: f64,
        max: f64,
    },
    #[error("manifest line {line}: {reason}")]
    BadManifest { line: usize, reason: String },
    #[error("duplicate clip: participant {participant_id}, chapter {chapter}")]
    DuplicateClip {
        participant_id: String,
        chapter: Chapter,
    },
    #[error("participant {participant_id}: stream file {path} does not exist")]
    MissingStream {
        participant_id: String,
        path: String,
    },
}

/// A windowed, quality-filtered clip ready for scoring.
#[derive(Debug, Clone)]
pub struct ClipSegment {
    pub participant_id: String,
    pub chapter: Chapter,
    pub group: Group,
    pub fps: f64,
    pub frames: Vec<FrameRecord>,
    /// Analysis window in original clip time.
    pub window: (f64, f64),
    pub quality: QualityReport,
    pub human_scores_path: Option<PathBuf>,
    pub rater_id: Option<String>,
    /// Warnings from lenient parsing (line number, reason).
    pub parse_warnings: Vec<(usize, String)>,
}

impl ClipSegment {
    pub fn clip_id(&self) -> String {
        format!("{}/{}", self.participant_id, self.chapter)
    }

    /// Clip duration: timestamp span plus one frame period.
    pub fn duration_s(&self) -> f64 {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) => b.t - a.t + 1.0 / self.fps,
            _ => 0.0,
        }
    }
}

/// One clip that failed to load, with the participant it belongs to.
#[derive(Debug)]
pub struct ClipFailure {
    pub participant_id: String,
    pub chapter: Chapter,
    pub error: IngestError,
}

impl std::fmt::Display for ClipFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "participant {} ({}): {}",
            self.participant_id, self.chapter, self.error
        )
    }
}

/// Everything `load_study` produced: the usable clips plus per-clip failures.
#[derive(Debug, Default)]
pub struct StudyLoad {
    pub clips: Vec<ClipSegment>,
    pub failures: Vec<ClipFailure>,
}

impl StudyLoad {
    /// Clip counts per group and chapter, for the load summary.
    pub fn summary(&self) -> BTreeMap<(Group, Chapter), usize> {
        let mut counts = BTreeMap::new();
        for clip in &self.clips {
            *counts.entry((clip.group, clip.chapter)).or_insert(0) += 1;
        }
        counts
    }
}

/// Loads one manifest row end to end: parse, window, filter.
pub fn load_clip(row: &ManifestRow, cfg: &Config) -> Result<ClipSegment, IngestError> {
    let parsed = parse_stream(&row.stream_path, cfg.strict)?;
    let (frames, window) = extract_middle_window(&parsed.frames, row.fps, cfg.window_s)?;
    let (frames, quality) = quality_filter(frames, row.fps, cfg)?;
    Ok(ClipSegment {
        participant_id: row.participant_id.clone(),
        chapter: row.chapter,
        group: row.group,
        fps: row.fps,
        frames,
        window,
        quality,
        human_scores_path: row.human_scores_path.clone(),
        rater_id: row.rater_id.clone(),
        parse_warnings: parsed.malformed,
    })
}

/// Loads a whole study in parallel, one [`ClipSegment`] per manifest row.
///
/// Per-clip errors do not abort the load; they come back as
/// [`ClipFailure`]s annotated with the participant, in manifest order, so
/// the caller can decide whether any failure is fatal.
pub fn load_study(manifest_path: &Path, cfg: &Config) -> Result<StudyLoad, IngestError> {
    let manifest = Manifest::from_path(manifest_path)?;
    let results: Vec<(usize, Result<ClipSegment, IngestError>)> = manifest
        .rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| (i, load_clip(row, cfg)))
        .collect();

    let mut load = StudyLoad::default();
    for (i, result) in results {
        match result {
            Ok(seg) => load.clips.push(seg),
            Err(error) => load.failures.push(ClipFailure {
                participant_id: manifest.rows[i].participant_id.clone(),
                chapter: manifest.rows[i].chapter,
                error,
            }),
        }
    }
    Ok(load)
}
