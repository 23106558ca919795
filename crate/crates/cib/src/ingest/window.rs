//! Middle-window extraction.

use super::frame::FrameRecord;
use super::IngestError;

/// Tolerance guard for frame-boundary comparisons.
const EPS: f64 = 1e-9;

/// Cuts the centered `duration_s` window out of a clip.
///
/// Clip duration is measured as the timestamp span plus one frame period,
/// so a clip of exactly `fps * duration_s` frames qualifies. The window is
/// half-open `[c - duration/2, c + duration/2)` around the temporal midpoint
/// `c`, clamped to the clip start; returned timestamps are re-based to 0.
///
/// Returns the selected frames plus the window `(start, end)` in original
/// clip time.
pub fn extract_middle_window(
    frames: &[FrameRecord],
    fps: f64,
    duration_s: f64,
) -> Result<(Vec<FrameRecord>, (f64, f64)), IngestError> {
    let frame_period = 1.0 / fps;
    let clip_duration = match (frames.first(), frames.last()) {
        (Some(first), Some(last)) => last.t - first.t + frame_period,
        _ => 0.0,
    };
    if clip_duration < duration_s - 0.5 * frame_period {
        return Err(IngestError::ClipTooShort {
            actual_s: clip_duration,
            required_s: duration_s,
        });
    }
    let t0 = frames[0].t;
    let center = t0 + clip_duration / 2.0;
    let start = t0.max(center - duration_s / 2.0);
    let end = start + duration_s;

    let selected: Vec<FrameRecord> = frames
        .iter()
        .filter(|f| f.t >= start - EPS && f.t < end - EPS)
        .map(|f| {
            let mut out = f.clone();
            out.t = (f.t - start).max(0.0);
            out
        })
        .collect();
    Ok((selected, (start, end)))
}
