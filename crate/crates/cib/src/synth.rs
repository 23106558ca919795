//! Synthetic clip and study generation with counted ground truth.
//!
//! Every behavior is scheduled in contiguous blocks (expression one-hots,
//! in/out-of-cone head yaw, mouth open/closed, wrist movement at fixed
//! speeds, a pitch nod sinusoid), so the generator can count exactly how
//! many frames realize each event. The sidecar records those counted
//! fractions; nothing about the truth is sampled or estimated.
//!
//! Truth fractions for the composite-style codes (attention, anxiety) bake
//! in the default detector weights and thresholds, so generated studies are
//! oracles for the default configuration. Block speeds sit far from the
//! default thresholds (0.3 vs 0.1/0.5, 1.5 vs 1.0), which keeps counting
//! robust to the centered smoothing the detectors apply.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::codes::scale::percentage_to_score;
use crate::codes::CODE_NAMES;
use crate::ingest::frame::{Expression, FrameRecord, HeadPose, Keypoint, FEAR, HAPPINESS, SADNESS};
use crate::ingest::{BodyPart, Chapter, Group, MANIFEST_HEADER};
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid behavior profile: {detail}")]
    BadProfile { detail: String },
    #[error("invalid study spec: {detail}")]
    BadStudySpec { detail: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Default-detector constants the truth computation mirrors.
///
/// These are the `Config` defaults for the attention and anxiety weights and
/// the nod saturation cap. Generated sidecars are exact for a run under the
/// default configuration; a run with altered weights shifts the two blended
/// codes away from the sidecar by exactly the weight difference.
const REF_W_STILL: f64 = 0.5;
const REF_W_NOD: f64 = 0.5;
const REF_W_FEAR: f64 = 0.5;
const REF_W_ACT: f64 = 0.5;
const REF_NOD_CAP_PER_MIN: f64 = 60.0;

/// Block speeds in torso-lengths per second. `LOW` keeps the body moving
/// (not still) without registering as activity; `MED` registers as activity
/// only; `HI` registers as activity and feeds the anxiety code.
const SPEED_HI: f64 = 1.5;
const SPEED_MED: f64 = 0.75;
const SPEED_LOW: f64 = 0.3;

/// Wrist travel bound in pixels. Small enough that none of the posture
/// predicates (hand away, hand to head, arms crossed) ever fire.
const WRIST_TRAVEL_PX: f64 = 40.0;

/// Torso length of the synthetic skeleton in pixels (neck to hip midpoint).
const TORSO_PX: f64 = 160.0;

/// Head yaw (degrees) used for out-of-cone frames; the gaze cone default is
/// a 20-degree half-width around zero.
const YAW_OUT_DEG: f64 = 40.0;

/// Nod sinusoid amplitude in degrees. Large enough to survive the band-pass
/// attenuation and the minimum-amplitude gate, small enough to stay inside
/// the gaze pitch cone.
const NOD_AMP_DEG: f64 = 10.0;

/// Target fractions for the seven codes, in canonical code order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeTargets {
    pub gaze: f64,
    pub attention: f64,
    pub positive_affect: f64,
    pub negative_emotionality: f64,
    pub vocalization: f64,
    pub anxiety: f64,
    pub activity: f64,
}

impl CodeTargets {
    pub fn zero() -> CodeTargets {
        CodeTargets {
            gaze: 0.0,
            attention: 0.0,
            positive_affect: 0.0,
            negative_emotionality: 0.0,
            vocalization: 0.0,
            anxiety: 0.0,
            activity: 0.0,
        }
    }

    /// Fully disengaged but idle-moving child: every detector reads zero.
    pub fn rest() -> CodeTargets {
        CodeTargets::zero()
    }

    /// Maximally engaged child: gaze, attention, positive affect, and
    /// vocalization all saturate; the distress codes read zero.
    pub fn engaged() -> CodeTargets {
        CodeTargets {
            gaze: 1.0,
            attention: 1.0,
            positive_affect: 1.0,
            vocalization: 1.0,
            ..CodeTargets::zero()
        }
    }

    /// Maximally distressed child: negative emotionality and activity
    /// saturate; anxiety realizes at the movement-only ceiling because a
    /// frame showing sadness cannot simultaneously show fear.
    pub fn agitated() -> CodeTargets {
        CodeTargets {
            negative_emotionality: 1.0,
            anxiety: 1.0,
            activity: 1.0,
            ..CodeTargets::zero()
        }
    }

    /// Values in canonical code order (matching [`CODE_NAMES`]).
    pub fn as_array(&self) -> [f64; 7] {
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

    pub fn from_array(a: [f64; 7]) -> CodeTargets {
        CodeTargets {
            gaze: a[0],
            attention: a[1],
            positive_affect: a[2],
            negative_emotionality: a[3],
            vocalization: a[4],
            anxiety: a[5],
            activity: a[6],
        }
    }

    /// Composite fractions in canonical composite order: social engagement
    /// (mean of its four components), then the three pass-throughs.
    pub fn composite_fractions(&self) -> [f64; 4] {
        [
            (self.gaze + self.attention + self.positive_affect + self.vocalization) / 4.0,
            self.negative_emotionality,
            self.anxiety,
            self.activity,
        ]
    }
}

/// One contiguous stretch of wrist movement at a fixed speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovementBurst {
    /// Speed in torso-lengths per second.
    pub speed: f64,
    /// Stretch length in seconds.
    pub duration_s: f64,
}

/// A fully scheduled synthetic clip: target fractions, nod frequency, and
/// the movement burst schedule covering the clip exactly.
#[derive(Debug, Clone)]
pub struct BehaviorProfile {
    pub targets: CodeTargets,
    /// Nod sinusoid frequency in Hz; must sit inside the detector band.
    pub nod_hz: f64,
    /// Scheduled nod cycles (each cycle is one down-up pair).
    pub nod_pairs: u32,
    /// Movement bursts in order; durations sum to `duration_s`.
    pub bursts: Vec<MovementBurst>,
    pub duration_s: f64,
    /// Drives the cosmetic degrees of freedom (initial wrist direction,
    /// out-of-cone yaw sign); the schedule itself is deterministic.
    pub seed: u64,
}

impl BehaviorProfile {
    /// Builds the block schedule realizing `targets` as closely as the
    /// detector couplings allow.
    ///
    /// Couplings honored here:
    /// - anxiety blends the fear/disgust expression fraction with the
    ///   high-movement fraction, and fear frames compete with the happiness
    ///   and sadness blocks for expression frames;
    /// - attention blends stillness with the nod rate, and stillness
    ///   competes with the activity target for movement frames.
    ///
    /// When a target is unreachable (for example anxiety 1.0 together with
    /// negative emotionality 1.0), the schedule realizes the closest
    /// attainable value; the generated sidecar always records what was
    /// actually scheduled, so truth and stream never disagree.
    pub fn from_targets(
        targets: CodeTargets,
        nod_hz: f64,
        duration_s: f64,
        seed: u64,
    ) -> Result<BehaviorProfile, SynthError> {
        for (name, value) in CODE_NAMES.iter().zip(targets.as_array()) {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::BadProfile {
                    detail: format!("target {name} = {value} outside [0,1]"),
                });
            }
        }
        if !(nod_hz > 0.0) {
            return Err(SynthError::BadProfile {
                detail: format!("nod_hz = {nod_hz} must be positive"),
            });
        }
        if !(duration_s > 0.0) {
            return Err(SynthError::BadProfile {
                detail: format!("duration_s = {duration_s} must be positive"),
            });
        }

        // Movement allocation. High-speed frames also count as activity, so
        // the high fraction can never exceed the activity target.
        let act = targets.activity;
        let fear_budget =
            (1.0 - targets.positive_affect - targets.negative_emotionality).max(0.0);
        let fear = (targets.anxiety / REF_W_FEAR).min(1.0).min(fear_budget);
        let anxiety_rem = (targets.anxiety - REF_W_FEAR * fear).max(0.0);
        let hi = (anxiety_rem / REF_W_ACT).min(act);
        let med = act - hi;
        let still = ((targets.attention / REF_W_STILL).min(1.0)).min(1.0 - act);
        let low = (1.0 - act - still).max(0.0);

        let mut bursts = Vec::new();
        for (speed, frac) in [
            (SPEED_HI, hi),
            (SPEED_MED, med),
            (SPEED_LOW, low),
            (0.0, still),
        ] {
            if frac > 0.0 {
                bursts.push(MovementBurst {
                    speed,
                    duration_s: frac * duration_s,
                });
            }
        }
        if bursts.is_empty() {
            bursts.push(MovementBurst {
                speed: 0.0,
                duration_s,
            });
        }

        // Nod allocation against the realized stillness fraction. A nod
        // term that must saturate is scheduled with a 25% rate surplus so
        // boundary effects in event counting cannot pull it below the cap.
        let nod_needed = ((targets.attention - REF_W_STILL * still) / REF_W_NOD).max(0.0);
        let duration_min = duration_s / 60.0;
        let pairs_for = |term: f64| (term * REF_NOD_CAP_PER_MIN * duration_min).round() as u32;
        let nod_pairs = if nod_needed >= 1.0 {
            ((1.25 * REF_NOD_CAP_PER_MIN * duration_min).ceil() as u32)
                .min((nod_hz * duration_s).floor() as u32)
        } else {
            pairs_for(nod_needed).min((nod_hz * duration_s).floor() as u32)
        };

        Ok(BehaviorProfile {
            targets,
            nod_hz,
            nod_pairs,
            bursts,
            duration_s,
            seed,
        })
    }

    /// Checks the profile invariants: fractions in range, positive nod
    /// frequency, schedule covering the clip exactly.
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, value) in CODE_NAMES.iter().zip(self.targets.as_array()) {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::BadProfile {
                    detail: format!("target {name} = {value} outside [0,1]"),
                });
            }
        }
        if !(self.nod_hz > 0.0) {
            return Err(SynthError::BadProfile {
                detail: format!("nod_hz = {} must be positive", self.nod_hz),
            });
        }
        let covered: f64 = self.bursts.iter().map(|b| b.duration_s).sum();
        if (covered - self.duration_s).abs() > 1e-6 {
            return Err(SynthError::BadProfile {
                detail: format!(
                    "bursts cover {covered} s, clip lasts {} s",
                    self.duration_s
                ),
            });
        }
        Ok(())
    }
}

/// Counted per-code truth for one generated clip, in canonical code order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipTruth {
    pub fractions: [f64; 7],
}

impl ClipTruth {
    pub fn fraction(&self, code: &str) -> Option<f64> {
        CODE_NAMES
            .iter()
            .position(|&c| c == code)
            .map(|i| self.fractions[i])
    }
}

/// One generated clip: the frame stream plus its counted truth.
#[derive(Debug, Clone)]
pub struct GeneratedClip {
    pub frames: Vec<FrameRecord>,
    pub truth: ClipTruth,
}

/// Static skeleton matching the detector geometry: torso length 160 px,
/// torso center at (320, 300). Only the right wrist ever moves.
fn skeleton_point(part: BodyPart) -> (f64, f64) {
    match part {
        BodyPart::Nose => (320.0, 180.0),
        BodyPart::Neck => (320.0, 220.0),
        BodyPart::ShoulderL => (260.0, 220.0),
        BodyPart::ShoulderR => (380.0, 220.0),
        BodyPart::ElbowL => (240.0, 280.0),
        BodyPart::ElbowR => (400.0, 280.0),
        BodyPart::WristL => (230.0, 330.0),
        BodyPart::WristR => (410.0, 330.0),
        BodyPart::HipL => (280.0, 380.0),
        BodyPart::HipR => (360.0, 380.0),
    }
}

/// Face with a 30 px wide mouth; `open` controls the inner-lip gap so the
/// mouth aspect ratio is exactly 0.6 (open) or 0.05 (closed) against the
/// default speaking threshold of 0.3.
fn synthetic_face(open: bool) -> Vec<Keypoint> {
    let mut face = vec![Keypoint(320.0, 200.0, 1.0); 68];
    face[48] = Keypoint(305.0, 230.0, 1.0);
    face[54] = Keypoint(335.0, 230.0, 1.0);
    let gap = if open { 18.0 } else { 1.5 };
    for (i, (top, bottom)) in [(61usize, 67usize), (62, 66), (63, 65)].iter().enumerate() {
        let x = 315.0 + 5.0 * i as f64;
        face[*top] = Keypoint(x, 230.0 - gap / 2.0, 1.0);
        face[*bottom] = Keypoint(x, 230.0 + gap / 2.0, 1.0);
    }
    face
}

/// Splits `total` items into leading blocks of the given fractions by
/// cumulative rounding, so block sizes are exact to one item.
fn block_counts(total: usize, fractions: &[f64]) -> Vec<usize> {
    let mut counts = Vec::with_capacity(fractions.len());
    let mut cum = 0.0;
    let mut prev = 0usize;
    for f in fractions {
        cum += f;
        let edge = ((cum * total as f64).round() as usize).min(total);
        counts.push(edge.saturating_sub(prev));
        prev = edge.max(prev);
    }
    counts
}

/// Generates one clip from a profile at the given frame rate.
///
/// The stream is exactly `duration_s` long (frame count = duration x fps),
/// fully observed on every channel at confidence 1.0, and parses strictly.
/// The returned truth holds the counted fraction for each code.
pub fn generate_clip(profile: &BehaviorProfile, fps: f64) -> Result<GeneratedClip, SynthError> {
    profile.validate()?;
    if !(fps > 0.0) {
        return Err(SynthError::BadProfile {
            detail: format!("fps = {fps} must be positive"),
        });
    }
    if profile.nod_hz >= fps / 2.0 {
        return Err(SynthError::BadProfile {
            detail: format!(
                "nod_hz = {} is not resolvable at {fps} fps",
                profile.nod_hz
            ),
        });
    }
    let n = (fps * profile.duration_s).round() as usize;
    if n < 2 {
        return Err(SynthError::BadProfile {
            detail: format!("clip is only {n} frames long"),
        });
    }
    let transitions = n - 1;
    let t = &profile.targets;

    // Expression blocks over frames: fear, happiness, sadness, neutral.
    let fear_budget = (1.0 - t.positive_affect - t.negative_emotionality).max(0.0);
    let fear_frac = (t.anxiety / REF_W_FEAR).min(1.0).min(fear_budget);
    let expr_counts = block_counts(
        n,
        &[fear_frac, t.positive_affect, t.negative_emotionality],
    );
    let (fear_n, pos_n, neg_n) = (expr_counts[0], expr_counts[1], expr_counts[2]);

    // Gaze: trailing in-cone block.
    let in_cone_n = ((t.gaze * n as f64).round() as usize).min(n);

    // Vocalization: trailing open-mouth block.
    let open_n = ((t.vocalization * n as f64).round() as usize).min(n);

    // Movement: per-transition speeds from the burst schedule.
    let burst_fracs: Vec<f64> = profile
        .bursts
        .iter()
        .map(|b| b.duration_s / profile.duration_s)
        .collect();
    let burst_counts = block_counts(transitions, &burst_fracs);
    let mut speeds = Vec::with_capacity(transitions);
    for (burst, count) in profile.bursts.iter().zip(&burst_counts) {
        speeds.extend(std::iter::repeat(burst.speed).take(*count));
    }
    debug_assert_eq!(speeds.len(), transitions);

    let hi_m = speeds.iter().filter(|&&v| v == SPEED_HI).count();
    let act_m = speeds
        .iter()
        .filter(|&&v| v == SPEED_HI || v == SPEED_MED)
        .count();
    let still_m = speeds.iter().filter(|&&v| v == 0.0).count();

    // Nod window: trailing pitch sinusoid completing nod_pairs cycles.
    let window_frames = if profile.nod_pairs > 0 {
        (((profile.nod_pairs as f64 / profile.nod_hz) * fps).round() as usize).min(n)
    } else {
        0
    };
    let nod_start = n - window_frames;

    // Counted truth. Attention and anxiety blend their ingredients with the
    // default detector weights; everything else is a plain frame fraction.
    let duration_min = profile.duration_s / 60.0;
    let nod_rate = profile.nod_pairs as f64 / duration_min;
    let nod_term = (nod_rate / REF_NOD_CAP_PER_MIN).min(1.0);
    let m = transitions as f64;
    let truth = ClipTruth {
        fractions: [
            in_cone_n as f64 / n as f64,
            (REF_W_STILL * still_m as f64 / m + REF_W_NOD * nod_term).min(1.0),
            pos_n as f64 / n as f64,
            neg_n as f64 / n as f64,
            open_n as f64 / n as f64,
            (REF_W_FEAR * fear_n as f64 / n as f64 + REF_W_ACT * hi_m as f64 / m).min(1.0),
            act_m as f64 / m,
        ],
    };

    // Cosmetic degrees of freedom from the profile seed.
    let mut wrist_dir = if profile.seed % 2 == 0 { 1.0 } else { -1.0 };
    let yaw_out = if (profile.seed >> 1) % 2 == 0 {
        YAW_OUT_DEG
    } else {
        -YAW_OUT_DEG
    };

    let faces = [synthetic_face(false), synthetic_face(true)];
    let mut wrist_off = 0.0f64;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            let step = speeds[i - 1] * TORSO_PX / fps;
            if (wrist_off + wrist_dir * step).abs() > WRIST_TRAVEL_PX {
                wrist_dir = -wrist_dir;
            }
            wrist_off += wrist_dir * step;
        }
        let mut body = std::collections::BTreeMap::new();
        for part in BodyPart::ALL {
            let (x, y) = skeleton_point(part);
            let x = if part == BodyPart::WristR {
                x + wrist_off
            } else {
                x
            };
            body.insert(part, Keypoint(x, y, 1.0));
        }

        let expr_class = if i < fear_n {
            FEAR
        } else if i < fear_n + pos_n {
            HAPPINESS
        } else if i < fear_n + pos_n + neg_n {
            SADNESS
        } else {
            crate::ingest::frame::NEUTRAL
        };

        let yaw = if i >= n - in_cone_n { 0.0 } else { yaw_out };
        let pitch = if i >= nod_start {
            NOD_AMP_DEG
                * (2.0 * std::f64::consts::PI * profile.nod_hz * (i - nod_start) as f64 / fps)
                    .sin()
        } else {
            0.0
        };

        frames.push(FrameRecord {
            t: i as f64 / fps,
            body,
            face: Some(faces[usize::from(i >= n - open_n)].clone()),
            head_pose: Some(HeadPose {
                yaw,
                pitch,
                roll: 0.0,
            }),
            expression: Some(Expression::one_hot(expr_class)),
        });
    }

    Ok(GeneratedClip { frames, truth })
}

/// Writes a frame stream as JSON lines.
pub fn write_stream(frames: &[FrameRecord], path: &Path) -> Result<(), SynthError> {
    let mut out = String::new();
    for f in frames {
        let _ = writeln!(out, "{}", f.to_json_line());
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Header of every truth sidecar CSV.
pub const TRUTH_HEADER: &str = "clip_id,code,true_fraction";

/// Serializes truth rows (one per code per clip) as CSV.
pub fn truth_csv(rows: &[(String, ClipTruth)]) -> String {
    let mut out = String::from(TRUTH_HEADER);
    out.push('\n');
    for (clip_id, truth) in rows {
        for (code, frac) in CODE_NAMES.iter().zip(truth.fractions) {
            let _ = writeln!(out, "{clip_id},{code},{frac}");
        }
    }
    out
}

/// Parses a truth sidecar CSV back into per-clip truths, in file order.
pub fn read_truth_csv(path: &Path) -> Result<Vec<(String, ClipTruth)>, SynthError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows: Vec<(String, ClipTruth)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(SynthError::BadStudySpec {
                detail: format!("{}: truth line {} malformed", path.display(), idx + 1),
            });
        }
        let code_idx = CODE_NAMES
            .iter()
            .position(|&c| c == fields[1])
            .ok_or_else(|| SynthError::BadStudySpec {
                detail: format!("{}: unknown code {:?}", path.display(), fields[1]),
            })?;
        let frac: f64 = fields[2].parse().map_err(|_| SynthError::BadStudySpec {
            detail: format!("{}: bad fraction {:?}", path.display(), fields[2]),
        })?;
        if rows.last().map(|(id, _)| id.as_str()) != Some(fields[0]) {
            rows.push((
                fields[0].to_string(),
                ClipTruth {
                    fractions: [f64::NAN; 7],
                },
            ));
        }
        rows.last_mut().unwrap().1.fractions[code_idx] = frac;
    }
    Ok(rows)
}

/// Group-level mean shifts applied to the OCD group, on the fraction scale.
///
/// The social engagement shift applies to each of its four component codes;
/// the other three apply to their code directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupEffects {
    pub social_engagement: f64,
    pub negative_emotionality: f64,
    pub anxiety: f64,
    pub activity: f64,
}

impl GroupEffects {
    pub fn zero() -> GroupEffects {
        GroupEffects {
            social_engagement: 0.0,
            negative_emotionality: 0.0,
            anxiety: 0.0,
            activity: 0.0,
        }
    }
}

impl Default for GroupEffects {
    /// Moderate clinically plausible contrast: less social engagement, more
    /// negative emotionality, anxiety, and activity in the OCD group.
    fn default() -> GroupEffects {
        GroupEffects {
            social_engagement: -0.12,
            negative_emotionality: 0.10,
            anxiety: 0.20,
            activity: 0.15,
        }
    }
}

/// Mean code fractions of the comparison group, in canonical code order.
pub const BASE_FRACTIONS: [f64; 7] = [0.65, 0.55, 0.35, 0.15, 0.45, 0.20, 0.30];

/// Full description of a synthetic study.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub n_ocd: usize,
    pub n_no_ocd: usize,
    pub duration_s: f64,
    pub fps: f64,
    pub seed: u64,
    pub effects: GroupEffects,
    /// Between-clip standard deviation of each drawn code fraction.
    pub noise_sd: f64,
    /// Standard deviation of simulated human coder noise on the fraction
    /// scale, applied before score conversion.
    pub human_sd: f64,
    /// Leading fraction of participants double-coded by the second rater.
    pub rater_b_fraction: f64,
    pub nod_hz: f64,
}

impl Default for StudySpec {
    fn default() -> StudySpec {
        StudySpec {
            n_ocd: 25,
            n_no_ocd: 12,
            duration_s: 30.0,
            fps: 25.0,
            seed: 42,
            effects: GroupEffects::default(),
            noise_sd: 0.08,
            human_sd: 0.05,
            rater_b_fraction: 1.0 / 3.0,
            nod_hz: 2.0,
        }
    }
}

impl StudySpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_ocd < 2 || self.n_no_ocd < 2 {
            return Err(SynthError::BadStudySpec {
                detail: format!(
                    "need at least 2 participants per group, got {}/{}",
                    self.n_ocd, self.n_no_ocd
                ),
            });
        }
        if !(self.duration_s > 0.0) || !(self.fps > 0.0) {
            return Err(SynthError::BadStudySpec {
                detail: "duration_s and fps must be positive".to_string(),
            });
        }
        if !(self.noise_sd >= 0.0) || !(self.human_sd >= 0.0) {
            return Err(SynthError::BadStudySpec {
                detail: "noise_sd and human_sd must be nonnegative".to_string(),
            });
        }
        if !(0.0..=1.0).contains(&self.rater_b_fraction) {
            return Err(SynthError::BadStudySpec {
                detail: format!(
                    "rater_b_fraction = {} outside [0,1]",
                    self.rater_b_fraction
                ),
            });
        }
        Ok(())
    }

    pub fn n_participants(&self) -> usize {
        self.n_ocd + self.n_no_ocd
    }

    /// Participant id and group for index `p` (OCD participants first).
    pub fn participant(&self, p: usize) -> (String, Group) {
        let group = if p < self.n_ocd {
            Group::Ocd
        } else {
            Group::NoOcd
        };
        (format!("p{:03}", p + 1), group)
    }
}

/// Draws the target fractions for one clip: group mean plus seeded noise,
/// clamped to [0,1]. Deterministic in (study seed, clip index).
pub fn draw_clip_targets(spec: &StudySpec, group: Group, clip_index: usize) -> CodeTargets {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 10_000 + clip_index as u64));
    let deltas = match group {
        Group::Ocd => {
            let e = spec.effects;
            [
                e.social_engagement,
                e.social_engagement,
                e.social_engagement,
                e.negative_emotionality,
                e.social_engagement,
                e.anxiety,
                e.activity,
            ]
        }
        Group::NoOcd => [0.0; 7],
    };
    let mut targets = [0.0; 7];
    for k in 0..7 {
        let z: f64 = rng.sample(StandardNormal);
        targets[k] = (BASE_FRACTIONS[k] + deltas[k] + spec.noise_sd * z).clamp(0.0, 1.0);
    }
    CodeTargets::from_array(targets)
}

/// Everything a generated study wrote to disk.
#[derive(Debug, Clone)]
pub struct StudySummary {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub truth_path: PathBuf,
    pub human_path: PathBuf,
    pub n_clips: usize,
    pub n_ocd: usize,
    pub n_no_ocd: usize,
}

/// Header of the simulated human scores CSV.
pub const HUMAN_HEADER: &str = "clip_id,rater,code,score";

/// Generates a full synthetic study directory:
///
/// - `manifest.csv` referencing one stream per participant x chapter,
/// - `streams/<participant>/<chapter>.jsonl` frame streams,
/// - `streams/<participant>/<chapter>.truth.csv` per-clip sidecars,
/// - `truth.csv` concatenating every sidecar,
/// - `human.csv` with simulated rater scores (rater_a codes everything,
///   rater_b double-codes the leading fraction of participants).
///
/// Same spec in, same bytes out: generation is parallel per clip but every
/// write happens in manifest order with derived per-clip seeds.
pub fn generate_study(spec: &StudySpec, out_dir: &Path) -> Result<StudySummary, SynthError> {
    spec.validate()?;
    let n_participants = spec.n_participants();

    struct ClipPlan {
        index: usize,
        participant_id: String,
        group: Group,
        chapter: Chapter,
    }
    let mut plans = Vec::new();
    for p in 0..n_participants {
        let (participant_id, group) = spec.participant(p);
        for (c, chapter) in Chapter::ALL.into_iter().enumerate() {
            plans.push(ClipPlan {
                index: p * Chapter::ALL.len() + c,
                participant_id: participant_id.clone(),
                group,
                chapter,
            });
        }
    }

    let generated: Vec<(usize, GeneratedClip)> = plans
        .par_iter()
        .map(|plan| {
            let targets = draw_clip_targets(spec, plan.group, plan.index);
            let profile = BehaviorProfile::from_targets(
                targets,
                spec.nod_hz,
                spec.duration_s,
                derive_seed(spec.seed, 20_000 + plan.index as u64),
            )?;
            Ok((plan.index, generate_clip(&profile, spec.fps)?))
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    let mut clips: Vec<Option<GeneratedClip>> = vec![None; plans.len()];
    for (index, clip) in generated {
        clips[index] = Some(clip);
    }

    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut manifest = String::from(&MANIFEST_HEADER.join(","));
    manifest.push('\n');
    let mut truth_rows: Vec<(String, ClipTruth)> = Vec::new();
    let mut human = String::from(HUMAN_HEADER);
    human.push('\n');
    let double_coded = (spec.rater_b_fraction * n_participants as f64).ceil() as usize;

    for plan in &plans {
        let clip = clips[plan.index].as_ref().unwrap();
        let clip_id = format!("{}/{}", plan.participant_id, plan.chapter);
        let rel_stream = format!("streams/{}/{}.jsonl", plan.participant_id, plan.chapter);

        let participant_dir = out_dir.join("streams").join(&plan.participant_id);
        std::fs::create_dir_all(&participant_dir).map_err(io_err(&participant_dir))?;
        write_stream(&clip.frames, &out_dir.join(&rel_stream))?;
        let sidecar = participant_dir.join(format!("{}.truth.csv", plan.chapter));
        std::fs::write(
            &sidecar,
            truth_csv(&[(clip_id.clone(), clip.truth)]),
        )
        .map_err(io_err(&sidecar))?;

        let _ = writeln!(
            manifest,
            "{},{},{},{},{},,",
            plan.participant_id, plan.group, plan.chapter, rel_stream, spec.fps
        );
        truth_rows.push((clip_id.clone(), clip.truth));

        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 30_000 + plan.index as u64));
        let participant_idx = plan.index / Chapter::ALL.len();
        let raters: &[&str] = if participant_idx < double_coded {
            &["rater_a", "rater_b"]
        } else {
            &["rater_a"]
        };
        for rater in raters {
            for (code, frac) in CODE_NAMES.iter().zip(clip.truth.fractions) {
                let z: f64 = rng.sample(StandardNormal);
                let noisy = (frac + spec.human_sd * z).clamp(0.0, 1.0);
                let score = percentage_to_score(noisy);
                let _ = writeln!(human, "{clip_id},{rater},{code},{score}");
            }
        }
    }

    let manifest_path = out_dir.join("manifest.csv");
    std::fs::write(&manifest_path, manifest).map_err(io_err(&manifest_path))?;
    let truth_path = out_dir.join("truth.csv");
    std::fs::write(&truth_path, truth_csv(&truth_rows)).map_err(io_err(&truth_path))?;
    let human_path = out_dir.join("human.csv");
    std::fs::write(&human_path, human).map_err(io_err(&human_path))?;

    Ok(StudySummary {
        out_dir: out_dir.to_path_buf(),
        manifest_path,
        truth_path,
        human_path,
        n_clips: plans.len(),
        n_ocd: spec.n_ocd,
        n_no_ocd: spec.n_no_ocd,
    })
}

/// Reads simulated (or real) human scores: `clip_id,rater,code,score` rows.
pub fn read_human_csv(path: &Path) -> Result<Vec<HumanScore>, SynthError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(SynthError::BadStudySpec {
                detail: format!("{}: human line {} malformed", path.display(), idx + 1),
            });
        }
        let score: f64 = fields[3].parse().map_err(|_| SynthError::BadStudySpec {
            detail: format!("{}: bad score {:?}", path.display(), fields[3]),
        })?;
        rows.push(HumanScore {
            clip_id: fields[0].to_string(),
            rater: fields[1].to_string(),
            code: fields[2].to_string(),
            score,
        });
    }
    Ok(rows)
}

/// One human rating of one code on one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanScore {
    pub clip_id: String,
    pub rater: String,
    pub code: String,
    pub score: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{score_clip, CibScores};
    use crate::config::Config;
    use crate::ingest::{quality_filter, ClipSegment};

    fn segment_of(frames: Vec<FrameRecord>, fps: f64) -> ClipSegment {
        let cfg = Config::default();
        let duration = frames.len() as f64 / fps;
        let (frames, quality) = quality_filter(frames, fps, &cfg).unwrap();
        ClipSegment {
            participant_id: "synthetic".to_string(),
            chapter: Chapter::Depression,
            group: Group::NoOcd,
            fps,
            frames,
            window: (0.0, duration),
            quality,
            human_scores_path: None,
            rater_id: None,
            parse_warnings: Vec::new(),
        }
    }

    fn generate_segment(targets: CodeTargets, seed: u64) -> (ClipSegment, ClipTruth) {
        let profile = BehaviorProfile::from_targets(targets, 2.0, 30.0, seed).unwrap();
        let clip = generate_clip(&profile, 25.0).unwrap();
        (segment_of(clip.frames, 25.0), clip.truth)
    }

    fn code_fractions(scores: &crate::codes::ScoredClip) -> [f64; 7] {
        scores.rates.code_fractions().map(|p| p.unwrap())
    }

    #[test]
    fn rest_profile_reads_zero_on_every_detector() {
        let (seg, truth) = generate_segment(CodeTargets::rest(), 7);
        let scored = score_clip(&seg, &Config::default()).unwrap();
        for (p, t) in code_fractions(&scored).iter().zip(truth.fractions) {
            assert_eq!(*p, 0.0);
            assert_eq!(t, 0.0);
        }
        let scores: CibScores = scored.scores;
        for s in scores.code_scores() {
            assert_eq!(s.unwrap(), 1.0);
        }
    }

    #[test]
    fn engaged_profile_saturates_the_social_codes_exactly() {
        let (seg, truth) = generate_segment(CodeTargets::engaged(), 11);
        let scored = score_clip(&seg, &Config::default()).unwrap();
        let p = code_fractions(&scored);
        assert_eq!(p[0], 1.0, "gaze");
        assert_eq!(p[1], 1.0, "attention");
        assert_eq!(p[2], 1.0, "positive affect");
        assert_eq!(p[4], 1.0, "vocalization");
        assert_eq!(p[3], 0.0, "negative emotionality");
        assert_eq!(p[5], 0.0, "anxiety");
        assert_eq!(p[6], 0.0, "activity");
        assert_eq!(truth.fractions[0], 1.0);
        assert_eq!(truth.fractions[1], 1.0);
        let scores = scored.scores.code_scores();
        assert_eq!(scores[0].unwrap(), 5.0);
        assert_eq!(scores[1].unwrap(), 5.0);
        assert_eq!(scores[2].unwrap(), 5.0);
        assert_eq!(scores[4].unwrap(), 5.0);
        assert_eq!(scores[3].unwrap(), 1.0);
    }

    #[test]
    fn agitated_profile_saturates_the_distress_codes_exactly() {
        let (seg, truth) = generate_segment(CodeTargets::agitated(), 13);
        let scored = score_clip(&seg, &Config::default()).unwrap();
        let p = code_fractions(&scored);
        assert_eq!(p[3], 1.0, "negative emotionality");
        assert_eq!(p[6], 1.0, "activity");
        // All frames show sadness, so anxiety has no fear ingredient and
        // realizes at the movement-only ceiling.
        assert_eq!(p[5], 0.5, "anxiety");
        assert_eq!(truth.fractions[5], 0.5);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1], 0.0);
        assert_eq!(p[2], 0.0);
        assert_eq!(p[4], 0.0);
        let scores = scored.scores.code_scores();
        assert_eq!(scores[3].unwrap(), 5.0);
        assert_eq!(scores[6].unwrap(), 5.0);
        assert_eq!(scores[5].unwrap(), 3.0);
    }

    #[test]
    fn mid_profile_detectors_recover_truth_within_tolerance() {
        let targets = CodeTargets {
            gaze: 0.4,
            attention: 0.5,
            positive_affect: 0.3,
            negative_emotionality: 0.2,
            vocalization: 0.5,
            anxiety: 0.3,
            activity: 0.4,
        };
        let (seg, truth) = generate_segment(targets, 17);
        let scored = score_clip(&seg, &Config::default()).unwrap();
        let p = code_fractions(&scored);
        for (i, (detected, expected)) in p.iter().zip(truth.fractions).enumerate() {
            assert!(
                (detected - expected).abs() <= 0.05,
                "{}: detected {detected}, truth {expected}",
                CODE_NAMES[i]
            );
        }
        // Unsmoothed channels are exact, not just close.
        assert!((p[0] - truth.fractions[0]).abs() < 1e-12, "gaze");
        assert!((p[2] - truth.fractions[2]).abs() < 1e-12, "positive affect");
        assert!((p[3] - truth.fractions[3]).abs() < 1e-12, "negative emotionality");
    }

    #[test]
    fn sidecar_fraction_rounds_to_frame_resolution() {
        let targets = CodeTargets {
            positive_affect: 0.5,
            ..CodeTargets::zero()
        };
        let profile = BehaviorProfile::from_targets(targets, 2.0, 30.0, 1).unwrap();
        let clip = generate_clip(&profile, 25.0).unwrap();
        assert!((clip.truth.fractions[2] - 0.5).abs() <= 1.0 / 750.0);
    }

    #[test]
    fn generated_stream_passes_quality_filter_unmasked() {
        let (seg, _) = generate_segment(CodeTargets::engaged(), 3);
        assert_eq!(seg.frames.len(), 750);
        assert_eq!(seg.quality.interpolated_samples, 0);
        for ch in &seg.quality.channels {
            assert_eq!(ch.missing_before, 0.0, "channel {}", ch.channel);
            assert_eq!(ch.missing_after, 0.0, "channel {}", ch.channel);
        }
    }

    #[test]
    fn same_profile_generates_identical_bytes() {
        let targets = CodeTargets {
            gaze: 0.7,
            attention: 0.6,
            ..CodeTargets::zero()
        };
        let profile = BehaviorProfile::from_targets(targets, 2.0, 30.0, 5).unwrap();
        let a = generate_clip(&profile, 25.0).unwrap();
        let b = generate_clip(&profile, 25.0).unwrap();
        let lines_a: Vec<String> = a.frames.iter().map(|f| f.to_json_line()).collect();
        let lines_b: Vec<String> = b.frames.iter().map(|f| f.to_json_line()).collect();
        assert_eq!(lines_a, lines_b);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn study_generation_is_byte_deterministic() {
        let spec = StudySpec {
            n_ocd: 2,
            n_no_ocd: 2,
            ..StudySpec::default()
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        generate_study(&spec, dir_a.path()).unwrap();
        generate_study(&spec, dir_b.path()).unwrap();
        for rel in [
            "manifest.csv",
            "truth.csv",
            "human.csv",
            "streams/p001/depression.jsonl",
            "streams/p003/mania.truth.csv",
        ] {
            let a = std::fs::read(dir_a.path().join(rel)).unwrap();
            let b = std::fs::read(dir_b.path().join(rel)).unwrap();
            assert_eq!(a, b, "file {rel} differs between identical runs");
        }
    }

    #[test]
    fn generated_study_loads_cleanly_end_to_end() {
        let spec = StudySpec {
            n_ocd: 3,
            n_no_ocd: 2,
            ..StudySpec::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let summary = generate_study(&spec, dir.path()).unwrap();
        assert_eq!(summary.n_clips, 10);

        let load = crate::ingest::load_study(&summary.manifest_path, &Config::default()).unwrap();
        assert_eq!(load.clips.len(), 10);
        assert!(load.failures.is_empty());
        for clip in &load.clips {
            for ch in &clip.quality.channels {
                assert_eq!(ch.missing_after, 0.0);
            }
        }
        let counts = load.summary();
        assert_eq!(counts[&(Group::Ocd, Chapter::Depression)], 3);
        assert_eq!(counts[&(Group::NoOcd, Chapter::Mania)], 2);

        let truth = read_truth_csv(&summary.truth_path).unwrap();
        assert_eq!(truth.len(), 10);
        for (_, t) in &truth {
            for f in t.fractions {
                assert!(f.is_finite() && (0.0..=1.0).contains(&f));
            }
        }

        let human = read_human_csv(&summary.human_path).unwrap();
        // rater_a scores all 10 clips; rater_b covers ceil(5/3) = 2
        // participants = 4 clips; 7 codes each.
        assert_eq!(human.len(), (10 + 4) * 7);
        let b_clips: std::collections::BTreeSet<&str> = human
            .iter()
            .filter(|h| h.rater == "rater_b")
            .map(|h| h.clip_id.as_str())
            .collect();
        assert_eq!(b_clips.len(), 4);
        for h in &human {
            assert!(crate::codes::scale::on_half_point_lattice(h.score));
        }
    }

    #[test]
    fn minimal_two_by_two_study_completes() {
        let spec = StudySpec {
            n_ocd: 2,
            n_no_ocd: 2,
            ..StudySpec::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let summary = generate_study(&spec, dir.path()).unwrap();
        assert_eq!(summary.n_clips, 8);
        let load = crate::ingest::load_study(&summary.manifest_path, &Config::default()).unwrap();
        assert_eq!(load.clips.len(), 8);
    }

    #[test]
    fn invalid_profiles_and_specs_are_rejected() {
        let bad = CodeTargets {
            gaze: 1.2,
            ..CodeTargets::zero()
        };
        assert!(matches!(
            BehaviorProfile::from_targets(bad, 2.0, 30.0, 0),
            Err(SynthError::BadProfile { .. })
        ));
        assert!(matches!(
            BehaviorProfile::from_targets(CodeTargets::zero(), 0.0, 30.0, 0),
            Err(SynthError::BadProfile { .. })
        ));
        let spec = StudySpec {
            n_ocd: 1,
            ..StudySpec::default()
        };
        assert!(matches!(
            spec.validate(),
            Err(SynthError::BadStudySpec { .. })
        ));
    }

    #[test]
    fn ocd_draws_shift_by_the_configured_effects() {
        let spec = StudySpec {
            noise_sd: 0.0,
            ..StudySpec::default()
        };
        let ocd = draw_clip_targets(&spec, Group::Ocd, 0);
        let control = draw_clip_targets(&spec, Group::NoOcd, 1);
        let e = spec.effects;
        assert!((control.gaze - BASE_FRACTIONS[0]).abs() < 1e-12);
        assert!((ocd.gaze - (BASE_FRACTIONS[0] + e.social_engagement)).abs() < 1e-12);
        assert!((ocd.anxiety - (BASE_FRACTIONS[5] + e.anxiety)).abs() < 1e-12);
        assert!((ocd.activity - (BASE_FRACTIONS[6] + e.activity)).abs() < 1e-12);
    }

    #[test]
    fn truth_csv_round_trips() {
        let rows = vec![
            (
                "p001/depression".to_string(),
                ClipTruth {
                    fractions: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
                },
            ),
            (
                "p001/mania".to_string(),
                ClipTruth {
                    fractions: [0.0, 1.0, 0.25, 0.125, 0.5, 0.75, 1.0],
                },
            ),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.csv");
        std::fs::write(&path, truth_csv(&rows)).unwrap();
        let back = read_truth_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, "p001/depression");
        assert_eq!(back[0].1.fractions, rows[0].1.fractions);
        assert_eq!(back[1].1.fractions, rows[1].1.fractions);
    }
}
