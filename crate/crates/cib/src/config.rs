//! Analysis configuration: every detector threshold, statistical level, and
//! classifier setting in one auditable key-value structure.
//!
//! A run's configuration comes from (in increasing precedence) built-in
//! defaults, a plain-text `key=value` file, and command-line flags. The
//! effective configuration is serialized canonically (sorted keys, one
//! `key=value` per line) and hashed; the first 16 hex characters of the
//! SHA-256 digest are embedded in every output artifact so downstream
//! commands can refuse inputs produced under a different configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("config line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config key {key}: cannot parse {value:?} as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("config key {key}: value {value} outside valid range ({requirement})")]
    OutOfRange {
        key: String,
        value: String,
        requirement: &'static str,
    },
    #[error("gaze reference file {path}, line {line}: {problem}")]
    BadGazeRef {
        path: String,
        line: usize,
        problem: String,
    },
}

/// Per-clip gaze calibration: the head-pose angles that count as "looking at
/// the interviewer" for one specific clip, overriding the global reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeRef {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

/// The full analysis parameter set.
///
/// All fields are plain data; the struct is cheap to clone and read-only
/// during processing.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Analysis window length in seconds.
    pub window_s: f64,
    /// Keypoint/landmark confidence below this is treated as missing.
    pub conf_min: f64,
    /// Maximum gap (seconds) that interpolation may bridge.
    pub gap_max_s: f64,
    /// Maximum tolerated missing fraction per required channel after
    /// interpolation.
    pub max_gap_fraction: f64,
    /// Fail on malformed frame lines instead of skipping them.
    pub strict: bool,

    /// Gaze cone half-width, yaw (degrees).
    pub gaze_yaw_deg: f64,
    /// Gaze cone half-width, pitch (degrees).
    pub gaze_pitch_deg: f64,
    /// Default gaze reference yaw (degrees) for clips without calibration.
    pub gaze_ref_yaw_deg: f64,
    /// Default gaze reference pitch (degrees).
    pub gaze_ref_pitch_deg: f64,
    /// Per-clip gaze calibration, keyed by `participant_id/chapter`.
    pub gaze_refs: BTreeMap<String, GazeRef>,

    /// Movement energy below this counts as stillness (torso-lengths/s).
    pub still_thresh: f64,
    /// Nod/shake band-pass lower edge (Hz).
    pub nod_lo_hz: f64,
    /// Nod/shake band-pass upper edge (Hz).
    pub nod_hi_hz: f64,
    /// Minimum band-passed amplitude (degrees) for a counted nod/shake.
    pub nod_min_amp_deg: f64,
    /// Events/minute at which the nod term of attention saturates.
    pub nod_cap_per_min: f64,
    /// Attention weight on the stillness fraction.
    pub w_still: f64,
    /// Attention weight on the nod/shake rate term.
    pub w_nod: f64,

    /// Minimum winning expression probability for an expression event.
    pub tau_expr: f64,
    /// Mouth-aspect-ratio threshold for a speaking frame.
    pub tau_mar: f64,
    /// Median-smoothing window (frames) for the speaking series.
    pub smooth_win: usize,

    /// Movement-energy smoothing horizon in seconds (centered average).
    pub energy_smooth_s: f64,
    /// Movement energy at or above this counts as activity
    /// (torso-lengths/s).
    pub act_thresh: f64,
    /// Movement energy at or above this feeds the anxiety code.
    pub anx_act_thresh: f64,
    /// Anxiety weight on the fear/disgust expression fraction.
    pub w_fear: f64,
    /// Anxiety weight on the high-activity fraction.
    pub w_act: f64,

    /// Significance level for all tests.
    pub alpha: f64,
    /// False discovery rate for Benjamini-Hochberg correction.
    pub fdr_q: f64,

    /// L2 penalty for logistic regression.
    pub logistic_l2: f64,
    /// Number of trees in the random forest.
    pub n_trees: usize,
    /// Folds for stratified k-fold cross-validation.
    pub cv_folds: usize,
    /// Master seed for all randomized steps.
    pub seed: u64,
    /// Use 1-5 scores as classifier features instead of raw percentages.
    pub use_scores: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            window_s: 30.0,
            conf_min: 0.3,
            gap_max_s: 0.5,
            max_gap_fraction: 0.25,
            strict: true,
            gaze_yaw_deg: 20.0,
            gaze_pitch_deg: 20.0,
            gaze_ref_yaw_deg: 0.0,
            gaze_ref_pitch_deg: 0.0,
            gaze_refs: BTreeMap::new(),
            still_thresh: 0.1,
            nod_lo_hz: 0.5,
            nod_hi_hz: 4.0,
            nod_min_amp_deg: 1.0,
            nod_cap_per_min: 60.0,
            w_still: 0.5,
            w_nod: 0.5,
            tau_expr: 0.4,
            tau_mar: 0.3,
            smooth_win: 5,
            energy_smooth_s: 0.2,
            act_thresh: 0.5,
            anx_act_thresh: 1.0,
            w_fear: 0.5,
            w_act: 0.5,
            alpha: 0.05,
            fdr_q: 0.20,
            logistic_l2: 1.0,
            n_trees: 500,
            cv_folds: 5,
            seed: 42,
            use_scores: false,
        }
    }
}

impl Config {
    /// Loads a `key=value` file on top of the defaults.
    ///
    /// Blank lines and lines starting with `#` are ignored. The special key
    /// `gaze_ref_file` names a CSV of per-clip gaze calibrations
    /// (`clip_id,yaw_deg,pitch_deg`), resolved relative to the config file.
    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        cfg.merge_file(path)?;
        Ok(cfg)
    }

    /// Applies a config file's entries onto `self`.
    pub fn merge_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: trimmed.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key == "gaze_ref_file" {
                let ref_path = path.parent().unwrap_or(Path::new(".")).join(value);
                self.load_gaze_refs(&ref_path)?;
            } else {
                self.set(key, value)
                    .map_err(|e| match e {
                        ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line, key },
                        other => other,
                    })?;
            }
        }
        self.validate()
    }

    /// Sets one parameter from its textual form, as used by both the config
    /// file and command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn f64_of(key: &str, value: &str) -> Result<f64, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
                expected: "number",
            })
        }
        fn usize_of(key: &str, value: &str) -> Result<usize, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
                expected: "non-negative integer",
            })
        }
        fn bool_of(key: &str, value: &str) -> Result<bool, ConfigError> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    expected: "boolean",
                }),
            }
        }

        match key {
            "window_s" => self.window_s = f64_of(key, value)?,
            "conf_min" => self.conf_min = f64_of(key, value)?,
            "gap_max_s" => self.gap_max_s = f64_of(key, value)?,
            "max_gap_fraction" => self.max_gap_fraction = f64_of(key, value)?,
            "strict" => self.strict = bool_of(key, value)?,
            "gaze_yaw_deg" => self.gaze_yaw_deg = f64_of(key, value)?,
            "gaze_pitch_deg" => self.gaze_pitch_deg = f64_of(key, value)?,
            "gaze_ref_yaw_deg" => self.gaze_ref_yaw_deg = f64_of(key, value)?,
            "gaze_ref_pitch_deg" => self.gaze_ref_pitch_deg = f64_of(key, value)?,
            "still_thresh" => self.still_thresh = f64_of(key, value)?,
            "nod_lo_hz" => self.nod_lo_hz = f64_of(key, value)?,
            "nod_hi_hz" => self.nod_hi_hz = f64_of(key, value)?,
            "nod_min_amp_deg" => self.nod_min_amp_deg = f64_of(key, value)?,
            "nod_cap_per_min" => self.nod_cap_per_min = f64_of(key, value)?,
            "w_still" => self.w_still = f64_of(key, value)?,
            "w_nod" => self.w_nod = f64_of(key, value)?,
            "tau_expr" => self.tau_expr = f64_of(key, value)?,
            "tau_mar" => self.tau_mar = f64_of(key, value)?,
            "smooth_win" => self.smooth_win = usize_of(key, value)?,
            "energy_smooth_s" => self.energy_smooth_s = f64_of(key, value)?,
            "act_thresh" => self.act_thresh = f64_of(key, value)?,
            "anx_act_thresh" => self.anx_act_thresh = f64_of(key, value)?,
            "w_fear" => self.w_fear = f64_of(key, value)?,
            "w_act" => self.w_act = f64_of(key, value)?,
            "alpha" => self.alpha = f64_of(key, value)?,
            "fdr_q" => self.fdr_q = f64_of(key, value)?,
            "logistic_l2" => self.logistic_l2 = f64_of(key, value)?,
            "n_trees" => self.n_trees = usize_of(key, value)?,
            "cv_folds" => self.cv_folds = usize_of(key, value)?,
            "seed" => {
                self.seed = value.parse().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    expected: "unsigned 64-bit integer",
                })?
            }
            "use_scores" => self.use_scores = bool_of(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Loads per-clip gaze calibrations from a CSV with header
    /// `clip_id,yaw_deg,pitch_deg`.
    pub fn load_gaze_refs(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || (line == 1 && trimmed.starts_with("clip_id")) {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 3 {
                return Err(ConfigError::BadGazeRef {
                    path: path.display().to_string(),
                    line,
                    problem: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64, ConfigError> {
                s.trim().parse().map_err(|_| ConfigError::BadGazeRef {
                    path: path.display().to_string(),
                    line,
                    problem: format!("cannot parse angle {:?}", s),
                })
            };
            self.gaze_refs.insert(
                fields[0].trim().to_string(),
                GazeRef {
                    yaw_deg: parse(fields[1])?,
                    pitch_deg: parse(fields[2])?,
                },
            );
        }
        Ok(())
    }

    /// Gaze reference for a clip: its calibration entry if present, otherwise
    /// the global default. The flag reports whether the default was used.
    pub fn gaze_ref_for(&self, clip_id: &str) -> (GazeRef, bool) {
        match self.gaze_refs.get(clip_id) {
            Some(r) => (*r, false),
            None => (
                GazeRef {
                    yaw_deg: self.gaze_ref_yaw_deg,
                    pitch_deg: self.gaze_ref_pitch_deg,
                },
                true,
            ),
        }
    }

    /// Range checks over the whole parameter set.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &str, value: String, req: &'static str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    key: key.to_string(),
                    value,
                    requirement: req,
                })
            }
        }
        check(self.window_s > 0.0, "window_s", fmt_f64(self.window_s), "> 0")?;
        check(
            (0.0..=1.0).contains(&self.conf_min),
            "conf_min",
            fmt_f64(self.conf_min),
            "in [0,1]",
        )?;
        check(self.gap_max_s >= 0.0, "gap_max_s", fmt_f64(self.gap_max_s), ">= 0")?;
        check(
            (0.0..1.0).contains(&self.max_gap_fraction),
            "max_gap_fraction",
            fmt_f64(self.max_gap_fraction),
            "in [0,1)",
        )?;
        check(
            self.nod_lo_hz > 0.0 && self.nod_hi_hz > self.nod_lo_hz,
            "nod_lo_hz",
            fmt_f64(self.nod_lo_hz),
            "0 < nod_lo_hz < nod_hi_hz",
        )?;
        check(
            self.nod_cap_per_min > 0.0,
            "nod_cap_per_min",
            fmt_f64(self.nod_cap_per_min),
            "> 0",
        )?;
        check(self.smooth_win >= 1, "smooth_win", self.smooth_win.to_string(), ">= 1")?;
        check(
            self.energy_smooth_s >= 0.0,
            "energy_smooth_s",
            fmt_f64(self.energy_smooth_s),
            ">= 0",
        )?;
        for (name, w) in [
            ("w_still", self.w_still),
            ("w_nod", self.w_nod),
            ("w_fear", self.w_fear),
            ("w_act", self.w_act),
        ] {
            check(w >= 0.0, name, fmt_f64(w), ">= 0")?;
        }
        check(
            self.alpha > 0.0 && self.alpha < 1.0,
            "alpha",
            fmt_f64(self.alpha),
            "in (0,1)",
        )?;
        check(
            self.fdr_q > 0.0 && self.fdr_q < 1.0,
            "fdr_q",
            fmt_f64(self.fdr_q),
            "in (0,1)",
        )?;
        check(
            self.logistic_l2 >= 0.0,
            "logistic_l2",
            fmt_f64(self.logistic_l2),
            ">= 0",
        )?;
        check(self.n_trees >= 1, "n_trees", self.n_trees.to_string(), ">= 1")?;
        check(self.cv_folds >= 2, "cv_folds", self.cv_folds.to_string(), ">= 2")?;
        Ok(())
    }

    /// Canonical serialization: sorted `key=value` lines, one per parameter,
    /// with per-clip gaze calibrations inlined so the hash covers them.
    pub fn canonical_string(&self) -> String {
        let mut entries: Vec<(String, String)> = vec![
            ("act_thresh".into(), fmt_f64(self.act_thresh)),
            ("alpha".into(), fmt_f64(self.alpha)),
            ("anx_act_thresh".into(), fmt_f64(self.anx_act_thresh)),
            ("conf_min".into(), fmt_f64(self.conf_min)),
            ("cv_folds".into(), self.cv_folds.to_string()),
            ("energy_smooth_s".into(), fmt_f64(self.energy_smooth_s)),
            ("fdr_q".into(), fmt_f64(self.fdr_q)),
            ("gap_max_s".into(), fmt_f64(self.gap_max_s)),
            ("gaze_pitch_deg".into(), fmt_f64(self.gaze_pitch_deg)),
            ("gaze_ref_pitch_deg".into(), fmt_f64(self.gaze_ref_pitch_deg)),
            ("gaze_ref_yaw_deg".into(), fmt_f64(self.gaze_ref_yaw_deg)),
            ("gaze_yaw_deg".into(), fmt_f64(self.gaze_yaw_deg)),
            ("logistic_l2".into(), fmt_f64(self.logistic_l2)),
            ("max_gap_fraction".into(), fmt_f64(self.max_gap_fraction)),
            ("n_trees".into(), self.n_trees.to_string()),
            ("nod_cap_per_min".into(), fmt_f64(self.nod_cap_per_min)),
            ("nod_hi_hz".into(), fmt_f64(self.nod_hi_hz)),
            ("nod_lo_hz".into(), fmt_f64(self.nod_lo_hz)),
            ("nod_min_amp_deg".into(), fmt_f64(self.nod_min_amp_deg)),
            ("seed".into(), self.seed.to_string()),
            ("smooth_win".into(), self.smooth_win.to_string()),
            ("still_thresh".into(), fmt_f64(self.still_thresh)),
            ("strict".into(), self.strict.to_string()),
            ("tau_expr".into(), fmt_f64(self.tau_expr)),
            ("tau_mar".into(), fmt_f64(self.tau_mar)),
            ("use_scores".into(), self.use_scores.to_string()),
            ("w_act".into(), fmt_f64(self.w_act)),
            ("w_fear".into(), fmt_f64(self.w_fear)),
            ("w_nod".into(), fmt_f64(self.w_nod)),
            ("w_still".into(), fmt_f64(self.w_still)),
            ("window_s".into(), fmt_f64(self.window_s)),
        ];
        for (clip, r) in &self.gaze_refs {
            entries.push((
                format!("gaze_ref.{clip}"),
                format!("{},{}", fmt_f64(r.yaw_deg), fmt_f64(r.pitch_deg)),
            ));
        }
        entries.sort();
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// First 16 hex characters of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

/// Shortest-roundtrip float formatting, used for canonical serialization and
/// all human-facing parameter echoes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn default_config_validates() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn hash_is_16_hex_chars_and_stable() {
        let cfg = Config::default();
        let h = cfg.hash();
        assert_eq!(h.len(), 16);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(h, cfg.clone().hash());
    }

    #[test]
    fn hash_changes_when_any_parameter_changes() {
        let base = Config::default();
        let mut changed = base.clone();
        changed.tau_expr = 0.45;
        assert_ne!(base.hash(), changed.hash());

        let mut with_ref = base.clone();
        with_ref.gaze_refs.insert(
            "p01/depression".into(),
            GazeRef {
                yaw_deg: 5.0,
                pitch_deg: -2.0,
            },
        );
        assert_ne!(base.hash(), with_ref.hash());
    }

    #[test]
    fn file_overrides_defaults_and_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# run config\ntau_expr = 0.5\nseed=7\n").unwrap();
        let cfg = Config::from_file(&path).unwrap();
        assert_eq!(cfg.tau_expr, 0.5);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tau_mar, Config::default().tau_mar);

        std::fs::write(&path, "no_such_key=1\n").unwrap();
        let err = Config::from_file(&path).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 1, .. }));
    }

    #[test]
    fn gaze_ref_file_is_loaded_and_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let refs = dir.path().join("refs.csv");
        let mut f = std::fs::File::create(&refs).unwrap();
        writeln!(f, "clip_id,yaw_deg,pitch_deg").unwrap();
        writeln!(f, "p01/depression,10,-5").unwrap();
        drop(f);
        let cfg_path = dir.path().join("run.cfg");
        std::fs::write(&cfg_path, "gaze_ref_file=refs.csv\n").unwrap();

        let cfg = Config::from_file(&cfg_path).unwrap();
        let (r, defaulted) = cfg.gaze_ref_for("p01/depression");
        assert_eq!(r.yaw_deg, 10.0);
        assert_eq!(r.pitch_deg, -5.0);
        assert!(!defaulted);
        let (r, defaulted) = cfg.gaze_ref_for("p02/depression");
        assert_eq!(r.yaw_deg, 0.0);
        assert!(defaulted);
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        let mut cfg = Config::default();
        cfg.alpha = 1.5;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::OutOfRange { .. })
        ));
    }

    #[test]
    fn canonical_string_is_sorted() {
        let s = Config::default().canonical_string();
        let keys: Vec<&str> = s.lines().map(|l| l.split('=').next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
