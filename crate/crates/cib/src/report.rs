//! Output artifacts: CSV schemas, their writers and readers, and run
//! metadata.
//!
//! Every artifact embeds the configuration hash so downstream commands can
//! refuse inputs produced under a different configuration. All serialization
//! uses shortest-roundtrip float formatting and fixed column orders, so a
//! rerun with identical inputs produces identical bytes; the only timestamp
//! lives on a single line of `run_info.txt`.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::codes::{ActionRates, CibScores, ClipScores, MissingCode, ScoredClip, CODE_NAMES};
use crate::config::{fmt_f64, Config};
use crate::ingest::{Chapter, Group};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    BadCsv {
        path: String,
        line: usize,
        reason: String,
    },
    #[error(
        "config hash mismatch: input was produced under {found}, current configuration is {expected} (pass --force to proceed anyway)"
    )]
    HashMismatch { expected: String, found: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Refuses a cross-command handoff when the producing configuration differs
/// from the current one, unless forced.
pub fn check_hash(found: &str, expected: &str, force: bool) -> Result<(), ReportError> {
    if found == expected || force {
        Ok(())
    } else {
        Err(ReportError::HashMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

/// Column order of the per-clip scores CSV.
pub const SCORES_HEADER: [&str; 44] = [
    "participant_id",
    "group",
    "chapter",
    "clip_id",
    "p_gaze",
    "p_attention",
    "p_positive_affect",
    "p_negative_emotionality",
    "p_vocalization",
    "p_anxiety",
    "p_activity",
    "score_gaze",
    "score_attention",
    "score_positive_affect",
    "score_negative_emotionality",
    "score_vocalization",
    "score_anxiety",
    "score_activity",
    "composite_social_engagement",
    "composite_negative_emotionality",
    "composite_anxiety",
    "composite_activity",
    "composite_p_social_engagement",
    "composite_p_negative_emotionality",
    "composite_p_anxiety",
    "composite_p_activity",
    "nod_events_per_min",
    "shake_events_per_min",
    "stillness_fraction",
    "mean_movement_energy",
    "hand_away_fraction",
    "hand_to_head_fraction",
    "arms_crossed_fraction",
    "mar_active_fraction",
    "expr_anger",
    "expr_disgust",
    "expr_fear",
    "expr_happiness",
    "expr_sadness",
    "expr_surprise",
    "expr_neutral",
    "gaze_ref_defaulted",
    "missing_codes",
    "config_hash",
];

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Serializes scored clips as CSV, one row per clip, in input order.
pub fn scores_csv(rows: &[ClipScores], config_hash: &str) -> String {
    let mut out = SCORES_HEADER.join(",");
    out.push('\n');
    for row in rows {
        let r = &row.scored.rates;
        let s = &row.scored.scores;
        let mut cells: Vec<String> = vec![
            row.participant_id.clone(),
            row.group.to_string(),
            row.chapter.to_string(),
            row.clip_id(),
        ];
        cells.extend(r.code_fractions().map(opt));
        cells.extend(s.code_scores().map(opt));
        cells.extend(s.composites().map(opt));
        cells.extend(r.composite_fractions().map(opt));
        cells.extend(
            [
                r.nod_events_per_min,
                r.shake_events_per_min,
                r.stillness_fraction,
                r.mean_movement_energy,
                r.hand_away_fraction,
                r.hand_to_head_fraction,
                r.arms_crossed_fraction,
                r.mar_active_fraction,
            ]
            .map(opt),
        );
        match r.expression_fractions {
            Some(fracs) => cells.extend(fracs.map(|f| fmt_f64(f))),
            None => cells.extend(std::iter::repeat(String::new()).take(7)),
        }
        cells.push(r.gaze_ref_defaulted.to_string());
        cells.push(
            row.scored
                .missing
                .iter()
                .map(|m| format!("{}:{}", m.code, m.channel))
                .collect::<Vec<_>>()
                .join(";"),
        );
        cells.push(config_hash.to_string());
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn write_scores_csv(
    path: &Path,
    rows: &[ClipScores],
    config_hash: &str,
) -> Result<(), ReportError> {
    std::fs::write(path, scores_csv(rows, config_hash)).map_err(io_err(path))
}

/// A parsed scores CSV: the hash it was produced under plus its rows.
#[derive(Debug)]
pub struct ScoresFile {
    pub config_hash: String,
    pub rows: Vec<ClipScores>,
}

/// Reads a scores CSV back into full per-clip records.
///
/// The stored scores are authoritative; nothing is recomputed. All rows
/// must carry the same config hash.
pub fn read_scores_csv(path: &Path) -> Result<ScoresFile, ReportError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize, reason: String| ReportError::BadCsv {
        path: path.display().to_string(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| bad(1, "empty file".to_string()))?;
    if header != SCORES_HEADER.join(",") {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }

    let mut rows = Vec::new();
    let mut config_hash: Option<String> = None;
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != SCORES_HEADER.len() {
            return Err(bad(
                lineno,
                format!(
                    "expected {} fields, got {}",
                    SCORES_HEADER.len(),
                    cells.len()
                ),
            ));
        }
        let fopt = |i: usize| -> Result<Option<f64>, ReportError> {
            let cell = cells[i];
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse::<f64>().map(Some).map_err(|_| {
                bad(
                    lineno,
                    format!("column {}: bad number {cell:?}", SCORES_HEADER[i]),
                )
            })
        };

        let group: Group = cells[1]
            .parse()
            .map_err(|reason: String| bad(lineno, reason))?;
        let chapter: Chapter = cells[2]
            .parse()
            .map_err(|reason: String| bad(lineno, reason))?;

        let mut fractions = [None; 7];
        let mut scores = [None; 7];
        let mut composites = [None; 4];
        let mut composite_fractions = [None; 4];
        for k in 0..7 {
            fractions[k] = fopt(4 + k)?;
            scores[k] = fopt(11 + k)?;
        }
        for k in 0..4 {
            composites[k] = fopt(18 + k)?;
            composite_fractions[k] = fopt(22 + k)?;
        }
        let mut expr = [0.0; 7];
        let mut expr_any = false;
        for k in 0..7 {
            if let Some(v) = fopt(34 + k)? {
                expr[k] = v;
                expr_any = true;
            }
        }

        let rates = ActionRates {
            p_gaze: fractions[0],
            p_attention: fractions[1],
            p_positive_affect: fractions[2],
            p_negative_emotionality: fractions[3],
            p_vocalization: fractions[4],
            p_anxiety: fractions[5],
            p_activity: fractions[6],
            nod_events_per_min: fopt(26)?,
            shake_events_per_min: fopt(27)?,
            stillness_fraction: fopt(28)?,
            mean_movement_energy: fopt(29)?,
            hand_away_fraction: fopt(30)?,
            hand_to_head_fraction: fopt(31)?,
            arms_crossed_fraction: fopt(32)?,
            mar_active_fraction: fopt(33)?,
            expression_fractions: expr_any.then_some(expr),
            gaze_ref_defaulted: cells[41] == "true",
        };
        let cib = CibScores {
            gaze: scores[0],
            attention: scores[1],
            positive_affect: scores[2],
            negative_emotionality: scores[3],
            vocalization: scores[4],
            anxiety: scores[5],
            activity: scores[6],
            social_engagement: composites[0],
        };
        let mut missing = Vec::new();
        if !cells[42].is_empty() {
            for entry in cells[42].split(';') {
                let (code, channel) = entry
                    .split_once(':')
                    .ok_or_else(|| bad(lineno, format!("bad missing entry {entry:?}")))?;
                let code = CODE_NAMES
                    .iter()
                    .find(|&&c| c == code)
                    .ok_or_else(|| bad(lineno, format!("unknown code {code:?}")))?;
                missing.push(MissingCode {
                    code,
                    channel: channel.to_string(),
                });
            }
        }

        match &config_hash {
            None => config_hash = Some(cells[43].to_string()),
            Some(h) if h != cells[43] => {
                return Err(bad(
                    lineno,
                    format!("config hash {} differs from {}", cells[43], h),
                ));
            }
            Some(_) => {}
        }

        rows.push(ClipScores {
            participant_id: cells[0].to_string(),
            chapter,
            group,
            scored: ScoredClip {
                rates,
                scores: cib,
                missing,
            },
        });
    }
    Ok(ScoresFile {
        config_hash: config_hash.unwrap_or_default(),
        rows,
    })
}

/// Header of the per-clip data-quality CSV.
pub const QUALITY_HEADER: &str = "participant_id,chapter,channel,missing_before,\
missing_after,clip_interpolated_samples,config_hash";

/// Serializes per-clip channel quality, one row per clip and channel, in
/// input order.
///
/// `missing_before` is the fraction of window frames below the confidence
/// floor before gap interpolation and `missing_after` the fraction
/// interpolation could not bridge; the interpolated sample count covers
/// the whole clip and repeats on each of its channel rows.
pub fn quality_csv(clips: &[crate::ingest::ClipSegment], config_hash: &str) -> String {
    let mut out = String::from(QUALITY_HEADER);
    out.push('\n');
    for seg in clips {
        for ch in &seg.quality.channels {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                seg.participant_id,
                seg.chapter,
                ch.channel,
                fmt_f64(ch.missing_before),
                fmt_f64(ch.missing_after),
                seg.quality.interpolated_samples,
                config_hash
            );
        }
    }
    out
}

/// One agreement result row.
#[derive(Debug, Clone)]
pub struct KappaRow {
    /// Which pair of raters, e.g. `machine_vs_rater_a`.
    pub comparison: String,
    pub code: String,
    /// `unweighted` or `linear`.
    pub weighting: String,
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    pub n: usize,
}

pub const KAPPA_HEADER: &str =
    "comparison,code,weighting,kappa,observed_agreement,expected_agreement,n,config_hash";

pub fn kappa_csv(rows: &[KappaRow], config_hash: &str) -> String {
    let mut out = String::from(KAPPA_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{config_hash}",
            r.comparison,
            r.code,
            r.weighting,
            fmt_f64(r.kappa),
            fmt_f64(r.observed_agreement),
            fmt_f64(r.expected_agreement),
            r.n
        );
    }
    out
}

/// One per-code correlation row between two raters.
#[derive(Debug, Clone)]
pub struct CorrelationRow {
    pub comparison: String,
    pub code: String,
    pub n: usize,
    pub pearson: f64,
    pub spearman: f64,
}

pub const CORRELATION_HEADER: &str = "comparison,code,n,pearson,spearman,config_hash";

pub fn correlation_csv(rows: &[CorrelationRow], config_hash: &str) -> String {
    let mut out = String::from(CORRELATION_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{config_hash}",
            r.comparison,
            r.code,
            r.n,
            fmt_f64(r.pearson),
            fmt_f64(r.spearman)
        );
    }
    out
}

/// One paired rater-bias test row.
#[derive(Debug, Clone)]
pub struct BiasRow {
    pub comparison: String,
    pub code: String,
    pub n: usize,
    pub mean_diff: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

pub const BIAS_HEADER: &str = "comparison,code,n,mean_diff,t,df,p,config_hash";

pub fn bias_csv(rows: &[BiasRow], config_hash: &str) -> String {
    let mut out = String::from(BIAS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{config_hash}",
            r.comparison,
            r.code,
            r.n,
            fmt_f64(r.mean_diff),
            fmt_f64(r.t),
            fmt_f64(r.df),
            fmt_f64(r.p)
        );
    }
    out
}

/// One tested contrast with its multiplicity-adjusted decision.
#[derive(Debug, Clone)]
pub struct ContrastRow {
    pub contrast: String,
    pub wilks_lambda: f64,
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
    pub p_adjusted: f64,
    pub rejected: bool,
}

pub const MANOVA_HEADER: &str =
    "contrast,wilks_lambda,f,df1,df2,p,p_adjusted,rejected,config_hash";

pub fn manova_csv(rows: &[ContrastRow], config_hash: &str) -> String {
    let mut out = String::from(MANOVA_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{config_hash}",
            r.contrast,
            fmt_f64(r.wilks_lambda),
            fmt_f64(r.f),
            fmt_f64(r.df1),
            fmt_f64(r.df2),
            fmt_f64(r.p),
            fmt_f64(r.p_adjusted),
            r.rejected
        );
    }
    out
}

pub const METRICS_HEADER: &str = "model,plan,folds,resample,threshold,n_pos,n_neg,auc,f1,accuracy,tp,fp,tn,fn,fell_back_to_loo,config_hash";

/// Serializes one cross-validation evaluation as a single-row CSV.
pub fn metrics_csv(
    report: &crate::classify::CvReport,
    settings: &crate::classify::CvSettings,
    config_hash: &str,
) -> String {
    let m = &report.pooled;
    let c = &m.confusion;
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{config_hash}",
        settings.model,
        report.plan,
        report.fold_sizes.len(),
        settings.resample,
        fmt_f64(settings.threshold),
        m.n_pos,
        m.n_neg,
        fmt_f64(m.auc),
        fmt_f64(m.f1),
        fmt_f64(m.accuracy),
        c.tp,
        c.fp,
        c.tn,
        c.fn_,
        report.fell_back_to_loo
    );
    out
}

pub const OOF_HEADER: &str = "participant_id,label,score,config_hash";

/// Serializes the pooled out-of-fold scores, one row per participant.
pub fn oof_csv(report: &crate::classify::CvReport, config_hash: &str) -> String {
    let mut out = String::from(OOF_HEADER);
    out.push('\n');
    for s in &report.oof {
        let _ = writeln!(
            out,
            "{},{},{},{config_hash}",
            s.participant_id,
            if s.label { 1 } else { 0 },
            fmt_f64(s.score)
        );
    }
    out
}

pub const IMPORTANCE_HEADER: &str = "feature,importance,config_hash";

/// Serializes normalized feature importances, descending.
pub fn importance_csv(names: &[String], importances: &[f64], config_hash: &str) -> String {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| {
        importances[b]
            .partial_cmp(&importances[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(names[a].cmp(&names[b]))
    });
    let mut out = String::from(IMPORTANCE_HEADER);
    out.push('\n');
    for i in order {
        let _ = writeln!(out, "{},{},{config_hash}", names[i], fmt_f64(importances[i]));
    }
    out
}

/// The one-line power report.
pub fn power_line(effect_size: f64, n_per_group: u64, achieved_power: f64) -> String {
    format!(
        "d={} n_per_group={n_per_group} total_n={} achieved_power={}\n",
        fmt_f64(effect_size),
        2 * n_per_group,
        fmt_f64(achieved_power)
    )
}

/// Run metadata: command, config hash, full effective configuration, and
/// the single timestamp line any byte-comparison must skip.
pub fn run_info(command: &str, cfg: &Config) -> String {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "command={command}");
    let _ = writeln!(out, "config_hash={}", cfg.hash());
    let _ = writeln!(out, "generated_unix_s={now}");
    let _ = writeln!(out, "--- effective configuration ---");
    out.push_str(&cfg.canonical_string());
    out
}

/// Writes a string artifact, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(path, content).map_err(io_err(path))
}
