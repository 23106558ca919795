//! Command-line pipeline driver.
//!
//! One binary wires the whole study flow: `synth` fabricates a ground-truth
//! study, `score` turns frame streams into per-clip scores, `agree`,
//! `manova`, and `classify` run the three analysis stages, `power` solves
//! the coder-bias sample size, and `report` bundles everything into one
//! directory with an index. Every artifact embeds the configuration hash,
//! and downstream commands refuse scores produced under a different
//! configuration unless `--force` is given.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::classify::{
    build_dataset, cross_validate, roc_points, train_forest, train_logistic, CvSettings,
    ForestConfig, ModelKind, Resample,
};
use crate::codes::{score_segment, ClipScores, CODE_NAMES};
use crate::config::Config;
use crate::ingest::{load_study, Chapter, ClipSegment, Group};
use crate::plot::{heatmap_svg, qq_svg, roc_svg};
use crate::report::{
    bias_csv, check_hash, correlation_csv, importance_csv, kappa_csv, manova_csv, metrics_csv,
    oof_csv, power_line, quality_csv, read_scores_csv, run_info, scores_csv, write_text, BiasRow,
    ContrastRow, CorrelationRow, KappaRow,
};
use crate::stats::{
    benjamini_hochberg, chapter_contrast, cohens_kappa, composite_rows, paired_t_test, pearson,
    solve_sample_size, spearman, CompositeRow, ContrastDesign, PowerSpec, Tails, Weighting,
    HUMAN_HUMAN_BENCHMARK_KAPPA,
};
use crate::synth::{generate_study, read_human_csv, GroupEffects, HumanScore, StudySpec};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "CIB_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Codes(#[from] crate::codes::CodesError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error(transparent)]
    Classify(#[from] crate::classify::ClassifyError),
    #[error(transparent)]
    Synth(#[from] crate::synth::SynthError),
    #[error(transparent)]
    Report(#[from] crate::report::ReportError),
    #[error("{n} clip(s) failed to load:\n{listing}")]
    ClipFailures { n: usize, listing: String },
    #[error("only {shared} clip(s) shared between machine and human scores; need at least 2")]
    NoOverlap { shared: usize },
    #[error("bad flag value: {detail}")]
    BadFlag { detail: String },
}

/// Behavioral coding pipeline for interview-video feature streams.
#[derive(Debug, Parser)]
#[command(name = "cib", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every clip in a manifest and write the scores CSV.
    Score(ScoreArgs),
    /// Compare machine scores against human coder scores.
    Agree(AgreeArgs),
    /// Solve the paired-coder sample size for a target power.
    Power(PowerArgs),
    /// Run the group and chapter contrasts with FDR-adjusted decisions.
    Manova(ManovaArgs),
    /// Cross-validate OCD vs no-OCD classification from clip scores.
    Classify(ClassifyArgs),
    /// Generate a synthetic study with ground-truth sidecars.
    Synth(SynthArgs),
    /// Run the whole pipeline and bundle every artifact in one directory.
    Report(ReportArgs),
}

/// Configuration file and override flags shared by most subcommands.
#[derive(Debug, Args, Clone)]
pub struct ConfigArgs {
    /// Key=value config file.
    #[arg(long, value_name = "FILE", env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Override one config entry, e.g. --set tau_expr=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then --set overrides, then validation.
    pub fn load(&self) -> Result<Config, CliError> {
        let mut cfg = Config::default();
        if let Some(path) = &self.config {
            cfg.merge_file(path)?;
        }
        for entry in &self.set {
            let (key, value) = entry.split_once('=').ok_or_else(|| CliError::BadFlag {
                detail: format!("--set needs KEY=VALUE, got {entry:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "gaze_ref_file" {
                cfg.load_gaze_refs(Path::new(value))?;
            } else {
                cfg.set(key, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Study manifest CSV.
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Output directory for scores.csv and run_info.txt.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// Machine scores CSV produced by the score command.
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    /// Human scores CSV (clip_id,rater,code,score).
    #[arg(long, value_name = "FILE")]
    pub human: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Proceed even if the scores were produced under a different config.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Smallest between-coder mean difference worth detecting.
    #[arg(long)]
    pub diff: f64,
    /// Score standard deviation.
    #[arg(long)]
    pub sd: f64,
    /// Type I error rate.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Target power.
    #[arg(long, default_value_t = 0.80)]
    pub power: f64,
    /// 1 for a one-sided test, 2 for two-sided.
    #[arg(long, default_value_t = 2)]
    pub tails: u8,
    /// Optional directory to also write power.txt into.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ManovaArgs {
    /// Machine scores CSV produced by the score command.
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Proceed even if the scores were produced under a different config.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Machine scores CSV produced by the score command.
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Classifier: logistic or forest.
    #[arg(long, default_value = "logistic")]
    pub model: String,
    /// Training-fold rebalancing: none, oversample, or undersample.
    #[arg(long, default_value = "none")]
    pub resample: String,
    /// Decision threshold on the predicted score.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Proceed even if the scores were produced under a different config.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for the study.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Participants in the OCD group.
    #[arg(long, default_value_t = 25)]
    pub n_ocd: usize,
    /// Participants in the no-OCD group.
    #[arg(long, default_value_t = 12)]
    pub n_no_ocd: usize,
    /// Clip duration in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub duration_s: f64,
    /// Frames per second.
    #[arg(long, default_value_t = 25.0)]
    pub fps: f64,
    /// Master seed; the same seed reproduces the study byte for byte.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Remove the built-in group effects (null study).
    #[arg(long)]
    pub zero_effect: bool,
    /// Between-clip standard deviation of drawn code fractions.
    #[arg(long, default_value_t = 0.08)]
    pub noise_sd: f64,
    /// Simulated human coder noise on the fraction scale.
    #[arg(long, default_value_t = 0.05)]
    pub human_sd: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Study manifest CSV.
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Optional human scores CSV; enables the agreement section.
    #[arg(long, value_name = "FILE")]
    pub human: Option<PathBuf>,
    /// Bundle output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Classifier: logistic or forest.
    #[arg(long, default_value = "logistic")]
    pub model: String,
    /// Training-fold rebalancing: none, oversample, or undersample.
    #[arg(long, default_value = "none")]
    pub resample: String,
    /// Decision threshold on the predicted score.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Mean difference for the power section.
    #[arg(long, default_value_t = 1.0)]
    pub power_diff: f64,
    /// Score standard deviation for the power section.
    #[arg(long, default_value_t = 0.9)]
    pub power_sd: f64,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Parses the process arguments and runs; meant to be called from `main`.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Dispatches one parsed invocation.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Score(args) => cmd_score(&args),
        Command::Agree(args) => cmd_agree(&args),
        Command::Power(args) => cmd_power(&args),
        Command::Manova(args) => cmd_manova(&args),
        Command::Classify(args) => cmd_classify(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Report(args) => cmd_report(&args),
    }
}

/// Loads and scores every clip of a manifest, sorted by clip id.
///
/// Failures are listed on stderr; in strict mode any failure aborts the
/// command.
fn score_study(manifest: &Path, cfg: &Config) -> Result<ScoredStudy, CliError> {
    let study = load_study(manifest, cfg)?;
    for f in &study.failures {
        eprintln!("clip failed: {f}");
    }
    if cfg.strict && !study.failures.is_empty() {
        let listing = study
            .failures
            .iter()
            .map(|f| format!("  {f}"))
            .collect::<Vec<_>>()
            .join("\n");
        return Err(CliError::ClipFailures {
            n: study.failures.len(),
            listing,
        });
    }
    // Sort the segments first so scores and quality rows share one order.
    let mut clips = study.clips;
    clips.sort_by_key(|seg| format!("{}/{}", seg.participant_id, seg.chapter));
    let scores: Vec<ClipScores> = clips
        .par_iter()
        .map(|seg| score_segment(seg, cfg))
        .collect::<Result<_, _>>()?;
    Ok(ScoredStudy { scores, clips })
}

/// A scored study: the per-clip scores plus the loaded segments they came
/// from, both sorted by clip id.
struct ScoredStudy {
    scores: Vec<ClipScores>,
    clips: Vec<ClipSegment>,
}

fn cmd_score(args: &ScoreArgs) -> Result<(), CliError> {
    let cfg = args.config.load()?;
    let study = score_study(&args.manifest, &cfg)?;
    let out = args.out.join("scores.csv");
    write_text(&out, &scores_csv(&study.scores, &cfg.hash()))?;
    write_text(
        &args.out.join("quality.csv"),
        &quality_csv(&study.clips, &cfg.hash()),
    )?;
    write_text(&args.out.join("run_info.txt"), &run_info("score", &cfg))?;
    println!("scored {} clips -> {}", study.scores.len(), out.display());
    Ok(())
}

/// Reads a scores CSV and enforces the config-hash handoff rule.
fn read_checked_scores(
    path: &Path,
    cfg: &Config,
    force: bool,
) -> Result<Vec<ClipScores>, CliError> {
    let file = read_scores_csv(path)?;
    if file.config_hash != cfg.hash() && force {
        eprintln!(
            "warning: proceeding despite config hash mismatch ({} in file, {} now)",
            file.config_hash,
            cfg.hash()
        );
    }
    check_hash(&file.config_hash, &cfg.hash(), force)?;
    Ok(file.rows)
}

/// Everything the agreement stage produces, ready for serialization.
#[derive(Debug)]
struct AgreementTables {
    kappa_rows: Vec<KappaRow>,
    corr_rows: Vec<CorrelationRow>,
    bias_rows: Vec<BiasRow>,
    comparison_labels: Vec<String>,
    /// Linear-weighted kappa per comparison x code, for the heatmap.
    kappa_grid: Vec<Vec<Option<f64>>>,
    /// Pearson correlation per comparison x code, for the heatmap.
    corr_grid: Vec<Vec<Option<f64>>>,
    shared_clips: usize,
    warnings: Vec<String>,
}

type ScoreTable = BTreeMap<String, [Option<f64>; 7]>;

fn paired_series(a: &ScoreTable, b: &ScoreTable, k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (clip, va) in a {
        if let Some(vb) = b.get(clip) {
            if let (Some(x), Some(y)) = (va[k], vb[k]) {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    (xs, ys)
}

/// Aligns machine and human scores per code and computes kappa,
/// correlations, and the paired bias test for every rater comparison.
///
/// The machine is compared against each rater, and raters against each
/// other when at least two are present. In every `x_vs_y` row the signed
/// difference is x minus y.
fn agreement_tables(
    machine: &[ClipScores],
    human: &[HumanScore],
) -> Result<AgreementTables, CliError> {
    let mut machine_table: ScoreTable = BTreeMap::new();
    for clip in machine {
        machine_table.insert(clip.clip_id(), clip.scored.scores.code_scores());
    }

    let mut warnings = Vec::new();
    let mut raters: BTreeMap<String, ScoreTable> = BTreeMap::new();
    let mut unknown_codes: BTreeSet<String> = BTreeSet::new();
    for h in human {
        match CODE_NAMES.iter().position(|c| *c == h.code) {
            Some(k) => {
                raters
                    .entry(h.rater.clone())
                    .or_default()
                    .entry(h.clip_id.clone())
                    .or_insert([None; 7])[k] = Some(h.score);
            }
            None => {
                unknown_codes.insert(h.code.clone());
            }
        }
    }
    for code in unknown_codes {
        warnings.push(format!("ignoring unknown code {code:?} in human scores"));
    }

    let human_clips: BTreeSet<&String> = raters.values().flat_map(|t| t.keys()).collect();
    let shared_clips = machine_table
        .keys()
        .filter(|id| human_clips.contains(id))
        .count();
    if shared_clips < 2 {
        return Err(CliError::NoOverlap {
            shared: shared_clips,
        });
    }

    let mut comparisons: Vec<(String, &ScoreTable, &ScoreTable)> = Vec::new();
    for (rater, table) in &raters {
        comparisons.push((format!("machine_vs_{rater}"), &machine_table, table));
    }
    let rater_names: Vec<&String> = raters.keys().collect();
    for i in 0..rater_names.len() {
        for j in i + 1..rater_names.len() {
            comparisons.push((
                format!("{}_vs_{}", rater_names[i], rater_names[j]),
                &raters[rater_names[i]],
                &raters[rater_names[j]],
            ));
        }
    }

    let mut tables = AgreementTables {
        kappa_rows: Vec::new(),
        corr_rows: Vec::new(),
        bias_rows: Vec::new(),
        comparison_labels: Vec::new(),
        kappa_grid: Vec::new(),
        corr_grid: Vec::new(),
        shared_clips,
        warnings,
    };

    for (label, a, b) in &comparisons {
        tables.comparison_labels.push(label.clone());
        let mut kappa_cells = Vec::with_capacity(7);
        let mut corr_cells = Vec::with_capacity(7);
        for (k, code) in CODE_NAMES.iter().enumerate() {
            let (xs, ys) = paired_series(a, b, k);
            if xs.len() < 2 {
                tables
                    .warnings
                    .push(format!("{label}/{code}: only {} pair(s), skipped", xs.len()));
                kappa_cells.push(None);
                corr_cells.push(None);
                continue;
            }
            let mut linear_kappa = None;
            for (weighting, name) in [(Weighting::Unweighted, "unweighted"), (Weighting::Linear, "linear")] {
                match cohens_kappa(&xs, &ys, weighting) {
                    Ok(r) => {
                        if weighting == Weighting::Linear {
                            linear_kappa = Some(r.kappa);
                        }
                        tables.kappa_rows.push(KappaRow {
                            comparison: label.clone(),
                            code: code.to_string(),
                            weighting: name.to_string(),
                            kappa: r.kappa,
                            observed_agreement: r.observed_agreement,
                            expected_agreement: r.expected_agreement,
                            n: r.n,
                        });
                    }
                    Err(e) => tables.warnings.push(format!("{label}/{code}: kappa: {e}")),
                }
            }
            kappa_cells.push(linear_kappa);
            match (pearson(&xs, &ys), spearman(&xs, &ys)) {
                (Ok(p), Ok(s)) => {
                    corr_cells.push(Some(p));
                    tables.corr_rows.push(CorrelationRow {
                        comparison: label.clone(),
                        code: code.to_string(),
                        n: xs.len(),
                        pearson: p,
                        spearman: s,
                    });
                }
                (p, s) => {
                    let e = p.err().or(s.err()).expect("one side failed");
                    tables
                        .warnings
                        .push(format!("{label}/{code}: correlation: {e}"));
                    corr_cells.push(None);
                }
            }
            match paired_t_test(&xs, &ys) {
                Ok(t) => tables.bias_rows.push(BiasRow {
                    comparison: label.clone(),
                    code: code.to_string(),
                    n: t.n,
                    mean_diff: t.mean_diff,
                    t: t.t,
                    df: t.df,
                    p: t.p_two_sided,
                }),
                Err(e) => tables.warnings.push(format!("{label}/{code}: bias t: {e}")),
            }
        }
        tables.kappa_grid.push(kappa_cells);
        tables.corr_grid.push(corr_cells);
    }

    Ok(tables)
}

/// Writes the agreement artifacts; returns the stdout summary lines.
fn run_agree(
    machine: &[ClipScores],
    human: &[HumanScore],
    out_dir: &Path,
    cfg: &Config,
) -> Result<Vec<String>, CliError> {
    let tables = agreement_tables(machine, human)?;
    for w in &tables.warnings {
        eprintln!("warning: {w}");
    }
    let hash = cfg.hash();
    write_text(
        &out_dir.join("kappa.csv"),
        &kappa_csv(&tables.kappa_rows, &hash),
    )?;
    write_text(
        &out_dir.join("correlation.csv"),
        &correlation_csv(&tables.corr_rows, &hash),
    )?;
    write_text(
        &out_dir.join("bias.csv"),
        &bias_csv(&tables.bias_rows, &hash),
    )?;

    let codes: Vec<String> = CODE_NAMES.iter().map(|c| c.to_string()).collect();
    let mut kappa_labels = tables.comparison_labels.clone();
    let mut kappa_grid = tables.kappa_grid.clone();
    kappa_labels.push("human_human_benchmark".to_string());
    kappa_grid.push(vec![Some(HUMAN_HUMAN_BENCHMARK_KAPPA); CODE_NAMES.len()]);
    write_text(
        &out_dir.join("kappa_heatmap.svg"),
        &heatmap_svg(
            &kappa_labels,
            &codes,
            &kappa_grid,
            &format!(
                "Cohen kappa by code (linear weights); human-human benchmark {HUMAN_HUMAN_BENCHMARK_KAPPA}"
            ),
            &hash,
        ),
    )?;
    write_text(
        &out_dir.join("correlation_heatmap.svg"),
        &heatmap_svg(
            &tables.comparison_labels,
            &codes,
            &tables.corr_grid,
            "Pearson correlation by code",
            &hash,
        ),
    )?;

    let mut lines = vec![format!(
        "human-human benchmark kappa: {HUMAN_HUMAN_BENCHMARK_KAPPA}"
    )];
    for (label, cells) in tables.comparison_labels.iter().zip(&tables.kappa_grid) {
        let known: Vec<f64> = cells.iter().flatten().copied().collect();
        if known.is_empty() {
            lines.push(format!("{label}: no comparable codes"));
        } else {
            let mean = known.iter().sum::<f64>() / known.len() as f64;
            lines.push(format!(
                "{label}: mean linear kappa {mean:.3} over {} codes, {} shared clips",
                known.len(),
                tables.shared_clips
            ));
        }
    }
    Ok(lines)
}

fn cmd_agree(args: &AgreeArgs) -> Result<(), CliError> {
    let cfg = args.config.load()?;
    let machine = read_checked_scores(&args.scores, &cfg, args.force)?;
    let human = read_human_csv(&args.human)?;
    let lines = run_agree(&machine, &human, &args.out, &cfg)?;
    write_text(&args.out.join("run_info.txt"), &run_info("agree", &cfg))?;
    for line in lines {
        println!("{line}");
    }
    println!("agreement tables -> {}", args.out.display());
    Ok(())
}

fn cmd_power(args: &PowerArgs) -> Result<(), CliError> {
    let tails = match args.tails {
        1 => Tails::One,
        2 => Tails::Two,
        other => {
            return Err(CliError::BadFlag {
                detail: format!("--tails must be 1 or 2, got {other}"),
            })
        }
    };
    let spec = PowerSpec {
        mean_diff: args.diff,
        sd: args.sd,
        alpha: args.alpha,
        power: args.power,
        tails,
    };
    let solved = solve_sample_size(&spec)?;
    let line = power_line(solved.effect_size, solved.n_per_group, solved.achieved_power);
    print!("{line}");
    if let Some(dir) = &args.out {
        write_text(&dir.join("power.txt"), &line)?;
    }
    Ok(())
}

/// Index of a (group, chapter) cell for residual centering.
fn cell_index(group: Group, chapter: Chapter) -> usize {
    usize::from(group == Group::NoOcd) * 2 + usize::from(chapter == Chapter::Mania)
}

/// Pooled standardized residuals of each composite from its group-chapter
/// cell mean, the raw material for the normality diagnostic.
fn composite_residuals(rows: &[CompositeRow]) -> Vec<f64> {
    let mut pooled = Vec::new();
    for k in 0..4 {
        let mut sums = [0.0; 4];
        let mut counts = [0usize; 4];
        for r in rows {
            let i = cell_index(r.group, r.chapter);
            sums[i] += r.values[k];
            counts[i] += 1;
        }
        let mut resid = Vec::new();
        for r in rows {
            let i = cell_index(r.group, r.chapter);
            if counts[i] > 1 {
                resid.push(r.values[k] - sums[i] / counts[i] as f64);
            }
        }
        if resid.len() < 2 {
            continue;
        }
        let var = resid.iter().map(|r| r * r).sum::<f64>() / (resid.len() - 1) as f64;
        let sd = var.sqrt();
        if sd > 0.0 {
            pooled.extend(resid.iter().map(|r| r / sd));
        } else {
            pooled.extend(resid);
        }
    }
    pooled
}

/// Runs all four pre-registered contrasts with one BH family and writes the
/// contrast table and the QQ diagnostic.
fn run_manova(
    scores: &[ClipScores],
    out_dir: &Path,
    cfg: &Config,
) -> Result<Vec<ContrastRow>, CliError> {
    let (rows, dropped) = composite_rows(scores, cfg.use_scores);
    for clip in &dropped {
        eprintln!("warning: {clip} lacks a composite, excluded from contrasts");
    }
    let mut contrasts = chapter_contrast(&rows, ContrastDesign::BetweenGroupsWithinChapter)?;
    contrasts.extend(chapter_contrast(&rows, ContrastDesign::BetweenChapters)?);
    let ps: Vec<f64> = contrasts.iter().map(|c| c.p).collect();
    let fdr = benjamini_hochberg(&ps, cfg.fdr_q)?;
    let table: Vec<ContrastRow> = contrasts
        .iter()
        .enumerate()
        .map(|(i, c)| ContrastRow {
            contrast: c.label.clone(),
            wilks_lambda: c.wilks_lambda,
            f: c.f,
            df1: c.df1,
            df2: c.df2,
            p: c.p,
            p_adjusted: fdr.adjusted_p[i],
            rejected: fdr.rejected[i],
        })
        .collect();
    let hash = cfg.hash();
    write_text(&out_dir.join("manova.csv"), &manova_csv(&table, &hash))?;
    write_text(
        &out_dir.join("qq.svg"),
        &qq_svg(
            &composite_residuals(&rows),
            "Normal QQ of standardized composite residuals",
            &hash,
        ),
    )?;
    Ok(table)
}

fn cmd_manova(args: &ManovaArgs) -> Result<(), CliError> {
    let cfg = args.config.load()?;
    let machine = read_checked_scores(&args.scores, &cfg, args.force)?;
    let table = run_manova(&machine, &args.out, &cfg)?;
    write_text(&args.out.join("run_info.txt"), &run_info("manova", &cfg))?;
    for row in &table {
        println!(
            "{}: Lambda={:.4} F({:.0},{:.0})={:.3} p={:.4} p_adj={:.4} rejected={}",
            row.contrast,
            row.wilks_lambda,
            row.df1,
            row.df2,
            row.f,
            row.p,
            row.p_adjusted,
            row.rejected,
        );
    }
    println!("contrast table -> {}", args.out.join("manova.csv").display());
    Ok(())
}

fn parse_model(s: &str) -> Result<ModelKind, CliError> {
    s.parse().map_err(|detail| CliError::BadFlag { detail })
}

fn parse_resample(s: &str) -> Result<Resample, CliError> {
    s.parse().map_err(|detail| CliError::BadFlag { detail })
}

/// Cross-validates the diagnosis classifier and writes metrics, out-of-fold
/// scores, feature importances, and the ROC curve.
fn run_classify(
    scores: &[ClipScores],
    out_dir: &Path,
    cfg: &Config,
    model: ModelKind,
    resample: Resample,
    threshold: f64,
) -> Result<String, CliError> {
    let ds = build_dataset(scores, cfg.use_scores)?;
    for (participant, reason) in &ds.excluded {
        eprintln!("warning: {participant} excluded from classification: {reason}");
    }
    let settings = CvSettings {
        model,
        folds: cfg.cv_folds,
        seed: cfg.seed,
        resample,
        logistic_l2: cfg.logistic_l2,
        n_trees: cfg.n_trees,
        threshold,
    };
    let report = cross_validate(&ds, &settings)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let hash = cfg.hash();
    write_text(
        &out_dir.join("metrics.csv"),
        &metrics_csv(&report, &settings, &hash),
    )?;
    write_text(&out_dir.join("oof.csv"), &oof_csv(&report, &hash))?;

    let oof_scores: Vec<f64> = report.oof.iter().map(|o| o.score).collect();
    let oof_labels: Vec<bool> = report.oof.iter().map(|o| o.label).collect();
    let points = roc_points(&oof_scores, &oof_labels)?;
    write_text(
        &out_dir.join("roc.svg"),
        &roc_svg(&points, report.pooled.auc, "Out-of-fold ROC", &hash),
    )?;

    let x = ds.features();
    let y = ds.labels();
    let importances = match model {
        ModelKind::Forest => {
            let fc = ForestConfig {
                n_trees: cfg.n_trees,
                min_leaf: 1,
                seed: cfg.seed,
            };
            train_forest(&x, &y, &fc).map(|m| m.importances)
        }
        ModelKind::Logistic => train_logistic(&x, &y, cfg.logistic_l2, 100)
            .map(|m| m.weights.iter().map(|w| w.abs()).collect()),
    };
    match importances {
        Ok(imp) => write_text(
            &out_dir.join("importance.csv"),
            &importance_csv(&ds.feature_names, &imp, &hash),
        )?,
        Err(e) => eprintln!("warning: final {model} fit failed, no importance.csv: {e}"),
    }

    let m = &report.pooled;
    Ok(format!(
        "{model} {}: auc={:.3} f1={:.3} accuracy={:.3} ({} OCD / {} no_OCD participants)",
        report.plan, m.auc, m.f1, m.accuracy, m.n_pos, m.n_neg
    ))
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let cfg = args.config.load()?;
    let model = parse_model(&args.model)?;
    let resample = parse_resample(&args.resample)?;
    let machine = read_checked_scores(&args.scores, &cfg, args.force)?;
    let summary = run_classify(&machine, &args.out, &cfg, model, resample, args.threshold)?;
    write_text(&args.out.join("run_info.txt"), &run_info("classify", &cfg))?;
    println!("{summary}");
    println!("evaluation files -> {}", args.out.display());
    Ok(())
}

/// The generation spec echoed into the study directory, timestamp-free so
/// reruns with one seed are byte-identical.
fn synth_spec_text(spec: &StudySpec) -> String {
    use crate::config::fmt_f64 as f;
    format!(
        "n_ocd={}\nn_no_ocd={}\nduration_s={}\nfps={}\nseed={}\n\
         effect_social_engagement={}\neffect_negative_emotionality={}\n\
         effect_anxiety={}\neffect_activity={}\nnoise_sd={}\nhuman_sd={}\n\
         rater_b_fraction={}\nnod_hz={}\n",
        spec.n_ocd,
        spec.n_no_ocd,
        f(spec.duration_s),
        f(spec.fps),
        spec.seed,
        f(spec.effects.social_engagement),
        f(spec.effects.negative_emotionality),
        f(spec.effects.anxiety),
        f(spec.effects.activity),
        f(spec.noise_sd),
        f(spec.human_sd),
        f(spec.rater_b_fraction),
        f(spec.nod_hz),
    )
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let spec = StudySpec {
        n_ocd: args.n_ocd,
        n_no_ocd: args.n_no_ocd,
        duration_s: args.duration_s,
        fps: args.fps,
        seed: args.seed,
        effects: if args.zero_effect {
            GroupEffects::zero()
        } else {
            GroupEffects::default()
        },
        noise_sd: args.noise_sd,
        human_sd: args.human_sd,
        ..StudySpec::default()
    };
    let summary = generate_study(&spec, &args.out)?;
    write_text(&args.out.join("spec.txt"), &synth_spec_text(&spec))?;
    println!(
        "synthetic study: {} clips ({} OCD / {} no_OCD) -> {}",
        summary.n_clips,
        summary.n_ocd,
        summary.n_no_ocd,
        summary.out_dir.display()
    );
    println!("manifest: {}", summary.manifest_path.display());
    println!("truth sidecars: {}", summary.truth_path.display());
    println!("human scores: {}", summary.human_path.display());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let cfg = args.config.load()?;
    let model = parse_model(&args.model)?;
    let resample = parse_resample(&args.resample)?;
    let hash = cfg.hash();
    let out = &args.out;

    let study = score_study(&args.manifest, &cfg)?;
    let scores = study.scores;
    write_text(&out.join("scores.csv"), &scores_csv(&scores, &hash))?;
    write_text(&out.join("quality.csv"), &quality_csv(&study.clips, &hash))?;
    println!("scored {} clips", scores.len());

    let mut index: Vec<(String, &str)> = vec![
        (
            "scores.csv".to_string(),
            "per-clip action rates and behavioral scores",
        ),
        (
            "quality.csv".to_string(),
            "per-clip channel quality after windowing and gap filling",
        ),
    ];

    if let Some(human_path) = &args.human {
        let human = read_human_csv(human_path)?;
        let lines = run_agree(&scores, &human, &out.join("agreement"), &cfg)?;
        for line in lines {
            println!("{line}");
        }
        index.extend([
            (
                "agreement/kappa.csv".to_string(),
                "Cohen kappa per comparison, code, and weighting",
            ),
            (
                "agreement/correlation.csv".to_string(),
                "Pearson and Spearman correlation per comparison and code",
            ),
            (
                "agreement/bias.csv".to_string(),
                "paired rater-bias t-test per comparison and code",
            ),
            (
                "agreement/kappa_heatmap.svg".to_string(),
                "kappa heatmap with the human-human benchmark row",
            ),
            (
                "agreement/correlation_heatmap.svg".to_string(),
                "correlation heatmap",
            ),
        ]);
    } else {
        println!("no human scores given; skipping the agreement section");
    }

    let table = run_manova(&scores, &out.join("manova"), &cfg)?;
    let n_rejected = table.iter().filter(|r| r.rejected).count();
    println!(
        "contrasts: {} tested, {} rejected at q={}",
        table.len(),
        n_rejected,
        cfg.fdr_q
    );
    index.extend([
        (
            "manova/manova.csv".to_string(),
            "group and chapter contrasts with BH-adjusted decisions",
        ),
        (
            "manova/qq.svg".to_string(),
            "normal QQ of standardized composite residuals",
        ),
    ]);

    let summary = run_classify(
        &scores,
        &out.join("classify"),
        &cfg,
        model,
        resample,
        args.threshold,
    )?;
    println!("{summary}");
    index.extend([
        (
            "classify/metrics.csv".to_string(),
            "cross-validated classification metrics",
        ),
        (
            "classify/oof.csv".to_string(),
            "out-of-fold scores per participant",
        ),
        (
            "classify/importance.csv".to_string(),
            "feature importances from the full-data fit",
        ),
        ("classify/roc.svg".to_string(), "out-of-fold ROC curve"),
    ]);

    let power = solve_sample_size(&PowerSpec {
        mean_diff: args.power_diff,
        sd: args.power_sd,
        alpha: cfg.alpha,
        power: 0.80,
        tails: Tails::Two,
    })?;
    let line = power_line(power.effect_size, power.n_per_group, power.achieved_power);
    write_text(&out.join("power.txt"), &line)?;
    print!("{line}");
    index.push((
        "power.txt".to_string(),
        "coder-bias sample size for the configured alpha",
    ));

    write_text(&out.join("run_info.txt"), &run_info("report", &cfg))?;
    index.push((
        "run_info.txt".to_string(),
        "effective configuration and invocation record",
    ));

    let mut index_text = format!("config_hash={hash}\n\n");
    for (path, description) in &index {
        index_text.push_str(&format!("{path}\t{description}\n"));
    }
    write_text(&out.join("index.txt"), &index_text)?;
    println!("bundle index -> {}", out.join("index.txt").display());
    Ok(())
}
