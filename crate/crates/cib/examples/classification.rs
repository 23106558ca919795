//! Trains and cross-validates the diagnostic models.
//!
//! Run with `cargo run --example classification`. Generates a synthetic
//! study, scores it, assembles one feature row per participant (both
//! chapters, codes plus composites), then cross-validates the penalized
//! logistic model and the random forest with stratified folds. Every fold
//! is resampled and fit strictly inside its training split, so the pooled
//! out-of-fold metrics are honest.

use cib::classify::{build_dataset, cross_validate, CvSettings, ModelKind, Resample};
use cib::codes::score_segment;
use cib::ingest::load_study;
use cib::synth::{generate_study, StudySpec};
use cib::Config;

fn main() {
    let cfg = Config::default();
    let dir = std::env::temp_dir().join("cib_example_classification");
    let spec = StudySpec {
        n_ocd: 15,
        n_no_ocd: 12,
        seed: 3,
        ..StudySpec::default()
    };
    let summary = generate_study(&spec, &dir).expect("generate study");

    let load = load_study(&summary.manifest_path, &cfg).expect("load study");
    let scored: Vec<_> = load
        .clips
        .iter()
        .map(|seg| score_segment(seg, &cfg).expect("score clip"))
        .collect();

    let ds = build_dataset(&scored, cfg.use_scores).expect("build dataset");
    for (participant, reason) in &ds.excluded {
        eprintln!("excluded {participant}: {reason}");
    }
    println!(
        "dataset: {} participants ({} OCD, {} comparison), {} features each",
        ds.rows.len(),
        ds.n_pos(),
        ds.n_neg(),
        ds.feature_names.len()
    );

    for model in [ModelKind::Logistic, ModelKind::Forest] {
        let settings = CvSettings {
            model,
            folds: cfg.cv_folds,
            seed: cfg.seed,
            resample: Resample::None,
            logistic_l2: cfg.logistic_l2,
            n_trees: 200,
            threshold: 0.5,
        };
        let report = cross_validate(&ds, &settings).expect("cross-validate");
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        let m = &report.pooled;
        println!(
            "\n{model} ({}): auc {:.3}, F1 {:.3}, accuracy {:.3}",
            report.plan, m.auc, m.f1, m.accuracy
        );
        println!(
            "  confusion at threshold {}: tp {} fp {} tn {} fn {}",
            settings.threshold, m.confusion.tp, m.confusion.fp, m.confusion.tn, m.confusion.fn_
        );

        // A peek at the pooled out-of-fold scores behind those numbers.
        let mut oof = report.oof.clone();
        oof.sort_by(|a, b| b.score.total_cmp(&a.score));
        println!("  strongest out-of-fold predictions:");
        for o in oof.iter().take(3) {
            let truth = if o.label { "OCD" } else { "comparison" };
            println!("    {} score {:.3} (actually {truth})", o.participant_id, o.score);
        }
    }
}
