//! Computes Cohen's kappa and rater bias diagnostics.
//!
//! Run with `cargo run --example agreement`. Generates a doubly coded
//! synthetic study, scores it, then compares the machine scores with the
//! simulated human rater code by code: linearly weighted kappa, Pearson
//! and Spearman correlation, and a paired t-test for systematic bias,
//! alongside the published human-human agreement benchmark.

use cib::codes::{score_segment, CODE_NAMES};
use cib::ingest::load_study;
use cib::stats::{
    cohens_kappa, paired_t_test, pearson, spearman, Weighting, HUMAN_HUMAN_BENCHMARK_KAPPA,
};
use cib::synth::{generate_study, read_human_csv, StudySpec};
use cib::Config;
use std::collections::HashMap;

fn main() {
    let cfg = Config::default();
    let dir = std::env::temp_dir().join("cib_example_agreement");
    let spec = StudySpec {
        n_ocd: 8,
        n_no_ocd: 8,
        seed: 23,
        ..StudySpec::default()
    };
    let summary = generate_study(&spec, &dir).expect("generate study");

    let load = load_study(&summary.manifest_path, &cfg).expect("load study");
    let machine: Vec<_> = load
        .clips
        .iter()
        .map(|seg| score_segment(seg, &cfg).expect("score clip"))
        .collect();
    let human = read_human_csv(&summary.human_path).expect("read human scores");

    // Index the first rater's scores by (clip, code).
    let rater_a: HashMap<(String, String), f64> = human
        .iter()
        .filter(|h| h.rater == "rater_a")
        .map(|h| ((h.clip_id.clone(), h.code.clone()), h.score))
        .collect();

    println!(
        "machine vs rater_a over {} clips (human-human benchmark kappa {}):\n",
        machine.len(),
        HUMAN_HUMAN_BENCHMARK_KAPPA
    );
    println!(
        "{:<22} {:>7} {:>9} {:>9} {:>11} {:>8}",
        "code", "kappa", "pearson", "spearman", "bias", "p"
    );
    for (i, code) in CODE_NAMES.iter().enumerate() {
        let mut ours = Vec::new();
        let mut theirs = Vec::new();
        for clip in &machine {
            let key = (clip.clip_id(), code.to_string());
            if let (Some(score), Some(&h)) =
                (clip.scored.scores.code_scores()[i], rater_a.get(&key))
            {
                ours.push(score);
                theirs.push(h);
            }
        }
        let kappa = cohens_kappa(&ours, &theirs, Weighting::Linear).expect("kappa");
        let r = pearson(&ours, &theirs).expect("pearson");
        let rho = spearman(&ours, &theirs).expect("spearman");
        let bias = paired_t_test(&ours, &theirs).expect("paired t");
        let flag = if kappa.kappa >= HUMAN_HUMAN_BENCHMARK_KAPPA {
            " (meets benchmark)"
        } else {
            ""
        };
        println!(
            "{:<22} {:>7.3} {:>9.3} {:>9.3} {:>+11.3} {:>8.3}{flag}",
            code, kappa.kappa, r, rho, bias.mean_diff, bias.p_two_sided
        );
    }

    println!(
        "\nbias is the mean (machine - human) score difference; its p-value\n\
         comes from the paired t-test, so values near zero with large p mean\n\
         no systematic over- or under-scoring."
    );
}
