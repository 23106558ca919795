//! Ingests frame streams and derives behavioral scores.
//!
//! Run with `cargo run --example score_study [manifest.csv]`. Without an
//! argument it first generates a small synthetic study to score. Shows the
//! load summary, the per-code fractions and half-point scores for a few
//! clips, and writes the full scores table as CSV.

use cib::codes::{percentage_to_score, score_segment, CODE_NAMES};
use cib::ingest::load_study;
use cib::report::{quality_csv, write_scores_csv, write_text};
use cib::synth::{generate_study, StudySpec};
use cib::Config;
use std::path::PathBuf;

fn main() {
    let cfg = Config::default();
    let manifest: PathBuf = match std::env::args().nth(1) {
        Some(path) => path.into(),
        None => {
            let dir = std::env::temp_dir().join("cib_example_score_study");
            let spec = StudySpec {
                n_ocd: 3,
                n_no_ocd: 3,
                seed: 11,
                ..StudySpec::default()
            };
            let summary = generate_study(&spec, &dir).expect("generate study");
            println!("no manifest given, generated one at {}\n", dir.display());
            summary.manifest_path
        }
    };

    let load = load_study(&manifest, &cfg).expect("load study");
    for failure in &load.failures {
        eprintln!("skipped: {failure}");
    }
    println!("loaded {} clips:", load.clips.len());
    for ((group, chapter), count) in load.summary() {
        println!("  {group} / {chapter}: {count}");
    }

    let scored: Vec<_> = load
        .clips
        .iter()
        .map(|seg| score_segment(seg, &cfg).expect("score clip"))
        .collect();

    println!("\nscale: fraction p maps to clamp(round_half(1 + 4p), 1, 5)");
    println!(
        "  e.g. 0.00 -> {:.1}, 0.50 -> {:.1}, 1.00 -> {:.1}",
        percentage_to_score(0.0),
        percentage_to_score(0.5),
        percentage_to_score(1.0)
    );

    println!("\nfirst clips (fraction -> score per code):");
    for clip in scored.iter().take(3) {
        println!("  {}", clip.clip_id());
        let fractions = clip.scored.rates.code_fractions();
        let scores = clip.scored.scores.code_scores();
        for (i, code) in CODE_NAMES.iter().enumerate() {
            match (fractions[i], scores[i]) {
                (Some(p), Some(s)) => println!("    {code:<22} {p:.3} -> {s:.1}"),
                _ => println!("    {code:<22} (channel missing)"),
            }
        }
    }

    let out_dir = manifest
        .parent()
        .unwrap_or_else(|| std::path::Path::new("."))
        .to_path_buf();
    let out = out_dir.join("scores.csv");
    write_scores_csv(&out, &scored, &cfg.hash()).expect("write scores");
    write_text(
        &out_dir.join("quality.csv"),
        &quality_csv(&load.clips, &cfg.hash()),
    )
    .expect("write quality");
    println!("\nwrote {} rows to {}", scored.len(), out.display());
    println!("channel quality summary -> {}", out_dir.join("quality.csv").display());
}
