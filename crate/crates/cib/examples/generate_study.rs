//! Builds a small synthetic study with known ground truth.
//!
//! Run with `cargo run --example generate_study [out_dir]`. The directory
//! receives a manifest, per-clip frame streams with truth sidecars, the
//! concatenated truth table, and simulated human scores, all reproducible
//! from the seed in the spec.

use cib::synth::{generate_study, GroupEffects, StudySpec};
use std::path::PathBuf;

fn main() {
    let out_dir: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("cib_example_generate_study"));

    let spec = StudySpec {
        n_ocd: 6,
        n_no_ocd: 5,
        seed: 7,
        // A deliberately strong contrast so downstream examples have
        // something to find; omit `effects` to use the moderate default.
        effects: GroupEffects {
            social_engagement: -0.15,
            negative_emotionality: 0.12,
            anxiety: 0.25,
            activity: 0.18,
        },
        ..StudySpec::default()
    };

    let summary = generate_study(&spec, &out_dir).expect("generate study");
    println!(
        "generated {} clips for {} OCD and {} comparison participants",
        summary.n_clips, summary.n_ocd, summary.n_no_ocd
    );
    println!("manifest: {}", summary.manifest_path.display());
    println!("truth:    {}", summary.truth_path.display());
    println!("human:    {}", summary.human_path.display());

    let truth = std::fs::read_to_string(&summary.truth_path).expect("read truth");
    println!("\nfirst truth rows (fraction of the clip in each behavior):");
    for line in truth.lines().take(4) {
        println!("  {line}");
    }
    println!("\nfull study written under {}", out_dir.display());
}
