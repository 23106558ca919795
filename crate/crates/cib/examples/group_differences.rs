//! Runs the MANOVA and per-code contrasts.
//!
//! Run with `cargo run --example group_differences`. Generates a synthetic
//! study with a built-in group contrast, scores it, tests the four
//! composites jointly per chapter (Wilks lambda MANOVA) and between
//! chapters within each group, then runs per-composite t-tests with
//! Benjamini-Hochberg false-discovery-rate control across the family.

use cib::codes::score_segment;
use cib::ingest::{load_study, Chapter, Group};
use cib::stats::{
    benjamini_hochberg, chapter_contrast, composite_rows, two_sample_t, ContrastDesign,
};
use cib::synth::{generate_study, StudySpec};
use cib::Config;

const COMPOSITES: [&str; 4] = [
    "social_engagement",
    "negative_emotionality",
    "anxiety",
    "activity",
];

fn main() {
    let cfg = Config::default();
    let dir = std::env::temp_dir().join("cib_example_group_differences");
    let spec = StudySpec {
        n_ocd: 14,
        n_no_ocd: 12,
        seed: 5,
        ..StudySpec::default()
    };
    let summary = generate_study(&spec, &dir).expect("generate study");

    let load = load_study(&summary.manifest_path, &cfg).expect("load study");
    let scored: Vec<_> = load
        .clips
        .iter()
        .map(|seg| score_segment(seg, &cfg).expect("score clip"))
        .collect();
    let (rows, dropped) = composite_rows(&scored, cfg.use_scores);
    if !dropped.is_empty() {
        eprintln!("dropped incomplete clips: {dropped:?}");
    }
    println!(
        "composite fractions for {} clips ({} OCD, {} comparison participants)\n",
        rows.len(),
        spec.n_ocd,
        spec.n_no_ocd
    );

    println!("joint tests (all four composites at once):");
    let mut contrasts = chapter_contrast(&rows, ContrastDesign::BetweenGroupsWithinChapter)
        .expect("group contrast");
    contrasts.extend(chapter_contrast(&rows, ContrastDesign::BetweenChapters).expect("chapters"));
    for c in &contrasts {
        println!(
            "  {:<28} Wilks lambda {:.4}  F({:.0},{:.0}) = {:.2}  p = {:.4}",
            c.label, c.wilks_lambda, c.df1, c.df2, c.f, c.p
        );
    }

    // Follow-up univariate contrasts: one t-test per composite per
    // chapter, corrected as one family.
    let mut labels = Vec::new();
    let mut p_values = Vec::new();
    println!("\nper-composite group contrasts:");
    for chapter in Chapter::ALL {
        for (k, name) in COMPOSITES.iter().enumerate() {
            let side = |group: Group| -> Vec<f64> {
                rows.iter()
                    .filter(|r| r.chapter == chapter && r.group == group)
                    .map(|r| r.values[k])
                    .collect()
            };
            // The t statistic tests (second sample - first), so passing
            // the comparison group first makes t's sign match the diff.
            let t = two_sample_t(&side(Group::NoOcd), &side(Group::Ocd)).expect("t-test");
            let chapter_name = chapter.to_string();
            println!(
                "  {chapter_name:<11} {name:<22} diff {:+.3}  t({:.1}) = {:+.2}  p = {:.4}",
                t.mean_b - t.mean_a,
                t.df,
                t.t,
                t.p_two_sided
            );
            labels.push(format!("{chapter}:{name}"));
            p_values.push(t.p_two_sided);
        }
    }

    let fdr = benjamini_hochberg(&p_values, cfg.fdr_q).expect("fdr");
    println!(
        "\nBenjamini-Hochberg at q = {}: {} of {} contrasts survive",
        cfg.fdr_q,
        fdr.n_rejected,
        labels.len()
    );
    for (i, label) in labels.iter().enumerate() {
        if fdr.rejected[i] {
            println!(
                "  {label}  (p = {:.4}, adjusted {:.4})",
                p_values[i], fdr.adjusted_p[i]
            );
        }
    }
}
