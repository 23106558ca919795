//! Sizes a rater-drift detection sample.
//!
//! Run with `cargo run --example power_analysis`. Answers "how many clips
//! must a rater code before a one-point drift in mean score shows up" via
//! the exact noncentral-t power of the two-sample pooled t-test, then
//! cross-checks the analytic answer with a seeded simulation.

use cib::stats::{monte_carlo_power, solve_sample_size, two_sample_power, PowerSpec, Tails};

fn main() {
    let spec = PowerSpec {
        mean_diff: 1.0,
        sd: 0.9,
        alpha: 0.05,
        power: 0.8,
        tails: Tails::Two,
    };
    let n = solve_sample_size(&spec).expect("solve sample size");
    println!(
        "detecting a {} point drift (between-clip SD {}):",
        spec.mean_diff, spec.sd
    );
    println!(
        "  effect size d = {:.3}, alpha = {}, two-tailed, target power {}",
        n.effect_size, spec.alpha, spec.power
    );
    println!(
        "  -> {} clips per rater ({} total), achieved power {:.3}",
        n.n_per_group,
        2 * n.n_per_group,
        n.achieved_power
    );

    let mc = monte_carlo_power(
        spec.mean_diff,
        spec.sd,
        n.n_per_group,
        spec.alpha,
        spec.tails,
        20_000,
        2026,
    );
    println!("  simulation check over 20000 replicates: {mc:.3}\n");

    println!("power as the sample grows (same effect):");
    for clips in [4u64, 8, 12, 14, 16, 24, 32] {
        let p = two_sample_power(n.effect_size, clips, spec.alpha, spec.tails);
        let bar = "#".repeat((p * 40.0).round() as usize);
        println!("  n = {clips:>3} per rater  power {p:.3}  {bar}");
    }

    // A near-mechanical measure barely varies between clips, so even a
    // tiny sample resolves the same absolute drift.
    let tight = PowerSpec {
        sd: 0.11,
        ..spec
    };
    let tiny = solve_sample_size(&tight).expect("solve sample size");
    println!(
        "\nwith SD {} the same drift needs only {} per rater ({} total)",
        tight.sd,
        tiny.n_per_group,
        2 * tiny.n_per_group
    );
}
