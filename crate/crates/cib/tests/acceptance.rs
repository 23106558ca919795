//! Acceptance checks for the whole toolkit. Each numbered criterion runs
//! end to end against an independently coded oracle and prints exactly one
//! PASS or FAIL line; the test fails if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cib::classify::{
    auc_mann_whitney, cross_validate, penalized_grad, penalized_nll, stratified_folds,
    train_forest, CvSettings, DatasetRow, ForestConfig, ModelKind, Resample, StudyDataset,
};
use cib::codes::scale::percentage_to_score;
use cib::codes::{score_segment, CODE_NAMES};
use cib::config::Config;
use cib::ingest::load_study;
use cib::stats::{
    benjamini_hochberg, cohens_kappa, cohens_kappa_table, manova_two_group, monte_carlo_power,
    solve_sample_size, two_sample_t, PowerSpec, Tails, Weighting,
};
use cib::synth::{generate_study, read_truth_csv, ClipTruth, StudySpec};

type CheckResult = Result<String, String>;

#[test]
fn acceptance_criteria() {
    let checks: [(&str, fn() -> CheckResult); 6] = [
        ("1 power reproduction", power_reproduction),
        ("2 oracle score recovery", oracle_score_recovery),
        ("3 agreement correctness", agreement_correctness),
        ("4 group contrast correctness", contrast_correctness),
        ("5 classification properties", classification_properties),
        ("6 end-to-end desk-scale run", end_to_end_run),
    ];
    let mut failures = Vec::new();
    println!();
    for (label, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".to_string());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {label}: PASS ({detail})"),
            Err(why) => {
                println!("criterion {label}: FAIL ({why})");
                failures.push(format!("criterion {label}: {why}"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance failures:\n{}",
        failures.join("\n")
    );
}

// Criterion 1: the sample-size solver returns 14 per group for a 1-point
// difference against SD 0.9 (alpha 0.05 two-tailed, power 0.80) and a
// total of 4 against SD 0.11, in under a second, and a Monte-Carlo power
// estimate at the returned size agrees with the analytic power to 0.02.
fn power_reproduction() -> CheckResult {
    let started = Instant::now();
    let base = PowerSpec {
        mean_diff: 1.0,
        sd: 0.9,
        alpha: 0.05,
        power: 0.80,
        tails: Tails::Two,
    };
    let moderate = solve_sample_size(&base).map_err(|e| e.to_string())?;
    let huge = solve_sample_size(&PowerSpec { sd: 0.11, ..base }).map_err(|e| e.to_string())?;
    let solver_time = started.elapsed();
    if moderate.n_per_group != 14 {
        return Err(format!(
            "expected 14 per group at sd 0.9, got {}",
            moderate.n_per_group
        ));
    }
    let total = 2 * huge.n_per_group;
    if total != 4 {
        return Err(format!("expected total 4 at sd 0.11, got {total}"));
    }
    if solver_time >= Duration::from_secs(1) {
        return Err(format!("solver took {solver_time:?}"));
    }
    let exact = moderate.achieved_power;
    let mc = monte_carlo_power(1.0, 0.9, 14, 0.05, Tails::Two, 40_000, 2024);
    if (mc - exact).abs() > 0.02 {
        return Err(format!("monte carlo {mc:.4} vs analytic {exact:.4}"));
    }
    Ok(format!(
        "14 per group and total 4 in {solver_time:?}; monte carlo {mc:.3} vs analytic {exact:.3}"
    ))
}

// Criterion 2: on 50 seeded synthetic clips, every code fraction recovered
// by the real ingest-and-score path lands within 0.05 of the generator's
// truth sidecar, the score mapping hits its endpoints exactly, and the
// whole run stays under 30 seconds.
fn oracle_score_recovery() -> CheckResult {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = StudySpec {
        n_ocd: 13,
        n_no_ocd: 12,
        ..StudySpec::default()
    };
    let summary = generate_study(&spec, dir.path()).map_err(|e| e.to_string())?;
    if summary.n_clips != 50 {
        return Err(format!("expected 50 clips, generated {}", summary.n_clips));
    }
    let cfg = Config::default();
    let load = load_study(&summary.manifest_path, &cfg).map_err(|e| e.to_string())?;
    if !load.failures.is_empty() {
        return Err(format!("{} clips failed to load", load.failures.len()));
    }
    let truth: BTreeMap<String, ClipTruth> = read_truth_csv(&summary.truth_path)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
    let mut worst = (0.0f64, String::new());
    for seg in &load.clips {
        let scored = score_segment(seg, &cfg).map_err(|e| e.to_string())?;
        let clip_id = scored.clip_id();
        let row = truth
            .get(&clip_id)
            .ok_or_else(|| format!("no truth row for {clip_id}"))?;
        for (name, got) in CODE_NAMES.iter().zip(scored.scored.rates.code_fractions()) {
            let want = row
                .fraction(name)
                .ok_or_else(|| format!("truth lacks {name}"))?;
            let got = got.ok_or_else(|| format!("{clip_id}: {name} not recovered"))?;
            let err = (got - want).abs();
            if err > 0.05 {
                return Err(format!(
                    "{clip_id} {name}: recovered {got:.3} vs truth {want:.3}"
                ));
            }
            if err > worst.0 {
                worst = (err, format!("{name} of {clip_id}"));
            }
        }
    }
    if percentage_to_score(0.0) != 1.0 || percentage_to_score(1.0) != 5.0 {
        return Err("score mapping endpoints are not exact".to_string());
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "50 clips in {elapsed:.1?}, worst deviation {:.4} ({})",
        worst.0, worst.1
    ))
}

/// Kappa recomputed through the complementary route: agreement weights
/// rather than disagreement weights, (po - pe) / (1 - pe).
fn kappa_by_agreement_weights(table: &[Vec<usize>], weighting: Weighting) -> f64 {
    let k = table.len();
    let n: usize = table.iter().flatten().sum();
    let nf = n as f64;
    let weight = |i: usize, j: usize| -> f64 {
        match weighting {
            Weighting::Unweighted => {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            }
            Weighting::Linear => 1.0 - (i as f64 - j as f64).abs() / (k as f64 - 1.0),
        }
    };
    let row: Vec<f64> = table
        .iter()
        .map(|r| r.iter().sum::<usize>() as f64)
        .collect();
    let col: Vec<f64> = (0..k)
        .map(|j| table.iter().map(|r| r[j] as f64).sum())
        .collect();
    let mut po = 0.0;
    let mut pe = 0.0;
    for i in 0..k {
        for j in 0..k {
            po += table[i][j] as f64 * weight(i, j) / nf;
            pe += row[i] * col[j] * weight(i, j) / (nf * nf);
        }
    }
    (po - pe) / (1.0 - pe)
}

// Criterion 3: kappa agrees with a brute-force recomputation on fixed
// confusion tables to 1e-12, a rater compared with itself scores exactly
// 1, and agreement reports display the 0.89 human-vs-human benchmark bar.
fn agreement_correctness() -> CheckResult {
    let tables: Vec<Vec<Vec<usize>>> = vec![
        vec![vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]],
        vec![vec![5, 1], vec![2, 7]],
        vec![
            vec![4, 0, 1, 0],
            vec![2, 6, 0, 1],
            vec![0, 1, 8, 2],
            vec![1, 0, 0, 3],
        ],
        vec![
            vec![9, 1, 0, 0, 0, 0, 0, 0, 0],
            vec![1, 7, 2, 0, 0, 0, 0, 0, 0],
            vec![0, 1, 6, 1, 0, 0, 0, 1, 0],
            vec![0, 0, 2, 8, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 5, 2, 0, 0, 0],
            vec![0, 0, 0, 0, 1, 7, 1, 0, 0],
            vec![0, 0, 1, 0, 0, 2, 9, 1, 0],
            vec![0, 0, 0, 0, 0, 0, 1, 4, 1],
            vec![0, 1, 0, 0, 0, 0, 0, 2, 6],
        ],
    ];
    let mut compared = 0;
    for table in &tables {
        for weighting in [Weighting::Unweighted, Weighting::Linear] {
            let got = cohens_kappa_table(table, weighting)
                .map_err(|e| e.to_string())?
                .kappa;
            let want = kappa_by_agreement_weights(table, weighting);
            if (got - want).abs() > 1e-12 {
                return Err(format!(
                    "{weighting:?} kappa {got} vs brute force {want} on {table:?}"
                ));
            }
            compared += 1;
        }
    }

    let scores = [1.0, 2.5, 3.0, 5.0, 4.5, 2.0, 1.5, 3.5, 3.0, 4.0];
    for weighting in [Weighting::Unweighted, Weighting::Linear] {
        let r = cohens_kappa(&scores, &scores, weighting).map_err(|e| e.to_string())?;
        if r.kappa != 1.0 {
            return Err(format!("self-agreement kappa {} under {weighting:?}", r.kappa));
        }
    }

    // A small pipeline run must carry the benchmark bar into the heatmap.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let study = dir.path().join("study");
    let scored = dir.path().join("scored");
    let agreement = dir.path().join("agreement");
    run_in_process(&[
        "cib",
        "synth",
        "--out",
        study.to_str().unwrap(),
        "--n-ocd",
        "3",
        "--n-no-ocd",
        "3",
        "--seed",
        "7",
    ])?;
    run_in_process(&[
        "cib",
        "score",
        "--manifest",
        study.join("manifest.csv").to_str().unwrap(),
        "--out",
        scored.to_str().unwrap(),
    ])?;
    run_in_process(&[
        "cib",
        "agree",
        "--scores",
        scored.join("scores.csv").to_str().unwrap(),
        "--human",
        study.join("human.csv").to_str().unwrap(),
        "--out",
        agreement.to_str().unwrap(),
    ])?;
    let heatmap = std::fs::read_to_string(agreement.join("kappa_heatmap.svg"))
        .map_err(|e| format!("kappa_heatmap.svg: {e}"))?;
    if !heatmap.contains("human_human_benchmark") || !heatmap.contains("0.89") {
        return Err("kappa heatmap lacks the 0.89 benchmark comparison bar".to_string());
    }
    Ok(format!(
        "{compared} table-weighting pairs within 1e-12; self kappa exactly 1; benchmark bar present"
    ))
}

/// Determinant by plain Gaussian elimination with partial pivoting,
/// independent of the linear algebra crate used by the implementation.
fn det_gauss(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    det
}

/// Wilks lambda from first principles: det(within scatter) over det(total
/// scatter), both assembled directly from the data.
fn wilks_by_scatter(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let p = a[0].len();
    let mean_of = |rows: &[Vec<f64>]| -> Vec<f64> {
        let mut m = vec![0.0; p];
        for r in rows {
            for (mi, &v) in m.iter_mut().zip(r) {
                *mi += v;
            }
        }
        for mi in &mut m {
            *mi /= rows.len() as f64;
        }
        m
    };
    let scatter_into = |rows: &[Vec<f64>], center: &[f64], s: &mut Vec<Vec<f64>>| {
        for r in rows {
            for i in 0..p {
                for j in 0..p {
                    s[i][j] += (r[i] - center[i]) * (r[j] - center[j]);
                }
            }
        }
    };
    let ma = mean_of(a);
    let mb = mean_of(b);
    let all: Vec<Vec<f64>> = a.iter().chain(b).cloned().collect();
    let grand = mean_of(&all);
    let mut within = vec![vec![0.0; p]; p];
    scatter_into(a, &ma, &mut within);
    scatter_into(b, &mb, &mut within);
    let mut total = vec![vec![0.0; p]; p];
    scatter_into(&all, &grand, &mut total);
    det_gauss(within) / det_gauss(total)
}

fn random_groups(seed: u64, na: usize, nb: usize, p: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect())
            .collect()
    };
    let a = draw(na);
    let b = draw(nb);
    (a, b)
}

/// One-sample Kolmogorov-Smirnov distance from the uniform distribution.
fn ks_uniform_distance(ps: &mut [f64]) -> f64 {
    ps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = ps.len() as f64;
    let mut d = 0.0f64;
    for (i, &p) in ps.iter().enumerate() {
        let hi = (i + 1) as f64 / n - p;
        let lo = p - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Step-up rule recomputed naively: the rejection threshold is the largest
/// sorted p at or below its rank fraction of the level.
fn step_up_by_hand(p: &[f64], q: f64) -> Vec<bool> {
    let m = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut threshold = f64::NEG_INFINITY;
    for (rank0, &pk) in sorted.iter().enumerate() {
        if pk <= (rank0 + 1) as f64 * q / m as f64 {
            threshold = threshold.max(pk);
        }
    }
    p.iter().map(|&pi| pi <= threshold).collect()
}

// Criterion 4: Wilks lambda matches a from-scratch scatter-determinant
// oracle to 1e-10, the one-variable contrast F equals the squared t to
// 1e-9, zero-effect simulation gives uniform p-values (KS over 200 seeds
// at the 0.01 level), and the FDR step-up matches a naive recomputation
// exactly on 1000 random p-vectors.
fn contrast_correctness() -> CheckResult {
    for seed in 0..5 {
        let (a, b) = random_groups(400 + seed, 25, 12, 4);
        let got = manova_two_group(&a, &b).map_err(|e| e.to_string())?;
        let want = wilks_by_scatter(&a, &b);
        if (got.wilks_lambda - want).abs() > 1e-10 {
            return Err(format!(
                "seed {seed}: lambda {} vs scatter oracle {want}",
                got.wilks_lambda
            ));
        }
    }

    for seed in 0..5 {
        let (a, b) = random_groups(500 + seed, 10, 8, 1);
        let m = manova_two_group(&a, &b).map_err(|e| e.to_string())?;
        let flat_a: Vec<f64> = a.iter().map(|r| r[0]).collect();
        let flat_b: Vec<f64> = b.iter().map(|r| r[0]).collect();
        let t = two_sample_t(&flat_a, &flat_b).map_err(|e| e.to_string())?;
        if (m.f - t.t * t.t).abs() > 1e-9 {
            return Err(format!("seed {seed}: F {} vs t^2 {}", m.f, t.t * t.t));
        }
    }

    let mut ps = Vec::with_capacity(200);
    for seed in 0..200 {
        let (a, b) = random_groups(7000 + seed, 25, 12, 4);
        ps.push(manova_two_group(&a, &b).map_err(|e| e.to_string())?.p_value);
    }
    let d = ks_uniform_distance(&mut ps);
    // Asymptotic critical value at the 0.01 level: 1.6276 / sqrt(n).
    let critical = 1.6276 / (ps.len() as f64).sqrt();
    if d > critical {
        return Err(format!("KS distance {d:.4} exceeds {critical:.4}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0u64..1000 {
        let m = 1 + (case as usize % 37);
        let p: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let q = 0.01 + 0.49 * rng.random::<f64>();
        let got = benjamini_hochberg(&p, q).map_err(|e| e.to_string())?;
        let want = step_up_by_hand(&p, q);
        if got.rejected != want {
            return Err(format!(
                "case {case}: step-up mismatch at q={q}: {:?} vs {:?} on {p:?}",
                got.rejected, want
            ));
        }
    }
    Ok(format!(
        "scatter oracle and t^2 identity hold; KS {d:.3} < {critical:.3}; 1000 step-up vectors exact"
    ))
}

fn toy_dataset(n_pos: usize, n_neg: usize, separable: bool) -> StudyDataset {
    let mut rows = Vec::new();
    for i in 0..n_pos + n_neg {
        let label = i < n_pos;
        let base = if label { 1.0 } else { 0.0 };
        let wiggle = (i as f64 * 0.37).sin() * 0.2;
        let v = if separable { base + wiggle * 0.2 } else { wiggle + 0.5 };
        rows.push(DatasetRow {
            participant_id: format!("p{i:02}"),
            label,
            features: vec![v, 1.0 - v + (i as f64 * 0.11).cos() * 0.05],
        });
    }
    StudyDataset {
        feature_names: vec!["a".into(), "b".into()],
        rows,
        excluded: Vec::new(),
        used_scores: false,
    }
}

fn logistic_settings(seed: u64) -> CvSettings {
    CvSettings {
        model: ModelKind::Logistic,
        folds: 5,
        seed,
        resample: Resample::None,
        logistic_l2: 1.0,
        n_trees: 60,
        threshold: 0.5,
    }
}

// Criterion 5: the two AUC routes agree bit for bit on every evaluated
// score set, a separable study cross-validates to AUC and F1 of exactly
// 1, label shuffling centers the AUC, fold hygiene assertions hold under
// resampling, the logistic gradient matches finite differences, and
// forest training is bit-identical under one seed.
fn classification_properties() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut route_checks = 0;
    for _ in 0..200 {
        let n = 2 + (rng.random::<u32>() % 50) as usize;
        let scores: Vec<f64> = (0..n)
            .map(|_| (rng.random::<u32>() % 12) as f64 / 11.0)
            .collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        let pos = labels.iter().filter(|&&l| l).count();
        if pos == 0 || pos == labels.len() {
            continue;
        }
        let a = cib::classify::auc_trapezoid(&scores, &labels).map_err(|e| e.to_string())?;
        let b = auc_mann_whitney(&scores, &labels).map_err(|e| e.to_string())?;
        if a.to_bits() != b.to_bits() {
            return Err(format!("AUC routes disagree: {a} vs {b}"));
        }
        route_checks += 1;
    }

    let ds = toy_dataset(20, 20, true);
    let report = cross_validate(&ds, &logistic_settings(42)).map_err(|e| e.to_string())?;
    if report.pooled.auc != 1.0 || report.pooled.f1 != 1.0 {
        return Err(format!(
            "separable study: auc {} f1 {}",
            report.pooled.auc, report.pooled.f1
        ));
    }
    let oof_scores: Vec<f64> = report.oof.iter().map(|o| o.score).collect();
    let oof_labels: Vec<bool> = report.oof.iter().map(|o| o.label).collect();
    let mw = auc_mann_whitney(&oof_scores, &oof_labels).map_err(|e| e.to_string())?;
    if mw.to_bits() != report.pooled.auc.to_bits() {
        return Err(format!("pooled AUC {} vs pair counting {mw}", report.pooled.auc));
    }

    let mut mean_auc = 0.0;
    for seed in 0..20u64 {
        let mut shuffled = ds.clone();
        let mut labels: Vec<bool> = shuffled.rows.iter().map(|r| r.label).collect();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(900 + seed);
        for i in (1..labels.len()).rev() {
            let j = shuffle_rng.random_range(0..=i);
            labels.swap(i, j);
        }
        for (row, label) in shuffled.rows.iter_mut().zip(&labels) {
            row.label = *label;
        }
        let r = cross_validate(&shuffled, &logistic_settings(1000 + seed))
            .map_err(|e| e.to_string())?;
        let s: Vec<f64> = r.oof.iter().map(|o| o.score).collect();
        let l: Vec<bool> = r.oof.iter().map(|o| o.label).collect();
        let mw = auc_mann_whitney(&s, &l).map_err(|e| e.to_string())?;
        if mw.to_bits() != r.pooled.auc.to_bits() {
            return Err("AUC routes disagree on a shuffled run".to_string());
        }
        mean_auc += r.pooled.auc;
    }
    mean_auc /= 20.0;
    if !(0.40..=0.60).contains(&mean_auc) {
        return Err(format!("shuffled-label mean AUC {mean_auc:.3}"));
    }

    // Fold hygiene: the always-on assertions inside cross-validation must
    // hold under both resampling modes, and stratified folds must
    // partition the rows exactly.
    let imbalanced = toy_dataset(8, 22, true);
    for resample in [Resample::Oversample, Resample::Undersample] {
        let mut s = logistic_settings(7);
        s.resample = resample;
        cross_validate(&imbalanced, &s).map_err(|e| e.to_string())?;
    }
    let labels: Vec<bool> = imbalanced.rows.iter().map(|r| r.label).collect();
    let folds = stratified_folds(&labels, 4, 3);
    let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
    all.sort_unstable();
    if all != (0..labels.len()).collect::<Vec<_>>() {
        return Err("stratified folds do not partition the rows".to_string());
    }

    // Analytic gradient against central finite differences.
    let mut grad_rng = ChaCha8Rng::seed_from_u64(17);
    let x: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..5).map(|_| grad_rng.sample(StandardNormal)).collect())
        .collect();
    let y: Vec<bool> = x.iter().map(|r| r[0] + 0.5 * r[1] > 0.0).collect();
    let w: Vec<f64> = (0..5).map(|_| grad_rng.sample::<f64, _>(StandardNormal) * 0.5).collect();
    let b = 0.3;
    let l2 = 0.7;
    let (gw, gb) = penalized_grad(&x, &y, &w, b, l2);
    let mut worst_rel = 0.0f64;
    for i in 0..=w.len() {
        let h = 1e-5;
        let probe = |delta: f64| -> f64 {
            if i < w.len() {
                let mut wp = w.clone();
                wp[i] += delta;
                penalized_nll(&x, &y, &wp, b, l2)
            } else {
                penalized_nll(&x, &y, &w, b + delta, l2)
            }
        };
        let numeric = (probe(h) - probe(-h)) / (2.0 * h);
        let analytic = if i < w.len() { gw[i] } else { gb };
        let rel = (analytic - numeric).abs() / numeric.abs().max(1.0);
        worst_rel = worst_rel.max(rel);
        if rel > 1e-6 {
            return Err(format!(
                "gradient component {i}: analytic {analytic} vs numeric {numeric}"
            ));
        }
    }

    // Bit-identical forest training under one seed.
    let mut forest_rng = ChaCha8Rng::seed_from_u64(23);
    let fx: Vec<Vec<f64>> = (0..30)
        .map(|_| (0..4).map(|_| forest_rng.sample(StandardNormal)).collect())
        .collect();
    let fy: Vec<bool> = fx.iter().map(|r| r[0] - r[2] > 0.1).collect();
    let fcfg = ForestConfig {
        n_trees: 60,
        min_leaf: 1,
        seed: 11,
    };
    let m1 = train_forest(&fx, &fy, &fcfg).map_err(|e| e.to_string())?;
    let m2 = train_forest(&fx, &fy, &fcfg).map_err(|e| e.to_string())?;
    let imp1: Vec<u64> = m1.importances.iter().map(|v| v.to_bits()).collect();
    let imp2: Vec<u64> = m2.importances.iter().map(|v| v.to_bits()).collect();
    if imp1 != imp2 {
        return Err("forest importances differ between identical runs".to_string());
    }
    for row in &fx {
        if m1.predict_score(row).to_bits() != m2.predict_score(row).to_bits() {
            return Err("forest predictions differ between identical runs".to_string());
        }
    }
    Ok(format!(
        "{route_checks} AUC route checks bit-exact; separable AUC/F1 = 1; \
         shuffled mean AUC {mean_auc:.3}; gradient max rel err {worst_rel:.1e}; forest bit-identical"
    ))
}

fn run_in_process(argv: &[&str]) -> Result<(), String> {
    let cli = cib::cli::Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
    cib::cli::run(cli).map_err(|e| e.to_string())
}

fn run_binary(args: &[&str]) -> Result<(), String> {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_cib"))
        .args(args)
        .env_remove("CIB_CONFIG")
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "`cib {}` exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(())
}

fn hash_from_csv(path: &Path) -> Result<String, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let line = text
        .lines()
        .nth(1)
        .ok_or_else(|| format!("{}: no data row", path.display()))?;
    Ok(line.rsplit(',').next().unwrap_or("").trim().to_string())
}

// Criterion 6: the generate, score, agree, manova, and classify commands
// run back to back on a default 25/12 study in under 120 seconds, the
// report command produces the full bundle, and every artifact carries the
// same configuration hash.
fn end_to_end_run() -> CheckResult {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let study = dir.path().join("study");
    let scored = dir.path().join("scored");
    let agreement = dir.path().join("agreement");
    let contrasts = dir.path().join("contrasts");
    let classify = dir.path().join("classify");
    let bundle = dir.path().join("bundle");
    let path = |p: &Path| p.to_str().unwrap().to_string();

    run_binary(&["synth", "--out", &path(&study), "--seed", "42"])?;
    let manifest = study.join("manifest.csv");
    run_binary(&[
        "score",
        "--manifest",
        &path(&manifest),
        "--out",
        &path(&scored),
    ])?;
    let scores = scored.join("scores.csv");
    run_binary(&[
        "agree",
        "--scores",
        &path(&scores),
        "--human",
        &path(&study.join("human.csv")),
        "--out",
        &path(&agreement),
    ])?;
    run_binary(&[
        "manova",
        "--scores",
        &path(&scores),
        "--out",
        &path(&contrasts),
    ])?;
    run_binary(&[
        "classify",
        "--scores",
        &path(&scores),
        "--out",
        &path(&classify),
    ])?;
    run_binary(&[
        "report",
        "--manifest",
        &path(&manifest),
        "--human",
        &path(&study.join("human.csv")),
        "--out",
        &path(&bundle),
    ])?;
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(120) {
        return Err(format!("pipeline took {elapsed:?}"));
    }

    for file in [
        "scores.csv",
        "quality.csv",
        "agreement/kappa.csv",
        "agreement/correlation.csv",
        "agreement/bias.csv",
        "agreement/kappa_heatmap.svg",
        "agreement/correlation_heatmap.svg",
        "manova/manova.csv",
        "manova/qq.svg",
        "classify/metrics.csv",
        "classify/oof.csv",
        "classify/roc.svg",
        "classify/importance.csv",
        "power.txt",
        "run_info.txt",
        "index.txt",
    ] {
        if !bundle.join(file).is_file() {
            return Err(format!("bundle lacks {file}"));
        }
    }

    let mut hashes: Vec<(String, String)> = Vec::new();
    let scores_file = cib::report::read_scores_csv(&scores).map_err(|e| e.to_string())?;
    hashes.push(("scores.csv".into(), scores_file.config_hash.clone()));
    for file in [
        scored.join("quality.csv"),
        agreement.join("kappa.csv"),
        agreement.join("correlation.csv"),
        agreement.join("bias.csv"),
        contrasts.join("manova.csv"),
        classify.join("metrics.csv"),
        classify.join("oof.csv"),
        classify.join("importance.csv"),
        bundle.join("scores.csv"),
        bundle.join("quality.csv"),
        bundle.join("agreement/kappa.csv"),
        bundle.join("manova/manova.csv"),
        bundle.join("classify/metrics.csv"),
    ] {
        hashes.push((file.display().to_string(), hash_from_csv(&file)?));
    }
    let index = std::fs::read_to_string(bundle.join("index.txt")).map_err(|e| e.to_string())?;
    let index_hash = index
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("config_hash="))
        .ok_or("index.txt lacks its config_hash line")?
        .to_string();
    hashes.push(("index.txt".into(), index_hash));

    let reference = &hashes[0].1;
    if reference.is_empty() {
        return Err("empty config hash in scores.csv".to_string());
    }
    for (name, hash) in &hashes {
        if hash != reference {
            return Err(format!("{name} hash {hash} differs from {reference}"));
        }
    }
    Ok(format!(
        "six commands and the bundle in {elapsed:.1?}; {} artifacts share hash {reference}",
        hashes.len()
    ))
}
