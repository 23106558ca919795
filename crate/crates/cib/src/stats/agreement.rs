//! Inter-rater agreement: Cohen's kappa over the half-point score scale,
//! rank and linear correlation, and paired rater-bias tests.

use super::dist::t_cdf;
use super::StatsError;
use crate::codes::scale::on_half_point_lattice;

/// Published human inter-rater agreement level shown as a comparison bar
/// in agreement reports.
pub const HUMAN_HUMAN_BENCHMARK_KAPPA: f64 = 0.89;

/// The nine admissible score categories, in order.
pub const SCORE_CATEGORIES: [f64; 9] = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

/// Map a score to its category index (0..9). Scores off the half-point
/// lattice are rejected.
pub fn score_to_category(score: f64) -> Result<usize, StatsError> {
    if !on_half_point_lattice(score) {
        return Err(StatsError::OffLatticeScore { score });
    }
    Ok(((score - 1.0) * 2.0).round() as usize)
}

/// Kappa weighting scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// All disagreements count equally.
    Unweighted,
    /// Disagreement proportional to category distance, |i - j| / (k - 1).
    Linear,
}

/// Cohen's kappa with its ingredients.
#[derive(Debug, Clone, Copy)]
pub struct KappaResult {
    pub kappa: f64,
    /// Weighted observed agreement (plain proportion when unweighted).
    pub observed_agreement: f64,
    /// Weighted chance agreement from the marginals.
    pub expected_agreement: f64,
    /// Number of rated items.
    pub n: usize,
}

/// Cohen's kappa from a square contingency table `table[i][j]` counting
/// items rated category `i` by the first rater and `j` by the second.
pub fn cohens_kappa_table(
    table: &[Vec<usize>],
    weighting: Weighting,
) -> Result<KappaResult, StatsError> {
    let k = table.len();
    if k == 0 || table.iter().any(|row| row.len() != k) {
        return Err(StatsError::BadTable);
    }
    let n: usize = table.iter().flatten().sum();
    if n == 0 {
        return Err(StatsError::BadTable);
    }
    let nf = n as f64;
    let disagree = |i: usize, j: usize| -> f64 {
        match weighting {
            Weighting::Unweighted => {
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
            Weighting::Linear => (i as f64 - j as f64).abs() / (k as f64 - 1.0),
        }
    };
    let row: Vec<f64> = table
        .iter()
        .map(|r| r.iter().sum::<usize>() as f64)
        .collect();
    let col: Vec<f64> = (0..k)
        .map(|j| table.iter().map(|r| r[j] as f64).sum())
        .collect();
    let mut obs_d = 0.0;
    let mut exp_d = 0.0;
    for i in 0..k {
        for j in 0..k {
            obs_d += table[i][j] as f64 * disagree(i, j) / nf;
            exp_d += row[i] * col[j] * disagree(i, j) / (nf * nf);
        }
    }
    let observed_agreement = 1.0 - obs_d;
    let expected_agreement = 1.0 - exp_d;
    if exp_d == 0.0 {
        // Both raters used a single common category for everything: chance
        // disagreement is zero. Perfect agreement is still kappa = 1; any
        // disagreement leaves kappa undefined.
        if obs_d == 0.0 {
            return Ok(KappaResult {
                kappa: 1.0,
                observed_agreement,
                expected_agreement,
                n,
            });
        }
        return Err(StatsError::DegenerateMarginals);
    }
    Ok(KappaResult {
        kappa: 1.0 - obs_d / exp_d,
        observed_agreement,
        expected_agreement,
        n,
    })
}

/// Cohen's kappa between two raters' scores on the half-point scale.
/// Both slices must have the same nonzero length and every score must sit
/// on the nine-category lattice.
pub fn cohens_kappa(a: &[f64], b: &[f64], weighting: Weighting) -> Result<KappaResult, StatsError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let k = SCORE_CATEGORIES.len();
    let mut table = vec![vec![0usize; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        table[score_to_category(x)?][score_to_category(y)?] += 1;
    }
    cohens_kappa_table(&table, weighting)
}

/// Pearson product-moment correlation. Zero variance on either side is an
/// error.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Ranks with ties given their average rank (1-based).
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).expect("NaN in rank input"));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Paired two-sided t-test result.
#[derive(Debug, Clone, Copy)]
pub struct PairedT {
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    pub n: usize,
}

/// Paired two-sided t-test on per-item differences `a[i] - b[i]`.
///
/// Zero-variance differences follow the degenerate conventions: all-zero
/// differences give t = 0 and p = 1; a constant nonzero difference gives
/// an infinite t and p = 0.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedT, StatsError> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    let nf = n as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    let df = nf - 1.0;
    let (t, p) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (sd / nf.sqrt());
        (t, 2.0 * (1.0 - t_cdf(t.abs(), df)))
    };
    Ok(PairedT {
        mean_diff: mean,
        sd_diff: sd,
        t,
        df,
        p_two_sided: p,
        n,
    })
}
