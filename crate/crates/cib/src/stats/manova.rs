//! Multivariate group comparison: two-group MANOVA via Wilks' lambda with
//! the exact F transform, one-sample Hotelling T-squared for paired
//! contrasts, and the univariate pooled t-test used for follow-ups.

use super::dist::{f_cdf, t_cdf};
use super::StatsError;
use nalgebra::{DMatrix, DVector};

/// Two-group MANOVA result.
#[derive(Debug, Clone)]
pub struct ManovaResult {
    pub wilks_lambda: f64,
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
    pub n_total: usize,
    pub n_vars: usize,
}

/// One-sample Hotelling T-squared result.
#[derive(Debug, Clone)]
pub struct HotellingResult {
    pub t_squared: f64,
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
    pub n: usize,
    pub n_vars: usize,
    pub mean: Vec<f64>,
}

/// Univariate pooled two-sample t-test result.
#[derive(Debug, Clone, Copy)]
pub struct TwoSampleT {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

fn check_rows(rows: &[Vec<f64>], p: usize) -> Result<(), StatsError> {
    for r in rows {
        if r.len() != p {
            return Err(StatsError::RaggedRows {
                expected: p,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFiniteInput);
        }
    }
    Ok(())
}

fn mean_vector(rows: &[Vec<f64>], p: usize) -> DVector<f64> {
    let mut m = DVector::zeros(p);
    for r in rows {
        for (k, &v) in r.iter().enumerate() {
            m[k] += v;
        }
    }
    m / rows.len() as f64
}

fn scatter_about(rows: &[Vec<f64>], center: &DVector<f64>) -> DMatrix<f64> {
    let p = center.len();
    let mut s = DMatrix::zeros(p, p);
    for r in rows {
        let d = DVector::from_iterator(p, r.iter().cloned()) - center;
        s += &d * d.transpose();
    }
    s
}

/// Two-group MANOVA: Wilks' lambda det(E)/det(E+H) with the exact F
/// transform for two groups, F = ((N-p-1)/p) (1-lambda)/lambda on
/// (p, N-p-1) degrees of freedom.
pub fn manova_two_group(
    group_a: &[Vec<f64>],
    group_b: &[Vec<f64>],
) -> Result<ManovaResult, StatsError> {
    let p = group_a.first().or(group_b.first()).map_or(0, Vec::len);
    if p == 0 {
        return Err(StatsError::RaggedRows {
            expected: 1,
            got: 0,
        });
    }
    check_rows(group_a, p)?;
    check_rows(group_b, p)?;
    let (na, nb) = (group_a.len(), group_b.len());
    let n_total = na + nb;
    if na < 2 || nb < 2 || n_total < p + 2 {
        return Err(StatsError::TooFewSamples {
            needed: (p + 2).max(4),
            got: n_total,
        });
    }
    let ma = mean_vector(group_a, p);
    let mb = mean_vector(group_b, p);
    let mut grand = DVector::zeros(p);
    for r in group_a.iter().chain(group_b) {
        for (k, &v) in r.iter().enumerate() {
            grand[k] += v;
        }
    }
    grand /= n_total as f64;

    let e = scatter_about(group_a, &ma) + scatter_about(group_b, &mb);
    let da = &ma - &grand;
    let db = &mb - &grand;
    let h = na as f64 * &da * da.transpose() + nb as f64 * &db * db.transpose();

    let det_e = e.clone().determinant();
    let det_eh = (e + h).determinant();
    if !(det_e > 0.0) || !(det_eh > 0.0) {
        return Err(StatsError::SingularScatter);
    }
    let lambda = det_e / det_eh;
    let pf = p as f64;
    let df1 = pf;
    let df2 = n_total as f64 - pf - 1.0;
    let f = (df2 / pf) * (1.0 - lambda) / lambda;
    let p_value = 1.0 - f_cdf(f, df1, df2);
    Ok(ManovaResult {
        wilks_lambda: lambda,
        f,
        df1,
        df2,
        p_value,
        n_total,
        n_vars: p,
    })
}

/// One-sample Hotelling T-squared on difference vectors against zero:
/// T2 = n dbar' S^-1 dbar, F = (n-p)/(p(n-1)) T2 on (p, n-p) degrees
/// of freedom. Identically zero differences give T2 = 0 and p = 1.
pub fn hotelling_one_sample(diffs: &[Vec<f64>]) -> Result<HotellingResult, StatsError> {
    let p = diffs.first().map_or(0, Vec::len);
    if p == 0 {
        return Err(StatsError::RaggedRows {
            expected: 1,
            got: 0,
        });
    }
    check_rows(diffs, p)?;
    let n = diffs.len();
    if n < p + 1 {
        return Err(StatsError::TooFewSamples {
            needed: p + 1,
            got: n,
        });
    }
    let nf = n as f64;
    let pf = p as f64;
    let df1 = pf;
    let df2 = nf - pf;
    let mean = mean_vector(diffs, p);
    if diffs.iter().all(|r| r.iter().all(|&v| v == 0.0)) {
        return Ok(HotellingResult {
            t_squared: 0.0,
            f: 0.0,
            df1,
            df2,
            p_value: 1.0,
            n,
            n_vars: p,
            mean: vec![0.0; p],
        });
    }
    let s = scatter_about(diffs, &mean) / (nf - 1.0);
    let s_inv = s.try_inverse().ok_or(StatsError::SingularScatter)?;
    let t_squared = nf * (mean.transpose() * s_inv * &mean)[(0, 0)];
    let f = (nf - pf) / (pf * (nf - 1.0)) * t_squared;
    let p_value = 1.0 - f_cdf(f, df1, df2);
    Ok(HotellingResult {
        t_squared,
        f,
        df1,
        df2,
        p_value,
        n,
        n_vars: p,
        mean: mean.iter().cloned().collect(),
    })
}

/// Pooled-variance two-sample two-sided t-test.
pub fn two_sample_t(a: &[f64], b: &[f64]) -> Result<TwoSampleT, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: a.len().min(b.len()),
        });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ma = a.iter().sum::<f64>() / na;
    let mb = b.iter().sum::<f64>() / nb;
    let ssa: f64 = a.iter().map(|&x| (x - ma) * (x - ma)).sum();
    let ssb: f64 = b.iter().map(|&x| (x - mb) * (x - mb)).sum();
    let df = na + nb - 2.0;
    let sp2 = (ssa + ssb) / df;
    if sp2 == 0.0 {
        let (t, p) = if ma == mb {
            (0.0, 1.0)
        } else {
            ((mb - ma).signum() * f64::INFINITY, 0.0)
        };
        return Ok(TwoSampleT {
            t,
            df,
            p_two_sided: p,
            mean_a: ma,
            mean_b: mb,
        });
    }
    let t = (mb - ma) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
    let p_two_sided = 2.0 * (1.0 - t_cdf(t.abs(), df));
    Ok(TwoSampleT {
        t,
        df,
        p_two_sided,
        mean_a: ma,
        mean_b: mb,
    })
}
