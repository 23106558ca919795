//! Probability distribution functions: normal, Student t, F, noncentral t.

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by bisection on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    bisect(|x| normal_cdf(x) - p, -50.0, 50.0)
}

/// Student t CDF with `df` degrees of freedom, via the regularized
/// incomplete beta function.
///
/// Two equivalent beta forms are used so the beta argument stays away
/// from 1, where the continued fraction loses accuracy: the central-mass
/// form near the median (there `df / (df + t^2)` would round to 1) and
/// the tail form elsewhere (it keeps relative accuracy for tiny tails).
pub fn t_cdf(t: f64, df: f64) -> f64 {
    assert!(df > 0.0);
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let t2 = t * t;
    if t2 < df {
        // P(|T| <= |t|) = I_y(1/2, df/2) with y = t^2 / (df + t^2).
        let half_central = 0.5 * beta_reg(0.5, 0.5 * df, t2 / (df + t2));
        if t >= 0.0 {
            0.5 + half_central
        } else {
            0.5 - half_central
        }
    } else {
        // P(T > |t|) = I_x(df/2, 1/2) / 2 with x = df / (df + t^2).
        let half_tail = 0.5 * beta_reg(0.5 * df, 0.5, df / (df + t2));
        if t >= 0.0 {
            1.0 - half_tail
        } else {
            half_tail
        }
    }
}

/// Student t quantile by bisection on [`t_cdf`].
pub fn t_quantile(p: f64, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    bisect(|t| t_cdf(t, df) - p, -1e10, 1e10)
}

/// F distribution CDF with `(d1, d2)` degrees of freedom.
pub fn f_cdf(f: f64, d1: f64, d2: f64) -> f64 {
    assert!(d1 > 0.0 && d2 > 0.0);
    if f <= 0.0 {
        return 0.0;
    }
    if f.is_infinite() {
        return 1.0;
    }
    beta_reg(0.5 * d1, 0.5 * d2, d1 * f / (d1 * f + d2))
}

const NCT_MAX_TERMS: usize = 4096;
const NCT_TOL: f64 = 1e-14;

/// Noncentral t CDF with `df` degrees of freedom and noncentrality `ncp`.
///
/// Computed by the incomplete-beta series with Poisson weights, terms
/// evaluated in log space; absolute accuracy about 1e-10 over the ranges
/// used here (validated against independent quadrature in the tests).
pub fn noncentral_t_cdf(t: f64, df: f64, ncp: f64) -> f64 {
    assert!(df > 0.0);
    if t.is_nan() || ncp.is_nan() {
        return f64::NAN;
    }
    if t < 0.0 {
        return 1.0 - noncentral_t_cdf(-t, df, -ncp);
    }
    if t.is_infinite() {
        return 1.0;
    }
    let base = normal_cdf(-ncp);
    let x = t * t / (df + t * t);
    if x <= 0.0 {
        return base;
    }
    let lambda = 0.5 * ncp * ncp;
    if lambda == 0.0 {
        return (base + 0.5 * beta_reg(0.5, 0.5 * df, x)).clamp(0.0, 1.0);
    }
    let sgn = if ncp >= 0.0 { 1.0 } else { -1.0 };
    let ln_lambda = lambda.ln();
    let mut sum = 0.0;
    let mut cum_p = 0.0;
    for j in 0..NCT_MAX_TERMS {
        let jf = j as f64;
        let pj = (-lambda + jf * ln_lambda - ln_gamma(jf + 1.0)).exp();
        let qj = (-lambda + (jf + 0.5) * ln_lambda - ln_gamma(jf + 1.5)).exp();
        let ip = beta_reg(jf + 0.5, 0.5 * df, x);
        let iq = beta_reg(jf + 1.0, 0.5 * df, x);
        sum += pj * ip + sgn * qj * iq;
        cum_p += pj;
        // The incomplete-beta factors decrease in j, so once the remaining
        // Poisson mass is negligible the tail of the series is too.
        if jf > lambda && (1.0 - cum_p) * (ip + iq) < NCT_TOL {
            break;
        }
    }
    (base + 0.5 * sum).clamp(0.0, 1.0)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
