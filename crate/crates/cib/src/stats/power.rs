//! Power analysis for the two-sample t-test, exact via the noncentral t
//! distribution, with a Monte-Carlo cross-check used by tests and examples.

use super::dist::{noncentral_t_cdf, t_quantile};
use super::StatsError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Largest per-group size the solver will consider.
pub const MAX_N_PER_GROUP: u64 = 1_000_000;

/// Sidedness of the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tails {
    One,
    Two,
}

/// A power-analysis question: the smallest balanced two-group design that
/// detects `mean_diff` (in raw units, against common SD `sd`) at level
/// `alpha` with probability at least `power`.
#[derive(Debug, Clone, Copy)]
pub struct PowerSpec {
    pub mean_diff: f64,
    pub sd: f64,
    pub alpha: f64,
    pub power: f64,
    pub tails: Tails,
}

/// The solver's answer.
#[derive(Debug, Clone, Copy)]
pub struct SampleSize {
    /// Smallest per-group n reaching the target power.
    pub n_per_group: u64,
    /// Exact power at that n.
    pub achieved_power: f64,
    /// Standardized effect size |mean_diff| / sd.
    pub effect_size: f64,
}

/// Exact power of the two-sample pooled t-test with `n_per_group` per arm
/// and standardized effect size `d`.
pub fn two_sample_power(d: f64, n_per_group: u64, alpha: f64, tails: Tails) -> f64 {
    assert!(n_per_group >= 2, "need at least 2 per group");
    let n = n_per_group as f64;
    let df = 2.0 * n - 2.0;
    let ncp = d.abs() * (n / 2.0).sqrt();
    match tails {
        Tails::Two => {
            let tcrit = t_quantile(1.0 - alpha / 2.0, df);
            1.0 - noncentral_t_cdf(tcrit, df, ncp) + noncentral_t_cdf(-tcrit, df, ncp)
        }
        Tails::One => {
            let tcrit = t_quantile(1.0 - alpha, df);
            1.0 - noncentral_t_cdf(tcrit, df, ncp)
        }
    }
}

/// Smallest per-group n whose exact power reaches `spec.power`, found by
/// doubling then binary search. Designs beyond [`MAX_N_PER_GROUP`] per
/// group are refused.
pub fn solve_sample_size(spec: &PowerSpec) -> Result<SampleSize, StatsError> {
    if !(spec.sd > 0.0) || !spec.mean_diff.is_finite() {
        return Err(StatsError::BadPowerSpec {
            detail: format!("sd must be positive and mean_diff finite, got sd={}, mean_diff={}",
                spec.sd, spec.mean_diff),
        });
    }
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) || !(spec.power > 0.0 && spec.power < 1.0) {
        return Err(StatsError::BadPowerSpec {
            detail: format!("alpha and power must lie in (0,1), got alpha={}, power={}",
                spec.alpha, spec.power),
        });
    }
    let d = spec.mean_diff.abs() / spec.sd;
    let power_at = |n: u64| two_sample_power(d, n, spec.alpha, spec.tails);
    if power_at(2) >= spec.power {
        return Ok(SampleSize {
            n_per_group: 2,
            achieved_power: power_at(2),
            effect_size: d,
        });
    }
    // Find a bracketing upper bound by doubling.
    let mut lo = 2u64; // power(lo) < target
    let mut hi = 4u64;
    while power_at(hi) < spec.power {
        lo = hi;
        if hi > MAX_N_PER_GROUP {
            return Err(StatsError::NoSolutionBelowCap {
                cap: MAX_N_PER_GROUP,
            });
        }
        hi *= 2;
    }
    // Binary search for the smallest n in (lo, hi] that reaches the target.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if power_at(mid) >= spec.power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > MAX_N_PER_GROUP {
        return Err(StatsError::NoSolutionBelowCap {
            cap: MAX_N_PER_GROUP,
        });
    }
    Ok(SampleSize {
        n_per_group: hi,
        achieved_power: power_at(hi),
        effect_size: d,
    })
}

/// Monte-Carlo estimate of two-sample t-test power: `reps` simulated
/// experiments with `n_per_group` draws per arm, pooled-variance test.
pub fn monte_carlo_power(
    mean_diff: f64,
    sd: f64,
    n_per_group: u64,
    alpha: f64,
    tails: Tails,
    reps: u32,
    seed: u64,
) -> f64 {
    assert!(n_per_group >= 2 && reps > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_per_group as f64;
    let df = 2.0 * n - 2.0;
    let tcrit = match tails {
        Tails::Two => t_quantile(1.0 - alpha / 2.0, df),
        Tails::One => t_quantile(1.0 - alpha, df),
    };
    let mut rejections = 0u32;
    for _ in 0..reps {
        let mut stats = [(0.0f64, 0.0f64); 2]; // (sum, sum of squares)
        for (g, shift) in [(0usize, 0.0), (1usize, mean_diff)] {
            for _ in 0..n_per_group {
                let z: f64 = rng.sample(StandardNormal);
                let x = shift + sd * z;
                stats[g].0 += x;
                stats[g].1 += x * x;
            }
        }
        let mean = |g: usize| stats[g].0 / n;
        let var = |g: usize| (stats[g].1 - stats[g].0 * stats[g].0 / n) / (n - 1.0);
        let sp2 = (var(0) + var(1)) / 2.0;
        let t = (mean(1) - mean(0)) / (sp2 * 2.0 / n).sqrt();
        let reject = match tails {
            Tails::Two => t.abs() > tcrit,
            Tails::One => t > tcrit,
        };
        if reject {
            rejections += 1;
        }
    }
    rejections as f64 / reps as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_frozen_values_for_moderate_effect() {
        // d = 1/0.9, two-tailed alpha 0.05. Values frozen from an
        // independent high-precision evaluation.
        let d = 1.0 / 0.9;
        let p13 = two_sample_power(d, 13, 0.05, Tails::Two);
        let p14 = two_sample_power(d, 14, 0.05, Tails::Two);
        assert!((p13 - 0.775760379137).abs() < 1e-9, "n=13 power {p13}");
        assert!((p14 - 0.807760882471).abs() < 1e-9, "n=14 power {p14}");
    }

    #[test]
    fn moderate_effect_needs_fourteen_per_group() {
        let spec = PowerSpec {
            mean_diff: 1.0,
            sd: 0.9,
            alpha: 0.05,
            power: 0.8,
            tails: Tails::Two,
        };
        let r = solve_sample_size(&spec).unwrap();
        assert_eq!(r.n_per_group, 14);
        assert!(r.achieved_power >= 0.8);
        assert!((r.effect_size - 1.0 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn huge_effect_needs_two_per_group() {
        let spec = PowerSpec {
            mean_diff: 1.0,
            sd: 0.11,
            alpha: 0.05,
            power: 0.8,
            tails: Tails::Two,
        };
        let r = solve_sample_size(&spec).unwrap();
        assert_eq!(r.n_per_group, 2);
        assert!(
            (r.achieved_power - 0.983096235228).abs() < 1e-9,
            "achieved {}",
            r.achieved_power
        );
    }

    #[test]
    fn zero_effect_hits_the_cap() {
        let spec = PowerSpec {
            mean_diff: 0.0,
            sd: 1.0,
            alpha: 0.05,
            power: 0.8,
            tails: Tails::Two,
        };
        let err = solve_sample_size(&spec).unwrap_err();
        assert!(matches!(err, StatsError::NoSolutionBelowCap { .. }));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = PowerSpec {
            mean_diff: 1.0,
            sd: 1.0,
            alpha: 0.05,
            power: 0.8,
            tails: Tails::Two,
        };
        for bad in [
            PowerSpec { sd: 0.0, ..base },
            PowerSpec { sd: -1.0, ..base },
            PowerSpec { alpha: 0.0, ..base },
            PowerSpec { alpha: 1.0, ..base },
            PowerSpec { power: 0.0, ..base },
            PowerSpec { power: 1.0, ..base },
        ] {
            assert!(solve_sample_size(&bad).is_err());
        }
    }

    #[test]
    fn one_tailed_power_exceeds_two_tailed() {
        for n in [5, 12, 40] {
            let two = two_sample_power(0.6, n, 0.05, Tails::Two);
            let one = two_sample_power(0.6, n, 0.05, Tails::One);
            assert!(one > two, "n={n}: one={one} two={two}");
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact_power() {
        let exact = two_sample_power(1.0 / 0.9, 14, 0.05, Tails::Two);
        let mc = monte_carlo_power(1.0, 0.9, 14, 0.05, Tails::Two, 40_000, 7);
        assert!(
            (mc - exact).abs() < 0.02,
            "monte carlo {mc} vs exact {exact}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn power_is_nondecreasing_in_n(
            d in 0.1f64..2.0,
            n in 2u64..60,
        ) {
            let p1 = two_sample_power(d, n, 0.05, Tails::Two);
            let p2 = two_sample_power(d, n + 1, 0.05, Tails::Two);
            prop_assert!(p2 >= p1 - 1e-12, "d={} n={}: {} then {}", d, n, p1, p2);
        }

        #[test]
        fn solver_returns_the_minimal_n(
            d in 0.25f64..2.5,
            power in 0.5f64..0.95,
        ) {
            let spec = PowerSpec {
                mean_diff: d,
                sd: 1.0,
                alpha: 0.05,
                power,
                tails: Tails::Two,
            };
            let r = solve_sample_size(&spec).unwrap();
            prop_assert!(r.achieved_power >= power);
            if r.n_per_group > 2 {
                let below = two_sample_power(d, r.n_per_group - 1, 0.05, Tails::Two);
                prop_assert!(below < power);
            }
        }

        #[test]
        fn power_is_symmetric_in_effect_sign(
            d in 0.1f64..2.0,
            n in 2u64..40,
        ) {
            let plus = two_sample_power(d, n, 0.05, Tails::Two);
            let minus = two_sample_power(-d, n, 0.05, Tails::Two);
            prop_assert!((plus - minus).abs() < 1e-12);
        }
    }
}
