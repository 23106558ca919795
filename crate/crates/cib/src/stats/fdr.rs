//! False discovery rate control with the Benjamini-Hochberg step-up rule.

use super::StatsError;

/// The outcome of a Benjamini-Hochberg pass over a family of p-values.
#[derive(Debug, Clone)]
pub struct FdrResult {
    /// Rejection decision per hypothesis, in input order.
    pub rejected: Vec<bool>,
    /// Step-up adjusted p-values in input order; a hypothesis is rejected
    /// exactly when its adjusted p-value is at most q.
    pub adjusted_p: Vec<f64>,
    /// How many hypotheses were rejected.
    pub n_rejected: usize,
}

/// Benjamini-Hochberg step-up at FDR level `q`: with sorted p-values
/// p_(1) <= ... <= p_(m), find the largest k with p_(k) <= k q / m and
/// reject those k smallest hypotheses.
pub fn benjamini_hochberg(p_values: &[f64], q: f64) -> Result<FdrResult, StatsError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(StatsError::BadFdrLevel { q });
    }
    for &p in p_values {
        if !(0.0..=1.0).contains(&p) {
            return Err(StatsError::BadPValue { p });
        }
    }
    let m = p_values.len();
    if m == 0 {
        return Ok(FdrResult {
            rejected: vec![],
            adjusted_p: vec![],
            n_rejected: 0,
        });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].partial_cmp(&p_values[j]).unwrap());

    // Adjusted p-values: running minimum of m p_(k) / k from the top.
    let mut adjusted_p = vec![0.0; m];
    let mut running = 1.0f64;
    for k in (0..m).rev() {
        let idx = order[k];
        running = running.min(m as f64 * p_values[idx] / (k + 1) as f64);
        adjusted_p[idx] = running;
    }

    // Step-up decision: largest k with p_(k) <= k q / m rejects the k
    // smallest p-values.
    let mut cutoff = 0;
    for k in (0..m).rev() {
        if p_values[order[k]] <= (k + 1) as f64 * q / m as f64 {
            cutoff = k + 1;
            break;
        }
    }
    let mut rejected = vec![false; m];
    for &idx in &order[..cutoff] {
        rejected[idx] = true;
    }
    Ok(FdrResult {
        rejected,
        adjusted_p,
        n_rejected: cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent quadratic-time statement of the same rule: reject p_i
    /// when some observed threshold t >= p_i satisfies
    /// t * m <= q * #(p <= t).
    fn naive_step_up(p: &[f64], q: f64) -> Vec<bool> {
        let m = p.len() as f64;
        p.iter()
            .map(|&pi| {
                p.iter().any(|&t| {
                    let at_most_t = p.iter().filter(|&&x| x <= t).count() as f64;
                    pi <= t && t * m <= q * at_most_t
                })
            })
            .collect()
    }

    #[test]
    fn reference_family_rejects_only_the_smallest() {
        let p = [0.01, 0.04, 0.03, 0.20];
        let r = benjamini_hochberg(&p, 0.05).unwrap();
        assert_eq!(r.rejected, vec![true, false, false, false]);
        assert_eq!(r.n_rejected, 1);
        let expect_adj = [0.04, 4.0 * 0.04 / 3.0, 4.0 * 0.04 / 3.0, 0.20];
        for (got, want) in r.adjusted_p.iter().zip(expect_adj) {
            assert!((got - want).abs() < 1e-12, "adjusted {got} vs {want}");
        }
    }

    #[test]
    fn looser_level_rejects_more_of_the_same_family() {
        let p = [0.01, 0.04, 0.03, 0.20];
        // q = 0.1: thresholds 0.025/0.05/0.075/0.1, largest passing rank 3.
        let r = benjamini_hochberg(&p, 0.1).unwrap();
        assert_eq!(r.rejected, vec![true, true, true, false]);
        // q = 0.2: p_(4) = 0.20 <= 4 * 0.2 / 4, so the whole family goes.
        let r = benjamini_hochberg(&p, 0.2).unwrap();
        assert_eq!(r.rejected, vec![true, true, true, true]);
    }

    #[test]
    fn all_ones_reject_nothing() {
        let r = benjamini_hochberg(&[1.0, 1.0, 1.0], 0.2).unwrap();
        assert_eq!(r.n_rejected, 0);
        assert!(r.adjusted_p.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn all_zeros_reject_everything() {
        let r = benjamini_hochberg(&[0.0, 0.0], 0.05).unwrap();
        assert_eq!(r.rejected, vec![true, true]);
    }

    #[test]
    fn empty_family_is_a_no_op() {
        let r = benjamini_hochberg(&[], 0.05).unwrap();
        assert!(r.rejected.is_empty());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(benjamini_hochberg(&[0.5], 0.0).is_err());
        assert!(benjamini_hochberg(&[0.5], 1.0).is_err());
        assert!(benjamini_hochberg(&[1.5], 0.05).is_err());
        assert!(benjamini_hochberg(&[-0.1], 0.05).is_err());
        assert!(benjamini_hochberg(&[f64::NAN], 0.05).is_err());
    }

    #[test]
    fn tied_p_values_are_rejected_together() {
        let p = [0.02, 0.02, 0.9];
        let r = benjamini_hochberg(&p, 0.05).unwrap();
        assert_eq!(r.rejected[0], r.rejected[1]);
        assert_eq!(r.rejected, naive_step_up(&p, 0.05));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn matches_the_naive_quadratic_rule(
            p in prop::collection::vec(0.0f64..=1.0, 1..25),
            q in 0.01f64..0.5,
        ) {
            let r = benjamini_hochberg(&p, q).unwrap();
            prop_assert_eq!(r.rejected, naive_step_up(&p, q));
        }

        #[test]
        fn rejection_equals_adjusted_p_at_most_q(
            p in prop::collection::vec(0.0f64..=1.0, 1..25),
            q in 0.01f64..0.5,
        ) {
            let r = benjamini_hochberg(&p, q).unwrap();
            for (rej, adj) in r.rejected.iter().zip(&r.adjusted_p) {
                prop_assert_eq!(*rej, *adj <= q);
            }
        }

        #[test]
        fn rejections_grow_with_the_level(
            p in prop::collection::vec(0.0f64..=1.0, 1..25),
            q1 in 0.01f64..0.5,
            bump in 0.01f64..0.4,
        ) {
            let tight = benjamini_hochberg(&p, q1).unwrap();
            let loose = benjamini_hochberg(&p, q1 + bump).unwrap();
            for (a, b) in tight.rejected.iter().zip(&loose.rejected) {
                prop_assert!(!a | b, "rejection lost when loosening q");
            }
        }

        #[test]
        fn adjusted_p_preserves_order(
            p in prop::collection::vec(0.0f64..=1.0, 2..25),
        ) {
            let r = benjamini_hochberg(&p, 0.05).unwrap();
            for i in 0..p.len() {
                for j in 0..p.len() {
                    if p[i] <= p[j] {
                        prop_assert!(r.adjusted_p[i] <= r.adjusted_p[j] + 1e-15);
                    }
                }
            }
        }
    }
}
