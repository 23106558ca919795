//! L2-regularized logistic regression fit by Newton iterations with step
//! halving. Features are standardized using training-set statistics that
//! the model stores, so prediction-time inputs stay on the raw scale.

use super::ClassifyError;
use nalgebra::{DMatrix, DVector};

/// Per-sample norm threshold on the gradient that counts as converged.
/// The attainable floor in double precision grows with the objective's
/// magnitude, itself proportional to the sample count, so the threshold
/// is scaled by the number of rows at the convergence check.
const GRAD_TOL: f64 = 1e-7;
/// Maximum number of step-halvings within one Newton iteration.
const MAX_HALVINGS: u32 = 40;

/// A fitted logistic model. Weights act on standardized features; the
/// stored means and SDs map raw inputs onto that scale.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub feature_means: Vec<f64>,
    pub feature_sds: Vec<f64>,
    pub l2: f64,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(z)) without overflow.
fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Penalized negative log-likelihood of a logistic model on raw features:
/// sum_i [log(1 + exp(z_i)) - y_i z_i] + (l2/2) |w|^2, with the intercept
/// unpenalized.
pub fn penalized_nll(x: &[Vec<f64>], y: &[bool], weights: &[f64], intercept: f64, l2: f64) -> f64 {
    let mut nll = 0.0;
    for (row, &yi) in x.iter().zip(y) {
        let z = intercept + row.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
        nll += log1p_exp(z) - if yi { z } else { 0.0 };
    }
    nll + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`penalized_nll`] with respect to (weights, intercept).
pub fn penalized_grad(
    x: &[Vec<f64>],
    y: &[bool],
    weights: &[f64],
    intercept: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (row, &yi) in x.iter().zip(y) {
        let z = intercept + row.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
        let resid = sigmoid(z) - if yi { 1.0 } else { 0.0 };
        gb += resid;
        for (g, &xv) in gw.iter_mut().zip(row) {
            *g += resid * xv;
        }
    }
    for (g, &w) in gw.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    (gw, gb)
}

fn standardization(x: &[Vec<f64>], p: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let mut means = vec![0.0; p];
    for row in x {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut sds = vec![0.0; p];
    for row in x {
        for ((s, &v), &m) in sds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut sds {
        *s = (*s / n).sqrt();
        if *s == 0.0 {
            // A constant feature carries no signal; mapping it to zero via
            // unit scale keeps the algebra finite.
            *s = 1.0;
        }
    }
    (means, sds)
}

/// Fit by Newton iterations on the standardized design, with the L2
/// penalty applied to weights only.
pub fn train_logistic(
    x: &[Vec<f64>],
    y: &[bool],
    l2: f64,
    max_iters: usize,
) -> Result<LogisticModel, ClassifyError> {
    let p = x.first().map_or(0, Vec::len);
    if x.is_empty() || p == 0 || x.len() != y.len() {
        return Err(ClassifyError::BadInput(format!(
            "need matching nonempty features and labels, got {} rows and {} labels",
            x.len(),
            y.len()
        )));
    }
    if x.iter().any(|r| r.len() != p) {
        return Err(ClassifyError::BadInput("ragged feature rows".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ClassifyError::BadInput("non-finite feature value".into()));
    }
    if !(l2 >= 0.0) {
        return Err(ClassifyError::BadInput(format!("l2 must be >= 0, got {l2}")));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(ClassifyError::OneClassOnly);
    }

    let (means, sds) = standardization(x, p);
    let xs: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(k, &v)| (v - means[k]) / sds[k])
                .collect()
        })
        .collect();

    // theta = (weights..., intercept), intercept last.
    let dim = p + 1;
    let mut theta = DVector::<f64>::zeros(dim);
    let objective = |t: &DVector<f64>| -> f64 {
        penalized_nll(&xs, y, t.as_slice().split_at(p).0, t[p], l2)
    };
    let mut current = objective(&theta);
    let mut iterations = 0;
    loop {
        let (gw, gb) = penalized_grad(&xs, y, theta.as_slice().split_at(p).0, theta[p], l2);
        let mut grad = DVector::zeros(dim);
        for (k, &g) in gw.iter().enumerate() {
            grad[k] = g;
        }
        grad[p] = gb;
        if grad.norm() <= GRAD_TOL * (x.len() as f64).max(1.0) {
            break;
        }
        if iterations >= max_iters {
            return Err(ClassifyError::NonConvergence {
                iters: iterations,
                grad_norm: grad.norm(),
            });
        }

        let mut hess = DMatrix::<f64>::zeros(dim, dim);
        for row in &xs {
            let z = theta[p]
                + row
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| theta[k] * v)
                    .sum::<f64>();
            let pi = sigmoid(z);
            let wi = pi * (1.0 - pi);
            for a in 0..p {
                for b in 0..p {
                    hess[(a, b)] += wi * row[a] * row[b];
                }
                hess[(a, p)] += wi * row[a];
                hess[(p, a)] += wi * row[a];
            }
            hess[(p, p)] += wi;
        }
        for k in 0..p {
            hess[(k, k)] += l2;
        }

        let step = hess
            .lu()
            .solve(&(-&grad))
            .ok_or(ClassifyError::NonConvergence {
                iters: iterations,
                grad_norm: grad.norm(),
            })?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let candidate = &theta + alpha * &step;
            let value = objective(&candidate);
            if value <= current {
                theta = candidate;
                current = value;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(ClassifyError::NonConvergence {
                iters: iterations,
                grad_norm: grad.norm(),
            });
        }
        iterations += 1;
    }
    Ok(LogisticModel {
        weights: theta.as_slice()[..p].to_vec(),
        intercept: theta[p],
        feature_means: means,
        feature_sds: sds,
        l2,
        iterations,
    })
}

impl LogisticModel {
    /// Linear predictor for one raw-scale feature row.
    pub fn decision(&self, features: &[f64]) -> f64 {
        assert_eq!(features.len(), self.weights.len(), "feature count mismatch");
        self.intercept
            + features
                .iter()
                .enumerate()
                .map(|(k, &v)| self.weights[k] * (v - self.feature_means[k]) / self.feature_sds[k])
                .sum::<f64>()
    }

    /// Predicted probability of the positive class.
    pub fn predict_proba(&self, features: &[f64]) -> f64 {
        sigmoid(self.decision(features))
    }

    /// Deviance residuals, the signed square-root contributions to the
    /// model deviance; useful for normality diagnostics.
    pub fn deviance_residuals(&self, x: &[Vec<f64>], y: &[bool]) -> Vec<f64> {
        x.iter()
            .zip(y)
            .map(|(row, &yi)| {
                let p = self.predict_proba(row).clamp(1e-15, 1.0 - 1e-15);
                let dev = if yi { -2.0 * p.ln() } else { -2.0 * (1.0 - p).ln() };
                let sign = if yi { 1.0 } else { -1.0 };
                sign * dev.sqrt()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_data() -> (Vec<Vec<f64>>, Vec<bool>) {
        let x = vec![
            vec![0.2, 1.0],
            vec![0.4, 0.8],
            vec![0.5, 1.3],
            vec![0.9, 0.2],
            vec![1.1, 0.4],
            vec![1.4, 0.1],
            vec![0.3, 0.9],
            vec![1.2, 0.3],
        ];
        let y = vec![false, false, false, true, true, true, false, true];
        (x, y)
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let (x, y) = toy_data();
        let w = vec![0.37, -0.81];
        let b = 0.25;
        let l2 = 0.7;
        let (gw, gb) = penalized_grad(&x, &y, &w, b, l2);
        let h = 1e-6;
        for k in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += h;
            wm[k] -= h;
            let numeric =
                (penalized_nll(&x, &y, &wp, b, l2) - penalized_nll(&x, &y, &wm, b, l2)) / (2.0 * h);
            let rel = (gw[k] - numeric).abs() / numeric.abs().max(1.0);
            assert!(rel < 1e-6, "weight {k}: analytic {} numeric {numeric}", gw[k]);
        }
        let numeric_b =
            (penalized_nll(&x, &y, &w, b + h, l2) - penalized_nll(&x, &y, &w, b - h, l2))
                / (2.0 * h);
        let rel = (gb - numeric_b).abs() / numeric_b.abs().max(1.0);
        assert!(rel < 1e-6, "intercept: analytic {gb} numeric {numeric_b}");
    }

    #[test]
    fn fit_separates_the_toy_data() {
        let (x, y) = toy_data();
        let model = train_logistic(&x, &y, 1.0, 100).unwrap();
        for (row, &yi) in x.iter().zip(&y) {
            let p = model.predict_proba(row);
            assert!((0.0..=1.0).contains(&p));
            if yi {
                assert!(p > 0.5, "positive example scored {p}");
            } else {
                assert!(p < 0.5, "negative example scored {p}");
            }
        }
        assert!(model.iterations <= 100);
    }

    #[test]
    fn converged_fit_has_tiny_gradient() {
        let (x, y) = toy_data();
        let model = train_logistic(&x, &y, 1.0, 100).unwrap();
        let xs: Vec<Vec<f64>> = x
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, &v)| (v - model.feature_means[k]) / model.feature_sds[k])
                    .collect()
            })
            .collect();
        let (gw, gb) = penalized_grad(&xs, &y, &model.weights, model.intercept, model.l2);
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        assert!(norm <= 1e-8, "gradient norm {norm}");
    }

    #[test]
    fn rescaling_a_feature_leaves_predictions_unchanged() {
        let (x, y) = toy_data();
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| vec![r[0] * 1000.0, r[1]]).collect();
        let m1 = train_logistic(&x, &y, 1.0, 100).unwrap();
        let m2 = train_logistic(&scaled, &y, 1.0, 100).unwrap();
        for (r1, r2) in x.iter().zip(&scaled) {
            assert!((m1.predict_proba(r1) - m2.predict_proba(r2)).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_feature_gets_zero_weight() {
        let (mut x, y) = toy_data();
        for row in &mut x {
            row.push(3.25);
        }
        let model = train_logistic(&x, &y, 1.0, 100).unwrap();
        assert_eq!(model.feature_sds[2], 1.0);
        assert!(model.weights[2].abs() < 1e-9, "weight {}", model.weights[2]);
    }

    #[test]
    fn single_class_training_is_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train_logistic(&x, &[true, true], 1.0, 100).unwrap_err(),
            ClassifyError::OneClassOnly
        ));
    }

    #[test]
    fn iteration_budget_of_zero_reports_nonconvergence() {
        let (x, y) = toy_data();
        let err = train_logistic(&x, &y, 1.0, 0).unwrap_err();
        assert!(matches!(err, ClassifyError::NonConvergence { .. }));
    }

    #[test]
    fn deviance_residual_signs_follow_labels() {
        let (x, y) = toy_data();
        let model = train_logistic(&x, &y, 1.0, 100).unwrap();
        for (r, &yi) in model.deviance_residuals(&x, &y).iter().zip(&y) {
            if yi {
                assert!(*r >= 0.0);
            } else {
                assert!(*r <= 0.0);
            }
            assert!(r.is_finite());
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = toy_data();
        let m1 = train_logistic(&x, &y, 1.0, 100).unwrap();
        let m2 = train_logistic(&x, &y, 1.0, 100).unwrap();
        assert_eq!(m1.weights, m2.weights);
        assert_eq!(m1.intercept, m2.intercept);
    }
}
