//! Ranking and threshold metrics. The AUC is computed two independent
//! ways over exact integer counts so the routes agree bit for bit.

use super::ClassifyError;

/// Confusion counts at a fixed threshold (predict positive when the score
/// is at least the threshold).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Threshold and ranking metrics for one set of scored examples.
#[derive(Debug, Clone, Copy)]
pub struct Metrics {
    pub auc: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub n_pos: usize,
    pub n_neg: usize,
}

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

fn check_two_classes(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), ClassifyError> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(ClassifyError::BadInput(format!(
            "scores and labels must be nonempty and equal length, got {} and {}",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(ClassifyError::BadInput("scores contain NaN".into()));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(ClassifyError::OneClassOnly);
    }
    Ok((pos, neg))
}

/// AUC by trapezoidal integration of the ROC curve, with tied scores
/// handled as a single threshold step. All area accumulation is integer
/// (double area in units of one grid cell), divided exactly once.
pub fn auc_trapezoid(scores: &[f64], labels: &[bool]) -> Result<f64, ClassifyError> {
    let (pos, neg) = check_two_classes(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());
    let mut double_area: u128 = 0;
    let mut tp_prev: u128 = 0;
    let mut fp_prev: u128 = 0;
    let mut tp: u128 = 0;
    let mut fp: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if labels[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        double_area += (tp_prev + tp) * (fp - fp_prev);
        tp_prev = tp;
        fp_prev = fp;
        i = j + 1;
    }
    Ok(double_area as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// AUC by the rank-sum route: over all positive-negative pairs, count a
/// win as 2 and a tie as 1, then divide by twice the number of pairs.
/// Agrees exactly with [`auc_trapezoid`].
pub fn auc_mann_whitney(scores: &[f64], labels: &[bool]) -> Result<f64, ClassifyError> {
    let (pos, neg) = check_two_classes(scores, labels)?;
    let mut two_u: u128 = 0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                two_u += 2;
            } else if scores[i] == scores[j] {
                two_u += 1;
            }
        }
    }
    Ok(two_u as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// ROC curve as (false positive rate, true positive rate) points, one per
/// distinct score plus the (0,0) origin.
pub fn roc_points(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>, ClassifyError> {
    let (pos, neg) = check_two_classes(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if labels[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        i = j + 1;
    }
    Ok(points)
}

/// Confusion counts at `threshold`.
pub fn confusion_at(scores: &[f64], labels: &[bool], threshold: f64) -> Confusion {
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&s, &l) in scores.iter().zip(labels) {
        let pred = s >= threshold;
        match (pred, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// F1 score; an empty denominator (no positives predicted or present)
/// gives 0.
pub fn f1_score(c: &Confusion) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * c.tp as f64 / denom as f64
    }
}

/// All metrics at once: trapezoid AUC plus threshold metrics at
/// `threshold`.
pub fn evaluate(scores: &[f64], labels: &[bool], threshold: f64) -> Result<Metrics, ClassifyError> {
    let (pos, neg) = check_two_classes(scores, labels)?;
    let auc = auc_trapezoid(scores, labels)?;
    let confusion = confusion_at(scores, labels, threshold);
    let accuracy = (confusion.tp + confusion.tn) as f64 / scores.len() as f64;
    Ok(Metrics {
        auc,
        f1: f1_score(&confusion),
        accuracy,
        confusion,
        n_pos: pos,
        n_neg: neg,
    })
}
