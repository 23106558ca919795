//! Participant-level cross-validation with stratified folds, optional
//! training-fold rebalancing, and pooled out-of-fold evaluation. Fold
//! hygiene is enforced with always-on assertions.

use super::forest::{train_forest, ForestConfig};
use super::logistic::train_logistic;
use super::metrics::{evaluate, Metrics};
use super::resample::{rebalance, Resample};
use super::{ClassifyError, StudyDataset};
use crate::rng::derive_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Which classifier to cross-validate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Logistic,
    Forest,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(ModelKind::Logistic),
            "forest" => Ok(ModelKind::Forest),
            other => Err(format!(
                "unknown model {other:?}, expected logistic or forest"
            )),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Forest => "forest",
        })
    }
}

/// Cross-validation settings.
#[derive(Debug, Clone, Copy)]
pub struct CvSettings {
    pub model: ModelKind,
    pub folds: usize,
    pub seed: u64,
    pub resample: Resample,
    pub logistic_l2: f64,
    pub n_trees: usize,
    pub threshold: f64,
}

/// One pooled out-of-fold score.
#[derive(Debug, Clone)]
pub struct OofScore {
    pub participant_id: String,
    pub label: bool,
    pub score: f64,
}

/// The result of one cross-validation run.
#[derive(Debug, Clone)]
pub struct CvReport {
    /// Human-readable fold plan, e.g. "stratified 5-fold".
    pub plan: String,
    pub fell_back_to_loo: bool,
    pub warnings: Vec<String>,
    /// Metrics over the pooled out-of-fold scores.
    pub pooled: Metrics,
    /// Out-of-fold scores in dataset row order.
    pub oof: Vec<OofScore>,
    pub fold_sizes: Vec<usize>,
}

/// Stratified folds: indices of each class are shuffled with their own
/// seeded stream and dealt round-robin, so every fold holds close to the
/// study-wide class balance.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(k >= 2 && k <= labels.len());
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (class_tag, class) in [(0u64, false), (1u64, true)] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, class_tag));
        for i in (1..members.len()).rev() {
            let j = rand::Rng::random_range(&mut rng, 0..=i);
            members.swap(i, j);
        }
        for (pos, idx) in members.into_iter().enumerate() {
            folds[pos % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    folds
}

/// Run cross-validation and pool the out-of-fold scores.
///
/// When either class has fewer members than the requested fold count the
/// plan falls back to leave-one-out and says so in the report.
pub fn cross_validate(ds: &StudyDataset, settings: &CvSettings) -> Result<CvReport, ClassifyError> {
    let labels = ds.labels();
    let n = labels.len();
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = n - n_pos;
    if n_pos < 2 || n_neg < 2 {
        return Err(ClassifyError::TooFewPerClass {
            pos: n_pos,
            neg: n_neg,
        });
    }
    if settings.folds < 2 {
        return Err(ClassifyError::BadInput(format!(
            "need at least 2 folds, got {}",
            settings.folds
        )));
    }
    let mut warnings = Vec::new();
    let min_class = n_pos.min(n_neg);
    let (folds, plan, fell_back) = if min_class < settings.folds {
        warnings.push(format!(
            "smallest class has {min_class} members, fewer than {} folds; \
             falling back to leave-one-out",
            settings.folds
        ));
        let folds: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        (folds, "leave-one-out".to_string(), true)
    } else {
        let k = settings.folds;
        (
            stratified_folds(&labels, k, settings.seed),
            format!("stratified {k}-fold"),
            false,
        )
    };

    let features = ds.features();
    let mut scores = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    for (f, test) in folds.iter().enumerate() {
        let test_set: BTreeSet<usize> = test.iter().copied().collect();
        let train: Vec<usize> = (0..n).filter(|i| !test_set.contains(i)).collect();

        // Fold hygiene: held-out participants must never reach training,
        // directly or through resampling.
        let test_ids: BTreeSet<&str> = test
            .iter()
            .map(|&i| ds.rows[i].participant_id.as_str())
            .collect();
        assert!(
            train
                .iter()
                .all(|&i| !test_ids.contains(ds.rows[i].participant_id.as_str())),
            "training fold shares a participant with its held-out fold"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(settings.seed, 1000 + f as u64));
        let train_ids: BTreeSet<usize> = train.iter().copied().collect();
        let resampled = rebalance(&train, &labels, settings.resample, &mut rng);
        assert!(
            resampled.iter().all(|i| train_ids.contains(i)),
            "resampling introduced an index from outside the training fold"
        );

        let x_train: Vec<Vec<f64>> = resampled.iter().map(|&i| features[i].clone()).collect();
        let y_train: Vec<bool> = resampled.iter().map(|&i| labels[i]).collect();
        match settings.model {
            ModelKind::Logistic => {
                let model = train_logistic(&x_train, &y_train, settings.logistic_l2, 100)?;
                for &i in test {
                    scores[i] = model.predict_proba(&features[i]);
                    seen[i] = true;
                }
            }
            ModelKind::Forest => {
                let fcfg = ForestConfig {
                    n_trees: settings.n_trees,
                    min_leaf: 1,
                    seed: derive_seed(settings.seed, 2000 + f as u64),
                };
                let model = train_forest(&x_train, &y_train, &fcfg)?;
                for &i in test {
                    scores[i] = model.predict_score(&features[i]);
                    seen[i] = true;
                }
            }
        }
    }
    assert!(
        seen.iter().all(|&s| s),
        "every row must receive exactly one out-of-fold score"
    );

    let pooled = evaluate(&scores, &labels, settings.threshold)?;
    let oof = ds
        .rows
        .iter()
        .zip(&scores)
        .map(|(row, &score)| OofScore {
            participant_id: row.participant_id.clone(),
            label: row.label,
            score,
        })
        .collect();
    Ok(CvReport {
        plan,
        fell_back_to_loo: fell_back,
        warnings,
        pooled,
        oof,
        fold_sizes: folds.iter().map(Vec::len).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::DatasetRow;

    fn dataset(n_pos: usize, n_neg: usize, separable: bool) -> StudyDataset {
        let mut rows = Vec::new();
        for i in 0..n_pos + n_neg {
            let label = i < n_pos;
            let base = if label { 1.0 } else { 0.0 };
            let wiggle = (i as f64 * 0.37).sin() * 0.2;
            let v = if separable {
                base + wiggle * 0.2
            } else {
                wiggle + 0.5
            };
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

    fn settings(model: ModelKind) -> CvSettings {
        CvSettings {
            model,
            folds: 5,
            seed: 42,
            resample: Resample::None,
            logistic_l2: 1.0,
            n_trees: 40,
            threshold: 0.5,
        }
    }

    #[test]
    fn stratified_folds_partition_and_balance() {
        let labels: Vec<bool> = (0..20).map(|i| i < 8).collect();
        let folds = stratified_folds(&labels, 4, 7);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        for fold in &folds {
            let pos = fold.iter().filter(|&&i| labels[i]).count();
            assert_eq!(pos, 2, "8 positives over 4 folds is 2 each");
            assert_eq!(fold.len(), 5);
        }
    }

    #[test]
    fn separable_data_cross_validates_cleanly() {
        let ds = dataset(10, 10, true);
        for model in [ModelKind::Logistic, ModelKind::Forest] {
            let report = cross_validate(&ds, &settings(model)).unwrap();
            assert!(report.pooled.auc > 0.95, "{model}: auc {}", report.pooled.auc);
            assert!(!report.fell_back_to_loo);
            assert_eq!(report.oof.len(), 20);
            assert_eq!(report.fold_sizes.iter().sum::<usize>(), 20);
        }
    }

    #[test]
    fn tiny_minority_falls_back_to_leave_one_out() {
        let ds = dataset(3, 12, true);
        let report = cross_validate(&ds, &settings(ModelKind::Logistic)).unwrap();
        assert!(report.fell_back_to_loo);
        assert_eq!(report.plan, "leave-one-out");
        assert_eq!(report.fold_sizes, vec![1; 15]);
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn single_member_class_is_rejected() {
        let ds = dataset(1, 12, true);
        let err = cross_validate(&ds, &settings(ModelKind::Logistic)).unwrap_err();
        assert!(matches!(err, ClassifyError::TooFewPerClass { .. }));
    }

    #[test]
    fn reports_are_deterministic_per_seed() {
        let ds = dataset(8, 12, false);
        let a = cross_validate(&ds, &settings(ModelKind::Forest)).unwrap();
        let b = cross_validate(&ds, &settings(ModelKind::Forest)).unwrap();
        let sa: Vec<u64> = a.oof.iter().map(|o| o.score.to_bits()).collect();
        let sb: Vec<u64> = b.oof.iter().map(|o| o.score.to_bits()).collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn resampling_runs_inside_folds_only() {
        let ds = dataset(6, 14, true);
        for mode in [Resample::Oversample, Resample::Undersample] {
            let mut s = settings(ModelKind::Logistic);
            s.resample = mode;
            // The always-on assertions inside cross_validate are the real
            // check here; the run must simply complete.
            let report = cross_validate(&ds, &s).unwrap();
            assert_eq!(report.oof.len(), 20);
        }
    }

    #[test]
    fn oof_scores_line_up_with_rows() {
        let ds = dataset(10, 10, true);
        let report = cross_validate(&ds, &settings(ModelKind::Logistic)).unwrap();
        for (row, oof) in ds.rows.iter().zip(&report.oof) {
            assert_eq!(row.participant_id, oof.participant_id);
            assert_eq!(row.label, oof.label);
            assert!(oof.score.is_finite());
        }
    }
}
