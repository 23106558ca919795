//! Statistical machinery for the analysis plan: agreement, power,
//! multivariate group tests, and multiplicity control.

pub mod agreement;
pub mod contrast;
pub mod dist;
pub mod fdr;
pub mod manova;
pub mod power;

pub use agreement::{
    average_ranks, cohens_kappa, cohens_kappa_table, paired_t_test, pearson, score_to_category,
    spearman, KappaResult, PairedT, Weighting, HUMAN_HUMAN_BENCHMARK_KAPPA, SCORE_CATEGORIES,
};
pub use contrast::{chapter_contrast, composite_rows, CompositeRow, Contrast, ContrastDesign};
pub use dist::{f_cdf, noncentral_t_cdf, normal_cdf, normal_quantile, t_cdf, t_quantile};
pub use fdr::{benjamini_hochberg, FdrResult};
pub use manova::{
    hotelling_one_sample, manova_two_group, two_sample_t, HotellingResult, ManovaResult,
    TwoSampleT,
};
pub use power::{
    monte_carlo_power, solve_sample_size, two_sample_power, PowerSpec, SampleSize, Tails,
    MAX_N_PER_GROUP,
};

/// Errors from the statistical routines.
#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("score {score} is not on the half-point scale from 1 to 5")]
    OffLatticeScore { score: f64 },

    #[error("contingency table must be square and nonempty")]
    BadTable,

    #[error("input lengths do not match or are too short ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("input has zero variance")]
    ZeroVariance,

    #[error("both raters used a single category but disagree; kappa is undefined")]
    DegenerateMarginals,

    #[error("invalid power specification: {detail}")]
    BadPowerSpec { detail: String },

    #[error("no per-group sample size at or below {cap} reaches the target power")]
    NoSolutionBelowCap { cap: u64 },

    #[error("rows must all have {expected} entries, found one with {got}")]
    RaggedRows { expected: usize, got: usize },

    #[error("input contains a non-finite value")]
    NonFiniteInput,

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("scatter matrix is singular; variables may be collinear")]
    SingularScatter,

    #[error("FDR level q must lie strictly between 0 and 1, got {q}")]
    BadFdrLevel { q: f64 },

    #[error("p-value {p} is outside [0, 1]")]
    BadPValue { p: f64 },
}
