//! Batch analytics for behavioral coding of interview videos.
//!
//! This crate turns per-frame visual features (body keypoints, facial
//! landmarks, head pose, expression probabilities) into interval-scale
//! behavioral scores on the half-point 1..5 scale used by the Coding
//! Interactive Behavior system, then runs the statistics a coding study
//! needs: inter-rater agreement, a priori power, multivariate group
//! contrasts with false-discovery-rate control, and diagnostic
//! classification with leakage-safe cross-validation.
//!
//! The crate is organized as a library with one thin `cib` binary on top.
//! Each major capability has a runnable example under `examples/`:
//!
//! * `generate_study` builds a synthetic study with known ground truth.
//! * `score_study` ingests frame streams and derives behavioral scores.
//! * `agreement` computes Cohen's kappa and rater bias diagnostics.
//! * `power_analysis` sizes a rater-drift detection sample.
//! * `group_differences` runs the MANOVA and per-code contrasts.
//! * `classification` trains and cross-validates the diagnostic models.
//! * `full_pipeline` chains generation, scoring, stats, and reports.
//!
//! # Quick taste
//!
//! ```
//! use cib::codes::percentage_to_score;
//! use cib::stats::{cohens_kappa, solve_sample_size, PowerSpec};
//!
//! // Fraction of the clip spent gazing at the interviewer, as a score.
//! assert_eq!(percentage_to_score(0.62), 3.5);
//!
//! // Two raters over the same 4 clips, scores in half points.
//! let a = [3.0, 4.5, 2.0, 4.0];
//! let b = [3.0, 4.5, 2.5, 4.0];
//! let kappa = cohens_kappa(&a, &b, cib::stats::Weighting::Linear).unwrap();
//! assert!(kappa.kappa > 0.6);
//!
//! // Clips per rater needed to detect one-point drift (SD 0.9).
//! let n = solve_sample_size(&PowerSpec {
//!     mean_diff: 1.0,
//!     sd: 0.9,
//!     alpha: 0.05,
//!     power: 0.8,
//!     tails: cib::stats::Tails::Two,
//! })
//! .unwrap();
//! assert_eq!(n.n_per_group, 14);
//! ```
//!
//! # Pipeline shape
//!
//! A study is described by a manifest CSV listing one clip per row
//! (participant, group, chapter, frame-stream path, optional human
//! scores). [`ingest::load_study`] reads the manifest, parses each
//! JSON-lines frame stream, extracts the middle 30-second window, and
//! applies the confidence/gap quality filter. [`codes::score_clip`] maps
//! the filtered frames to seven behavioral code percentages and scores.
//! The [`stats`] and [`classify`] modules consume the resulting score
//! tables; [`report`] writes every artifact as CSV or SVG with the
//! active configuration hash embedded so downstream steps can refuse
//! mixed-configuration inputs.
//!
//! Everything downstream of ingestion is deterministic for a fixed seed
//! and configuration, including the classifiers and the synthetic study
//! generator, so reruns are byte-identical.

pub mod classify;
pub mod cli;
pub mod codes;
pub mod config;
pub mod ingest;
pub mod plot;
pub mod report;
pub mod rng;
pub mod stats;
pub mod synth;

pub use config::Config;
