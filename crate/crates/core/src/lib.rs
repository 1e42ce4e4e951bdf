//! Difficulty-weighted student attributes (PSAI) versus a demographic and
//! GPA baseline for predicting who fails a course.
//!
//! Pipeline: [`ingest`] transcripts → [`weighting`] of courses by mean mark →
//! feature sets from [`psai`] and [`naive`] → [`ml`] cross-validation. The
//! [`synthgen`] module produces seeded cohorts and [`pipeline`] ties the
//! stages together.

pub mod dataset;
pub mod domain;
pub mod ingest;
pub mod ml;
pub mod naive;
pub mod pipeline;
pub mod psai;
pub mod synthgen;
pub mod weighting;

pub use domain::{CourseId, FeatureDataset, Provenance, StudentId};
pub use weighting::{AnchorPoint, WeightParams};
