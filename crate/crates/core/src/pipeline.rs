//! End-to-end orchestration: cohort input → both feature sets → every
//! classifier under cross-validation → side-by-side F-measure table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::domain::{build_transcripts, CourseId, CourseStats, FeatureDataset, Provenance, StudentId, Transcript};
use crate::ingest::{compute_course_stats, CohortInput};
use crate::ml::{evaluate, ClassifierKind, ClassifierSpec, EvalReport, MlError};
use crate::naive::{build_naive_dataset, DEFAULT_CREDIT_VALUE};
use crate::psai::{build_psai_dataset, eligibility, Eligibility, FeatureError, PsaiConfig};
use crate::weighting::WeightParams;

/// Row order of the comparison table.
pub const TABLE_ORDER: [ClassifierKind; 6] = [
    ClassifierKind::NeuralNet,
    ClassifierKind::DecisionTree,
    ClassifierKind::Adaboost,
    ClassifierKind::Knn,
    ClassifierKind::RandomForest,
    ClassifierKind::LinearSvm,
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Ml(#[from] MlError),
}

/// Transcripts and course statistics indexed from one cohort.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub transcripts: BTreeMap<StudentId, Transcript>,
    pub stats: BTreeMap<CourseId, CourseStats>,
}

impl Prepared {
    pub fn new(input: &CohortInput) -> Self {
        Prepared {
            transcripts: build_transcripts(&input.records),
            stats: compute_course_stats(&input.records),
        }
    }

    pub fn eligibility(&self, course: &CourseId) -> Eligibility {
        eligibility(course, &self.transcripts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureOptions {
    pub weights: WeightParams,
    pub psai: PsaiConfig,
    pub credit_value: f64,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            weights: WeightParams::default(),
            psai: PsaiConfig::default(),
            credit_value: DEFAULT_CREDIT_VALUE,
        }
    }
}

pub fn build_features(
    input: &CohortInput,
    prepared: &Prepared,
    course: &CourseId,
    method: Provenance,
    options: &FeatureOptions,
) -> Result<FeatureDataset, FeatureError> {
    match method {
        Provenance::Psai => build_psai_dataset(course, &prepared.transcripts, &prepared.stats, &options.weights, options.psai),
        Provenance::Naive => build_naive_dataset(course, &prepared.transcripts, &input.profiles, options.credit_value),
    }
}

/// Naive and PSAI evaluations for every classifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub course: CourseId,
    pub k: usize,
    pub seed: u64,
    pub eligible: usize,
    pub failures: usize,
    /// For each kind in [`TABLE_ORDER`]: naive report, then PSAI report.
    pub reports: Vec<EvalReport>,
}

impl Comparison {
    pub fn report(&self, kind: ClassifierKind, provenance: Provenance) -> Option<&EvalReport> {
        self.reports
            .iter()
            .find(|r| r.classifier.kind == kind && r.provenance == provenance)
    }

    /// Highest pooled F-measure for one feature set.
    pub fn best(&self, provenance: Provenance) -> f64 {
        self.reports
            .iter()
            .filter(|r| r.provenance == provenance)
            .map(|r| r.f_measure)
            .fold(0.0, f64::max)
    }

    /// Number of classifiers whose PSAI F-measure is strictly above the naive one.
    pub fn psai_wins(&self) -> usize {
        TABLE_ORDER
            .iter()
            .filter(|&&k| {
                let n = self.report(k, Provenance::Naive).map_or(0.0, |r| r.f_measure);
                let p = self.report(k, Provenance::Psai).map_or(0.0, |r| r.f_measure);
                p > n
            })
            .count()
    }
}

/// Builds both datasets for `course` and cross-validates all six classifiers
/// on each. The twelve cells run in parallel; the result does not depend on
/// the thread count.
pub fn compare(
    input: &CohortInput,
    course: &CourseId,
    k: usize,
    seed: u64,
    options: &FeatureOptions,
) -> Result<Comparison, PipelineError> {
    let prepared = Prepared::new(input);
    let naive = build_features(input, &prepared, course, Provenance::Naive, options)?;
    let psai = build_features(input, &prepared, course, Provenance::Psai, options)?;
    debug_assert_eq!(naive.student_ids(), psai.student_ids());

    let cells: Vec<(ClassifierKind, &FeatureDataset)> = TABLE_ORDER
        .iter()
        .flat_map(|&kind| [(kind, &naive), (kind, &psai)])
        .collect();
    let reports = cells
        .par_iter()
        .map(|(kind, ds)| evaluate(&ClassifierSpec::new(*kind, seed), ds, k, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Comparison {
        course: course.clone(),
        k,
        seed,
        eligible: psai.len(),
        failures: psai.positives(),
        reports,
    })
}

/// Text table: one row per classifier, naive and PSAI F-measure in percent,
/// with `*` on each column's maximum.
pub fn render_table(cmp: &Comparison) -> String {
    let pct = |kind, prov| cmp.report(kind, prov).map_or(0.0, |r| r.f_measure * 100.0);
    let fmt = |v: f64, best: f64| format!("{v:.2}{}", if (v - best * 100.0).abs() < 1e-9 { "*" } else { "" });
    let best_naive = cmp.best(Provenance::Naive);
    let best_psai = cmp.best(Provenance::Psai);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "Failure prediction in {} ({} students, {} failures; {}-fold CV, seed {})",
        cmp.course, cmp.eligible, cmp.failures, cmp.k, cmp.seed
    );
    let _ = writeln!(out, "| {:<16} | {:>19} | {:>18} |", "Algorithm", "Naive F-measure (%)", "PSAI F-measure (%)");
    let _ = writeln!(out, "|{:-<18}|{:->21}|{:->20}|", "", "", "");
    for kind in TABLE_ORDER {
        let _ = writeln!(
            out,
            "| {:<16} | {:>19} | {:>18} |",
            kind.label(),
            fmt(pct(kind, Provenance::Naive), best_naive),
            fmt(pct(kind, Provenance::Psai), best_psai),
        );
    }
    out
}

/// The course whose failure rate is closest to `rate` (ties: lowest id).
pub fn course_nearest_failure_rate(stats: &BTreeMap<CourseId, CourseStats>, rate: f64) -> Option<CourseId> {
    stats
        .values()
        .min_by(|a, b| {
            let da = ((1.0 - a.success_rate) - rate).abs();
            let db = ((1.0 - b.success_rate) - rate).abs();
            da.total_cmp(&db)
        })
        .map(|s| s.course_id.clone())
}
