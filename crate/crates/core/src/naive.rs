//! Baseline features: one-hot demographics plus age, credits earned and GPA,
//! all taken as of the student's first attempt at the target course.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{
    Category, CourseId, FeatureDataset, Provenance, StudentId, StudentProfile, Transcript,
    CATEGORICAL_FIELDS, UNKNOWN,
};
use crate::ingest::median_age;
use crate::psai::{check_eligible, eligibility, FeatureError};

pub const DEFAULT_CREDIT_VALUE: f64 = 3.0;

/// Unweighted mean mark over records in terms before `before_term`.
pub fn compute_gpa(transcript: &Transcript, before_term: u32) -> Option<f64> {
    let (sum, n) = transcript
        .records()
        .iter()
        .filter(|r| r.term_index < before_term)
        .fold((0.0, 0usize), |(s, n), r| (s + r.mark.value(), n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `credit_value` per passed record in terms before `before_term`.
pub fn credits_obtained(transcript: &Transcript, before_term: u32, credit_value: f64) -> f64 {
    let passed = transcript
        .records()
        .iter()
        .filter(|r| r.term_index < before_term && r.passed)
        .count();
    credit_value * passed as f64
}

/// One-hot encoder over the categorical profile fields.
///
/// Each field gets one column per category seen at fit time, in
/// lexicographic order, plus an `unknown` column that also absorbs
/// categories first seen at transform time.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalEncoder {
    fields: Vec<Vec<Category>>,
}

impl CategoricalEncoder {
    pub fn fit(profiles: &[StudentProfile]) -> Self {
        let mut sets: Vec<BTreeSet<Category>> = vec![BTreeSet::new(); CATEGORICAL_FIELDS.len()];
        for p in profiles {
            for (set, c) in sets.iter_mut().zip(p.categoricals()) {
                set.insert(c.clone());
            }
        }
        let fields = sets
            .into_iter()
            .map(|mut s| {
                s.insert(Category::unknown());
                s.into_iter().collect()
            })
            .collect();
        CategoricalEncoder { fields }
    }

    pub fn n_columns(&self) -> usize {
        self.fields.iter().map(Vec::len).sum()
    }

    /// Column names as `field=category`.
    pub fn column_names(&self) -> Vec<String> {
        CATEGORICAL_FIELDS
            .iter()
            .zip(&self.fields)
            .flat_map(|(f, cats)| cats.iter().map(move |c| format!("{f}={c}")))
            .collect()
    }

    /// Number of columns for each field, in field order.
    pub fn field_widths(&self) -> Vec<usize> {
        self.fields.iter().map(Vec::len).collect()
    }

    pub fn transform(&self, profile: &StudentProfile) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_columns());
        for (cats, value) in self.fields.iter().zip(profile.categoricals()) {
            let hit = cats
                .binary_search(value)
                .or_else(|_| cats.binary_search(&Category::new(UNKNOWN)))
                .expect("unknown column always present");
            out.extend((0..cats.len()).map(|i| if i == hit { 1.0 } else { 0.0 }));
        }
        out
    }
}

/// Fits an encoder on `profiles` and encodes each of them.
pub fn encode_categoricals(profiles: &[StudentProfile]) -> (CategoricalEncoder, Vec<Vec<f64>>) {
    let enc = CategoricalEncoder::fit(profiles);
    let rows = profiles.iter().map(|p| enc.transform(p)).collect();
    (enc, rows)
}

/// Builds the baseline dataset for `target` over the same students, in the
/// same order and with the same labels as the PSAI dataset.
///
/// Students without a profile are encoded as all-`unknown` with the median
/// profile age.
pub fn build_naive_dataset(
    target: &CourseId,
    transcripts: &BTreeMap<StudentId, Transcript>,
    profiles: &[StudentProfile],
    credit_value: f64,
) -> Result<FeatureDataset, FeatureError> {
    if !transcripts.values().any(|t| t.first_attempt(target).is_some()) {
        return Err(FeatureError::UnknownCourse(target.clone()));
    }
    let elig = eligibility(target, transcripts);
    check_eligible(target, &elig)?;

    let by_id: BTreeMap<&StudentId, &StudentProfile> =
        profiles.iter().map(|p| (&p.student_id, p)).collect();
    let fallback_age = median_age(&profiles.iter().map(|p| p.age).collect::<Vec<_>>()).unwrap_or(0);
    let cohort: Vec<StudentProfile> = elig
        .eligible
        .iter()
        .map(|t| match by_id.get(&t.student_id) {
            Some(p) => (*p).clone(),
            None => StudentProfile::unknown(t.student_id.clone(), fallback_age),
        })
        .collect();
    let (enc, onehot) = encode_categoricals(&cohort);

    let gpas: Vec<Option<f64>> = elig
        .eligible
        .iter()
        .map(|t| compute_gpa(&transcripts[&t.student_id], t.first_term))
        .collect();
    let known: Vec<f64> = gpas.iter().flatten().copied().collect();
    let mean_gpa = if known.is_empty() {
        0.0
    } else {
        known.iter().sum::<f64>() / known.len() as f64
    };

    let rows = elig
        .eligible
        .iter()
        .zip(onehot)
        .zip(&cohort)
        .zip(&gpas)
        .map(|(((taker, mut row), profile), gpa)| {
            let t = &transcripts[&taker.student_id];
            row.push(profile.age as f64);
            row.push(credits_obtained(t, taker.first_term, credit_value));
            row.push(gpa.unwrap_or(mean_gpa));
            row
        })
        .collect();

    let mut names = enc.column_names();
    names.extend(["age", "credits_obtained", "gpa"].map(String::from));
    Ok(FeatureDataset::new(
        names,
        rows,
        elig.eligible.iter().map(|t| t.failed).collect(),
        elig.eligible.iter().map(|t| t.student_id.clone()).collect(),
        Provenance::Naive,
    )?)
}
