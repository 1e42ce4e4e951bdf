//! Core data types shared by every stage of the pipeline.
//!
//! Everything here is immutable once built and carries no I/O.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Top of the grade-point scale (A+).
pub const MAX_MARK: f64 = 4.3;

/// Lowest passing mark (D) when `passed` has to be derived.
pub const PASS_MARK: f64 = 1.0;

/// Sentinel category for missing or unseen categorical values.
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("mark {0} outside [0, {MAX_MARK}]")]
    MarkOutOfRange(f64),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("duplicate key (student {student}, course {course}, term {term})")]
    DuplicateKey {
        student: String,
        course: String,
        term: u32,
    },
    #[error("invalid value for `{field}`: {value}")]
    InvalidValue { field: &'static str, value: String },
    #[error("record for student {found} in transcript of {expected}")]
    ForeignRecord { expected: String, found: String },
}

impl DomainError {
    /// Stable name used as a key in ingest drop counts.
    pub fn kind(&self) -> &'static str {
        match self {
            DomainError::MarkOutOfRange(_) => "MarkOutOfRange",
            DomainError::MissingField(_) => "MissingField",
            DomainError::DuplicateKey { .. } => "DuplicateKey",
            DomainError::InvalidValue { .. } => "InvalidValue",
            DomainError::ForeignRecord { .. } => "ForeignRecord",
        }
    }
}

/// A grade-point value on the 0–4.3 scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mark(f64);

impl Mark {
    pub fn new(value: f64) -> Result<Self, DomainError> {
        if value.is_finite() && (0.0..=MAX_MARK).contains(&value) {
            Ok(Mark(value))
        } else {
            Err(DomainError::MarkOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Mark {
    type Error = DomainError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Mark::new(value)
    }
}

impl From<Mark> for f64 {
    fn from(m: Mark) -> f64 {
        m.0
    }
}

macro_rules! opaque_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

opaque_id!(StudentId);
opaque_id!(CourseId);

/// One (student, course, term, mark, outcome) fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrollmentRecord {
    pub student_id: StudentId,
    pub course_id: CourseId,
    pub term_index: u32,
    pub mark: Mark,
    pub passed: bool,
}

impl EnrollmentRecord {
    pub fn key(&self) -> (&StudentId, &CourseId, u32) {
        (&self.student_id, &self.course_id, self.term_index)
    }
}

/// An enrollment row before validation. `None` means the cell was empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawEnrollment {
    pub student_id: Option<String>,
    pub course_id: Option<String>,
    pub term_index: Option<i64>,
    pub mark: Option<f64>,
    pub passed: Option<bool>,
}

/// Checks a candidate record against the record-level invariants.
///
/// A missing `passed` is derived as `mark >= 1.0`. Duplicate keys can only be
/// detected against the rest of the dataset and are handled by the caller.
pub fn validate_record(raw: RawEnrollment) -> Result<EnrollmentRecord, DomainError> {
    let student_id = non_empty(raw.student_id, "student_id")?;
    let course_id = non_empty(raw.course_id, "course_id")?;
    let term = raw.term_index.ok_or(DomainError::MissingField("term_index"))?;
    let term_index = u32::try_from(term).map_err(|_| DomainError::InvalidValue {
        field: "term_index",
        value: term.to_string(),
    })?;
    let mark = Mark::new(raw.mark.ok_or(DomainError::MissingField("mark"))?)?;
    let passed = raw.passed.unwrap_or(mark.value() >= PASS_MARK);
    Ok(EnrollmentRecord {
        student_id: StudentId(student_id),
        course_id: CourseId(course_id),
        term_index,
        mark,
        passed,
    })
}

fn non_empty(v: Option<String>, field: &'static str) -> Result<String, DomainError> {
    match v {
        Some(s) if !s.trim().is_empty() => Ok(s.trim().to_string()),
        _ => Err(DomainError::MissingField(field)),
    }
}

/// Letter-grade to grade-point table. Defaults to the standard 4.3 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeTable {
    entries: Vec<(String, f64)>,
}

impl Default for GradeTable {
    fn default() -> Self {
        let entries = [
            ("F", 0.0),
            ("E", 0.0),
            ("D", 1.0),
            ("D+", 1.3),
            ("C-", 1.7),
            ("C", 2.0),
            ("C+", 2.3),
            ("B-", 2.7),
            ("B", 3.0),
            ("B+", 3.3),
            ("A-", 3.7),
            ("A", 4.0),
            ("A+", 4.3),
        ];
        GradeTable {
            entries: entries.iter().map(|(l, v)| (l.to_string(), *v)).collect(),
        }
    }
}

impl GradeTable {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self, DomainError> {
        for (_, v) in &entries {
            Mark::new(*v)?;
        }
        Ok(GradeTable { entries })
    }

    pub fn mark(&self, letter: &str) -> Option<Mark> {
        self.entries
            .iter()
            .find(|(l, _)| l == letter)
            .map(|(_, v)| Mark(*v))
    }

    /// Highest letter whose grade points do not exceed `mark`.
    pub fn letter(&self, mark: Mark) -> Option<&str> {
        self.entries
            .iter()
            .filter(|(_, v)| *v <= mark.value())
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(l, _)| l.as_str())
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }
}

/// A categorical value; empty input collapses to [`UNKNOWN`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Category(String);

impl Category {
    pub fn new(value: &str) -> Self {
        let v = value.trim();
        if v.is_empty() {
            Category::unknown()
        } else {
            Category(v.to_string())
        }
    }

    pub fn unknown() -> Self {
        Category(UNKNOWN.to_string())
    }

    pub fn is_unknown(&self) -> bool {
        self.0 == UNKNOWN
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Demographic attributes of one student.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentProfile {
    pub student_id: StudentId,
    pub admission_base: Category,
    pub citizenship: Category,
    pub previous_program: Category,
    pub legal_status: Category,
    pub college_program: Category,
    pub age: u32,
    pub gender: Category,
}

/// Names of the categorical profile fields, in encoding order.
pub const CATEGORICAL_FIELDS: [&str; 6] = [
    "admission_base",
    "citizenship",
    "previous_program",
    "legal_status",
    "college_program",
    "gender",
];

impl StudentProfile {
    /// Profile with every categorical field unknown.
    pub fn unknown(student_id: StudentId, age: u32) -> Self {
        StudentProfile {
            student_id,
            admission_base: Category::unknown(),
            citizenship: Category::unknown(),
            previous_program: Category::unknown(),
            legal_status: Category::unknown(),
            college_program: Category::unknown(),
            age,
            gender: Category::unknown(),
        }
    }

    /// Categorical values in [`CATEGORICAL_FIELDS`] order.
    pub fn categoricals(&self) -> [&Category; 6] {
        [
            &self.admission_base,
            &self.citizenship,
            &self.previous_program,
            &self.legal_status,
            &self.college_program,
            &self.gender,
        ]
    }
}

/// One student's records in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    student_id: StudentId,
    records: Vec<EnrollmentRecord>,
}

impl Transcript {
    /// Sorts `records` by term (stable, so same-term order is kept).
    pub fn new(
        student_id: StudentId,
        mut records: Vec<EnrollmentRecord>,
    ) -> Result<Self, DomainError> {
        if let Some(r) = records.iter().find(|r| r.student_id != student_id) {
            return Err(DomainError::ForeignRecord {
                expected: student_id.0.clone(),
                found: r.student_id.0.clone(),
            });
        }
        records.sort_by_key(|r| r.term_index);
        Ok(Transcript {
            student_id,
            records,
        })
    }

    pub fn student_id(&self) -> &StudentId {
        &self.student_id
    }

    pub fn records(&self) -> &[EnrollmentRecord] {
        &self.records
    }

    /// The earliest record for `course`, if the student ever took it.
    pub fn first_attempt(&self, course: &CourseId) -> Option<&EnrollmentRecord> {
        self.records.iter().find(|r| &r.course_id == course)
    }
}

/// Groups records into per-student transcripts, keyed and ordered by id.
pub fn build_transcripts(records: &[EnrollmentRecord]) -> BTreeMap<StudentId, Transcript> {
    let mut grouped: BTreeMap<StudentId, Vec<EnrollmentRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.student_id.clone()).or_default().push(r.clone());
    }
    grouped
        .into_iter()
        .map(|(id, recs)| {
            let t = Transcript::new(id.clone(), recs).expect("grouped by student");
            (id, t)
        })
        .collect()
}

/// Per-course aggregates over every accepted record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseStats {
    pub course_id: CourseId,
    pub mean_mark: f64,
    pub success_rate: f64,
    pub enrollment_count: usize,
    pub passed_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Psai,
    Naive,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Psai => "psai",
            Provenance::Naive => "naive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("{rows} rows but {labels} labels and {ids} student ids")]
    LengthMismatch { rows: usize, labels: usize, ids: usize },
    #[error("row {row} has {got} values, expected {expected}")]
    RowArity { row: usize, got: usize, expected: usize },
    #[error("row {row} has a non-finite value")]
    NonFinite { row: usize },
}

/// Feature matrix with labels, the hand-off between feature builders and models.
///
/// Labels are `true` for failure (the positive class).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
    student_ids: Vec<StudentId>,
    provenance: Provenance,
}

impl FeatureDataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<bool>,
        student_ids: Vec<StudentId>,
        provenance: Provenance,
    ) -> Result<Self, DatasetError> {
        if rows.len() != labels.len() || rows.len() != student_ids.len() {
            return Err(DatasetError::LengthMismatch {
                rows: rows.len(),
                labels: labels.len(),
                ids: student_ids.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(DatasetError::RowArity {
                    row: i,
                    got: row.len(),
                    expected: feature_names.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { row: i });
            }
        }
        Ok(FeatureDataset {
            feature_names,
            rows,
            labels,
            student_ids,
            provenance,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn student_ids(&self) -> &[StudentId] {
        &self.student_ids
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(mark: Option<f64>) -> RawEnrollment {
        RawEnrollment {
            student_id: Some("s1".into()),
            course_id: Some("ABC2222".into()),
            term_index: Some(3),
            mark,
            passed: None,
        }
    }

    #[test]
    fn accepts_top_of_scale() {
        let r = validate_record(raw(Some(4.3))).unwrap();
        assert_eq!(r.mark.value(), 4.3);
        assert!(r.passed);
    }

    #[test]
    fn rejects_just_past_top() {
        assert_eq!(
            validate_record(raw(Some(4.4))),
            Err(DomainError::MarkOutOfRange(4.4))
        );
    }

    #[test]
    fn missing_mark_is_missing_field() {
        assert_eq!(
            validate_record(raw(None)),
            Err(DomainError::MissingField("mark"))
        );
    }

    #[test]
    fn negative_term_rejected() {
        let mut r = raw(Some(2.0));
        r.term_index = Some(-1);
        assert!(matches!(
            validate_record(r),
            Err(DomainError::InvalidValue { field: "term_index", .. })
        ));
    }

    #[test]
    fn derived_pass_uses_d_threshold() {
        assert!(!validate_record(raw(Some(0.99))).unwrap().passed);
        assert!(validate_record(raw(Some(1.0))).unwrap().passed);
        let mut explicit = raw(Some(3.0));
        explicit.passed = Some(false);
        assert!(!validate_record(explicit).unwrap().passed);
    }

    #[test]
    fn mark_grid_round_trips() {
        // 0.001 steps over [-0.5, 4.8]
        for i in -500..=4800 {
            let v = i as f64 / 1000.0;
            match Mark::new(v) {
                Ok(m) => {
                    assert!((0.0..=4.3).contains(&v));
                    assert_eq!(m.value().to_bits(), v.to_bits());
                }
                Err(_) => assert!(!(0.0..=4.3).contains(&v)),
            }
        }
        assert!(Mark::new(f64::NAN).is_err());
        assert!(Mark::new(f64::INFINITY).is_err());
    }

    #[test]
    fn grade_table_anchors() {
        let t = GradeTable::default();
        assert_eq!(t.mark("D").unwrap().value(), 1.0);
        assert_eq!(t.mark("D+").unwrap().value(), 1.3);
        assert_eq!(t.mark("A").unwrap().value(), 4.0);
        assert_eq!(t.mark("A+").unwrap().value(), 4.3);
        assert_eq!(t.letter(Mark::new(3.5).unwrap()), Some("B+"));
        assert!(GradeTable::new(vec![("Z".into(), 5.0)]).is_err());
    }

    #[test]
    fn transcript_sorts_stably() {
        let rec = |c: &str, t: u32| EnrollmentRecord {
            student_id: "s".into(),
            course_id: c.into(),
            term_index: t,
            mark: Mark::new(2.0).unwrap(),
            passed: true,
        };
        let t = Transcript::new(
            "s".into(),
            vec![rec("B", 2), rec("A", 0), rec("C", 2), rec("D", 1)],
        )
        .unwrap();
        let order: Vec<_> = t.records().iter().map(|r| r.course_id.as_str()).collect();
        assert_eq!(order, ["A", "D", "B", "C"]);
        let mut other = rec("X", 0);
        other.student_id = "t".into();
        assert!(Transcript::new("s".into(), vec![other]).is_err());
    }

    #[test]
    fn dataset_rejects_ragged_rows() {
        let err = FeatureDataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0], vec![1.0]],
            vec![true, false],
            vec!["x".into(), "y".into()],
            Provenance::Psai,
        );
        assert!(matches!(err, Err(DatasetError::RowArity { row: 1, .. })));
    }

    #[test]
    fn empty_category_is_unknown() {
        assert!(Category::new("  ").is_unknown());
        assert_eq!(Category::new(" ca ").as_str(), "ca");
    }
}
