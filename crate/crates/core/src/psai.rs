//! Personalized student attributes for one target course.
//!
//! Each eligible student gets a score: the mean, over the courses they took
//! before the target, of their mark times that course's difficulty weight.
//! The target course's own weight and success rate ride along as two more
//! (constant) columns.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::domain::{
    CourseId, CourseStats, DatasetError, FeatureDataset, Mark, Provenance, StudentId, Transcript,
};
use crate::weighting::{course_weight, WeightError, WeightParams};

pub const PSAI_FEATURES: [&str; 3] = ["score", "course_weight", "course_success_rate"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("unknown course {0}")]
    UnknownCourse(CourseId),
    #[error("student {student} never took {course}")]
    TargetNotInTranscript { student: StudentId, course: CourseId },
    #[error("no prior courses to score")]
    EmptyPriors,
    #[error("only {found} eligible students for {course}, need at least 2")]
    TooFewEligible { course: CourseId, found: usize },
    #[error("every eligible student in {course} has the same label")]
    SingleClass { course: CourseId },
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// A student who took the target course, with their first attempt's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Taker {
    pub student_id: StudentId,
    pub first_term: u32,
    pub failed: bool,
}

/// Takers of a target course split by whether any earlier course exists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Eligibility {
    /// Sorted by student id.
    pub eligible: Vec<Taker>,
    pub ineligible: Vec<Taker>,
}

impl Eligibility {
    pub fn takers(&self) -> usize {
        self.eligible.len() + self.ineligible.len()
    }
}

/// Splits the takers of `target` into eligible (at least one course in a
/// strictly earlier term than their first attempt) and ineligible.
pub fn eligibility(target: &CourseId, transcripts: &BTreeMap<StudentId, Transcript>) -> Eligibility {
    let mut out = Eligibility::default();
    for (id, t) in transcripts {
        let Some(first) = t.first_attempt(target) else {
            continue;
        };
        let taker = Taker {
            student_id: id.clone(),
            first_term: first.term_index,
            failed: !first.passed,
        };
        if t.records().iter().any(|r| r.term_index < first.term_index) {
            out.eligible.push(taker);
        } else {
            out.ineligible.push(taker);
        }
    }
    out
}

/// Checks the dataset-level preconditions shared by both feature builders.
pub(crate) fn check_eligible(target: &CourseId, elig: &Eligibility) -> Result<(), FeatureError> {
    if elig.eligible.len() < 2 {
        return Err(FeatureError::TooFewEligible {
            course: target.clone(),
            found: elig.eligible.len(),
        });
    }
    let failed = elig.eligible.iter().filter(|t| t.failed).count();
    if failed == 0 || failed == elig.eligible.len() {
        return Err(FeatureError::SingleClass {
            course: target.clone(),
        });
    }
    Ok(())
}

/// Courses taken strictly before the first attempt at `target`, one entry
/// per course holding the latest such mark. Sorted by course id.
pub fn prior_courses(
    transcript: &Transcript,
    target: &CourseId,
) -> Result<Vec<(CourseId, Mark)>, FeatureError> {
    let first = transcript
        .first_attempt(target)
        .ok_or_else(|| FeatureError::TargetNotInTranscript {
            student: transcript.student_id().clone(),
            course: target.clone(),
        })?;
    let mut latest: BTreeMap<&CourseId, Mark> = BTreeMap::new();
    // records are term-ordered, so later inserts win
    for r in transcript.records() {
        if r.term_index < first.term_index && &r.course_id != target {
            latest.insert(&r.course_id, r.mark);
        }
    }
    Ok(latest.into_iter().map(|(c, m)| (c.clone(), m)).collect())
}

fn score_with<F>(priors: &[(CourseId, Mark)], params: &WeightParams, mut mean_of: F) -> Result<f64, FeatureError>
where
    F: FnMut(&CourseId) -> Result<f64, FeatureError>,
{
    if priors.is_empty() {
        return Err(FeatureError::EmptyPriors);
    }
    let mut total = 0.0;
    for (course, mark) in priors {
        total += mark.value() * course_weight(params, mean_of(course)?)?;
    }
    Ok(total / priors.len() as f64)
}

/// Mean over prior courses of `mark * weight(course mean)`.
pub fn student_score(
    priors: &[(CourseId, Mark)],
    stats: &BTreeMap<CourseId, CourseStats>,
    params: &WeightParams,
) -> Result<f64, FeatureError> {
    score_with(priors, params, |c| {
        stats
            .get(c)
            .map(|s| s.mean_mark)
            .ok_or_else(|| FeatureError::UnknownCourse(c.clone()))
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PsaiConfig {
    /// Compute each prior course's mean without the scored student's own
    /// marks in it. Off by default: means cover every record.
    pub leave_one_out: bool,
}

/// Builds the score / weight / success-rate dataset for `target`.
pub fn build_psai_dataset(
    target: &CourseId,
    transcripts: &BTreeMap<StudentId, Transcript>,
    stats: &BTreeMap<CourseId, CourseStats>,
    params: &WeightParams,
    config: PsaiConfig,
) -> Result<FeatureDataset, FeatureError> {
    let target_stats = stats
        .get(target)
        .ok_or_else(|| FeatureError::UnknownCourse(target.clone()))?;
    let elig = eligibility(target, transcripts);
    check_eligible(target, &elig)?;

    let w_target = course_weight(params, target_stats.mean_mark)?;
    let totals = config.leave_one_out.then(|| course_totals(transcripts));

    let mut rows = Vec::with_capacity(elig.eligible.len());
    for taker in &elig.eligible {
        let t = &transcripts[&taker.student_id];
        let priors = prior_courses(t, target)?;
        let score = match &totals {
            None => student_score(&priors, stats, params)?,
            Some(totals) => score_with(&priors, params, |c| loo_mean(t, c, totals, stats))?,
        };
        rows.push(vec![score, w_target, target_stats.success_rate]);
    }
    let ds = FeatureDataset::new(
        PSAI_FEATURES.iter().map(|s| s.to_string()).collect(),
        rows,
        elig.eligible.iter().map(|t| t.failed).collect(),
        elig.eligible.iter().map(|t| t.student_id.clone()).collect(),
        Provenance::Psai,
    )?;
    Ok(ds)
}

fn course_totals(transcripts: &BTreeMap<StudentId, Transcript>) -> BTreeMap<CourseId, (f64, usize)> {
    let mut totals: BTreeMap<CourseId, (f64, usize)> = BTreeMap::new();
    for t in transcripts.values() {
        for r in t.records() {
            let e = totals.entry(r.course_id.clone()).or_default();
            e.0 += r.mark.value();
            e.1 += 1;
        }
    }
    totals
}

fn loo_mean(
    t: &Transcript,
    course: &CourseId,
    totals: &BTreeMap<CourseId, (f64, usize)>,
    stats: &BTreeMap<CourseId, CourseStats>,
) -> Result<f64, FeatureError> {
    let full = stats
        .get(course)
        .ok_or_else(|| FeatureError::UnknownCourse(course.clone()))?
        .mean_mark;
    let (sum, n) = totals[course];
    let (own_sum, own_n) = t
        .records()
        .iter()
        .filter(|r| &r.course_id == course)
        .fold((0.0, 0usize), |(s, k), r| (s + r.mark.value(), k + 1));
    if n <= own_n {
        return Ok(full);
    }
    Ok(((sum - own_sum) / (n - own_n) as f64).clamp(0.0, crate::domain::MAX_MARK))
}

/// One PSAI dataset row in typed form.
#[derive(Debug, Clone, PartialEq)]
pub struct PsaiRow {
    pub student_id: StudentId,
    pub score: f64,
    pub course_weight: f64,
    pub course_success_rate: f64,
    pub failed: bool,
}

/// Typed view of a dataset produced by [`build_psai_dataset`].
pub fn psai_rows(ds: &FeatureDataset) -> Vec<PsaiRow> {
    ds.rows()
        .iter()
        .zip(ds.labels())
        .zip(ds.student_ids())
        .map(|((r, &failed), id)| PsaiRow {
            student_id: id.clone(),
            score: r[0],
            course_weight: r[1],
            course_success_rate: r[2],
            failed,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EnrollmentRecord;

    fn rec(s: &str, c: &str, t: u32, mark: f64) -> EnrollmentRecord {
        EnrollmentRecord {
            student_id: s.into(),
            course_id: c.into(),
            term_index: t,
            mark: Mark::new(mark).unwrap(),
            passed: mark >= 1.0,
        }
    }

    fn transcript(recs: Vec<EnrollmentRecord>) -> Transcript {
        Transcript::new(recs[0].student_id.clone(), recs).unwrap()
    }

    fn stats(entries: &[(&str, f64)]) -> BTreeMap<CourseId, CourseStats> {
        entries
            .iter()
            .map(|(c, m)| {
                (
                    CourseId::from(*c),
                    CourseStats {
                        course_id: CourseId::from(*c),
                        mean_mark: *m,
                        success_rate: 1.0,
                        enrollment_count: 1,
                        passed_count: 1,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn single_prior_course() {
        let t = transcript(vec![rec("s", "X", 0, 3.0), rec("s", "A", 1, 2.0)]);
        let p = prior_courses(&t, &"A".into()).unwrap();
        assert_eq!(p, vec![("X".into(), Mark::new(3.0).unwrap())]);
    }

    #[test]
    fn retake_uses_latest_prior_mark() {
        let t = transcript(vec![rec("s", "X", 0, 1.0), rec("s", "X", 1, 3.0), rec("s", "A", 2, 2.0)]);
        let p = prior_courses(&t, &"A".into()).unwrap();
        assert_eq!(p, vec![("X".into(), Mark::new(3.0).unwrap())]);
    }

    #[test]
    fn first_course_has_no_priors() {
        let t = transcript(vec![rec("s", "A", 0, 2.0)]);
        assert!(prior_courses(&t, &"A".into()).unwrap().is_empty());
        assert!(matches!(
            prior_courses(&t, &"B".into()),
            Err(FeatureError::TargetNotInTranscript { .. })
        ));
    }

    #[test]
    fn same_term_and_later_courses_excluded() {
        let t = transcript(vec![
            rec("s", "X", 0, 3.0),
            rec("s", "Y", 1, 2.0),
            rec("s", "A", 1, 2.0),
            rec("s", "Z", 2, 4.0),
            rec("s", "A", 3, 3.0),
        ]);
        let p = prior_courses(&t, &"A".into()).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].0.as_str(), "X");
    }

    #[test]
    fn score_single_anchor_course() {
        let s = student_score(
            &[("H".into(), Mark::new(3.0).unwrap())],
            &stats(&[("H", 1.15)]),
            &WeightParams::default(),
        )
        .unwrap();
        assert!((s - 6.0).abs() < 1e-12);
    }

    #[test]
    fn score_two_anchor_courses() {
        let s = student_score(
            &[("E".into(), Mark::new(4.0).unwrap()), ("H".into(), Mark::new(2.0).unwrap())],
            &stats(&[("E", 4.15), ("H", 1.15)]),
            &WeightParams::default(),
        )
        .unwrap();
        assert!((s - 3.0).abs() < 1e-12);
    }

    #[test]
    fn score_errors() {
        let p = WeightParams::default();
        assert_eq!(student_score(&[], &stats(&[]), &p), Err(FeatureError::EmptyPriors));
        assert!(matches!(
            student_score(&[("Q".into(), Mark::new(1.0).unwrap())], &stats(&[]), &p),
            Err(FeatureError::UnknownCourse(_))
        ));
    }

    fn cohort(recs: Vec<EnrollmentRecord>) -> (BTreeMap<StudentId, Transcript>, BTreeMap<CourseId, CourseStats>) {
        let stats = crate::ingest::compute_course_stats(&recs);
        (crate::domain::build_transcripts(&recs), stats)
    }

    #[test]
    fn ineligible_students_excluded() {
        let mut recs = Vec::new();
        for i in 0..10 {
            let s = format!("s{i}");
            let target_term = if i < 3 { 0 } else { 1 };
            if i >= 3 {
                recs.push(rec(&s, "X", 0, 2.0 + 0.1 * i as f64));
            }
            recs.push(rec(&s, "A", target_term, if i % 2 == 0 { 0.5 } else { 3.0 }));
        }
        let (tr, st) = cohort(recs);
        let ds = build_psai_dataset(&"A".into(), &tr, &st, &WeightParams::default(), PsaiConfig::default())
            .unwrap();
        assert_eq!(ds.len(), 7);
        let elig = eligibility(&"A".into(), &tr);
        assert_eq!(elig.ineligible.len(), 3);
        let w = course_weight(&WeightParams::default(), st[&CourseId::from("A")].mean_mark).unwrap();
        assert!(ds.rows().iter().all(|r| r[1] == w && r[2] == st[&CourseId::from("A")].success_rate));
        assert_eq!(ds.feature_names(), PSAI_FEATURES);
        // sorted ids
        assert!(ds.student_ids().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn label_from_first_attempt() {
        let recs = vec![
            rec("a", "X", 0, 2.0),
            rec("a", "A", 1, 0.0),
            rec("a", "A", 2, 3.0),
            rec("b", "X", 0, 2.0),
            rec("b", "A", 1, 3.0),
        ];
        let (tr, st) = cohort(recs);
        let ds = build_psai_dataset(&"A".into(), &tr, &st, &WeightParams::default(), PsaiConfig::default())
            .unwrap();
        assert_eq!(ds.labels(), [true, false]);
    }

    #[test]
    fn dataset_preconditions() {
        let p = WeightParams::default();
        let (tr, st) = cohort(vec![rec("a", "X", 0, 2.0), rec("a", "A", 1, 0.0)]);
        assert!(matches!(
            build_psai_dataset(&"Z".into(), &tr, &st, &p, PsaiConfig::default()),
            Err(FeatureError::UnknownCourse(_))
        ));
        assert!(matches!(
            build_psai_dataset(&"A".into(), &tr, &st, &p, PsaiConfig::default()),
            Err(FeatureError::TooFewEligible { found: 1, .. })
        ));
        let (tr, st) = cohort(vec![
            rec("a", "X", 0, 2.0),
            rec("a", "A", 1, 3.0),
            rec("b", "X", 0, 2.0),
            rec("b", "A", 1, 3.0),
        ]);
        assert!(matches!(
            build_psai_dataset(&"A".into(), &tr, &st, &p, PsaiConfig::default()),
            Err(FeatureError::SingleClass { .. })
        ));
    }

    #[test]
    fn leave_one_out_excludes_own_marks() {
        let recs = vec![
            rec("a", "X", 0, 4.0),
            rec("a", "A", 1, 0.0),
            rec("b", "X", 0, 2.0),
            rec("b", "A", 1, 3.0),
            rec("c", "X", 0, 3.0),
        ];
        let (tr, st) = cohort(recs);
        let p = WeightParams::default();
        let ds = build_psai_dataset(&"A".into(), &tr, &st, &p, PsaiConfig { leave_one_out: true }).unwrap();
        // a: X mean without a = (2+3)/2 = 2.5
        let expect_a = 4.0 * course_weight(&p, 2.5).unwrap();
        let expect_b = 2.0 * course_weight(&p, 3.5).unwrap();
        assert!((ds.rows()[0][0] - expect_a).abs() < 1e-12);
        assert!((ds.rows()[1][0] - expect_b).abs() < 1e-12);
        let rows = psai_rows(&ds);
        assert_eq!(rows[0].student_id.as_str(), "a");
        assert!(rows[0].failed);
    }
}
