//! CSV ingestion of enrollments and student profiles.
//!
//! Malformed rows are dropped and counted; only a malformed header (or an
//! unreadable file) aborts parsing.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::domain::{
    validate_record, Category, CourseId, CourseStats, DomainError, EnrollmentRecord,
    RawEnrollment, StudentId, StudentProfile,
};

pub const ENROLLMENTS_FILE: &str = "enrollments.csv";
pub const PROFILES_FILE: &str = "profiles.csv";

pub const ENROLLMENT_HEADER: [&str; 5] = ["student_id", "course_id", "term_index", "mark", "passed"];
pub const PROFILE_HEADER: [&str; 8] = [
    "student_id",
    "admission_base",
    "citizenship",
    "previous_program",
    "legal_status",
    "college_program",
    "age",
    "gender",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header: expected `{expected}`, found `{found}`")]
    MalformedHeader { expected: String, found: String },
    #[error("no valid ages to impute missing ages from")]
    NoValidAges,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Row accounting for one parsed file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    #[serde(rename = "accepted")]
    pub accepted_records: usize,
    #[serde(rename = "dropped")]
    pub dropped_records: usize,
    pub drop_reasons: BTreeMap<String, usize>,
    #[serde(rename = "courses")]
    pub courses_indexed: usize,
    #[serde(rename = "students")]
    pub students_indexed: usize,
}

impl IngestReport {
    fn drop(&mut self, reason: &str) {
        self.dropped_records += 1;
        *self.drop_reasons.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn total_rows(&self) -> usize {
        self.accepted_records + self.dropped_records
    }
}

const MALFORMED_ROW: &str = "MalformedRow";
const NEGATIVE_AGE: &str = "NegativeAge";

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn header_fields<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Vec<String>, IngestError> {
    let h = rdr.byte_headers()?;
    Ok(h.iter()
        .map(|f| String::from_utf8_lossy(f).trim_start_matches('\u{feff}').to_string())
        .collect())
}

/// Splits a raw row into UTF-8 cells; empty cells become `None`.
fn cells(rec: &csv::ByteRecord, width: usize) -> Option<Vec<Option<&str>>> {
    if rec.len() > width {
        return None;
    }
    let mut out = Vec::with_capacity(width);
    for i in 0..width {
        match rec.get(i) {
            None => out.push(None),
            Some(b) => {
                let s = std::str::from_utf8(b).ok()?;
                out.push(if s.is_empty() { None } else { Some(s) });
            }
        }
    }
    Some(out)
}

fn parse_cell<T: std::str::FromStr>(
    cell: Option<&str>,
    field: &'static str,
) -> Result<Option<T>, DomainError> {
    match cell {
        None => Ok(None),
        Some(s) => s.parse().map(Some).map_err(|_| DomainError::InvalidValue {
            field,
            value: s.to_string(),
        }),
    }
}

fn parse_passed(cell: Option<&str>) -> Result<Option<bool>, DomainError> {
    match cell.map(str::to_ascii_lowercase).as_deref() {
        None => Ok(None),
        Some("true") | Some("1") => Ok(Some(true)),
        Some("false") | Some("0") => Ok(Some(false)),
        Some(other) => Err(DomainError::InvalidValue {
            field: "passed",
            value: other.to_string(),
        }),
    }
}

fn raw_enrollment(c: &[Option<&str>]) -> Result<RawEnrollment, DomainError> {
    Ok(RawEnrollment {
        student_id: c[0].map(str::to_string),
        course_id: c[1].map(str::to_string),
        term_index: parse_cell(c[2], "term_index")?,
        mark: parse_cell(c[3], "mark")?,
        passed: parse_passed(c[4])?,
    })
}

/// Parses `enrollments.csv`. The `passed` column may be omitted entirely.
pub fn parse_enrollments<R: Read>(
    source: R,
) -> Result<(Vec<EnrollmentRecord>, IngestReport), IngestError> {
    let mut rdr = reader(source);
    let header = header_fields(&mut rdr)?;
    let ok = header.len() >= 4
        && header.len() <= 5
        && header.iter().zip(ENROLLMENT_HEADER).all(|(h, e)| h == e);
    if !ok {
        return Err(IngestError::MalformedHeader {
            expected: ENROLLMENT_HEADER.join(","),
            found: header.join(","),
        });
    }
    let width = header.len();

    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rdr.byte_records() {
        let row = row?;
        let Some(mut c) = cells(&row, width) else {
            report.drop(MALFORMED_ROW);
            continue;
        };
        c.resize(5, None);
        let rec = match raw_enrollment(&c).and_then(validate_record) {
            Ok(r) => r,
            Err(e) => {
                report.drop(e.kind());
                continue;
            }
        };
        let key = (rec.student_id.clone(), rec.course_id.clone(), rec.term_index);
        if !seen.insert(key) {
            report.drop("DuplicateKey");
            continue;
        }
        report.accepted_records += 1;
        records.push(rec);
    }
    report.courses_indexed = records.iter().map(|r| &r.course_id).collect::<BTreeSet<_>>().len();
    report.students_indexed = records.iter().map(|r| &r.student_id).collect::<BTreeSet<_>>().len();
    Ok((records, report))
}

/// Parses `profiles.csv`, filling empty categoricals with `unknown` and
/// empty ages with the median of the accepted ages.
pub fn parse_profiles<R: Read>(
    source: R,
) -> Result<(Vec<StudentProfile>, IngestReport), IngestError> {
    let mut rdr = reader(source);
    let header = header_fields(&mut rdr)?;
    if header != PROFILE_HEADER {
        return Err(IngestError::MalformedHeader {
            expected: PROFILE_HEADER.join(","),
            found: header.join(","),
        });
    }

    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    // age None = to be imputed
    let mut pending: Vec<(StudentProfile, Option<u32>)> = Vec::new();
    for row in rdr.byte_records() {
        let row = row?;
        let Some(c) = cells(&row, PROFILE_HEADER.len()) else {
            report.drop(MALFORMED_ROW);
            continue;
        };
        let Some(id) = c[0] else {
            report.drop("MissingField");
            continue;
        };
        let age = match c[6].map(str::parse::<i64>) {
            None => None,
            Some(Ok(a)) if a > 0 && a <= u32::MAX as i64 => Some(a as u32),
            Some(Ok(_)) => {
                report.drop(NEGATIVE_AGE);
                continue;
            }
            Some(Err(_)) => {
                report.drop("InvalidValue");
                continue;
            }
        };
        if !seen.insert(id.to_string()) {
            report.drop("DuplicateKey");
            continue;
        }
        let cat = |i: usize| Category::new(c[i].unwrap_or(""));
        let profile = StudentProfile {
            student_id: StudentId::new(id),
            admission_base: cat(1),
            citizenship: cat(2),
            previous_program: cat(3),
            legal_status: cat(4),
            college_program: cat(5),
            age: 0,
            gender: cat(7),
        };
        report.accepted_records += 1;
        pending.push((profile, age));
    }

    let known: Vec<u32> = pending.iter().filter_map(|(_, a)| *a).collect();
    let median = median_age(&known);
    let mut profiles = Vec::with_capacity(pending.len());
    for (mut p, age) in pending {
        p.age = match age {
            Some(a) => a,
            None => median.ok_or(IngestError::NoValidAges)?,
        };
        profiles.push(p);
    }
    report.students_indexed = profiles.len();
    Ok((profiles, report))
}

/// Median of the ages; for an even count, the floor of the two middle values' mean.
pub fn median_age(ages: &[u32]) -> Option<u32> {
    if ages.is_empty() {
        return None;
    }
    let mut v = ages.to_vec();
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        ((v[n / 2 - 1] as u64 + v[n / 2] as u64) / 2) as u32
    })
}

/// Mean mark and success rate per course.
///
/// Marks are summed in sorted order so the result does not depend on the
/// order of `records`.
pub fn compute_course_stats(records: &[EnrollmentRecord]) -> BTreeMap<CourseId, CourseStats> {
    let mut by_course: BTreeMap<&CourseId, (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let e = by_course.entry(&r.course_id).or_default();
        e.0.push(r.mark.value());
        if r.passed {
            e.1 += 1;
        }
    }
    by_course
        .into_iter()
        .map(|(id, (mut marks, passed))| {
            marks.sort_by(f64::total_cmp);
            let n = marks.len();
            // shifted by the minimum so identical marks average exactly
            let base = marks[0];
            let dev: f64 = marks.iter().map(|m| m - base).sum();
            let stats = CourseStats {
                course_id: id.clone(),
                mean_mark: base + dev / n as f64,
                success_rate: passed as f64 / n as f64,
                enrollment_count: n,
                passed_count: passed,
            };
            (id.clone(), stats)
        })
        .collect()
}

pub fn write_enrollments<W: Write>(sink: W, records: &[EnrollmentRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(ENROLLMENT_HEADER)?;
    for r in records {
        w.write_record([
            r.student_id.as_str(),
            r.course_id.as_str(),
            &r.term_index.to_string(),
            &r.mark.value().to_string(),
            if r.passed { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profiles<W: Write>(sink: W, profiles: &[StudentProfile]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(PROFILE_HEADER)?;
    for p in profiles {
        w.write_record([
            p.student_id.as_str(),
            p.admission_base.as_str(),
            p.citizenship.as_str(),
            p.previous_program.as_str(),
            p.legal_status.as_str(),
            p.college_program.as_str(),
            &p.age.to_string(),
            p.gender.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Both input files of a cohort directory, parsed.
#[derive(Debug, Clone)]
pub struct CohortInput {
    pub records: Vec<EnrollmentRecord>,
    pub profiles: Vec<StudentProfile>,
    pub enrollment_report: IngestReport,
    pub profile_report: IngestReport,
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `enrollments.csv` and `profiles.csv` from `dir`, in parallel.
pub fn read_cohort_dir(dir: &Path) -> Result<CohortInput, IngestError> {
    let enr_path = dir.join(ENROLLMENTS_FILE);
    let prof_path = dir.join(PROFILES_FILE);
    let (enr, prof) = rayon::join(
        || open(&enr_path).and_then(|f| parse_enrollments(std::io::BufReader::new(f))),
        || open(&prof_path).and_then(|f| parse_profiles(std::io::BufReader::new(f))),
    );
    let (records, enrollment_report) = enr?;
    let (profiles, profile_report) = prof?;
    Ok(CohortInput {
        records,
        profiles,
        enrollment_report,
        profile_report,
    })
}
