//! Seeded synthetic cohorts from a latent ability / difficulty model.
//!
//! `mark = clamp(2.65 + ability - difficulty + noise, 0, 4.3)`, where 2.65
//! sits midway between the easy and hard anchor means.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::domain::{Category, CourseId, EnrollmentRecord, Mark, StudentId, StudentProfile, MAX_MARK};
use crate::ingest::{write_enrollments, write_profiles, ENROLLMENTS_FILE, PROFILES_FILE};

pub const TRUTH_FILE: &str = "truth.json";
pub const BASE_MARK: f64 = 2.65;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible schedule: {courses_per_term} courses x {terms} terms exceeds {n_courses} courses")]
    InfeasibleSchedule {
        courses_per_term: usize,
        terms: usize,
        n_courses: usize,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub n_students: usize,
    pub n_courses: usize,
    pub terms: usize,
    pub courses_per_term: usize,
    pub ability_spread: f64,
    pub difficulty_spread: f64,
    pub noise_spread: f64,
    pub fail_threshold: f64,
    pub demographics_informative: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_students: 5000,
            n_courses: 50,
            terms: 6,
            courses_per_term: 4,
            ability_spread: 0.8,
            difficulty_spread: 0.8,
            noise_spread: 0.4,
            fail_threshold: 1.0,
            demographics_informative: false,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.n_students == 0 || self.n_courses == 0 || self.terms == 0 || self.courses_per_term == 0 {
            return bad("counts must be positive");
        }
        for (name, v) in [
            ("ability_spread", self.ability_spread),
            ("difficulty_spread", self.difficulty_spread),
            ("noise_spread", self.noise_spread),
        ] {
            // zero is accepted for the noise-free limit
            if !v.is_finite() || v < 0.0 {
                return bad(&format!("{name} must be non-negative"));
            }
        }
        if !(0.0..=MAX_MARK).contains(&self.fail_threshold) {
            return bad("fail_threshold must lie in [0, 4.3]");
        }
        if self.courses_per_term * self.terms > self.n_courses {
            return Err(SynthError::InfeasibleSchedule {
                courses_per_term: self.courses_per_term,
                terms: self.terms,
                n_courses: self.n_courses,
            });
        }
        Ok(())
    }
}

/// Latent values behind a generated cohort.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRecord {
    pub config: SynthConfig,
    pub abilities: BTreeMap<StudentId, f64>,
    pub difficulties: BTreeMap<CourseId, f64>,
    /// Share of marks that hit 0 or 4.3 before clamping.
    pub clamp_fraction: f64,
    pub failure_rate: f64,
}

#[derive(Debug, Clone)]
pub struct Cohort {
    pub records: Vec<EnrollmentRecord>,
    pub profiles: Vec<StudentProfile>,
    pub truth: TruthRecord,
}

const ADMISSION: [&str; 4] = ["college_diploma", "high_school", "mature", "transfer"];
const CITIZENSHIP: [&str; 3] = ["citizen", "international", "permanent_resident"];
const PREVIOUS: [&str; 4] = ["arts", "none", "science", "technical"];
const LEGAL: [&str; 2] = ["full_time", "part_time"];
const PROGRAM: [&str; 5] = ["arts", "business", "engineering", "health", "science"];
const GENDER: [&str; 2] = ["f", "m"];

pub fn student_id(i: usize) -> StudentId {
    StudentId::new(format!("S{i:05}"))
}

pub fn course_id(i: usize) -> CourseId {
    CourseId::new(format!("C{i:03}"))
}

fn pick<'a, R: Rng>(rng: &mut R, options: &[&'a str], ability_z: Option<f64>) -> &'a str {
    match ability_z {
        // informative: mostly the ability bucket, otherwise uniform
        Some(z) if rng.random_bool(0.75) => {
            let k = options.len();
            let b = ((z + 1.5) / 3.0 * k as f64).floor().clamp(0.0, (k - 1) as f64) as usize;
            options[b]
        }
        _ => options.choose(rng).copied().unwrap(),
    }
}

/// Generates a cohort. Everything is drawn from one ChaCha stream seeded by
/// `config.seed`: abilities, then difficulties, then each student's
/// demographics, schedule and marks in student order.
pub fn generate_cohort(config: &SynthConfig) -> Result<Cohort, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = |sd: f64| Normal::new(0.0, sd).expect("validated spread");
    let ability_dist = normal(config.ability_spread);
    let difficulty_dist = normal(config.difficulty_spread);
    let noise_dist = normal(config.noise_spread);

    let abilities: Vec<f64> = (0..config.n_students).map(|_| ability_dist.sample(&mut rng)).collect();
    let difficulties: Vec<f64> = (0..config.n_courses).map(|_| difficulty_dist.sample(&mut rng)).collect();

    let per_student = config.terms * config.courses_per_term;
    let mut records = Vec::with_capacity(config.n_students * per_student);
    let mut profiles = Vec::with_capacity(config.n_students);
    let mut clamped = 0usize;
    let mut failed = 0usize;
    for (s, &ability) in abilities.iter().enumerate() {
        let sid = student_id(s);
        let z = config
            .demographics_informative
            .then(|| ability / config.ability_spread.max(f64::MIN_POSITIVE));
        profiles.push(StudentProfile {
            student_id: sid.clone(),
            admission_base: Category::new(pick(&mut rng, &ADMISSION, z)),
            citizenship: Category::new(pick(&mut rng, &CITIZENSHIP, None)),
            previous_program: Category::new(pick(&mut rng, &PREVIOUS, z)),
            legal_status: Category::new(pick(&mut rng, &LEGAL, None)),
            college_program: Category::new(pick(&mut rng, &PROGRAM, z)),
            age: 18 + (rng.random::<f64>().powi(2) * 15.0) as u32,
            gender: Category::new(pick(&mut rng, &GENDER, None)),
        });

        let courses = index::sample(&mut rng, config.n_courses, per_student).into_vec();
        for (slot, &c) in courses.iter().enumerate() {
            let raw = BASE_MARK + ability - difficulties[c] + noise_dist.sample(&mut rng);
            if !(0.0..=MAX_MARK).contains(&raw) {
                clamped += 1;
            }
            let mark = raw.clamp(0.0, MAX_MARK);
            let passed = mark >= config.fail_threshold;
            if !passed {
                failed += 1;
            }
            records.push(EnrollmentRecord {
                student_id: sid.clone(),
                course_id: course_id(c),
                term_index: (slot / config.courses_per_term) as u32,
                mark: Mark::new(mark).expect("clamped"),
                passed,
            });
        }
    }

    let total = records.len().max(1) as f64;
    let truth = TruthRecord {
        config: config.clone(),
        abilities: abilities.iter().enumerate().map(|(i, &a)| (student_id(i), a)).collect(),
        difficulties: difficulties.iter().enumerate().map(|(i, &d)| (course_id(i), d)).collect(),
        clamp_fraction: clamped as f64 / total,
        failure_rate: failed as f64 / total,
    };
    Ok(Cohort {
        records,
        profiles,
        truth,
    })
}

/// Writes `enrollments.csv`, `profiles.csv` and `truth.json` into `dir`.
pub fn write_cohort(dir: &Path, cohort: &Cohort) -> Result<(), SynthError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| SynthError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;

    let p = dir.join(ENROLLMENTS_FILE);
    let f = File::create(&p).map_err(io(&p))?;
    write_enrollments(BufWriter::new(f), &cohort.records).map_err(|e| io(&p)(e.into()))?;

    let p = dir.join(PROFILES_FILE);
    let f = File::create(&p).map_err(io(&p))?;
    write_profiles(BufWriter::new(f), &cohort.profiles).map_err(|e| io(&p)(e.into()))?;

    let p = dir.join(TRUTH_FILE);
    let mut f = BufWriter::new(File::create(&p).map_err(io(&p))?);
    serde_json::to_writer_pretty(&mut f, &cohort.truth).map_err(|e| io(&p)(e.into()))?;
    f.write_all(b"\n").and_then(|_| f.flush()).map_err(io(&p))?;
    Ok(())
}
