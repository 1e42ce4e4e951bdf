#![allow(dead_code)]

use std::collections::BTreeSet;

use psai_core::domain::{EnrollmentRecord, Mark, PASS_MARK};
use psai_core::{CourseId, StudentId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rec(s: &str, c: &str, term: u32, mark: f64) -> EnrollmentRecord {
    EnrollmentRecord {
        student_id: StudentId::new(s),
        course_id: CourseId::new(c),
        term_index: term,
        mark: Mark::new(mark).unwrap(),
        passed: mark >= PASS_MARK,
    }
}

/// Random small cohort: each student gets a handful of records over a few
/// courses and terms, with retakes allowed but no repeated
/// (student, course, term) key.
pub fn random_records(rng: &mut ChaCha8Rng, n_students: usize, n_courses: usize, n_terms: u32) -> Vec<EnrollmentRecord> {
    let mut out = Vec::new();
    for s in 0..n_students {
        let n = rng.random_range(1..=10);
        let mut keys = BTreeSet::new();
        for _ in 0..n {
            let c = rng.random_range(0..n_courses);
            let t = rng.random_range(0..n_terms);
            if keys.insert((c, t)) {
                let mark = (rng.random_range(0.0..=4.3f64) * 100.0).round() / 100.0;
                out.push(rec(&format!("s{s:03}"), &format!("c{c}"), t, mark));
            }
        }
    }
    out
}

/// Two Gaussian blobs around (-2,-2) and (2,2); the second is the positive class.
pub fn blobs(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let noise = Normal::new(0.0, 0.7).unwrap();
    (0..n)
        .map(|i| {
            let positive = i % 2 == 1;
            let c = if positive { 2.0 } else { -2.0 };
            (vec![c + noise.sample(rng), c + noise.sample(rng)], positive)
        })
        .unzip()
}
