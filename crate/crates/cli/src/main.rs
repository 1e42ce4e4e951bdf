//! `psai`: generate cohorts, build feature sets, cross-validate classifiers.
//!
//! Exit codes: 0 success, 2 usage, 3 data preconditions, 4 internal error.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};

use psai_core::dataset::{read_feature_csv, write_feature_csv};
use psai_core::ingest::{read_cohort_dir, IngestError};
use psai_core::ml::{evaluate, ClassifierKind, ClassifierSpec, MlError};
use psai_core::naive::DEFAULT_CREDIT_VALUE;
use psai_core::pipeline::{build_features, compare, render_table, FeatureOptions, PipelineError, Prepared};
use psai_core::psai::{FeatureError, PsaiConfig};
use psai_core::synthgen::{generate_cohort, write_cohort, SynthConfig, SynthError};
use psai_core::weighting::{fit_weight_params, AnchorPoint};
use psai_core::{CourseId, Provenance};

#[derive(Parser)]
#[command(name = "psai", version, about = "Difficulty-weighted student attributes vs. a naive baseline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic cohort (enrollments.csv, profiles.csv, truth.json).
    Generate(GenerateArgs),
    /// Parse a cohort directory and print the ingest report as JSON.
    IngestCheck {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Build a PSAI or naive feature CSV for one target course.
    BuildFeatures(BuildArgs),
    /// Cross-validate one classifier on a feature CSV and print the report JSON.
    Evaluate(EvaluateArgs),
    /// Cross-validate all classifiers on both feature sets and print a table.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 5000)]
    students: usize,
    #[arg(long, default_value_t = 50)]
    courses: usize,
    #[arg(long, default_value_t = 6)]
    terms: usize,
    #[arg(long, default_value_t = 4)]
    courses_per_term: usize,
    #[arg(long, default_value_t = 0.8)]
    ability_spread: f64,
    #[arg(long, default_value_t = 0.8)]
    difficulty_spread: f64,
    #[arg(long, default_value_t = 0.4)]
    noise_spread: f64,
    #[arg(long, default_value_t = 1.0)]
    fail_threshold: f64,
    #[arg(long)]
    demographics_informative: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct FeatureFlags {
    /// Easy-course anchor as MARK:WEIGHT.
    #[arg(long, default_value = "4.15:0.5")]
    easy_anchor: AnchorPoint,
    /// Hard-course anchor as MARK:WEIGHT.
    #[arg(long, default_value = "1.15:2.0")]
    hard_anchor: AnchorPoint,
    /// Compute prior-course means without the scored student's own marks.
    #[arg(long)]
    leave_one_out: bool,
    /// Credits awarded per passed course in the naive features.
    #[arg(long, default_value_t = DEFAULT_CREDIT_VALUE)]
    credit_value: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Psai,
    Naive,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    course: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    features: FeatureFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_parser = PossibleValuesParser::new(ClassifierKind::NAMES))]
    classifier: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    course: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write compare.txt and compare.json here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    features: FeatureFlags,
}

enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<FeatureError> for Failure {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::UnknownCourse(_) => Failure::Usage(e.to_string()),
            FeatureError::TooFewEligible { .. } | FeatureError::SingleClass { .. } => Failure::Data(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<MlError> for Failure {
    fn from(e: MlError) -> Self {
        match e {
            MlError::UnknownKind(_) | MlError::UnknownHyperparam { .. } | MlError::InvalidHyperparam { .. } | MlError::InvalidK(_) => {
                Failure::Usage(e.to_string())
            }
            MlError::TooFewPerClass { .. } | MlError::SingleClass | MlError::EmptyTraining => Failure::Data(e.to_string()),
            MlError::ArityMismatch { .. } => Failure::Internal(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Feature(e) => e.into(),
            PipelineError::Ml(e) => e.into(),
        }
    }
}

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Internal(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_failure(dir))?;
    }
    fs::write(path, contents).map_err(io_failure(path))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Internal(e.to_string()))?;
    Ok(pool.install(f))
}

fn feature_options(flags: &FeatureFlags) -> Result<FeatureOptions, Failure> {
    let weights = fit_weight_params(flags.hard_anchor, flags.easy_anchor).map_err(|e| Failure::Usage(e.to_string()))?;
    if !(flags.credit_value > 0.0) {
        return Err(Failure::Usage("--credit-value must be positive".into()));
    }
    Ok(FeatureOptions {
        weights,
        psai: PsaiConfig {
            leave_one_out: flags.leave_one_out,
        },
        credit_value: flags.credit_value,
    })
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    let config = SynthConfig {
        n_students: a.students,
        n_courses: a.courses,
        terms: a.terms,
        courses_per_term: a.courses_per_term,
        ability_spread: a.ability_spread,
        difficulty_spread: a.difficulty_spread,
        noise_spread: a.noise_spread,
        fail_threshold: a.fail_threshold,
        demographics_informative: a.demographics_informative,
        seed: a.seed,
    };
    let cohort = generate_cohort(&config).map_err(|e| match e {
        SynthError::InfeasibleSchedule { .. } | SynthError::InvalidConfig(_) => Failure::Usage(e.to_string()),
        SynthError::Io { .. } => Failure::Internal(e.to_string()),
    })?;
    write_cohort(&a.out, &cohort).map_err(|e| Failure::Internal(e.to_string()))?;
    let input = read_cohort_dir(&a.out).map_err(|e| Failure::Internal(e.to_string()))?;
    println!("{}", serde_json::to_string(&input.enrollment_report).expect("serializable"));
    println!(
        "wrote {} enrollments and {} profiles to {} (failure rate {:.4}, clamped {:.4})",
        cohort.records.len(),
        cohort.profiles.len(),
        a.out.display(),
        cohort.truth.failure_rate,
        cohort.truth.clamp_fraction,
    );
    Ok(())
}

fn cmd_ingest_check(input: &Path) -> Result<(), Failure> {
    let cohort = read_cohort_dir(input)?;
    let out = serde_json::json!({
        "enrollments": cohort.enrollment_report,
        "profiles": cohort.profile_report,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

fn cmd_build_features(a: BuildArgs) -> Result<(), Failure> {
    let options = feature_options(&a.features)?;
    let input = read_cohort_dir(&a.input)?;
    let prepared = Prepared::new(&input);
    let course = CourseId::new(a.course);
    let method = match a.method {
        Method::Psai => Provenance::Psai,
        Method::Naive => Provenance::Naive,
    };
    let ds = build_features(&input, &prepared, &course, method, &options)?;
    let elig = prepared.eligibility(&course);
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &ds).map_err(|e| Failure::Internal(e.to_string()))?;
    write_file(&a.out, &buf)?;
    println!(
        "{method} features for {course}: {} eligible, {} ineligible, {} failures -> {}",
        elig.eligible.len(),
        elig.ineligible.len(),
        ds.positives(),
        a.out.display()
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let kind: ClassifierKind = a.classifier.parse()?;
    let file = File::open(&a.features).map_err(|e| Failure::Data(format!("{}: {e}", a.features.display())))?;
    let ds = read_feature_csv(BufReader::new(file)).map_err(|e| Failure::Data(e.to_string()))?;
    let spec = ClassifierSpec::new(kind, a.seed);
    let report = with_threads(a.threads, || evaluate(&spec, &ds, a.k, a.seed))??;
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    if let Some(out) = &a.out {
        write_file(out, format!("{json}\n").as_bytes())?;
    }
    println!("{json}");
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let options = feature_options(&a.features)?;
    let input = read_cohort_dir(&a.input)?;
    let course = CourseId::new(a.course);
    let cmp = with_threads(a.threads, || compare(&input, &course, a.k, a.seed, &options))??;
    let table = render_table(&cmp);
    if let Some(dir) = &a.out {
        write_file(&dir.join("compare.txt"), table.as_bytes())?;
        let json = serde_json::to_string_pretty(&cmp).expect("serializable");
        write_file(&dir.join("compare.json"), format!("{json}\n").as_bytes())?;
    }
    let mut stdout = BufWriter::new(std::io::stdout());
    let _ = stdout.write_all(table.as_bytes());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::IngestCheck { input } => cmd_ingest_check(&input),
        Command::BuildFeatures(a) => cmd_build_features(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
