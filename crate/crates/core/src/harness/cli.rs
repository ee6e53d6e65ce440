//! Argument parsing and command dispatch for the `krein` binary.
//!
//! Kernels are given as a flat key-value string, for example
//! `--kernel "kernel=gaussdiff sigma1=1 sigma2=3"`. Recognized names are
//! `gaussdiff` (`sigma1`, `sigma2`), `gaussian` (`sigma`), `sigmoid`
//! (`a`, `b`), `rl-sigmoid` (a tanh preset), `epanechnikov` (`sigma`),
//! `linear` and `precomputed`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use super::*;
use crate::data::{misclassification, SyntheticKind};
use crate::landmarks::{fit_landmarks, Sampler};
use crate::learners::{
    build_feature_map, flip_shsvm_baseline, krein_krr_lowrank, sh_svm_lowrank, vc_lsm_lowrank, Learner, RegPair,
};
use crate::linalg::orthonormality_defect;
use crate::nystroem::{EigenMethod, LandmarkSet};
use crate::Rng;

#[derive(Debug, Parser)]
#[command(name = "krein", version, about = "Nyström approximation and learning with indefinite kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximation error and time over a rank/landmark schedule.
    Approx(ApproxArgs),
    /// One-shot eigendecomposition of the Nyström approximation.
    Eigen(EigenArgs),
    /// Landmark selection only.
    Sample(SampleArgs),
    /// Fit one learner on the whole data set.
    Train(TrainArgs),
    /// Stratified cross-validation of the learners and baselines.
    Cv(CvArgs),
    /// Wall-clock comparison of the one-shot and baseline constructions.
    Bench(BenchArgs),
    /// Closed-form flop counts of both constructions.
    Flops(FlopsArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Square similarity matrix (csv or whitespace separated).
    #[arg(long, group = "source")]
    pub matrix: Option<PathBuf>,
    /// Square dissimilarity matrix; converted by negative double-centering.
    #[arg(long, group = "source")]
    pub dissimilarity: Option<PathBuf>,
    /// Treat dissimilarity entries as already squared.
    #[arg(long)]
    pub no_square: bool,
    /// Instances as rows; standardized, then the kernel is applied.
    #[arg(long, group = "source")]
    pub data: Option<PathBuf>,
    /// Synthetic data set: two-gaussians or concentric.
    #[arg(long, group = "source")]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value = "kernel=gaussdiff sigma1=1 sigma2=3")]
    pub kernel: String,
    /// One label per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// One-vs-all target for multi-class labels.
    #[arg(long)]
    pub target_class: Option<String>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated samplers: uniform, leverage, kmeanspp.
    #[arg(long, default_value = "uniform", value_delimiter = ',')]
    pub sampler: Vec<String>,
    #[arg(long, default_value = "10:160:x2")]
    pub ranks: String,
    /// `1` (l = k) or `logn` (l = ⌈k ln n⌉).
    #[arg(long, default_value = "1")]
    pub landmark_factor: String,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    /// Uniform sketch size for the leverage and kmeanspp samplers.
    #[arg(long)]
    pub sketch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "one-shot")]
    pub method: String,
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    #[arg(long, default_value_t = 50)]
    pub landmarks: usize,
    /// Keep only the leading `rank` eigenpairs.
    #[arg(long)]
    pub rank: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    #[arg(long, default_value_t = 50)]
    pub landmarks: usize,
    #[arg(long)]
    pub sketch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: Common,
    /// krein-lsm, krein-vc-lsm, krein-sh-svm or flip-sh-svm.
    #[arg(long, default_value = "krein-sh-svm")]
    pub learner: String,
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    #[arg(long, default_value_t = 50)]
    pub landmarks: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lambda_plus: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub lambda_minus: f64,
    /// VC-LSM radius; defaults to `√n · std(y)`.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: Common,
    #[arg(
        long,
        default_value = "krein-lsm,krein-vc-lsm,krein-sh-svm,sf-lsm,constant",
        value_delimiter = ','
    )]
    pub learners: Vec<String>,
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    /// Landmark counts (a:b:xS or a comma list).
    #[arg(long = "ranks", default_value = "50")]
    pub ranks: String,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 3)]
    pub inner_folds: usize,
    /// Candidate λ values; defaults to 10^-4 .. 10^2.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Vec<f64>,
    #[arg(long, default_value = "0.5,1,2", value_delimiter = ',')]
    pub radius_factors: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "2500,5000,10000", value_delimiter = ',')]
    pub ns: Vec<usize>,
    #[arg(long, default_value = "200", value_delimiter = ',')]
    pub ms: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 5)]
    pub dim: usize,
    #[arg(long, default_value = "kernel=gaussdiff sigma1=1 sigma2=3")]
    pub kernel: String,
}

#[derive(Debug, Args)]
pub struct FlopsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "1000000", value_delimiter = ',')]
    pub ns: Vec<u64>,
    #[arg(long, default_value = "1000", value_delimiter = ',')]
    pub ms: Vec<u64>,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Approx(a) => approx(a),
        Command::Eigen(a) => eigen(a),
        Command::Sample(a) => sample(a),
        Command::Train(a) => train(a),
        Command::Cv(a) => cv(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Flops(a) => flops(a),
    }
}

fn input_spec(a: &InputArgs, seed: u64) -> Result<InputSpec> {
    let kernel: KernelSpec = a.kernel.parse()?;
    if let Some(path) = &a.matrix {
        Ok(InputSpec::Matrix { path: path.clone() })
    } else if let Some(path) = &a.dissimilarity {
        Ok(InputSpec::Dissimilarity {
            path: path.clone(),
            square: !a.no_square,
        })
    } else if let Some(path) = &a.data {
        Ok(InputSpec::Vectors {
            path: path.clone(),
            kernel,
        })
    } else if let Some(name) = &a.synthetic {
        Ok(InputSpec::Synthetic {
            dataset: name.parse::<SyntheticKind>().map_err(|e| Error::Config(e.to_string()))?,
            n: a.n,
            p: a.p,
            seed,
            kernel,
        })
    } else {
        Err(Error::Config(
            "no input: pass --matrix, --dissimilarity, --data or --synthetic".into(),
        ))
    }
}

fn load(a: &InputArgs, seed: u64, config: &mut RunConfig) -> Result<Problem> {
    let spec = input_spec(a, seed)?;
    let problem = Problem::load(&spec, a.labels.as_deref(), a.target_class.as_deref())?;
    for w in &problem.warnings {
        log::warn!("{w:?}");
    }
    config.kernel = problem.kernel.describe();
    config.input = Some(spec);
    config.labels = a.labels.clone();
    config.notes.extend(problem.notes.iter().cloned());
    Ok(problem)
}

fn base_config(command: &str, common: &Common) -> RunConfig {
    RunConfig {
        command: command.into(),
        seed: common.seed,
        repetitions: 1,
        out: Some(common.out.clone()),
        ..RunConfig::default()
    }
}

fn finish<T: Serialize>(common: &Common, name: &str, config: &RunConfig, results: &T) -> Result<()> {
    let path = write_results(&common.out, name, config, results)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    println!("{}", header.join("\t"));
    for r in rows {
        println!("{}", r.join("\t"));
    }
}

fn parse_samplers(names: &[String]) -> Result<Vec<Sampler>> {
    names.iter().map(|s| s.trim().parse()).collect()
}

fn labels_of(problem: &Problem) -> Result<DVector<f64>> {
    problem
        .labels
        .clone()
        .ok_or_else(|| Error::Config("this command needs labels (--labels or --synthetic)".into()))
}

fn approx(a: ApproxArgs) -> Result<()> {
    let mut config = base_config("approx", &a.common);
    let samplers = parse_samplers(&a.sampler)?;
    let ranks = parse_ranks(&a.ranks)?;
    let factor: LandmarkFactor = a.landmark_factor.parse()?;
    if a.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let problem = load(&a.input, a.common.seed, &mut config)?;
    let sched = schedule(&ranks, factor, problem.kernel.len())?;
    config.samplers = samplers.iter().map(|s| s.to_string()).collect();
    config.schedule = sched.clone();
    config.repetitions = a.repetitions;
    config.notes.push(format!("landmark factor {factor}"));
    let reference = problem.kernel.full()?;
    let mut rows = approx_sweep(
        &problem.kernel,
        &reference,
        &samplers,
        &sched,
        a.repetitions,
        a.common.seed,
        a.sketch_size,
    )?;
    let medians = median_rows(&rows);
    print_table(&ApproxRow::HEADER, &medians.iter().map(ApproxRow::cells).collect::<Vec<_>>());
    rows.extend(medians);
    write_table(&a.common.out, "approx", &ApproxRow::HEADER, &rows.iter().map(ApproxRow::cells).collect::<Vec<_>>())?;
    finish(&a.common, "approx", &config, &rows)
}

#[derive(Serialize)]
struct EigenReport {
    method: EigenMethod,
    landmarks: Vec<usize>,
    eigenvalues: Vec<f64>,
    frobenius_error: Option<f64>,
    orthonormality_defect: f64,
    warnings: Vec<Warning>,
}

fn eigen(a: EigenArgs) -> Result<()> {
    let mut config = base_config("eigen", &a.common);
    let method: EigenMethod = a.method.parse()?;
    let sampler: Sampler = a.sampler.parse()?;
    let problem = load(&a.input, a.common.seed, &mut config)?;
    let n = problem.kernel.len();
    if a.landmarks == 0 || a.landmarks > n || a.rank.is_some_and(|k| k == 0 || k > a.landmarks) {
        return Err(Error::Config(format!(
            "need 1 <= rank <= landmarks <= n = {n}"
        )));
    }
    config.samplers = vec![sampler.to_string()];
    config.schedule = vec![(a.rank.unwrap_or(a.landmarks), a.landmarks)];
    let mut rng = Rng::new(a.common.seed);
    let sel = sampler.select(problem.kernel.source(), a.landmarks, None, &mut rng)?;
    let indices = sel.landmarks.indices.clone();
    let (factor, k_xz) = fit_landmarks(problem.kernel.source(), sel.landmarks, None)?;
    let mut eig = match method {
        EigenMethod::OneShot => factor.one_shot_eigen(&k_xz)?,
        EigenMethod::Sgt => factor.sgt_one_shot(&k_xz)?,
    };
    if let Some(k) = a.rank {
        eig = eig.truncate(k);
    }
    // the reference matrix is only formed when it is cheap
    let frobenius_error = if n <= 5000 {
        Some(crate::linalg::frobenius_distance(&eig.reconstruct(), problem.kernel.full()?.as_matrix())?)
    } else {
        None
    };
    let mut warnings = sel.warnings;
    warnings.extend(eig.warnings.iter().cloned());
    let report = EigenReport {
        method,
        landmarks: indices,
        eigenvalues: eig.values.iter().copied().collect(),
        frobenius_error,
        orthonormality_defect: orthonormality_defect(&eig.vectors),
        warnings,
    };
    println!("method\t{method}");
    println!("rank\t{}", eig.rank());
    if let Some(e) = frobenius_error {
        println!("frobenius_error\t{e:e}");
    }
    println!("orthonormality_defect\t{:e}", report.orthonormality_defect);
    let rows: Vec<Vec<String>> = report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), format!("{v:?}")])
        .collect();
    write_table(&a.common.out, "eigenvalues", &["index", "eigenvalue"], &rows)?;
    finish(&a.common, "eigen", &config, &report)
}

#[derive(Serialize)]
struct SampleReport {
    sampler: Sampler,
    indices: Vec<usize>,
    multiplicity: Vec<usize>,
    warnings: Vec<Warning>,
}

fn sample(a: SampleArgs) -> Result<()> {
    let mut config = base_config("sample", &a.common);
    let sampler: Sampler = a.sampler.parse()?;
    let problem = load(&a.input, a.common.seed, &mut config)?;
    config.samplers = vec![sampler.to_string()];
    let sel = sampler.select(problem.kernel.source(), a.landmarks, a.sketch_size, &mut Rng::new(a.common.seed))?;
    let LandmarkSet { indices, multiplicity } = sel.landmarks;
    let rows: Vec<Vec<String>> = indices
        .iter()
        .zip(&multiplicity)
        .map(|(i, m)| vec![i.to_string(), m.to_string()])
        .collect();
    print_table(&["index", "multiplicity"], &rows);
    write_table(&a.common.out, "landmarks", &["index", "multiplicity"], &rows)?;
    finish(
        &a.common,
        "sample",
        &config,
        &SampleReport {
            sampler,
            indices,
            multiplicity,
            warnings: sel.warnings,
        },
    )
}

fn train(a: TrainArgs) -> Result<()> {
    let mut config = base_config("train", &a.common);
    let learner: Learner = a.learner.parse()?;
    let sampler: Sampler = a.sampler.parse()?;
    let reg = RegPair::new(a.lambda_plus, a.lambda_minus).map_err(|e| Error::Config(e.to_string()))?;
    let problem = load(&a.input, a.common.seed, &mut config)?;
    let y = labels_of(&problem)?;
    let n = problem.kernel.len();
    if a.landmarks == 0 || a.landmarks > n {
        return Err(Error::Config(format!("landmarks must lie in [1, {n}]")));
    }
    config.samplers = vec![sampler.to_string()];
    config.learners = vec![learner.to_string()];
    config.schedule = vec![(a.landmarks, a.landmarks)];
    let sel = sampler.select(problem.kernel.source(), a.landmarks, None, &mut Rng::new(a.common.seed))?;
    let indices = sel.landmarks.indices.clone();
    let (factor, k_xz) = fit_landmarks(problem.kernel.source(), sel.landmarks, None)?;
    let map = build_feature_map(&factor, &k_xz)?;
    let mut model = match learner {
        Learner::KreinLsm => krein_krr_lowrank(&map, &y, reg)?,
        Learner::KreinVcLsm => {
            let mean = y.mean();
            let yc = y.add_scalar(-mean);
            let radius = a.radius.unwrap_or_else(|| yc.norm());
            config.notes.push("vc-lsm: features and targets centered, target mean kept as offset".into());
            let mut m = vc_lsm_lowrank(&map.centered(), &yc, reg, radius)?;
            m.offset = mean;
            m
        }
        Learner::KreinShSvm => sh_svm_lowrank(&map, &y, reg)?,
        Learner::FlipShSvm => flip_shsvm_baseline(&map, &y, a.lambda_plus)?,
    };
    if let KernelData::Vectors { spec, x } = &problem.kernel {
        model = model.with_kernel(*spec, x.select_rows(&indices));
        config.notes.push("model kernel expects standardized inputs".into());
    }
    let preds = model.predict_batch(&k_xz)?;
    println!("learner\t{learner}");
    println!("landmarks\t{}", indices.len());
    println!("iterations\t{}", model.diagnostics.iterations);
    println!("objective\t{:e}", model.diagnostics.objective);
    if learner.is_classifier() || y.iter().all(|v| v.abs() == 1.0) {
        println!("training_error\t{:.6}", misclassification(&preds, &y)?);
    }
    std::fs::create_dir_all(&a.common.out)?;
    let path = a.common.out.join("model.json");
    std::fs::write(&path, model.to_json()?)?;
    eprintln!("wrote {}", path.display());
    finish(&a.common, "train", &config, &model.diagnostics)
}

fn cv(a: CvArgs) -> Result<()> {
    let mut config = base_config("cv", &a.common);
    let tasks: Vec<CvTask> = a.learners.iter().map(|s| s.trim().parse()).collect::<Result<_>>()?;
    let sampler: Sampler = a.sampler.parse()?;
    let landmarks = parse_ranks(&a.ranks)?;
    let mut cv_config = CvConfig {
        folds: a.folds,
        inner_folds: a.inner_folds,
        landmarks,
        sampler,
        tasks,
        radius_factors: a.radius_factors.clone(),
        seed: a.common.seed,
        ..CvConfig::default()
    };
    if !a.lambda_grid.is_empty() {
        cv_config.lambda_grid = a.lambda_grid.clone();
    }
    let problem = load(&a.input, a.common.seed, &mut config)?;
    let y = labels_of(&problem)?;
    config.samplers = vec![sampler.to_string()];
    config.learners = cv_config.tasks.iter().map(|t| t.to_string()).collect();
    config.schedule = cv_config.landmarks.iter().map(|&m| (m, m)).collect();
    config.folds = Some(a.folds);
    config.notes.push(format!(
        "lambda grid {:?}, radius factors {:?} x sqrt(n) std(y), {} inner folds",
        cv_config.lambda_grid, cv_config.radius_factors, cv_config.inner_folds
    ));
    let report = cv_evaluate(&problem.kernel, &y, &cv_config)?;
    let rows: Vec<Vec<String>> = report.rows.iter().map(CvRow::cells).collect();
    print_table(&CvRow::HEADER, &rows);
    write_table(&a.common.out, "cv", &CvRow::HEADER, &rows)?;
    finish(&a.common, "cv", &config, &report)
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let mut config = base_config("bench", &a.common);
    let cfg = BenchConfig {
        ns: a.ns,
        ms: a.ms,
        repetitions: a.repetitions,
        dim: a.dim,
        kernel: a.kernel.parse()?,
        seed: a.common.seed,
        ..BenchConfig::default()
    };
    config.kernel = cfg.kernel.to_string();
    config.repetitions = cfg.repetitions;
    config.notes.push("one warm-up run per (n, m, method) excluded".into());
    let report = bench(&cfg)?;
    let rows: Vec<Vec<String>> = report.rows.iter().map(BenchRow::cells).collect();
    print_table(&BenchRow::HEADER, &rows);
    for f in &report.fits {
        println!(
            "m={} {}: slope {:.3e} s/instance, doubling ratios {:?}",
            f.m, f.method, f.slope, f.doubling_ratios
        );
    }
    write_table(&a.common.out, "bench", &BenchRow::HEADER, &rows)?;
    finish(&a.common, "bench", &config, &report)
}

fn flops(a: FlopsArgs) -> Result<()> {
    let config = base_config("flops", &a.common);
    let table = flops_table(&a.ns, &a.ms);
    let rows: Vec<Vec<String>> = table.iter().map(FlopsRow::cells).collect();
    print_table(&FlopsRow::HEADER, &rows);
    write_table(&a.common.out, "flops", &FlopsRow::HEADER, &rows)?;
    finish(&a.common, "flops", &config, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flops_command_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cli = Cli::try_parse_from([
            "krein",
            "flops",
            "--ns",
            "1000000",
            "--ms",
            "1000",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        execute(cli.command).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("flops.csv")).unwrap();
        assert!(csv.contains("3003000000000,7002000000000"));
    }

    #[test]
    fn config_errors_map_to_exit_code_two() {
        let cli = Cli::try_parse_from(["krein", "approx", "--synthetic", "two-gaussians", "--ranks", "10:5:x2"]).unwrap();
        assert_eq!(execute(cli.command).unwrap_err().exit_code(), 2);
        let cli = Cli::try_parse_from(["krein", "approx", "--synthetic", "nope"]).unwrap();
        assert_eq!(execute(cli.command).unwrap_err().exit_code(), 2);
        assert!(Cli::try_parse_from(["krein", "approx", "--matrix", "a", "--data", "b"]).is_err());
    }
}
