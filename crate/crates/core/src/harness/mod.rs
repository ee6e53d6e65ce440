//! Experiment drivers behind the `krein` binary.
//!
//! Every command is a pure function of its inputs, its [`RunConfig`] and
//! the seed, apart from wall-clock columns. Parallel work (repetitions,
//! folds) draws from per-task derived random streams and is merged in task
//! order.

mod approx;
mod bench;
pub mod cli;
mod cv;

pub use approx::{approx_sweep, median_rows, ApproxRow};
pub use bench::{bench, flops_table, BenchConfig, BenchReport, BenchRow, FlopsRow, ScalingFit};
pub use cv::{cv_evaluate, CvConfig, CvParams, CvReport, CvRow, CvTask};

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::io::{self, Format};
use crate::data::{binary_labels, double_center_neg, make_synthetic, one_vs_all, SyntheticKind};
use crate::error::{Error, Result, Warning};
use crate::kernels::{gram, gram_cross, standardize, KernelSpec};
use crate::landmarks::{KernelSource, VectorKernel};
use crate::linalg::SymMatrix;

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

/// Rank/landmark budgets: `k` paired with `l = k` or `l = ⌈k ln n⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandmarkFactor {
    One,
    LogN,
}

impl std::str::FromStr for LandmarkFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(LandmarkFactor::One),
            "logn" | "log-n" => Ok(LandmarkFactor::LogN),
            other => Err(Error::Config(format!(
                "landmark factor must be 1 or logn, got {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for LandmarkFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LandmarkFactor::One => "1",
            LandmarkFactor::LogN => "logn",
        })
    }
}

impl LandmarkFactor {
    pub fn landmarks(self, k: usize, n: usize) -> usize {
        match self {
            LandmarkFactor::One => k,
            LandmarkFactor::LogN => ((k as f64 * (n as f64).ln()).ceil() as usize).min(n),
        }
    }
}

/// Parses `a:b:xS` (geometric, factor `S`), `a:b:+S` (arithmetic) or a
/// comma-separated list.
pub fn parse_ranks(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse rank schedule {s:?} (expected a:b:xS or a,b,c)"));
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [a, b, step] => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            let step = step.trim();
            if a == 0 || b < a {
                return Err(bad());
            }
            let mut out = Vec::new();
            if let Some(f) = step.strip_prefix('x') {
                let f: usize = f.parse().map_err(|_| bad())?;
                if f < 2 {
                    return Err(bad());
                }
                let mut k = a;
                while k <= b {
                    out.push(k);
                    k *= f;
                }
            } else if let Some(d) = step.strip_prefix('+') {
                let d: usize = d.parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                out.extend((a..=b).step_by(d));
            } else {
                return Err(bad());
            }
            out
        }
        [single] => single
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

/// `(k, l)` pairs with `k <= l <= n`.
pub fn schedule(ranks: &[usize], factor: LandmarkFactor, n: usize) -> Result<Vec<(usize, usize)>> {
    ranks
        .iter()
        .map(|&k| {
            let l = factor.landmarks(k, n);
            if k > n {
                Err(Error::Config(format!("rank {k} exceeds n = {n}")))
            } else {
                Ok((k, l))
            }
        })
        .collect()
}

/// Kernel access for a problem, either a stored matrix or a kernel over vectors.
#[derive(Debug, Clone)]
pub enum KernelData {
    Precomputed(SymMatrix),
    Vectors { spec: KernelSpec, x: DMatrix<f64> },
}

impl KernelData {
    pub fn len(&self) -> usize {
        match self {
            KernelData::Precomputed(k) => k.order(),
            KernelData::Vectors { x, .. } => x.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The problem restricted to instances `idx`.
    pub fn restrict(&self, idx: &[usize]) -> KernelData {
        match self {
            KernelData::Precomputed(k) => KernelData::Precomputed(k.submatrix(idx)),
            KernelData::Vectors { spec, x } => KernelData::Vectors {
                spec: *spec,
                x: x.select_rows(idx),
            },
        }
    }

    /// `K(rows, cols)`.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Result<DMatrix<f64>> {
        match self {
            KernelData::Precomputed(k) => Ok(k.block(rows, cols)),
            KernelData::Vectors { spec, x } => gram_cross(spec, &x.select_rows(rows), &x.select_rows(cols)),
        }
    }

    pub fn full(&self) -> Result<SymMatrix> {
        match self {
            KernelData::Precomputed(k) => Ok(k.clone()),
            KernelData::Vectors { spec, x } => gram(spec, x),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            KernelData::Precomputed(_) => "kernel=precomputed".into(),
            KernelData::Vectors { spec, .. } => spec.to_string(),
        }
    }
}

impl KernelData {
    pub fn source(&self) -> &dyn KernelSource {
        self
    }
}

impl KernelSource for KernelData {
    fn len(&self) -> usize {
        KernelData::len(self)
    }

    fn cross(&self, idx: &[usize]) -> Result<DMatrix<f64>> {
        match self {
            KernelData::Precomputed(k) => k.cross(idx),
            KernelData::Vectors { spec, x } => VectorKernel { spec, x }.cross(idx),
        }
    }
}

/// Where the instances come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputSpec {
    /// Square similarity matrix.
    Matrix { path: PathBuf },
    /// Square dissimilarity matrix, converted by negative double-centering.
    Dissimilarity { path: PathBuf, square: bool },
    /// Instances as rows, standardized before the kernel is applied.
    Vectors { path: PathBuf, kernel: KernelSpec },
    Synthetic { dataset: SyntheticKind, n: usize, p: usize, seed: u64, kernel: KernelSpec },
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub kernel: KernelData,
    pub labels: Option<DVector<f64>>,
    pub warnings: Vec<Warning>,
    /// Preprocessing steps applied, for the provenance record.
    pub notes: Vec<String>,
}

impl Problem {
    pub fn load(input: &InputSpec, labels: Option<&Path>, target_class: Option<&str>) -> Result<Problem> {
        let mut notes = Vec::new();
        let mut warnings = Vec::new();
        let mut labels_vec = None;
        let kernel = match input {
            InputSpec::Matrix { path } => KernelData::Precomputed(io::load_matrix(path, Format::from_path(path))?),
            InputSpec::Dissimilarity { path, square } => {
                let d = io::load_dissimilarity(path, Format::from_path(path), !square)?;
                notes.push(format!(
                    "negative double-centering ({})",
                    if *square { "entries squared" } else { "entries used as squared distances" }
                ));
                KernelData::Precomputed(double_center_neg(&d))
            }
            InputSpec::Vectors { path, kernel } => {
                kernel.validate()?;
                if *kernel == KernelSpec::Precomputed {
                    return Err(Error::UseLoadMatrixInstead);
                }
                let x = io::load_vectors(path, Format::from_path(path))?;
                let s = standardize(&x)?;
                warnings.extend(s.warnings);
                notes.push("features standardized (population std)".into());
                KernelData::Vectors { spec: *kernel, x: s.data }
            }
            InputSpec::Synthetic { dataset, n, p, seed, kernel } => {
                kernel.validate()?;
                let data = make_synthetic(*dataset, *n, *p, &mut crate::Rng::new(*seed))?;
                let s = standardize(&data.x)?;
                warnings.extend(s.warnings);
                notes.push("features standardized (population std)".into());
                labels_vec = data.y.map(DVector::from_vec);
                KernelData::Vectors { spec: *kernel, x: s.data }
            }
        };
        if let Some(path) = labels {
            let raw = io::load_labels(path)?;
            let y = match target_class {
                Some(t) => one_vs_all(&raw, t)?,
                None => binary_labels(&raw)?,
            };
            labels_vec = Some(y);
        }
        if let Some(y) = &labels_vec {
            if y.len() != kernel.len() {
                return Err(Error::shape(format!(
                    "{} labels for {} instances",
                    y.len(),
                    kernel.len()
                )));
            }
        }
        Ok(Problem {
            kernel,
            labels: labels_vec,
            warnings,
            notes,
        })
    }
}

/// Resolved configuration recorded next to every output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samplers: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub learners: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    pub repetitions: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ResultsFile<'a, T: Serialize> {
    schema_version: u32,
    artifact_version: &'static str,
    config: &'a RunConfig,
    results: &'a T,
}

/// Writes `<out>/<name>.json` with the resolved config and results.
pub fn write_results<T: Serialize>(out: &Path, name: &str, config: &RunConfig, results: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{name}.json"));
    let file = ResultsFile {
        schema_version: RESULTS_SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION"),
        config,
        results,
    };
    std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
    Ok(path)
}

/// Writes `<out>/<name>.csv` from a header and pre-formatted rows.
pub fn write_table(out: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{name}.csv"));
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Stable stream id for a task described by small integers.
pub(crate) fn stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &p| {
        (h ^ p).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_schedules() {
        assert_eq!(parse_ranks("10:320:x2").unwrap(), vec![10, 20, 40, 80, 160, 320]);
        assert_eq!(parse_ranks("10:100:x3").unwrap(), vec![10, 30, 90]);
        assert_eq!(parse_ranks("5:20:+5").unwrap(), vec![5, 10, 15, 20]);
        assert_eq!(parse_ranks("3, 7,9").unwrap(), vec![3, 7, 9]);
        for bad in ["", "0:10:x2", "10:5:x2", "1:10:x1", "1:10:y2", "a,b", "1:2"] {
            assert!(matches!(parse_ranks(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn landmark_budgets() {
        assert_eq!(LandmarkFactor::One.landmarks(10, 500), 10);
        assert_eq!(LandmarkFactor::LogN.landmarks(10, 500), 63);
        assert_eq!(LandmarkFactor::LogN.landmarks(100, 500), 500);
        assert_eq!(schedule(&[10, 20], LandmarkFactor::LogN, 500).unwrap(), vec![(10, 63), (20, 125)]);
        assert!(schedule(&[600], LandmarkFactor::One, 500).is_err());
        assert!("two".parse::<LandmarkFactor>().is_err());
    }

    #[test]
    fn synthetic_problem_loads() {
        let input = InputSpec::Synthetic {
            dataset: SyntheticKind::TwoGaussians,
            n: 40,
            p: 2,
            seed: 1,
            kernel: KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 },
        };
        let p = Problem::load(&input, None, None).unwrap();
        assert_eq!(p.kernel.len(), 40);
        assert_eq!(p.labels.unwrap().len(), 40);
        let sub = p.kernel.restrict(&[0, 5, 7]);
        assert_eq!(sub.full().unwrap(), SymMatrix::new(p.kernel.block(&[0, 5, 7], &[0, 5, 7]).unwrap()).unwrap());
    }

    #[test]
    fn results_file_carries_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            command: "flops".into(),
            seed: 3,
            repetitions: 1,
            ..RunConfig::default()
        };
        let path = write_results(dir.path(), "r", &cfg, &vec![1, 2]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config"]["command"], "flops");
        assert_eq!(v["results"][1], 2);
        assert_ne!(stream_id(&[1, 2]), stream_id(&[2, 1]));
    }
}
