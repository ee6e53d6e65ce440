use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{mean_std, median};
use crate::error::{Error, Result};
use crate::kernels::{gram_cross, KernelSpec};
use crate::linalg::SymMatrix;
use crate::nystroem::{flop_count, EigenMethod, LandmarkSet, NystroemFactor};
use crate::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub methods: Vec<EigenMethod>,
    /// Timed runs per `(n, m, method)`, after one untimed warm-up run.
    pub repetitions: usize,
    /// Dimension of the Gaussian point cloud the kernel is evaluated on.
    pub dim: usize,
    pub kernel: KernelSpec,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ns: vec![2500, 5000, 10_000],
            ms: vec![200],
            methods: vec![EigenMethod::OneShot, EigenMethod::Sgt],
            repetitions: 10,
            dim: 5,
            kernel: KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub method: EigenMethod,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub median_seconds: f64,
    pub flops: u128,
    pub samples: Vec<f64>,
}

impl BenchRow {
    pub const HEADER: [&'static str; 7] =
        ["n", "m", "method", "mean_seconds", "std_seconds", "median_seconds", "flops"];

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.method.to_string(),
            format!("{:.6}", self.mean_seconds),
            format!("{:.6}", self.std_seconds),
            format!("{:.6}", self.median_seconds),
            self.flops.to_string(),
        ]
    }
}

/// Least-squares line `median_seconds ≈ intercept + slope · n` per `(m, method)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub m: usize,
    pub method: EigenMethod,
    pub slope: f64,
    pub intercept: f64,
    /// `t(2n) / t(n)` for every pair of schedule entries where `n` doubles.
    pub doubling_ratios: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub fits: Vec<ScalingFit>,
    pub total_seconds: f64,
}

impl BenchReport {
    pub fn row(&self, n: usize, m: usize, method: EigenMethod) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.n == n && r.m == m && r.method == method)
    }
}

/// Times the eigendecomposition step of both constructions on the same
/// factor and cross-kernel. Kernel evaluation and the landmark block fit are
/// shared by both methods and left out of the timing. Runs are sequential so
/// that timings do not compete for cores.
pub fn bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.repetitions == 0 || config.ns.is_empty() || config.ms.is_empty() || config.methods.is_empty() {
        return Err(Error::Config("bench needs n values, m values, methods and repetitions >= 1".into()));
    }
    config.kernel.validate()?;
    let clock = Instant::now();
    let mut rows = Vec::new();
    for &n in &config.ns {
        let mut rng = Rng::new(config.seed).derive(n as u64);
        let x = DMatrix::from_fn(n, config.dim.max(1), |_, _| rng.normal());
        for &m in &config.ms {
            if m == 0 || m > n {
                return Err(Error::Config(format!("m = {m} must lie in [1, n = {n}]")));
            }
            let k_xz = gram_cross(&config.kernel, &x, &x.rows(0, m).into_owned())?;
            let k_zz = SymMatrix::symmetrize(k_xz.rows(0, m).into_owned());
            let factor = NystroemFactor::fit_with(&k_zz, LandmarkSet::prefix(m), None)?;
            let run = |method: EigenMethod| -> Result<f64> {
                let start = Instant::now();
                let eig = match method {
                    EigenMethod::OneShot => factor.one_shot_eigen(&k_xz)?,
                    EigenMethod::Sgt => factor.sgt_one_shot(&k_xz)?,
                };
                let secs = start.elapsed().as_secs_f64();
                std::hint::black_box(eig);
                Ok(secs)
            };
            for &method in &config.methods {
                run(method)?;
            }
            let mut samples = vec![Vec::with_capacity(config.repetitions); config.methods.len()];
            // interleaved so that drift in machine load hits every method alike
            for _ in 0..config.repetitions {
                for (i, &method) in config.methods.iter().enumerate() {
                    samples[i].push(run(method)?);
                }
            }
            for (i, &method) in config.methods.iter().enumerate() {
                let (mean, std) = mean_std(&samples[i]);
                rows.push(BenchRow {
                    n,
                    m,
                    method,
                    mean_seconds: mean,
                    std_seconds: std,
                    median_seconds: median(&samples[i]),
                    flops: flop_count(method, n as u64, m as u64),
                    samples: samples[i].clone(),
                });
            }
        }
    }
    let fits = scaling_fits(&rows, config);
    Ok(BenchReport {
        rows,
        fits,
        total_seconds: clock.elapsed().as_secs_f64(),
    })
}

fn scaling_fits(rows: &[BenchRow], config: &BenchConfig) -> Vec<ScalingFit> {
    let mut fits = Vec::new();
    for &m in &config.ms {
        for &method in &config.methods {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.m == m && r.method == method)
                .map(|r| (r.n as f64, r.median_seconds))
                .collect();
            let (slope, intercept) = if pts.len() >= 2 {
                let k = pts.len() as f64;
                let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
                let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
                let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
                let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
                let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
                (slope, my - slope * mx)
            } else {
                (f64::NAN, f64::NAN)
            };
            let mut doubling_ratios = Vec::new();
            for &(n, t) in &pts {
                if let Some(&(_, t2)) = pts.iter().find(|p| p.0 == 2.0 * n) {
                    doubling_ratios.push((n as usize, t2 / t));
                }
            }
            fits.push(ScalingFit {
                m,
                method,
                slope,
                intercept,
                doubling_ratios,
            });
        }
    }
    fits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopsRow {
    pub n: u64,
    pub m: u64,
    pub one_shot: u128,
    pub sgt: u128,
    pub saved: u128,
}

impl FlopsRow {
    pub const HEADER: [&'static str; 5] = ["n", "m", "one_shot", "sgt", "saved"];

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.one_shot.to_string(),
            self.sgt.to_string(),
            self.saved.to_string(),
        ]
    }
}

pub fn flops_table(ns: &[u64], ms: &[u64]) -> Vec<FlopsRow> {
    let mut out = Vec::new();
    for &n in ns {
        for &m in ms {
            let one_shot = flop_count(EigenMethod::OneShot, n, m);
            let sgt = flop_count(EigenMethod::Sgt, n, m);
            out.push(FlopsRow {
                n,
                m,
                one_shot,
                sgt,
                saved: sgt.saturating_sub(one_shot),
            });
        }
    }
    out
}
