use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{stream_id, KernelData};
use crate::data::median;
use crate::error::Result;
use crate::landmarks::{fit_landmarks, Sampler};
use crate::linalg::{frobenius_distance, SymMatrix};
use crate::Rng;

/// One repetition, or the median over repetitions when `repetition` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxRow {
    pub sampler: Sampler,
    pub k: usize,
    pub l: usize,
    pub repetition: Option<usize>,
    /// Distinct landmarks after duplicate collapse.
    pub landmarks: usize,
    pub frobenius_error: f64,
    pub relative_error: f64,
    pub seconds: f64,
}

impl ApproxRow {
    pub const HEADER: [&'static str; 8] = [
        "sampler",
        "k",
        "l",
        "repetition",
        "landmarks",
        "frobenius_error",
        "relative_error",
        "seconds",
    ];

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.sampler.to_string(),
            self.k.to_string(),
            self.l.to_string(),
            self.repetition.map_or_else(|| "median".to_string(), |r| r.to_string()),
            self.landmarks.to_string(),
            format!("{:e}", self.frobenius_error),
            format!("{:e}", self.relative_error),
            format!("{:.6}", self.seconds),
        ]
    }
}

/// Rank-`k` one-shot approximations from `l` landmarks, for every sampler,
/// schedule entry and repetition. Timing covers landmark selection, the
/// factorization and the eigendecomposition.
pub fn approx_sweep(
    kernel: &KernelData,
    reference: &SymMatrix,
    samplers: &[Sampler],
    schedule: &[(usize, usize)],
    repetitions: usize,
    seed: u64,
    sketch_size: Option<usize>,
) -> Result<Vec<ApproxRow>> {
    let base = Rng::new(seed);
    let norm = reference.norm();
    let mut tasks = Vec::new();
    for (si, &sampler) in samplers.iter().enumerate() {
        for &(k, l) in schedule {
            for rep in 0..repetitions {
                tasks.push((si, sampler, k, l, rep));
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(si, sampler, k, l, rep)| {
            let mut rng = base.derive(stream_id(&[si as u64, k as u64, l as u64, rep as u64]));
            let start = Instant::now();
            let selection = sampler.select(kernel.source(), l, sketch_size, &mut rng)?;
            let landmarks = selection.landmarks.len();
            let (factor, k_xz) = fit_landmarks(kernel.source(), selection.landmarks, None)?;
            let eig = factor.one_shot_eigen(&k_xz)?.truncate(k);
            let seconds = start.elapsed().as_secs_f64();
            let err = frobenius_distance(&eig.reconstruct(), reference)?;
            Ok(ApproxRow {
                sampler,
                k,
                l,
                repetition: Some(rep),
                landmarks,
                frobenius_error: err,
                relative_error: if norm > 0.0 { err / norm } else { err },
                seconds,
            })
        })
        .collect()
}

/// Median error and time per `(sampler, k, l)`, in first-seen order.
pub fn median_rows(rows: &[ApproxRow]) -> Vec<ApproxRow> {
    let mut keys: Vec<(Sampler, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.sampler, r.k, r.l);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(sampler, k, l)| {
            let group: Vec<&ApproxRow> = rows
                .iter()
                .filter(|r| r.sampler == sampler && r.k == k && r.l == l && r.repetition.is_some())
                .collect();
            let pick = |f: fn(&ApproxRow) -> f64| median(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            ApproxRow {
                sampler,
                k,
                l,
                repetition: None,
                landmarks: group.iter().map(|r| r.landmarks).min().unwrap_or(0),
                frobenius_error: pick(|r| r.frobenius_error),
                relative_error: pick(|r| r.relative_error),
                seconds: pick(|r| r.seconds),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use nalgebra::DMatrix;

    fn fixture(n: usize) -> KernelData {
        let mut rng = Rng::new(1);
        let x = DMatrix::from_fn(n, 3, |_, _| rng.normal());
        KernelData::Vectors {
            spec: KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 },
            x,
        }
    }

    #[test]
    fn full_budget_recovers_the_matrix() {
        let mut rng = Rng::new(2);
        let a = DMatrix::from_fn(30, 30, |_, _| rng.normal());
        let k = SymMatrix::symmetrize(&a + a.transpose());
        let data = KernelData::Precomputed(k.clone());
        let rows = approx_sweep(&data, &k, &[Sampler::Uniform], &[(30, 30)], 3, 7, None).unwrap();
        for r in rows {
            assert!(r.frobenius_error <= 1e-6 * k.norm());
        }
    }

    #[test]
    fn row_counts_and_determinism() {
        let data = fixture(80);
        let k = data.full().unwrap();
        let sched = [(4, 4), (8, 8)];
        let samplers = [Sampler::Uniform, Sampler::KMeansPP];
        let rows = approx_sweep(&data, &k, &samplers, &sched, 10, 3, None).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 10);
        let med = median_rows(&rows);
        assert_eq!(med.len(), 4);
        assert!(med.iter().all(|r| r.repetition.is_none()));
        let again = approx_sweep(&data, &k, &samplers, &sched, 10, 3, None).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.frobenius_error, b.frobenius_error);
        }
        assert_eq!(rows[0].cells().len(), ApproxRow::HEADER.len());
    }
}
