use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Fold>,
}

/// Stratified `k`-fold split. Each class is shuffled and dealt round-robin;
/// the dealing position carries over between classes so fold sizes stay
/// within one of each other.
pub fn stratified_kfold(y: &[f64], k: usize, rng: &mut Rng) -> Result<CvPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid("non-finite label"));
        }
        by_class.entry(v.to_bits() as i64).or_default().push(i);
    }
    let counts: Vec<(String, usize)> = by_class
        .iter()
        .map(|(bits, idx)| (f64::from_bits(*bits as u64).to_string(), idx.len()))
        .collect();
    if counts.iter().any(|(_, c)| *c < k) {
        return Err(Error::Fold { folds: k, counts });
    }
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut next = 0;
    for idx in by_class.values_mut() {
        rng.shuffle(idx);
        for &i in idx.iter() {
            tests[next].push(i);
            next = (next + 1) % k;
        }
    }
    let folds = tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; y.len()];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..y.len()).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect();
    Ok(CvPlan {
        k,
        seed: rng.seed(),
        folds,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub landmarks_seconds: f64,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

/// Per-fold error rates with their summary. `std` is the sample standard
/// deviation (`n - 1` denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub fold_errors: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub timings: Vec<PhaseTimings>,
}

impl EvalResult {
    pub fn from_folds(fold_errors: Vec<f64>, timings: Vec<PhaseTimings>) -> Result<Self> {
        if fold_errors.is_empty() {
            return Err(Error::invalid("no folds evaluated"));
        }
        let (mean, std) = mean_std(&fold_errors);
        Ok(EvalResult {
            median: median(&fold_errors),
            mean,
            std,
            fold_errors,
            timings,
        })
    }
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_classes_give_one_of_each() {
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { -1.0 }).collect();
        let plan = stratified_kfold(&y, 10, &mut Rng::new(1)).unwrap();
        for f in &plan.folds {
            assert_eq!(f.test.len(), 2);
            let pos = f.test.iter().filter(|&&i| y[i] > 0.0).count();
            assert_eq!(pos, 1);
        }
    }

    #[test]
    fn partition_and_stratification_on_random_labels() {
        let mut rng = Rng::new(2);
        for trial in 0..20 {
            let n = 30 + trial * 7;
            let y: Vec<f64> = (0..n).map(|_| if rng.uniform() < 0.3 { 1.0 } else { -1.0 }).collect();
            let k = 2 + trial % 9;
            let Ok(plan) = stratified_kfold(&y, k, &mut rng) else { continue };
            let mut seen = vec![0usize; n];
            for f in &plan.folds {
                assert_eq!(f.train.len() + f.test.len(), n);
                for &i in &f.test {
                    seen[i] += 1;
                }
                for class in [1.0, -1.0] {
                    let total = y.iter().filter(|&&v| v == class).count() as f64;
                    let here = f.test.iter().filter(|&&i| y[i] == class).count() as f64;
                    assert!((here - total / k as f64).abs() <= 1.0);
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn deterministic_and_fold_error() {
        let y: Vec<f64> = (0..40).map(|i| (i % 2) as f64 * 2.0 - 1.0).collect();
        assert_eq!(
            stratified_kfold(&y, 5, &mut Rng::new(3)).unwrap(),
            stratified_kfold(&y, 5, &mut Rng::new(3)).unwrap()
        );
        let few = [1.0, 1.0, -1.0, -1.0, -1.0];
        match stratified_kfold(&few, 3, &mut Rng::new(1)) {
            Err(Error::Fold { folds: 3, counts }) => assert_eq!(counts.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn summary_statistics() {
        let r = EvalResult::from_folds(vec![0.1, 0.3, 0.2, 0.4], Vec::new()).unwrap();
        assert!((r.mean - 0.25).abs() < 1e-15);
        assert!((r.median - 0.25).abs() < 1e-15);
        assert!((r.std - (0.05f64 / 3.0).sqrt()).abs() < 1e-15);
        let again = EvalResult::from_folds(r.fold_errors.clone(), Vec::new()).unwrap();
        assert_eq!(again.mean, r.mean);
        assert_eq!(again.median, r.median);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
