use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{stream_id, KernelData};
use crate::data::{misclassification, stratified_kfold, EvalResult, PhaseTimings};
use crate::error::{Error, Result, Warning};
use crate::landmarks::{fit_landmarks, Sampler};
use crate::learners::{
    build_feature_map, flip_shsvm_baseline, krein_krr_lowrank, sf_lsm_baseline, sh_svm_lowrank, vc_lsm_lowrank,
    FeatureMap, LowRankModel, RegPair,
};
use crate::Rng;

/// What gets evaluated in each fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvTask {
    KreinLsm,
    KreinVcLsm,
    KreinShSvm,
    FlipShSvm,
    /// Ridge regression on the rows of the training-set kernel.
    SfLsm,
    /// Majority class of the training fold.
    Constant,
}

impl CvTask {
    pub const ALL: [CvTask; 6] = [
        CvTask::KreinLsm,
        CvTask::KreinVcLsm,
        CvTask::KreinShSvm,
        CvTask::FlipShSvm,
        CvTask::SfLsm,
        CvTask::Constant,
    ];

    fn low_rank(self) -> bool {
        !matches!(self, CvTask::SfLsm | CvTask::Constant)
    }
}

impl std::str::FromStr for CvTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krein-lsm" | "lsm" => Ok(CvTask::KreinLsm),
            "krein-vc-lsm" | "vc-lsm" => Ok(CvTask::KreinVcLsm),
            "krein-sh-svm" | "sh-svm" => Ok(CvTask::KreinShSvm),
            "flip-sh-svm" => Ok(CvTask::FlipShSvm),
            "sf-lsm" => Ok(CvTask::SfLsm),
            "constant" => Ok(CvTask::Constant),
            other => Err(Error::Config(format!("unknown learner {other:?}"))),
        }
    }
}

impl std::fmt::Display for CvTask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CvTask::KreinLsm => "krein-lsm",
            CvTask::KreinVcLsm => "krein-vc-lsm",
            CvTask::KreinShSvm => "krein-sh-svm",
            CvTask::FlipShSvm => "flip-sh-svm",
            CvTask::SfLsm => "sf-lsm",
            CvTask::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    /// Folds of the inner split used for hyperparameter selection.
    pub inner_folds: usize,
    /// Landmark counts; each low-rank learner is evaluated at every one.
    pub landmarks: Vec<usize>,
    pub sampler: Sampler,
    pub tasks: Vec<CvTask>,
    /// Candidate values for `λ₊` and `λ₋`.
    pub lambda_grid: Vec<f64>,
    /// Radii are these multiples of `√n · std(y)`.
    pub radius_factors: Vec<f64>,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            inner_folds: 3,
            landmarks: vec![50],
            sampler: Sampler::Uniform,
            tasks: vec![CvTask::KreinLsm, CvTask::KreinVcLsm, CvTask::KreinShSvm, CvTask::SfLsm, CvTask::Constant],
            lambda_grid: (-4..=2).map(|e| 10f64.powi(e)).collect(),
            radius_factors: vec![0.5, 1.0, 2.0],
            seed: 0,
        }
    }
}

impl CvConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.folds < 2 || self.inner_folds < 2 {
            return Err(Error::Config("need at least 2 outer and 2 inner folds".into()));
        }
        if self.tasks.is_empty() {
            return Err(Error::Config("no learners selected".into()));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("regularization grid must be non-empty and positive".into()));
        }
        if self.radius_factors.is_empty() || self.radius_factors.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::Config("radius factors must be non-empty and positive".into()));
        }
        let smallest_train = n - n.div_ceil(self.folds);
        if self.tasks.iter().any(|t| t.low_rank()) {
            if self.landmarks.is_empty() {
                return Err(Error::Config("no landmark counts given".into()));
            }
            if let Some(&m) = self.landmarks.iter().find(|&&m| m == 0 || m > smallest_train) {
                return Err(Error::Config(format!(
                    "{m} landmarks requested but training folds hold {smallest_train} instances"
                )));
            }
        }
        Ok(())
    }
}

/// Hyperparameters picked by the inner split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvParams {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub task: CvTask,
    /// Landmark count; `None` for the rows that do not use landmarks.
    pub landmarks: Option<usize>,
    pub result: EvalResult,
    pub chosen: Vec<Option<CvParams>>,
}

impl CvRow {
    pub const HEADER: [&'static str; 6] = ["learner", "m", "mean_error", "std_error", "median_error", "folds"];

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.task.to_string(),
            self.landmarks.map_or_else(|| "-".to_string(), |m| m.to_string()),
            format!("{:.6}", self.result.mean),
            format!("{:.6}", self.result.std),
            format!("{:.6}", self.result.median),
            self.result.fold_errors.len().to_string(),
        ]
    }

    /// `mean (std)` as a percentage.
    pub fn summary(&self) -> String {
        format!("{:.2} ({:.2})", 100.0 * self.result.mean, 100.0 * self.result.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub rows: Vec<CvRow>,
    pub warnings: Vec<Warning>,
}

impl CvReport {
    pub fn row(&self, task: CvTask, landmarks: Option<usize>) -> Option<&CvRow> {
        self.rows.iter().find(|r| r.task == task && r.landmarks == landmarks)
    }
}

struct Outcome {
    error: f64,
    params: Option<CvParams>,
    timings: PhaseTimings,
}

/// Stratified `k`-fold evaluation. Landmarks, features and hyperparameters
/// are all chosen from the training part of each fold.
pub fn cv_evaluate(kernel: &KernelData, y: &DVector<f64>, config: &CvConfig) -> Result<CvReport> {
    let n = kernel.len();
    if y.len() != n {
        return Err(Error::shape(format!("{} labels for {n} instances", y.len())));
    }
    config.validate(n)?;
    let plan = stratified_kfold(y.as_slice(), config.folds, &mut Rng::new(config.seed))?;

    // (task, landmarks) in output order
    let mut slots: Vec<(CvTask, Option<usize>)> = Vec::new();
    for &m in &config.landmarks {
        for &t in config.tasks.iter().filter(|t| t.low_rank()) {
            slots.push((t, Some(m)));
        }
    }
    for &t in config.tasks.iter().filter(|t| !t.low_rank()) {
        slots.push((t, None));
    }

    let base = Rng::new(config.seed);
    let per_fold: Vec<Result<(Vec<Outcome>, Vec<Warning>)>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let train = kernel.restrict(&fold.train);
            let y_train = DVector::from_iterator(fold.train.len(), fold.train.iter().map(|&i| y[i]));
            let y_test = DVector::from_iterator(fold.test.len(), fold.test.iter().map(|&i| y[i]));
            let mut rng = base.derive(stream_id(&[1, f as u64]));
            let inner = stratified_kfold(y_train.as_slice(), config.inner_folds, &mut rng)?;
            let mut outcomes = Vec::with_capacity(slots.len());
            let mut warnings = Vec::new();
            let mut maps: Vec<(usize, FeatureMap, DMatrix<f64>, f64)> = Vec::new();
            for &(task, m) in &slots {
                let outcome = match m {
                    Some(m) => {
                        if !maps.iter().any(|(mm, ..)| *mm == m) {
                            let start = Instant::now();
                            let mut lrng = base.derive(stream_id(&[2, f as u64, m as u64]));
                            let sel = config.sampler.select(train.source(), m, None, &mut lrng)?;
                            warnings.extend(sel.warnings);
                            let cols: Vec<usize> = sel.landmarks.indices.iter().map(|&j| fold.train[j]).collect();
                            let (factor, k_xz) = fit_landmarks(train.source(), sel.landmarks, None)?;
                            warnings.extend(factor.warnings.iter().cloned());
                            let map = build_feature_map(&factor, &k_xz)?;
                            let k_qz = kernel.block(&fold.test, &cols)?;
                            maps.push((m, map, k_qz, start.elapsed().as_secs_f64()));
                        }
                        let (_, map, k_qz, landmark_secs) = maps.iter().find(|(mm, ..)| *mm == m).unwrap();
                        let start = Instant::now();
                        let params = tune(task, map, &y_train, &inner.folds, config)?;
                        let model = fit_low_rank(task, map, &y_train, params)?;
                        let fit_seconds = start.elapsed().as_secs_f64();
                        let start = Instant::now();
                        let preds = model.predict_batch(k_qz)?;
                        Outcome {
                            error: misclassification(&preds, &y_test)?,
                            params: Some(params),
                            timings: PhaseTimings {
                                landmarks_seconds: *landmark_secs,
                                fit_seconds,
                                predict_seconds: start.elapsed().as_secs_f64(),
                            },
                        }
                    }
                    None if task == CvTask::SfLsm => {
                        let start = Instant::now();
                        let features = train.full()?.into_inner();
                        let (lambda, _) = best(config.lambda_grid.iter().copied(), |lambda| {
                            inner_error(&inner.folds, &y_train, |tr, te| {
                                let f_tr = features.select_rows(tr);
                                let m = sf_lsm_baseline(&f_tr, &select(&y_train, tr), lambda)?;
                                m.predict_batch(&features.select_rows(te))
                            })
                        })?;
                        let model = sf_lsm_baseline(&features, &y_train, lambda)?;
                        let fit_seconds = start.elapsed().as_secs_f64();
                        let start = Instant::now();
                        let preds = model.predict_batch(&kernel.block(&fold.test, &fold.train)?)?;
                        Outcome {
                            error: misclassification(&preds, &y_test)?,
                            params: Some(CvParams {
                                lambda_plus: lambda,
                                lambda_minus: lambda,
                                radius: None,
                            }),
                            timings: PhaseTimings {
                                landmarks_seconds: 0.0,
                                fit_seconds,
                                predict_seconds: start.elapsed().as_secs_f64(),
                            },
                        }
                    }
                    None => {
                        let pos = y_train.iter().filter(|&&v| v > 0.0).count();
                        let label = if 2 * pos >= y_train.len() { 1.0 } else { -1.0 };
                        let preds = DVector::from_element(y_test.len(), label);
                        Outcome {
                            error: misclassification(&preds, &y_test)?,
                            params: None,
                            timings: PhaseTimings::default(),
                        }
                    }
                };
                outcomes.push(outcome);
            }
            Ok((outcomes, warnings))
        })
        .collect();

    let mut folds = Vec::with_capacity(per_fold.len());
    let mut warnings = Vec::new();
    for r in per_fold {
        let (o, w) = r?;
        folds.push(o);
        warnings.extend(w);
    }
    warnings.dedup();
    let mut rows = Vec::with_capacity(slots.len());
    for (s, &(task, landmarks)) in slots.iter().enumerate() {
        let errors = folds.iter().map(|f| f[s].error).collect();
        let timings = folds.iter().map(|f| f[s].timings.clone()).collect();
        rows.push(CvRow {
            task,
            landmarks,
            result: EvalResult::from_folds(errors, timings)?,
            chosen: folds.iter().map(|f| f[s].params).collect(),
        });
    }
    Ok(CvReport { rows, warnings })
}

fn select(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Mean validation error over the inner folds; failed fits count as 1.
fn inner_error<F>(folds: &[crate::data::Fold], y: &DVector<f64>, mut fit_predict: F) -> f64
where
    F: FnMut(&[usize], &[usize]) -> Result<DVector<f64>>,
{
    let total: f64 = folds
        .iter()
        .map(|fold| {
            fit_predict(&fold.train, &fold.test)
                .and_then(|p| misclassification(&p, &select(y, &fold.test)))
                .unwrap_or(1.0)
        })
        .sum();
    total / folds.len() as f64
}

/// First candidate with the smallest score.
fn best<T: Copy, I: Iterator<Item = T>>(candidates: I, mut score: impl FnMut(T) -> f64) -> Result<(T, f64)> {
    let mut out: Option<(T, f64)> = None;
    for c in candidates {
        let s = score(c);
        if out.map_or(true, |(_, b)| s < b) {
            out = Some((c, s));
        }
    }
    out.ok_or_else(|| Error::Config("empty hyperparameter grid".into()))
}

fn candidates(task: CvTask, map: &FeatureMap, y: &DVector<f64>, config: &CvConfig) -> Vec<CvParams> {
    let grid = &config.lambda_grid;
    let mut out = Vec::new();
    match task {
        CvTask::FlipShSvm | CvTask::SfLsm => {
            for &l in grid {
                out.push(CvParams {
                    lambda_plus: l,
                    lambda_minus: l,
                    radius: None,
                });
            }
        }
        _ => {
            let n = map.len() as f64;
            let mean = y.mean();
            let std = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
            let radii: Vec<Option<f64>> = if task == CvTask::KreinVcLsm {
                config.radius_factors.iter().map(|f| Some(f * n.sqrt() * std)).collect()
            } else {
                vec![None]
            };
            for &lp in grid {
                for &lm in grid {
                    for &radius in &radii {
                        out.push(CvParams {
                            lambda_plus: lp,
                            lambda_minus: lm,
                            radius,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Grid search on the inner folds. The feature map of the outer training
/// part is reused, so inner fits see rows of the same `Φ`.
fn tune(
    task: CvTask,
    map: &FeatureMap,
    y: &DVector<f64>,
    inner: &[crate::data::Fold],
    config: &CvConfig,
) -> Result<CvParams> {
    let found = best(candidates(task, map, y, config).into_iter(), |params| {
        inner_error(inner, y, |tr, te| {
            let sub = FeatureMap {
                phi: map.phi.select_rows(tr),
                signs: map.signs.clone(),
                factor: map.factor.clone(),
                column_means: None,
            };
            let model = fit_low_rank(task, &sub, &select(y, tr), params)?;
            Ok(predict_rows(&model, &map.phi.select_rows(te)))
        })
    })?;
    Ok(found.0)
}

fn predict_rows(model: &LowRankModel, phi: &DMatrix<f64>) -> DVector<f64> {
    let mut phi = phi.clone();
    if let Some(means) = &model.column_means {
        for (j, mut col) in phi.column_iter_mut().enumerate() {
            col.add_scalar_mut(-means[j]);
        }
    }
    let mut out = phi * &model.z;
    out.add_scalar_mut(model.offset);
    out
}

fn fit_low_rank(task: CvTask, map: &FeatureMap, y: &DVector<f64>, p: CvParams) -> Result<LowRankModel> {
    let reg = RegPair::new(p.lambda_plus, p.lambda_minus)?;
    match task {
        CvTask::KreinLsm => krein_krr_lowrank(map, y, reg),
        CvTask::KreinVcLsm => {
            // centered features and targets, the mean comes back as an offset
            let centered = map.centered();
            let mean = y.mean();
            let yc = y.add_scalar(-mean);
            let radius = p.radius.ok_or_else(|| Error::Config("missing radius".into()))?;
            let mut model = vc_lsm_lowrank(&centered, &yc, reg, radius)?;
            model.offset = mean;
            Ok(model)
        }
        CvTask::KreinShSvm => sh_svm_lowrank(map, y, reg),
        CvTask::FlipShSvm => flip_shsvm_baseline(map, y, p.lambda_plus),
        CvTask::SfLsm | CvTask::Constant => unreachable!("not a low-rank learner"),
    }
}
