//! Kreĭn-space learners on full kernel matrices and on Nyström features.
//!
//! A low-rank hypothesis is `f(x) = k_xᵀ U |D|^{-1/2} S z` where
//! `U D Uᵀ` is the landmark block's eigensystem and `S = sign(D)`. The
//! training features are `Φ = K_XZ U |D|^{-1/2} S`, so that `Φ S Φᵀ = K̃`
//! and the Kreĭn regularizer splits as `λ₊‖z₊‖² + λ₋‖z₋‖²` over the sign
//! pattern of the columns. Full-rank learners work in the eigenbasis of `K`.

mod baselines;
mod hinge;
mod ridge;
mod variance;

pub use baselines::{flip_krr_baseline, flip_shsvm_baseline, sf_lsm_baseline, FlipKrrModel, SfLsmModel};
pub use hinge::{sh_svm_full, sh_svm_lowrank, SquaredHinge, NEWTON_MAX_ITERATIONS};
pub use ridge::{krein_krr_full, krein_krr_lowrank};
pub use variance::{feasible_point, vc_lsm_full, vc_lsm_lowrank, vc_lsm_objective};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{gram_cross, KernelSpec};
use crate::linalg::SignedEigenSystem;
use crate::nystroem::NystroemFactor;

/// Regularization strengths for the positive and negative components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegPair {
    pub plus: f64,
    pub minus: f64,
}

impl RegPair {
    pub fn new(plus: f64, minus: f64) -> Result<Self> {
        for (name, v) in [("lambda+", plus), ("lambda-", minus)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(RegPair { plus, minus })
    }

    pub fn equal(lambda: f64) -> Result<Self> {
        Self::new(lambda, lambda)
    }

    /// Without validation; zero strengths are useful in tests.
    pub fn unchecked(plus: f64, minus: f64) -> Self {
        RegPair { plus, minus }
    }

    /// Strength for a coordinate with sign `s` (`0` maps to `λ₊`).
    pub fn for_sign(&self, s: i8) -> f64 {
        if s < 0 {
            self.minus
        } else {
            self.plus
        }
    }

    /// `n Λ±` as a diagonal.
    pub(crate) fn scaled_diagonal(&self, signs: &[i8], n: usize) -> Vec<f64> {
        signs.iter().map(|&s| n as f64 * self.for_sign(s)).collect()
    }
}

/// Training features `Φ = K_XZ U |D|^{-1/2} S` with their landmark factor.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    pub phi: DMatrix<f64>,
    pub signs: Vec<i8>,
    pub factor: NystroemFactor,
    /// Training column means, when `Φ` has been centered.
    pub column_means: Option<DVector<f64>>,
}

pub fn build_feature_map(factor: &NystroemFactor, k_xz: &DMatrix<f64>) -> Result<FeatureMap> {
    let projection = projection(factor);
    if k_xz.ncols() != factor.order() {
        return Err(Error::shape(format!(
            "cross-kernel has {} columns, factor has {} landmarks",
            k_xz.ncols(),
            factor.order()
        )));
    }
    Ok(FeatureMap {
        phi: k_xz * projection,
        signs: factor.signs().to_vec(),
        factor: factor.clone(),
        column_means: None,
    })
}

/// `U |D|^{-1/2} S` (`m x r`).
fn projection(factor: &NystroemFactor) -> DMatrix<f64> {
    let mut w = factor.whitening();
    for (j, &s) in factor.signs().iter().enumerate() {
        w.column_mut(j).scale_mut(f64::from(s));
    }
    w
}

impl FeatureMap {
    pub fn len(&self) -> usize {
        self.phi.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.nrows() == 0
    }

    pub fn rank(&self) -> usize {
        self.phi.ncols()
    }

    /// `Φ S Φᵀ`, which equals the Nyström approximation `K̃`.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut ps = self.phi.clone();
        for (j, &s) in self.signs.iter().enumerate() {
            ps.column_mut(j).scale_mut(f64::from(s));
        }
        ps * self.phi.transpose()
    }

    /// Subtracts column means from `Φ` (equivalently, centers `K̃`).
    pub fn centered(&self) -> FeatureMap {
        let n = self.phi.nrows().max(1) as f64;
        let means = DVector::from_iterator(self.rank(), self.phi.column_iter().map(|c| c.sum() / n));
        let mut phi = self.phi.clone();
        for (j, mut col) in phi.column_iter_mut().enumerate() {
            col.add_scalar_mut(-means[j]);
        }
        let column_means = match &self.column_means {
            Some(prev) => prev + &means,
            None => means,
        };
        FeatureMap {
            phi,
            signs: self.signs.clone(),
            factor: self.factor.clone(),
            column_means: Some(column_means),
        }
    }

    /// Rows of `Φ` for new points given their landmark kernel rows (`q x m`).
    pub fn features(&self, k_qz: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        features(&self.factor, self.column_means.as_ref(), k_qz)
    }
}

fn features(
    factor: &NystroemFactor,
    column_means: Option<&DVector<f64>>,
    k_qz: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if k_qz.ncols() != factor.order() {
        return Err(Error::shape(format!(
            "kernel rows have {} entries, model has {} landmarks",
            k_qz.ncols(),
            factor.order()
        )));
    }
    let mut phi = k_qz * projection(factor);
    if let Some(means) = column_means {
        for (j, mut col) in phi.column_iter_mut().enumerate() {
            col.add_scalar_mut(-means[j]);
        }
    }
    Ok(phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Learner {
    KreinLsm,
    KreinVcLsm,
    KreinShSvm,
    FlipShSvm,
}

impl std::str::FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krein-lsm" | "lsm" => Ok(Learner::KreinLsm),
            "krein-vc-lsm" | "vc-lsm" => Ok(Learner::KreinVcLsm),
            "krein-sh-svm" | "sh-svm" => Ok(Learner::KreinShSvm),
            "flip-sh-svm" => Ok(Learner::FlipShSvm),
            other => Err(Error::Config(format!("unknown learner {other:?}"))),
        }
    }
}

impl std::fmt::Display for Learner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Learner::KreinLsm => "krein-lsm",
            Learner::KreinVcLsm => "krein-vc-lsm",
            Learner::KreinShSvm => "krein-sh-svm",
            Learner::FlipShSvm => "flip-sh-svm",
        })
    }
}

impl Learner {
    pub fn is_classifier(self) -> bool {
        matches!(self, Learner::KreinShSvm | Learner::FlipShSvm)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Matrix-form objective at the solution.
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_norm: Option<f64>,
    /// Sphere multiplier `ν` (variance-constrained learners).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    #[serde(default)]
    pub hard_case: bool,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained Nyström-feature model, self-contained for prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowRankModel {
    pub format_version: u32,
    pub learner: Learner,
    pub reg: RegPair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Landmark indices and the landmark block's eigensystem.
    pub factor: NystroemFactor,
    pub z: DVector<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_means: Option<DVector<f64>>,
    /// Added to every output (target mean when training on centered data).
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    /// Landmark instances, for evaluating the kernel at new points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmark_rows: Option<DMatrix<f64>>,
    pub diagnostics: Diagnostics,
}

impl LowRankModel {
    pub(crate) fn from_map(
        map: &FeatureMap,
        learner: Learner,
        reg: RegPair,
        z: DVector<f64>,
        diagnostics: Diagnostics,
    ) -> Self {
        LowRankModel {
            format_version: MODEL_FORMAT_VERSION,
            learner,
            reg,
            radius: None,
            factor: map.factor.clone(),
            z,
            column_means: map.column_means.clone(),
            offset: 0.0,
            kernel: None,
            landmark_rows: None,
            diagnostics,
        }
    }

    /// Attaches the kernel and landmark rows so that [`Self::predict_points`] works.
    pub fn with_kernel(mut self, spec: KernelSpec, landmark_rows: DMatrix<f64>) -> Self {
        self.kernel = Some(spec);
        self.landmark_rows = Some(landmark_rows);
        self
    }

    /// `f(x)` from the kernel values `k_x` at the landmarks.
    pub fn predict(&self, k_x: &DVector<f64>) -> Result<f64> {
        let row = DMatrix::from_row_slice(1, k_x.len(), k_x.as_slice());
        Ok(self.predict_batch(&row)?[0])
    }

    /// Outputs for each row of `k_qz` (`q x m`).
    pub fn predict_batch(&self, k_qz: &DMatrix<f64>) -> Result<DVector<f64>> {
        let phi = features(&self.factor, self.column_means.as_ref(), k_qz)?;
        let mut out = phi * &self.z;
        out.add_scalar_mut(self.offset);
        Ok(out)
    }

    pub fn predict_points(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        let (Some(spec), Some(rows)) = (&self.kernel, &self.landmark_rows) else {
            return Err(Error::invalid("model has no kernel attached; pass landmark kernel rows instead"));
        };
        self.predict_batch(&gram_cross(spec, x, rows)?)
    }

    /// Signs of the outputs; `0` stays `0` and counts as an error downstream.
    pub fn classify_batch(&self, k_qz: &DMatrix<f64>) -> Result<Vec<f64>> {
        Ok(self.predict_batch(k_qz)?.iter().map(|&v| sign(v)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: LowRankModel = serde_json::from_str(s)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        if model.z.len() != model.factor.effective_rank {
            return Err(Error::shape("coefficient length does not match the factor rank"));
        }
        Ok(model)
    }
}

pub(crate) fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A hypothesis `f = Σ αᵢ k(xᵢ, ·)` over all training points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullRankModel {
    pub learner: Learner,
    pub alpha: DVector<f64>,
    pub eig: SignedEigenSystem,
    pub reg: RegPair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl FullRankModel {
    /// `K α`.
    pub fn training_predictions(&self) -> DVector<f64> {
        let u = &self.eig.vectors;
        let c = u.transpose() * &self.alpha;
        let dc = c.component_mul(&self.eig.values);
        u * dc
    }

    /// `k_xᵀ α` for kernel values against all training points.
    pub fn predict(&self, k_x: &DVector<f64>) -> Result<f64> {
        if k_x.len() != self.alpha.len() {
            return Err(Error::shape(format!(
                "k_x has length {}, model has {} training points",
                k_x.len(),
                self.alpha.len()
            )));
        }
        Ok(k_x.dot(&self.alpha))
    }

    /// Outputs for each row of `k_qx` (`q x n`).
    pub fn predict_batch(&self, k_qx: &DMatrix<f64>) -> Result<DVector<f64>> {
        if k_qx.ncols() != self.alpha.len() {
            return Err(Error::shape("kernel rows do not match the training set"));
        }
        Ok(k_qx * &self.alpha)
    }
}

/// Eigen-coordinates with nonzero sign: `(U_nz, |d|, s)`.
pub(crate) fn nonzero_part(eig: &SignedEigenSystem) -> (DMatrix<f64>, Vec<f64>, Vec<i8>) {
    let keep: Vec<usize> = (0..eig.order()).filter(|&i| eig.signs[i] != 0).collect();
    let u = eig.vectors.select_columns(&keep);
    let d = keep.iter().map(|&i| eig.values[i].abs()).collect();
    let s = keep.iter().map(|&i| eig.signs[i]).collect();
    (u, d, s)
}

pub(crate) fn check_targets(y: &DVector<f64>, n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::shape(format!("{} targets for {n} instances", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite target"));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::nystroem::LandmarkSet;
    use crate::Rng;

    pub fn random_symmetric(n: usize, rng: &mut Rng) -> SymMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| rng.normal());
        SymMatrix::symmetrize(&a + a.transpose())
    }

    /// Feature map with landmarks `idx` of `k`.
    pub fn map_for(k: &SymMatrix, idx: &[usize]) -> FeatureMap {
        let factor = NystroemFactor::fit_with(&k.submatrix(idx), LandmarkSet::new(idx.to_vec(), k.order()).unwrap(), None).unwrap();
        build_feature_map(&factor, &k.columns(idx)).unwrap()
    }

    pub fn all(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    pub fn labels(n: usize, rng: &mut Rng) -> DVector<f64> {
        let mut y = DVector::from_fn(n, |_, _| if rng.uniform() < 0.5 { 1.0 } else { -1.0 });
        y[0] = 1.0;
        if n > 1 {
            y[1] = -1.0;
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::linalg::{frobenius_distance, SymMatrix};
    use crate::Rng;

    #[test]
    fn feature_map_reproduces_the_approximation() {
        let mut rng = Rng::new(1);
        let k = random_symmetric(25, &mut rng);
        let idx = [0, 5, 9, 14, 20, 24];
        let map = map_for(&k, &idx);
        let approx = map.factor.approximate(&k.columns(&idx)).unwrap();
        assert!(frobenius_distance(&map.gram(), &approx).unwrap() <= 1e-7 * approx.norm());
        assert_eq!(map.rank(), map.factor.effective_rank);
    }

    #[test]
    fn feature_map_on_diagonal() {
        let k = SymMatrix::from_diagonal(&[2.0, -3.0]);
        let map = map_for(&k, &[0, 1]);
        // columns ordered by |d|: (-3, 2); L has -√3 in its first column and S flips it
        let want = DMatrix::from_row_slice(2, 2, &[0.0, 2f64.sqrt(), 3f64.sqrt(), 0.0]);
        assert!((&map.phi - want).amax() < 1e-14);
        assert_eq!(map.signs, vec![-1, 1]);
        assert!(frobenius_distance(&map.gram(), &k).unwrap() < 1e-14);
    }

    #[test]
    fn psd_block_gives_positive_signs() {
        let mut rng = Rng::new(2);
        let a = DMatrix::from_fn(12, 12, |_, _| rng.normal());
        let k = SymMatrix::symmetrize(&a * a.transpose());
        let map = map_for(&k, &[1, 3, 5, 7]);
        assert!(map.signs.iter().all(|&s| s == 1));
        let ppt = &map.phi * map.phi.transpose();
        assert!(frobenius_distance(&ppt, &map.gram()).unwrap() < 1e-12);
    }

    #[test]
    fn truncated_factor_drops_columns() {
        let k = SymMatrix::from_diagonal(&[1.0, 1e-13, -2.0]);
        let map = map_for(&k, &[0, 1, 2]);
        assert_eq!(map.rank(), 2);
    }

    #[test]
    fn centering_zeroes_column_means() {
        let mut rng = Rng::new(3);
        let k = random_symmetric(15, &mut rng);
        let idx = [2, 4, 6, 8];
        let map = map_for(&k, &idx);
        let centered = map.centered();
        for c in centered.phi.column_iter() {
            assert!(c.sum().abs() < 1e-10);
        }
        // new-point features use the training means
        let f = centered.features(&k.columns(&idx)).unwrap();
        assert!((f - &centered.phi).amax() < 1e-12);
    }

    #[test]
    fn prediction_examples() {
        let mut rng = Rng::new(4);
        let k = random_symmetric(20, &mut rng);
        let idx = [0, 4, 8, 12, 16];
        let map = map_for(&k, &idx);
        let y = DVector::from_fn(20, |_, _| rng.normal());
        let model = krein_krr_lowrank(&map, &y, RegPair::new(0.1, 0.2).unwrap()).unwrap();
        assert_eq!(model.predict(&DVector::zeros(5)).unwrap(), 0.0);
        let in_sample = &map.phi * &model.z;
        let k_xz = k.columns(&idx);
        let batch = model.predict_batch(&k_xz).unwrap();
        assert!((batch - &in_sample).amax() <= 1e-12);
        for i in 0..20 {
            let p = model.predict(&k_xz.row(i).transpose()).unwrap();
            assert!((p - in_sample[i]).abs() <= 1e-12);
        }
        assert!(matches!(model.predict(&DVector::zeros(4)), Err(Error::Shape(_))));
    }

    #[test]
    fn model_json_round_trip_is_exact() {
        let mut rng = Rng::new(5);
        let x = DMatrix::from_fn(30, 2, |_, _| rng.normal());
        let spec = KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 };
        let k = crate::kernels::gram(&spec, &x).unwrap();
        let idx = [1, 7, 11, 19, 23, 29];
        let map = map_for(&k, &idx).centered();
        let y = labels(30, &mut rng);
        let model = sh_svm_lowrank(&map, &y, RegPair::new(0.01, 0.02).unwrap())
            .unwrap()
            .with_kernel(spec, x.select_rows(&idx));
        let json = model.to_json().unwrap();
        let back = LowRankModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        let q = DMatrix::from_fn(8, 2, |_, _| rng.normal());
        assert_eq!(back.predict_points(&q).unwrap(), model.predict_points(&q).unwrap());
        assert!(LowRankModel::from_json(&json.replace("\"format_version\": 1", "\"format_version\": 9")).is_err());
    }

    #[test]
    fn reg_pair_validation() {
        assert!(RegPair::new(0.0, 1.0).is_err());
        assert!(RegPair::new(1.0, f64::NAN).is_err());
        let r = RegPair::new(0.5, 2.0).unwrap();
        assert_eq!(r.for_sign(1), 0.5);
        assert_eq!(r.for_sign(-1), 2.0);
        assert_eq!(r.scaled_diagonal(&[1, -1], 4), vec![2.0, 8.0]);
    }
}
