//! Reference learners: ridge regression and squared-hinge SVM on the
//! flip-spectrum matrix, and linear ridge regression with similarities
//! used as features.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::hinge::{check_labels, SquaredHinge};
use super::ridge::solve_spd;
use super::{check_targets, FeatureMap, Learner, LowRankModel, RegPair};
use crate::error::{Error, Result};
use crate::linalg::SignedEigenSystem;

/// Kernel ridge regression on `H = U|D|Uᵀ` with the out-of-sample rule
/// `f(x) = k_xᵀ P α_H`.
#[derive(Debug, Clone)]
pub struct FlipKrrModel {
    /// `(H + nλI)⁻¹ y`.
    pub alpha_h: DVector<f64>,
    /// `P α_H`, the coefficients applied to raw kernel rows.
    pub beta: DVector<f64>,
    /// `H α_H`.
    pub training_predictions: DVector<f64>,
}

impl FlipKrrModel {
    pub fn predict(&self, k_x: &DVector<f64>) -> Result<f64> {
        if k_x.len() != self.beta.len() {
            return Err(Error::shape("k_x does not match the training set"));
        }
        Ok(k_x.dot(&self.beta))
    }
}

pub fn flip_krr_baseline(eig: &SignedEigenSystem, y: &DVector<f64>, lambda: f64) -> Result<FlipKrrModel> {
    let n = eig.order();
    check_targets(y, n)?;
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let h = eig.flip_spectrum().into_inner();
    let p = eig.flip_projector().into_inner();
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] += n as f64 * lambda;
    }
    let alpha_h = solve_spd(a, y)?;
    Ok(FlipKrrModel {
        beta: p * &alpha_h,
        training_predictions: h * &alpha_h,
        alpha_h,
    })
}

/// Squared-hinge SVM on `L = ΦS` with `nλ‖w‖²`; stored as `z = Sw` so that
/// predictions use the same formula as the Kreĭn model.
pub fn flip_shsvm_baseline(map: &FeatureMap, y: &DVector<f64>, lambda: f64) -> Result<LowRankModel> {
    let n = map.len();
    check_labels(y, n)?;
    let reg = RegPair::equal(lambda)?;
    let mut l = map.phi.clone();
    for (j, &s) in map.signs.iter().enumerate() {
        l.column_mut(j).scale_mut(f64::from(s));
    }
    let problem = SquaredHinge {
        phi: &l,
        y,
        penalty: vec![n as f64 * lambda; map.rank()],
    };
    let (w, diagnostics) = problem.solve()?;
    let z = DVector::from_iterator(w.len(), w.iter().zip(&map.signs).map(|(wi, &s)| f64::from(s) * wi));
    Ok(LowRankModel::from_map(map, Learner::FlipShSvm, reg, z, diagnostics))
}

/// Linear ridge regression on similarity features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfLsmModel {
    pub weights: DVector<f64>,
    pub lambda: f64,
}

impl SfLsmModel {
    /// Outputs for feature rows `k_qx` (similarities to the training set).
    pub fn predict_batch(&self, k_qx: &DMatrix<f64>) -> Result<DVector<f64>> {
        if k_qx.ncols() != self.weights.len() {
            return Err(Error::shape("feature rows do not match the training set"));
        }
        Ok(k_qx * &self.weights)
    }
}

/// `w = (FᵀF + λI)⁻¹ Fᵀ y`; the penalty is not scaled by `n`.
pub fn sf_lsm_baseline(features: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<SfLsmModel> {
    check_targets(y, features.nrows())?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let mut a = features.transpose() * features;
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let weights = solve_spd(a, &(features.transpose() * y))?;
    Ok(SfLsmModel { weights, lambda })
}
