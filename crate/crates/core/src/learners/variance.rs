//! Variance-constrained Kreĭn least squares.
//!
//! With the fitted values confined to `‖Φz‖ = r`, the squared loss reduces
//! to `- 2yᵀΦz` plus constants. Substituting `Φ = AΔBᵀ` and `γ = ΔBᵀz`
//! turns the problem into `min γᵀWγ - 2bᵀγ` on the sphere `‖γ‖ = r` with
//! `W = n Δ⁻¹BᵀΛ±BΔ⁻¹` and `b = Aᵀy`, which is solved globally.

use nalgebra::{DMatrix, DVector};

use super::{check_targets, nonzero_part, Diagnostics, FeatureMap, FullRankModel, Learner, LowRankModel, RegPair};
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, SignedEigenSystem, SphereQp, SymMatrix};

/// Singular values of `Φ` below this fraction of the largest count as zero.
const RANK_RTOL: f64 = 1e-10;

pub fn vc_lsm_lowrank(map: &FeatureMap, y: &DVector<f64>, reg: RegPair, radius: f64) -> Result<LowRankModel> {
    let n = map.len();
    check_targets(y, n)?;
    if map.rank() == 0 {
        return Err(Error::RankDeficient { smallest: 0.0 });
    }
    let svd = thin_svd(&map.phi)?;
    let largest = svd.sigma[0];
    let smallest = svd.sigma[svd.sigma.len() - 1];
    if !(largest > 0.0) || smallest <= RANK_RTOL * largest {
        return Err(Error::RankDeficient { smallest });
    }
    // C = BΔ⁻¹, so z = Cγ
    let mut c = svd.b.clone();
    for (j, s) in svd.sigma.iter().enumerate() {
        c.column_mut(j).scale_mut(1.0 / s);
    }
    let reg_diag = reg.scaled_diagonal(&map.signs, n);
    let mut lc = c.clone();
    for (i, r) in reg_diag.iter().enumerate() {
        lc.row_mut(i).scale_mut(*r);
    }
    let w = SymMatrix::symmetrize(c.transpose() * lc);
    let b = svd.a.transpose() * y;
    let sol = SphereQp::new(w, b, radius)?.solve()?;
    let z = c * &sol.gamma;
    let mut model = LowRankModel::from_map(
        map,
        Learner::KreinVcLsm,
        reg,
        z,
        Diagnostics {
            iterations: sol.iterations,
            objective: sol.objective,
            gradient_norm: None,
            multiplier: Some(sol.multiplier),
            hard_case: sol.hard_case,
        },
    );
    model.radius = Some(radius);
    Ok(model)
}

/// `n zᵀΛ±z - 2yᵀΦz`, the objective minimized on `‖Φz‖ = r`.
pub fn vc_lsm_objective(map: &FeatureMap, y: &DVector<f64>, reg: RegPair, z: &DVector<f64>) -> f64 {
    let diag = reg.scaled_diagonal(&map.signs, map.len());
    let penalty: f64 = z.iter().zip(&diag).map(|(a, r)| r * a * a).sum();
    penalty - 2.0 * y.dot(&(&map.phi * z))
}

/// Full-rank counterpart: `Kα = Uγ` over the nonzero eigenpairs of `K`,
/// with `W = diag(nΛᵢ / |dᵢ|)` and `b = Uᵀy`.
pub fn vc_lsm_full(eig: &SignedEigenSystem, y: &DVector<f64>, reg: RegPair, radius: f64) -> Result<FullRankModel> {
    let n = eig.order();
    check_targets(y, n)?;
    let (u, d, s) = nonzero_part(eig);
    if d.is_empty() {
        return Err(Error::DegenerateSpectrum);
    }
    let w: Vec<f64> = d
        .iter()
        .zip(&s)
        .map(|(di, &si)| n as f64 * reg.for_sign(si) / di)
        .collect();
    let b = u.transpose() * y;
    let sol = SphereQp::new(SymMatrix::from_diagonal(&w), b, radius)?.solve()?;
    let coef = DVector::from_iterator(d.len(), sol.gamma.iter().zip(d.iter().zip(&s)).map(|(g, (di, &si))| f64::from(si) * g / di));
    let alpha: DVector<f64> = &u * coef;
    Ok(FullRankModel {
        learner: Learner::KreinVcLsm,
        alpha,
        eig: eig.clone(),
        reg,
        radius: Some(radius),
        diagnostics: Diagnostics {
            iterations: sol.iterations,
            objective: sol.objective,
            gradient_norm: None,
            multiplier: Some(sol.multiplier),
            hard_case: sol.hard_case,
        },
    })
}

/// Random `z` with `‖Φz‖ = r`, for optimality checks.
pub fn feasible_point(map: &FeatureMap, radius: f64, rng: &mut crate::Rng) -> Result<DVector<f64>> {
    let svd = thin_svd(&map.phi)?;
    let mut g = DVector::from_fn(svd.sigma.len(), |_, _| rng.normal());
    g *= radius / g.norm();
    let mut c: DMatrix<f64> = svd.b.clone();
    for (j, s) in svd.sigma.iter().enumerate() {
        c.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(c * g)
}
