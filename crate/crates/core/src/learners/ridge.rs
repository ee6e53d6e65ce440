//! Kreĭn least-squares (ridge) regression.

use nalgebra::{DMatrix, DVector};

use super::{check_targets, Diagnostics, FeatureMap, FullRankModel, Learner, LowRankModel, RegPair};
use crate::error::{Error, Result};
use crate::linalg::SignedEigenSystem;

/// `α = (H + nΛ±)⁻¹ P y`, evaluated in the eigenbasis of `K` as
/// `α = U diag(sᵢ / (|dᵢ| + nΛᵢ)) Uᵀ y`.
pub fn krein_krr_full(eig: &SignedEigenSystem, y: &DVector<f64>, reg: RegPair) -> Result<FullRankModel> {
    let n = eig.order();
    if n == 0 {
        return Err(Error::invalid("empty training set"));
    }
    check_targets(y, n)?;
    let u = &eig.vectors;
    let mut c = u.transpose() * y;
    for i in 0..n {
        let s = eig.signs[i];
        let denom = eig.values[i].abs() + n as f64 * reg.for_sign(s);
        c[i] = if s == 0 || denom == 0.0 { 0.0 } else { f64::from(s) * c[i] / denom };
    }
    let alpha = u * c;
    let model = FullRankModel {
        learner: Learner::KreinLsm,
        alpha,
        eig: eig.clone(),
        reg,
        radius: None,
        diagnostics: Diagnostics::default(),
    };
    let objective = full_objective(&model, y);
    Ok(FullRankModel {
        diagnostics: Diagnostics {
            objective,
            ..Diagnostics::default()
        },
        ..model
    })
}

/// `‖y - Kα‖² + n(λ₊ αᵀK₊α + λ₋ αᵀ|K₋|α)`.
fn full_objective(model: &FullRankModel, y: &DVector<f64>) -> f64 {
    let eig = &model.eig;
    let n = eig.order() as f64;
    let c = eig.vectors.transpose() * &model.alpha;
    let fit = (y - model.training_predictions()).norm_squared();
    let penalty: f64 = (0..eig.order())
        .map(|i| n * model.reg.for_sign(eig.signs[i]) * eig.values[i].abs() * c[i] * c[i])
        .sum();
    fit + penalty
}

/// `z = (ΦᵀΦ + nΛ±)⁻¹ Φᵀ y`.
pub fn krein_krr_lowrank(map: &FeatureMap, y: &DVector<f64>, reg: RegPair) -> Result<LowRankModel> {
    let n = map.len();
    check_targets(y, n)?;
    let reg_diag = reg.scaled_diagonal(&map.signs, n);
    let mut a = map.phi.transpose() * &map.phi;
    for (i, r) in reg_diag.iter().enumerate() {
        a[(i, i)] += r;
    }
    let rhs = map.phi.transpose() * y;
    let z = solve_spd(a, &rhs)?;
    let objective = (y - &map.phi * &z).norm_squared()
        + z.iter().zip(&reg_diag).map(|(zi, r)| r * zi * zi).sum::<f64>();
    Ok(LowRankModel::from_map(
        map,
        Learner::KreinLsm,
        reg,
        z,
        Diagnostics {
            objective,
            ..Diagnostics::default()
        },
    ))
}

pub(crate) fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let residual_scale = a.amax();
    match a.cholesky() {
        Some(chol) => Ok(chol.solve(b)),
        None => Err(Error::Solver {
            reason: "normal equations are not positive definite".into(),
            iterations: 0,
            residual: residual_scale,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::linalg::{sym_eigen, SymMatrix};
    use crate::Rng;

    #[test]
    fn identity_kernel() {
        let eig = sym_eigen(&SymMatrix::identity(4));
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let m = krein_krr_full(&eig, &y, RegPair::equal(0.25).unwrap()).unwrap();
        assert!((&m.alpha - &y / 2.0).amax() < 1e-15);
    }

    #[test]
    fn negative_scalar() {
        let eig = sym_eigen(&SymMatrix::from_diagonal(&[-1.0]));
        let y = DVector::from_vec(vec![3.0]);
        let m = krein_krr_full(&eig, &y, RegPair::equal(1.0).unwrap()).unwrap();
        assert!((m.alpha[0] + 1.5).abs() < 1e-15);
    }

    #[test]
    fn full_solves_the_stated_system_and_zeroes_the_gradient() {
        let mut rng = Rng::new(5);
        for trial in 0..20 {
            let n = 5 + trial;
            let k = random_symmetric(n, &mut rng);
            let eig = sym_eigen(&k);
            let y = DVector::from_fn(n, |_, _| rng.normal());
            let reg = RegPair::new(0.01 + rng.uniform(), 0.01 + rng.uniform()).unwrap();
            let m = krein_krr_full(&eig, &y, reg).unwrap();
            let nf = n as f64;
            let h = eig.flip_spectrum();
            let p = eig.flip_projector();
            let lam = eig.spectral_map(|_, s| reg.for_sign(s));
            let lhs = (h.as_matrix() + lam.as_matrix() * nf) * &m.alpha;
            let rhs = p.as_matrix() * &y;
            assert!((lhs - &rhs).norm() <= 1e-7 * (1.0 + rhs.norm()));
            // ∇ = -2K(y - Kα) + 2n(λ₊K₊ + λ₋|K₋|)α
            let kpos = eig.spectral_map(|d, s| if s > 0 { d } else { 0.0 });
            let kneg = eig.spectral_map(|d, s| if s < 0 { -d } else { 0.0 });
            let kmat = k.as_matrix();
            let grad = -2.0 * kmat * (&y - kmat * &m.alpha)
                + 2.0 * nf * (kpos.as_matrix() * reg.plus + kneg.as_matrix() * reg.minus) * &m.alpha;
            assert!(grad.norm() <= 1e-7 * (1.0 + y.norm()) * (1.0 + kmat.norm()), "trial {trial}");
        }
    }

    #[test]
    fn lowrank_closed_forms() {
        let map = map_for(&SymMatrix::identity(3), &all(3));
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let m = krein_krr_lowrank(&map, &y, RegPair::equal(0.5).unwrap()).unwrap();
        let pred = &map.phi * &m.z;
        assert!((pred - &y / 2.5).amax() < 1e-14);

        let map = map_for(&SymMatrix::from_diagonal(&[1.0]), &[0]);
        let m = krein_krr_lowrank(&map, &DVector::from_vec(vec![3.0]), RegPair::equal(0.5).unwrap()).unwrap();
        assert!((m.z[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lowrank_normal_equation_residual() {
        let mut rng = Rng::new(6);
        let k = random_symmetric(40, &mut rng);
        let idx: Vec<usize> = (0..40).step_by(4).collect();
        let map = map_for(&k, &idx);
        let y = DVector::from_fn(40, |_, _| rng.normal());
        let reg = RegPair::new(0.1, 0.3).unwrap();
        let m = krein_krr_lowrank(&map, &y, reg).unwrap();
        let mut a = map.phi.transpose() * &map.phi;
        for (i, &s) in map.signs.iter().enumerate() {
            a[(i, i)] += 40.0 * reg.for_sign(s);
        }
        let rhs = map.phi.transpose() * &y;
        assert!((a * &m.z - &rhs).norm() <= 1e-8 * rhs.norm());
    }

    #[test]
    fn lowrank_matches_full_rank_with_all_landmarks() {
        let mut rng = Rng::new(7);
        for _ in 0..10 {
            let n = 12;
            let k = random_symmetric(n, &mut rng);
            let y = DVector::from_fn(n, |_, _| rng.normal());
            let reg = RegPair::new(0.05, 0.2).unwrap();
            let full = krein_krr_full(&sym_eigen(&k), &y, reg).unwrap();
            let map = map_for(&k, &all(n));
            let low = krein_krr_lowrank(&map, &y, reg).unwrap();
            let a = full.training_predictions();
            let b = &map.phi * &low.z;
            assert!((a - b).amax() <= 1e-6);
        }
    }

    #[test]
    fn label_flip_negates_coefficients() {
        let mut rng = Rng::new(8);
        let k = random_symmetric(20, &mut rng);
        let map = map_for(&k, &[0, 3, 6, 9, 12]);
        let y = DVector::from_fn(20, |_, _| rng.normal());
        let reg = RegPair::new(0.2, 0.4).unwrap();
        let a = krein_krr_lowrank(&map, &y, reg).unwrap();
        let b = krein_krr_lowrank(&map, &-&y, reg).unwrap();
        assert_eq!(a.z, -b.z);
    }

    #[test]
    fn convexity_witness() {
        let mut rng = Rng::new(9);
        let k = random_symmetric(30, &mut rng);
        let map = map_for(&k, &[1, 5, 9, 13, 17, 21]);
        let y = DVector::from_fn(30, |_, _| rng.normal());
        let reg = RegPair::new(0.1, 0.5).unwrap();
        let m = krein_krr_lowrank(&map, &y, reg).unwrap();
        let diag = reg.scaled_diagonal(&map.signs, 30);
        let obj = |z: &DVector<f64>| {
            (&y - &map.phi * z).norm_squared() + z.iter().zip(&diag).map(|(a, r)| r * a * a).sum::<f64>()
        };
        for _ in 0..100 {
            let mut d = DVector::from_fn(m.z.len(), |_, _| rng.normal());
            d *= 1e-2 / d.norm();
            assert!(obj(&m.z) <= obj(&(&m.z + d)));
        }
    }
}
