//! Nyström approximation of indefinite kernel matrices.
//!
//! Given landmarks `Z ⊂ X`, the projection of `k(x, ·)` onto the span of the
//! landmark functionals has coefficients `K_ZZ⁻¹ k_x`, which yields
//! `K̃ = K_XZ K_ZZ⁻¹ K_ZX`. All inversions of `K_ZZ` go through its signed
//! eigensystem `U D Uᵀ` with a spectral cutoff, so near-singular landmark
//! blocks lose rank instead of blowing up.
//!
//! [`NystroemFactor::one_shot_eigen`] turns the factorization
//! `K̃ = L S Lᵀ`, `L = K_XZ U |D|^{-1/2}`, into an eigendecomposition
//! `K̃ = Ũ Λ Ũᵀ` with orthonormal `Ũ` using one thin SVD of `L` and one small
//! symmetric eigenproblem. [`NystroemFactor::sgt_one_shot`] is the older
//! squared-matrix construction kept as a baseline.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::linalg::{product_thin_svd, sym_eigen, SignedEigenSystem, SymMatrix};

/// Default relative inversion cutoff: eigenvalues of `K_ZZ` with
/// `|d| <= 1e-10 * max|d|` are dropped.
pub const PINV_RTOL: f64 = 1e-10;

/// Relative cutoff on the Gram spectra of the squared-matrix baseline.
const SGT_RTOL: f64 = 1e-14;

/// Distinct landmark indices into the instance set, with how often each one
/// was drawn (samplers with replacement collapse duplicates).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandmarkSet {
    pub indices: Vec<usize>,
    pub multiplicity: Vec<usize>,
}

impl LandmarkSet {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidBudget {
                requested: 0,
                available: n,
            });
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::invalid(format!("landmark {i} out of range for n = {n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("landmark {i} listed twice")));
            }
        }
        let multiplicity = vec![1; indices.len()];
        Ok(LandmarkSet {
            indices,
            multiplicity,
        })
    }

    /// `0..m`, for factors fitted directly on a landmark block.
    pub fn prefix(m: usize) -> Self {
        LandmarkSet {
            indices: (0..m).collect(),
            multiplicity: vec![1; m],
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The landmark block's signed eigensystem, truncated at `pinv_tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystroemFactor {
    pub landmarks: LandmarkSet,
    /// Full eigensystem of `K_ZZ`; the first `effective_rank` pairs are retained.
    pub block: SignedEigenSystem,
    pub pinv_tol: f64,
    pub effective_rank: usize,
    pub warnings: Vec<Warning>,
}

impl NystroemFactor {
    /// Fits on a landmark block with the default cutoff `1e-10 * max|D|`.
    pub fn fit(k_zz: &SymMatrix) -> Result<Self> {
        Self::fit_with(k_zz, LandmarkSet::prefix(k_zz.order()), None)
    }

    pub fn fit_with(
        k_zz: &SymMatrix,
        landmarks: LandmarkSet,
        pinv_tol: Option<f64>,
    ) -> Result<Self> {
        let m = k_zz.order();
        if landmarks.len() != m {
            return Err(Error::shape(format!(
                "{} landmarks for a {m}x{m} block",
                landmarks.len()
            )));
        }
        let block = sym_eigen(k_zz);
        let largest = block.values.amax();
        let pinv_tol = pinv_tol.unwrap_or(PINV_RTOL * largest);
        // eigenpairs are sorted by |d| so the retained ones form a prefix
        let effective_rank = block.values.iter().take_while(|d| d.abs() > pinv_tol).count();
        if effective_rank == 0 {
            return Err(Error::SingularLandmarkBlock { cutoff: pinv_tol });
        }
        let mut warnings = Vec::new();
        if effective_rank < m {
            log::warn!("landmark block has effective rank {effective_rank} < {m}");
            warnings.push(Warning::RankDeficient {
                effective_rank,
                order: m,
            });
        }
        Ok(NystroemFactor {
            landmarks,
            block,
            pinv_tol,
            effective_rank,
            warnings,
        })
    }

    /// Number of landmarks `m`.
    pub fn order(&self) -> usize {
        self.block.order()
    }

    /// Retained eigenvectors `U_r` (`m x r`).
    pub fn vectors(&self) -> DMatrix<f64> {
        self.block.vectors.columns(0, self.effective_rank).clone_owned()
    }

    pub fn values(&self) -> &[f64] {
        &self.block.values.as_slice()[..self.effective_rank]
    }

    /// Retained signs, all ±1.
    pub fn signs(&self) -> &[i8] {
        &self.block.signs[..self.effective_rank]
    }

    /// `U_r |D_r|^{-1/2}`, so that `L = K_XZ * whitening()`.
    pub fn whitening(&self) -> DMatrix<f64> {
        let mut w = self.vectors();
        for (j, d) in self.values().iter().enumerate() {
            w.column_mut(j).scale_mut(1.0 / d.abs().sqrt());
        }
        w
    }

    /// `U_r D_r⁻¹ U_rᵀ`.
    pub fn block_pinv(&self) -> DMatrix<f64> {
        let u = self.vectors();
        let mut scaled = u.clone();
        for (j, d) in self.values().iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / d);
        }
        let p = scaled * u.transpose();
        SymMatrix::symmetrize(p).into_inner()
    }

    fn check_cross(&self, k_xz: &DMatrix<f64>) -> Result<()> {
        if k_xz.ncols() != self.order() {
            return Err(Error::shape(format!(
                "cross-kernel has {} columns, factor has {} landmarks",
                k_xz.ncols(),
                self.order()
            )));
        }
        Ok(())
    }

    /// Projection coefficients `α_x = K_ZZ⁻¹ k_x`.
    pub fn project_coeffs(&self, k_x: &DVector<f64>) -> Result<DVector<f64>> {
        if k_x.len() != self.order() {
            return Err(Error::shape(format!(
                "k_x has length {}, factor has {} landmarks",
                k_x.len(),
                self.order()
            )));
        }
        let u = self.vectors();
        let mut c = u.transpose() * k_x;
        for (ci, d) in c.iter_mut().zip(self.values()) {
            *ci /= d;
        }
        Ok(u * c)
    }

    /// `L = K_XZ U_r |D_r|^{-1/2}` (`n x r`).
    pub fn features(&self, k_xz: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_cross(k_xz)?;
        Ok(k_xz * self.whitening())
    }

    /// `K̃ = K_XZ K_ZZ⁻¹ K_ZX = L S Lᵀ`.
    pub fn approximate(&self, k_xz: &DMatrix<f64>) -> Result<SymMatrix> {
        let l = self.features(k_xz)?;
        let mut ls = l.clone();
        for (j, &s) in self.signs().iter().enumerate() {
            ls.column_mut(j).scale_mut(f64::from(s));
        }
        Ok(SymMatrix::symmetrize(ls * l.transpose()))
    }

    /// Out-of-sample row `K_XZ K_ZZ⁻¹ k_x`.
    pub fn extend(&self, k_xz: &DMatrix<f64>, k_x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_cross(k_xz)?;
        let alpha = self.project_coeffs(k_x)?;
        Ok(k_xz * alpha)
    }

    /// Approximate eigendecomposition `K̃ = Ũ Λ Ũᵀ`, `ŨᵀŨ = I`.
    ///
    /// Thin SVD `L = A Σ Bᵀ`, then `M = Σ Bᵀ S B Σ = P Λ Pᵀ` and `Ũ = A P`.
    pub fn one_shot_eigen(&self, k_xz: &DMatrix<f64>) -> Result<OneShotEigen> {
        self.check_cross(k_xz)?;
        let whitening = self.whitening();
        let svd = product_thin_svd(k_xz, Some(&whitening))?;
        let mut t = svd.b.clone();
        for (j, &s) in svd.sigma.iter().enumerate() {
            t.column_mut(j).scale_mut(s);
        }
        let mut st = t.clone();
        for (i, &s) in self.signs().iter().enumerate() {
            st.row_mut(i).scale_mut(f64::from(s));
        }
        let m = SymMatrix::symmetrize(t.transpose() * st);
        let eig = sym_eigen(&m);
        let vectors = svd.left_times(k_xz, &eig.vectors);
        Ok(OneShotEigen {
            vectors,
            values: eig.values,
            warnings: self.warnings.clone(),
        })
    }

    /// The squared-matrix one-shot construction: eigendecompose
    /// `A = K_ZZ⁻¹ K_ZX K_XZ K_ZZ⁻¹ = V Γ Vᵀ`, set `B = K_XZ V Γ^{1/2}`,
    /// eigendecompose `BᵀB = Q Δ Qᵀ`, take `Ũ = B Q Δ^{-1/2}` and read the
    /// eigenvalues off the diagonal of `Ũᵀ K̃ Ũ`.
    pub fn sgt_one_shot(&self, k_xz: &DMatrix<f64>) -> Result<OneShotEigen> {
        self.check_cross(k_xz)?;
        let mut warnings = self.warnings.clone();
        let pinv = self.block_pinv();
        let cross_gram = k_xz.transpose() * k_xz;
        let a = SymMatrix::symmetrize(&pinv * cross_gram * &pinv);
        let gamma = sym_eigen(&a);
        let (v, g) = positive_part(&gamma);
        let mut vg = v;
        for (j, gj) in g.iter().enumerate() {
            vg.column_mut(j).scale_mut(gj.sqrt());
        }
        let b = k_xz * vg;
        let btb = SymMatrix::symmetrize(b.transpose() * &b);
        let delta = sym_eigen(&btb);
        let (q, d) = positive_part(&delta);
        if d.len() < self.effective_rank {
            log::warn!("squared-matrix baseline lost rank: {} of {}", d.len(), self.effective_rank);
            warnings.push(Warning::RankDeficient {
                effective_rank: d.len(),
                order: self.effective_rank,
            });
        }
        let mut qd = q;
        for (j, dj) in d.iter().enumerate() {
            qd.column_mut(j).scale_mut(1.0 / dj.sqrt());
        }
        let u = b * qd;
        let g = u.transpose() * k_xz;
        let d_tilde = &g * pinv * g.transpose();

        let k = d_tilde.nrows();
        let mut order: Vec<usize> = (0..k).collect();
        let diag = d_tilde.diagonal();
        order.sort_by(|&i, &j| {
            diag[j]
                .abs()
                .total_cmp(&diag[i].abs())
                .then_with(|| diag[j].total_cmp(&diag[i]))
        });
        let vectors = u.select_columns(&order);
        let values = DVector::from_iterator(k, order.iter().map(|&i| diag[i]));
        Ok(OneShotEigen {
            vectors,
            values,
            warnings,
        })
    }
}

/// Eigenpairs with value above `SGT_RTOL * max`.
fn positive_part(e: &SignedEigenSystem) -> (DMatrix<f64>, Vec<f64>) {
    let cut = SGT_RTOL * e.values.max().max(0.0);
    let keep: Vec<usize> = (0..e.order()).filter(|&i| e.values[i] > cut).collect();
    let vals = keep.iter().map(|&i| e.values[i]).collect();
    (e.vectors.select_columns(&keep), vals)
}

/// `K̃ ≈ Ũ diag(Λ) Ũᵀ` with `Λ` sorted by magnitude, descending.
#[derive(Debug, Clone)]
pub struct OneShotEigen {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
    pub warnings: Vec<Warning>,
}

impl OneShotEigen {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        SymMatrix::symmetrize(scaled * self.vectors.transpose())
    }

    /// The leading `k` eigenpairs (by magnitude).
    pub fn truncate(&self, k: usize) -> OneShotEigen {
        let k = k.min(self.rank());
        OneShotEigen {
            vectors: self.vectors.columns(0, k).clone_owned(),
            values: self.values.rows(0, k).clone_owned(),
            warnings: self.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    OneShot,
    Sgt,
}

impl std::str::FromStr for EigenMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-shot" | "one_shot" | "oneshot" => Ok(EigenMethod::OneShot),
            "sgt" => Ok(EigenMethod::Sgt),
            other => Err(Error::Config(format!("unknown eigen method {other:?}"))),
        }
    }
}

impl std::fmt::Display for EigenMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EigenMethod::OneShot => "one-shot",
            EigenMethod::Sgt => "sgt",
        })
    }
}

/// Closed-form flop counts: `3m²n + 3m³` for the one-shot construction,
/// `7m²n + 2m³` for the squared-matrix baseline.
pub fn flop_count(method: EigenMethod, n: u64, m: u64) -> u128 {
    let (n, m) = (u128::from(n), u128::from(m));
    match method {
        EigenMethod::OneShot => 3 * m * m * n + 3 * m * m * m,
        EigenMethod::Sgt => 7 * m * m * n + 2 * m * m * m,
    }
}

/// `‖K - K̃‖_F`.
pub fn frobenius_error(k: &SymMatrix, approx: &SymMatrix) -> Result<f64> {
    crate::linalg::frobenius_distance(k, approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_distance, orthonormality_defect};
    use crate::Rng;

    fn random_symmetric(n: usize, rng: &mut Rng) -> SymMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| rng.normal());
        SymMatrix::symmetrize(&a + a.transpose())
    }

    fn sorted_abs(v: &[f64]) -> Vec<f64> {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
        v
    }

    #[test]
    fn fit_examples() {
        let f = NystroemFactor::fit(&SymMatrix::identity(2)).unwrap();
        assert_eq!(f.effective_rank, 2);
        assert_eq!(f.values(), &[1.0, 1.0]);
        assert_eq!(f.signs(), &[1, 1]);

        let f = NystroemFactor::fit(&SymMatrix::from_diagonal(&[2.0, -3.0])).unwrap();
        assert_eq!(f.signs(), &[-1, 1]);

        assert!(matches!(
            NystroemFactor::fit(&SymMatrix::zeros(3)),
            Err(Error::SingularLandmarkBlock { .. })
        ));
    }

    #[test]
    fn truncation_records_rank_deficiency() {
        let f = NystroemFactor::fit(&SymMatrix::from_diagonal(&[1.0, 1e-12, -2.0])).unwrap();
        assert_eq!(f.effective_rank, 2);
        assert_eq!(f.warnings, vec![Warning::RankDeficient { effective_rank: 2, order: 3 }]);
        let k_xz = DMatrix::from_fn(5, 3, |i, j| (i + j) as f64);
        assert_eq!(f.features(&k_xz).unwrap().ncols(), 2);
    }

    #[test]
    fn project_coeffs_examples() {
        let f = NystroemFactor::fit(&SymMatrix::identity(3)).unwrap();
        let k = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        assert!((f.project_coeffs(&k).unwrap() - &k).amax() < 1e-15);

        let f = NystroemFactor::fit(&SymMatrix::from_diagonal(&[2.0, -3.0])).unwrap();
        let a = f.project_coeffs(&DVector::from_vec(vec![2.0, -3.0])).unwrap();
        assert!((a[0] - 1.0).abs() < 1e-15 && (a[1] - 1.0).abs() < 1e-15);
        assert!(f.project_coeffs(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn project_coeffs_solves_the_block_system() {
        let mut rng = Rng::new(4);
        let kzz = random_symmetric(4, &mut rng);
        let f = NystroemFactor::fit(&kzz).unwrap();
        let k_x = DVector::from_fn(4, |_, _| rng.normal());
        let alpha = f.project_coeffs(&k_x).unwrap();
        // direct LU solve as the oracle
        let direct = kzz.as_matrix().clone().lu().solve(&k_x).unwrap();
        assert!((kzz.as_matrix() * &alpha - &k_x).norm() <= 1e-8 * k_x.norm());
        assert!((alpha - direct).norm() <= 1e-8 * (1.0 + k_x.norm()));
    }

    #[test]
    fn scalar_landmark_formula() {
        let f = NystroemFactor::fit(&SymMatrix::from_diagonal(&[2.0])).unwrap();
        let k_xz = DMatrix::from_column_slice(2, 1, &[2.0, 4.0]);
        let approx = f.approximate(&k_xz).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 4.0, 4.0, 8.0]);
        assert!(frobenius_distance(&approx, &want).unwrap() < 1e-14);
    }

    #[test]
    fn rank_one_recovered_from_one_landmark() {
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let k = SymMatrix::symmetrize(&v * v.transpose());
        for z in 0..4 {
            let f = NystroemFactor::fit_with(&k.submatrix(&[z]), LandmarkSet::new(vec![z], 4).unwrap(), None).unwrap();
            let approx = f.approximate(&k.columns(&[z])).unwrap();
            assert!(frobenius_distance(&approx, &k).unwrap() < 1e-13);
        }
    }

    #[test]
    fn exact_recovery_with_all_points() {
        let mut rng = Rng::new(8);
        let k = random_symmetric(12, &mut rng);
        let idx: Vec<usize> = (0..12).collect();
        let f = NystroemFactor::fit(&k.submatrix(&idx)).unwrap();
        let approx = f.approximate(&k.columns(&idx)).unwrap();
        assert!(frobenius_distance(&approx, &k).unwrap() <= 1e-8 * k.norm());
    }

    #[test]
    fn landmark_block_is_interpolated() {
        let mut rng = Rng::new(9);
        let k = random_symmetric(15, &mut rng);
        let idx = vec![1, 4, 7, 10, 13];
        let f = NystroemFactor::fit_with(&k.submatrix(&idx), LandmarkSet::new(idx.clone(), 15).unwrap(), None).unwrap();
        let approx = f.approximate(&k.columns(&idx)).unwrap();
        let block = approx.submatrix(&idx);
        assert!(frobenius_distance(&block, &k.submatrix(&idx)).unwrap() <= 1e-8 * (1.0 + k.norm()));
    }

    #[test]
    fn extend_examples() {
        let mut rng = Rng::new(10);
        let x = DMatrix::from_fn(10, 3, |_, _| rng.normal());
        let spec = crate::kernels::KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 2.0 };
        let k = crate::kernels::gram(&spec, &x).unwrap();
        let idx = vec![0, 3, 5, 8];
        let f = NystroemFactor::fit_with(&k.submatrix(&idx), LandmarkSet::new(idx.clone(), 10).unwrap(), None).unwrap();
        let k_xz = k.columns(&idx);
        let approx = f.approximate(&k_xz).unwrap();
        for i in 0..10 {
            let row = f.extend(&k_xz, &k_xz.row(i).transpose()).unwrap();
            assert!((row - approx.column(i)).amax() < 1e-10);
        }
        // a landmark is fixed by the projection
        let ext = f.extend(&k_xz, &k_xz.row(3).transpose()).unwrap();
        assert!((ext - k_xz.column(1)).amax() < 1e-8);
        assert_eq!(f.extend(&k_xz, &DVector::zeros(4)).unwrap(), DVector::zeros(10));
        assert!(f.extend(&DMatrix::zeros(10, 3), &DVector::zeros(4)).is_err());
    }

    #[test]
    fn one_shot_on_diagonal() {
        let k = SymMatrix::from_diagonal(&[2.0, -3.0]);
        let f = NystroemFactor::fit(&k).unwrap();
        let e = f.one_shot_eigen(k.as_matrix()).unwrap();
        assert!((e.values[0] + 3.0).abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
        // signed permutation of the identity
        for col in e.vectors.column_iter() {
            let mut a: Vec<f64> = col.iter().map(|v| v.abs()).collect();
            a.sort_by(f64::total_cmp);
            assert!(a[0] < 1e-14 && (a[1] - 1.0).abs() < 1e-14);
        }
        assert!(e.vectors[(1, 0)].abs() > 0.5);
    }

    #[test]
    fn one_shot_matches_dense_spectrum() {
        let mut rng = Rng::new(12);
        for trial in 0..20 {
            let n = 10 + trial * 3;
            let k = random_symmetric(n, &mut rng);
            let m = 3 + trial % 7;
            let idx: Vec<usize> = (0..m).map(|i| (i * 7 + trial) % n).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
            let f = NystroemFactor::fit_with(&k.submatrix(&idx), LandmarkSet::new(idx.clone(), n).unwrap(), None).unwrap();
            let k_xz = k.columns(&idx);
            let approx = f.approximate(&k_xz).unwrap();
            let e = f.one_shot_eigen(&k_xz).unwrap();
            assert!(orthonormality_defect(&e.vectors) <= 1e-8);
            let err = frobenius_distance(&e.reconstruct(), &approx).unwrap();
            assert!(err <= 1e-7 * (1.0 + approx.norm()), "trial {trial}: {err}");
            let dense: Vec<f64> = sym_eigen(&approx).values.iter().take(e.rank()).copied().collect();
            let scale = dense[0].abs();
            for (a, b) in sorted_abs(e.values.as_slice()).iter().zip(&dense) {
                assert!((a - b).abs() <= 1e-7 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn one_shot_keeps_psd_signs() {
        let mut rng = Rng::new(13);
        let a = DMatrix::from_fn(20, 20, |_, _| rng.normal());
        let k = SymMatrix::symmetrize(&a * a.transpose());
        let idx = vec![0, 2, 4, 6, 8];
        let f = NystroemFactor::fit_with(&k.submatrix(&idx), LandmarkSet::new(idx.clone(), 20).unwrap(), None).unwrap();
        let e = f.one_shot_eigen(&k.columns(&idx)).unwrap();
        assert!(e.values.iter().all(|&l| l >= -1e-8));
    }

    #[test]
    fn sgt_matches_one_shot() {
        let mut rng = Rng::new(14);
        for trial in 0..10 {
            let n = 20 + 4 * trial;
            let k = random_symmetric(n, &mut rng);
            let idx: Vec<usize> = (0..n).step_by(3).collect();
            let f = NystroemFactor::fit_with(&k.submatrix(&idx), LandmarkSet::new(idx.clone(), n).unwrap(), None).unwrap();
            let k_xz = k.columns(&idx);
            let approx = f.approximate(&k_xz).unwrap();
            let sgt = f.sgt_one_shot(&k_xz).unwrap();
            let ours = f.one_shot_eigen(&k_xz).unwrap();
            let err = frobenius_distance(&sgt.reconstruct(), &approx).unwrap();
            assert!(err <= 1e-6 * approx.norm(), "trial {trial}: {err}");
            let scale = ours.values[0].abs();
            for (a, b) in sgt.values.iter().zip(ours.values.iter()) {
                assert!((a - b).abs() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn sgt_full_rank_reconstructs_kernel() {
        let mut rng = Rng::new(15);
        let k = random_symmetric(9, &mut rng);
        let f = NystroemFactor::fit(&k).unwrap();
        let e = f.sgt_one_shot(k.as_matrix()).unwrap();
        assert!(frobenius_distance(&e.reconstruct(), &k).unwrap() <= 1e-6 * k.norm());

        let a = DMatrix::from_fn(9, 9, |_, _| rng.normal());
        let psd = SymMatrix::symmetrize(&a * a.transpose());
        let f = NystroemFactor::fit_with(&psd.submatrix(&[0, 1, 2]), LandmarkSet::new(vec![0, 1, 2], 9).unwrap(), None).unwrap();
        let e = f.sgt_one_shot(&psd.columns(&[0, 1, 2])).unwrap();
        assert!(e.values.iter().all(|&d| d >= -1e-8));
    }

    #[test]
    fn flop_formulas() {
        assert_eq!(flop_count(EigenMethod::OneShot, 1_000_000, 1_000), 3_003_000_000_000);
        assert_eq!(flop_count(EigenMethod::Sgt, 1_000_000, 1_000), 7_002_000_000_000);
        assert_eq!(flop_count(EigenMethod::OneShot, 1, 1), 6);
        assert_eq!(flop_count(EigenMethod::Sgt, 1, 1), 9);
    }

    #[test]
    fn frobenius_error_examples() {
        let k = SymMatrix::identity(2);
        assert_eq!(frobenius_error(&k, &k).unwrap(), 0.0);
        assert!((frobenius_error(&k, &SymMatrix::zeros(2)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(frobenius_error(&k, &SymMatrix::zeros(3)).is_err());
        let mut rng = Rng::new(3);
        let a = random_symmetric(6, &mut rng);
        let b = random_symmetric(6, &mut rng);
        let mut sum = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                sum += (a[(i, j)] - b[(i, j)]).powi(2);
            }
        }
        assert!((frobenius_error(&a, &b).unwrap() - sum.sqrt()).abs() < 1e-12);
    }
}
