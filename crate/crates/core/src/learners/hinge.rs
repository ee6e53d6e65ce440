//! Squared-hinge Kreĭn SVM trained in the primal with damped Newton steps.

use nalgebra::{DMatrix, DVector};

use super::{check_targets, nonzero_part, Diagnostics, FeatureMap, FullRankModel, Learner, LowRankModel, RegPair};
use crate::error::{Error, Result};
use crate::linalg::SignedEigenSystem;

pub const NEWTON_MAX_ITERATIONS: usize = 100;
const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 60;

/// `F(z) = Σ max(0, 1 - yᵢΦᵢz)² + zᵀ diag(c) z`.
#[derive(Debug, Clone)]
pub struct SquaredHinge<'a> {
    pub phi: &'a DMatrix<f64>,
    pub y: &'a DVector<f64>,
    /// Per-coordinate penalty `c` (already multiplied by `n`).
    pub penalty: Vec<f64>,
}

impl SquaredHinge<'_> {
    fn slacks(&self, z: &DVector<f64>) -> DVector<f64> {
        let f = self.phi * z;
        DVector::from_iterator(f.len(), f.iter().zip(self.y.iter()).map(|(fi, yi)| (1.0 - yi * fi).max(0.0)))
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        let loss = self.slacks(z).norm_squared();
        loss + z.iter().zip(&self.penalty).map(|(a, c)| c * a * a).sum::<f64>()
    }

    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let xi = self.slacks(z);
        let weighted = xi.component_mul(self.y);
        let mut g = self.phi.transpose() * weighted * -2.0;
        for (i, c) in self.penalty.iter().enumerate() {
            g[i] += 2.0 * c * z[i];
        }
        g
    }

    /// Generalized Hessian `2Φ_AᵀΦ_A + 2 diag(c)` on the active set.
    pub fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let xi = self.slacks(z);
        let active: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] > 0.0).collect();
        let pa = self.phi.select_rows(&active);
        let mut h = pa.transpose() * pa * 2.0;
        for (i, c) in self.penalty.iter().enumerate() {
            h[(i, i)] += 2.0 * c;
        }
        h
    }

    /// Newton from `z = 0` until `‖∇F‖ <= 1e-8 · max(1, n)`.
    pub fn solve(&self) -> Result<(DVector<f64>, Diagnostics)> {
        let n = self.phi.nrows();
        let tol = 1e-8 * (n.max(1) as f64);
        let mut z = DVector::zeros(self.phi.ncols());
        let mut f = self.objective(&z);
        let mut g = self.gradient(&z);
        for iter in 0..=NEWTON_MAX_ITERATIONS {
            let gnorm = g.norm();
            if gnorm <= tol {
                return Ok((
                    z,
                    Diagnostics {
                        iterations: iter,
                        objective: f,
                        gradient_norm: Some(gnorm),
                        multiplier: None,
                        hard_case: false,
                    },
                ));
            }
            if iter == NEWTON_MAX_ITERATIONS {
                break;
            }
            let h = self.hessian(&z);
            let Some(chol) = h.cholesky() else {
                return Err(Error::Solver {
                    reason: "Newton system is not positive definite".into(),
                    iterations: iter,
                    residual: gnorm,
                });
            };
            let step = -chol.solve(&g);
            let slope = g.dot(&step);
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand = &z + &step * t;
                let fc = self.objective(&cand);
                if fc <= f + ARMIJO_C * t * slope {
                    accepted = Some((cand, fc));
                    break;
                }
                t *= BACKTRACK;
            }
            let (next, fnext) = match accepted {
                Some(v) => v,
                None => {
                    // at roundoff level the objective cannot certify descent;
                    // the full step is still taken if it shrinks the gradient
                    let cand = &z + &step;
                    if self.gradient(&cand).norm() < gnorm {
                        let fc = self.objective(&cand);
                        (cand, fc)
                    } else {
                        return Err(Error::Solver {
                            reason: "line search failed".into(),
                            iterations: iter,
                            residual: gnorm,
                        });
                    }
                }
            };
            z = next;
            f = fnext;
            g = self.gradient(&z);
        }
        Err(Error::Solver {
            reason: "Newton iteration cap reached".into(),
            iterations: NEWTON_MAX_ITERATIONS,
            residual: g.norm(),
        })
    }
}

pub(crate) fn check_labels(y: &DVector<f64>, n: usize) -> Result<()> {
    check_targets(y, n)?;
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("labels must be +1 or -1"));
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("both classes must be present"));
    }
    Ok(())
}

/// `min Σ max(0, 1 - yᵢΦᵢz)² + nλ₊‖z₊‖² + nλ₋‖z₋‖²`.
pub fn sh_svm_lowrank(map: &FeatureMap, y: &DVector<f64>, reg: RegPair) -> Result<LowRankModel> {
    let n = map.len();
    check_labels(y, n)?;
    let problem = SquaredHinge {
        phi: &map.phi,
        y,
        penalty: reg.scaled_diagonal(&map.signs, n),
    };
    let (z, diagnostics) = problem.solve()?;
    Ok(LowRankModel::from_map(map, Learner::KreinShSvm, reg, z, diagnostics))
}

/// Full-rank counterpart on `Φ = U|D|^{1/2}` (nonzero eigenpairs of `K`),
/// returned as `α = U S |D|^{-1/2} z` so that `Kα = Φz`.
pub fn sh_svm_full(eig: &SignedEigenSystem, y: &DVector<f64>, reg: RegPair) -> Result<FullRankModel> {
    let n = eig.order();
    check_labels(y, n)?;
    let (u, d, s) = nonzero_part(eig);
    if d.is_empty() {
        return Err(Error::DegenerateSpectrum);
    }
    let mut phi = u.clone();
    for (j, dj) in d.iter().enumerate() {
        phi.column_mut(j).scale_mut(dj.sqrt());
    }
    let problem = SquaredHinge {
        phi: &phi,
        y,
        penalty: reg.scaled_diagonal(&s, n),
    };
    let (z, diagnostics) = problem.solve()?;
    let coef = DVector::from_iterator(d.len(), z.iter().zip(d.iter().zip(&s)).map(|(zi, (di, &si))| f64::from(si) * zi / di.sqrt()));
    Ok(FullRankModel {
        learner: Learner::KreinShSvm,
        alpha: u * coef,
        eig: eig.clone(),
        reg,
        radius: None,
        diagnostics,
    })
}
