//! Global minimization of a quadratic over a sphere,
//! `min γᵀWγ - 2bᵀγ  s.t.  ‖γ‖ = r`, with `W` symmetric and possibly indefinite.
//!
//! Stationary points satisfy `(W + νI)γ = b`; the global minimizer is the one
//! with `W + νI ⪰ 0`. Writing `W = QΛQᵀ`, `β = Qᵀb` and `t = ν + λ_min >= 0`,
//! the norm `φ(t) = ‖(W + νI)⁺b‖` is decreasing in `t` and the multiplier is
//! the root of the secular equation `1/φ(t) = 1/r`, found by Newton steps
//! inside a bisection bracket. In the hard case (`b` orthogonal to the
//! minimal eigenspace and `φ(0) < r`) the gap to the sphere is filled with a
//! minimal eigenvector.

use nalgebra::DVector;

use super::{sym_eigen, SymMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone)]
pub struct SphereQp {
    pub w: SymMatrix,
    pub b: DVector<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct SphereSolution {
    pub gamma: DVector<f64>,
    /// `ν` in `(W + νI)γ = b`.
    pub multiplier: f64,
    pub objective: f64,
    pub iterations: usize,
    pub hard_case: bool,
}

impl SphereQp {
    pub fn new(w: SymMatrix, b: DVector<f64>, radius: f64) -> Result<Self> {
        if w.order() != b.len() {
            return Err(Error::shape(format!(
                "W is {0}x{0} but b has length {1}",
                w.order(),
                b.len()
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("sphere radius must be positive, got {radius}")));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite linear term"));
        }
        Ok(SphereQp { w, b, radius })
    }

    pub fn objective(&self, gamma: &DVector<f64>) -> f64 {
        (self.w.as_matrix() * gamma).dot(gamma) - 2.0 * self.b.dot(gamma)
    }

    pub fn solve(&self) -> Result<SphereSolution> {
        self.solve_with(DEFAULT_TOLERANCE)
    }

    pub fn solve_with(&self, tol: f64) -> Result<SphereSolution> {
        let m = self.b.len();
        let r = self.radius;
        if m == 0 {
            return Err(Error::invalid("empty problem"));
        }
        let eig = sym_eigen(&self.w);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.values[i].total_cmp(&eig.values[j]));
        let lambda_min = eig.values[order[0]];
        let scale = eig.values.amax().max(1.0);
        let gaps: Vec<f64> = order.iter().map(|&i| eig.values[i] - lambda_min).collect();
        let beta: Vec<f64> = order
            .iter()
            .map(|&i| eig.vectors.column(i).dot(&self.b))
            .collect();
        let b_norm = self.b.norm();

        let in_min_space = |k: usize| gaps[k] <= 1e-12 * scale;
        let min_mass: f64 = (0..m).filter(|&k| in_min_space(k)).map(|k| beta[k] * beta[k]).sum();

        let mut coords = vec![0.0; m];
        let mut hard_case = false;
        let mut iterations = 0;
        let t;

        if min_mass.sqrt() <= 1e-14 * b_norm || b_norm == 0.0 {
            let rest: f64 = (0..m)
                .filter(|&k| !in_min_space(k))
                .map(|k| (beta[k] / gaps[k]).powi(2))
                .sum();
            if rest <= r * r {
                hard_case = true;
                for k in (0..m).filter(|&k| !in_min_space(k)) {
                    coords[k] = beta[k] / gaps[k];
                }
                coords[0] = (r * r - rest).sqrt();
                t = 0.0;
            } else {
                (t, iterations) = secular_root(&gaps, &beta, r, b_norm, tol, true)?;
            }
        } else {
            (t, iterations) = secular_root(&gaps, &beta, r, b_norm, tol, false)?;
        }

        if !hard_case {
            for k in 0..m {
                coords[k] = if in_min_space(k) && min_mass.sqrt() <= 1e-14 * b_norm {
                    0.0
                } else {
                    beta[k] / (gaps[k] + t)
                };
            }
        }

        let mut gamma = DVector::zeros(m);
        for (k, &i) in order.iter().enumerate() {
            gamma.axpy(coords[k], &eig.vectors.column(i), 1.0);
        }
        let norm = gamma.norm();
        if norm > 0.0 {
            gamma *= r / norm;
        }
        let objective = self.objective(&gamma);
        Ok(SphereSolution {
            gamma,
            multiplier: t - lambda_min,
            objective,
            iterations,
            hard_case,
        })
    }
}

/// Root `t > 0` of `φ(t) = r`, `φ(t)² = Σ β_k² / (g_k + t)²`.
fn secular_root(
    gaps: &[f64],
    beta: &[f64],
    r: f64,
    b_norm: f64,
    tol: f64,
    skip_min_space: bool,
) -> Result<(f64, usize)> {
    let terms = |t: f64| -> (f64, f64) {
        let (mut s2, mut s3) = (0.0, 0.0);
        for (k, (&g, &b)) in gaps.iter().zip(beta).enumerate() {
            if skip_min_space && k == 0 {
                continue;
            }
            let d = g + t;
            let q = b * b / (d * d);
            s2 += q;
            s3 += q / d;
        }
        (s2.sqrt(), s3)
    };

    // φ(t) <= ‖b‖ / t, so the root is below ‖b‖ / r.
    let (mut lo, mut hi) = (0.0f64, b_norm / r);
    let mut t = 0.5 * hi;
    let mut residual = f64::INFINITY;
    for iter in 1..=MAX_ITERATIONS {
        let (phi, s3) = terms(t);
        residual = (phi - r).abs() / r;
        if residual <= tol {
            return Ok((t, iter));
        }
        if phi > r {
            lo = t;
        } else {
            hi = t;
        }
        // Newton on ψ(t) = 1/φ - 1/r, ψ' = s3 / φ³
        let psi = 1.0 / phi - 1.0 / r;
        let dpsi = s3 / (phi * phi * phi);
        let mut next = t - psi / dpsi;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if hi - lo <= f64::EPSILON * hi {
            return Ok((next, iter));
        }
        t = next;
    }
    Err(Error::Solver {
        reason: "secular equation did not converge".into(),
        iterations: MAX_ITERATIONS,
        residual,
    })
}
