use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Dataset;
use crate::Rng;

/// Distance between the two Gaussian class means, in units of the
/// per-coordinate standard deviation.
pub const GAUSSIAN_SEPARATION: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Unit-variance Gaussians with means `±3 e₁`.
    TwoGaussians,
    /// Shells of radius 1 and 3 with Gaussian radial noise `0.2`.
    Concentric,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-gaussians" | "two_gaussians" => Ok(SyntheticKind::TwoGaussians),
            "concentric" => Ok(SyntheticKind::Concentric),
            other => Err(Error::Config(format!("unknown synthetic dataset {other:?}"))),
        }
    }
}

/// `n/2` instances per class, labels alternating `+1, -1, ...`.
pub fn make_synthetic(kind: SyntheticKind, n: usize, p: usize, rng: &mut Rng) -> Result<Dataset> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::invalid(format!("synthetic sets need an even n >= 4, got {n}")));
    }
    if p == 0 {
        return Err(Error::invalid("need at least one feature"));
    }
    let mut x = DMatrix::zeros(n, p);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        match kind {
            SyntheticKind::TwoGaussians => {
                for j in 0..p {
                    x[(i, j)] = rng.normal();
                }
                x[(i, 0)] += label * GAUSSIAN_SEPARATION / 2.0;
            }
            SyntheticKind::Concentric => {
                let radius = if label > 0.0 { 1.0 } else { 3.0 } + 0.2 * rng.normal();
                let mut dir: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                dir.iter_mut().for_each(|v| *v *= radius / norm);
                for (j, v) in dir.into_iter().enumerate() {
                    x[(i, j)] = v;
                }
            }
        }
        y.push(label);
    }
    Dataset::classification(x, y)
}
