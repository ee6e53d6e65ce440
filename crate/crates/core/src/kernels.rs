//! Kernel functions, Gram matrices, feature standardization and centering.
//!
//! Kernel specs use a flat `key=value` text form, e.g.
//! `kernel=gaussdiff sigma1=1.0 sigma2=3.0`. Recognised kernel names:
//!
//! | name           | k(x, y)                                          |
//! |----------------|--------------------------------------------------|
//! | `gaussdiff`    | exp(-‖x-y‖²/2σ₁²) - exp(-‖x-y‖²/2σ₂²)            |
//! | `gaussian`     | exp(-‖x-y‖²/2σ²)                                 |
//! | `sigmoid`      | tanh(a⟨x,y⟩ + b)                                 |
//! | `rl-sigmoid`   | experimental preset of `sigmoid`, a = 1, b = -1  |
//! | `epanechnikov` | max(0, 1 - ‖x-y‖²/σ²)                            |
//! | `linear`       | ⟨x,y⟩                                            |
//! | `precomputed`  | kernel matrix supplied directly                  |

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::linalg::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "kebab-case")]
pub enum KernelSpec {
    GaussianDiff { sigma1: f64, sigma2: f64 },
    Gaussian { sigma: f64 },
    TanhSigmoid { a: f64, b: f64 },
    Epanechnikov { sigma: f64 },
    Linear,
    Precomputed,
}

impl KernelSpec {
    /// Parameters of the `rl-sigmoid` preset. Experimental: no canonical form exists.
    pub const RL_SIGMOID: KernelSpec = KernelSpec::TanhSigmoid { a: 1.0, b: -1.0 };

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            KernelSpec::GaussianDiff { sigma1, sigma2 } => {
                positive("sigma1", sigma1)?;
                positive("sigma2", sigma2)?;
                if sigma1 == sigma2 {
                    return Err(Error::Config(
                        "gaussdiff with sigma1 == sigma2 is identically zero".into(),
                    ));
                }
                Ok(())
            }
            KernelSpec::Gaussian { sigma } | KernelSpec::Epanechnikov { sigma } => {
                positive("sigma", sigma)
            }
            KernelSpec::TanhSigmoid { a, b } => {
                if a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config("sigmoid parameters must be finite".into()))
                }
            }
            KernelSpec::Linear | KernelSpec::Precomputed => Ok(()),
        }
    }

    /// `k(x, y)`. Panics for [`KernelSpec::Precomputed`].
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::GaussianDiff { sigma1, sigma2 } => {
                let d2 = squared_distance(x, y);
                (-d2 / (2.0 * sigma1 * sigma1)).exp() - (-d2 / (2.0 * sigma2 * sigma2)).exp()
            }
            KernelSpec::Gaussian { sigma } => {
                (-squared_distance(x, y) / (2.0 * sigma * sigma)).exp()
            }
            KernelSpec::TanhSigmoid { a, b } => (a * dot(x, y) + b).tanh(),
            KernelSpec::Epanechnikov { sigma } => {
                (1.0 - squared_distance(x, y) / (sigma * sigma)).max(0.0)
            }
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Precomputed => panic!("precomputed kernels cannot be evaluated"),
        }
    }
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::GaussianDiff { sigma1, sigma2 } => {
                write!(f, "kernel=gaussdiff sigma1={sigma1} sigma2={sigma2}")
            }
            KernelSpec::Gaussian { sigma } => write!(f, "kernel=gaussian sigma={sigma}"),
            KernelSpec::TanhSigmoid { a, b } => write!(f, "kernel=sigmoid a={a} b={b}"),
            KernelSpec::Epanechnikov { sigma } => write!(f, "kernel=epanechnikov sigma={sigma}"),
            KernelSpec::Linear => write!(f, "kernel=linear"),
            KernelSpec::Precomputed => write!(f, "kernel=precomputed"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut name = None;
        let mut params = std::collections::BTreeMap::new();
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {token:?}")))?;
            if key == "kernel" {
                name = Some(value.to_ascii_lowercase());
            } else {
                let v: f64 = value
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: not a number: {value:?}")))?;
                if params.insert(key.to_string(), v).is_some() {
                    return Err(Error::Config(format!("duplicate parameter {key}")));
                }
            }
        }
        let name = name.ok_or_else(|| Error::Config("missing kernel=<name>".into()))?;
        let mut take = |key: &str, default: Option<f64>| {
            params
                .remove(key)
                .or(default)
                .ok_or_else(|| Error::Config(format!("kernel {name} needs {key}=")))
        };
        let spec = match name.as_str() {
            "gaussdiff" => KernelSpec::GaussianDiff {
                sigma1: take("sigma1", None)?,
                sigma2: take("sigma2", None)?,
            },
            "gaussian" => KernelSpec::Gaussian {
                sigma: take("sigma", None)?,
            },
            "sigmoid" => KernelSpec::TanhSigmoid {
                a: take("a", Some(1.0))?,
                b: take("b", Some(0.0))?,
            },
            "rl-sigmoid" => {
                let KernelSpec::TanhSigmoid { a, b } = Self::RL_SIGMOID else {
                    unreachable!()
                };
                log::warn!("rl-sigmoid is an experimental tanh preset");
                KernelSpec::TanhSigmoid {
                    a: take("a", Some(a))?,
                    b: take("b", Some(b))?,
                }
            }
            "epanechnikov" => KernelSpec::Epanechnikov {
                sigma: take("sigma", None)?,
            },
            "linear" => KernelSpec::Linear,
            "precomputed" => KernelSpec::Precomputed,
            other => return Err(Error::Config(format!("unknown kernel {other:?}"))),
        };
        if let Some(key) = params.keys().next() {
            return Err(Error::Config(format!("unknown parameter {key} for {name}")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `K[i, j] = k(x_i, x_j)` over the rows of `x`.
pub fn gram(spec: &KernelSpec, x: &DMatrix<f64>) -> Result<SymMatrix> {
    if *spec == KernelSpec::Precomputed {
        return Err(Error::UseLoadMatrixInstead);
    }
    let pts = rows(x);
    let n = pts.len();
    let lower: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..=i).map(|j| spec.eval(&pts[i], &pts[j])).collect())
        .collect();
    Ok(SymMatrix::from_fn(n, |i, j| lower[i][j]))
}

/// `n x m` cross-Gram between the rows of `x` and the rows of `z`.
pub fn gram_cross(spec: &KernelSpec, x: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if *spec == KernelSpec::Precomputed {
        return Err(Error::UseLoadMatrixInstead);
    }
    if x.ncols() != z.ncols() {
        return Err(Error::shape(format!(
            "instances have {} features, landmarks have {}",
            x.ncols(),
            z.ncols()
        )));
    }
    let (xs, zs) = (rows(x), rows(z));
    let m = zs.len();
    let flat: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|xi| zs.iter().map(move |zj| spec.eval(xi, zj)))
        .collect();
    Ok(DMatrix::from_row_slice(xs.len(), m, &flat))
}

/// Per-feature affine map learned by [`standardize`] (population variance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub mean: Vec<f64>,
    /// Zero marks a constant feature, which maps to 0.
    pub std: Vec<f64>,
    pub convention: String,
}

impl FeatureScaling {
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::shape(format!(
                "scaling fitted on {} features, data has {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (mu, sd) = (self.mean[j], self.std[j]);
            for v in col.iter_mut() {
                *v = if sd > 0.0 { (*v - mu) / sd } else { 0.0 };
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct Standardized {
    pub data: DMatrix<f64>,
    pub scaling: FeatureScaling,
    pub warnings: Vec<Warning>,
}

/// Zero mean, unit (population) variance per column.
pub fn standardize(x: &DMatrix<f64>) -> Result<Standardized> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(format!("standardization needs n >= 2, got {n}")));
    }
    let mut mean = Vec::with_capacity(x.ncols());
    let mut std = Vec::with_capacity(x.ncols());
    let mut warnings = Vec::new();
    for (j, col) in x.column_iter().enumerate() {
        let mu = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if sd <= 1e-12 * mu.abs().max(1.0) {
            log::warn!("feature {j} is constant; standardized to zero");
            warnings.push(Warning::ConstantFeature { column: j });
            std.push(0.0);
        } else {
            std.push(sd);
        }
        mean.push(mu);
    }
    let scaling = FeatureScaling {
        mean,
        std,
        convention: "population".into(),
    };
    let data = scaling.apply(x)?;
    Ok(Standardized {
        data,
        scaling,
        warnings,
    })
}

/// `J K J` with `J = I - 11ᵀ/n`.
pub fn center_kernel(k: &SymMatrix) -> SymMatrix {
    let n = k.order();
    if n == 0 {
        return k.clone();
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    SymMatrix::from_fn(n, |i, j| k[(i, j)] - row_means[i] - row_means[j] + grand)
}

/// Instances (rows of `x`) with optional targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: Option<Vec<f64>>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("data matrix has non-finite entries"));
        }
        if let Some(y) = &y {
            if y.len() != x.nrows() {
                return Err(Error::shape(format!(
                    "{} instances but {} targets",
                    x.nrows(),
                    y.len()
                )));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("targets have non-finite entries"));
            }
        }
        Ok(Dataset { x, y })
    }

    /// Binary classification data: targets must be ±1 with both classes present.
    pub fn classification(x: DMatrix<f64>, y: Vec<f64>) -> Result<Self> {
        if y.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::invalid("classification labels must be -1 or +1"));
        }
        if !(y.contains(&1.0) && y.contains(&-1.0)) {
            return Err(Error::invalid("both classes must be present"));
        }
        Dataset::new(x, Some(y))
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: self.y.as_ref().map(|y| idx.iter().map(|&i| y[i]).collect()),
        }
    }
}
