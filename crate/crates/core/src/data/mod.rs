//! Data ingestion, dissimilarity conversion, cross-validation and metrics.

mod cv;
pub mod io;
mod synthetic;

pub use cv::{mean_std, median, stratified_kfold, CvPlan, EvalResult, Fold, PhaseTimings};
pub use synthetic::{make_synthetic, SyntheticKind};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::center_kernel;
use crate::linalg::SymMatrix;

/// Pairwise dissimilarities; `squared` marks entries that already hold
/// squared distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    d: DMatrix<f64>,
    pub squared: bool,
}

impl DissimilarityMatrix {
    pub fn new(d: DMatrix<f64>, squared: bool) -> Result<Self> {
        let sym = SymMatrix::new(d)?.into_inner();
        let n = sym.nrows();
        for i in 0..n {
            if sym[(i, i)].abs() > 1e-8 {
                return Err(Error::invalid(format!(
                    "dissimilarity diagonal entry {i} is {}",
                    sym[(i, i)]
                )));
            }
        }
        if let Some(v) = sym.iter().find(|&&v| v < -1e-8) {
            return Err(Error::invalid(format!("negative dissimilarity {v}")));
        }
        Ok(DissimilarityMatrix { d: sym, squared })
    }

    pub fn order(&self) -> usize {
        self.d.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.d
    }
}

/// `S = -½ J D⁽²⁾ J` with `J = I - 11ᵀ/n`; `D⁽²⁾` squares entrywise unless
/// the matrix is already squared.
pub fn double_center_neg(d: &DissimilarityMatrix) -> SymMatrix {
    let sq = if d.squared {
        d.d.clone()
    } else {
        d.d.map(|v| v * v)
    };
    let centered = center_kernel(&SymMatrix::symmetrize(sq));
    SymMatrix::symmetrize(centered.into_inner() * -0.5)
}

/// `+1` for `target`, `-1` for every other label.
pub fn one_vs_all<S: AsRef<str>>(labels: &[S], target: &str) -> Result<DVector<f64>> {
    if !labels.iter().any(|l| l.as_ref() == target) {
        return Err(Error::InvalidClass(target.to_string()));
    }
    Ok(DVector::from_iterator(
        labels.len(),
        labels.iter().map(|l| if l.as_ref() == target { 1.0 } else { -1.0 }),
    ))
}

/// Distinct labels in first-seen order.
pub fn classes<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in labels {
        if !out.iter().any(|c| c == l.as_ref()) {
            out.push(l.as_ref().to_string());
        }
    }
    out
}

/// Reads `±1` labels; a two-class file with other names maps its first label to `+1`.
pub fn binary_labels<S: AsRef<str>>(labels: &[S]) -> Result<DVector<f64>> {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.as_ref().parse::<f64>().ok()).collect();
    if let Some(v) = numeric {
        if v.iter().all(|&x| x == 1.0 || x == -1.0) {
            return Ok(DVector::from_vec(v));
        }
    }
    let cs = classes(labels);
    if cs.len() != 2 {
        return Err(Error::invalid(format!(
            "expected two classes, found {}; pick one with --target-class",
            cs.len()
        )));
    }
    one_vs_all(labels, &cs[0])
}

/// Fraction of `i` with `sign(predᵢ) ≠ yᵢ`; a zero output counts as an error.
pub fn misclassification(preds: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if preds.len() != y.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} labels",
            preds.len(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::invalid("no labels"));
    }
    let wrong = preds
        .iter()
        .zip(y.iter())
        .filter(|(p, t)| !(**p * **t > 0.0))
        .count();
    Ok(wrong as f64 / y.len() as f64)
}
