//! Dense symmetric numerics shared by the rest of the crate.
//!
//! Everything here works on `nalgebra` dense matrices. [`SymMatrix`] is the
//! symmetric-by-construction wrapper that kernel matrices, landmark blocks and
//! low-rank reconstructions travel in; [`SignedEigenSystem`] is its
//! eigendecomposition with the sign pattern `S = sign(D)` made explicit.

mod sphere;
mod svd;

pub use sphere::{SphereQp, SphereSolution};
pub use svd::{thin_svd, SvdFactors};
pub(crate) use svd::{product_thin_svd};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{Error, Result};

/// Relative asymmetry accepted (and averaged away) by [`SymMatrix::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Relative zero threshold for eigenvalue signs: `|d| <= 1e-12 * max|d|` gets sign 0.
pub const ZERO_EIGENVALUE_RTOL: f64 = 1e-12;

/// Dense symmetric matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DMatrix<f64>", into = "DMatrix<f64>")]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts `m` if it is square, finite and symmetric up to
    /// [`SYMMETRY_TOLERANCE`] (relative to its largest entry), then stores
    /// `(m + mᵀ) / 2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, SYMMETRY_TOLERANCE)
    }

    pub fn with_tolerance(m: DMatrix<f64>, rtol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::shape(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some((i, j)) = first_non_finite(&m) {
            return Err(Error::invalid(format!("non-finite entry at ({i}, {j})")));
        }
        if let Some((i, j, gap)) = worst_asymmetry(&m) {
            let scale = m.amax().max(1.0);
            if gap > rtol * scale {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric: |m[{i},{j}] - m[{j},{i}]| = {gap:.3e}"
                )));
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// Averages `m` with its transpose without checking how far apart they were.
    /// Used for results computed in floating point that are symmetric in exact
    /// arithmetic.
    pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        SymMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Builds the matrix from `f(i, j)` evaluated on the lower triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Principal submatrix on `idx` (rows and columns in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let m = idx.len();
        SymMatrix(DMatrix::from_fn(m, m, |i, j| self.0[(idx[i], idx[j])]))
    }

    /// The `n x idx.len()` block of columns `idx`.
    pub fn columns(&self, idx: &[usize]) -> DMatrix<f64> {
        self.0.select_columns(idx)
    }

    /// The `rows.len() x cols.len()` block.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])])
    }

    pub fn eigen(&self) -> SignedEigenSystem {
        sym_eigen(self)
    }
}

impl Deref for SymMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl TryFrom<DMatrix<f64>> for SymMatrix {
    type Error = Error;

    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        SymMatrix::new(m)
    }
}

impl From<SymMatrix> for DMatrix<f64> {
    fn from(m: SymMatrix) -> Self {
        m.0
    }
}

fn first_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    let pos = m.iter().position(|v| !v.is_finite())?;
    Some((pos % m.nrows(), pos / m.nrows()))
}

fn worst_asymmetry(m: &DMatrix<f64>) -> Option<(usize, usize, f64)> {
    let n = m.nrows();
    let mut worst = None;
    let mut gap_max = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > gap_max {
                gap_max = gap;
                worst = Some((i, j, gap));
            }
        }
    }
    worst
}

/// Eigendecomposition `M = U diag(d) Uᵀ` with signs `s = sign(d)`.
///
/// Eigenpairs are ordered by `|d|` descending, ties by `d` descending. Each
/// eigenvector is oriented so that its entry of largest magnitude is positive
/// (lowest index wins ties). Eigenvalues with `|d| <= zero_threshold` carry
/// sign 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedEigenSystem {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
    pub signs: Vec<i8>,
    pub zero_threshold: f64,
}

/// Eigendecomposition with the default zero threshold `1e-12 * max|d|`.
pub fn sym_eigen(m: &SymMatrix) -> SignedEigenSystem {
    sym_eigen_impl(m, None)
}

/// Eigendecomposition with an absolute zero threshold for the signs.
pub fn sym_eigen_with_threshold(m: &SymMatrix, zero_threshold: f64) -> SignedEigenSystem {
    sym_eigen_impl(m, Some(zero_threshold))
}

fn sym_eigen_impl(m: &SymMatrix, zero_threshold: Option<f64>) -> SignedEigenSystem {
    let n = m.order();
    if n == 0 {
        return SignedEigenSystem {
            vectors: DMatrix::zeros(0, 0),
            values: DVector::zeros(0),
            signs: Vec::new(),
            zero_threshold: 0.0,
        };
    }
    let eig = SymmetricEigen::try_new(m.0.clone(), f64::EPSILON, 0)
        .expect("symmetric QR iteration without an iteration cap always terminates");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        db.abs()
            .total_cmp(&da.abs())
            .then_with(|| db.total_cmp(&da))
    });

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        orient(col.as_mut_slice());
        vectors.set_column(dst, &col);
        values[dst] = eig.eigenvalues[src];
    }

    let largest = values.amax();
    let tau = zero_threshold.unwrap_or(ZERO_EIGENVALUE_RTOL * largest);
    let signs = values.iter().map(|&d| sign_with_threshold(d, tau)).collect();
    SignedEigenSystem {
        vectors,
        values,
        signs,
        zero_threshold: tau,
    }
}

/// Flips `v` so its largest-magnitude entry (first one on ties) is positive.
pub(crate) fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn sign_with_threshold(d: f64, tau: f64) -> i8 {
    if d.abs() <= tau {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

impl SignedEigenSystem {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// `U diag(f(d_i, s_i)) Uᵀ`.
    pub fn spectral_map(&self, f: impl Fn(f64, i8) -> f64) -> SymMatrix {
        let scale: Vec<f64> = self
            .values
            .iter()
            .zip(&self.signs)
            .map(|(&d, &s)| f(d, s))
            .collect();
        let mut scaled = self.vectors.clone();
        for (j, &c) in scale.iter().enumerate() {
            scaled.column_mut(j).scale_mut(c);
        }
        SymMatrix::symmetrize(scaled * self.vectors.transpose())
    }

    /// `U diag(d) Uᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        self.spectral_map(|d, _| d)
    }

    /// The flip-spectrum matrix `H = U D S Uᵀ = U |D| Uᵀ` (positive semidefinite).
    pub fn flip_spectrum(&self) -> SymMatrix {
        self.spectral_map(|d, s| d * f64::from(s))
    }

    /// The out-of-sample companion `P = U S Uᵀ`; `K P = H`.
    pub fn flip_projector(&self) -> SymMatrix {
        self.spectral_map(|_, s| f64::from(s))
    }

    /// Share of absolute spectral mass on negative eigenvalues, in `[0, 1]`.
    pub fn indefiniteness(&self) -> Result<f64> {
        let (mut negative, mut total) = (0.0, 0.0);
        for (&d, &s) in self.values.iter().zip(&self.signs) {
            if s != 0 {
                total += d.abs();
                if s < 0 {
                    negative += d.abs();
                }
            }
        }
        if total == 0.0 {
            return Err(Error::DegenerateSpectrum);
        }
        Ok(negative / total)
    }
}

/// `‖a - b‖_F`.
pub fn frobenius_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Largest entry of `|AᵀA - I|`.
pub fn orthonormality_defect(a: &DMatrix<f64>) -> f64 {
    let gram = a.transpose() * a;
    let k = gram.nrows();
    (&gram - DMatrix::<f64>::identity(k, k)).amax()
}
