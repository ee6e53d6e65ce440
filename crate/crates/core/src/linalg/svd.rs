use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin SVD `L = A diag(Σ) Bᵀ` of an `n x m` matrix with `n >= m`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `n x m`, orthonormal columns.
    pub a: DMatrix<f64>,
    /// Nonnegative, descending.
    pub sigma: DVector<f64>,
    /// `m x m` orthogonal.
    pub b: DMatrix<f64>,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.a.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * self.b.transpose()
    }
}

pub fn thin_svd(l: &DMatrix<f64>) -> Result<SvdFactors> {
    let svd = product_thin_svd(l, None)?;
    let a = svd.left(l);
    Ok(SvdFactors {
        a,
        sigma: svd.sigma,
        b: svd.b,
    })
}

/// SVD of `L = X C` whose left factor may be kept implicit as `A = X T`.
///
/// For tall products the factorization runs through the Gram matrix with two
/// Cholesky-QR passes, so the only `O(n)` work is matrix multiplication. When
/// the first pass is too far from orthonormal (condition number of `L` beyond
/// roughly 1e6) it falls back to a Householder SVD of the explicit product.
#[derive(Debug, Clone)]
pub(crate) struct ProductSvd {
    left: Left,
    pub sigma: DVector<f64>,
    pub b: DMatrix<f64>,
}

#[derive(Debug, Clone)]
enum Left {
    /// `A = X * T`
    Implicit(DMatrix<f64>),
    Explicit(DMatrix<f64>),
}

impl ProductSvd {
    /// `A P` for an `r x k` matrix `p`; `x` must be the matrix the SVD was built from.
    pub fn left_times(&self, x: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.left {
            Left::Implicit(t) => x * (t * p),
            Left::Explicit(a) => a * p,
        }
    }

    pub fn left(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.left {
            Left::Implicit(t) => x * t,
            Left::Explicit(a) => a.clone(),
        }
    }

    #[cfg(test)]
    fn is_implicit(&self) -> bool {
        matches!(self.left, Left::Implicit(_))
    }
}

/// Largest `|QᵀQ - I|` accepted after the first Cholesky-QR pass.
const FIRST_PASS_DEFECT: f64 = 0.1;

pub(crate) fn product_thin_svd(x: &DMatrix<f64>, c: Option<&DMatrix<f64>>) -> Result<ProductSvd> {
    let n = x.nrows();
    let r = c.map_or(x.ncols(), |c| c.ncols());
    if let Some(c) = c {
        if c.nrows() != x.ncols() {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                n,
                x.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
    }
    if n < r {
        return Err(Error::shape(format!(
            "thin SVD needs at least as many rows as columns, got {n}x{r}"
        )));
    }
    if r == 0 {
        return Ok(ProductSvd {
            left: Left::Explicit(DMatrix::zeros(n, 0)),
            sigma: DVector::zeros(0),
            b: DMatrix::zeros(0, 0),
        });
    }
    if n >= 2 * r {
        if let Some(svd) = cholesky_qr2(x, c) {
            return Ok(svd);
        }
    }
    let l = match c {
        Some(c) => x * c,
        None => x.clone(),
    };
    Ok(householder_svd(l))
}

fn cholesky_qr2(x: &DMatrix<f64>, c: Option<&DMatrix<f64>>) -> Option<ProductSvd> {
    let xtx = x.transpose() * x;
    let gram = match c {
        Some(c) => c.transpose() * &xtx * c,
        None => xtx,
    };
    let r1 = upper_cholesky(gram)?;
    let r1_inv = upper_inverse(&r1)?;
    let t1 = match c {
        Some(c) => c * &r1_inv,
        None => r1_inv,
    };
    let q1 = x * &t1;
    let g2 = q1.transpose() * &q1;
    let k = g2.nrows();
    if (&g2 - DMatrix::<f64>::identity(k, k)).amax() > FIRST_PASS_DEFECT {
        return None;
    }
    let r2 = upper_cholesky(g2)?;
    let r2_inv = upper_inverse(&r2)?;
    let r = &r2 * &r1;
    let small = householder_svd(r);
    let Left::Explicit(w) = small.left else {
        unreachable!()
    };
    Some(ProductSvd {
        left: Left::Implicit(t1 * r2_inv * w),
        sigma: small.sigma,
        b: small.b,
    })
}

fn upper_cholesky(mut g: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = g.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = avg;
            g[(j, i)] = avg;
        }
    }
    let chol = g.cholesky()?;
    Some(chol.l().transpose())
}

fn upper_inverse(r: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = r.nrows();
    r.solve_upper_triangular(&DMatrix::identity(n, n))
}

fn householder_svd(l: DMatrix<f64>) -> ProductSvd {
    let (n, m) = l.shape();
    let svd = l.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut a = DMatrix::zeros(n, m);
    let mut b = DMatrix::zeros(m, m);
    let mut sigma = DVector::zeros(m);
    for (dst, &src) in order.iter().enumerate() {
        a.set_column(dst, &u.column(src));
        b.set_column(dst, &v_t.row(src).transpose());
        sigma[dst] = svd.singular_values[src];
    }
    ProductSvd {
        left: Left::Explicit(a),
        sigma,
        b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_distance, orthonormality_defect};
    use proptest::prelude::*;

    fn random(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = crate::Rng::new(seed);
        DMatrix::from_fn(n, m, |_, _| rng.normal())
    }

    fn check(l: &DMatrix<f64>, f: &SvdFactors) {
        assert!(orthonormality_defect(&f.a) <= 1e-10);
        assert!(orthonormality_defect(&f.b) <= 1e-10);
        let err = frobenius_distance(&f.reconstruct(), l).unwrap();
        assert!(err <= 1e-8 * l.norm().max(1.0), "reconstruction error {err}");
        for w in f.sigma.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let f = thin_svd(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(f.sigma.len(), 3);
        for s in f.sigma.iter() {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn column_vector() {
        let l = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let f = thin_svd(&l).unwrap();
        assert!((f.sigma[0] - 5.0).abs() < 1e-14);
        // A is determined up to sign
        let sign = f.a[(0, 0)].signum();
        assert!((sign * f.a[(0, 0)] - 0.6).abs() < 1e-14);
        assert!((sign * f.a[(1, 0)] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn padded_diagonal() {
        let l = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, -3.0, 0.0, 0.0]);
        let f = thin_svd(&l).unwrap();
        assert!((f.sigma[0] - 3.0).abs() < 1e-14);
        assert!((f.sigma[1] - 2.0).abs() < 1e-14);
        check(&l, &f);
    }

    #[test]
    fn wide_input_is_a_shape_error() {
        assert!(matches!(thin_svd(&DMatrix::zeros(2, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn tall_well_conditioned_takes_gram_route() {
        let x = random(200, 20, 1);
        let svd = product_thin_svd(&x, None).unwrap();
        assert!(svd.is_implicit());
        let f = thin_svd(&x).unwrap();
        check(&x, &f);
    }

    #[test]
    fn ill_conditioned_falls_back() {
        let mut x = random(200, 10, 2);
        let col = x.column(0).clone_owned();
        x.set_column(9, &(&col + x.column(9) * 1e-9));
        let svd = product_thin_svd(&x, None).unwrap();
        assert!(!svd.is_implicit());
        let f = thin_svd(&x).unwrap();
        check(&x, &f);
    }

    #[test]
    fn product_form_matches_explicit() {
        let x = random(300, 15, 3);
        let c = random(15, 12, 4);
        let svd = product_thin_svd(&x, Some(&c)).unwrap();
        let l = &x * &c;
        let explicit = thin_svd(&l).unwrap();
        for (a, b) in svd.sigma.iter().zip(explicit.sigma.iter()) {
            assert!((a - b).abs() <= 1e-10 * explicit.sigma[0]);
        }
        let a = svd.left(&x);
        assert!(orthonormality_defect(&a) <= 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn svd_invariants(n in 1usize..60, m in 1usize..30, seed in any::<u64>()) {
            let m = m.min(n);
            let l = random(n, m, seed);
            let f = thin_svd(&l).unwrap();
            prop_assert!(orthonormality_defect(&f.a) <= 1e-10);
            prop_assert!(frobenius_distance(&f.reconstruct(), &l).unwrap() <= 1e-8 * l.norm().max(1.0));
        }
    }
}
