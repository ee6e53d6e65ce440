//! Ridge regression in a Kreĭn space on Nyström features, with separate
//! penalties for the positive and negative parts of the spectrum.
//!
//! `cargo run --release --example krein_ridge`

use krein::kernels::{gram_cross, KernelSpec};
use krein::landmarks::{fit_landmarks, uniform_landmarks, VectorKernel};
use krein::learners::{build_feature_map, krein_krr_lowrank, RegPair};
use krein::Rng;
use nalgebra::{DMatrix, DVector};

fn target(x: &DMatrix<f64>, i: usize) -> f64 {
    (2.0 * x[(i, 0)]).sin() + 0.5 * x[(i, 1)]
}

fn main() -> krein::Result<()> {
    let (n, q, m) = (600, 200, 60);
    let mut rng = Rng::new(3);
    let x = DMatrix::from_fn(n, 2, |_, _| rng.normal());
    let y = DVector::from_fn(n, |i, _| target(&x, i) + 0.1 * rng.normal());
    let xq = DMatrix::from_fn(q, 2, |_, _| rng.normal());
    let yq = DVector::from_fn(q, |i, _| target(&xq, i));

    let spec = KernelSpec::GaussianDiff { sigma1: 0.7, sigma2: 2.0 };
    let source = VectorKernel { spec: &spec, x: &x };
    let (factor, k_xz) = fit_landmarks(&source, uniform_landmarks(n, m, &mut rng)?, None)?;
    let map = build_feature_map(&factor, &k_xz)?;
    let k_qz = gram_cross(&spec, &xq, &x.select_rows(&factor.landmarks.indices))?;

    println!("{:>9} {:>9} {:>10} {:>10}", "λ+", "λ-", "train rmse", "test rmse");
    for (plus, minus) in [(1e-4, 1e-4), (1e-4, 1e-1), (1e-2, 1e-2), (1e-1, 1e-4)] {
        let model = krein_krr_lowrank(&map, &y, RegPair::new(plus, minus)?)?;
        let rmse = |p: DVector<f64>, t: &DVector<f64>| ((p - t).norm_squared() / t.len() as f64).sqrt();
        let train = rmse(model.predict_batch(&k_xz)?, &y);
        let test = rmse(model.predict_batch(&k_qz)?, &yq);
        println!("{plus:>9.0e} {minus:>9.0e} {train:>10.4} {test:>10.4}");
    }
    Ok(())
}
