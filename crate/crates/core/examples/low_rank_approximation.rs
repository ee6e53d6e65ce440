//! Relative Frobenius error of the Nyström approximation of an indefinite
//! kernel as the number of uniformly drawn landmarks grows.
//!
//! `cargo run --release --example low_rank_approximation`

use krein::kernels::{gram, KernelSpec};
use krein::landmarks::{fit_landmarks, uniform_landmarks, VectorKernel};
use krein::linalg::frobenius_distance;
use krein::Rng;
use nalgebra::DMatrix;

fn main() -> krein::Result<()> {
    let n = 400;
    let mut rng = Rng::new(1);
    let x = DMatrix::from_fn(n, 4, |_, _| rng.normal());
    let spec = KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 };
    let k = gram(&spec, &x)?;
    let eig = k.eigen();
    println!("n = {n}, indefiniteness = {:.4}", eig.indefiniteness()?);

    let source = VectorKernel { spec: &spec, x: &x };
    println!("{:>5} {:>14} {:>6}", "m", "relative error", "rank");
    for m in [5, 10, 20, 40, 80, 160, 400] {
        let landmarks = uniform_landmarks(n, m, &mut rng)?;
        let (factor, k_xz) = fit_landmarks(&source, landmarks, None)?;
        let approx = factor.approximate(&k_xz)?;
        let err = frobenius_distance(approx.as_matrix(), k.as_matrix())? / k.norm();
        println!("{m:>5} {err:>14.3e} {:>6}", factor.signs().len());
    }
    Ok(())
}
