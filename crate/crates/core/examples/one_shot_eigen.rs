//! Approximate eigendecomposition of `K̃` with orthonormal eigenvectors,
//! checked against the squared-matrix construction and the exact spectrum.
//!
//! `cargo run --release --example one_shot_eigen`

use krein::kernels::{gram, KernelSpec};
use krein::landmarks::{fit_landmarks, uniform_landmarks, VectorKernel};
use krein::linalg::{frobenius_distance, orthonormality_defect};
use krein::Rng;
use nalgebra::DMatrix;

fn main() -> krein::Result<()> {
    let (n, m) = (1000, 200);
    let mut rng = Rng::new(2);
    let x = DMatrix::from_fn(n, 3, |_, _| rng.normal());
    let spec = KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 };
    let source = VectorKernel { spec: &spec, x: &x };
    let (factor, k_xz) = fit_landmarks(&source, uniform_landmarks(n, m, &mut rng)?, None)?;

    let one_shot = factor.one_shot_eigen(&k_xz)?;
    let sgt = factor.sgt_one_shot(&k_xz)?;
    let k_tilde = factor.approximate(&k_xz)?;
    println!("‖ŨᵀŨ - I‖ one-shot: {:.2e}", orthonormality_defect(&one_shot.vectors));
    println!("‖ŨᵀŨ - I‖ squared:  {:.2e}", orthonormality_defect(&sgt.vectors));
    for (name, e) in [("one-shot", &one_shot), ("squared", &sgt)] {
        let err = frobenius_distance(e.reconstruct().as_matrix(), k_tilde.as_matrix())? / k_tilde.norm();
        println!("reconstruction of K̃, {name}: {err:.2e}");
    }

    let exact = gram(&spec, &x)?.eigen();
    println!("{:>3} {:>12} {:>12} {:>12}", "i", "one-shot", "squared", "exact");
    for i in 0..8 {
        println!(
            "{i:>3} {:>12.5} {:>12.5} {:>12.5}",
            one_shot.values[i], sgt.values[i], exact.values[i]
        );
    }
    let negative = one_shot.values.iter().filter(|&&v| v < 0.0).count();
    println!("{negative} of {} approximate eigenvalues are negative", one_shot.rank());
    Ok(())
}
