//! Least squares with a hard constraint on the spread of the hypothesis:
//! `‖Φz‖ = r`. The solver picks the global minimizer on the sphere, including
//! the degenerate case where the multiplier sits at an eigenvalue.
//!
//! `cargo run --release --example vc_lsm`

use krein::kernels::KernelSpec;
use krein::landmarks::{fit_landmarks, uniform_landmarks, VectorKernel};
use krein::learners::{build_feature_map, feasible_point, vc_lsm_lowrank, vc_lsm_objective, RegPair};
use krein::Rng;
use nalgebra::{DMatrix, DVector};

fn main() -> krein::Result<()> {
    let (n, m) = (300, 30);
    let mut rng = Rng::new(4);
    let x = DMatrix::from_fn(n, 2, |_, _| rng.normal());
    let y = DVector::from_fn(n, |i, _| x[(i, 0)] * x[(i, 1)] + 0.1 * rng.normal());
    let spec = KernelSpec::RL_SIGMOID;
    let source = VectorKernel { spec: &spec, x: &x };
    let (factor, k_xz) = fit_landmarks(&source, uniform_landmarks(n, m, &mut rng)?, None)?;
    let map = build_feature_map(&factor, &k_xz)?;
    let reg = RegPair::new(1e-3, 1e-2)?;

    let full = y.norm();
    println!("‖y‖ = {full:.3}");
    println!("{:>8} {:>10} {:>12} {:>10} {:>12}", "r", "‖Φz‖", "objective", "ν", "best random");
    for scale in [0.25, 0.5, 1.0, 2.0] {
        let r = scale * full;
        let model = vc_lsm_lowrank(&map, &y, reg, r)?;
        let achieved = (&map.phi * &model.z).norm();
        let objective = vc_lsm_objective(&map, &y, reg, &model.z);
        let best_random = (0..2000)
            .map(|_| feasible_point(&map, r, &mut rng).map(|z| vc_lsm_objective(&map, &y, reg, &z)))
            .collect::<krein::Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        println!(
            "{r:>8.3} {achieved:>10.3} {objective:>12.5} {:>10.4} {best_random:>12.5}",
            model.diagnostics.multiplier.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
