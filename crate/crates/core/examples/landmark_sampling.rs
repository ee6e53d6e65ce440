//! Median Frobenius error of rank-k approximations for the three landmark
//! samplers on a 500-point difference-of-Gaussians kernel.
//!
//! `cargo run --example landmark_sampling`

use krein::harness::{approx_sweep, median_rows, KernelData};
use krein::kernels::{gram, KernelSpec};
use krein::landmarks::Sampler;
use krein::Rng;
use nalgebra::DMatrix;

fn main() -> krein::Result<()> {
    let n = 500;
    let mut rng = Rng::new(909);
    let x = DMatrix::from_fn(n, 3, |_, _| rng.normal());
    let spec = KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 };
    let reference = gram(&spec, &x)?;
    let data = KernelData::Vectors { spec, x };
    let ks = [10, 20, 40, 80, 160];
    let equal: Vec<(usize, usize)> = ks.iter().map(|&k| (k, k)).collect();
    let log: Vec<(usize, usize)> = ks
        .iter()
        .map(|&k| (k, ((k as f64 * (n as f64).ln()).ceil() as usize).min(n)))
        .collect();

    let mut rows = median_rows(&approx_sweep(
        &data,
        &reference,
        &[Sampler::Uniform, Sampler::Leverage, Sampler::KMeansPP],
        &equal,
        10,
        9,
        None,
    )?);
    rows.extend(median_rows(&approx_sweep(
        &data,
        &reference,
        &[Sampler::Uniform, Sampler::Leverage, Sampler::KMeansPP],
        &log,
        10,
        9,
        None,
    )?));
    println!("‖K‖_F = {:.4}", reference.norm());
    println!("{:<10} {:>5} {:>5} {:>14} {:>10}", "sampler", "k", "l", "median error", "seconds");
    for r in rows {
        println!(
            "{:<10} {:>5} {:>5} {:>14.6} {:>10.4}",
            r.sampler.to_string(),
            r.k,
            r.l,
            r.frobenius_error,
            r.seconds
        );
    }
    Ok(())
}
