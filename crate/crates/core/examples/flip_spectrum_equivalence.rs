//! With equal penalties on both parts of the spectrum, Kreĭn ridge regression
//! gives the same predictions as ridge regression on the flipped (PSD) kernel
//! followed by the sign-correcting out-of-sample map.
//!
//! `cargo run --release --example flip_spectrum_equivalence`

use krein::kernels::{gram, gram_cross, KernelSpec};
use krein::learners::{flip_krr_baseline, krein_krr_full, RegPair};
use krein::Rng;
use nalgebra::{DMatrix, DVector};

fn main() -> krein::Result<()> {
    let (n, q) = (150, 50);
    let mut rng = Rng::new(6);
    let x = DMatrix::from_fn(n, 3, |_, _| rng.normal());
    let xq = DMatrix::from_fn(q, 3, |_, _| rng.normal());
    let y = DVector::from_fn(n, |i, _| x[(i, 0)] - x[(i, 2)].powi(2));
    let spec = KernelSpec::RL_SIGMOID;
    let eig = gram(&spec, &x)?.eigen();
    let k_qx = gram_cross(&spec, &xq, &x)?;
    println!("indefiniteness of K: {:.4}", eig.indefiniteness()?);

    for lambda in [1e-6, 1e-3, 1e-1] {
        let krein = krein_krr_full(&eig, &y, RegPair::equal(lambda)?)?;
        let flip = flip_krr_baseline(&eig, &y, lambda)?;
        let train = (krein.training_predictions() - &flip.training_predictions).amax();
        let test = (krein.predict_batch(&k_qx)? - &k_qx * &flip.beta).amax();
        println!("λ = {lambda:.0e}: max difference train {train:.1e}, test {test:.1e}");
    }
    let asym = krein_krr_full(&eig, &y, RegPair::new(1e-3, 1.0)?)?;
    let flip = flip_krr_baseline(&eig, &y, 1e-3)?;
    println!(
        "λ+ = 1e-3, λ- = 1: train predictions now differ by {:.3}",
        (asym.training_predictions() - &flip.training_predictions).amax()
    );
    Ok(())
}
