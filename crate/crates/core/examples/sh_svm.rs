//! Squared-hinge classification on Nyström features of an indefinite kernel,
//! next to the variant that trains on the flipped spectrum. The trained model
//! survives a JSON round trip and predicts directly on new points.
//!
//! `cargo run --release --example sh_svm`

use krein::data::{make_synthetic, misclassification, SyntheticKind};
use krein::kernels::KernelSpec;
use krein::landmarks::{fit_landmarks, Sampler, VectorKernel};
use krein::learners::{build_feature_map, flip_shsvm_baseline, sh_svm_lowrank, LowRankModel, RegPair};
use krein::Rng;
use nalgebra::DVector;

fn main() -> krein::Result<()> {
    let mut rng = Rng::new(5);
    let train = make_synthetic(SyntheticKind::Concentric, 600, 2, &mut rng)?;
    let test = make_synthetic(SyntheticKind::Concentric, 400, 2, &mut rng)?;
    let y = DVector::from_vec(train.y.clone().expect("labelled"));
    let yt = DVector::from_vec(test.y.clone().expect("labelled"));

    let spec = KernelSpec::GaussianDiff { sigma1: 0.5, sigma2: 2.0 };
    let source = VectorKernel { spec: &spec, x: &train.x };
    let selection = Sampler::KMeansPP.select(&source, 40, None, &mut rng)?;
    let (factor, k_xz) = fit_landmarks(&source, selection.landmarks, None)?;
    let map = build_feature_map(&factor, &k_xz)?;
    let rows = train.x.select_rows(&factor.landmarks.indices);

    let krein = sh_svm_lowrank(&map, &y, RegPair::new(1e-4, 1e-2)?)?.with_kernel(spec, rows.clone());
    let flip = flip_shsvm_baseline(&map, &y, 1e-4)?.with_kernel(spec, rows);
    for (name, model) in [("krein-sh-svm", &krein), ("flip-sh-svm", &flip)] {
        let err = misclassification(&model.predict_points(&test.x)?, &yt)?;
        println!(
            "{name:<13} newton steps {:>3}  ‖∇‖ {:.1e}  test error {:.2}%",
            model.diagnostics.iterations,
            model.diagnostics.gradient_norm.unwrap_or(f64::NAN),
            100.0 * err
        );
    }

    let restored = LowRankModel::from_json(&krein.to_json()?)?;
    let drift = (restored.predict_points(&test.x)? - krein.predict_points(&test.x)?).amax();
    println!("max prediction change after JSON round trip: {drift:.1e}");
    Ok(())
}
