//! Cross-validated classification from a dissimilarity matrix alone. City-block
//! distances are not Euclidean, so negative double-centering yields an
//! indefinite similarity, which the Kreĭn learners use as-is.
//!
//! `cargo run --release --example dissimilarity_cv`

use krein::data::{double_center_neg, make_synthetic, DissimilarityMatrix, SyntheticKind};
use krein::harness::{cv_evaluate, CvConfig, CvTask, KernelData};
use krein::Rng;
use nalgebra::{DMatrix, DVector};

fn main() -> krein::Result<()> {
    let mut rng = Rng::new(7);
    let set = make_synthetic(SyntheticKind::Concentric, 300, 3, &mut rng)?;
    let n = set.len();
    let d = DMatrix::from_fn(n, n, |i, j| (set.x.row(i) - set.x.row(j)).abs().sum());
    let s = double_center_neg(&DissimilarityMatrix::new(d, false)?);
    println!("indefiniteness of the similarity: {:.4}", s.eigen().indefiniteness()?);

    let y = DVector::from_vec(set.y.clone().expect("labelled"));
    let config = CvConfig {
        folds: 5,
        landmarks: vec![20, 60],
        tasks: vec![CvTask::KreinLsm, CvTask::KreinShSvm, CvTask::FlipShSvm, CvTask::SfLsm, CvTask::Constant],
        seed: 7,
        ..CvConfig::default()
    };
    let report = cv_evaluate(&KernelData::Precomputed(s), &y, &config)?;
    println!("{:<14} {:>4} {:>18}", "learner", "m", "error % (std)");
    for row in &report.rows {
        let m = row.landmarks.map_or_else(|| "-".to_string(), |m| m.to_string());
        println!("{:<14} {m:>4} {:>18}", row.task.to_string(), row.summary());
    }
    for w in &report.warnings {
        println!("warning: {w:?}");
    }
    Ok(())
}
