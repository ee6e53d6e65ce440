//! Landmark selection: uniform subsets, approximate leverage scores and
//! approximate kernel K-means++ seeding.
//!
//! The two data-dependent samplers start from a sketch: a one-shot
//! eigendecomposition `K̃ = Ũ Λ Ũᵀ` built on `m₀` uniform landmarks. Leverage
//! scores are the squared row norms of `Ũ`; K-means++ measures distances
//! between rows of `L̃ = Ũ |Λ|^{1/2}`, the factor of the flip-spectrum sketch
//! `H̃ = L̃ L̃ᵀ`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::kernels::{gram_cross, KernelSpec};
use crate::linalg::SymMatrix;
use crate::nystroem::{LandmarkSet, NystroemFactor, OneShotEigen};
use crate::Rng;

/// Anything that can produce kernel columns on demand.
pub trait KernelSource: Sync {
    /// Number of instances `n`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `K_XZ` for landmark indices `idx` (`n x |idx|`).
    fn cross(&self, idx: &[usize]) -> Result<DMatrix<f64>>;
}

impl KernelSource for SymMatrix {
    fn len(&self) -> usize {
        self.order()
    }

    fn cross(&self, idx: &[usize]) -> Result<DMatrix<f64>> {
        check_indices(idx, self.order())?;
        Ok(self.columns(idx))
    }
}

/// A kernel function over the rows of a data matrix.
#[derive(Debug, Clone, Copy)]
pub struct VectorKernel<'a> {
    pub spec: &'a KernelSpec,
    pub x: &'a DMatrix<f64>,
}

impl KernelSource for VectorKernel<'_> {
    fn len(&self) -> usize {
        self.x.nrows()
    }

    fn cross(&self, idx: &[usize]) -> Result<DMatrix<f64>> {
        check_indices(idx, self.x.nrows())?;
        gram_cross(self.spec, self.x, &self.x.select_rows(idx))
    }
}

fn check_indices(idx: &[usize], n: usize) -> Result<()> {
    match idx.iter().find(|&&i| i >= n) {
        Some(i) => Err(Error::invalid(format!("index {i} out of range for n = {n}"))),
        None => Ok(()),
    }
}

/// Fits a Nyström factor on `landmarks`, returning it with `K_XZ`.
pub fn fit_landmarks(
    source: &dyn KernelSource,
    landmarks: LandmarkSet,
    pinv_tol: Option<f64>,
) -> Result<(NystroemFactor, DMatrix<f64>)> {
    let k_xz = source.cross(&landmarks.indices)?;
    let block = SymMatrix::symmetrize(k_xz.select_rows(&landmarks.indices));
    let factor = NystroemFactor::fit_with(&block, landmarks, pinv_tol)?;
    Ok((factor, k_xz))
}

/// Landmarks with non-fatal notes from the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub landmarks: LandmarkSet,
    pub warnings: Vec<Warning>,
}

/// `m` distinct indices, uniformly without replacement.
pub fn uniform_landmarks(n: usize, m: usize, rng: &mut Rng) -> Result<LandmarkSet> {
    if m == 0 || m > n {
        return Err(Error::InvalidBudget {
            requested: m,
            available: n,
        });
    }
    // partial Fisher-Yates
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = i + rng.below(n - i);
        all.swap(i, j);
    }
    all.truncate(m);
    LandmarkSet::new(all, n)
}

/// Uniform-landmark one-shot eigendecomposition used to guide the samplers.
#[derive(Debug, Clone)]
pub struct Sketch {
    pub eig: OneShotEigen,
    /// `Ũ |Λ|^{1/2}` (`n x rank`).
    pub features: DMatrix<f64>,
    pub size: usize,
}

/// `⌈m ln n⌉`, capped at `n`.
pub fn default_sketch_size(m: usize, n: usize) -> usize {
    if n <= 1 {
        return n;
    }
    ((m as f64 * (n as f64).ln()).ceil() as usize).clamp(1, n)
}

pub fn build_sketch(source: &dyn KernelSource, size: usize, rng: &mut Rng) -> Result<Sketch> {
    let n = source.len();
    let landmarks = uniform_landmarks(n, size, rng)?;
    let (factor, k_xz) = fit_landmarks(source, landmarks, None)?;
    let eig = factor.one_shot_eigen(&k_xz)?;
    let mut features = eig.vectors.clone();
    for (j, l) in eig.values.iter().enumerate() {
        features.column_mut(j).scale_mut(l.abs().sqrt());
    }
    Ok(Sketch {
        eig,
        features,
        size,
    })
}

/// `ℓᵢ = ‖Ũ(i)‖²`.
pub fn leverage_scores(eig: &OneShotEigen) -> Vec<f64> {
    eig.vectors.row_iter().map(|r| r.norm_squared()).collect()
}

/// `m` independent draws with probability `ℓᵢ / Σℓ`; repeated draws are
/// merged and counted in the multiplicity.
pub fn sample_leverage(scores: &[f64], m: usize, rng: &mut Rng) -> Result<Selection> {
    let n = scores.len();
    if m == 0 {
        return Err(Error::InvalidBudget {
            requested: 0,
            available: n,
        });
    }
    if scores.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
        return Err(Error::invalid("leverage scores must be finite and nonnegative"));
    }
    if scores.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateScores);
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = Vec::new();
    for _ in 0..m {
        let i = rng.weighted(scores);
        let c = counts.entry(i).or_insert(0);
        if *c == 0 {
            order.push(i);
        }
        *c += 1;
    }
    let multiplicity = order.iter().map(|i| counts[i]).collect();
    let mut warnings = Vec::new();
    if order.len() < m {
        warnings.push(Warning::DuplicateDraws {
            draws: m,
            distinct: order.len(),
        });
    }
    Ok(Selection {
        landmarks: LandmarkSet {
            indices: order,
            multiplicity,
        },
        warnings,
    })
}

/// One K-means++ seeding pass over the rows of `features`.
pub fn kmeanspp_landmarks(features: &DMatrix<f64>, m: usize, rng: &mut Rng) -> Result<Selection> {
    let n = features.nrows();
    if m == 0 || m > n {
        return Err(Error::InvalidBudget {
            requested: m,
            available: n,
        });
    }
    let rows: Vec<Vec<f64>> = features.row_iter().map(|r| r.iter().copied().collect()).collect();
    let sq_dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let first = rng.below(n);
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = rows.par_iter().map(|r| sq_dist(r, &rows[first])).collect();
    dist[first] = 0.0;
    let mut warnings = Vec::new();
    while chosen.len() < m {
        if dist.iter().sum::<f64>() <= 0.0 {
            log::warn!("only {} distinct feature rows, {m} landmarks requested", chosen.len());
            warnings.push(Warning::DuplicateCollapse {
                requested: m,
                selected: chosen.len(),
            });
            break;
        }
        let next = rng.weighted(&dist);
        chosen.push(next);
        let z = &rows[next];
        dist.par_iter_mut().zip(rows.par_iter()).for_each(|(d, r)| {
            *d = d.min(sq_dist(r, z));
        });
        dist[next] = 0.0;
    }
    Ok(Selection {
        landmarks: LandmarkSet::new(chosen, n)?,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    Uniform,
    Leverage,
    KMeansPP,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Sampler::Uniform),
            "leverage" => Ok(Sampler::Leverage),
            "kmeanspp" | "kmeans++" | "k-means-pp" => Ok(Sampler::KMeansPP),
            other => Err(Error::Config(format!(
                "unknown sampler {other:?} (expected uniform, leverage or kmeanspp)"
            ))),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::Uniform => "uniform",
            Sampler::Leverage => "leverage",
            Sampler::KMeansPP => "kmeanspp",
        })
    }
}

impl Sampler {
    /// Selects up to `m` landmarks. `sketch_size` defaults to `⌈m ln n⌉`.
    pub fn select(
        self,
        source: &dyn KernelSource,
        m: usize,
        sketch_size: Option<usize>,
        rng: &mut Rng,
    ) -> Result<Selection> {
        let n = source.len();
        if m == 0 || m > n {
            return Err(Error::InvalidBudget {
                requested: m,
                available: n,
            });
        }
        if self == Sampler::Uniform {
            return Ok(Selection {
                landmarks: uniform_landmarks(n, m, rng)?,
                warnings: Vec::new(),
            });
        }
        let size = sketch_size.unwrap_or_else(|| default_sketch_size(m, n));
        let sketch = build_sketch(source, size, rng)?;
        let mut selection = match self {
            // rank-m scores: over the whole sketch they flatten to 1 once m₀ reaches n
            Sampler::Leverage => sample_leverage(&leverage_scores(&sketch.eig.truncate(m)), m, rng)?,
            Sampler::KMeansPP => kmeanspp_landmarks(&sketch.features, m, rng)?,
            Sampler::Uniform => unreachable!(),
        };
        selection.warnings.splice(0..0, sketch.eig.warnings);
        Ok(selection)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_distance, sym_eigen};
    use nalgebra::DVector;

    fn random_symmetric(n: usize, seed: u64) -> SymMatrix {
        let mut rng = Rng::new(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.normal());
        SymMatrix::symmetrize(&a + a.transpose())
    }

    #[test]
    fn uniform_examples() {
        let mut rng = Rng::new(1);
        let mut all = uniform_landmarks(7, 7, &mut rng).unwrap().indices;
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        assert!(matches!(uniform_landmarks(5, 0, &mut rng), Err(Error::InvalidBudget { .. })));
        assert!(matches!(uniform_landmarks(5, 6, &mut rng), Err(Error::InvalidBudget { .. })));
        let s = uniform_landmarks(100, 30, &mut rng).unwrap();
        assert_eq!(s.len(), 30);
    }

    #[test]
    fn uniform_single_draw_frequencies() {
        // n = 10⁴, m = 1: each count is Binomial(10⁵, 10⁻⁴), mean 10, σ ≈ 3.16.
        // A per-index 4σ band is too tight for 10⁴ simultaneous checks, so the
        // oracle is a chi-square statistic, which must sit within 4σ of its mean.
        let (n, draws) = (10_000usize, 100_000usize);
        let mut counts = vec![0usize; n];
        let mut rng = Rng::new(2024);
        for _ in 0..draws {
            counts[uniform_landmarks(n, 1, &mut rng).unwrap().indices[0]] += 1;
        }
        let expect = draws as f64 / n as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        let dof = (n - 1) as f64;
        assert!((chi2 - dof).abs() <= 4.0 * (2.0 * dof).sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn uniform_pairs_are_equiprobable() {
        let mut counts = BTreeMap::new();
        let mut rng = Rng::new(5);
        let draws = 60_000;
        for _ in 0..draws {
            let mut s = uniform_landmarks(4, 2, &mut rng).unwrap().indices;
            s.sort_unstable();
            *counts.entry(s).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - draws as f64 * p).abs() <= 4.0 * sigma);
        }
    }

    #[test]
    fn full_sketch_is_the_flip_spectrum() {
        let k = random_symmetric(15, 3);
        let mut rng = Rng::new(4);
        let sketch = build_sketch(&k, 15, &mut rng).unwrap();
        let h = sym_eigen(&k).flip_spectrum();
        let llt = &sketch.features * sketch.features.transpose();
        assert!(frobenius_distance(&llt, &h).unwrap() <= 1e-6 * h.norm());
        assert_eq!(sketch.features.nrows(), 15);

        let mut rng = Rng::new(5);
        let a = DMatrix::from_fn(10, 10, |_, _| rng.normal());
        let psd = SymMatrix::symmetrize(&a * a.transpose());
        let sketch = build_sketch(&psd, 10, &mut rng).unwrap();
        let llt = &sketch.features * sketch.features.transpose();
        assert!(frobenius_distance(&llt, &psd).unwrap() <= 1e-6 * psd.norm());
    }

    #[test]
    fn sketch_is_deterministic() {
        let k = random_symmetric(30, 6);
        let a = build_sketch(&k, 10, &mut Rng::new(9)).unwrap();
        let b = build_sketch(&k, 10, &mut Rng::new(9)).unwrap();
        assert_eq!(a.features, b.features);
        assert_eq!(a.eig.values, b.eig.values);
        // L̃ L̃ᵀ is PSD
        let llt = SymMatrix::symmetrize(&a.features * a.features.transpose());
        assert!(sym_eigen(&llt).values.min() >= -1e-8 * llt.norm());
    }

    fn eig_from(vectors: DMatrix<f64>, values: Vec<f64>) -> OneShotEigen {
        OneShotEigen {
            vectors,
            values: DVector::from_vec(values),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn leverage_examples() {
        let u = DMatrix::identity(5, 2);
        assert_eq!(leverage_scores(&eig_from(u, vec![1.0, -1.0])), vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        let h = 0.5f64.sqrt();
        let s = leverage_scores(&eig_from(DMatrix::from_column_slice(2, 1, &[h, h]), vec![3.0]));
        assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn leverage_sums_to_sketch_rank_and_ignores_signs() {
        let k = random_symmetric(40, 7);
        let sketch = build_sketch(&k, 12, &mut Rng::new(1)).unwrap();
        let s = leverage_scores(&sketch.eig);
        let total: f64 = s.iter().sum();
        assert!((total - sketch.eig.rank() as f64).abs() <= 1e-8 * 12.0);
        assert!(s.iter().all(|&v| v >= 0.0));
        let mut flipped = sketch.eig.clone();
        flipped.values.iter_mut().for_each(|v| *v = -*v);
        assert_eq!(leverage_scores(&flipped), s);
    }

    #[test]
    fn sample_leverage_examples() {
        let mut rng = Rng::new(11);
        let sel = sample_leverage(&[1.0, 0.0, 0.0, 0.0], 5, &mut rng).unwrap();
        assert_eq!(sel.landmarks.indices, vec![0]);
        assert_eq!(sel.landmarks.multiplicity, vec![5]);
        assert_eq!(sel.warnings, vec![Warning::DuplicateDraws { draws: 5, distinct: 1 }]);
        assert!(matches!(sample_leverage(&[0.0; 4], 2, &mut rng), Err(Error::DegenerateScores)));
    }

    #[test]
    fn sample_leverage_uniform_frequencies() {
        let n = 20;
        let draws = 100_000;
        let scores = vec![0.3; n];
        let sel = sample_leverage(&scores, draws, &mut Rng::new(12)).unwrap();
        assert_eq!(sel.landmarks.multiplicity.iter().sum::<usize>(), draws);
        let p = 1.0 / n as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in &sel.landmarks.multiplicity {
            assert!((c as f64 - draws as f64 * p).abs() <= 4.0 * sigma);
        }
    }

    #[test]
    fn kmeanspp_single_is_uniform_and_distinct() {
        let mut rng = Rng::new(13);
        let f = DMatrix::from_fn(30, 3, |_, _| rng.normal());
        let mut counts = [0usize; 30];
        for _ in 0..30_000 {
            counts[kmeanspp_landmarks(&f, 1, &mut rng).unwrap().landmarks.indices[0]] += 1;
        }
        let sigma = (30_000.0 / 30.0 * (29.0 / 30.0) as f64).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 4.0 * sigma);
        }
        let sel = kmeanspp_landmarks(&f, 30, &mut rng).unwrap();
        let mut idx = sel.landmarks.indices.clone();
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 30);
    }

    #[test]
    fn kmeanspp_second_pick_crosses_clusters() {
        // two 3-point clusters of diameter ~0.02 at distance 100
        let pts = [
            [0.0, 0.0],
            [0.01, 0.0],
            [0.0, 0.01],
            [100.0, 0.0],
            [100.01, 0.0],
            [100.0, 0.01],
        ];
        let f = DMatrix::from_fn(6, 2, |i, j| pts[i][j]);
        // exact D² probability of staying in the first cluster from point 0
        let d: Vec<f64> = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
        let p_same = (d[1] + d[2]) / d.iter().sum::<f64>();
        assert!(p_same < 1e-7);
        let mut crossed = 0;
        for seed in 0..1000 {
            let sel = kmeanspp_landmarks(&f, 2, &mut Rng::new(seed)).unwrap();
            let [a, b] = sel.landmarks.indices[..] else { panic!() };
            if (a < 3) != (b < 3) {
                crossed += 1;
            }
        }
        assert!(crossed as f64 >= 0.99 * 1000.0);
    }

    #[test]
    fn kmeanspp_collapses_duplicates() {
        let f = DMatrix::from_row_slice(5, 1, &[1.0, 1.0, 2.0, 2.0, 2.0]);
        let sel = kmeanspp_landmarks(&f, 4, &mut Rng::new(3)).unwrap();
        assert_eq!(sel.landmarks.len(), 2);
        assert_eq!(sel.warnings, vec![Warning::DuplicateCollapse { requested: 4, selected: 2 }]);
        let vals: Vec<f64> = sel.landmarks.indices.iter().map(|&i| f[(i, 0)]).collect();
        assert!(vals.contains(&1.0) && vals.contains(&2.0));
    }

    #[test]
    fn sampler_dispatch_is_deterministic() {
        let mut rng = Rng::new(0);
        let x = DMatrix::from_fn(60, 3, |_, _| rng.normal());
        let spec = KernelSpec::GaussianDiff { sigma1: 1.0, sigma2: 3.0 };
        let src = VectorKernel { spec: &spec, x: &x };
        for sampler in [Sampler::Uniform, Sampler::Leverage, Sampler::KMeansPP] {
            let a = sampler.select(&src, 8, None, &mut Rng::new(77)).unwrap();
            let b = sampler.select(&src, 8, None, &mut Rng::new(77)).unwrap();
            assert_eq!(a, b);
            assert!(a.landmarks.len() <= 8);
        }
        assert_eq!("kmeanspp".parse::<Sampler>().unwrap(), Sampler::KMeansPP);
        assert!(matches!("greedy".parse::<Sampler>(), Err(Error::Config(_))));
        assert_eq!(default_sketch_size(10, 500), 63);
        assert_eq!(default_sketch_size(200, 500), 500);
    }

    #[test]
    fn vector_source_matches_precomputed() {
        let mut rng = Rng::new(21);
        let x = DMatrix::from_fn(20, 2, |_, _| rng.normal());
        let spec = KernelSpec::Gaussian { sigma: 1.5 };
        let k = crate::kernels::gram(&spec, &x).unwrap();
        let idx = [4, 1, 9];
        let (fa, ka) = fit_landmarks(&VectorKernel { spec: &spec, x: &x }, LandmarkSet::new(idx.to_vec(), 20).unwrap(), None).unwrap();
        let (fb, kb) = fit_landmarks(&k, LandmarkSet::new(idx.to_vec(), 20).unwrap(), None).unwrap();
        assert!((ka - kb).amax() < 1e-15);
        assert_eq!(fa.effective_rank, fb.effective_rank);
    }
}
