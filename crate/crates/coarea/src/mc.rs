//! Monte Carlo verification harness: draw from a base model, push the
//! sample through a map, and compare the empirical distribution against a
//! computed density.
//!
//! Batches are bit-reproducible: sampling is sharded over 64 fixed streams
//! derived from (seed, shard index), so the same seed gives byte-identical
//! batches regardless of how many threads run the shards.

use crate::catalog::{DegenerateNormal, ProductModel, UnivariateModel};
use crate::density::{GridDensity, ReferenceMeasure};
use crate::error::{Error, Result};
use crate::expr::MapExpr;
use crate::rng::SplitMix64;

const SHARDS: usize = 64;

/// Source of iid vector draws for the harness.
pub trait VectorSampler: Sync {
    fn dim(&self) -> usize;
    fn sample_into(&self, rng: &mut SplitMix64, out: &mut Vec<f64>);
    fn label(&self) -> String;
}

impl VectorSampler for UnivariateModel {
    fn dim(&self) -> usize {
        1
    }
    fn sample_into(&self, rng: &mut SplitMix64, out: &mut Vec<f64>) {
        out.clear();
        out.push(self.sample(rng));
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

impl VectorSampler for ProductModel {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn sample_into(&self, rng: &mut SplitMix64, out: &mut Vec<f64>) {
        ProductModel::sample_into(self, rng, out)
    }
    fn label(&self) -> String {
        format!(
            "product[{}]",
            self.components.iter().map(|m| m.name.as_str()).collect::<Vec<_>>().join(",")
        )
    }
}

impl VectorSampler for DegenerateNormal {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn sample_into(&self, rng: &mut SplitMix64, out: &mut Vec<f64>) {
        *out = self.sample(rng);
    }
    fn label(&self) -> String {
        format!("normal(rank {})", self.rank())
    }
}

/// Pushed sample batch, stored row-major (`len x dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    points: Vec<f64>,
    dim: usize,
    pub seed: u64,
    pub generator_name: String,
    /// Draws rejected because the map was undefined there, then redrawn.
    pub resampled: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }

    /// Scalar view of a one-dimensional batch.
    pub fn scalars(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        Ok(&self.points)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in 0..self.dim {
            if a > 0 {
                out.push(',');
            }
            out.push_str(&format!("y{}", a + 1));
        }
        out.push('\n');
        for row in self.rows() {
            for (a, v) in row.iter().enumerate() {
                if a > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Draws `n` samples, pushes them through `phi`, and keeps shard order so
/// equal seeds give byte-identical batches.
pub fn push_samples(
    sampler: &dyn VectorSampler,
    phi: &MapExpr,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::Config("push_samples needs n >= 1".into()));
    }
    if phi.input_dim() != sampler.dim() {
        return Err(Error::DimensionMismatch {
            expected: sampler.dim(),
            found: phi.input_dim(),
        });
    }
    let out_dim = phi.output_dim();
    let per_shard = n.div_ceil(SHARDS);
    let shard_sizes: Vec<usize> = (0..SHARDS)
        .map(|s| per_shard.min(n.saturating_sub(s * per_shard)))
        .collect();

    let threads = crate::pushforward::thread_count().min(SHARDS);
    let mut shard_results: Vec<Result<(Vec<f64>, u64)>> = Vec::with_capacity(SHARDS);
    if threads <= 1 {
        for (s, &size) in shard_sizes.iter().enumerate() {
            shard_results.push(run_shard(sampler, phi, seed, s as u64, size, out_dim));
        }
    } else {
        shard_results = std::thread::scope(|scope| {
            let handles: Vec<_> = shard_sizes
                .iter()
                .enumerate()
                .map(|(s, &size)| {
                    scope.spawn(move || run_shard(sampler, phi, seed, s as u64, size, out_dim))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampler shard panicked")).collect()
        });
    }

    let mut points = Vec::with_capacity(n * out_dim);
    let mut resampled = 0;
    for r in shard_results {
        let (chunk, re) = r?;
        points.extend_from_slice(&chunk);
        resampled += re;
    }
    Ok(SampleBatch {
        points,
        dim: out_dim,
        seed,
        generator_name: format!("splitmix64/{}", sampler.label()),
        resampled,
    })
}

fn run_shard(
    sampler: &dyn VectorSampler,
    phi: &MapExpr,
    seed: u64,
    shard: u64,
    size: usize,
    out_dim: usize,
) -> Result<(Vec<f64>, u64)> {
    let mut rng = SplitMix64::stream(seed, shard);
    let mut x = Vec::new();
    let mut out = Vec::with_capacity(size * out_dim);
    let mut resampled = 0u64;
    for _ in 0..size {
        let mut attempts = 0;
        loop {
            sampler.sample_into(&mut rng, &mut x);
            match phi.eval(&x) {
                Ok(y) => {
                    out.extend_from_slice(&y);
                    break;
                }
                Err(_) => {
                    resampled += 1;
                    attempts += 1;
                    if attempts > 1000 {
                        return Err(Error::Domain(
                            "map rejected 1000 consecutive draws; support and map domain disagree"
                                .into(),
                        ));
                    }
                }
            }
        }
    }
    Ok((out, resampled))
}

/// Exact Kolmogorov-Smirnov statistic of a scalar batch against `cdf`:
/// `sup_t |F_n(t) - cdf(t)|` over the sorted sample.
pub fn ks_distance(batch: &SampleBatch, cdf: &dyn Fn(f64) -> f64) -> Result<f64> {
    let mut xs = batch.scalars()?.to_vec();
    if xs.is_empty() {
        return Err(Error::Config("empty batch".into()));
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(sup)
}

/// Bins a batch onto the cells of a Lebesgue grid density and reports
/// `(sup_error, l1_error)` between the empirical density and the grid values.
pub fn histogram_compare(grid: &GridDensity, batch: &SampleBatch) -> Result<(f64, f64)> {
    if batch.is_empty() {
        return Err(Error::Config("empty batch".into()));
    }
    if batch.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: batch.dim() });
    }
    if !matches!(grid.reference, ReferenceMeasure::Lebesgue { .. }) {
        return Err(Error::Dimension(
            "histogram comparison needs a Lebesgue grid; pull carrier densities back to \
             parameter space first"
                .into(),
        ));
    }
    let mut counts = vec![0u64; grid.values.len()];
    for row in batch.rows() {
        if let Some(cell) = grid.cell_of(row) {
            counts[cell] += 1;
        }
    }
    let n = batch.len() as f64;
    let cell = grid.cell_volume();
    let mut sup = 0.0f64;
    let mut l1 = 0.0f64;
    for (c, v) in counts.iter().zip(&grid.values) {
        let emp = *c as f64 / (n * cell);
        sup = sup.max((emp - v).abs());
        l1 += (emp - v).abs() * cell;
    }
    Ok((sup, l1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensitySpec;
    use crate::geom::BoundingBox;
    use crate::pushforward::pushforward_coarea;
    use crate::quad::std_normal_cdf;

    #[test]
    fn constant_map_pushes_to_constants() {
        let u = UnivariateModel::uniform(0.0, 1.0).unwrap();
        let phi = MapExpr::parse("0*x1", 1, 1).unwrap();
        let b = push_samples(&u, &phi, 100, 7).unwrap();
        assert_eq!(b.len(), 100);
        assert!(b.scalars().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_uniform_mean() {
        let u = UnivariateModel::uniform(0.0, 1.0).unwrap();
        let phi = MapExpr::parse("x1", 1, 1).unwrap();
        let b = push_samples(&u, &phi, 1_000_000, 20240907).unwrap();
        let mean: f64 = b.scalars().unwrap().iter().sum::<f64>() / b.len() as f64;
        // 3 sigma / sqrt(N) with sigma = 1/sqrt(12)
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn sum_of_normals_variance() {
        let p = ProductModel::iid(UnivariateModel::std_normal(), 2).unwrap();
        let phi = MapExpr::parse("x1+x2", 2, 1).unwrap();
        let b = push_samples(&p, &phi, 1_000_000, 555).unwrap();
        let xs = b.scalars().unwrap();
        let mean: f64 = xs.iter().sum::<f64>() / xs.len() as f64;
        let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        assert!((var - 2.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn equal_seeds_give_byte_identical_batches() {
        let p = ProductModel::iid(UnivariateModel::std_normal(), 2).unwrap();
        let phi = MapExpr::parse("x1*x2", 2, 1).unwrap();
        let a = push_samples(&p, &phi, 10_000, 99).unwrap();
        let b = push_samples(&p, &phi, 10_000, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        let c = push_samples(&p, &phi, 10_000, 100).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn domain_errors_are_resampled_and_counted() {
        // 1/x1 is undefined at 0; uniform draws occasionally need no retry,
        // but log(x1) on [-1, 1] rejects half the draws on average
        let u = UnivariateModel::uniform(-1.0, 1.0).unwrap();
        let phi = MapExpr::parse("log(x1)", 1, 1).unwrap();
        let b = push_samples(&u, &phi, 20_000, 3).unwrap();
        assert_eq!(b.len(), 20_000);
        assert!(b.resampled > 15_000, "resampled {}", b.resampled);
        assert!(b.scalars().unwrap().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ks_of_true_model_is_small_and_of_shifted_model_is_large() {
        let u = UnivariateModel::uniform(0.0, 1.0).unwrap();
        let phi = MapExpr::parse("x1", 1, 1).unwrap();
        let b = push_samples(&u, &phi, 1_000_000, 424242).unwrap();
        let ks = ks_distance(&b, &|t| t.clamp(0.0, 1.0)).unwrap();
        assert!(ks < 0.002, "ks {ks}");
        // self-comparison: empirical step function against itself
        let xs = b.scalars().unwrap().to_vec();
        let mut sorted = xs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let self_cdf = move |t: f64| {
            let idx = sorted.partition_point(|&v| v <= t);
            idx as f64 / sorted.len() as f64
        };
        let ks_self = ks_distance(&b, &self_cdf).unwrap();
        assert!(ks_self <= 1.0 / 1_000_000.0 + 1e-12, "ks_self {ks_self}");
        // bulk displacement: shifted cdf
        let ks_shift = ks_distance(&b, &|t| (t - 0.5).clamp(0.0, 1.0)).unwrap();
        assert!(ks_shift >= 0.49, "ks_shift {ks_shift}");
    }

    #[test]
    fn dkw_sanity_over_seeds() {
        let u = UnivariateModel::uniform(0.0, 1.0).unwrap();
        let phi = MapExpr::parse("x1", 1, 1).unwrap();
        const N: usize = 10_000;
        let mut worst = 0.0f64;
        for seed in 0..100u64 {
            let b = push_samples(&u, &phi, N, 1000 + seed).unwrap();
            let ks = ks_distance(&b, &|t| t.clamp(0.0, 1.0)).unwrap();
            worst = worst.max(ks);
        }
        // 0.999-quantile bound 1.949/sqrt(N), 10% slack
        assert!(worst <= 1.1 * 1.949 / (N as f64).sqrt(), "worst {worst}");
    }

    #[test]
    fn histogram_compare_sum_of_normals() {
        let p = ProductModel::iid(UnivariateModel::std_normal(), 2).unwrap();
        let fx = DensitySpec::from_product_model(&p);
        let phi = MapExpr::parse("x1+x2", 2, 1).unwrap();
        let grid = pushforward_coarea(
            &fx,
            &phi,
            &BoundingBox::new(vec![-6.0], vec![6.0]).unwrap(),
            &[101],
            256,
        )
        .unwrap();
        let b = push_samples(&p, &phi, 1_000_000, 8080).unwrap();
        let (sup, l1) = histogram_compare(&grid, &b).unwrap();
        assert!(sup < 0.01, "sup {sup}");
        assert!(l1 < 0.02, "l1 {l1}");
    }

    #[test]
    fn histogram_compare_validates_inputs() {
        let p = ProductModel::iid(UnivariateModel::std_normal(), 2).unwrap();
        let phi2 = MapExpr::parse("x1; x2", 2, 2).unwrap();
        let b2 = push_samples(&p, &phi2, 100, 1).unwrap();
        let grid = GridDensity::new(
            BoundingBox::new(vec![0.0], vec![1.0]).unwrap(),
            vec![4],
            vec![1.0; 4],
            ReferenceMeasure::Lebesgue { dim: 1 },
            String::new(),
        )
        .unwrap();
        assert!(matches!(
            histogram_compare(&grid, &b2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ks_against_normal_closed_form() {
        let p = ProductModel::iid(UnivariateModel::std_normal(), 2).unwrap();
        let phi = MapExpr::parse("x1+x2", 2, 1).unwrap();
        let b = push_samples(&p, &phi, 1_000_000, 31415).unwrap();
        let ks = ks_distance(&b, &|t| std_normal_cdf(t / 2.0f64.sqrt())).unwrap();
        assert!(ks < 0.002, "ks {ks}");
    }
}
