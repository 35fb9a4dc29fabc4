//! The verification harness: push seeded samples through a map and compare
//! the empirical distribution against a computed density via the exact
//! Kolmogorov-Smirnov statistic and histogram errors. Everything is
//! reproducible from the seed, bit for bit.
//!
//! ```text
//! cargo run --release --example monte_carlo_check
//! ```

use coarea::catalog::{ProductModel, UnivariateModel};
use coarea::density::DensitySpec;
use coarea::mc::{histogram_compare, ks_distance, push_samples};
use coarea::pushforward::pushforward_coarea;
use coarea::quad::std_normal_cdf;
use coarea::{BoundingBox, MapExpr};

fn main() -> coarea::Result<()> {
    let p = ProductModel::iid(UnivariateModel::std_normal(), 2)?;
    let phi = MapExpr::parse("x1+x2", 2, 1)?;

    // two batches with the same seed are byte-identical
    let a = push_samples(&p, &phi, 100_000, 42)?;
    let b = push_samples(&p, &phi, 100_000, 42)?;
    assert_eq!(a, b);
    println!("batch of {} pushed samples, seed {} ({})", a.len(), a.seed, a.generator_name);

    // KS against the closed-form N(0, 2) distribution function
    let ks = ks_distance(&a, &|t| std_normal_cdf(t / 2.0f64.sqrt()))?;
    println!("KS vs N(0,2): {ks:.5}");

    // histogram comparison against the coarea-computed grid density
    let fx = DensitySpec::from_product_model(&p);
    let out = BoundingBox::new(vec![-6.0], vec![6.0])?;
    let grid = pushforward_coarea(&fx, &phi, &out, &[101], 256)?;
    let (sup, l1) = histogram_compare(&grid, &a)?;
    println!("histogram vs coarea grid: sup {sup:.5}, L1 {l1:.5}");

    // maps that reject part of the sample space resample and report it
    let u = UnivariateModel::uniform(-1.0, 1.0)?;
    let log_map = MapExpr::parse("log(x1)", 1, 1)?;
    let c = push_samples(&u, &log_map, 10_000, 5)?;
    println!("log on uniform[-1,1]: {} draws resampled for {} samples", c.resampled, c.len());
    Ok(())
}
