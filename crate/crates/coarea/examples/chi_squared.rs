//! Chi-squared two ways: the closed-form catalog density versus the numeric
//! pushforward of ||x||^2 under a standard normal vector. The noncentral
//! variant shows the Bessel-function closed form against a shifted-mean
//! Monte Carlo batch.
//!
//! ```text
//! cargo run --release --example chi_squared
//! ```

use coarea::catalog::{chi2_pdf, noncentral_chi2_pdf, ProductModel, UnivariateModel};
use coarea::density::DensitySpec;
use coarea::mc::{ks_distance, push_samples};
use coarea::pushforward::pushforward_coarea;
use coarea::quad::NumericCdf;
use coarea::{BoundingBox, MapExpr};

fn main() -> coarea::Result<()> {
    for k in [2usize, 3] {
        let fx = DensitySpec::from_product_model(&ProductModel::iid(
            UnivariateModel::std_normal(),
            k,
        )?);
        let src = (1..=k).map(|i| format!("x{i}^2")).collect::<Vec<_>>().join("+");
        let phi = MapExpr::parse(&src, k, 1)?;
        let out = BoundingBox::new(vec![0.1], vec![8.0])?;
        let grid = pushforward_coarea(&fx, &phi, &out, &[40], 256)?;
        let mut sup = 0.0f64;
        for (c, v) in grid.iter_cells() {
            sup = sup.max((v - chi2_pdf(k, c[0])).abs());
        }
        println!("||x||^2 under N(0, I_{k}): sup |numeric - chi2({k})| = {sup:.2e}");
    }
    println!("chi2_pdf(2, 2) = {:.9} (e^-1/2 = {:.9})", chi2_pdf(2, 2.0), 0.5 * (-1.0f64).exp());

    // noncentral: X ~ N(mu, I_3) with |mu|^2 = 2
    let lambda = 2.0f64;
    let comps = vec![
        UnivariateModel::normal(lambda.sqrt(), 1.0)?,
        UnivariateModel::std_normal(),
        UnivariateModel::std_normal(),
    ];
    let p = ProductModel::new(comps)?;
    let phi = MapExpr::parse("x1^2+x2^2+x3^2", 3, 1)?;
    let batch = push_samples(&p, &phi, 500_000, 20240908)?;
    let cdf = NumericCdf::from_pdf(&|y| noncentral_chi2_pdf(3, lambda, y), 0.0, 90.0, 16384);
    let ks = ks_distance(&batch, &|t| cdf.eval(t))?;
    println!("noncentral chi2(3, lambda=2) vs 5e5 samples: KS = {ks:.5}");
    Ok(())
}
