//! The coarea route: the density of X1 + X2 for iid standard normals is the
//! integral of f_X / |grad phi| over the line x1 + x2 = y. Fibers are
//! extracted by marching simplices and the result is compared with the
//! N(0, 2) closed form and the convolution integral.
//!
//! ```text
//! cargo run --release --example sum_of_normals
//! ```

use coarea::catalog::{ProductModel, UnivariateModel};
use coarea::density::DensitySpec;
use coarea::pushforward::pushforward_coarea;
use coarea::quad::{adaptive_simpson, std_normal_pdf};
use coarea::{BoundingBox, MapExpr};

fn main() -> coarea::Result<()> {
    let product = ProductModel::iid(UnivariateModel::std_normal(), 2)?;
    let fx = DensitySpec::from_product_model(&product);
    let phi = MapExpr::parse("x1+x2", 2, 1)?;

    let out = BoundingBox::new(vec![-6.0], vec![6.0])?;
    let grid = pushforward_coarea(&fx, &phi, &out, &[101], 512)?;
    println!("mass in [-6, 6]: {:.6}", grid.mass_in_box);
    println!("{}", grid.truncation_note);

    println!("\n  y      coarea      N(0,2)      convolution");
    for i in [10usize, 30, 50, 70, 90] {
        let y = grid.center(&[i])[0];
        let closed = std_normal_pdf(y / 2.0f64.sqrt()) / 2.0f64.sqrt();
        let (conv, _) = adaptive_simpson(
            &mut |t: f64| Ok(std_normal_pdf(t) * std_normal_pdf(y - t)),
            -9.0,
            9.0,
            1e-12,
        )?;
        println!("{y:6.2}  {:.8}  {closed:.8}  {conv:.8}", grid.values[i]);
    }
    Ok(())
}
