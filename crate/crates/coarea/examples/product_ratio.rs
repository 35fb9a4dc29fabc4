//! Products and ratios of random variables as one-dimensional fiber
//! integrals: f_{X1 X2}(y) = int f(t, y/t)/|t| dt over the hyperbola and
//! f_{X1/X2}(y) = int f(ty, t) |t| dt over the line. The ratio of two
//! standard normals lands on the Cauchy density.
//!
//! ```text
//! cargo run --example product_ratio
//! ```

use coarea::catalog::{student_t_pdf, ProductModel, UnivariateModel};
use coarea::density::DensitySpec;
use coarea::pushforward::{product_density, ratio_density};
use std::f64::consts::PI;

fn main() -> coarea::Result<()> {
    let uniforms = DensitySpec::from_product_model(&ProductModel::iid(
        UnivariateModel::uniform(0.0, 1.0)?,
        2,
    )?);
    // product of two uniforms: f(y) = -ln y on (0, 1]
    println!("product of uniforms:");
    for y in [0.1, 0.25, 0.5, 0.9] {
        println!(
            "  f({y:4.2}) = {:.8}   -ln(y) = {:.8}",
            product_density(&uniforms, y)?,
            -y.ln()
        );
    }
    // ratio of two uniforms: f(y) = min(1, 1/y^2)/2
    println!("ratio of uniforms:");
    for y in [0.5, 1.0, 2.0, 4.0] {
        let want = 1.0f64.min(1.0 / (y * y)) / 2.0;
        println!(
            "  f({y:4.2}) = {:.8}   min(1, 1/y^2)/2 = {:.8}",
            ratio_density(&uniforms, y)?,
            want
        );
    }

    // ratio of standard normals = Cauchy = Student's t with one degree
    let normals = DensitySpec::from_product_model(&ProductModel::iid(
        UnivariateModel::std_normal(),
        2,
    )?);
    println!("ratio of standard normals vs Cauchy:");
    for y in [0.0, 0.5, 1.5, 3.0] {
        let got = ratio_density(&normals, y)?;
        let cauchy = 1.0 / (PI * (1.0 + y * y));
        println!(
            "  f({y:3.1}) = {got:.8}   1/(pi(1+y^2)) = {cauchy:.8}   t(1) = {:.8}",
            student_t_pdf(1, y)
        );
    }
    Ok(())
}
