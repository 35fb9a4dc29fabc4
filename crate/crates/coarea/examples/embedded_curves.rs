//! The area route (k < n): a random variable pushed through an embedding has
//! a density with respect to k-dimensional Hausdorff measure on the image,
//! computed as a preimage sum weighted by 1 / J_k phi.
//!
//! ```text
//! cargo run --example embedded_curves
//! ```

use coarea::catalog::UnivariateModel;
use coarea::density::DensitySpec;
use coarea::pushforward::pushforward_area;
use coarea::quad::std_normal_pdf;
use coarea::MapExpr;
use std::f64::consts::PI;

fn main() -> coarea::Result<()> {
    let normal = DensitySpec::from_univariate(&UnivariateModel::std_normal());

    // the diagonal t -> (t, t): J_1 = sqrt(2)
    let diag = MapExpr::parse("x1; x1", 1, 2)?;
    let q = pushforward_area(&normal, &diag, &[1.0, 1.0])?;
    println!(
        "diagonal at (1,1):   {:.9}  (phi(1)/sqrt(2) = {:.9})",
        q.value,
        std_normal_pdf(1.0) / 2.0f64.sqrt()
    );

    // the parabola t -> (t, t^2): Cartesian-graph Jacobian sqrt(1 + (2t)^2)
    let parabola = MapExpr::parse("x1; x1^2", 1, 2)?;
    let q = pushforward_area(&normal, &parabola, &[2.0, 4.0])?;
    println!(
        "parabola at (2,4):   {:.9}  (phi(2)/sqrt(17) = {:.9})",
        q.value,
        std_normal_pdf(2.0) / 17.0f64.sqrt()
    );

    // queries off the image manifold return zero with a flag
    let off = pushforward_area(&normal, &parabola, &[2.0, 5.0])?;
    println!("parabola at (2,5):   value {} off_manifold {}", off.value, off.off_manifold);

    // a uniform angle pushed onto the unit circle is uniform on the circle
    let angle = DensitySpec::from_univariate(&UnivariateModel::uniform(
        0.0,
        2.0 * PI * (1.0 - 1e-9),
    )?);
    let circle = MapExpr::parse("cos(x1); sin(x1)", 1, 2)?;
    let q = pushforward_area(&angle, &circle, &[-1.0, 0.0])?;
    println!("circle at (-1, 0):   {:.9}  (1/(2 pi)     = {:.9})", q.value, 1.0 / (2.0 * PI));
    Ok(())
}
