//! Piecewise-invertible change of variables: the density of Y = X^2 for a
//! standard normal X, computed by summing over the two injectivity branches
//! of the square map. The result is the chi-squared density with one degree
//! of freedom.
//!
//! ```text
//! cargo run --example square_density
//! ```

use coarea::catalog::{chi2_pdf, UnivariateModel};
use coarea::density::DensitySpec;
use coarea::pushforward::pushforward_equal;
use coarea::{BoundingBox, MapExpr};

fn main() -> coarea::Result<()> {
    let fx = DensitySpec::from_univariate(&UnivariateModel::std_normal());
    let phi = MapExpr::parse("x1^2", 1, 1)?;

    // the square map is injective on each half line; the caller declares
    // the covering and each branch contributes f_X(inverse) / |phi'|
    let branches = [
        BoundingBox::new(vec![-8.0], vec![-1e-9])?,
        BoundingBox::new(vec![1e-9], vec![8.0])?,
    ];
    let fy = pushforward_equal(&fx, &phi, &branches)?;

    println!("  y      f_Y(y)      chi2(1)     |diff|");
    for y in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let got = fy.eval(&[y])?;
        let want = chi2_pdf(1, y);
        println!("{y:5.2}  {got:.8}  {want:.8}  {:.2e}", (got - want).abs());
    }

    // below the image the density vanishes
    println!("f_Y(-1) = {}", fy.eval(&[-1.0])?);

    // and the reciprocal map: f_{1/X}(y) = f_X(1/y) / y^2
    let recip = MapExpr::parse("1/x1", 1, 1)?;
    let branches = [
        BoundingBox::new(vec![-8.0], vec![-1e-4])?,
        BoundingBox::new(vec![1e-4], vec![8.0])?,
    ];
    let fr = pushforward_equal(&fx, &recip, &branches)?;
    println!("f_(1/X)(2) = {:.9} (closed form {:.9})",
        fr.eval(&[2.0])?,
        coarea::quad::std_normal_pdf(0.5) / 4.0);
    Ok(())
}
