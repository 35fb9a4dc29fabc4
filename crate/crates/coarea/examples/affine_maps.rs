//! Affine pushforwards at every rank: invertible (closed form), wide with
//! full row rank (kernel directions integrated out, output still Lebesgue),
//! and rank-deficient (output lives on an affine subspace against Hausdorff
//! measure).
//!
//! ```text
//! cargo run --example affine_maps
//! ```

use coarea::catalog::{ProductModel, UnivariateModel};
use coarea::density::{DensitySpec, ReferenceMeasure};
use coarea::linalg::Mat;
use coarea::pushforward::pushforward_affine;
use coarea::quad::std_normal_pdf;

fn main() -> coarea::Result<()> {
    let fx1 = DensitySpec::from_univariate(&UnivariateModel::std_normal());
    let fx2 = DensitySpec::from_product_model(&ProductModel::iid(
        UnivariateModel::std_normal(),
        2,
    )?);

    // invertible: Y = 2X is N(0, 4)
    let fy = pushforward_affine(&fx1, &Mat::from_rows(&[vec![2.0]]), &[0.0])?;
    println!(
        "Y = 2X at 2:        {:.9}  (N(0,4): {:.9})",
        fy.eval(&[2.0])?,
        std_normal_pdf(1.0) / 2.0
    );

    // wide, full row rank: A = [1 1] marginalizes to the sum, N(0, 2)
    let fy = pushforward_affine(&fx2, &Mat::from_rows(&[vec![1.0, 1.0]]), &[0.0])?;
    println!(
        "Y = X1 + X2 at 0:   {:.9}  (N(0,2): {:.9})",
        fy.eval(&[0.0])?,
        1.0 / (2.0 * std::f64::consts::PI.sqrt())
    );

    // rank deficient: A maps the plane onto the diagonal of R^2; the image
    // density is taken against 1-dimensional Hausdorff measure there
    let a = Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
    let fy = pushforward_affine(&fx2, &a, &[0.0, 0.0])?;
    println!("rank-1 reference:   {:?}", fy.reference());
    assert_eq!(fy.reference(), &ReferenceMeasure::Hausdorff { dim: 1 });
    println!(
        "density at (0,0):   {:.9}  (phi(0)/sqrt(2): {:.9})",
        fy.eval(&[0.0, 0.0])?,
        std_normal_pdf(0.0) / 2.0f64.sqrt()
    );
    // off the diagonal the H^1 density is zero (and no error is raised)
    println!("off-carrier (1,-1): {:?}", fy.eval(&[1.0, -1.0])?);
    Ok(())
}
