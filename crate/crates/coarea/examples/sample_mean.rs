//! Sample-mean densities through the hyperplane-parametrized coarea route:
//! the sum's fiber {sum x_i = y} is charted explicitly and the 1/k scaling
//! is applied in closed form.
//!
//! ```text
//! cargo run --release --example sample_mean
//! ```

use coarea::catalog::UnivariateModel;
use coarea::pushforward::sample_mean_density;
use coarea::quad::std_normal_pdf;
use coarea::BoundingBox;

fn main() -> coarea::Result<()> {
    // mean of two uniforms: triangular with peak 2 at 1/2
    let u = UnivariateModel::uniform(0.0, 1.0)?;
    let out = BoundingBox::new(vec![0.0], vec![1.0])?;
    let grid = sample_mean_density(&u, 2, &out, &[9], 1024)?;
    println!("mean of 2 uniforms:");
    for (c, v) in grid.iter_cells() {
        println!("  f({:.3}) = {v:.6}", c[0]);
    }

    // mean of four standard normals is N(0, 1/4)
    let n = UnivariateModel::std_normal();
    let out = BoundingBox::new(vec![-2.0], vec![2.0])?;
    let grid = sample_mean_density(&n, 4, &out, &[5], 48)?;
    println!("mean of 4 standard normals (N(0, 1/4) in parentheses):");
    for (c, v) in grid.iter_cells() {
        let want = 2.0 * std_normal_pdf(2.0 * c[0]);
        println!("  f({:+.1}) = {v:.6}  ({want:.6})", c[0]);
    }
    Ok(())
}
