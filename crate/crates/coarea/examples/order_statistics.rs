//! Order-statistic densities: single marginals, pairs, the full joint, and
//! the permutation sum for non-identically distributed coordinates.
//!
//! ```text
//! cargo run --example order_statistics
//! ```

use coarea::catalog::{
    order_stat_joint_pdf, order_stat_joint_pdf_distinct, order_stat_pair_pdf, order_stat_pdf,
    UnivariateModel,
};

fn main() -> coarea::Result<()> {
    let u = UnivariateModel::uniform(0.0, 1.0)?;

    // maximum of three uniforms: pdf 3 y^2
    println!("max of 3 uniforms at 0.5:  {}", order_stat_pdf(&u, 3, 3, 0.5)?);
    // minimum of two uniforms: pdf 2 (1 - y)
    println!("min of 2 uniforms at 0.25: {}", order_stat_pdf(&u, 2, 1, 0.25)?);

    // median of 5 draws across its range
    println!("\nmedian of 5 uniforms:");
    for y in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!("  f_(3)({y:.1}) = {:.6}", order_stat_pdf(&u, 5, 3, y)?);
    }

    // joint of (min, max) of two uniforms is 2 on the ordered triangle
    println!(
        "\npair (1,2) of 2 at (0.3, 0.7): {}",
        order_stat_pair_pdf(&u, 2, 1, 2, 0.3, 0.7)?
    );
    println!(
        "pair at (0.7, 0.3) [unordered]: {}",
        order_stat_pair_pdf(&u, 2, 1, 2, 0.7, 0.3)?
    );

    // full joint: k! on the ordered region for uniforms
    println!(
        "joint of 3 at (0.1, 0.5, 0.9):  {}",
        order_stat_joint_pdf(&u, 3, &[0.1, 0.5, 0.9])?
    );

    // independent but not identically distributed: the permutation sum
    let narrow = UnivariateModel::uniform(0.0, 1.0)?;
    let wide = UnivariateModel::uniform(0.0, 2.0)?;
    let v = order_stat_joint_pdf_distinct(&[narrow, wide], &[0.5, 1.5])?;
    println!("distinct marginals at (0.5, 1.5): {v}");
    Ok(())
}
