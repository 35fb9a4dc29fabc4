//! Fiber quadratures: nodes and weights approximating Hausdorff-measure
//! integrals over a level set. The unit circle appears twice, as the level
//! set |x| = 1 extracted by marching simplices and as an explicit chart.
//!
//! ```text
//! cargo run --release --example circle_fiber
//! ```

use coarea::{fiber_quadrature_levelset, fiber_quadrature_param, BoundingBox, MapExpr};
use std::f64::consts::PI;

fn main() -> coarea::Result<()> {
    let map = MapExpr::parse("sqrt(x1^2+x2^2)", 2, 1)?;
    let bbox = BoundingBox::new(vec![-2.0, -2.0], vec![2.0, 2.0])?;

    println!("level-set extraction of |x| = 1 (circumference 2 pi):");
    println!("  res   nodes   total weight     error");
    for res in [64usize, 128, 256, 512, 1024] {
        let q = fiber_quadrature_levelset(&map, &[1.0], &bbox, res)?;
        println!(
            "{res:5}  {:6}   {:.10}   {:.3e}",
            q.nodes.len(),
            q.total_weight(),
            (q.total_weight() - 2.0 * PI).abs()
        );
    }

    // weights let you integrate along the fiber: int_{|x|=1} x1^2 dH^1 = pi
    let q = fiber_quadrature_levelset(&map, &[1.0], &bbox, 512)?;
    let second_moment = q.integrate(|x| Ok(x[0] * x[0]))?;
    println!("int x1^2 over the circle = {second_moment:.6} (pi = {:.6})", PI);

    // the same circle as a chart psi(t) = (cos t, sin t); unit speed, so
    // every node weight is exactly the parameter step
    let chart = MapExpr::parse("cos(x1); sin(x1)", 1, 2)?;
    let domain = BoundingBox::new(vec![0.0], vec![2.0 * PI])?;
    let qp = fiber_quadrature_param(&chart, &domain, 256)?;
    println!("chart route: total weight = {:.12}", qp.total_weight());

    // a level far outside the box is flagged, not an error
    let plane = MapExpr::parse("x1+x2", 2, 1)?;
    let empty = fiber_quadrature_levelset(&plane, &[10.0], &bbox, 64)?;
    println!("empty fiber flag for x1+x2 = 10 in the box: {}", empty.empty_fiber);
    Ok(())
}
