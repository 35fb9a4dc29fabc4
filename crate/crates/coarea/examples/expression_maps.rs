//! The expression front end: parse a map, evaluate it, and take exact
//! forward-mode Jacobians.
//!
//! ```text
//! cargo run --example expression_maps
//! ```

use coarea::MapExpr;

fn main() -> coarea::Result<()> {
    // phi: R^2 -> R^2, phi(x) = (x1 x2, x1 - x2)
    let phi = MapExpr::parse("x1*x2; x1-x2", 2, 2)?;
    println!("phi(2, 3)      = {:?}", phi.eval(&[2.0, 3.0])?);

    let j = phi.jacobian(&[3.0, 4.0])?;
    println!("J phi(3, 4)    = [{} {}; {} {}]", j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);

    // the norm map and its gradient at (3, 4): (3/5, 4/5)
    let norm = MapExpr::parse("sqrt(x1^2+x2^2)", 2, 1)?;
    let g = norm.jacobian(&[3.0, 4.0])?;
    println!("grad |x| (3,4) = ({}, {})", g[(0, 0)], g[(0, 1)]);

    // maps serialize as {"k", "n", "coords"} and round-trip exactly
    let json = phi.to_json();
    println!("json           = {json}");
    assert_eq!(MapExpr::from_json(&json)?, phi);

    // domain errors are reported, not silently turned into NaN
    let inv = MapExpr::parse("1/x1", 1, 1)?;
    println!("1/x at 0       -> {:?}", inv.eval(&[0.0]).unwrap_err());
    Ok(())
}
