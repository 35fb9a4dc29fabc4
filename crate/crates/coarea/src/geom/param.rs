//! Fiber quadrature from an explicit parametrization `psi: R^d -> R^k`.
//!
//! A tensor-product midpoint rule on the parameter box; each node carries
//! weight `J_d psi(u) * cell volume`, the local d-dimensional content of the
//! parametrized patch. Injectivity of `psi` on the domain is the caller's
//! responsibility; overlapping parametrizations double-count content.

use super::{jacobian_m, BoundingBox, FiberQuadrature};
use crate::error::{Error, Result};
use crate::expr::MapExpr;

pub fn fiber_quadrature_param(
    psi: &MapExpr,
    domain: &BoundingBox,
    resolution: usize,
) -> Result<FiberQuadrature> {
    let d = psi.input_dim();
    let k = psi.output_dim();
    if d > k {
        return Err(Error::Dimension(format!(
            "parametrization maps R^{d} into R^{k}; needs d <= k"
        )));
    }
    if domain.dim() != d {
        return Err(Error::Dimension("parameter box dimension != psi input".into()));
    }
    if resolution == 0 {
        return Err(Error::Dimension("resolution must be positive".into()));
    }
    let h: Vec<f64> = (0..d).map(|a| domain.extent(a) / resolution as f64).collect();
    let cell_vol: f64 = h.iter().product();

    let total = resolution.pow(d as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let u: Vec<f64> = (0..d)
            .map(|a| domain.lo[a] + h[a] * (idx[a] as f64 + 0.5))
            .collect();
        let x = psi.eval(&u)?;
        let j = psi.jacobian(&u)?;
        let jd = jacobian_m(&j, d)?;
        if jd >= 1e-12 {
            nodes.push(x);
            weights.push(jd * cell_vol);
        }
        // advance the multi-index, last axis fastest
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < resolution {
                break;
            }
            idx[a] = 0;
        }
    }

    // ambient hull of the emitted nodes
    let bbox = if nodes.is_empty() {
        BoundingBox::new(vec![-1.0; k], vec![1.0; k]).unwrap()
    } else {
        let mut lo = nodes[0].clone();
        let mut hi = nodes[0].clone();
        for x in &nodes {
            for a in 0..k {
                lo[a] = lo[a].min(x[a]);
                hi[a] = hi[a].max(x[a]);
            }
        }
        for a in 0..k {
            let pad = 1e-9 * (1.0 + hi[a].abs() + lo[a].abs()) + 1e-12;
            lo[a] -= pad;
            hi[a] += pad;
        }
        BoundingBox { lo, hi }
    };

    let empty = nodes.is_empty();
    Ok(FiberQuadrature {
        nodes,
        weights,
        // the chart's own Jacobian is already inside the weights; the
        // pushforward map's Jacobian at these nodes is not known here
        jacobians: Vec::new(),
        codim_dim: d,
        bounding_box: bbox,
        resolution,
        empty_fiber: empty,
        max_residual: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hyperplane_parametrization_weights_are_sqrt_2() {
        // psi(t) = (t, c - t): graph of a line, J_1 = sqrt(2) everywhere
        let psi = MapExpr::parse("x1; 3-x1", 1, 2).unwrap();
        let domain = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        let q = fiber_quadrature_param(&psi, &domain, 16).unwrap();
        assert_eq!(q.nodes.len(), 16);
        for w in &q.weights {
            assert!((w - 2.0f64.sqrt() / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbola_weight_factor() {
        // psi(t) = (t, 1/t) on [1,2]: J_1 = sqrt(1 + 1/t^4)
        let psi = MapExpr::parse("x1; 1/x1", 1, 2).unwrap();
        let domain = BoundingBox::new(vec![1.0], vec![2.0]).unwrap();
        let q = fiber_quadrature_param(&psi, &domain, 8).unwrap();
        let h = 1.0 / 8.0;
        for (i, w) in q.weights.iter().enumerate() {
            let t = 1.0 + h * (i as f64 + 0.5);
            let expect = (1.0 + t.powi(-4)).sqrt() * h;
            assert!((w - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_length_is_2pi() {
        let psi = MapExpr::parse("cos(x1); sin(x1)", 1, 2).unwrap();
        let domain = BoundingBox::new(vec![0.0], vec![2.0 * PI]).unwrap();
        let q = fiber_quadrature_param(&psi, &domain, 64).unwrap();
        // unit-speed curve: midpoint rule is exact up to float roundoff
        assert!((q.total_weight() - 2.0 * PI).abs() < 1e-6);
        assert!(q.nodes.iter().all(|x| q.bounding_box.contains(x)));
    }

    #[test]
    fn graph_arclength_of_smooth_function() {
        // psi(u) = (u, sin u): arclength integral of sqrt(1 + cos^2)
        let psi = MapExpr::parse("x1; sin(x1)", 1, 2).unwrap();
        let domain = BoundingBox::new(vec![0.0], vec![2.0]).unwrap();
        let q = fiber_quadrature_param(&psi, &domain, 4096).unwrap();
        // Richardson-free oracle: dense Simpson on the arclength integrand
        let f = |u: f64| (1.0 + u.cos() * u.cos()).sqrt();
        let n = 20000;
        let h = 2.0 / n as f64;
        let mut oracle = f(0.0) + f(2.0);
        for i in 1..n {
            oracle += f(i as f64 * h) * if i % 2 == 0 { 2.0 } else { 4.0 };
        }
        oracle *= h / 3.0;
        assert!(
            (q.total_weight() - oracle).abs() < 1e-6,
            "got {} want {oracle}",
            q.total_weight()
        );
    }

    #[test]
    fn surface_patch_area() {
        // psi(u, v) = (u, v, u + v): plane patch with area sqrt(3) per unit square
        let psi = MapExpr::parse("x1; x2; x1+x2", 2, 3).unwrap();
        let domain = BoundingBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let q = fiber_quadrature_param(&psi, &domain, 8).unwrap();
        assert!((q.total_weight() - 3.0f64.sqrt()).abs() < 1e-12);
    }
}
