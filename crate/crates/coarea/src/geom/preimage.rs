//! Preimage point sets for maps with k <= n: isolated solutions of
//! `phi(x) = y` found by interval-pruned cell subdivision followed by
//! damped (Gauss-)Newton polishing.

use super::BoundingBox;
use crate::error::{Error, Result};
use crate::expr::MapExpr;
use crate::linalg::{norm, sub, Mat};

const RESIDUAL_TOL_SCALE: f64 = 1e-10;

/// Solutions of `phi(x) = y` inside `box`, assuming the fiber is a finite
/// point set (k <= n, rank k a.e.). Each returned point satisfies
/// `|phi(x) - y| <= 1e-10 (1 + |y|)`; duplicates within 1e-8 are merged.
pub fn preimage_points(
    map: &MapExpr,
    y: &[f64],
    bbox: &BoundingBox,
    resolution: usize,
) -> Result<Vec<Vec<f64>>> {
    let k = map.input_dim();
    let n = map.output_dim();
    if k > n {
        return Err(Error::Dimension(
            "preimage_points needs k <= n; fibers would not be point sets".into(),
        ));
    }
    if y.len() != n || bbox.dim() != k {
        return Err(Error::Dimension("preimage_points dimension mismatch".into()));
    }
    if resolution == 0 {
        return Err(Error::Dimension("resolution must be positive".into()));
    }
    let tol = RESIDUAL_TOL_SCALE * (1.0 + norm(y));

    let mut leaves = Vec::new();
    collect_candidate_cells(map, y, bbox, resolution, &mut leaves);

    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut stubborn: Vec<BoundingBox> = Vec::new();
    for cell in &leaves {
        match polish(map, y, &cell.center(), tol, 60) {
            Some(x) if bbox.contains_padded(&x, 1e-9) => found.push(x),
            Some(_) => {}
            None => stubborn.push(cell.clone()),
        }
    }
    // refine cells whose center did not converge: either the interval test
    // discards them at a finer scale or a better starting point appears
    for cell in stubborn {
        let mut subleaves = Vec::new();
        collect_candidate_cells(map, y, &cell, 4, &mut subleaves);
        let mut any = subleaves.is_empty();
        for sub in &subleaves {
            match polish(map, y, &sub.center(), tol, 80) {
                Some(x) => {
                    if bbox.contains_padded(&x, 1e-9) {
                        found.push(x);
                    }
                    any = true;
                }
                None => {
                    let mut finer = Vec::new();
                    collect_candidate_cells(map, y, sub, 4, &mut finer);
                    if finer.is_empty() {
                        any = true;
                    }
                    for f in &finer {
                        if let Some(x) = polish(map, y, &f.center(), tol, 100) {
                            if bbox.contains_padded(&x, 1e-9) {
                                found.push(x);
                            }
                            any = true;
                        }
                    }
                }
            }
        }
        if !any {
            return Err(Error::Convergence(
                "Newton polishing failed after subdivision refinement".into(),
            ));
        }
    }
    Ok(dedupe(found))
}

/// Leaf cells of the interval-pruned subdivision whose enclosure still
/// contains `y` in every output coordinate.
fn collect_candidate_cells(
    map: &MapExpr,
    y: &[f64],
    bbox: &BoundingBox,
    resolution: usize,
    out: &mut Vec<BoundingBox>,
) {
    let k = bbox.dim();
    let h: Vec<f64> = (0..k).map(|a| bbox.extent(a) / resolution as f64).collect();
    let full: Vec<(usize, usize)> = (0..k).map(|_| (0, resolution)).collect();
    let mut stack = vec![full];
    while let Some(ranges) = stack.pop() {
        let lo: Vec<f64> = (0..k).map(|a| bbox.lo[a] + h[a] * ranges[a].0 as f64).collect();
        let hi: Vec<f64> = (0..k).map(|a| bbox.lo[a] + h[a] * ranges[a].1 as f64).collect();
        let mut keep = true;
        for (c, iv) in map.eval_interval(&lo, &hi).iter().enumerate() {
            match iv {
                None => {
                    keep = false;
                    break;
                }
                Some(iv) => {
                    if !iv.contains_with_margin(y[c]) {
                        keep = false;
                        break;
                    }
                }
            }
        }
        if !keep {
            continue;
        }
        let split_axis = (0..k).max_by_key(|&a| ranges[a].1 - ranges[a].0).unwrap();
        if ranges[split_axis].1 - ranges[split_axis].0 <= 1 {
            out.push(BoundingBox { lo, hi });
            continue;
        }
        let (a, b) = ranges[split_axis];
        let mid = (a + b) / 2;
        let mut left = ranges.clone();
        left[split_axis] = (a, mid);
        let mut right = ranges;
        right[split_axis] = (mid, b);
        stack.push(right);
        stack.push(left);
    }
}

/// Damped Gauss-Newton for `phi(x) = y` from `start`; `None` on failure.
fn polish(map: &MapExpr, y: &[f64], start: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    let mut r = sub(&map.eval(&x).ok()?, y);
    for _ in 0..max_iter {
        let rn = norm(&r);
        if rn <= tol {
            return Some(x);
        }
        let j = map.jacobian(&x).ok()?;
        let d = gauss_newton_step(&j, &r)?;
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha >= 1e-6 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            if let Ok(ft) = map.eval(&xt) {
                let rt = sub(&ft, y);
                if norm(&rt) < rn {
                    x = xt;
                    r = rt;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    if norm(&r) <= tol {
        Some(x)
    } else {
        None
    }
}

/// Newton step direction: solves `J d = -r` (square) or the normal equations
/// for the overdetermined case.
pub(crate) fn gauss_newton_step(j: &Mat, r: &[f64]) -> Option<Vec<f64>> {
    let (n, k) = (j.rows(), j.cols());
    let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
    if n == k {
        j.solve(&neg_r).ok()
    } else {
        let jt = j.transpose();
        let jtj = jt.matmul(j);
        let rhs = jt.matvec(&neg_r);
        jtj.solve(&rhs).ok()
    }
}

/// Damped Newton inverse for k = n maps restricted to one injectivity
/// domain: the preimage of `y` under `phi` starting from the centre of
/// `domain`.
///
/// `Ok(None)` means the branch contributes no preimage: the iteration left
/// the (padded) domain, converged outside it, or stalled at a stationary
/// point of the residual with nothing left to descend (the level is not in
/// this branch's image). `Err(Convergence)` is reserved for iterations that
/// stop making progress while the residual gradient is still large.
pub fn newton_inverse(map: &MapExpr, y: &[f64], domain: &BoundingBox) -> Result<Option<Vec<f64>>> {
    let tol = RESIDUAL_TOL_SCALE * (1.0 + norm(y));
    let pad = 0.5 * domain.diameter();
    let start = domain.center();
    let mut x = start;
    let mut r = match map.eval(&x) {
        Ok(f) => sub(&f, y),
        Err(e) => {
            return Err(Error::Convergence(format!(
                "branch centre is outside the map domain: {e}"
            )))
        }
    };
    for _ in 0..120 {
        let rn = norm(&r);
        if rn <= tol {
            return Ok(if domain.contains_padded(&x, 1e-9 * (1.0 + domain.diameter())) {
                Some(x)
            } else {
                None
            });
        }
        let j = match map.jacobian(&x) {
            Ok(j) => j,
            Err(_) => return Ok(None),
        };
        let d = match gauss_newton_step(&j, &r) {
            Some(d) => d,
            None => return stalled_outcome(&j, &r),
        };
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha >= 1e-12 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            if !domain.contains_padded(&xt, pad) {
                // the step leads out of this branch; shrink before giving up
                alpha *= 0.5;
                continue;
            }
            if let Ok(ft) = map.eval(&xt) {
                let rt = sub(&ft, y);
                if norm(&rt) < rn {
                    x = xt;
                    r = rt;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            // descent pinned against the padded boundary means the level's
            // preimage lies outside this branch
            let full: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + di).collect();
            if !domain.contains_padded(&full, pad) {
                return Ok(None);
            }
            return stalled_outcome(&j, &r);
        }
    }
    let j = map.jacobian(&x).map_err(|e| Error::Convergence(e.to_string()))?;
    stalled_outcome(&j, &r)
}

/// A stall at a first-order stationary point of |phi(x) - y|^2 with nonzero
/// residual means the level has no preimage along this search; anything else
/// is a genuine convergence failure.
fn stalled_outcome(j: &Mat, r: &[f64]) -> Result<Option<Vec<f64>>> {
    let grad = j.transpose().matvec(r);
    if norm(&grad) <= 1e-5 * (1.0 + norm(r)) {
        Ok(None)
    } else {
        Err(Error::Convergence(
            "Newton inverse stalled away from a stationary point".into(),
        ))
    }
}

fn dedupe(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    points.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            match x.partial_cmp(y).unwrap() {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let dup = out.iter().any(|q| {
            norm(&sub(&p, q)) <= 1e-8 * (1.0 + norm(&p))
        });
        if !dup {
            out.push(p);
        }
    }
    out
}
