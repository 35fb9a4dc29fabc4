//! Level-set fiber extraction by marching simplices.
//!
//! The bounding box is cut into `resolution^k` grid cells; interval
//! arithmetic on the expression tree prunes whole subregions that provably
//! miss the level `y` before any cell is visited. Surviving cells are split
//! into k! Kuhn simplices. Inside each simplex the map is replaced by its
//! linear interpolant, whose level set is an affine subspace; the subspace
//! is clipped against the simplex and contributes one node (the centroid of
//! the clipped piece) weighted by its (k-n)-dimensional content.
//!
//! Pieces that land exactly on a shared simplex facet (fiber aligned with a
//! grid plane or cell diagonal) would be emitted by both adjacent simplices,
//! so facet-contained pieces count half unless the facet lies on the
//! bounding-box boundary. Deeper degeneracies (a fiber running along a cell
//! edge in 3d+) are not corrected.
//!
//! The cell loop runs on fixed-size buffers (k <= 4, n <= 3) and a
//! multiply-xor hashed vertex cache; extraction of a smooth fiber at
//! resolution 512 in 3d stays in the hundreds of milliseconds.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use super::{jacobian_m, BoundingBox, FiberQuadrature};
use crate::error::{Error, Result};
use crate::expr::MapExpr;

const MAX_K: usize = 4;
const MAX_N: usize = 3;

/// Lattice keys are already well-mixed by a single multiply-xor round; the
/// default SipHash costs more than the table lookups it guards.
#[derive(Default)]
struct LatticeHasher(u64);

impl Hasher for LatticeHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, _bytes: &[u8]) {
        unreachable!("lattice cache only hashes u64 keys");
    }
    fn write_u64(&mut self, key: u64) {
        let mut z = key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z ^= z >> 29;
        self.0 = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    }
}

type VertexCache = HashMap<u64, Option<[f64; MAX_N]>, BuildHasherDefault<LatticeHasher>>;

/// Extracts a quadrature for the fiber `phi^-1(y)` inside `bbox`.
///
/// Supports fiber dimension k - n in {1, 2} with ambient k <= 4; nodes where
/// the n-Jacobian falls below 1e-12 are dropped (they form a null set on
/// almost every fiber).
pub fn fiber_quadrature_levelset(
    map: &MapExpr,
    y: &[f64],
    bbox: &BoundingBox,
    resolution: usize,
) -> Result<FiberQuadrature> {
    let k = map.input_dim();
    let n = map.output_dim();
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "level has length {}, map has {n} outputs",
            y.len()
        )));
    }
    if bbox.dim() != k {
        return Err(Error::Dimension("bounding box dimension != map input".into()));
    }
    if k <= n {
        return Err(Error::Dimension(
            "level-set extraction needs k > n; use preimage_points for k <= n".into(),
        ));
    }
    let fiber_dim = k - n;
    if fiber_dim > 2 {
        return Err(Error::UnsupportedCodimension { fiber_dim });
    }
    if k > MAX_K {
        return Err(Error::Dimension("level-set extraction limited to k <= 4".into()));
    }
    if resolution == 0 {
        return Err(Error::Dimension("resolution must be positive".into()));
    }

    let mut h = [0.0f64; MAX_K];
    for a in 0..k {
        h[a] = bbox.extent(a) / resolution as f64;
    }
    let ctx = Ctx { map, y, k, n, bbox, res: resolution, h, perms: permutations(k) };
    let mut acc = Acc {
        cache: VertexCache::default(),
        nodes: Vec::new(),
        weights: Vec::new(),
        jacobians: Vec::new(),
        max_residual: 0.0,
    };
    let full: Vec<(usize, usize)> = (0..k).map(|_| (0, resolution)).collect();
    subdivide(&ctx, &mut acc, &full);

    let empty = acc.nodes.is_empty();
    Ok(FiberQuadrature {
        nodes: acc.nodes,
        weights: acc.weights,
        jacobians: acc.jacobians,
        codim_dim: fiber_dim,
        bounding_box: bbox.clone(),
        resolution,
        empty_fiber: empty,
        max_residual: acc.max_residual,
    })
}

fn permutations(k: usize) -> Vec<[usize; MAX_K]> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<[usize; MAX_K]>) {
        if rest.is_empty() {
            let mut p = [0usize; MAX_K];
            p[..prefix.len()].copy_from_slice(prefix);
            out.push(p);
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    rec(&mut Vec::new(), &mut items, &mut out);
    out
}

struct Ctx<'a> {
    map: &'a MapExpr,
    y: &'a [f64],
    k: usize,
    n: usize,
    bbox: &'a BoundingBox,
    res: usize,
    h: [f64; MAX_K],
    perms: Vec<[usize; MAX_K]>,
}

struct Acc {
    cache: VertexCache,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    jacobians: Vec<f64>,
    max_residual: f64,
}

impl<'a> Ctx<'a> {
    #[inline]
    fn coord(&self, axis: usize, idx: usize) -> f64 {
        self.bbox.lo[axis] + self.h[axis] * idx as f64
    }
}

/// Depth-first subdivision over half-open cell-index ranges; children are
/// visited low-half first so the emitted cell order is deterministic.
fn subdivide(ctx: &Ctx, acc: &mut Acc, ranges: &[(usize, usize)]) {
    let lo: Vec<f64> = (0..ctx.k).map(|a| ctx.coord(a, ranges[a].0)).collect();
    let hi: Vec<f64> = (0..ctx.k).map(|a| ctx.coord(a, ranges[a].1)).collect();
    for (c, iv) in ctx.map.eval_interval(&lo, &hi).iter().enumerate() {
        match iv {
            None => return,
            Some(iv) => {
                if !iv.contains_with_margin(ctx.y[c]) {
                    return;
                }
            }
        }
    }
    let split_axis = (0..ctx.k).max_by_key(|&a| ranges[a].1 - ranges[a].0).unwrap();
    if ranges[split_axis].1 - ranges[split_axis].0 <= 1 {
        let mut idx = [0usize; MAX_K];
        for a in 0..ctx.k {
            idx[a] = ranges[a].0;
        }
        process_cell(ctx, acc, &idx);
        return;
    }
    let (a, b) = ranges[split_axis];
    let mid = (a + b) / 2;
    let mut left = ranges.to_vec();
    left[split_axis] = (a, mid);
    subdivide(ctx, acc, &left);
    let mut right = ranges.to_vec();
    right[split_axis] = (mid, b);
    subdivide(ctx, acc, &right);
}

fn vertex_value(ctx: &Ctx, acc: &mut Acc, vidx: &[usize; MAX_K]) -> Option<[f64; MAX_N]> {
    let mut key = 0u64;
    for &i in vidx.iter().take(ctx.k) {
        key = key * (ctx.res as u64 + 2) + i as u64;
    }
    if let Some(v) = acc.cache.get(&key) {
        return *v;
    }
    let mut x = [0.0f64; MAX_K];
    for a in 0..ctx.k {
        x[a] = ctx.coord(a, vidx[a]);
    }
    let v = match ctx.map.eval(&x[..ctx.k]) {
        Ok(vals) => {
            let mut arr = [0.0f64; MAX_N];
            arr[..ctx.n].copy_from_slice(&vals);
            Some(arr)
        }
        Err(_) => None,
    };
    acc.cache.insert(key, v);
    v
}

fn process_cell(ctx: &Ctx, acc: &mut Acc, idx: &[usize; MAX_K]) {
    let k = ctx.k;
    let mut origin = [0.0f64; MAX_K];
    for a in 0..k {
        origin[a] = ctx.coord(a, idx[a]);
    }
    // gather the 2^k corner values up front; a corner outside the map's
    // domain disables the simplices that touch it
    let mut corner_ok = [false; 1 << MAX_K];
    let mut corner_vals = [[0.0f64; MAX_N]; 1 << MAX_K];
    for mask in 0..(1usize << k) {
        let mut vidx = [0usize; MAX_K];
        for a in 0..k {
            vidx[a] = idx[a] + ((mask >> a) & 1);
        }
        if let Some(v) = vertex_value(ctx, acc, &vidx) {
            corner_ok[mask] = true;
            corner_vals[mask] = v;
        }
    }
    for pi in 0..ctx.perms.len() {
        process_simplex(ctx, acc, idx, &origin, &corner_ok, &corner_vals, pi);
    }
}

#[allow(clippy::too_many_arguments)]
fn process_simplex(
    ctx: &Ctx,
    acc: &mut Acc,
    idx: &[usize; MAX_K],
    origin: &[f64; MAX_K],
    corner_ok: &[bool; 1 << MAX_K],
    corner_vals: &[[f64; MAX_N]; 1 << MAX_K],
    perm_index: usize,
) {
    let k = ctx.k;
    let n = ctx.n;
    let perm = &ctx.perms[perm_index];
    // vertex j of the path simplex is the corner with axes perm[0..j] set
    let mut masks = [0usize; MAX_K + 1];
    for j in 1..=k {
        masks[j] = masks[j - 1] | (1 << perm[j - 1]);
    }
    for &m in masks.iter().take(k + 1) {
        if !corner_ok[m] {
            return;
        }
    }

    // Jacobian of the linear interpolant: column perm[j] holds the value
    // difference along the j-th path edge divided by the step
    let mut m = [[0.0f64; MAX_K]; MAX_N];
    for j in 0..k {
        let axis = perm[j];
        let (lo, hi) = (&corner_vals[masks[j]], &corner_vals[masks[j + 1]]);
        for (row, mr) in m.iter_mut().enumerate().take(n) {
            mr[axis] = (hi[row] - lo[row]) / ctx.h[axis];
        }
    }
    let mut rhs = [0.0f64; MAX_N];
    for row in 0..n {
        rhs[row] = ctx.y[row] - corner_vals[0][row];
    }

    let Some((mut base, null_basis)) = solve_affine_small(&m, &rhs, n, k) else {
        return;
    };
    let fiber_dim = k - n;

    // re-center the particular solution near the simplex so clip bounds stay tight
    let mut centroid = [0.0f64; MAX_K];
    for a in 0..k {
        let count: usize = masks[..=k].iter().map(|mm| (mm >> a) & 1).sum();
        centroid[a] = ctx.h[a] * count as f64 / (k + 1) as f64;
    }
    for t in null_basis.iter().take(fiber_dim) {
        let mut c = 0.0;
        for a in 0..k {
            c += (centroid[a] - base[a]) * t[a];
        }
        for a in 0..k {
            base[a] += c * t[a];
        }
    }

    // barycentric constraints as affine functions of the fiber parameters:
    // lambda_i(t) = c_i + g_i . t
    let mut ub = [0.0f64; MAX_K]; // unit-cube coordinates of the base point
    let mut du = [[0.0f64; 2]; MAX_K]; // directional derivative of u_a along t_j
    for a in 0..k {
        ub[a] = base[a] / ctx.h[a];
        for j in 0..fiber_dim {
            du[a][j] = null_basis[j][a] / ctx.h[a];
        }
    }
    let mut lam_c = [0.0f64; MAX_K + 1];
    let mut lam_g = [[0.0f64; 2]; MAX_K + 1];
    lam_c[0] = 1.0 - ub[perm[0]];
    for j in 0..fiber_dim {
        lam_g[0][j] = -du[perm[0]][j];
    }
    for i in 1..k {
        lam_c[i] = ub[perm[i - 1]] - ub[perm[i]];
        for j in 0..fiber_dim {
            lam_g[i][j] = du[perm[i - 1]][j] - du[perm[i]][j];
        }
    }
    lam_c[k] = ub[perm[k - 1]];
    for j in 0..fiber_dim {
        lam_g[k][j] = du[perm[k - 1]][j];
    }

    let mut node_t = [0.0f64; 2];
    let mut lam_max = [0.0f64; MAX_K + 1];
    let content = if fiber_dim == 1 {
        match clip_segment(&lam_c, &lam_g, k + 1, &mut node_t, &mut lam_max) {
            Some(c) => c,
            None => return,
        }
    } else {
        let radius = {
            let mut d2 = 0.0;
            for a in 0..k {
                d2 += ctx.h[a] * ctx.h[a];
            }
            4.0 * d2.sqrt()
        };
        match clip_polygon_2d(&lam_c, &lam_g, k + 1, radius, &mut node_t, &mut lam_max) {
            Some(c) => c,
            None => return,
        }
    };
    if content <= 0.0 {
        return;
    }

    // halve pieces lying on a shared facet of the global triangulation
    let mut weight = content;
    for (i, &lm) in lam_max.iter().enumerate().take(k + 1) {
        if lm > 1e-9 {
            continue;
        }
        let on_boundary = if i == 0 {
            idx[perm[0]] + 1 == ctx.res
        } else if i == k {
            idx[perm[k - 1]] == 0
        } else {
            false
        };
        if !on_boundary {
            weight *= 0.5;
        }
    }

    let mut node = vec![0.0f64; k];
    for (a, slot) in node.iter_mut().enumerate() {
        let mut xa = origin[a] + base[a];
        for j in 0..fiber_dim {
            xa += node_t[j] * null_basis[j][a];
        }
        *slot = xa;
    }

    // drop nodes where the map degenerates, and record the residual
    let jn = match ctx.map.jacobian(&node) {
        Ok(j) => match jacobian_m(&j, n) {
            Ok(v) => v,
            Err(_) => return,
        },
        Err(_) => return,
    };
    if jn < 1e-12 {
        return;
    }
    match ctx.map.eval(&node) {
        Ok(fx) => {
            let res2: f64 = fx.iter().zip(ctx.y).map(|(a, b)| (a - b) * (a - b)).sum();
            acc.max_residual = acc.max_residual.max(res2.sqrt());
        }
        Err(_) => return,
    }
    acc.nodes.push(node);
    acc.weights.push(weight);
    acc.jacobians.push(jn);
}

/// Particular solution (offset from the cell origin) and orthonormal null
/// basis of the small system `m z = rhs`; `None` when the interpolant is
/// rank-deficient or inconsistent in this simplex.
fn solve_affine_small(
    m: &[[f64; MAX_K]; MAX_N],
    rhs: &[f64; MAX_N],
    n: usize,
    k: usize,
) -> Option<([f64; MAX_K], [[f64; MAX_K]; 2])> {
    let mut aug = [[0.0f64; MAX_K + 1]; MAX_N];
    let mut scale = 0.0f64;
    for row in 0..n {
        for col in 0..k {
            aug[row][col] = m[row][col];
            scale = scale.max(m[row][col].abs());
        }
        aug[row][MAX_K] = rhs[row];
    }
    if scale <= 0.0 {
        return None;
    }
    let tol = 1e-10 * scale;
    let mut pivot_col = [usize::MAX; MAX_N];
    let mut col_used = [false; MAX_K];
    for step in 0..n {
        let mut best = (step, 0usize, 0.0f64);
        for (i, row) in aug.iter().enumerate().take(n).skip(step) {
            for (j, used) in col_used.iter().enumerate().take(k) {
                if !used && row[j].abs() > best.2 {
                    best = (i, j, row[j].abs());
                }
            }
        }
        if best.2 <= tol {
            return None;
        }
        aug.swap(step, best.0);
        let pc = best.1;
        col_used[pc] = true;
        pivot_col[step] = pc;
        let pv = aug[step][pc];
        for v in aug[step].iter_mut() {
            *v /= pv;
        }
        for i in 0..n {
            if i != step && aug[i][pc] != 0.0 {
                let f = aug[i][pc];
                for j in 0..=MAX_K {
                    aug[i][j] -= f * aug[step][j];
                }
            }
        }
    }
    let mut particular = [0.0f64; MAX_K];
    for step in 0..n {
        particular[pivot_col[step]] = aug[step][MAX_K];
    }
    let mut basis = [[0.0f64; MAX_K]; 2];
    let mut count = 0usize;
    for jf in 0..k {
        if col_used[jf] {
            continue;
        }
        let mut v = [0.0f64; MAX_K];
        v[jf] = 1.0;
        for step in 0..n {
            v[pivot_col[step]] = -aug[step][jf];
        }
        // Gram-Schmidt against previous basis vectors
        for b in basis.iter().take(count) {
            let mut c = 0.0;
            for a in 0..k {
                c += v[a] * b[a];
            }
            for a in 0..k {
                v[a] -= c * b[a];
            }
        }
        let mut norm2 = 0.0;
        for va in v.iter().take(k) {
            norm2 += va * va;
        }
        if norm2 <= 1e-24 {
            return None;
        }
        let inv = 1.0 / norm2.sqrt();
        for va in v.iter_mut().take(k) {
            *va *= inv;
        }
        basis[count] = v;
        count += 1;
        if count == 2 {
            break;
        }
    }
    if count != k - n {
        return None;
    }
    Some((particular, basis))
}

/// One-parameter fiber piece: intersect the half-lines `lam_c + lam_g t >= 0`.
/// Writes the midpoint parameter and per-constraint maxima; returns the length.
fn clip_segment(
    lam_c: &[f64; MAX_K + 1],
    lam_g: &[[f64; 2]; MAX_K + 1],
    constraints: usize,
    node_t: &mut [f64; 2],
    lam_max: &mut [f64; MAX_K + 1],
) -> Option<f64> {
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for i in 0..constraints {
        let c = lam_c[i];
        let g = lam_g[i][0];
        if g.abs() < 1e-14 {
            if c < -1e-12 {
                return None;
            }
        } else if g > 0.0 {
            t_lo = t_lo.max(-c / g);
        } else {
            t_hi = t_hi.min(-c / g);
        }
    }
    if !(t_hi - t_lo).is_finite() || t_hi <= t_lo {
        return None;
    }
    node_t[0] = 0.5 * (t_lo + t_hi);
    node_t[1] = 0.0;
    for i in 0..constraints {
        let a = lam_c[i] + lam_g[i][0] * t_lo;
        let b = lam_c[i] + lam_g[i][0] * t_hi;
        lam_max[i] = a.max(b);
    }
    Some(t_hi - t_lo)
}

const MAX_POLY: usize = 16;

/// Two-parameter fiber piece: Sutherland-Hodgman clip of a bounding square
/// against the half-planes. Writes the centroid parameters and per-constraint
/// maxima; returns the area.
fn clip_polygon_2d(
    lam_c: &[f64; MAX_K + 1],
    lam_g: &[[f64; 2]; MAX_K + 1],
    constraints: usize,
    radius: f64,
    node_t: &mut [f64; 2],
    lam_max: &mut [f64; MAX_K + 1],
) -> Option<f64> {
    let mut poly = [[0.0f64; 2]; MAX_POLY];
    let mut len = 4usize;
    poly[0] = [-radius, -radius];
    poly[1] = [radius, -radius];
    poly[2] = [radius, radius];
    poly[3] = [-radius, radius];
    let mut scratch = [[0.0f64; 2]; MAX_POLY];
    for i in 0..constraints {
        let c = lam_c[i];
        let (gx, gy) = (lam_g[i][0], lam_g[i][1]);
        let mut out_len = 0usize;
        for w in 0..len {
            let p = poly[w];
            let q = poly[(w + 1) % len];
            let fp = c + gx * p[0] + gy * p[1];
            let fq = c + gx * q[0] + gy * q[1];
            if fp >= 0.0 {
                scratch[out_len] = p;
                out_len += 1;
                if fq < 0.0 {
                    let s = fp / (fp - fq);
                    scratch[out_len] = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                    out_len += 1;
                }
            } else if fq >= 0.0 {
                let s = fp / (fp - fq);
                scratch[out_len] = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                out_len += 1;
            }
        }
        poly[..out_len].copy_from_slice(&scratch[..out_len]);
        len = out_len;
        if len < 3 {
            return None;
        }
    }
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for w in 0..len {
        let p = poly[w];
        let q = poly[(w + 1) % len];
        let cross = p[0] * q[1] - q[0] * p[1];
        area2 += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    let area = 0.5 * area2.abs();
    if area <= 0.0 || area2.abs() < 1e-300 {
        return None;
    }
    node_t[0] = cx / (3.0 * area2);
    node_t[1] = cy / (3.0 * area2);
    for i in 0..constraints {
        let mut best = f64::NEG_INFINITY;
        for p in poly.iter().take(len) {
            best = best.max(lam_c[i] + lam_g[i][0] * p[0] + lam_g[i][1] * p[1]);
        }
        lam_max[i] = best;
    }
    Some(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MapExpr;
    use std::f64::consts::PI;

    #[test]
    fn small_affine_solver_matches_constraints() {
        // x + y + z = 1 in R^3: null space dim 2
        let mut m = [[0.0; MAX_K]; MAX_N];
        m[0][0] = 1.0;
        m[0][1] = 1.0;
        m[0][2] = 1.0;
        let mut rhs = [0.0; MAX_N];
        rhs[0] = 1.0;
        let (p, basis) = solve_affine_small(&m, &rhs, 1, 3).unwrap();
        assert!((p[..3].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for b in &basis {
            assert!(b[..3].iter().sum::<f64>().abs() < 1e-12);
            let n2: f64 = b[..3].iter().map(|v| v * v).sum();
            assert!((n2 - 1.0).abs() < 1e-12);
        }
        let cross: f64 = (0..3).map(|a| basis[0][a] * basis[1][a]).sum();
        assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn segment_fiber_length_is_exact_for_linear_maps() {
        // x1 + x2 = 0 across [-1,1]^2 is a diagonal of length 2 sqrt(2);
        // the interpolant is exact, so any resolution gives the exact length
        let m = MapExpr::parse("x1+x2", 2, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        for res in [16usize, 37, 256] {
            let q = fiber_quadrature_levelset(&m, &[0.0], &bbox, res).unwrap();
            assert!(!q.empty_fiber);
            let total = q.total_weight();
            assert!(
                (total - 2.0 * 2.0f64.sqrt()).abs() < 1e-3,
                "res {res}: {total}"
            );
            assert!(q.weights.iter().all(|&w| w >= 0.0));
            assert!(q.nodes.iter().all(|x| bbox.contains_padded(x, 1e-9)));
        }
    }

    #[test]
    fn circle_fiber_total_weight_near_2pi() {
        let m = MapExpr::parse("sqrt(x1^2+x2^2)", 2, 1).unwrap();
        let bbox = BoundingBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[1.0], &bbox, 512).unwrap();
        let total = q.total_weight();
        assert!((total - 2.0 * PI).abs() < 1e-2, "got {total}");
        assert!(q.max_residual < 1e-3);
    }

    #[test]
    fn missed_level_gives_empty_quadrature() {
        let m = MapExpr::parse("x1+x2", 2, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[10.0], &bbox, 64).unwrap();
        assert!(q.empty_fiber);
        assert!(q.nodes.is_empty());
        assert_eq!(q.total_weight(), 0.0);
    }

    #[test]
    fn codimension_limit_is_enforced() {
        let m = MapExpr::parse("x1+x2+x3+x4", 4, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.0; 4], vec![1.0; 4]).unwrap();
        assert!(matches!(
            fiber_quadrature_levelset(&m, &[0.0], &bbox, 8),
            Err(Error::UnsupportedCodimension { fiber_dim: 3 })
        ));
    }

    #[test]
    fn grid_aligned_plane_is_not_double_counted() {
        // x1 = 0 lies exactly on a grid plane for even resolutions
        let m = MapExpr::parse("x1", 2, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[0.0], &bbox, 64).unwrap();
        let total = q.total_weight();
        assert!((total - 2.0).abs() < 1e-9, "got {total}");
    }

    #[test]
    fn diagonal_aligned_fiber_is_not_double_counted() {
        // x1 - x2 = 0 runs along the Kuhn diagonal of every cell it meets
        let m = MapExpr::parse("x1-x2", 2, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[0.0], &bbox, 32).unwrap();
        let total = q.total_weight();
        assert!((total - 2.0 * 2.0f64.sqrt()).abs() < 1e-9, "got {total}");
    }

    #[test]
    fn grid_aligned_plane_in_3d_is_not_double_counted() {
        // x3 = 0 is a union of cell faces; every polygon piece sits on a
        // shared facet and must count half per adjacent cell
        let m = MapExpr::parse("x3", 3, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[0.0], &bbox, 16).unwrap();
        let total = q.total_weight();
        assert!((total - 4.0).abs() < 1e-9, "plane area: got {total}");
    }

    #[test]
    fn plane_on_the_box_boundary_counts_once() {
        // the level x3 = -1 coincides with the box face: only one layer of
        // cells sees it, so the pieces keep full weight
        let m = MapExpr::parse("x3", 3, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[-1.0], &bbox, 8).unwrap();
        let total = q.total_weight();
        assert!((total - 4.0).abs() < 1e-9, "boundary plane area: got {total}");
    }

    #[test]
    fn sphere_fiber_in_3d_matches_area() {
        // ||x||^2 = 1: sphere of area 4 pi, fiber dimension 2
        let m = MapExpr::parse("x1^2+x2^2+x3^2", 3, 1).unwrap();
        let bbox = BoundingBox::new(vec![-1.5; 3], vec![1.5; 3]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[1.0], &bbox, 48).unwrap();
        let total = q.total_weight();
        assert!(
            (total - 4.0 * PI).abs() < 4.0 * PI * 0.01,
            "sphere area: got {total}, want {}",
            4.0 * PI
        );
    }

    #[test]
    fn curve_fiber_dimension_one_in_3d() {
        // x1^2 + x2^2 = 1 and x3 = 0: unit circle embedded in R^3
        let m = MapExpr::parse("x1^2+x2^2; x3", 3, 2).unwrap();
        let bbox = BoundingBox::new(vec![-1.5; 3], vec![1.5; 3]).unwrap();
        let q = fiber_quadrature_levelset(&m, &[1.0, 0.0], &bbox, 96).unwrap();
        let total = q.total_weight();
        assert!((total - 2.0 * PI).abs() < 0.05, "got {total}");
    }

    #[test]
    fn refinement_reduces_circle_error() {
        let m = MapExpr::parse("sqrt(x1^2+x2^2)", 2, 1).unwrap();
        let bbox = BoundingBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let e = |res: usize| {
            let q = fiber_quadrature_levelset(&m, &[1.0], &bbox, res).unwrap();
            (q.total_weight() - 2.0 * PI).abs()
        };
        let e128 = e(128);
        let e256 = e(256);
        assert!(e256 < 0.75 * e128, "e128={e128} e256={e256}");
    }
}
