//! Density operators for `Y = phi(X)`: given a density for `X` and a map,
//! produce the density of the image variable against the right reference
//! measure.
//!
//! Four routes, by dimension count:
//!
//! - [`pushforward_equal`] (k = n): sum of `f_X / |det J|` over declared
//!   injectivity branches, inverses found by damped Newton;
//! - [`pushforward_area`] (k < n): preimage sums weighted by `1 / J_k phi`,
//!   a density against H^k on the image manifold;
//! - [`pushforward_coarea`] (k > n): level-set quadrature of
//!   `f_X / J_n phi` over each output grid point's fiber;
//! - [`pushforward_affine`]: affine maps of any rank, including the
//!   rank-deficient case whose output lives on an affine subspace against
//!   Hausdorff measure. The nonlinear rank-deficient case is rejected.
//!
//! Plus the classical one-dimensional specials built on the same machinery:
//! sums/sample means (hyperplane fibers), products and ratios
//! (hyperbola/line fibers reduced to 1-d integrals).

use crate::catalog::UnivariateModel;
use crate::density::{DensitySpec, GridDensity, ReferenceMeasure, Support};
use crate::error::{Error, Result};
use crate::expr::MapExpr;
use crate::geom::{
    fiber_quadrature_levelset, fiber_quadrature_param, jacobian_m, newton_inverse, BoundingBox,
    FiberQuadrature,
};
use crate::linalg::{affine_solution, dot, norm, orthonormalize, sub, Mat};
use crate::quad::adaptive_simpson;
use crate::rng::SplitMix64;

/// Threads used for grid sweeps and sampling shards; `COAREA_THREADS` caps it.
pub(crate) fn thread_count() -> usize {
    if let Ok(v) = std::env::var("COAREA_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8)
}

/// Verifies the declared support box carries all but 1e-6 of the input mass
/// and renders the truncation note recorded on grid outputs.
fn truncation_note(fx: &DensitySpec) -> Result<String> {
    match fx.tail_bound() {
        Some(t) if t <= 1e-6 => Ok(format!(
            "support box tail mass <= {t:.3e} (bound from marginal tails)"
        )),
        Some(t) => Err(Error::Config(format!(
            "support box leaves {t:.3e} of input mass outside; the truncation policy requires <= 1e-6"
        ))),
        None => Ok("support box tail mass unverified (no marginal bound available)".into()),
    }
}

/// Piecewise change of variables for k = n maps.
///
/// `branch_domains` must be a disjoint covering of (almost all of) the input
/// support on which `phi` is injective; the covering is the caller's
/// declaration and is not discovered here. Branches whose Newton inverse
/// escapes their domain contribute nothing.
pub fn pushforward_equal(
    fx: &DensitySpec,
    phi: &MapExpr,
    branch_domains: &[BoundingBox],
) -> Result<DensitySpec> {
    let k = phi.input_dim();
    let n = phi.output_dim();
    if k != n {
        return Err(Error::Dimension(format!(
            "pushforward_equal needs k = n, got {k} -> {n}"
        )));
    }
    if fx.ambient_dim() != k {
        return Err(Error::DimensionMismatch { expected: k, found: fx.ambient_dim() });
    }
    if branch_domains.is_empty() {
        return Err(Error::Config("pushforward_equal needs at least one branch domain".into()));
    }
    for b in branch_domains {
        if b.dim() != k {
            return Err(Error::Dimension("branch domain dimension != map input".into()));
        }
    }

    // output support: interval image enclosure over the branch union
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for b in branch_domains {
        for (c, iv) in phi.eval_interval(&b.lo, &b.hi).iter().enumerate() {
            if let Some(iv) = iv {
                lo[c] = lo[c].min(iv.lo.max(-1e15));
                hi[c] = hi[c].max(iv.hi.min(1e15));
            }
        }
    }
    let out_box = BoundingBox::new(lo, hi)
        .unwrap_or_else(|_| BoundingBox::new(vec![-1e15; n], vec![1e15; n]).unwrap());

    let fx = fx.clone();
    let phi = phi.clone();
    let branches = branch_domains.to_vec();
    let tail = fx.tail_bound();
    let norm_est = fx.normalization_estimate();
    Ok(DensitySpec::from_fn(
        n,
        Support::Box(out_box),
        ReferenceMeasure::Lebesgue { dim: n },
        norm_est,
        tail,
        move |y| {
            let mut total = 0.0;
            for b in &branches {
                if let Some(x) = newton_inverse(&phi, y, b)? {
                    let j = phi.jacobian(&x)?;
                    let jk = jacobian_m(&j, k)?;
                    if jk < 1e-12 {
                        return Err(Error::RankDeficient(format!(
                            "J_k phi = {jk:e} at a located preimage"
                        )));
                    }
                    total += fx.eval(&x)? / jk;
                }
            }
            Ok(total)
        },
    ))
}

/// How the kernel-directions integral of an affine pushforward is evaluated.
#[derive(Debug, Clone, Copy)]
pub struct KernelQuadrature {
    /// Cells per axis of the midpoint rule for kernel dimension >= 2.
    pub midpoint_resolution: usize,
    /// Adaptive tolerance for the one-dimensional kernel case.
    pub adaptive_tol: f64,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        KernelQuadrature { midpoint_resolution: 128, adaptive_tol: 1e-10 }
    }
}

/// Affine pushforward `Y = A X + y0` for any rank m = rank(A).
///
/// Full-rank square maps use the closed form `f_X(A^{-1}(y-y0)) / |det A|`.
/// For m = n < k the output stays Lebesgue and the kernel directions are
/// integrated out; for m < n the output density lives against H^m on the
/// affine image subspace, scaled by `A_m` (the m-dimensional Jacobian of A),
/// and queries off the carrier return 0.
pub fn pushforward_affine(fx: &DensitySpec, a: &Mat, y0: &[f64]) -> Result<DensitySpec> {
    pushforward_affine_with(fx, a, y0, KernelQuadrature::default())
}

pub fn pushforward_affine_with(
    fx: &DensitySpec,
    a: &Mat,
    y0: &[f64],
    kq: KernelQuadrature,
) -> Result<DensitySpec> {
    let n = a.rows();
    let k = a.cols();
    if y0.len() != n {
        return Err(Error::Dimension("offset length != output dimension".into()));
    }
    if fx.ambient_dim() != k {
        return Err(Error::DimensionMismatch { expected: k, found: fx.ambient_dim() });
    }
    let m = crate::geom::estimate_rank(a, crate::geom::DEFAULT_RANK_TOL);
    if m == 0 {
        return Err(Error::RankDeficient("affine map with zero matrix".into()));
    }
    let a_m = jacobian_m(a, m)?;

    // orthonormal basis of range(A); also the carrier basis when m < n
    let range_basis = orthonormalize(&(0..k).map(|j| a.col(j)).collect::<Vec<_>>());
    debug_assert_eq!(range_basis.len(), m);

    let support_box = fx.support_box()?.clone();
    let fx = fx.clone();
    let a = a.clone();
    let y0 = y0.to_vec();
    let tail = fx.tail_bound();
    let norm_est = fx.normalization_estimate();

    // reduced full-row-rank system R^t A x = R^t (y - y0)
    let mut reduced = Mat::zeros(m, k);
    for (row, rb) in range_basis.iter().enumerate() {
        for col in 0..k {
            let mut s = 0.0;
            for i in 0..n {
                s += rb[i] * a[(i, col)];
            }
            reduced[(row, col)] = s;
        }
    }

    let (support, reference) = if m == n {
        let mut lo = y0.clone();
        let mut hi = y0.clone();
        for i in 0..n {
            for j in 0..k {
                let (x1, x2) = (support_box.lo[j], support_box.hi[j]);
                let (t1, t2) = (a[(i, j)] * x1, a[(i, j)] * x2);
                lo[i] += t1.min(t2);
                hi[i] += t1.max(t2);
            }
            if hi[i] - lo[i] < 1e-12 {
                hi[i] += 1e-12;
                lo[i] -= 1e-12;
            }
        }
        (
            Support::Box(BoundingBox::new(lo, hi)?),
            ReferenceMeasure::Lebesgue { dim: n },
        )
    } else {
        let mut basis = Mat::zeros(n, m);
        for (j, rb) in range_basis.iter().enumerate() {
            for i in 0..n {
                basis[(i, j)] = rb[i];
            }
        }
        (
            Support::AffineSubspace { origin: y0.clone(), basis },
            ReferenceMeasure::Hausdorff { dim: m },
        )
    };

    let eval = move |y: &[f64]| -> Result<f64> {
        let d = sub(y, &y0);
        if m < n {
            // off-carrier queries have density 0 with respect to H^m
            let mut res2 = 0.0;
            let mut proj = vec![0.0; n];
            for rb in &range_basis {
                let c = dot(&d, rb);
                for i in 0..n {
                    proj[i] += c * rb[i];
                }
            }
            for i in 0..n {
                res2 += (d[i] - proj[i]) * (d[i] - proj[i]);
            }
            if res2.sqrt() > 1e-9 * (1.0 + norm(&d)) {
                return Ok(0.0);
            }
        }
        let rhs: Vec<f64> = range_basis.iter().map(|rb| dot(&d, rb)).collect();
        let (particular, kernel) = match affine_solution(&reduced, &rhs) {
            Some(sol) => sol,
            None => return Err(Error::SingularSystem),
        };
        let qd = k - m;
        if qd == 0 {
            return Ok(fx.eval(&particular)? / a_m);
        }
        // recentre the solution line/plane near the support box
        let center = support_box.center();
        let mut base = particular;
        for t in &kernel {
            let c = dot(&center, t) - dot(&base, t);
            for (b, ti) in base.iter_mut().zip(t) {
                *b += c * ti;
            }
        }
        let reach = 0.75 * support_box.diameter() + 1.0;
        let integral = if qd == 1 {
            let dir = &kernel[0];
            let (v, _) = adaptive_simpson(
                &mut |t: f64| {
                    let x: Vec<f64> =
                        base.iter().zip(dir).map(|(b, d)| b + t * d).collect();
                    fx.eval(&x)
                },
                -reach,
                reach,
                kq.adaptive_tol,
            )?;
            v
        } else {
            // tensor midpoint over the kernel plane
            let res = kq.midpoint_resolution;
            let h = 2.0 * reach / res as f64;
            let cell = h.powi(qd as i32);
            let mut idx = vec![0usize; qd];
            let mut acc = 0.0;
            for _ in 0..res.pow(qd as u32) {
                let mut x = base.clone();
                for (axis, t) in idx.iter().enumerate() {
                    let u = -reach + h * (*t as f64 + 0.5);
                    for (xi, di) in x.iter_mut().zip(&kernel[axis]) {
                        *xi += u * di;
                    }
                }
                acc += fx.eval(&x)? * cell;
                for a in (0..qd).rev() {
                    idx[a] += 1;
                    if idx[a] < res {
                        break;
                    }
                    idx[a] = 0;
                }
            }
            acc
        };
        Ok(integral / a_m)
    };

    Ok(DensitySpec::from_fn(n, support, reference, norm_est, tail, eval))
}

/// Shared grid sweep: computes `values[i] = per_point(center_i)` in parallel
/// with one slot per grid point, so results are independent of thread count.
fn grid_sweep(
    output_box: &BoundingBox,
    grid_shape: &[usize],
    per_point: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
) -> Result<Vec<f64>> {
    let n = output_box.dim();
    let total: usize = grid_shape.iter().product();
    let center = |flat: usize| -> Vec<f64> {
        let mut rem = flat;
        let mut idx = vec![0usize; n];
        for a in (0..n).rev() {
            idx[a] = rem % grid_shape[a];
            rem /= grid_shape[a];
        }
        (0..n)
            .map(|a| {
                output_box.lo[a]
                    + output_box.extent(a) * (idx[a] as f64 + 0.5) / grid_shape[a] as f64
            })
            .collect()
    };

    let threads = thread_count().min(total.max(1));
    let mut values = vec![0.0f64; total];
    if threads <= 1 {
        for (flat, slot) in values.iter_mut().enumerate() {
            *slot = per_point(&center(flat))?;
        }
        return Ok(values);
    }
    let chunk = total.div_ceil(threads);
    let mut failure: Option<(usize, Error)> = None;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (t, slice) in values.chunks_mut(chunk).enumerate() {
            let start = t * chunk;
            handles.push(scope.spawn(move || -> std::result::Result<(), (usize, Error)> {
                for (off, slot) in slice.iter_mut().enumerate() {
                    let flat = start + off;
                    *slot = per_point(&center(flat)).map_err(|e| (flat, e))?;
                }
                Ok(())
            }));
        }
        for h in handles {
            if let Err((flat, e)) = h.join().expect("grid worker panicked") {
                match &failure {
                    Some((f, _)) if *f <= flat => {}
                    _ => failure = Some((flat, e)),
                }
            }
        }
    });
    match failure {
        Some((_, e)) => Err(e),
        None => Ok(values),
    }
}

/// Scans fixed-seed random support points for Jacobian rank deficiency;
/// errors when more than 1% of the evaluable sample is deficient.
fn rank_scan(phi: &MapExpr, support: &BoundingBox, wanted_rank: usize) -> Result<()> {
    let mut rng = SplitMix64::new(0xC0A12EA);
    let mut evaluated = 0usize;
    let mut deficient = 0usize;
    for _ in 0..200 {
        let x: Vec<f64> = (0..support.dim())
            .map(|a| rng.next_range(support.lo[a], support.hi[a]))
            .collect();
        if let Ok(j) = phi.jacobian(&x) {
            evaluated += 1;
            if crate::geom::estimate_rank(&j, crate::geom::DEFAULT_RANK_TOL) < wanted_rank {
                deficient += 1;
            }
        }
    }
    if evaluated < 100 {
        return Err(Error::Domain(
            "map not differentiable on most of the support box".into(),
        ));
    }
    if deficient as f64 > 0.01 * evaluated as f64 {
        return Err(Error::RankDeficient(format!(
            "Jacobian rank below {wanted_rank} on {deficient}/{evaluated} sampled support points"
        )));
    }
    Ok(())
}

fn fiber_push_value(
    fx: &DensitySpec,
    phi: &MapExpr,
    quad: &FiberQuadrature,
    n: usize,
) -> Result<f64> {
    let cached = quad.jacobians.len() == quad.nodes.len();
    let mut acc = 0.0;
    for (i, (node, w)) in quad.nodes.iter().zip(&quad.weights).enumerate() {
        let jn = if cached {
            quad.jacobians[i]
        } else {
            jacobian_m(&phi.jacobian(node)?, n)?
        };
        if jn < 1e-12 {
            continue;
        }
        acc += w * fx.eval(node)? / jn;
    }
    Ok(acc)
}

/// Coarea route for k > n: the density of `phi(X)` at `y` is the fiber
/// integral of `f_X / J_n phi` against H^(k-n), evaluated here on every cell
/// center of a regular grid over `output_box`.
pub fn pushforward_coarea(
    fx: &DensitySpec,
    phi: &MapExpr,
    output_box: &BoundingBox,
    grid_shape: &[usize],
    fiber_resolution: usize,
) -> Result<GridDensity> {
    let k = phi.input_dim();
    let n = phi.output_dim();
    if k <= n {
        return Err(Error::Dimension(format!(
            "pushforward_coarea needs k > n, got {k} -> {n}"
        )));
    }
    if fx.ambient_dim() != k {
        return Err(Error::DimensionMismatch { expected: k, found: fx.ambient_dim() });
    }
    if output_box.dim() != n || grid_shape.len() != n {
        return Err(Error::Dimension("output box/grid rank != map output".into()));
    }
    let support = fx.support_box()?.clone();
    let note = truncation_note(fx)?;
    rank_scan(phi, &support, n)?;

    let values = grid_sweep(output_box, grid_shape, &|y: &[f64]| {
        let quad = fiber_quadrature_levelset(phi, y, &support, fiber_resolution)?;
        fiber_push_value(fx, phi, &quad, n)
    })?;
    GridDensity::new(
        output_box.clone(),
        grid_shape.to_vec(),
        values,
        ReferenceMeasure::Lebesgue { dim: n },
        note,
    )
}

/// Builds an injective chart of the fiber over `y` together with its
/// parameter box.
pub type FiberChart = dyn Fn(&[f64]) -> Result<(MapExpr, BoundingBox)> + Sync;

/// Coarea route with caller-supplied fiber parametrizations, for fibers
/// outside the level-set extractor's dimension limits. `parametrize(y)`
/// returns an injective chart of `phi^-1(y)` (restricted to the support
/// region) and its parameter box.
pub fn pushforward_coarea_param(
    fx: &DensitySpec,
    phi: &MapExpr,
    output_box: &BoundingBox,
    grid_shape: &[usize],
    parametrize: &FiberChart,
    fiber_resolution: usize,
) -> Result<GridDensity> {
    let k = phi.input_dim();
    let n = phi.output_dim();
    if k <= n {
        return Err(Error::Dimension(format!(
            "pushforward_coarea_param needs k > n, got {k} -> {n}"
        )));
    }
    if fx.ambient_dim() != k {
        return Err(Error::DimensionMismatch { expected: k, found: fx.ambient_dim() });
    }
    let note = truncation_note(fx)?;
    let values = grid_sweep(output_box, grid_shape, &|y: &[f64]| {
        let (psi, domain) = parametrize(y)?;
        if psi.output_dim() != k || psi.input_dim() != k - n {
            return Err(Error::Dimension(
                "fiber parametrization must map R^(k-n) into R^k".into(),
            ));
        }
        let quad = fiber_quadrature_param(&psi, &domain, fiber_resolution)?;
        fiber_push_value(fx, phi, &quad, n)
    })?;
    GridDensity::new(
        output_box.clone(),
        grid_shape.to_vec(),
        values,
        ReferenceMeasure::Lebesgue { dim: n },
        note,
    )
}

/// Density value of an embedded pushforward (k < n) at one query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaDensity {
    /// Density with respect to H^k on the image manifold.
    pub value: f64,
    /// No preimage with residual <= 1e-8 was found; the value is 0 and the
    /// query is H^k-negligibly off the manifold (or outside the support box).
    pub off_manifold: bool,
}

const AREA_RESIDUAL_TOL: f64 = 1e-8;

/// Embedding route for k < n: multistart Gauss-Newton preimage search over
/// the support box, then the weighted preimage sum `sum f_X / J_k phi`.
pub fn pushforward_area(fx: &DensitySpec, phi: &MapExpr, y: &[f64]) -> Result<AreaDensity> {
    let k = phi.input_dim();
    let n = phi.output_dim();
    if k >= n {
        return Err(Error::Dimension(format!(
            "pushforward_area needs k < n, got {k} -> {n}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    let support = fx.support_box()?;

    // multistart lattice: ~6^k starting points
    let per_axis: usize = match k {
        1 => 65,
        2 => 9,
        _ => 5,
    };
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; k];
    for _ in 0..per_axis.pow(k as u32) {
        let start: Vec<f64> = (0..k)
            .map(|a| {
                support.lo[a] + support.extent(a) * (idx[a] as f64 + 0.5) / per_axis as f64
            })
            .collect();
        if let Some(x) = descend_residual(phi, y, &start) {
            if norm(&sub(&phi.eval(&x)?, y)) <= AREA_RESIDUAL_TOL
                && support.contains_padded(&x, 1e-9 * (1.0 + support.diameter()))
                && !found
                    .iter()
                    .any(|q| norm(&sub(&x, q)) <= 1e-8 * (1.0 + norm(&x)))
            {
                found.push(x);
            }
        }
        for a in (0..k).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    if found.is_empty() {
        return Ok(AreaDensity { value: 0.0, off_manifold: true });
    }
    let mut value = 0.0;
    for x in &found {
        let j = phi.jacobian(x)?;
        let jk = jacobian_m(&j, k)?;
        if jk < 1e-12 {
            return Err(Error::RankDeficient(format!("J_k phi = {jk:e} at a preimage")));
        }
        value += fx.eval(x)? / jk;
    }
    Ok(AreaDensity { value, off_manifold: false })
}

/// Gauss-Newton descent of |phi(x) - y|^2 until improvement stalls; returns
/// the final iterate (which the caller filters by residual).
fn descend_residual(phi: &MapExpr, y: &[f64], start: &[f64]) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    let mut r = sub(&phi.eval(&x).ok()?, y);
    for _ in 0..80 {
        let rn = norm(&r);
        if rn <= AREA_RESIDUAL_TOL * 1e-4 {
            break;
        }
        let j = phi.jacobian(&x).ok()?;
        let d = crate::geom::gauss_newton_step(&j, &r)?;
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha >= 1e-12 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            if let Ok(ft) = phi.eval(&xt) {
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
            break;
        }
    }
    Some(x)
}

/// Density of the sample mean of k iid draws from `model` on a grid:
/// the sum's density comes from the hyperplane-parametrized coarea route,
/// then the 1/k scaling map is applied in closed form.
pub fn sample_mean_density(
    model: &UnivariateModel,
    k: usize,
    output_box: &BoundingBox,
    grid_shape: &[usize],
    fiber_resolution: usize,
) -> Result<GridDensity> {
    if k == 0 {
        return Err(Error::Config("sample mean needs k >= 1".into()));
    }
    if output_box.dim() != 1 || grid_shape.len() != 1 {
        return Err(Error::Dimension("sample mean output is one-dimensional".into()));
    }
    if k == 1 {
        let values = grid_sweep(output_box, grid_shape, &|y: &[f64]| Ok(model.pdf(y[0])))?;
        return GridDensity::new(
            output_box.clone(),
            grid_shape.to_vec(),
            values,
            ReferenceMeasure::Lebesgue { dim: 1 },
            "closed-form univariate density (k = 1)".into(),
        );
    }

    let product = crate::catalog::ProductModel::iid(model.clone(), k)?;
    let fx = DensitySpec::from_product_model(&product);
    let sum_map = {
        let src = (1..=k).map(|i| format!("x{i}")).collect::<Vec<_>>().join("+");
        MapExpr::parse(&src, k, 1)?
    };
    // the sum lives on k times the mean's box; grid centers scale exactly
    let sum_box = BoundingBox::new(
        vec![output_box.lo[0] * k as f64],
        vec![output_box.hi[0] * k as f64],
    )?;
    let (mlo, mhi) = model.bulk_interval();
    let parametrize = move |y: &[f64]| -> Result<(MapExpr, BoundingBox)> {
        // hyperplane chart (u, y - sum u) over the marginal bulk box
        let head = (1..k).map(|i| format!("x{i}")).collect::<Vec<_>>().join("; ");
        let tail = (1..k).map(|i| format!("-x{i}")).collect::<Vec<_>>().join("");
        let src = format!("{head}; {:?}{tail}", y[0]);
        let psi = MapExpr::parse(&src, k - 1, k)?;
        let domain = BoundingBox::new(vec![mlo; k - 1], vec![mhi; k - 1])?;
        Ok((psi, domain))
    };
    let sum_grid = pushforward_coarea_param(
        &fx,
        &sum_map,
        &sum_box,
        grid_shape,
        &parametrize,
        fiber_resolution,
    )?;
    // mean = sum / k: f_Z(z) = k f_Y(k z), cell centers already aligned
    let values: Vec<f64> = sum_grid.values.iter().map(|v| v * k as f64).collect();
    GridDensity::new(
        output_box.clone(),
        grid_shape.to_vec(),
        values,
        ReferenceMeasure::Lebesgue { dim: 1 },
        sum_grid.truncation_note,
    )
}

/// Density of `X1 * X2` at `y`: the hyperbola-fiber integral reduced to
/// `int f_X(t, y/t) / |t| dt`, split at the t = 0 singularity.
pub fn product_density(fx: &DensitySpec, y: f64) -> Result<f64> {
    let support = fx.support_box()?;
    if fx.ambient_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: fx.ambient_dim() });
    }
    let (a1, b1) = (support.lo[0], support.hi[0]);
    let (a2, b2) = (support.lo[1], support.hi[1]);
    let second_reach = a2.abs().max(b2.abs());
    // |t| below |y| / max|x2| puts y/t outside the second marginal's box
    let cutoff = if y == 0.0 {
        1e-12
    } else {
        (y.abs() / second_reach).max(1e-12)
    };
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut integrand = |t: f64| -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(fx.eval(&[t, y / t])? / t.abs())
    };
    if b1 > cutoff {
        let (v, e) = adaptive_simpson(&mut integrand, cutoff.max(a1), b1, 1e-9)?;
        total += v;
        err_total += e;
    }
    if a1 < -cutoff {
        let (v, e) = adaptive_simpson(&mut integrand, a1, (-cutoff).min(b1), 1e-9)?;
        total += v;
        err_total += e;
    }
    if err_total > 1e-6 {
        return Err(Error::QuadratureFailure { estimate: err_total });
    }
    Ok(total)
}

/// Density of `X1 / X2` at `y`: the line-fiber integral
/// `int f_X(t y, t) |t| dt`, split at t = 0.
pub fn ratio_density(fx: &DensitySpec, y: f64) -> Result<f64> {
    let support = fx.support_box()?;
    if fx.ambient_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: fx.ambient_dim() });
    }
    let (a1, b1) = (support.lo[0], support.hi[0]);
    let (a2, b2) = (support.lo[1], support.hi[1]);
    // restrict to t with t y inside the first marginal's box
    let (mut lo, mut hi) = (a2, b2);
    if y != 0.0 {
        let (c1, c2) = (a1 / y, b1 / y);
        lo = lo.max(c1.min(c2));
        hi = hi.min(c1.max(c2));
    }
    if lo >= hi {
        return Ok(0.0);
    }
    let mut integrand = |t: f64| -> Result<f64> { Ok(fx.eval(&[t * y, t])? * t.abs()) };
    let mut total = 0.0;
    let mut err_total = 0.0;
    if hi > 0.0 {
        let (v, e) = adaptive_simpson(&mut integrand, lo.max(0.0), hi, 1e-9)?;
        total += v;
        err_total += e;
    }
    if lo < 0.0 {
        let (v, e) = adaptive_simpson(&mut integrand, lo, hi.min(0.0), 1e-9)?;
        total += v;
        err_total += e;
    }
    if err_total > 1e-6 {
        return Err(Error::QuadratureFailure { estimate: err_total });
    }
    Ok(total)
}
