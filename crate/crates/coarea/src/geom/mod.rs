//! Measure-geometric primitives: m-dimensional Jacobians, numerical rank,
//! preimage point sets and fiber quadratures.
//!
//! The m-dimensional Jacobian of a map is the square root of the sum of
//! squared m x m minors of its Jacobian matrix; it is the local volume
//! scaling factor of the map on m-dimensional directions and the weight
//! appearing in every area/coarea push-forward.

mod levelset;
mod param;
mod preimage;

pub use levelset::fiber_quadrature_levelset;
pub use param::fiber_quadrature_param;
pub use preimage::{newton_inverse, preimage_points};
pub(crate) use preimage::gauss_newton_step;

use crate::error::{Error, Result};
use crate::linalg::{for_each_subset, jacobi_eigen, singular_values, Mat};

/// Relative singular-value threshold below which directions count as null.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Axis-aligned box in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension("box lo/hi lengths differ".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::Dimension("box needs lo < hi on every axis".into()));
        }
        Ok(BoundingBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn contains_padded(&self, x: &[f64], pad: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= *a - pad && *v <= *b + pad)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

/// Nodes and weights approximating integration against H^(k-m) over a fiber.
///
/// Weights carry units of (k-m)-dimensional Hausdorff content, so the weight
/// total approximates `H^(k-m)(fiber ∩ bounding_box)`.
#[derive(Debug, Clone)]
pub struct FiberQuadrature {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// m-dimensional Jacobian of the level-set map at each node (the coarea
    /// weight denominator); nodes where it fell below 1e-12 were dropped.
    /// Empty for parametrized quadratures, where the chart's Jacobian is
    /// already folded into the weights.
    pub jacobians: Vec<f64>,
    /// Dimension of the fiber, k - m.
    pub codim_dim: usize,
    pub bounding_box: BoundingBox,
    pub resolution: usize,
    /// No grid cell crossed the level; an empty quadrature is data, not an error.
    pub empty_fiber: bool,
    /// Largest observed |phi(node) - y| over all nodes.
    pub max_residual: f64,
}

impl FiberQuadrature {
    pub fn total_weight(&self) -> f64 {
        // + 0.0 turns the empty sum's -0.0 into +0.0
        self.weights.iter().sum::<f64>() + 0.0
    }

    /// Integrates a function of the node against the fiber measure.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

/// Square root of the sum of squared m x m minors of `j`.
///
/// Equals `sqrt(det(J J^t))` for m = n and `sqrt(det(J^t J))` for m = k
/// (Cauchy-Binet), and vanishes exactly when rank(J) < m.
pub fn jacobian_m(j: &Mat, m: usize) -> Result<f64> {
    let (n, k) = (j.rows(), j.cols());
    if m == 0 || m > n.min(k) {
        return Err(Error::Dimension(format!(
            "jacobian order m={m} out of range 1..={}",
            n.min(k)
        )));
    }
    let mut sum = 0.0;
    for_each_subset(n, m, |ri| {
        for_each_subset(k, m, |ci| {
            let d = j.submatrix(ri, ci).det();
            sum += d * d;
        });
    });
    Ok(sum.sqrt())
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn estimate_rank(j: &Mat, rel_tol: f64) -> usize {
    let s = singular_values(j);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Symmetric PSD eigendecomposition `sigma = Q diag(lambda) Q^t` with
/// eigenvalues sorted nonincreasing and tiny negatives clamped to zero.
#[derive(Debug, Clone)]
pub struct EigenFactorization {
    pub q: Mat,
    pub lambdas: Vec<f64>,
    pub rank: usize,
}

pub fn eigen_psd(sigma: &Mat) -> Result<EigenFactorization> {
    let k = sigma.rows();
    if sigma.cols() != k {
        return Err(Error::Dimension("eigen_psd needs a square matrix".into()));
    }
    let scale = sigma.max_abs().max(1e-300);
    for i in 0..k {
        for j in i + 1..k {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let (q, mut lambdas) = jacobi_eigen(sigma);
    let trace: f64 = (0..k).map(|i| sigma[(i, i)]).sum();
    let neg_tol = 1e-8 * trace.abs().max(1e-300);
    for l in &mut lambdas {
        if *l < -neg_tol {
            return Err(Error::NotPsd { eigenvalue: *l });
        }
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    let lmax = lambdas.first().copied().unwrap_or(0.0);
    let rank = if lmax <= 0.0 {
        0
    } else {
        lambdas.iter().filter(|&&l| l > DEFAULT_RANK_TOL * lmax).count()
    };
    Ok(EigenFactorization { q, lambdas, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn simple_rng(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed;
        move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    #[test]
    fn gradient_of_norm_squared_at_1_1() {
        // J = [2, 2], J_1 = 2 sqrt(2) = 2 ||x||
        let j = Mat::from_rows(&[vec![2.0, 2.0]]);
        let v = jacobian_m(&j, 1).unwrap();
        assert!((v - 2.0 * 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn row_of_ones_has_jacobian_sqrt_k() {
        for k in 1..=6 {
            let j = Mat::from_rows(&[vec![1.0; k]]);
            let v = jacobian_m(&j, 1).unwrap();
            assert!((v - (k as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn coordinate_projection_has_unit_jacobian() {
        // phi(x1,x2,x3) = (x1, x3): J_2 = 1
        let j = Mat::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let v = jacobian_m(&j, 2).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_order_is_rejected() {
        let j = Mat::from_rows(&[vec![1.0, 0.0]]);
        assert!(jacobian_m(&j, 2).is_err());
        assert!(jacobian_m(&j, 0).is_err());
    }

    #[test]
    fn cauchy_binet_on_random_matrices() {
        let mut rng = simple_rng(7);
        for trial in 0..500 {
            let n = 1 + trial % 3;
            let k = n + trial % 3;
            let mut j = Mat::zeros(n, k);
            for i in 0..n {
                for c in 0..k {
                    j[(i, c)] = rng();
                }
            }
            let direct = jacobian_m(&j, n).unwrap();
            let gram = j.matmul(&j.transpose()).det().max(0.0).sqrt();
            let denom = direct.abs().max(1e-30);
            assert!(
                (direct - gram).abs() / denom < 1e-10,
                "minors {direct} vs gram {gram}"
            );
            // transpose form
            let jt = j.transpose();
            let direct_t = jacobian_m(&jt, n).unwrap();
            let gram_t = jt.transpose().matmul(&jt).det().max(0.0).sqrt();
            assert!((direct_t - gram_t).abs() / direct_t.abs().max(1e-30) < 1e-10);
        }
    }

    #[test]
    fn jacobian_m_vanishes_exactly_on_rank_deficiency() {
        let mut rng = simple_rng(11);
        for _ in 0..100 {
            // rank-1 construction u v^t in 3x3
            let u: Vec<f64> = (0..3).map(|_| rng()).collect();
            let v: Vec<f64> = (0..3).map(|_| rng()).collect();
            let mut a = Mat::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    a[(i, j)] = u[i] * v[j];
                }
            }
            let rank = estimate_rank(&a, 1e-12);
            assert_eq!(rank, 1);
            let j2 = jacobian_m(&a, 2).unwrap();
            assert!(j2 < 1e-12, "rank-1 matrix has vanishing 2-Jacobian, got {j2}");
        }
    }

    #[test]
    fn rank_estimates() {
        assert_eq!(estimate_rank(&Mat::identity(3), 1e-9), 3);
        assert_eq!(estimate_rank(&Mat::zeros(3, 3), 1e-9), 0);
        let mut outer = Mat::zeros(2, 3);
        for (i, u) in [1.0, -2.0].iter().enumerate() {
            for (j, v) in [0.5, 1.0, 2.0].iter().enumerate() {
                outer[(i, j)] = u * v;
            }
        }
        assert_eq!(estimate_rank(&outer, 1e-9), 1);
    }

    #[test]
    fn eigen_psd_identity_and_rank_one() {
        let f = eigen_psd(&Mat::identity(2)).unwrap();
        assert_eq!(f.rank, 2);
        assert!((f.lambdas[0] - 1.0).abs() < 1e-12);
        assert!((f.lambdas[1] - 1.0).abs() < 1e-12);

        let ones = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let f = eigen_psd(&ones).unwrap();
        assert_eq!(f.rank, 1);
        assert!((f.lambdas[0] - 2.0).abs() < 1e-12);
        assert!(f.lambdas[1].abs() < 1e-12);

        let diag = Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]);
        let f = eigen_psd(&diag).unwrap();
        assert_eq!(f.rank, 1);
        assert!((f.q[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((f.lambdas[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_psd_reconstructs_and_is_orthogonal() {
        let mut rng = simple_rng(23);
        for _ in 0..50 {
            // random PSD: B B^t
            let mut b = Mat::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    b[(i, j)] = rng();
                }
            }
            let sigma = b.matmul(&b.transpose());
            let f = eigen_psd(&sigma).unwrap();
            // Q^t Q = I
            let qtq = f.q.transpose().matmul(&f.q);
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq[(i, j)] - expect).abs() < 1e-10);
                }
            }
            // reconstruction
            let mut d = Mat::zeros(3, 3);
            for i in 0..3 {
                d[(i, i)] = f.lambdas[i];
            }
            let rec = f.q.matmul(&d).matmul(&f.q.transpose());
            let scale = sigma.frobenius_norm().max(1e-12);
            let mut err = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    err += (rec[(i, j)] - sigma[(i, j)]).powi(2);
                }
            }
            assert!(err.sqrt() / scale < 1e-9);
        }
    }

    #[test]
    fn asymmetric_and_indefinite_matrices_are_rejected() {
        let a = Mat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]);
        assert!(matches!(eigen_psd(&a), Err(Error::NotSymmetric)));
        let neg = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        assert!(matches!(eigen_psd(&neg), Err(Error::NotPsd { .. })));
    }
}
