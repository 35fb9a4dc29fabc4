//! Multivariate normals with possibly singular covariance.
//!
//! A rank-m covariance factors as `Sigma = Q diag(lambda) Q^t`; the carrier
//! map `B = U_m diag(sqrt(lambda_i))` (top-m eigenvector columns scaled by
//! the positive eigenvalue square roots) sends standard normal coordinates
//! `z` in R^m onto the affine carrier `B R^m + a`, where the density lives
//! with respect to m-dimensional Hausdorff measure:
//!
//! `f(x) = exp(-|z|^2 / 2) / ((2 pi)^(m/2) prod sqrt(lambda_i))`, `x = B z + a`.
//!
//! For full rank this is the usual nondegenerate normal density.

use crate::error::{Error, Result};
use crate::geom::eigen_psd;
use crate::linalg::Mat;
use crate::rng::SplitMix64;
use std::f64::consts::PI;

const CARRIER_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DegenerateNormal {
    mean: Vec<f64>,
    sigma: Mat,
    /// k x m map from standard normal coordinates onto the carrier.
    carrier_map: Mat,
    /// k x m orthonormal eigenvector columns (sign-fixed for reproducibility).
    p: Mat,
    lambdas: Vec<f64>,
    rank: usize,
    log_norm: f64,
}

impl DegenerateNormal {
    pub fn new(mean: Vec<f64>, sigma: Mat) -> Result<Self> {
        let k = mean.len();
        if sigma.rows() != k || sigma.cols() != k {
            return Err(Error::Dimension("mean and covariance sizes disagree".into()));
        }
        let fac = eigen_psd(&sigma)?;
        let m = fac.rank;
        if m == 0 {
            return Err(Error::RankDeficient(
                "covariance has rank 0; the distribution is a point mass".into(),
            ));
        }
        // top-m eigenvector columns with each column's largest-magnitude
        // entry made positive, so factorizations are reproducible
        let mut p = Mat::zeros(k, m);
        for j in 0..m {
            let mut col: Vec<f64> = (0..k).map(|i| fac.q[(i, j)]).collect();
            let lead = col
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            if col[lead] < 0.0 {
                for v in &mut col {
                    *v = -*v;
                }
            }
            for i in 0..k {
                p[(i, j)] = col[i];
            }
        }
        let lambdas: Vec<f64> = fac.lambdas[..m].to_vec();
        let mut carrier_map = Mat::zeros(k, m);
        for j in 0..m {
            let s = lambdas[j].sqrt();
            for i in 0..k {
                carrier_map[(i, j)] = p[(i, j)] * s;
            }
        }
        let log_norm = -(m as f64 / 2.0) * (2.0 * PI).ln()
            - 0.5 * lambdas.iter().map(|l| l.ln()).sum::<f64>();
        Ok(DegenerateNormal {
            mean,
            sigma,
            carrier_map,
            p,
            lambdas,
            rank: m,
            log_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> &Mat {
        &self.sigma
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Orthonormal-column factor `P` of the carrier construction.
    pub fn p_matrix(&self) -> &Mat {
        &self.p
    }

    /// The k x m matrix mapping standard normal coordinates onto the carrier.
    pub fn carrier_map(&self) -> &Mat {
        &self.carrier_map
    }

    /// Standard-normal coordinates of `x` on the carrier: the unique `z` with
    /// `x = B z + mean`, found by least squares. Errors with `OffCarrier`
    /// when the residual exceeds 1e-9 (relative).
    pub fn carrier_coords(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension("point dimension != distribution dimension".into()));
        }
        let d: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        // columns of B are orthogonal with norms sqrt(lambda): closed-form
        // least squares z_j = <d, b_j> / lambda_j
        let m = self.rank;
        let k = self.dim();
        let mut z = vec![0.0; m];
        for j in 0..m {
            let mut dot = 0.0;
            for i in 0..k {
                dot += d[i] * self.carrier_map[(i, j)];
            }
            z[j] = dot / self.lambdas[j];
        }
        let mut res2 = 0.0;
        let mut scale2 = 1.0;
        for i in 0..k {
            let mut rec = 0.0;
            for j in 0..m {
                rec += self.carrier_map[(i, j)] * z[j];
            }
            res2 += (d[i] - rec) * (d[i] - rec);
            scale2 += d[i] * d[i];
        }
        let residual = (res2 / scale2).sqrt();
        if residual > CARRIER_RESIDUAL_TOL {
            return Err(Error::OffCarrier { residual });
        }
        Ok(z)
    }

    /// Density with respect to H^m on the carrier subspace; `OffCarrier`
    /// when `x` does not lie on it.
    pub fn pdf_on_carrier(&self, x: &[f64]) -> Result<f64> {
        let z = self.carrier_coords(x)?;
        let z2: f64 = z.iter().map(|v| v * v).sum();
        Ok((self.log_norm - 0.5 * z2).exp())
    }

    /// Density with off-carrier points mapped to 0 (the support statement of
    /// the carrier construction), losing the flag.
    pub fn pdf_or_zero(&self, x: &[f64]) -> f64 {
        self.pdf_on_carrier(x).unwrap_or(0.0)
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Vec<f64> {
        let m = self.rank;
        let k = self.dim();
        let z: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        let mut x = self.mean.clone();
        for i in 0..k {
            for j in 0..m {
                x[i] += self.carrier_map[(i, j)] * z[j];
            }
        }
        x
    }
}
