// indexed loops are the clearer idiom in the small fixed-size numeric kernels
#![allow(clippy::needless_range_loop)]

//! Densities of transformed random variables via area/coarea formulas.
//!
//! Given a density for a random variable `X` on R^k and a locally Lipschitz
//! map `phi: R^k -> R^n`, this crate computes the density of `Y = phi(X)`
//! with respect to the appropriate reference measure:
//!
//! - `k = n`: branch-summed change of variables (piecewise-invertible maps);
//! - `k < n`: densities against k-dimensional Hausdorff measure on the image
//!   manifold (injective embeddings);
//! - `k > n`: level-set integration of `f_X / J_n phi` over fibers
//!   `phi^-1(y)` (the coarea route);
//! - rank-deficient affine maps: densities on the affine image subspace.
//!
//! Maps are written in a small expression language (`x1..xk`, arithmetic,
//! `sqrt/exp/log/abs/sin/cos`) and differentiated exactly with dual numbers.
//! A catalog of closed-form distributions (order statistics, degenerate
//! normals, chi-squared, noncentral chi-squared, Student's t) and a seeded
//! Monte Carlo harness provide independent checks of every numeric route.
//!
//! Start with the runnable examples (`cargo run --example sum_of_normals`)
//! or the `coarea` binary (`density`, `fiber`, `catalog`, `mc-check`
//! subcommands).
//!
//! ```
//! use coarea::catalog::UnivariateModel;
//! use coarea::density::DensitySpec;
//! use coarea::pushforward::pushforward_equal;
//! use coarea::{BoundingBox, MapExpr};
//!
//! // the density of Y = X^2 for standard normal X, via the two
//! // injectivity branches of the square map
//! let fx = DensitySpec::from_univariate(&UnivariateModel::std_normal());
//! let phi = MapExpr::parse("x1^2", 1, 1)?;
//! let branches = [
//!     BoundingBox::new(vec![-8.0], vec![-1e-9])?,
//!     BoundingBox::new(vec![1e-9], vec![8.0])?,
//! ];
//! let fy = pushforward_equal(&fx, &phi, &branches)?;
//!
//! // f_Y(1) = (f_X(1) + f_X(-1)) / 2 = e^{-1/2} / sqrt(2 pi)
//! let v = fy.eval(&[1.0])?;
//! assert!((v - 0.24197072451914337).abs() < 1e-9);
//! # Ok::<(), coarea::Error>(())
//! ```

pub mod catalog;
pub mod cli;
pub mod density;
pub mod error;
pub mod expr;
pub mod geom;
pub mod linalg;
pub mod mc;
pub mod pushforward;
pub mod quad;
pub mod rng;


pub use error::{Error, Result};
pub use expr::MapExpr;
pub use geom::{
    eigen_psd, estimate_rank, fiber_quadrature_levelset, fiber_quadrature_param, jacobian_m,
    preimage_points, BoundingBox, EigenFactorization, FiberQuadrature,
};
