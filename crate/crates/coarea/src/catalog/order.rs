//! Order-statistic densities for iid samples, plus the permutation-sum
//! variant for independent but non-identically distributed coordinates.
//!
//! The sorting map has unit Jacobian on each of the k! orthants where the
//! coordinates are strictly ordered, which is why every formula below is a
//! combinatorial weight times products of the marginal pdf/cdf.

use super::UnivariateModel;
use crate::error::{Error, Result};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Density of the i-th order statistic (1-based) of k iid draws:
/// `i C(k,i) f(y) F(y)^(i-1) (1-F(y))^(k-i)`.
pub fn order_stat_pdf(model: &UnivariateModel, k: usize, i: usize, y: f64) -> Result<f64> {
    if i < 1 || i > k {
        return Err(Error::Index { i, k });
    }
    let f = model.pdf(y);
    let cdf = model.cdf(y);
    let binom = factorial(k) / (factorial(i) * factorial(k - i));
    Ok(i as f64 * binom * f * cdf.powi(i as i32 - 1) * (1.0 - cdf).powi((k - i) as i32))
}

/// Joint density of the pair (i-th, j-th) order statistics at (y1, y2);
/// zero off the ordered region y1 < y2.
pub fn order_stat_pair_pdf(
    model: &UnivariateModel,
    k: usize,
    i: usize,
    j: usize,
    y1: f64,
    y2: f64,
) -> Result<f64> {
    if i < 1 || j <= i || j > k {
        return Err(Error::Index { i: j, k });
    }
    if y1 >= y2 {
        return Ok(0.0);
    }
    let f1 = model.cdf(y1);
    let f2 = model.cdf(y2);
    let coeff = factorial(k) / (factorial(i - 1) * factorial(j - i - 1) * factorial(k - j));
    Ok(coeff
        * model.pdf(y1)
        * model.pdf(y2)
        * f1.powi(i as i32 - 1)
        * (f2 - f1).powi((j - i - 1) as i32)
        * (1.0 - f2).powi((k - j) as i32))
}

/// Joint density of all k order statistics: `k! prod f(y_i)` on the strictly
/// increasing region, zero elsewhere.
pub fn order_stat_joint_pdf(model: &UnivariateModel, k: usize, y: &[f64]) -> Result<f64> {
    if y.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: y.len() });
    }
    if k == 0 {
        return Err(Error::Index { i: 0, k });
    }
    if y.windows(2).any(|w| w[0] >= w[1]) {
        return Ok(0.0);
    }
    Ok(factorial(k) * y.iter().map(|&t| model.pdf(t)).product::<f64>())
}

/// Non-identically-distributed variant: the permutation sum
/// `sum_sigma prod_i f_i(y_sigma(i))` on the increasing region. Limited to
/// k <= 8 (the sum has k! terms).
pub fn order_stat_joint_pdf_distinct(models: &[UnivariateModel], y: &[f64]) -> Result<f64> {
    let k = models.len();
    if k == 0 {
        return Err(Error::Index { i: 0, k });
    }
    if k > 8 {
        return Err(Error::FactorialOverflow { k });
    }
    if y.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: y.len() });
    }
    if y.windows(2).any(|w| w[0] >= w[1]) {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let mut perm: Vec<usize> = (0..k).collect();
    permanent_sum(models, y, &mut perm, 0, &mut total);
    Ok(total)
}

fn permanent_sum(
    models: &[UnivariateModel],
    y: &[f64],
    perm: &mut Vec<usize>,
    depth: usize,
    total: &mut f64,
) {
    let k = models.len();
    if depth == k {
        let mut prod = 1.0;
        for (i, &p) in perm.iter().enumerate() {
            prod *= models[i].pdf(y[p]);
            if prod == 0.0 {
                return;
            }
        }
        *total += prod;
        return;
    }
    for swap in depth..k {
        perm.swap(depth, swap);
        permanent_sum(models, y, perm, depth + 1, total);
        perm.swap(depth, swap);
    }
}
