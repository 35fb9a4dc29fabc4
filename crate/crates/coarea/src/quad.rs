//! One-dimensional adaptive quadrature, numeric CDF tables and midpoint
//! rules over boxes. These are the workhorses behind normalization audits,
//! product/ratio densities and the Monte Carlo comparisons.

use crate::error::Result;
use crate::geom::BoundingBox;
use std::f64::consts::{FRAC_PI_2, PI};

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// Returns `(value, error_estimate)`. The estimate is what callers compare
/// against their own budget; integrand errors propagate as-is.
pub fn adaptive_simpson(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let fa = f(a)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn rec(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<(f64, f64)> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // stop at the tolerance or at the f64 noise floor of the panel values
    let floor = 1e-15 * (left.abs() + right.abs());
    if delta.abs() <= (15.0 * tol).max(floor) || depth == 0 {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    let (vl, el) = rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)?;
    let (vr, er) = rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)?;
    Ok((vl + vr, el + er))
}

/// Tabulated cumulative distribution built by integrating a pdf on a grid.
///
/// Evaluation clamps to 0 below the grid and to the accumulated total above
/// it, with monotone linear interpolation between knots.
#[derive(Debug, Clone)]
pub struct NumericCdf {
    xs: Vec<f64>,
    cum: Vec<f64>,
}

impl NumericCdf {
    /// Integrates `pdf` over `[lo, hi]` with `n` panels (composite Simpson
    /// per panel). The interval should carry essentially all of the mass.
    pub fn from_pdf(pdf: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        let n = n.max(8);
        let h = (hi - lo) / n as f64;
        let mut xs = Vec::with_capacity(n + 1);
        let mut cum = Vec::with_capacity(n + 1);
        xs.push(lo);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = lo + h * i as f64;
            let b = a + h;
            let m = 0.5 * (a + b);
            acc += h / 6.0 * (pdf(a) + 4.0 * pdf(m) + pdf(b));
            xs.push(b);
            cum.push(acc);
        }
        NumericCdf { xs, cum }
    }

    /// CDF of a heavy-tailed pdf on the whole line via the substitution
    /// `t = tan(u)`, which compactifies the domain and tames polynomial tails.
    pub fn from_pdf_whole_line(pdf: &dyn Fn(f64) -> f64, n: usize) -> Self {
        let n = n.max(8);
        let eps = 1e-8;
        let lo = -FRAC_PI_2 + eps;
        let hi = FRAC_PI_2 - eps;
        let g = |u: f64| {
            let t = u.tan();
            pdf(t) * (1.0 + t * t)
        };
        let h = (hi - lo) / n as f64;
        let mut xs = Vec::with_capacity(n + 1);
        let mut cum = Vec::with_capacity(n + 1);
        xs.push(lo);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = lo + h * i as f64;
            let b = a + h;
            acc += h / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
            xs.push(b);
            cum.push(acc);
        }
        NumericCdf { xs, cum }
    }

    /// For tables built with [`NumericCdf::from_pdf_whole_line`] the query is
    /// mapped through atan first.
    pub fn eval_whole_line(&self, t: f64) -> f64 {
        self.eval(t.atan())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return self.cum[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.cum[lo] + w * (self.cum[hi] - self.cum[lo])
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }
}

/// Midpoint rule over a box with `res` cells per axis.
pub fn midpoint_box(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    bbox: &BoundingBox,
    res: usize,
) -> Result<f64> {
    let d = bbox.dim();
    let h: Vec<f64> = (0..d).map(|a| bbox.extent(a) / res as f64).collect();
    let cell: f64 = h.iter().product();
    let total = res.pow(d as u32);
    let mut idx = vec![0usize; d];
    let mut acc = 0.0;
    for _ in 0..total {
        let x: Vec<f64> = (0..d)
            .map(|a| bbox.lo[a] + h[a] * (idx[a] as f64 + 0.5))
            .collect();
        acc += f(&x)? * cell;
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < res {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(acc)
}

/// Gauss error function, |error| < 1e-15: Maclaurin series for small
/// arguments, Lentz continued fraction for the complement elsewhere.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.0 {
        // 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for n in 1..200 {
            term *= -x2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    } else {
        1.0 - erfc_cf(x)
    }
}

/// Complementary error function for x >= 2 by the Lentz continued fraction
/// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfc_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    let mut i = 1u32;
    loop {
        let a = 0.5 * i as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
        i += 1;
        if i > 400 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Standard normal density.
pub fn std_normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function via [`erf`].
pub fn std_normal_cdf(t: f64) -> f64 {
    0.5 * (1.0 + erf(t / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        let (v, e) = adaptive_simpson(&mut |t| Ok(t * t * t - t), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v} ({e})");
    }

    #[test]
    fn simpson_handles_gaussian_mass() {
        let (v, _) = adaptive_simpson(&mut |t| Ok(std_normal_pdf(t)), -8.0, 8.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_propagates_domain_errors() {
        let r = adaptive_simpson(
            &mut |t| {
                if t < 0.5 {
                    Ok(t)
                } else {
                    Err(Error::Domain("test".into()))
                }
            },
            0.0,
            1.0,
            1e-9,
        );
        assert!(r.is_err());
    }

    #[test]
    fn numeric_cdf_matches_closed_form_normal() {
        // knot interpolation caps pointwise accuracy around h^2/8 * pdf'
        let table = NumericCdf::from_pdf(&std_normal_pdf, -10.0, 10.0, 16384);
        for t in [-3.0, -1.0, 0.0, 0.5, 2.5] {
            assert!((table.eval(t) - std_normal_cdf(t)).abs() < 1e-7, "t={t}");
        }
        assert!((table.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn whole_line_cdf_handles_cauchy_tails() {
        let cauchy = |t: f64| 1.0 / (PI * (1.0 + t * t));
        let table = NumericCdf::from_pdf_whole_line(&cauchy, 8192);
        for t in [-1000.0f64, -3.0, 0.0, 7.0, 5e4] {
            let exact = 0.5 + t.atan() / PI;
            assert!(
                (table.eval_whole_line(t) - exact).abs() < 1e-7,
                "t={t}: {} vs {exact}",
                table.eval_whole_line(t)
            );
        }
    }

    #[test]
    fn erf_reference_values() {
        assert!((erf(0.5) - 0.5204998778130465).abs() < 1e-14);
        assert!((erf(1.0) - 0.8427007929497149).abs() < 1e-14);
        assert!((erf(2.0) - 0.9953222650189527).abs() < 1e-14);
        assert!((erf(3.5) - 0.9999992569016276).abs() < 1e-14);
        assert!((erf(-1.0) + erf(1.0)).abs() < 1e-16);
    }

    #[test]
    fn midpoint_box_on_product_density() {
        let bbox = BoundingBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let v = midpoint_box(&mut |x| Ok(4.0 * x[0] * x[1]), &bbox, 64).unwrap();
        assert!((v - 1.0).abs() < 1e-4);
    }
}
