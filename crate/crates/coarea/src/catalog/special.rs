//! Gamma and modified Bessel functions.

use crate::error::{Error, Result};
use std::f64::consts::PI;

// Lanczos approximation, g = 7, 9 terms.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    let mut x = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z - 1.0 + i as f64);
    }
    x
}

/// Gamma function for positive arguments; relative error below 1e-12 on
/// [1e-3, 170]. Larger arguments overflow f64, use [`log_gamma`] instead.
pub fn gamma_fn(r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("gamma needs a positive argument, got {r}")));
    }
    if r > 170.0 {
        return Err(Error::Overflow(format!(
            "gamma({r}) exceeds f64 range; use log_gamma"
        )));
    }
    if r < 0.5 {
        // one recurrence step keeps the Lanczos kernel in its sweet spot
        return Ok(gamma_fn(r + 1.0)? / r);
    }
    // t^(z-1/2) e^(-t) assembled in log scale; either factor alone would
    // overflow long before gamma itself does
    let t = r + LANCZOS_G - 0.5;
    Ok((2.0 * PI).sqrt() * ((r - 0.5) * t.ln() - t).exp() * lanczos_sum(r))
}

/// Natural log of the gamma function for positive arguments.
pub fn log_gamma(r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("log_gamma needs a positive argument, got {r}")));
    }
    if r < 0.5 {
        return Ok(log_gamma(r + 1.0)? - r.ln());
    }
    let t = r + LANCZOS_G - 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (r - 0.5) * t.ln() - t + lanczos_sum(r).ln())
}

/// Modified Bessel function of the first kind, `I_nu(y)` for `y >= 0` and
/// `nu > -1`.
///
/// The ascending series has positive terms (no cancellation) and is summed to
/// relative accuracy 1e-15 for y <= 30; beyond that the large-argument
/// asymptotic expansion takes over.
pub fn bessel_i(nu: f64, y: f64) -> Result<f64> {
    if y < 0.0 {
        return Err(Error::Domain(format!("bessel_i needs y >= 0, got {y}")));
    }
    if nu <= -1.0 {
        return Err(Error::Domain(format!("bessel_i needs nu > -1, got {nu}")));
    }
    if y == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    if y <= 30.0 {
        bessel_i_series(nu, y)
    } else {
        Ok(bessel_i_asymptotic(nu, y))
    }
}

/// Natural log of `I_nu(y)`, stable far beyond the overflow point of the
/// direct value (`y` up to ~1e6).
pub fn log_bessel_i(nu: f64, y: f64) -> Result<f64> {
    if y < 0.0 || nu <= -1.0 {
        return Err(Error::Domain(format!("log_bessel_i needs y >= 0, nu > -1; got ({nu}, {y})")));
    }
    if y == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if y <= 30.0 {
        Ok(bessel_i_series(nu, y)?.ln())
    } else {
        let mu = 4.0 * nu * nu;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut prev = f64::INFINITY;
        for j in 1..40 {
            let i = (2 * j - 1) as f64;
            term *= -(mu - i * i) / (j as f64 * 8.0 * y);
            if term.abs() >= prev {
                break;
            }
            sum += term;
            prev = term.abs();
        }
        Ok(y - 0.5 * (2.0 * PI * y).ln() + sum.ln())
    }
}

fn bessel_i_series(nu: f64, y: f64) -> Result<f64> {
    let q = 0.25 * y * y;
    // term_j = q^j / (j! Gamma(nu + j + 1))
    let mut term = (-log_gamma(nu + 1.0)?).exp();
    let mut sum = term;
    for j in 1..700 {
        term *= q / (j as f64 * (nu + j as f64));
        sum += term;
        if term < 1e-16 * sum {
            break;
        }
    }
    // prefactor (y/2)^nu in log space to dodge premature under/overflow
    Ok((nu * (0.5 * y).ln()).exp() * sum)
}

/// Large-argument expansion: e^y/sqrt(2 pi y) * sum (-1)^j a_j(nu) / y^j,
/// a_j = prod_{i<=j} (4 nu^2 - (2i-1)^2) / (j! 8^j), truncated at the
/// smallest term.
fn bessel_i_asymptotic(nu: f64, y: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for j in 1..40 {
        let i = (2 * j - 1) as f64;
        term *= -(mu - i * i) / (j as f64 * 8.0 * y);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
    }
    y.exp() / (2.0 * PI * y).sqrt() * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;

    #[test]
    fn gamma_at_half_integers_and_integers() {
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() / PI.sqrt() < 1e-13);
        assert!((gamma_fn(5.0).unwrap() - 24.0).abs() / 24.0 < 1e-13);
        assert!((gamma_fn(1.5).unwrap() - 0.5 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma_fn(1.0).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gamma_recurrence_holds_across_the_domain() {
        let mut r = 1e-3;
        while r < 169.0 {
            let lhs = gamma_fn(r + 1.0).unwrap();
            let rhs = r * gamma_fn(r).unwrap();
            assert!((lhs - rhs).abs() / rhs.abs() < 1e-12, "r = {r}");
            r *= 1.7;
        }
    }

    #[test]
    fn gamma_duplication_formula() {
        for z in [0.25, 0.8, 2.3, 10.0, 41.7] {
            let lhs = gamma_fn(z).unwrap() * gamma_fn(z + 0.5).unwrap();
            let rhs =
                2.0f64.powf(1.0 - 2.0 * z) * PI.sqrt() * gamma_fn(2.0 * z).unwrap();
            assert!((lhs - rhs).abs() / rhs.abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn log_gamma_agrees_with_gamma_and_extends_it() {
        for r in [0.01, 0.7, 5.0, 42.0, 169.5] {
            let lg = log_gamma(r).unwrap();
            let g = gamma_fn(r).unwrap();
            assert!((lg - g.ln()).abs() < 1e-11 * (1.0 + lg.abs()), "r = {r}");
        }
        // factorial growth past the overflow cliff
        let lg300 = log_gamma(300.0).unwrap();
        let lg301 = log_gamma(301.0).unwrap();
        assert!((lg301 - lg300 - 300.0f64.ln()).abs() < 1e-9);
        assert!(gamma_fn(171.0).is_err());
    }

    #[test]
    fn bessel_small_order_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.0, 0.0).unwrap(), 0.0);
        // I_{1/2}(y) = sqrt(2/(pi y)) sinh(y)
        let want = (2.0 / PI).sqrt() * 1.0f64.sinh();
        assert!((bessel_i(0.5, 1.0).unwrap() - want).abs() < 1e-14);
        // I_{-1/2}(y) = sqrt(2/(pi y)) cosh(y)
        let want = (2.0 / (PI * 2.0)).sqrt() * 2.0f64.cosh();
        assert!((bessel_i(-0.5, 2.0).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn bessel_i1_of_2_matches_reference_series() {
        // independent oracle: 30 explicit series terms at full precision
        let mut sum = 0.0;
        let mut fact = 1.0;
        for j in 0..30 {
            if j > 0 {
                fact *= j as f64;
            }
            sum += 1.0 / (fact * gamma_fn(j as f64 + 2.0).unwrap());
        }
        let got = bessel_i(1.0, 2.0).unwrap();
        assert!((got - sum).abs() < 1e-13, "got {got}, oracle {sum}");
        assert!((got - 1.5906368546373288).abs() < 1e-12);
    }

    #[test]
    fn bessel_series_matches_integral_representation() {
        // I_nu(y) = (y/2)^nu / (sqrt(pi) Gamma(nu+1/2)) Int_0^pi e^{y cos t} sin^{2 nu} t dt
        for (nu, y) in [(0.0f64, 0.5f64), (0.0, 8.0), (0.5, 2.0), (1.0, 10.0), (2.5, 25.0)] {
            let pref = (nu * (0.5 * y).ln()).exp()
                / (PI.sqrt() * gamma_fn(nu + 0.5).unwrap());
            let (integral, _) = adaptive_simpson(
                &mut |t: f64| Ok((y * t.cos()).exp() * t.sin().powf(2.0 * nu)),
                0.0,
                PI,
                1e-13,
            )
            .unwrap();
            let want = pref * integral;
            let got = bessel_i(nu, y).unwrap();
            assert!(
                (got - want).abs() / want < 1e-10,
                "nu={nu} y={y}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn bessel_asymptotic_joins_the_series_smoothly() {
        for nu in [0.0, 0.5, 1.0, 3.0] {
            let series = bessel_i_series(nu, 30.0).unwrap();
            let asym = bessel_i_asymptotic(nu, 30.0);
            assert!(
                (series - asym).abs() / series < 1e-11,
                "nu={nu}: {series} vs {asym}"
            );
        }
    }
}
