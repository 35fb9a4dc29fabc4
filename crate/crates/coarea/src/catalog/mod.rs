//! Closed-form distribution catalog: univariate models with pdf/cdf/sampler
//! triples, order statistics, degenerate multivariate normals, chi-squared,
//! noncentral chi-squared and Student's t.

mod normal;
mod order;
mod special;

pub use normal::DegenerateNormal;
pub use order::{
    order_stat_joint_pdf, order_stat_joint_pdf_distinct, order_stat_pair_pdf, order_stat_pdf,
};
pub use special::{bessel_i, gamma_fn, log_bessel_i, log_gamma};

use crate::error::{Error, Result};
use crate::geom::BoundingBox;
use crate::quad::{std_normal_cdf, std_normal_pdf};
use crate::rng::SplitMix64;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SampleFn = Arc<dyn Fn(&mut SplitMix64) -> f64 + Send + Sync>;

/// A univariate distribution: density, distribution function and a seeded
/// sampler. Cloning shares the underlying closures.
#[derive(Clone)]
pub struct UnivariateModel {
    pub name: String,
    pdf: ScalarFn,
    cdf: ScalarFn,
    sampler: SampleFn,
    /// Exact support (may be infinite).
    support: (f64, f64),
    /// Finite interval carrying all but at most ~1e-9 of the mass.
    bulk: (f64, f64),
}

impl std::fmt::Debug for UnivariateModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnivariateModel")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

impl UnivariateModel {
    pub fn pdf(&self, t: f64) -> f64 {
        (self.pdf)(t)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        (self.cdf)(t)
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> f64 {
        (self.sampler)(rng)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn bulk_interval(&self) -> (f64, f64) {
        self.bulk
    }

    /// Assembles a model from explicit parts. `bulk` must be a finite
    /// interval carrying essentially all of the mass; it drives support-box
    /// truncation downstream.
    pub fn from_parts(
        name: impl Into<String>,
        pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sampler: impl Fn(&mut SplitMix64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
        bulk: (f64, f64),
    ) -> Self {
        UnivariateModel {
            name: name.into(),
            pdf: Arc::new(pdf),
            cdf: Arc::new(cdf),
            sampler: Arc::new(sampler),
            support,
            bulk,
        }
    }

    // !(a < b) also rejects NaN parameters
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Config(format!("uniform needs a < b, got [{a}, {b}]")));
        }
        let inv = 1.0 / (b - a);
        Ok(UnivariateModel {
            name: format!("uniform[{a},{b}]"),
            pdf: Arc::new(move |t| if t >= a && t <= b { inv } else { 0.0 }),
            cdf: Arc::new(move |t| ((t - a) * inv).clamp(0.0, 1.0)),
            sampler: Arc::new(move |rng| rng.next_range(a, b)),
            support: (a, b),
            bulk: (a, b),
        })
    }

    // !(a < b) also rejects NaN parameters
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) {
            return Err(Error::Config(format!("normal needs sd > 0, got {sd}")));
        }
        Ok(UnivariateModel {
            name: format!("normal({mean},{sd})"),
            pdf: Arc::new(move |t| std_normal_pdf((t - mean) / sd) / sd),
            cdf: Arc::new(move |t| std_normal_cdf((t - mean) / sd)),
            sampler: Arc::new(move |rng| mean + sd * rng.next_normal()),
            support: (f64::NEG_INFINITY, f64::INFINITY),
            // +-6.5 sd leaves ~8e-11 two-sided tail mass
            bulk: (mean - 6.5 * sd, mean + 6.5 * sd),
        })
    }

    pub fn std_normal() -> Self {
        Self::normal(0.0, 1.0).unwrap()
    }

    /// Catalog lookup used by the CLI: `uniform {a, b}` or `normal {mean, sd}`.
    pub fn by_name(name: &str, params: &serde_json::Value) -> Result<Self> {
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            match params.get(key) {
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::Config(format!("parameter `{key}` must be a number"))),
                None => default
                    .ok_or_else(|| Error::Config(format!("model `{name}` needs parameter `{key}`"))),
            }
        };
        match name {
            "uniform" => UnivariateModel::uniform(get("a", Some(0.0))?, get("b", Some(1.0))?),
            "normal" => UnivariateModel::normal(get("mean", Some(0.0))?, get("sd", Some(1.0))?),
            other => Err(Error::Config(format!("unknown univariate model `{other}`"))),
        }
    }
}

/// Independent product of univariate marginals; the joint density is the
/// product of the factors.
#[derive(Debug, Clone)]
pub struct ProductModel {
    pub components: Vec<UnivariateModel>,
}

impl ProductModel {
    pub fn new(components: Vec<UnivariateModel>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("product model needs at least one factor".into()));
        }
        Ok(ProductModel { components })
    }

    pub fn iid(model: UnivariateModel, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("iid product needs k >= 1".into()));
        }
        Ok(ProductModel { components: vec![model; k] })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.components.iter().zip(x).map(|(m, &t)| m.pdf(t)).product()
    }

    pub fn sample_into(&self, rng: &mut SplitMix64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.components.iter().map(|m| m.sample(rng)));
    }

    pub fn bulk_box(&self) -> BoundingBox {
        let lo = self.components.iter().map(|m| m.bulk_interval().0).collect();
        let hi = self.components.iter().map(|m| m.bulk_interval().1).collect();
        BoundingBox::new(lo, hi).expect("bulk intervals are proper")
    }
}

/// Chi-squared density with `k` degrees of freedom; 0 for y <= 0.
pub fn chi2_pdf(k: usize, y: f64) -> f64 {
    assert!(k >= 1, "chi2_pdf needs k >= 1");
    if y <= 0.0 {
        return 0.0;
    }
    let kh = k as f64 / 2.0;
    let lg = log_gamma(kh).expect("k/2 > 0");
    ((kh - 1.0) * y.ln() - 0.5 * y - kh * 2.0f64.ln() - lg).exp()
}

/// Draws chi-squared variates as sums of squared standard normals.
pub fn chi2_sampler(k: usize) -> impl Fn(&mut SplitMix64) -> f64 {
    move |rng| (0..k).map(|_| rng.next_normal().powi(2)).sum()
}

/// Noncentral chi-squared density: (1/2) e^{-(y+lambda)/2} (y/lambda)^{k/4-1/2}
/// I_{k/2-1}(sqrt(lambda y)).
///
/// Evaluated in log scale so large noncentrality or far tails cannot
/// overflow; for lambda below 1e-10 the removable singularity is bridged by
/// the central density.
pub fn noncentral_chi2_pdf(k: usize, lambda: f64, y: f64) -> f64 {
    assert!(k >= 1, "noncentral_chi2_pdf needs k >= 1");
    assert!(lambda >= 0.0, "noncentral_chi2_pdf needs lambda >= 0, got {lambda}");
    if y <= 0.0 {
        return 0.0;
    }
    if lambda < 1e-10 {
        return chi2_pdf(k, y);
    }
    let nu = k as f64 / 2.0 - 1.0;
    let z = (lambda * y).sqrt();
    let log_i = log_bessel_i(nu, z).expect("nu > -1 and z >= 0");
    let log_pdf = -(y + lambda) / 2.0 + (k as f64 / 4.0 - 0.5) * (y.ln() - lambda.ln())
        + log_i
        - 2.0f64.ln();
    log_pdf.exp()
}

/// Student's t density with `k` degrees of freedom.
pub fn student_t_pdf(k: usize, y: f64) -> f64 {
    assert!(k >= 1, "student_t_pdf needs k >= 1");
    let kf = k as f64;
    let lg = log_gamma((kf + 1.0) / 2.0).unwrap() - log_gamma(kf / 2.0).unwrap();
    let log_pdf = lg
        - 0.5 * (kf * std::f64::consts::PI).ln()
        - 0.5 * (kf + 1.0) * (y * y / kf).ln_1p();
    log_pdf.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use std::f64::consts::PI;

    #[test]
    fn chi2_reference_values() {
        // direct evaluation of the closed form
        assert!((chi2_pdf(2, 2.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        // k=1 at y=1 equals the square-map pushforward of a standard normal
        let want = (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert!((chi2_pdf(1, 1.0) - want).abs() < 1e-15);
        // density vanishes at the origin for k > 2
        assert_eq!(chi2_pdf(4, 0.0), 0.0);
        assert!(chi2_pdf(4, 1e-300) < 1e-150);
    }

    #[test]
    fn chi2_integrates_to_one() {
        for k in [1usize, 2, 3, 7] {
            // substitute y = u^2 for k = 1 to remove the integrable singularity
            let mass = if k == 1 {
                adaptive_simpson(&mut |u| Ok(chi2_pdf(1, u * u) * 2.0 * u), 1e-8, 12.0, 1e-11)
                    .unwrap()
                    .0
            } else {
                adaptive_simpson(&mut |y| Ok(chi2_pdf(k, y)), 0.0, 120.0, 1e-11).unwrap().0
            };
            assert!((mass - 1.0).abs() < 1e-8, "k={k}: {mass}");
        }
    }

    #[test]
    fn noncentral_chi2_reference_value() {
        // k=2, lambda=1, y=1: (1/2) e^{-1} I_0(1)
        let want = 0.5 * (-1.0f64).exp() * bessel_i(0.0, 1.0).unwrap();
        assert!((noncentral_chi2_pdf(2, 1.0, 1.0) - want).abs() < 1e-15);
        assert!((want - 0.23287980379682025).abs() < 1e-12);
    }

    #[test]
    fn noncentral_limits() {
        // small-lambda limit matches the central density
        for y in [0.5, 2.0, 6.0] {
            let nc = noncentral_chi2_pdf(3, 1e-8, y);
            assert!((nc - chi2_pdf(3, y)).abs() < 1e-4, "y={y}");
        }
        // vanishes at the origin for k > 2
        assert_eq!(noncentral_chi2_pdf(4, 1.0, 0.0), 0.0);
        assert!(noncentral_chi2_pdf(4, 1.0, 1e-280) < 1e-130);
    }

    #[test]
    fn student_t_reference_values() {
        assert!((student_t_pdf(1, 0.0) - 1.0 / PI).abs() < 1e-13);
        // k=2, y=1: Gamma(1.5)/(sqrt(2 pi) Gamma(1)) (1.5)^{-1.5}
        let want = gamma_fn(1.5).unwrap() / (2.0 * PI).sqrt() * 1.5f64.powf(-1.5);
        assert!((student_t_pdf(2, 1.0) - want).abs() < 1e-14);
        // large k approaches the standard normal
        assert!((student_t_pdf(1000, 0.0) - std_normal_pdf(0.0)).abs() < 1e-3);
    }

    #[test]
    fn uniform_model_basics() {
        let u = UnivariateModel::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.pdf(0.5), 1.0);
        assert_eq!(u.pdf(1.5), 0.0);
        assert_eq!(u.cdf(-1.0), 0.0);
        assert_eq!(u.cdf(2.0), 1.0);
        assert!(UnivariateModel::uniform(1.0, 1.0).is_err());
    }

    #[test]
    fn model_cdf_limits_and_consistency_with_pdf() {
        for model in [
            UnivariateModel::uniform(-1.0, 3.0).unwrap(),
            UnivariateModel::std_normal(),
            UnivariateModel::normal(2.0, 0.5).unwrap(),
        ] {
            assert!(model.cdf(-1e6) < 1e-12);
            assert!((model.cdf(1e6) - 1.0).abs() < 1e-12);
            let (lo, hi) = model.bulk_interval();
            let h = 1e-5;
            let mut t = lo + 0.05 * (hi - lo);
            let mut prev_cdf = model.cdf(t - 1e-9);
            while t < hi - 0.05 * (hi - lo) {
                let fd = (model.cdf(t + h) - model.cdf(t - h)) / (2.0 * h);
                assert!(
                    (fd - model.pdf(t)).abs() < 1e-5 * (1.0 + model.pdf(t)),
                    "{}: t={t}",
                    model.name
                );
                let c = model.cdf(t);
                assert!(c + 1e-12 >= prev_cdf, "{} cdf not monotone at {t}", model.name);
                prev_cdf = c;
                t += (hi - lo) / 37.0;
            }
        }
    }

    #[test]
    fn product_model_pdf_and_box() {
        let p = ProductModel::iid(UnivariateModel::uniform(0.0, 1.0).unwrap(), 2).unwrap();
        assert_eq!(p.pdf(&[0.5, 0.5]), 1.0);
        assert_eq!(p.pdf(&[0.5, 1.5]), 0.0);
        let b = p.bulk_box();
        assert_eq!(b.lo, vec![0.0, 0.0]);
        assert_eq!(b.hi, vec![1.0, 1.0]);
    }

    #[test]
    fn catalog_lookup_by_name() {
        let v: serde_json::Value = serde_json::json!({"mean": 1.0, "sd": 2.0});
        let m = UnivariateModel::by_name("normal", &v).unwrap();
        assert!((m.pdf(1.0) - std_normal_pdf(0.0) / 2.0).abs() < 1e-15);
        assert!(UnivariateModel::by_name("beta", &v).is_err());
    }
}
