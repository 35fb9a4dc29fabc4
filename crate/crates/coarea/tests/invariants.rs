//! Cross-module invariants: every density operator is checked against an
//! independently sampled Monte Carlo batch, and the Student's t construction
//! is reproduced through the ratio-density machinery.

use coarea::catalog::{chi2_pdf, log_gamma, student_t_pdf, ProductModel, UnivariateModel};
use coarea::density::DensitySpec;
use coarea::linalg::Mat;
use coarea::mc::{histogram_compare, ks_distance, push_samples};
use coarea::pushforward::{
    product_density, pushforward_affine, pushforward_area, pushforward_equal, ratio_density,
    sample_mean_density,
};
use coarea::quad::NumericCdf;
use coarea::{BoundingBox, MapExpr};

fn bbox1(lo: f64, hi: f64) -> BoundingBox {
    BoundingBox::new(vec![lo], vec![hi]).unwrap()
}

/// Density of sqrt(Y/k) for Y ~ chi2(k): 2 k^{k/2} t^{k-1} e^{-k t^2/2} /
/// (2^{k/2} Gamma(k/2)), the scaled chi distribution.
fn sqrt_chi2_over_k(k: usize) -> UnivariateModel {
    let kf = k as f64;
    let log_norm = (kf / 2.0) * (kf / 2.0).ln() + 2.0f64.ln() - log_gamma(kf / 2.0).unwrap();
    let pdf = move |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            (log_norm + (kf - 1.0) * t.ln() - kf * t * t / 2.0).exp()
        }
    };
    let cdf_table = NumericCdf::from_pdf(&pdf, 0.0, 12.0, 16384);
    let sampler = move |rng: &mut coarea::rng::SplitMix64| {
        let y: f64 = (0..k).map(|_| rng.next_normal().powi(2)).sum();
        (y / kf).sqrt()
    };
    UnivariateModel::from_parts(
        format!("sqrt(chi2({k})/{k})"),
        pdf,
        move |t| cdf_table.eval(t),
        sampler,
        (0.0, f64::INFINITY),
        (1e-12, 6.0 + kf.sqrt()),
    )
}

#[test]
fn student_t_matches_the_ratio_construction() {
    // T = X / sqrt(Y/k) with X ~ N(0,1), Y ~ chi2(k): the ratio-density
    // integral of the joint must reproduce the closed form within 1e-4
    for k in [1usize, 3, 5] {
        let joint = ProductModel::new(vec![UnivariateModel::std_normal(), sqrt_chi2_over_k(k)])
            .unwrap();
        let fx = DensitySpec::from_product_model(&joint);
        for y in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            let via_ratio = ratio_density(&fx, y).unwrap();
            let closed = student_t_pdf(k, y);
            assert!(
                (via_ratio - closed).abs() < 1e-4,
                "k={k} y={y}: ratio {via_ratio} vs closed {closed}"
            );
        }
    }
}

#[test]
fn equal_route_agrees_with_sampling() {
    // Y = X^3 + X, X ~ N(0,1): smooth bijection, single branch
    let phi = MapExpr::parse("x1^3+x1", 1, 1).unwrap();
    let model = UnivariateModel::std_normal();
    let fx = DensitySpec::from_univariate(&model);
    let fy = pushforward_equal(&fx, &phi, &[bbox1(-8.5, 8.5)]).unwrap();
    let pdf = move |y: f64| fy.eval(&[y]).unwrap_or(0.0);
    let table = NumericCdf::from_pdf(&pdf, -45.0, 45.0, 8192);
    let batch = push_samples(&model, &phi, 1_000_000, 1001).unwrap();
    let ks = ks_distance(&batch, &|t| table.eval(t)).unwrap();
    assert!(ks < 0.005, "equal-route KS {ks}");
}

#[test]
fn affine_route_agrees_with_sampling() {
    let model = UnivariateModel::std_normal();
    let fx = DensitySpec::from_univariate(&model);
    let a = Mat::from_rows(&[vec![2.0]]);
    let fy = pushforward_affine(&fx, &a, &[1.0]).unwrap();
    let pdf = move |y: f64| fy.eval(&[y]).unwrap_or(0.0);
    let table = NumericCdf::from_pdf(&pdf, -26.0, 28.0, 8192);
    let phi = MapExpr::parse("2*x1+1", 1, 1).unwrap();
    let batch = push_samples(&model, &phi, 1_000_000, 1002).unwrap();
    let ks = ks_distance(&batch, &|t| table.eval(t)).unwrap();
    assert!(ks < 0.005, "affine-route KS {ks}");
}

#[test]
fn area_route_agrees_with_sampling_through_the_chart() {
    // Y = (X, X) on the diagonal; arclength coordinate s = sqrt(2) X.
    // The H^1 density evaluated along the diagonal, read in the arclength
    // chart, must match the distribution of sqrt(2) X.
    let model = UnivariateModel::std_normal();
    let fx = DensitySpec::from_univariate(&model);
    let phi = MapExpr::parse("x1; x1", 1, 2).unwrap();
    let pdf = move |s: f64| {
        let u = s / 2.0f64.sqrt();
        pushforward_area(&fx, &phi, &[u, u]).map(|d| d.value).unwrap_or(0.0)
    };
    let table = NumericCdf::from_pdf(&pdf, -10.0, 10.0, 2048);
    let scale = MapExpr::parse("sqrt(2)*x1", 1, 1).unwrap();
    let batch = push_samples(&model, &scale, 200_000, 1003).unwrap();
    let ks = ks_distance(&batch, &|t| table.eval(t)).unwrap();
    assert!(ks < 0.005, "area-route KS {ks}");
}

#[test]
fn sample_mean_route_agrees_with_sampling() {
    let model = UnivariateModel::uniform(0.0, 1.0).unwrap();
    let grid = sample_mean_density(&model, 3, &bbox1(0.0, 1.0), &[101], 256).unwrap();
    assert!((grid.mass_in_box - 1.0).abs() < 1e-3);
    let p = ProductModel::iid(model, 3).unwrap();
    let mean_map = MapExpr::parse("(x1+x2+x3)/3", 3, 1).unwrap();
    let batch = push_samples(&p, &mean_map, 1_000_000, 1004).unwrap();
    let (sup, l1) = histogram_compare(&grid, &batch).unwrap();
    // bin noise at the 1.875 peak: sigma ~ sqrt(p/N)/width ~ 0.014
    assert!(sup < 0.06, "sample-mean sup {sup}");
    assert!(l1 < 0.01, "sample-mean l1 {l1}");
    let pdf = move |y: f64| match grid.cell_of(std::slice::from_ref(&y)) {
        Some(c) => grid.values[c],
        None => 0.0,
    };
    let table = NumericCdf::from_pdf(&pdf, 0.0, 1.0, 8192);
    let ks = ks_distance(&batch, &|t| table.eval(t)).unwrap();
    assert!(ks < 0.005, "sample-mean KS {ks}");
}

#[test]
fn product_route_agrees_with_sampling() {
    let model = UnivariateModel::uniform(0.0, 1.0).unwrap();
    let p = ProductModel::iid(model, 2).unwrap();
    let fx = DensitySpec::from_product_model(&p);
    let pdf = move |y: f64| {
        if y <= 0.0 || y >= 1.0 {
            0.0
        } else {
            product_density(&fx, y).unwrap_or(0.0)
        }
    };
    let table = NumericCdf::from_pdf(&pdf, 1e-9, 1.0, 8192);
    let phi = MapExpr::parse("x1*x2", 2, 1).unwrap();
    let batch = push_samples(&p, &phi, 1_000_000, 1005).unwrap();
    let ks = ks_distance(&batch, &|t| table.eval(t)).unwrap();
    assert!(ks < 0.005, "product-route KS {ks}");
}

#[test]
fn ratio_route_agrees_with_sampling() {
    let p = ProductModel::iid(UnivariateModel::std_normal(), 2).unwrap();
    let fx = DensitySpec::from_product_model(&p);
    let pdf = move |y: f64| ratio_density(&fx, y).unwrap_or(0.0);
    // the ratio of normals is Cauchy; the tan substitution handles its tails
    let table = NumericCdf::from_pdf_whole_line(&pdf, 4096);
    let phi = MapExpr::parse("x1/x2", 2, 1).unwrap();
    let batch = push_samples(&p, &phi, 200_000, 1006).unwrap();
    let ks = ks_distance(&batch, &|t| table.eval_whole_line(t)).unwrap();
    assert!(ks < 0.005, "ratio-route KS {ks}");
}

#[test]
fn degenerate_normal_pullback_matches_its_carrier_coordinates() {
    // samples pulled back to standard-normal carrier coordinates must be
    // N(0, I_m); this is the histogram pullback promised for carrier grids
    let sigma = Mat::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0]]);
    let n = coarea::catalog::DegenerateNormal::new(vec![1.0, 1.0], sigma).unwrap();
    assert_eq!(n.rank(), 1);
    let mut rng = coarea::rng::SplitMix64::new(1007);
    let mut zs = Vec::with_capacity(100_000);
    for _ in 0..100_000 {
        let x = n.sample(&mut rng);
        let z = n.carrier_coords(&x).unwrap();
        zs.push(z[0]);
    }
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = zs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &z) in zs.iter().enumerate() {
        let f = coarea::quad::std_normal_cdf(z);
        sup = sup.max((f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs()));
    }
    assert!(sup < 0.006, "carrier pullback KS {sup}");
}

#[test]
fn order_statistic_sampling_matches_the_closed_form() {
    // median of 5 uniforms, sampled by sorting, against the closed form
    let u = UnivariateModel::uniform(0.0, 1.0).unwrap();
    let pdf = {
        let u = u.clone();
        move |y: f64| coarea::catalog::order_stat_pdf(&u, 5, 3, y).unwrap_or(0.0)
    };
    let table = NumericCdf::from_pdf(&pdf, 0.0, 1.0, 8192);
    let mut rng = coarea::rng::SplitMix64::new(1008);
    const N: usize = 200_000;
    let mut medians = Vec::with_capacity(N);
    for _ in 0..N {
        let mut draws = [0.0f64; 5];
        for d in &mut draws {
            *d = rng.next_f64();
        }
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(draws[2]);
    }
    medians.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = medians.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in medians.iter().enumerate() {
        let f = table.eval(x);
        sup = sup.max((f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs()));
    }
    assert!(sup < 0.005, "order-statistic KS {sup}");
}

#[test]
fn coarea_grid_against_chi2_catalog_entry() {
    // one more closed-form/numeric cross-check pinned away from the
    // acceptance grid: chi2(3) on a short grid at modest fiber resolution
    let p = ProductModel::iid(UnivariateModel::std_normal(), 3).unwrap();
    let fx = DensitySpec::from_product_model(&p);
    let phi = MapExpr::parse("x1^2+x2^2+x3^2", 3, 1).unwrap();
    let grid = coarea::pushforward::pushforward_coarea(&fx, &phi, &bbox1(0.5, 6.0), &[11], 128)
        .unwrap();
    for (c, v) in grid.iter_cells() {
        let want = chi2_pdf(3, c[0]);
        assert!((v - want).abs() < 2e-3, "y={}: {v} vs {want}", c[0]);
    }
}
