//! Density carriers: `DensitySpec` pairs an evaluation function with the
//! support descriptor and reference measure its values are taken against;
//! `GridDensity` is a cell-centered numeric rendering of a density over an
//! output box, with its mass bookkeeping.

use crate::catalog::{DegenerateNormal, ProductModel, UnivariateModel};
use crate::error::{Error, Result};
use crate::expr::MapExpr;
use crate::geom::BoundingBox;
use crate::linalg::Mat;
use crate::quad::midpoint_box;
use std::sync::Arc;

/// Where a density lives.
#[derive(Debug, Clone)]
pub enum Support {
    /// Full-dimensional support truncated to an axis-aligned box.
    Box(BoundingBox),
    /// Affine subspace `{origin + basis * u}` with orthonormal basis columns.
    AffineSubspace { origin: Vec<f64>, basis: Mat },
    /// Image of a chart map over a parameter box.
    Manifold { chart: MapExpr, domain: BoundingBox },
    /// Finite point list (counting measure).
    Discrete(Vec<Vec<f64>>),
}

/// The measure the density values are taken against.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceMeasure {
    Lebesgue { dim: usize },
    /// m-dimensional Hausdorff measure on the carrier described by the
    /// support descriptor.
    Hausdorff { dim: usize },
    Counting,
}

impl ReferenceMeasure {
    /// Short tag used in CSV/JSON exports.
    pub fn tag(&self) -> String {
        match self {
            ReferenceMeasure::Lebesgue { dim } => format!("lebesgue-{dim}"),
            ReferenceMeasure::Hausdorff { dim } => format!("hausdorff-{dim}"),
            ReferenceMeasure::Counting => "counting".into(),
        }
    }
}

type EvalFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A density function, its support and its reference measure.
#[derive(Clone)]
pub struct DensitySpec {
    eval: EvalFn,
    ambient_dim: usize,
    support: Support,
    reference: ReferenceMeasure,
    normalization_estimate: f64,
    /// Upper bound on mass outside the support descriptor, when known.
    tail_bound: Option<f64>,
}

impl std::fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DensitySpec")
            .field("ambient_dim", &self.ambient_dim)
            .field("support", &self.support)
            .field("reference", &self.reference)
            .field("normalization_estimate", &self.normalization_estimate)
            .finish()
    }
}

impl DensitySpec {
    pub fn from_fn(
        ambient_dim: usize,
        support: Support,
        reference: ReferenceMeasure,
        normalization_estimate: f64,
        tail_bound: Option<f64>,
        eval: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        DensitySpec {
            eval: Arc::new(eval),
            ambient_dim,
            support,
            reference,
            normalization_estimate,
            tail_bound,
        }
    }

    /// Joint density of independent marginals, supported on the product of
    /// the marginal bulk intervals. The tail bound is the union bound over
    /// the marginal tails.
    pub fn from_product_model(model: &ProductModel) -> Self {
        let bbox = model.bulk_box();
        let tail: f64 = model
            .components
            .iter()
            .map(|m| {
                let (lo, hi) = m.bulk_interval();
                m.cdf(lo) + (1.0 - m.cdf(hi))
            })
            .sum();
        let m = model.clone();
        DensitySpec {
            eval: Arc::new(move |x| Ok(m.pdf(x))),
            ambient_dim: model.dim(),
            support: Support::Box(bbox),
            reference: ReferenceMeasure::Lebesgue { dim: model.dim() },
            normalization_estimate: 1.0,
            tail_bound: Some(tail),
        }
    }

    pub fn from_univariate(model: &UnivariateModel) -> Self {
        Self::from_product_model(&ProductModel::new(vec![model.clone()]).unwrap())
    }

    /// Degenerate normals live on their carrier subspace against Hausdorff
    /// measure; full-rank ones are ordinary Lebesgue densities.
    pub fn from_degenerate_normal(normal: &DegenerateNormal) -> Self {
        let k = normal.dim();
        let m = normal.rank();
        let n = normal.clone();
        let eval: EvalFn = Arc::new(move |x| Ok(n.pdf_or_zero(x)));
        if m == k {
            // bulk box: mean +- 6.5 sqrt(diagonal variance)
            let lo = (0..k)
                .map(|i| normal.mean()[i] - 6.5 * normal.sigma()[(i, i)].sqrt())
                .collect();
            let hi = (0..k)
                .map(|i| normal.mean()[i] + 6.5 * normal.sigma()[(i, i)].sqrt())
                .collect();
            DensitySpec {
                eval,
                ambient_dim: k,
                support: Support::Box(BoundingBox::new(lo, hi).expect("positive variances")),
                reference: ReferenceMeasure::Lebesgue { dim: k },
                normalization_estimate: 1.0,
                tail_bound: Some(k as f64 * 2e-10),
            }
        } else {
            DensitySpec {
                eval,
                ambient_dim: k,
                support: Support::AffineSubspace {
                    origin: normal.mean().to_vec(),
                    basis: normal.p_matrix().clone(),
                },
                reference: ReferenceMeasure::Hausdorff { dim: m },
                normalization_estimate: 1.0,
                tail_bound: Some(0.0),
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.len(),
            });
        }
        (self.eval)(x)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn reference(&self) -> &ReferenceMeasure {
        &self.reference
    }

    pub fn normalization_estimate(&self) -> f64 {
        self.normalization_estimate
    }

    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    pub fn support_box(&self) -> Result<&BoundingBox> {
        match &self.support {
            Support::Box(b) => Ok(b),
            _ => Err(Error::Dimension(
                "operation needs a box-supported Lebesgue density".into(),
            )),
        }
    }

    /// Midpoint-rule mass over the support box (Lebesgue densities only);
    /// used by normalization audits.
    pub fn estimate_mass(&self, res: usize) -> Result<f64> {
        let bbox = self.support_box()?.clone();
        let eval = self.eval.clone();
        midpoint_box(&mut |x| (eval)(x), &bbox, res)
    }
}

/// Cell-centered density values over a regular lattice on an output box.
#[derive(Debug, Clone)]
pub struct GridDensity {
    pub bounds: BoundingBox,
    /// Cells per axis; values are stored row-major, last axis fastest.
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub reference: ReferenceMeasure,
    pub mass_in_box: f64,
    pub truncation_note: String,
}

impl GridDensity {
    pub fn new(
        bounds: BoundingBox,
        shape: Vec<usize>,
        values: Vec<f64>,
        reference: ReferenceMeasure,
        truncation_note: String,
    ) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: values.len() });
        }
        if bounds.dim() != shape.len() {
            return Err(Error::Dimension("grid shape rank != box dimension".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("grid density values must be finite and >= 0".into()));
        }
        let cell = Self::cell_volume_of(&bounds, &shape);
        let mass_in_box = values.iter().sum::<f64>() * cell;
        Ok(GridDensity { bounds, shape, values, reference, mass_in_box, truncation_note })
    }

    fn cell_volume_of(bounds: &BoundingBox, shape: &[usize]) -> f64 {
        (0..bounds.dim())
            .map(|a| bounds.extent(a) / shape[a] as f64)
            .product()
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn cell_volume(&self) -> f64 {
        Self::cell_volume_of(&self.bounds, &self.shape)
    }

    /// Center coordinates of the cell with the given multi-index.
    pub fn center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &i)| {
                self.bounds.lo[a] + self.bounds.extent(a) * (i as f64 + 0.5) / self.shape[a] as f64
            })
            .collect()
    }

    /// Flat index of the cell containing `x`, or `None` outside the box.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0usize;
        for a in 0..self.dim() {
            if x[a] < self.bounds.lo[a] || x[a] > self.bounds.hi[a] {
                return None;
            }
            let step = self.bounds.extent(a) / self.shape[a] as f64;
            let mut i = ((x[a] - self.bounds.lo[a]) / step) as usize;
            if i >= self.shape[a] {
                i = self.shape[a] - 1;
            }
            flat = flat * self.shape[a] + i;
        }
        Some(flat)
    }

    /// Iterates `(center, value)` in storage order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        let mut idx = vec![0usize; self.dim()];
        let mut first = true;
        self.values.iter().map(move |&v| {
            if first {
                first = false;
            } else {
                for a in (0..idx.len()).rev() {
                    idx[a] += 1;
                    if idx[a] < self.shape[a] {
                        break;
                    }
                    idx[a] = 0;
                }
            }
            (self.center(&idx), v)
        })
    }

    /// CSV rows `y1,...,yn,value` with 17-significant-digit formatting, so
    /// exported values round-trip bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in 0..self.dim() {
            out.push_str(&format!("y{},", a + 1));
        }
        out.push_str("value\n");
        for (center, v) in self.iter_cells() {
            for c in center {
                out.push_str(&format!("{c:.16e},"));
            }
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bounds": {"lo": self.bounds.lo, "hi": self.bounds.hi},
            "shape": self.shape,
            "reference_measure": self.reference.tag(),
            "mass_in_box": self.mass_in_box,
            "truncation_note": self.truncation_note,
            "values": self.values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::UnivariateModel;

    #[test]
    fn carriers_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<DensitySpec>();
        assert_send_sync::<GridDensity>();
        assert_send_sync::<crate::MapExpr>();
        assert_send_sync::<crate::FiberQuadrature>();
        assert_send_sync::<UnivariateModel>();
        assert_send_sync::<crate::catalog::DegenerateNormal>();
    }

    #[test]
    fn product_density_spec_reports_tails() {
        let p = ProductModel::iid(UnivariateModel::std_normal(), 2).unwrap();
        let d = DensitySpec::from_product_model(&p);
        assert_eq!(d.ambient_dim(), 2);
        assert!(d.tail_bound().unwrap() < 1e-6);
        let v = d.eval(&[0.0, 0.0]).unwrap();
        assert!((v - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
        // mass over the bulk box is essentially 1
        let mass = d.estimate_mass(64).unwrap();
        assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
    }

    #[test]
    fn grid_density_mass_and_lookup() {
        let bounds = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        // constant density 1 on [0,1]
        let g = GridDensity::new(
            bounds,
            vec![4],
            vec![1.0; 4],
            ReferenceMeasure::Lebesgue { dim: 1 },
            String::new(),
        )
        .unwrap();
        assert!((g.mass_in_box - 1.0).abs() < 1e-15);
        assert_eq!(g.center(&[0]), vec![0.125]);
        assert_eq!(g.cell_of(&[0.3]), Some(1));
        assert_eq!(g.cell_of(&[2.0]), None);
        let cells: Vec<_> = g.iter_cells().collect();
        assert_eq!(cells.len(), 4);
        assert!((cells[3].0[0] - 0.875).abs() < 1e-15);
    }

    #[test]
    fn grid_density_rejects_negative_values() {
        let bounds = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        let r = GridDensity::new(
            bounds,
            vec![2],
            vec![1.0, -0.5],
            ReferenceMeasure::Lebesgue { dim: 1 },
            String::new(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn csv_round_trips_values_exactly(){
        let bounds = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        let vals = vec![0.1, 1.0 / 3.0, 2.0f64.sqrt()];
        let g = GridDensity::new(
            bounds,
            vec![3],
            vals.clone(),
            ReferenceMeasure::Lebesgue { dim: 1 },
            String::new(),
        )
        .unwrap();
        let csv = g.to_csv();
        for (line, want) in csv.lines().skip(1).zip(&vals) {
            let got: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(got, *want);
        }
    }
}
