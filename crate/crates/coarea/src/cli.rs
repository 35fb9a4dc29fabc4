//! Command-line front end: job configs in JSON, four subcommands
//! (`density`, `fiber`, `catalog`, `mc-check`), plot-ready CSV/JSON output.
//!
//! Exit codes: 0 success, 2 config error, 3 numeric failure, 4 threshold
//! violation. Timing goes to stderr so output files stay byte-reproducible
//! run-to-run. `COAREA_THREADS` caps internal parallelism.

use crate::catalog::{
    chi2_pdf, noncentral_chi2_pdf, order_stat_pdf, student_t_pdf, DegenerateNormal, ProductModel,
    UnivariateModel,
};
use crate::density::{DensitySpec, GridDensity, ReferenceMeasure};
use crate::error::{Error, Result};
use crate::expr::MapExpr;
use crate::geom::{fiber_quadrature_levelset, BoundingBox};
use crate::linalg::Mat;
use crate::mc::{histogram_compare, ks_distance, push_samples, VectorSampler};
use crate::pushforward::{
    pushforward_affine, pushforward_area, pushforward_coarea, pushforward_equal,
};
use crate::quad::NumericCdf;
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;

/// One density job: a base density, an optional map, a mode and an output
/// grid, plus an optional Monte Carlo block for `mc-check`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobConfig {
    pub base_density: BaseDensity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<serde_json::Value>,
    pub mode: String,
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_domains: Option<Vec<BoxSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<AffineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
}

/// Exactly one of the variants must be present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BaseDensity {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<NamedModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iid: Option<IidSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<Vec<NamedModel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate_normal: Option<DegenerateNormalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<CatalogSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedModel {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IidSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegenerateNormalSpec {
    pub mean: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

/// Closed-form catalog entry (for `mode = "catalog"` jobs and `mc-check`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSpec {
    fn to_box(&self) -> Result<BoundingBox> {
        BoundingBox::new(self.lo.clone(), self.hi.clone())
            .map_err(|e| Error::Config(format!("bad box: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineSpec {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
    pub grid: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McSpec {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_ks_threshold")]
    pub ks_threshold: f64,
    #[serde(default = "default_sup_threshold")]
    pub sup_threshold: f64,
}

fn default_ks_threshold() -> f64 {
    0.005
}

fn default_sup_threshold() -> f64 {
    0.01
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let mut out = std::io::stdout();
    match dispatch(args, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Syntax { .. }
        | Error::Arity { .. }
        | Error::UnknownVariable { .. }
        | Error::Dimension(_)
        | Error::DimensionMismatch { .. }
        | Error::Index { .. }
        | Error::FactorialOverflow { .. }
        | Error::UnsupportedCodimension { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn dispatch(args: &[String], out: &mut dyn std::io::Write) -> Result<i32> {
    let Some(cmd) = args.first() else {
        return Err(Error::Config(usage()));
    };
    let rest = &args[1..];
    match cmd.as_str() {
        "density" => cmd_density(rest, out),
        "fiber" => cmd_fiber(rest, out),
        "catalog" => cmd_catalog(rest, out),
        "mc-check" => cmd_mc_check(rest, out),
        "--help" | "-h" | "help" => {
            writeln!(out, "{}", usage()).map_err(Error::from)?;
            Ok(EXIT_OK)
        }
        other => Err(Error::Config(format!("unknown subcommand `{other}`\n{}", usage()))),
    }
}

fn usage() -> String {
    "usage:\n  coarea density  --config JOB.json [--out PATH] [--set dotted.key=VALUE ...]\n  \
     coarea fiber    --expr SRC --k K --n N --level V[,V] --box LO,HI[;LO,HI...] \
     --resolution R [--out PATH]\n  \
     coarea catalog  NAME [--k INT] [--lambda F] [--param KEY=VALUE ...] --grid LO,HI,COUNT [--out PATH]\n  \
     coarea mc-check --config JOB.json [--out PATH] [--dump-samples PATH] [--set dotted.key=VALUE ...]"
        .to_string()
}

/// Tiny flag parser: every option is `--key value`.
struct Flags {
    pairs: Vec<(String, String)>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<(Vec<String>, Flags)> {
        let mut positional = Vec::new();
        let mut pairs = Vec::new();
        let mut it = args.iter();
        while let Some(a) = it.next() {
            if let Some(key) = a.strip_prefix("--") {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Config(format!("flag --{key} needs a value")))?;
                pairs.push((key.to_string(), v.clone()));
            } else {
                positional.push(a.clone());
            }
        }
        Ok((positional, Flags { pairs }))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required flag --{key}")))
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.pairs.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn load_config(flags: &Flags) -> Result<JobConfig> {
    let path = flags.require("config")?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {path}: {e}")))?;
    let mut doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
    // --set dotted.path=value overrides any scalar field
    for setting in flags.all("set") {
        let (path, raw) = setting
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set needs key=value, got `{setting}`")))?;
        let value: serde_json::Value =
            serde_json::from_str(raw).unwrap_or(serde_json::Value::String(raw.to_string()));
        set_path(&mut doc, path, value)?;
    }
    serde_json::from_value(doc).map_err(|e| Error::Config(format!("bad job config: {e}")))
}

fn set_path(doc: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if let Ok(idx) = part.parse::<usize>() {
            let arr = cur
                .as_array_mut()
                .ok_or_else(|| Error::Config(format!("--set path `{path}`: not an array")))?;
            if idx >= arr.len() {
                return Err(Error::Config(format!("--set path `{path}`: index {idx} out of range")));
            }
            if last {
                arr[idx] = value;
                return Ok(());
            }
            cur = &mut arr[idx];
        } else {
            let obj = cur
                .as_object_mut()
                .ok_or_else(|| Error::Config(format!("--set path `{path}`: not an object")))?;
            if last {
                obj.insert(part.to_string(), value);
                return Ok(());
            }
            cur = obj
                .entry(part.to_string())
                .or_insert(serde_json::Value::Object(Default::default()));
        }
    }
    Ok(())
}

/// Resolved base density: the evaluable density plus (when available) a
/// sampler for Monte Carlo checks.
struct ResolvedBase {
    density: DensitySpec,
    sampler: Option<Box<dyn VectorSampler>>,
}

fn resolve_base(base: &BaseDensity) -> Result<ResolvedBase> {
    let mut picks = 0;
    picks += base.model.is_some() as u32;
    picks += base.iid.is_some() as u32;
    picks += base.product.is_some() as u32;
    picks += base.degenerate_normal.is_some() as u32;
    picks += base.catalog.is_some() as u32;
    if picks != 1 {
        return Err(Error::Config(
            "base_density needs exactly one of: model, iid, product, degenerate_normal, catalog"
                .into(),
        ));
    }
    if let Some(m) = &base.model {
        let model = UnivariateModel::by_name(&m.name, &m.params)?;
        return Ok(ResolvedBase {
            density: DensitySpec::from_univariate(&model),
            sampler: Some(Box::new(model)),
        });
    }
    if let Some(iid) = &base.iid {
        let model = UnivariateModel::by_name(&iid.name, &iid.params)?;
        let p = ProductModel::iid(model, iid.k)?;
        return Ok(ResolvedBase {
            density: DensitySpec::from_product_model(&p),
            sampler: Some(Box::new(p)),
        });
    }
    if let Some(product) = &base.product {
        let models = product
            .iter()
            .map(|m| UnivariateModel::by_name(&m.name, &m.params))
            .collect::<Result<Vec<_>>>()?;
        let p = ProductModel::new(models)?;
        return Ok(ResolvedBase {
            density: DensitySpec::from_product_model(&p),
            sampler: Some(Box::new(p)),
        });
    }
    if let Some(dn) = &base.degenerate_normal {
        let k = dn.mean.len();
        if dn.sigma.len() != k || dn.sigma.iter().any(|r| r.len() != k) {
            return Err(Error::Config("degenerate_normal.sigma must be k x k".into()));
        }
        let sigma = Mat::from_rows(&dn.sigma);
        let normal = DegenerateNormal::new(dn.mean.clone(), sigma)?;
        return Ok(ResolvedBase {
            density: DensitySpec::from_degenerate_normal(&normal),
            sampler: Some(Box::new(normal)),
        });
    }
    let spec = base.catalog.as_ref().unwrap();
    let pdf = catalog_pdf(&spec.name, &spec.params)?;
    // catalog entries are plain scalar densities over a declared interval
    let (lo, hi) = catalog_default_interval(&spec.name, &spec.params)?;
    let bbox = BoundingBox::new(vec![lo], vec![hi])?;
    let eval = move |x: &[f64]| Ok(pdf(x[0]));
    Ok(ResolvedBase {
        density: DensitySpec::from_fn(
            1,
            crate::density::Support::Box(bbox),
            ReferenceMeasure::Lebesgue { dim: 1 },
            1.0,
            None,
            eval,
        ),
        sampler: None,
    })
}

fn param_f64(params: &serde_json::Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| Error::Config(format!("catalog entry needs numeric parameter `{key}`")))
}

fn param_usize(params: &serde_json::Value, key: &str) -> Result<usize> {
    params
        .get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| Error::Config(format!("catalog entry needs integer parameter `{key}`")))
}

/// Closed-form catalog lookup by name.
fn catalog_pdf(
    name: &str,
    params: &serde_json::Value,
) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    match name {
        "chi2" => {
            let k = param_usize(params, "k")?;
            if k == 0 {
                return Err(Error::Config("chi2 needs k >= 1".into()));
            }
            Ok(Box::new(move |y| chi2_pdf(k, y)))
        }
        "noncentral_chi2" => {
            let k = param_usize(params, "k")?;
            let lambda = param_f64(params, "lambda")?;
            if k == 0 || lambda < 0.0 {
                return Err(Error::Config("noncentral_chi2 needs k >= 1, lambda >= 0".into()));
            }
            Ok(Box::new(move |y| noncentral_chi2_pdf(k, lambda, y)))
        }
        "student_t" => {
            let k = param_usize(params, "k")?;
            if k == 0 {
                return Err(Error::Config("student_t needs k >= 1".into()));
            }
            Ok(Box::new(move |y| student_t_pdf(k, y)))
        }
        "order_stat_uniform" => {
            let k = param_usize(params, "k")?;
            let i = param_usize(params, "i")?;
            let model = UnivariateModel::uniform(0.0, 1.0)?;
            order_stat_pdf(&model, k, i, 0.5)?;
            Ok(Box::new(move |y| order_stat_pdf(&model, k, i, y).unwrap_or(0.0)))
        }
        "normal" | "uniform" => {
            let m = UnivariateModel::by_name(name, params)?;
            Ok(Box::new(move |y| m.pdf(y)))
        }
        other => Err(Error::Config(format!("unknown catalog entry `{other}`"))),
    }
}

fn catalog_default_interval(name: &str, params: &serde_json::Value) -> Result<(f64, f64)> {
    Ok(match name {
        "chi2" | "noncentral_chi2" => (0.0, 200.0),
        "student_t" => (-1e6, 1e6),
        "order_stat_uniform" => (0.0, 1.0),
        "normal" => {
            let m = UnivariateModel::by_name(name, params)?;
            m.bulk_interval()
        }
        "uniform" => {
            let m = UnivariateModel::by_name(name, params)?;
            m.bulk_interval()
        }
        _ => (-1e6, 1e6),
    })
}

fn parse_map_field(config: &JobConfig) -> Result<MapExpr> {
    let v = config
        .map
        .as_ref()
        .ok_or_else(|| Error::Config("this mode needs a `map` field".into()))?;
    MapExpr::from_json(v)
}

/// Computes the GridDensity a job describes.
fn compute_job_grid(config: &JobConfig) -> Result<GridDensity> {
    let base = resolve_base(&config.base_density)?;
    let out_box = config.output.bounds.to_box()?;
    let shape = config.output.grid.clone();
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::Config("output.grid needs positive cell counts".into()));
    }
    if shape.len() != out_box.dim() {
        return Err(Error::Config("output.grid rank != output.box rank".into()));
    }
    match config.mode.as_str() {
        "coarea" => {
            let phi = parse_map_field(config)?;
            if phi.input_dim() <= phi.output_dim() {
                return Err(Error::Config(format!(
                    "mode `coarea` needs k > n, map is {} -> {}",
                    phi.input_dim(),
                    phi.output_dim()
                )));
            }
            let res = config.fiber_resolution.unwrap_or(256);
            pushforward_coarea(&base.density, &phi, &out_box, &shape, res)
        }
        "equal" => {
            let phi = parse_map_field(config)?;
            if phi.input_dim() != phi.output_dim() {
                return Err(Error::Config(format!(
                    "mode `equal` needs k = n, map is {} -> {}",
                    phi.input_dim(),
                    phi.output_dim()
                )));
            }
            let branches = config
                .branch_domains
                .as_ref()
                .ok_or_else(|| Error::Config("mode `equal` needs `branch_domains`".into()))?
                .iter()
                .map(|b| b.to_box())
                .collect::<Result<Vec<_>>>()?;
            let fy = pushforward_equal(&base.density, &phi, &branches)?;
            grid_from_density(&fy, &out_box, &shape, "piecewise-inverse change of variables")
        }
        "area" => {
            let phi = parse_map_field(config)?;
            if phi.input_dim() >= phi.output_dim() {
                return Err(Error::Config(format!(
                    "mode `area` needs k < n, map is {} -> {}",
                    phi.input_dim(),
                    phi.output_dim()
                )));
            }
            let k = phi.input_dim();
            let values = grid_values(&out_box, &shape, &|y| {
                Ok(pushforward_area(&base.density, &phi, y)?.value)
            })?;
            GridDensity::new(
                out_box,
                shape,
                values,
                ReferenceMeasure::Hausdorff { dim: k },
                "pointwise H^k density on the image manifold; zero off it".into(),
            )
        }
        "affine" => {
            let spec = config
                .affine
                .as_ref()
                .ok_or_else(|| Error::Config("mode `affine` needs an `affine` block".into()))?;
            if spec.matrix.is_empty() {
                return Err(Error::Config("affine.matrix must be nonempty".into()));
            }
            let a = Mat::from_rows(&spec.matrix);
            let fy = pushforward_affine(&base.density, &a, &spec.offset)?;
            grid_from_density(&fy, &out_box, &shape, "affine pushforward")
        }
        "catalog" => grid_from_density(&base.density, &out_box, &shape, "catalog density"),
        other => Err(Error::Config(format!(
            "unknown mode `{other}` (expected area | equal | coarea | affine | catalog)"
        ))),
    }
}

fn grid_values(
    out_box: &BoundingBox,
    shape: &[usize],
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
) -> Result<Vec<f64>> {
    let total: usize = shape.iter().product();
    let n = shape.len();
    let mut values = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let y: Vec<f64> = (0..n)
            .map(|a| out_box.lo[a] + out_box.extent(a) * (idx[a] as f64 + 0.5) / shape[a] as f64)
            .collect();
        values.push(f(&y)?);
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(values)
}

fn grid_from_density(
    fy: &DensitySpec,
    out_box: &BoundingBox,
    shape: &[usize],
    note: &str,
) -> Result<GridDensity> {
    let values = grid_values(out_box, shape, &|y| fy.eval(y))?;
    GridDensity::new(
        out_box.clone(),
        shape.to_vec(),
        values,
        fy.reference().clone(),
        note.into(),
    )
}

fn write_or_print(out: &mut dyn std::io::Write, path: Option<&str>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn cmd_density(args: &[String], out: &mut dyn std::io::Write) -> Result<i32> {
    let (_, flags) = Flags::parse(args)?;
    let config = load_config(&flags)?;
    let started = std::time::Instant::now();
    let grid = compute_job_grid(&config)?;
    let csv = grid.to_csv();
    let meta = serde_json::json!({
        "config": config,
        "grid": grid.to_json(),
    });
    let base = flags
        .get("out")
        .map(str::to_string)
        .or_else(|| config.output.path.clone());
    match base {
        Some(p) => {
            let json_path = sibling_json_path(&p);
            std::fs::write(&p, &csv)?;
            std::fs::write(&json_path, serde_json::to_string_pretty(&meta).unwrap())?;
            eprintln!(
                "density: wrote {p} and {json_path} (mass_in_box {:.6}, {:?})",
                grid.mass_in_box,
                started.elapsed()
            );
        }
        None => {
            write_or_print(out, None, &csv)?;
            eprintln!(
                "density: mass_in_box {:.6}, {:?}",
                grid.mass_in_box,
                started.elapsed()
            );
        }
    }
    Ok(EXIT_OK)
}

fn sibling_json_path(p: &str) -> String {
    match p.rsplit_once('.') {
        Some((stem, _)) => format!("{stem}.meta.json"),
        None => format!("{p}.meta.json"),
    }
}

fn parse_number_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{t}`")))
        })
        .collect()
}

fn parse_box(s: &str) -> Result<BoundingBox> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in s.split(';') {
        let pair = parse_number_list(part)?;
        if pair.len() != 2 {
            return Err(Error::Config(format!("bad box axis `{part}`, expected LO,HI")));
        }
        lo.push(pair[0]);
        hi.push(pair[1]);
    }
    BoundingBox::new(lo, hi).map_err(|e| Error::Config(format!("bad box: {e}")))
}

fn cmd_fiber(args: &[String], out: &mut dyn std::io::Write) -> Result<i32> {
    let (_, flags) = Flags::parse(args)?;
    let map = if let Some(json) = flags.get("map-json") {
        let v: serde_json::Value = serde_json::from_str(json)
            .map_err(|e| Error::Config(format!("bad --map-json: {e}")))?;
        MapExpr::from_json(&v)?
    } else {
        let src = flags.require("expr")?;
        let k: usize = flags
            .require("k")?
            .parse()
            .map_err(|_| Error::Config("--k must be an integer".into()))?;
        let n: usize = flags
            .get("n")
            .unwrap_or("1")
            .parse()
            .map_err(|_| Error::Config("--n must be an integer".into()))?;
        MapExpr::parse(src, k, n)?
    };
    let level = parse_number_list(flags.require("level")?)?;
    let bbox = parse_box(flags.require("box")?)?;
    let resolution: usize = flags
        .get("resolution")
        .unwrap_or("256")
        .parse()
        .map_err(|_| Error::Config("--resolution must be an integer".into()))?;

    let quad = fiber_quadrature_levelset(&map, &level, &bbox, resolution)?;
    let mut csv = String::new();
    for a in 0..map.input_dim() {
        csv.push_str(&format!("x{},", a + 1));
    }
    csv.push_str("weight\n");
    if quad.empty_fiber {
        csv.push_str("# empty fiber: no grid cell crossed the level\n");
    }
    for (node, w) in quad.nodes.iter().zip(&quad.weights) {
        for v in node {
            csv.push_str(&format!("{v:.16e},"));
        }
        csv.push_str(&format!("{w:.16e}\n"));
    }
    write_or_print(out, flags.get("out"), &csv)?;
    eprintln!(
        "fiber: {} nodes, total weight {:.12}, max residual {:.3e}{}",
        quad.nodes.len(),
        quad.total_weight(),
        quad.max_residual,
        if quad.empty_fiber { " (empty fiber)" } else { "" }
    );
    Ok(EXIT_OK)
}

// !(lo < hi) also rejects NaN grid bounds
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn cmd_catalog(args: &[String], out: &mut dyn std::io::Write) -> Result<i32> {
    let (positional, flags) = Flags::parse(args)?;
    let name = positional
        .first()
        .ok_or_else(|| Error::Config("catalog needs an entry name".into()))?;
    let mut params = serde_json::Map::new();
    for p in flags.all("param") {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--param needs KEY=VALUE, got `{p}`")))?;
        let value: serde_json::Value =
            serde_json::from_str(v).unwrap_or(serde_json::Value::String(v.to_string()));
        params.insert(k.to_string(), value);
    }
    // shorthand for the common parameters: --k 3, --lambda 0.5, ...
    for key in ["k", "lambda", "i", "mean", "sd", "a", "b"] {
        if let Some(v) = flags.get(key) {
            let value: serde_json::Value =
                serde_json::from_str(v).unwrap_or(serde_json::Value::String(v.to_string()));
            params.insert(key.to_string(), value);
        }
    }
    let params = serde_json::Value::Object(params);
    let pdf = catalog_pdf(name, &params)?;
    let grid_spec = parse_number_list(flags.require("grid")?)?;
    if grid_spec.len() != 3 || grid_spec[2] < 1.0 {
        return Err(Error::Config("--grid needs LO,HI,COUNT".into()));
    }
    let (lo, hi, count) = (grid_spec[0], grid_spec[1], grid_spec[2] as usize);
    if !(lo < hi) {
        return Err(Error::Config("--grid needs LO < HI".into()));
    }
    let mut csv = String::from("y,value\n");
    for i in 0..count {
        let y = lo + (hi - lo) * (i as f64 + 0.5) / count as f64;
        csv.push_str(&format!("{y:.16e},{:.16e}\n", pdf(y)));
    }
    write_or_print(out, flags.get("out"), &csv)?;
    Ok(EXIT_OK)
}

/// Comparison report produced by `mc-check`.
#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub config: JobConfig,
    pub n: usize,
    pub seed: u64,
    pub sup_error: f64,
    pub l1_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<f64>,
    pub ks_threshold: f64,
    pub sup_threshold: f64,
    pub pass: bool,
}

fn cmd_mc_check(args: &[String], out: &mut dyn std::io::Write) -> Result<i32> {
    let (_, flags) = Flags::parse(args)?;
    let config = load_config(&flags)?;
    let mc = config
        .mc
        .clone()
        .ok_or_else(|| Error::Config("mc-check needs an `mc` block".into()))?;
    if mc.n == 0 {
        return Err(Error::Config("mc.n must be >= 1".into()));
    }
    let (report, batch) = run_mc_check(&config, &mc)?;
    if let Some(path) = flags.get("dump-samples") {
        std::fs::write(path, batch.to_csv())?;
    }
    let text = serde_json::to_string_pretty(&report).unwrap();
    match flags.get("out") {
        Some(p) => std::fs::write(p, &text)?,
        None => {
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n").map_err(Error::from)?;
        }
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_THRESHOLD })
}

fn run_mc_check(config: &JobConfig, mc: &McSpec) -> Result<(McReport, crate::mc::SampleBatch)> {
    let base = resolve_base(&config.base_density)?;
    let sampler = base
        .sampler
        .as_ref()
        .ok_or_else(|| Error::Config("this base density has no sampler for mc-check".into()))?;
    let grid = compute_job_grid(config)?;
    if !matches!(grid.reference, ReferenceMeasure::Lebesgue { .. }) {
        return Err(Error::Config(
            "mc-check compares Lebesgue grids; carrier densities need a pulled-back job".into(),
        ));
    }
    let phi = match config.mode.as_str() {
        "catalog" => {
            // the samples are compared directly against the catalog density
            let dim = sampler.dim();
            let coords = (1..=dim).map(|i| format!("x{i}")).collect::<Vec<_>>().join("; ");
            MapExpr::parse(&coords, dim, dim)?
        }
        "affine" => {
            let spec = config.affine.as_ref().unwrap();
            let mut coords = Vec::new();
            for (i, row) in spec.matrix.iter().enumerate() {
                let mut term = format!("({:?})", spec.offset[i]);
                for (j, c) in row.iter().enumerate() {
                    term.push_str(&format!("+({c:?})*x{}", j + 1));
                }
                coords.push(term);
            }
            MapExpr::parse(&coords.join("; "), spec.matrix[0].len(), spec.matrix.len())?
        }
        _ => parse_map_field(config)?,
    };
    let batch = push_samples(sampler.as_ref(), &phi, mc.n, mc.seed)?;
    let (sup_error, l1_error) = histogram_compare(&grid, &batch)?;
    let ks = if grid.dim() == 1 {
        // numerically integrated CDF of the computed density over the grid
        // box; mass truncated away by the box shows up in the KS statistic
        // and is absorbed by the threshold, not rescaled away
        let pdf_interp = |t: f64| -> f64 {
            match grid.cell_of(std::slice::from_ref(&t)) {
                Some(c) => grid.values[c],
                None => 0.0,
            }
        };
        let table = NumericCdf::from_pdf(
            &pdf_interp,
            grid.bounds.lo[0],
            grid.bounds.hi[0],
            (grid.shape[0] * 8).max(1024),
        );
        Some(ks_distance(&batch, &|t| table.eval(t))?)
    } else {
        None
    };
    let pass = sup_error <= mc.sup_threshold && ks.is_none_or(|k| k <= mc.ks_threshold);
    let report = McReport {
        config: config.clone(),
        n: mc.n,
        seed: mc.seed,
        sup_error,
        l1_error,
        ks,
        ks_threshold: mc.ks_threshold,
        sup_threshold: mc.sup_threshold,
        pass,
    };
    Ok((report, batch))
}
