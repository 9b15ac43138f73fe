//! Convergence-study harness: ε-sweeps against reference solvers, order
//! fits, lemma verification, the naive-formula comparison, and CSV reports.
//!
//! Measured errors are stratified sup-norms (the uniformity claims are
//! sup-norm claims), and each raw error is also normalized by the remainder
//! weight carried on the expansion, so uniformity manifests as a bounded,
//! ε-independent weighted error.

pub mod criteria;
pub mod lemmas;
pub mod naive;

use crate::asymptotics::{uniform_green, Scene, REGULARIZED_SEPARATION};
use crate::config::SceneSpec;
use crate::geometry::{HoleShape, PerforationConfig, Point, Stratum};
use crate::hole::{CollocationOptions, HoleKernel};
use crate::oracle::{AnnulusSeries, CollocationOracle, CollocationOracleOptions};
use crate::{Error, Result};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Scene family: geometry without a fixed hole scale.
#[derive(Clone, Debug)]
pub struct SceneTemplate {
    pub id: String,
    pub n: usize,
    pub outer_center: Point,
    pub outer_radius: f64,
    pub hole: HoleShape,
    /// Override for the hole collocation options (eccentric shapes need
    /// custom source curves).
    pub hole_options: Option<CollocationOptions>,
}

impl SceneTemplate {
    pub fn concentric(n: usize) -> Self {
        SceneTemplate {
            id: format!("concentric-{n}d"),
            n,
            outer_center: Point::zero(n).expect("n in {2,3}"),
            outer_radius: 1.0,
            hole: HoleShape::Ball,
            hole_options: None,
        }
    }

    pub fn offcenter(n: usize) -> Self {
        let c = if n == 2 {
            Point::new2(0.3, 0.0)
        } else {
            Point::new3(0.3, 0.0, 0.0)
        };
        SceneTemplate {
            id: format!("offcenter-{n}d"),
            n,
            outer_center: c,
            outer_radius: 1.3,
            hole: HoleShape::Ball,
            hole_options: None,
        }
    }

    pub fn from_spec(spec: &SceneSpec) -> Self {
        SceneTemplate {
            id: spec.scene_id.clone(),
            n: spec.n,
            outer_center: spec.outer_center,
            outer_radius: spec.outer_radius,
            hole: spec.hole.clone(),
            hole_options: None,
        }
    }

    pub fn config_at(&self, eps: f64) -> Result<PerforationConfig> {
        PerforationConfig::new(
            self.n,
            self.outer_center,
            self.outer_radius,
            self.hole.clone(),
            eps,
        )?
        .normalize()
    }

    /// The hole kernel is ε-independent (unit scale); build it once.
    pub fn build_hole(&self) -> Result<Arc<HoleKernel>> {
        let kernel = match (&self.hole, &self.hole_options) {
            (HoleShape::Ball, None) => HoleKernel::analytic_ball(self.n)?,
            (shape, opts) => HoleKernel::collocation(
                self.n,
                shape.clone(),
                opts.clone().unwrap_or_else(|| CollocationOptions::for_dim(self.n)),
            )?,
        };
        Ok(Arc::new(kernel))
    }

    pub fn scene_at(&self, eps: f64, hole: &Arc<HoleKernel>) -> Result<Scene> {
        Scene::new(self.config_at(eps)?, Arc::clone(hole))
    }

    fn is_concentric_ball(&self) -> bool {
        self.outer_center.norm() <= 1e-14 && self.hole == HoleShape::Ball
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleChoice {
    /// Series for concentric ball scenes, collocation otherwise.
    Auto,
    Series,
    Collocation,
}

enum OracleBackend {
    Series(AnnulusSeries),
    Collocation(Box<CollocationOracle>),
}

impl OracleBackend {
    fn build(
        choice: OracleChoice,
        template: &SceneTemplate,
        cfg: &PerforationConfig,
        hole: &Arc<HoleKernel>,
    ) -> Result<Self> {
        let use_series = match choice {
            OracleChoice::Series => true,
            OracleChoice::Collocation => false,
            OracleChoice::Auto => template.is_concentric_ball(),
        };
        if use_series {
            Ok(OracleBackend::Series(AnnulusSeries::new(cfg)?))
        } else {
            Ok(OracleBackend::Collocation(Box::new(CollocationOracle::new(
                cfg,
                Arc::clone(hole),
                CollocationOracleOptions::for_dim(cfg.n()),
            )?)))
        }
    }

    fn green(&self, x: &Point, y: &Point) -> Result<f64> {
        match self {
            OracleBackend::Series(s) => s.green(x, y),
            OracleBackend::Collocation(c) => c.green(x, y),
        }
    }

    fn regular_correction(&self, x: &Point, y: &Point) -> Result<f64> {
        match self {
            OracleBackend::Series(s) => s.regular_correction(x, y),
            OracleBackend::Collocation(c) => c.regular_correction(x, y),
        }
    }

    fn diagnostics(&self) -> String {
        match self {
            OracleBackend::Series(s) => format!(
                "series oracle: annulus [{:.3e}, {}], adaptive mode tail below 1e-13",
                s.inner(),
                s.outer()
            ),
            OracleBackend::Collocation(c) => format!(
                "collocation oracle: max boundary residual {:.2e}, condition ~{:.2e}",
                c.max_residual(),
                c.condition_estimate()
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub epsilons: Vec<f64>,
    pub pairs_per_stratum: usize,
    pub seed: u64,
    pub strata: Vec<Stratum>,
    pub oracle: OracleChoice,
    pub out_csv: Option<PathBuf>,
}

impl SweepOptions {
    pub fn new(epsilons: Vec<f64>) -> Self {
        SweepOptions {
            epsilons,
            pairs_per_stratum: 200,
            seed: 7,
            strata: Stratum::all().to_vec(),
            oracle: OracleChoice::Auto,
            out_csv: None,
        }
    }
}

/// One evaluated pair.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub scene_id: String,
    pub n: usize,
    pub eps: f64,
    pub stratum: Stratum,
    pub x: Point,
    pub y: Point,
    pub asym_value: f64,
    pub oracle_value: f64,
    pub abs_err: f64,
    pub weight: f64,
    pub weighted_err: f64,
}

#[derive(Clone, Debug)]
pub struct StratumStats {
    pub stratum: Stratum,
    pub max_raw: f64,
    pub max_weighted: f64,
}

#[derive(Clone, Debug)]
pub struct EpsStats {
    pub eps: f64,
    pub max_raw: f64,
    pub max_weighted: f64,
    pub per_stratum: Vec<StratumStats>,
    /// Oracle diagnostics for the run log (residuals, condition estimates,
    /// truncation policy).
    pub oracle_log: String,
}

/// Least-squares fit of `log err = order · log ε + intercept`.
#[derive(Clone, Copy, Debug)]
pub struct OrderFit {
    pub order: f64,
    pub intercept: f64,
    /// RMS deviation of the fit in log space.
    pub residual: f64,
}

pub fn fit_order(eps: &[f64], err: &[f64]) -> Result<OrderFit> {
    if eps.len() != err.len() || eps.len() < 2 {
        return Err(Error::Geometry("order fit needs matching lists of length >= 2".into()));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.max(1e-300).ln()).collect();
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let det = m * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::Geometry("degenerate epsilon list in order fit".into()));
    }
    let order = (m * sxy - sx * sy) / det;
    let intercept = (sy - order * sx) / m;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let p = order * x + intercept;
            (y - p) * (y - p)
        })
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(OrderFit { order, intercept, residual })
}

/// Named pass/fail check with its supporting data.
#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {} — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub scene_id: String,
    pub n: usize,
    pub per_eps: Vec<EpsStats>,
    /// Fit of the overall (all-strata) sup error.
    pub overall_order: OrderFit,
    /// Fit of the bulk-stratum sup error.
    pub bulk_order: Option<OrderFit>,
    /// max/min across ε of the per-ε max weighted error.
    pub weighted_ratio: f64,
    pub rows: Vec<SweepRow>,
    pub criteria: Vec<CriterionOutcome>,
}

impl ConvergenceReport {
    /// Largest weighted error over the whole sweep: the empirically fitted
    /// uniformity constant of the scene.
    pub fn fitted_constant(&self) -> f64 {
        self.per_eps.iter().map(|s| s.max_weighted).fold(0.0, f64::max)
    }

    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// One-off reference value for a scene, with the automatic oracle choice.
pub fn oracle_value(
    template: &SceneTemplate,
    scene: &Scene,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    let oracle =
        OracleBackend::build(OracleChoice::Auto, template, scene.config(), &scene.hole_arc())?;
    oracle.green(x, y)
}

/// Error of the uniform approximation against the oracle for one pair.
/// Near the diagonal both sides are compared in regularized form.
fn pair_error(scene: &Scene, oracle: &OracleBackend, x: &Point, y: &Point) -> Result<SweepRow> {
    let u = uniform_green(x, y, scene)?;
    let near_diagonal = x.dist(y) < REGULARIZED_SEPARATION;
    let (asym_value, oracle_value, abs_err) = if near_diagonal {
        let oc = oracle.regular_correction(x, y)?;
        let e = scene.hole().constants().fundamental(x.dist(y));
        (u.value, e + oc, (u.regular_value - oc).abs())
    } else {
        let ov = oracle.green(x, y)?;
        (u.value, ov, (u.value - ov).abs())
    };
    Ok(SweepRow {
        scene_id: String::new(),
        n: scene.n(),
        eps: scene.epsilon(),
        stratum: Stratum::Bulk,
        x: *x,
        y: *y,
        asym_value,
        oracle_value,
        abs_err,
        weight: u.weight,
        weighted_err: abs_err / u.weight,
    })
}

fn validate_eps_list(eps: &[f64]) -> Result<()> {
    if eps.len() < 4 {
        return Err(Error::Geometry("sweeps need at least 4 epsilon values".into()));
    }
    if !eps.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::Geometry("epsilon list must be strictly decreasing".into()));
    }
    if eps[0] > 0.2 + 1e-12 {
        return Err(Error::Geometry("sweep epsilons must not exceed 0.2".into()));
    }
    Ok(())
}

/// Run a stratified ε-sweep of the uniform approximation against the scene's
/// oracle, fit convergence orders, and evaluate the uniformity checks.
pub fn sweep(template: &SceneTemplate, opts: &SweepOptions) -> Result<ConvergenceReport> {
    validate_eps_list(&opts.epsilons)?;
    let hole = template.build_hole()?;
    let per_eps_rows: Vec<Result<(EpsStats, Vec<SweepRow>)>> = opts
        .epsilons
        .par_iter()
        .map(|&eps| -> Result<(EpsStats, Vec<SweepRow>)> {
            let cfg = template.config_at(eps)?;
            let scene = template.scene_at(eps, &hole)?;
            let oracle = OracleBackend::build(opts.oracle, template, &cfg, &hole).map_err(
                |e| Error::Oracle(format!("scene {} eps {eps}: {e}", template.id)),
            )?;
            let mut rows = Vec::new();
            let mut per_stratum = Vec::new();
            for &stratum in &opts.strata {
                let pairs =
                    crate::geometry::sample_pairs(&cfg, opts.pairs_per_stratum, opts.seed, stratum)?;
                let mut max_raw: f64 = 0.0;
                let mut max_weighted: f64 = 0.0;
                for (x, y) in pairs {
                    let mut row = pair_error(&scene, &oracle, &x, &y).map_err(|e| {
                        Error::Oracle(format!("scene {} eps {eps}: {e}", template.id))
                    })?;
                    row.scene_id = template.id.clone();
                    row.stratum = stratum;
                    max_raw = max_raw.max(row.abs_err);
                    max_weighted = max_weighted.max(row.weighted_err);
                    rows.push(row);
                }
                per_stratum.push(StratumStats { stratum, max_raw, max_weighted });
            }
            let stats = EpsStats {
                eps,
                max_raw: per_stratum.iter().map(|s| s.max_raw).fold(0.0, f64::max),
                max_weighted: per_stratum.iter().map(|s| s.max_weighted).fold(0.0, f64::max),
                per_stratum,
                oracle_log: oracle.diagnostics(),
            };
            Ok((stats, rows))
        })
        .collect();

    let mut per_eps = Vec::new();
    let mut rows = Vec::new();
    for item in per_eps_rows {
        let (stats, mut r) = item?;
        per_eps.push(stats);
        rows.append(&mut r);
    }

    let eps: Vec<f64> = per_eps.iter().map(|s| s.eps).collect();
    let overall: Vec<f64> = per_eps.iter().map(|s| s.max_raw).collect();
    let overall_order = fit_order(&eps, &overall)?;
    let bulk: Vec<f64> = per_eps
        .iter()
        .filter_map(|s| {
            s.per_stratum
                .iter()
                .find(|t| t.stratum == Stratum::Bulk)
                .map(|t| t.max_raw)
        })
        .collect();
    let bulk_order = if bulk.len() == eps.len() {
        Some(fit_order(&eps, &bulk)?)
    } else {
        None
    };
    let wmax = per_eps.iter().map(|s| s.max_weighted).fold(0.0, f64::max);
    let wmin = per_eps.iter().map(|s| s.max_weighted).fold(f64::INFINITY, f64::min);
    let weighted_ratio = wmax / wmin;

    let mut criteria = Vec::new();
    if template.n >= 3 {
        criteria.push(CriterionOutcome {
            name: format!("{}: weighted-error uniformity", template.id),
            passed: weighted_ratio <= 10.0,
            detail: format!("max/min weighted-error ratio {weighted_ratio:.3} (<= 10)"),
        });
        if let Some(ref b) = bulk_order {
            criteria.push(CriterionOutcome {
                name: format!("{}: bulk convergence order", template.id),
                passed: (1.7..=2.3).contains(&b.order),
                detail: format!("fitted order {:.3} in [1.7, 2.3], fit rms {:.2e}", b.order, b.residual),
            });
        }
    } else {
        criteria.push(CriterionOutcome {
            name: format!("{}: sup-error convergence order", template.id),
            passed: overall_order.order >= 0.85,
            detail: format!(
                "fitted order {:.3} >= 0.85 over all strata, fit rms {:.2e}",
                overall_order.order, overall_order.residual
            ),
        });
    }

    let report = ConvergenceReport {
        scene_id: template.id.clone(),
        n: template.n,
        per_eps,
        overall_order,
        bulk_order,
        weighted_ratio,
        rows,
        criteria,
    };
    if let Some(path) = &opts.out_csv {
        write_csv(path, &report.rows)?;
    }
    Ok(report)
}

/// Exact CSV schema:
/// `scene_id,n,eps,stratum,x0..,y0..,asym_value,oracle_value,abs_err,weight,weighted_err`.
pub fn csv_header(n: usize) -> String {
    let mut h = String::from("scene_id,n,eps,stratum");
    for i in 0..n {
        let _ = write!(h, ",x{i}");
    }
    for i in 0..n {
        let _ = write!(h, ",y{i}");
    }
    h.push_str(",asym_value,oracle_value,abs_err,weight,weighted_err");
    h
}

pub fn csv_row(row: &SweepRow) -> String {
    let mut s = format!("{},{},{:e},{}", row.scene_id, row.n, row.eps, row.stratum.name());
    for v in row.x.coords() {
        let _ = write!(s, ",{v:e}");
    }
    for v in row.y.coords() {
        let _ = write!(s, ",{v:e}");
    }
    let _ = write!(
        s,
        ",{:e},{:e},{:e},{:e},{:e}",
        row.asym_value, row.oracle_value, row.abs_err, row.weight, row.weighted_err
    );
    s
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let n = rows.first().map(|r| r.n).unwrap_or(3);
    let mut out = String::new();
    out.push_str(&csv_header(n));
    out.push('\n');
    for row in rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Concatenate sweep CSVs with identical headers into one file.
pub fn merge_csv(inputs: &[PathBuf], out: &Path) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Config("no CSV inputs to merge".into()));
    }
    let mut header: Option<String> = None;
    let mut body = String::new();
    for path in inputs {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let h = lines
            .next()
            .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?;
        match &header {
            None => header = Some(h.to_string()),
            Some(prev) if prev != h => {
                return Err(Error::Config(format!(
                    "schema mismatch: {} has a different header",
                    path.display()
                )))
            }
            _ => {}
        }
        for l in lines {
            body.push_str(l);
            body.push('\n');
        }
    }
    let mut outtext = header.unwrap();
    outtext.push('\n');
    outtext.push_str(&body);
    std::fs::write(out, outtext)?;
    Ok(())
}
