//! The acceptance criteria of the build, each pinned to its tolerance and,
//! where stated, its runtime budget. The `acceptance` integration test runs
//! every criterion and prints one pass/fail line per criterion; the CLI
//! subcommands reuse the same underlying checks.

use super::lemmas::{
    equilibrium_remainder_scaling, planar_decay_slope, potential_bound_check,
    regular_part_decay_slope,
};
use super::naive::compare_naive;
use super::{fit_order, sweep, CriterionOutcome, OracleChoice, SceneTemplate, SweepOptions};
use crate::asymptotics::{
    corollary_far, corollary_near, equilibrium_potential_2d, equilibrium_potential_2d_conformal,
    uniform_green, Scene,
};
use crate::geometry::{sample_pairs, HoleShape, Point, Stratum};
use crate::hole::{CollocationOptions, HoleKernel};
use crate::oracle::{AnnulusSeries, CollocationOracle, CollocationOracleOptions};
use crate::Result;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const SEED: u64 = 7;
const SWEEP_EPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn finish(
    name: &str,
    started: Instant,
    budget: Option<Duration>,
    result: Result<(bool, String)>,
) -> CriterionOutcome {
    let elapsed = started.elapsed();
    match result {
        Ok((passed, detail)) => {
            let within_budget = budget.map(|b| elapsed <= b).unwrap_or(true);
            let budget_note = match budget {
                Some(b) => format!(" [{elapsed:.1?} of {b:.0?} budget]"),
                None => format!(" [{elapsed:.1?}]"),
            };
            CriterionOutcome {
                name: name.to_string(),
                passed: passed && within_budget,
                detail: format!("{detail}{budget_note}"),
            }
        }
        Err(e) => CriterionOutcome {
            name: name.to_string(),
            passed: false,
            detail: format!("errored after {elapsed:.1?}: {e}"),
        },
    }
}

/// Radial profile of an ellipse with semi-axes `a >= b`, as a truncated
/// Fourier shape.
pub fn ellipse_hole(a: f64, b: f64) -> HoleShape {
    HoleShape::fourier_from_fn(
        move |t| {
            let (s, c) = t.sin_cos();
            a * b / (b * b * c * c + a * a * s * s).sqrt()
        },
        24,
        0,
    )
}

/// Sources on an ellipse confocal with `(a, b)`: the exterior field of an
/// eccentric hole continues harmonically only down to the focal segment, so
/// the source curve must enclose that segment, which no self-similar shrunk
/// copy does once `sqrt(a² - b²) > shrink · b`.
pub fn confocal_sources(a: f64, b: f64, a_src: f64, count: usize) -> Vec<Point> {
    let c2 = a * a - b * b;
    let b_src = (a_src * a_src - c2).max(1e-4).sqrt();
    (0..count)
        .map(|j| {
            let t = 2.0 * PI * (j as f64 + 0.5) / count as f64;
            Point::new2(a_src * t.cos(), b_src * t.sin())
        })
        .collect()
}

fn asymmetric_hole() -> HoleShape {
    HoleShape::Fourier { cos: vec![1.0, 0.35], sin: vec![0.0, 0.15] }
}

fn perturbed_zonal_hole() -> HoleShape {
    HoleShape::Zonal { coeffs: vec![1.0, 0.1, 0.15] }
}

/// Criterion 1: the two reference solvers agree to 1e-8 on concentric
/// scenes in both dimensions, within 30 s.
pub fn criterion_1() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        for n in [2usize, 3] {
            for eps in [0.2, 0.1, 0.05] {
                let template = SceneTemplate::concentric(n);
                let cfg = template.config_at(eps)?;
                let series = AnnulusSeries::new(&cfg)?;
                let hole = template.build_hole()?;
                let colloc =
                    CollocationOracle::new(&cfg, hole, CollocationOracleOptions::for_dim(n))?;
                for stratum in Stratum::all() {
                    for (x, y) in sample_pairs(&cfg, 5, SEED, stratum)? {
                        let d = if x.dist(&y) < 1e-2 {
                            series.regular_correction(&x, &y)?
                                - colloc.regular_correction(&x, &y)?
                        } else {
                            series.green(&x, &y)? - colloc.green(&x, &y)?
                        };
                        worst = worst.max(d.abs());
                    }
                }
            }
        }
        Ok((
            worst <= 1e-8,
            format!("max oracle disagreement {worst:.3e} over 120 stratified pairs (tol 1e-8)"),
        ))
    };
    finish(
        "criterion 1: oracle cross-validation",
        started,
        Some(Duration::from_secs(30)),
        run(),
    )
}

fn sweep_criterion(
    name: &str,
    template: SceneTemplate,
    oracle: OracleChoice,
) -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut opts = SweepOptions::new(SWEEP_EPS.to_vec());
        opts.seed = SEED;
        opts.oracle = oracle;
        let report = sweep(&template, &opts)?;
        let detail = report
            .criteria
            .iter()
            .map(|c| c.line())
            .collect::<Vec<_>>()
            .join("; ");
        Ok((report.all_passed(), detail))
    };
    finish(name, started, Some(Duration::from_secs(120)), run())
}

/// Criterion 2: n = 3 concentric sweep — weighted-error ratio <= 10 and
/// bulk-stratum order in [1.7, 2.3].
pub fn criterion_2() -> CriterionOutcome {
    sweep_criterion(
        "criterion 2: spatial uniformity sweep (concentric)",
        SceneTemplate::concentric(3),
        OracleChoice::Series,
    )
}

/// Criterion 3: n = 2 concentric sweep — sup-error order >= 0.85 with the
/// near-hole and near-boundary strata included in the sup.
pub fn criterion_3() -> CriterionOutcome {
    sweep_criterion(
        "criterion 3: planar uniformity sweep (concentric)",
        SceneTemplate::concentric(2),
        OracleChoice::Series,
    )
}

/// Criterion 4: both sweeps repeated on the off-center scene against the
/// collocation oracle, exercising non-constant H(x,0), H(0,y).
pub fn criterion_4() -> Vec<CriterionOutcome> {
    vec![
        sweep_criterion(
            "criterion 4a: spatial uniformity sweep (off-center, collocation oracle)",
            SceneTemplate::offcenter(3),
            OracleChoice::Collocation,
        ),
        sweep_criterion(
            "criterion 4b: planar uniformity sweep (off-center, collocation oracle)",
            SceneTemplate::offcenter(2),
            OracleChoice::Collocation,
        ),
    ]
}

fn fit_formula_gap(
    scene0: &Scene,
    eps_list: &[f64],
    pair_at: impl Fn(f64) -> (Point, Point),
    far: bool,
) -> Result<(f64, Vec<f64>)> {
    let mut gaps = Vec::new();
    let mut scales = Vec::new();
    for &eps in eps_list {
        let scene = scene0.with_epsilon(eps)?;
        let (x, y) = pair_at(eps);
        let u = uniform_green(&x, &y, &scene)?;
        let c = if far {
            corollary_far(&x, &y, &scene)?
        } else {
            corollary_near(&x, &y, &scene)?
        };
        gaps.push((c - u.value).abs());
        scales.push(if far { eps } else { x.norm().max(y.norm()) });
    }
    let fit = fit_order(&scales, &gaps)?;
    Ok((fit.order, gaps))
}

/// Criterion 5: consistency orders between the simplified formulas and the
/// uniform ones — order n-1 (±0.3) for the far-field form in its validity
/// region, order ~1 (±0.3) for the near-field form in max{|x|,|y|} at fixed
/// max{|x|,|y|}/ε.
pub fn criterion_5() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut parts = Vec::new();
        let mut ok = true;

        // far field, n = 3: ball hole, off-center outer
        let s3 = Scene::build(SceneTemplate::offcenter(3).config_at(0.2)?)?;
        let pair3 = |_e: f64| (Point::new3(0.4, 0.1, -0.2), Point::new3(-0.2, 0.45, 0.15));
        let (p_far3, _) = fit_formula_gap(&s3, &SWEEP_EPS, pair3, true)?;
        let pass = (p_far3 - 2.0).abs() <= 0.3;
        ok &= pass;
        parts.push(format!("far n=3 order {p_far3:.3} (2 +- 0.3) {}", if pass { "ok" } else { "FAIL" }));

        // far field, n = 2: an asymmetric hole keeps the leading gap term
        // alive (disk holes cancel it identically); small ε keeps the
        // logarithmic denominator drift inside the ±0.3 window
        let mut t2 = SceneTemplate::offcenter(2);
        t2.id = "offcenter-2d-asym".into();
        t2.hole = asymmetric_hole();
        let s2 = Scene::new(t2.config_at(0.02)?, t2.build_hole()?)?;
        let pair2 = |_e: f64| (Point::new2(0.55, 0.15), Point::new2(-0.25, 0.55));
        let eps2 = [0.02, 0.01, 0.005, 0.0025];
        let (p_far2, _) = fit_formula_gap(&s2, &eps2, pair2, true)?;
        let pass = (p_far2 - 1.0).abs() <= 0.3;
        ok &= pass;
        parts.push(format!("far n=2 order {p_far2:.3} (1 +- 0.3) {}", if pass { "ok" } else { "FAIL" }));

        // near field: shrink max{|x|,|y|} at fixed ratio to ε
        let eps_near = [0.05, 0.025, 0.0125, 0.00625];
        let s3n = Scene::build(SceneTemplate::offcenter(3).config_at(0.05)?)?;
        let pair3n = |e: f64| {
            (
                Point::new3(3.0 * e, 0.0, 0.0),
                Point::new3(0.0, 4.0 * e, 0.0),
            )
        };
        let (p_near3, _) = fit_formula_gap(&s3n, &eps_near, pair3n, false)?;
        let pass = (p_near3 - 1.0).abs() <= 0.3;
        ok &= pass;
        parts.push(format!("near n=3 order {p_near3:.3} (1 +- 0.3) {}", if pass { "ok" } else { "FAIL" }));

        let s2n = Scene::build(SceneTemplate::offcenter(2).config_at(0.05)?)?;
        let pair2n = |e: f64| (Point::new2(3.0 * e, 0.0), Point::new2(0.0, 4.0 * e));
        let (p_near2, _) = fit_formula_gap(&s2n, &eps_near, pair2n, false)?;
        let pass = (p_near2 - 1.0).abs() <= 0.3;
        ok &= pass;
        parts.push(format!("near n=2 order {p_near2:.3} (1 +- 0.3) {}", if pass { "ok" } else { "FAIL" }));

        Ok((ok, parts.join("; ")))
    };
    finish("criterion 5: simplified-formula consistency orders", started, None, run())
}

/// Criterion 6: the lemma suite — potential bound, far-field decay slopes,
/// and the planar equilibrium-potential remainder scaling.
pub fn criterion_6() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut items = Vec::new();
        let ball3 = HoleKernel::analytic_ball(3)?;
        items.push(potential_bound_check(&ball3, 1e-14)?);
        let zonal = HoleKernel::collocation(
            3,
            perturbed_zonal_hole(),
            CollocationOptions::for_dim(3),
        )?;
        items.push(potential_bound_check(&zonal, 1e-6)?);
        items.push(regular_part_decay_slope(&ball3, SEED)?);
        let disk = HoleKernel::analytic_ball(2)?;
        items.push(planar_decay_slope(&disk, SEED)?);
        items.push(equilibrium_remainder_scaling(
            &SceneTemplate::offcenter(2),
            &SWEEP_EPS,
            SEED,
        )?);
        let ok = items.iter().all(|c| c.passed);
        let detail = items.iter().map(|c| c.line()).collect::<Vec<_>>().join("; ");
        Ok((ok, detail))
    };
    finish("criterion 6: estimate suite", started, None, run())
}

/// Criterion 7: exact identities — term-sum and swap consistency at 1e-13,
/// agreement of the two equilibrium-potential forms at 1e-13, unit-ball
/// capacity 4π at 1e-12, disk ζ_∞ = 0 at 1e-12, and the elliptical-hole
/// inner conformal radius within 1e-4 of (a+b)/2.
pub fn criterion_7() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut parts = Vec::new();
        let mut ok = true;

        let mut worst_sum: f64 = 0.0;
        let mut worst_swap: f64 = 0.0;
        for template in [
            SceneTemplate::concentric(3),
            SceneTemplate::offcenter(3),
            SceneTemplate::concentric(2),
            SceneTemplate::offcenter(2),
        ] {
            let cfg = template.config_at(0.05)?;
            let scene = Scene::build(cfg.clone())?;
            for stratum in Stratum::all() {
                for (x, y) in sample_pairs(&cfg, 5, SEED, stratum)? {
                    let u = uniform_green(&x, &y, &scene)?;
                    let scale = u.terms.iter().map(|(_, v)| v.abs()).fold(1e-30, f64::max);
                    let total: f64 = u.terms.iter().map(|(_, v)| v).sum();
                    worst_sum = worst_sum.max((u.value - total).abs() / scale);
                    let v = uniform_green(&y, &x, &scene)?;
                    worst_swap = worst_swap.max((u.value - v.value).abs() / scale);
                }
            }
        }
        let pass = worst_sum <= 1e-13;
        ok &= pass;
        parts.push(format!("term-sum consistency {worst_sum:.2e} (<= 1e-13)"));
        let pass2 = worst_swap <= 1e-13;
        ok &= pass2;
        parts.push(format!("swap symmetry {worst_swap:.2e} (<= 1e-13)"));

        let scene2 = Scene::build(SceneTemplate::offcenter(2).config_at(0.05)?)?;
        let mut worst_forms: f64 = 0.0;
        for x in [Point::new2(0.3, 0.2), Point::new2(-0.55, 0.15), Point::new2(0.1, -0.25)] {
            let a = equilibrium_potential_2d(&x, &scene2)?.value;
            let b = equilibrium_potential_2d_conformal(&x, &scene2)?;
            worst_forms = worst_forms.max((a - b).abs() / a.abs().max(1.0));
        }
        let pass3 = worst_forms <= 1e-13;
        ok &= pass3;
        parts.push(format!("equilibrium-form agreement {worst_forms:.2e} (<= 1e-13)"));

        let cap = HoleKernel::analytic_ball(3)?.capacity()?;
        let cap_err = (cap - 4.0 * PI).abs() / (4.0 * PI);
        let pass4 = cap_err <= 1e-12;
        ok &= pass4;
        parts.push(format!("unit-ball capacity rel err {cap_err:.2e} (<= 1e-12)"));

        let zinf = HoleKernel::analytic_ball(2)?.zeta_infinity()?;
        let pass5 = zinf.abs() <= 1e-12;
        ok &= pass5;
        parts.push(format!("disk zeta_inf {zinf:.2e} (<= 1e-12)"));

        let (a, b) = (1.0, 0.5);
        let mut opts = CollocationOptions::for_dim(2);
        opts.source_points = Some(confocal_sources(a, b, 0.92, opts.sources));
        let ellipse = HoleKernel::collocation(2, ellipse_hole(a, b), opts)?;
        let rf = ellipse.inner_conformal_radius()?;
        let rf_err = (rf - (a + b) / 2.0).abs();
        let pass6 = rf_err <= 1e-4;
        ok &= pass6;
        parts.push(format!(
            "2:1 ellipse conformal radius {rf:.6} vs 0.75, err {rf_err:.2e} (<= 1e-4)"
        ));

        Ok((ok, parts.join("; ")))
    };
    finish("criterion 7: exact identities", started, None, run())
}

/// Criterion 8: the non-uniformity demonstration — next to the hole the
/// unperturbed Green's function never drops below half of its coarsest-ε
/// error, while the uniform approximation's weighted error stays bounded.
pub fn criterion_8() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let report = compare_naive(&SceneTemplate::concentric(3), &SWEEP_EPS, 200, SEED)?;
        let ok = report.criteria.iter().all(|c| c.passed);
        let detail = report
            .criteria
            .iter()
            .map(|c| c.line())
            .collect::<Vec<_>>()
            .join("; ");
        Ok((ok, detail))
    };
    finish("criterion 8: non-uniformity demonstration", started, None, run())
}

/// Run every acceptance criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    let mut out = vec![criterion_1(), criterion_2(), criterion_3()];
    out.extend(criterion_4());
    out.push(criterion_5());
    out.push(criterion_6());
    out.push(criterion_7());
    out.push(criterion_8());
    out
}
