//! Empirical verification of the pointwise bounds and far-field decay rates
//! that the uniform expansions rest on:
//!
//! 1. the equilibrium-potential bound `0 < P(ξ) ≤ min{1, |ξ|^{2-n}}`,
//! 2. the far-field decay `|h(ξ,η) - P(η)·((n-2)|S^{n-1}|)^{-1}|ξ|^{2-n}|
//!    = O(|ξ|^{1-n} P(η))` (n ≥ 3),
//! 3. the planar far-field form `h(ξ,η) = -(2π)^{-1}log|ξ| - ζ(η) +
//!    O(|ξ|^{-1})`, uniform in η,
//! 4. the planar equilibrium-potential approximation with remainder
//!    `O(ε/|log ε|)`, measured against the collocation reference.
//!
//! Decay rates are checked as fitted slopes of sup-errors over dyadic radii;
//! the unquantified constants are reported, not asserted.

use super::{fit_order, CriterionOutcome, SceneTemplate};
use crate::asymptotics::equilibrium_potential_2d;
use crate::geometry::{Point, Stratum};
use crate::hole::HoleKernel;
use crate::oracle::{CollocationOracle, CollocationOracleOptions, ORACLE_RESIDUAL_TOL};
use crate::solver::{circle_directions, fibonacci_directions};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub items: Vec<CriterionOutcome>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|c| c.passed)
    }
}

fn exterior_probes(n: usize, count: usize, seed: u64, lo: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(91);
    (0..count)
        .map(|_| {
            let dir = if n == 2 {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new2(t.cos(), t.sin())
            } else {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let z: f64 = rng.gen_range(-1.0..1.0);
                let r = (1.0 - z * z).max(0.0).sqrt();
                Point::new3(r * t.cos(), r * t.sin(), z)
            };
            dir.scale(rng.gen_range(lo..4.0))
        })
        .collect()
}

/// Pointwise equilibrium-potential bound on a probe grid of ~1000 points.
/// `tol` absorbs backend error (0 for the analytic backend, 1e-6 for
/// collocation).
pub fn potential_bound_check(kernel: &HoleKernel, tol: f64) -> Result<CriterionOutcome> {
    if kernel.n() < 3 {
        return Err(Error::Dimension("the potential bound is an n >= 3 check".into()));
    }
    let dirs = fibonacci_directions(40, 0.05);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for i in 0..25 {
        let rfac = 1.0 + 49.0 * (i as f64 / 24.0).powi(2);
        for d in &dirs {
            let rho = kernel.shape().radius(d);
            let r = rho * 1.0001 * rfac.max(1.0005);
            let p = kernel.equilibrium_potential(&d.scale(r))?;
            let upper = 1.0f64.min(r.powi(2 - kernel.n() as i32));
            worst = worst.max(p - upper).max(-p);
            checked += 1;
        }
    }
    Ok(CriterionOutcome {
        name: "equilibrium-potential bound".into(),
        passed: worst <= tol,
        detail: format!("worst bound violation {worst:.2e} over {checked} probes (tol {tol:.1e})"),
    })
}

/// Fitted decay slope of the n ≥ 3 far-field estimate; expected `-(n-1)`.
pub fn regular_part_decay_slope(kernel: &HoleKernel, seed: u64) -> Result<CriterionOutcome> {
    let n = kernel.n();
    if n < 3 {
        return Err(Error::Dimension("far-field decay fit needs n >= 3".into()));
    }
    let k = kernel.constants().fundamental_coefficient();
    // η probes start at 2: spherical solve-based backends cannot resolve the
    // regular part for η hugging the hole, and the estimate is uniform in η
    // anyway
    let etas = exterior_probes(n, 50, seed, 2.0);
    let dirs = fibonacci_directions(8, 0.41);
    // all radii within the |ξ| > 2 validity region; starting at 4 keeps the
    // next-order contamination out of the fitted slope
    let radii = [4.0, 8.0, 16.0, 32.0];
    let mut sup = Vec::new();
    for &r in &radii {
        let mut worst: f64 = 0.0;
        for d in &dirs {
            let xi = d.scale(r);
            for eta in &etas {
                let h = kernel.exterior_regular(&xi, eta)?;
                let p = kernel.equilibrium_potential(eta)?;
                let err = (h - p * k * r.powi(2 - n as i32)).abs() / p;
                worst = worst.max(err);
            }
        }
        sup.push(worst);
    }
    let fit = fit_order(&radii.map(|r| 1.0 / r), &sup)?;
    let target = -(n as f64 - 1.0);
    // slope in |ξ| is minus the slope in 1/|ξ|
    let slope = -fit.order;
    Ok(CriterionOutcome {
        name: "regular-part far-field decay (n >= 3)".into(),
        passed: (slope - target).abs() <= 0.15,
        detail: format!("fitted slope {slope:.3}, expected {target} +- 0.15"),
    })
}

/// Fitted decay slope of the planar far-field estimate; expected `-1`,
/// uniformly over η probes.
pub fn planar_decay_slope(kernel: &HoleKernel, seed: u64) -> Result<CriterionOutcome> {
    if kernel.n() != 2 {
        return Err(Error::Dimension("planar far-field fit needs n = 2".into()));
    }
    let k = kernel.constants().fundamental_coefficient();
    let etas = exterior_probes(2, 50, seed, 1.05);
    let dirs = circle_directions(8, 0.17);
    let radii = [4.0, 8.0, 16.0, 32.0];
    let mut sup = Vec::new();
    for &r in &radii {
        let mut worst: f64 = 0.0;
        for d in &dirs {
            let xi = d.scale(r);
            for eta in &etas {
                let h = kernel.exterior_regular(&xi, eta)?;
                let z = kernel.zeta(eta)?;
                worst = worst.max((h + k * r.ln() + z).abs());
            }
        }
        sup.push(worst);
    }
    let fit = fit_order(&radii.map(|r| 1.0 / r), &sup)?;
    let slope = -fit.order;
    Ok(CriterionOutcome {
        name: "planar regular-part far-field decay".into(),
        passed: (slope + 1.0).abs() <= 0.15,
        detail: format!("fitted slope {slope:.3}, expected -1 +- 0.15"),
    })
}

/// Ratio stability of the planar equilibrium-potential remainder:
/// `e(ε)·|log ε|/ε` should stay within a factor 3 across the ε grid.
/// If the measured error sits at the oracle's own resolution (which happens
/// for concentric disk scenes, where the approximation is exact), the check
/// passes trivially and says so.
pub fn equilibrium_remainder_scaling(template: &SceneTemplate, eps_list: &[f64], seed: u64) -> Result<CriterionOutcome> {
    if template.n != 2 {
        return Err(Error::Dimension("the equilibrium approximation check is planar".into()));
    }
    let hole = template.build_hole()?;
    let mut scaled = Vec::new();
    let mut raw = Vec::new();
    for &eps in eps_list {
        let cfg = template.config_at(eps)?;
        let scene = template.scene_at(eps, &hole)?;
        let oracle = CollocationOracle::new(
            &cfg,
            std::sync::Arc::clone(&hole),
            CollocationOracleOptions::for_dim(2),
        )?;
        let mut worst: f64 = 0.0;
        for stratum in [Stratum::Bulk, Stratum::NearHole, Stratum::NearOuterBoundary] {
            for (x, _) in crate::geometry::sample_pairs(&cfg, 15, seed, stratum)? {
                let approx = equilibrium_potential_2d(&x, &scene)?.value;
                let exact = oracle.potential(&x)?;
                worst = worst.max((approx - exact).abs());
            }
        }
        raw.push(worst);
        scaled.push(worst * eps.ln().abs() / eps);
    }
    let max_raw = raw.iter().cloned().fold(0.0, f64::max);
    if max_raw <= 100.0 * ORACLE_RESIDUAL_TOL {
        return Ok(CriterionOutcome {
            name: "equilibrium-potential remainder scaling".into(),
            passed: true,
            detail: format!(
                "remainder at oracle resolution (max {max_raw:.2e}); approximation exact \
                 for this scene"
            ),
        });
    }
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(CriterionOutcome {
        name: "equilibrium-potential remainder scaling".into(),
        passed: hi / lo <= 3.0,
        detail: format!(
            "e(eps)|log eps|/eps in [{lo:.3e}, {hi:.3e}], ratio {:.2} (<= 3)",
            hi / lo
        ),
    })
}

/// Run every check that applies to the template's dimension.
pub fn verify_lemmas(
    template: &SceneTemplate,
    eps_list: &[f64],
    seed: u64,
) -> Result<LemmaReport> {
    let mut items = Vec::new();
    let hole = template.build_hole()?;
    let backend_tol = if hole.residual().is_some() { 1e-6 } else { 1e-14 };
    if template.n >= 3 {
        items.push(potential_bound_check(&hole, backend_tol)?);
        items.push(regular_part_decay_slope(&hole, seed)?);
    } else {
        items.push(planar_decay_slope(&hole, seed)?);
        items.push(equilibrium_remainder_scaling(template, eps_list, seed)?);
    }
    Ok(LemmaReport { items })
}
