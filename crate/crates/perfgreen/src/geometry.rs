//! Perforated-domain scenes and stratified sampling.
//!
//! A scene is an outer ball (or disk) `Ω` with an interior hole `F_ε`
//! obtained by shrinking a unit-scale compact set `F` by the factor `ε`.
//! Two normalizations are enforced throughout the crate:
//!
//! - the distance from the origin to the outer boundary equals 1, and
//! - the maximum distance from the origin to the hole boundary, at unit
//!   scale, equals 1.
//!
//! [`PerforationConfig::normalize`] rescales arbitrary input to this form
//! and records the factors so callers can round-trip.

use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Largest admissible hole-scale parameter. Keeps the hole inside the ball of
/// radius 1/4, so the hole, the far-field region of the unit-scale estimates,
/// and the outer boundary never interact.
pub const EPSILON_MAX: f64 = 0.25;

/// Evaluation points are kept at least this far from both boundaries.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Tolerance under which the scene is considered already normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A point in dimension 2 or 3 (dimension 1 slot unused for n = 2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Point { coords: [x, y, 0.0], dim: 2 }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point { coords: [x, y, z], dim: 3 }
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::from_slice(&[0.0; 3][..dim])
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        match c.len() {
            2 => Ok(Self::new2(c[0], c[1])),
            3 => Ok(Self::new3(c[0], c[1], c[2])),
            d => Err(Error::Dimension(format!(
                "points must have 2 or 3 coordinates, got {d}"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0.0; 3];
        for (ci, (a, b)) in c.iter_mut().zip(self.coords.iter().zip(&other.coords)) {
            *ci = a - b;
        }
        Point { coords: c, dim: self.dim }
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0.0; 3];
        for (ci, (a, b)) in c.iter_mut().zip(self.coords.iter().zip(&other.coords)) {
            *ci = a + b;
        }
        Point { coords: c, dim: self.dim }
    }

    pub fn scale(&self, s: f64) -> Point {
        let mut c = self.coords;
        for ci in c.iter_mut() {
            *ci *= s;
        }
        Point { coords: c, dim: self.dim }
    }

    /// Unit vector in the direction of `self`; errors at the origin.
    pub fn unit(&self) -> Result<Point> {
        let r = self.norm();
        if r == 0.0 {
            return Err(Error::Geometry("direction of the zero vector".into()));
        }
        Ok(self.scale(1.0 / r))
    }
}

/// Dimension-dependent constants of the fundamental solution of `-Δ`.
#[derive(Clone, Copy, Debug)]
pub struct DimensionConstants {
    n: usize,
    sphere_area: f64,
    fundamental_coefficient: f64,
}

/// Γ(n/2) for integer n ≥ 1.
fn gamma_half_integer(n: usize) -> f64 {
    let mut val = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut z = if n % 2 == 0 { 1.0 } else { 0.5 };
    while z < n as f64 / 2.0 - 0.25 {
        val *= z;
        z += 1.0;
    }
    val
}

impl DimensionConstants {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("dimension {n} < 2")));
        }
        let sphere_area = 2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n);
        let fundamental_coefficient = if n == 2 {
            1.0 / (2.0 * PI)
        } else {
            1.0 / ((n as f64 - 2.0) * sphere_area)
        };
        Ok(DimensionConstants { n, sphere_area, fundamental_coefficient })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Surface measure of the unit sphere S^{n-1}.
    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    /// `((n-2)|S^{n-1}|)^{-1}` for n ≥ 3, `(2π)^{-1}` for n = 2.
    pub fn fundamental_coefficient(&self) -> f64 {
        self.fundamental_coefficient
    }

    /// Fundamental solution of `-Δ` as a function of distance.
    pub fn fundamental(&self, r: f64) -> f64 {
        if self.n == 2 {
            -self.fundamental_coefficient * r.ln()
        } else {
            self.fundamental_coefficient * r.powi(2 - self.n as i32)
        }
    }
}

/// Unit-scale description of the hole `F`, normalized to max radius 1.
#[derive(Clone, Debug, PartialEq)]
pub enum HoleShape {
    /// The unit ball (n = 3) or unit disk (n = 2).
    Ball,
    /// Planar star-shaped boundary `ρ(θ) = Σ a_k cos kθ + Σ b_k sin kθ`.
    /// `cos[0]` is the constant term; `sin[k]` multiplies `sin((k+1)θ)`.
    Fourier { cos: Vec<f64>, sin: Vec<f64> },
    /// Axisymmetric star-shaped boundary `ρ(θ) = Σ c_l P_l(cos θ)` where `θ`
    /// is the polar angle from the symmetry axis (last coordinate).
    Zonal { coeffs: Vec<f64> },
}

/// Legendre polynomials P_0..P_lmax at `t`, by the three-term recurrence.
pub fn legendre_all(lmax: usize, t: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(lmax + 1);
    p.push(1.0);
    if lmax == 0 {
        return p;
    }
    p.push(t);
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * t * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

const PROFILE_SAMPLES: usize = 1 << 14;

impl HoleShape {
    /// Radial profile in the given unit direction.
    pub fn radius(&self, dir: &Point) -> f64 {
        match self {
            HoleShape::Ball => 1.0,
            HoleShape::Fourier { cos, sin } => {
                let theta = dir.get(1).atan2(dir.get(0));
                Self::eval_fourier(cos, sin, theta)
            }
            HoleShape::Zonal { coeffs } => {
                let ct = dir.get(2).clamp(-1.0, 1.0);
                let p = legendre_all(coeffs.len().saturating_sub(1), ct);
                coeffs.iter().zip(&p).map(|(c, pl)| c * pl).sum()
            }
        }
    }

    fn eval_fourier(cos: &[f64], sin: &[f64], theta: f64) -> f64 {
        let mut r = 0.0;
        for (k, a) in cos.iter().enumerate() {
            r += a * (k as f64 * theta).cos();
        }
        for (k, b) in sin.iter().enumerate() {
            r += b * ((k + 1) as f64 * theta).sin();
        }
        r
    }

    fn sample_profile(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..PROFILE_SAMPLES {
            let theta = PI * (2 * i) as f64 / PROFILE_SAMPLES as f64 - PI;
            let r = match self {
                HoleShape::Ball => 1.0,
                HoleShape::Fourier { cos, sin } => Self::eval_fourier(cos, sin, theta),
                HoleShape::Zonal { coeffs } => {
                    let p = legendre_all(coeffs.len().saturating_sub(1), theta.cos());
                    coeffs.iter().zip(&p).map(|(c, pl)| c * pl).sum()
                }
            };
            min = min.min(r);
            max = max.max(r);
        }
        (min, max)
    }

    /// Maximum of the radial profile over directions (grid evaluation).
    pub fn max_radius(&self) -> f64 {
        self.sample_profile().1
    }

    /// Minimum of the radial profile over directions (grid evaluation).
    pub fn min_radius(&self) -> f64 {
        self.sample_profile().0
    }

    /// Dimension the shape description belongs to, if it is constrained.
    pub fn natural_dim(&self) -> Option<usize> {
        match self {
            HoleShape::Ball => None,
            HoleShape::Fourier { .. } => Some(2),
            HoleShape::Zonal { .. } => Some(3),
        }
    }

    /// Scale the profile so that its maximum radius is 1. Returns the shape
    /// and the factor the profile was multiplied by. Errors if the profile is
    /// not strictly positive.
    pub fn normalized(&self) -> Result<(HoleShape, f64)> {
        let (min, max) = self.sample_profile();
        if min <= 0.0 {
            return Err(Error::Geometry(format!(
                "hole radial profile must be positive (min sample {min:.3e})"
            )));
        }
        if (max - 1.0).abs() <= 16.0 * f64::EPSILON {
            return Ok((self.clone(), 1.0));
        }
        let f = 1.0 / max;
        let shape = match self {
            HoleShape::Ball => HoleShape::Ball,
            HoleShape::Fourier { cos, sin } => HoleShape::Fourier {
                cos: cos.iter().map(|c| c * f).collect(),
                sin: sin.iter().map(|s| s * f).collect(),
            },
            HoleShape::Zonal { coeffs } => {
                HoleShape::Zonal { coeffs: coeffs.iter().map(|c| c * f).collect() }
            }
        };
        Ok((shape, f))
    }

    /// Truncated Fourier coefficients of a smooth 2π-periodic profile,
    /// computed with the trapezoidal rule (spectrally accurate here).
    pub fn fourier_from_fn(f: impl Fn(f64) -> f64, ncos: usize, nsin: usize) -> HoleShape {
        let m = 4096;
        let vals: Vec<f64> = (0..m)
            .map(|i| f(2.0 * PI * i as f64 / m as f64))
            .collect();
        let mut cos = vec![0.0; ncos + 1];
        let mut sin = vec![0.0; nsin];
        for (i, v) in vals.iter().enumerate() {
            let theta = 2.0 * PI * i as f64 / m as f64;
            cos[0] += v / m as f64;
            for k in 1..=ncos {
                cos[k] += 2.0 * v * (k as f64 * theta).cos() / m as f64;
            }
            for k in 1..=nsin {
                sin[k - 1] += 2.0 * v * (k as f64 * theta).sin() / m as f64;
            }
        }
        HoleShape::Fourier { cos, sin }
    }

    /// Truncated zonal-harmonic coefficients of a smooth profile of the polar
    /// angle: `c_l = (2l+1)/2 ∫ ρ(arccos t) P_l(t) dt`, with Gauss–Legendre
    /// quadrature so the oscillatory high-degree projections stay clean.
    pub fn zonal_from_fn(f: impl Fn(f64) -> f64, nl: usize) -> HoleShape {
        let m = (2 * nl + 32).max(64);
        let (ts, ws) = crate::solver::gauss_legendre(m);
        let mut coeffs = vec![0.0; nl + 1];
        for (&t, &w) in ts.iter().zip(&ws) {
            let v = f(t.clamp(-1.0, 1.0).acos());
            let p = legendre_all(nl, t);
            for (l, c) in coeffs.iter_mut().enumerate() {
                *c += (2.0 * l as f64 + 1.0) / 2.0 * w * v * p[l];
            }
        }
        HoleShape::Zonal { coeffs }
    }
}

/// The geometric scene `Ω_ε = Ω \ F_ε`.
#[derive(Clone, Debug)]
pub struct PerforationConfig {
    n: usize,
    outer_center: Point,
    outer_radius: f64,
    hole: HoleShape,
    epsilon: f64,
    scale_factor: f64,
    hole_scale: f64,
}

impl PerforationConfig {
    /// Validates raw scene data. Use [`PerforationConfig::normalize`] to
    /// enforce the unit normalizations before building kernels.
    pub fn new(
        n: usize,
        outer_center: Point,
        outer_radius: f64,
        hole: HoleShape,
        epsilon: f64,
    ) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::Dimension(format!(
                "end-to-end scenes support n in {{2, 3}}, got {n}"
            )));
        }
        if outer_center.dim() != n {
            return Err(Error::Dimension(format!(
                "outer center has dimension {}, scene has {n}",
                outer_center.dim()
            )));
        }
        if let Some(d) = hole.natural_dim() {
            if d != n {
                return Err(Error::Dimension(format!(
                    "hole profile is {d}-dimensional, scene has {n}"
                )));
            }
        }
        if !(outer_radius > 0.0) {
            return Err(Error::Geometry("outer radius must be positive".into()));
        }
        if outer_center.norm() >= outer_radius {
            return Err(Error::Geometry(format!(
                "origin must be interior to the outer ball: |c| = {} >= R = {}",
                outer_center.norm(),
                outer_radius
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Geometry("epsilon must be positive".into()));
        }
        Ok(PerforationConfig {
            n,
            outer_center,
            outer_radius,
            hole,
            epsilon,
            scale_factor: 1.0,
            hole_scale: 1.0,
        })
    }

    /// Normalized scene: dist(O, ∂Ω) = 1, hole profile max = 1, ε ≤ 1/4.
    /// Already-normalized scenes are returned bit-identically, which makes
    /// the operation exactly idempotent.
    pub fn normalize(&self) -> Result<PerforationConfig> {
        let (hole, hole_factor) = self.hole.normalized()?;
        let epsilon = if hole_factor == 1.0 {
            self.epsilon
        } else {
            // F_ε is unchanged when the profile shrinks and ε grows together.
            self.epsilon / hole_factor
        };
        let d = self.outer_radius - self.outer_center.norm();
        let (center, radius, eps, factor) = if (d - 1.0).abs() <= NORMALIZATION_TOL {
            (self.outer_center, self.outer_radius, epsilon, 1.0)
        } else {
            let f = 1.0 / d;
            (self.outer_center.scale(f), self.outer_radius * f, epsilon * f, f)
        };
        if eps > EPSILON_MAX {
            return Err(Error::Geometry(format!(
                "epsilon {eps} exceeds {EPSILON_MAX} after normalization"
            )));
        }
        let cfg = PerforationConfig {
            n: self.n,
            outer_center: center,
            outer_radius: radius,
            hole,
            epsilon: eps,
            scale_factor: self.scale_factor * factor,
            hole_scale: self.hole_scale * hole_factor,
        };
        debug_assert!(cfg.is_normalized());
        Ok(cfg)
    }

    pub fn is_normalized(&self) -> bool {
        (self.outer_radius - self.outer_center.norm() - 1.0).abs() <= NORMALIZATION_TOL
            && (self.hole.max_radius() - 1.0).abs() <= 1e-9
            && self.epsilon <= EPSILON_MAX + NORMALIZATION_TOL
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outer_center(&self) -> &Point {
        &self.outer_center
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn hole(&self) -> &HoleShape {
        &self.hole
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Multiplier that was applied to all input lengths by `normalize`.
    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    /// Multiplier that was applied to the hole profile by `normalize`.
    pub fn hole_scale(&self) -> f64 {
        self.hole_scale
    }

    /// Same scene at a different hole scale.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<PerforationConfig> {
        if !(epsilon > 0.0 && epsilon <= EPSILON_MAX) {
            return Err(Error::Geometry(format!(
                "epsilon {epsilon} outside (0, {EPSILON_MAX}]"
            )));
        }
        let mut c = self.clone();
        c.epsilon = epsilon;
        Ok(c)
    }

    pub fn dist_origin_to_outer(&self) -> f64 {
        self.outer_radius - self.outer_center.norm()
    }

    /// Signed distance to the outer boundary (positive inside Ω).
    pub fn outer_boundary_dist(&self, x: &Point) -> f64 {
        self.outer_radius - x.sub(&self.outer_center).norm()
    }

    /// Radial slack to the hole boundary along the direction of `x`
    /// (positive outside `F_ε`). Exact for ball holes; for star-shaped holes
    /// it is the radial gap, a valid admissibility margin.
    pub fn hole_radial_slack(&self, x: &Point) -> f64 {
        let r = x.norm();
        if r == 0.0 {
            return -self.epsilon * self.hole.min_radius();
        }
        let dir = x.scale(1.0 / r);
        r - self.epsilon * self.hole.radius(&dir)
    }

    /// Whether `x` lies in `Ω_ε` with the given margin to both boundaries.
    pub fn contains(&self, x: &Point, margin: f64) -> bool {
        x.dim() == self.n
            && self.outer_boundary_dist(x) >= margin
            && self.hole_radial_slack(x) >= margin
    }
}

/// Sampling strata exercised by the study harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stratum {
    /// Generic interior point pairs.
    Bulk,
    /// First point within `|x| ∈ [ε, 2ε]`.
    NearHole,
    /// First point within distance 0.1 of the outer boundary.
    NearOuterBoundary,
    /// Pairs with `|x - y| ≤ 0.05`.
    NearDiagonal,
}

impl Stratum {
    pub fn all() -> [Stratum; 4] {
        [
            Stratum::Bulk,
            Stratum::NearHole,
            Stratum::NearOuterBoundary,
            Stratum::NearDiagonal,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stratum::Bulk => "bulk",
            Stratum::NearHole => "near-hole",
            Stratum::NearOuterBoundary => "near-outer-boundary",
            Stratum::NearDiagonal => "near-diagonal",
        }
    }

    pub fn parse(s: &str) -> Result<Stratum> {
        match s {
            "bulk" => Ok(Stratum::Bulk),
            "near-hole" => Ok(Stratum::NearHole),
            "near-outer-boundary" => Ok(Stratum::NearOuterBoundary),
            "near-diagonal" => Ok(Stratum::NearDiagonal),
            other => Err(Error::Config(format!("unknown stratum '{other}'"))),
        }
    }

    fn index(&self) -> u64 {
        match self {
            Stratum::Bulk => 0,
            Stratum::NearHole => 1,
            Stratum::NearOuterBoundary => 2,
            Stratum::NearDiagonal => 3,
        }
    }
}

const MAX_REJECTION_FACTOR: usize = 20_000;

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    // Gaussian vector normalized; loop guards against underflow.
    loop {
        let mut c = [0.0; 3];
        for v in c.iter_mut().take(dim) {
            // Box-Muller from two uniforms keeps the dependency surface small.
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            *v = (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
        }
        let p = Point { coords: c, dim };
        let r = p.norm();
        if r > 1e-12 {
            return p.scale(1.0 / r);
        }
    }
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, dim: usize, center: &Point, radius: f64) -> Point {
    let dir = random_direction(rng, dim);
    let u: f64 = rng.gen_range(0.0..1.0);
    let r = radius * u.powf(1.0 / dim as f64);
    center.add(&dir.scale(r))
}

fn sample_bulk(rng: &mut ChaCha8Rng, cfg: &PerforationConfig) -> Option<Point> {
    for _ in 0..MAX_REJECTION_FACTOR {
        let x = uniform_in_ball(rng, cfg.n, &cfg.outer_center, cfg.outer_radius);
        if cfg.contains(&x, BOUNDARY_MARGIN) {
            return Some(x);
        }
    }
    None
}

fn sample_stratum_point(
    rng: &mut ChaCha8Rng,
    cfg: &PerforationConfig,
    stratum: Stratum,
) -> Option<Point> {
    let eps = cfg.epsilon;
    for _ in 0..MAX_REJECTION_FACTOR {
        let x = match stratum {
            Stratum::Bulk | Stratum::NearDiagonal => {
                uniform_in_ball(rng, cfg.n, &cfg.outer_center, cfg.outer_radius)
            }
            Stratum::NearHole => {
                let dir = random_direction(rng, cfg.n);
                let r = rng.gen_range(eps..2.0 * eps);
                dir.scale(r)
            }
            Stratum::NearOuterBoundary => {
                let dir = random_direction(rng, cfg.n);
                let lo = (cfg.outer_radius - 0.1).max(0.0);
                let r = rng.gen_range(lo..cfg.outer_radius - BOUNDARY_MARGIN);
                cfg.outer_center.add(&dir.scale(r))
            }
        };
        if cfg.contains(&x, BOUNDARY_MARGIN) {
            return Some(x);
        }
    }
    None
}

/// Deterministic stratified sampling of admissible evaluation pairs.
///
/// The first point of each pair lies in the requested stratum; the second is
/// a bulk point, except in the near-diagonal stratum where it lies within
/// distance 0.05 of the first. Identical `(seed, stratum, count)` calls
/// return identical lists.
pub fn sample_pairs(
    cfg: &PerforationConfig,
    count: usize,
    seed: u64,
    stratum: Stratum,
) -> Result<Vec<(Point, Point)>> {
    if count == 0 {
        return Err(Error::Sampling("pair count must be at least 1".into()));
    }
    if !cfg.is_normalized() {
        return Err(Error::Geometry(
            "sample_pairs requires a normalized configuration".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stratum.index() + 1);
    let mut pairs = Vec::with_capacity(count);
    let exhausted = |what: &str| {
        Error::Sampling(format!(
            "admissible region for {what} is empty or too thin (eps = {})",
            cfg.epsilon
        ))
    };
    for _ in 0..count {
        let x = sample_stratum_point(&mut rng, cfg, stratum)
            .ok_or_else(|| exhausted(stratum.name()))?;
        let y = match stratum {
            Stratum::NearDiagonal => {
                let mut found = None;
                for _ in 0..MAX_REJECTION_FACTOR {
                    let y = uniform_in_ball(&mut rng, cfg.n, &x, 0.05);
                    if cfg.contains(&y, BOUNDARY_MARGIN) && x.dist(&y) > 1e-9 {
                        found = Some(y);
                        break;
                    }
                }
                found.ok_or_else(|| exhausted("near-diagonal partner"))?
            }
            _ => {
                let mut found = None;
                for _ in 0..MAX_REJECTION_FACTOR {
                    let y = sample_bulk(&mut rng, cfg).ok_or_else(|| exhausted("bulk"))?;
                    if x.dist(&y) > 1e-9 {
                        found = Some(y);
                        break;
                    }
                }
                found.ok_or_else(|| exhausted("distinct partner"))?
            }
        };
        pairs.push((x, y));
    }
    Ok(pairs)
}
