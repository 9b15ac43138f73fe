//! Dense least-squares machinery shared by the fundamental-solution
//! collocation backends.
//!
//! Fundamental-solution systems are exponentially ill-conditioned while the
//! evaluated fields remain accurate, so all solves go through an SVD with a
//! relative singular-value cutoff rather than a direct factorization.

use crate::geometry::Point;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, Dyn, SVD};
use std::f64::consts::PI;

/// Relative singular-value cutoff used by every collocation solve.
pub const SVD_CUTOFF: f64 = 1e-12;

/// Regularized least-squares solver with a fixed matrix and many right-hand
/// sides. Solutions minimize the residual over the numerical range of the
/// matrix; singular values below `cutoff · σ_max` are truncated.
pub struct SvdLsq {
    a: DMatrix<f64>,
    svd: SVD<f64, Dyn, Dyn>,
    abs_cutoff: f64,
    sigma_max: f64,
}

impl SvdLsq {
    pub fn new(a: DMatrix<f64>, cutoff: f64) -> Result<Self> {
        if a.nrows() < a.ncols() {
            return Err(Error::Solver(format!(
                "underdetermined collocation system ({}x{})",
                a.nrows(),
                a.ncols()
            )));
        }
        let svd = SVD::new(a.clone(), true, true);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if !(sigma_max > 0.0) {
            return Err(Error::Solver("collocation matrix is zero".into()));
        }
        Ok(SvdLsq { a, svd, abs_cutoff: cutoff * sigma_max, sigma_max })
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.svd
            .solve(b, self.abs_cutoff)
            .map_err(|e| Error::Solver(format!("SVD solve failed: {e}")))
    }

    /// Max-norm residual of a computed solution on the collocation rows.
    pub fn residual_inf(&self, c: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (&self.a * c - b).amax()
    }

    /// σ_max / smallest retained singular value.
    pub fn condition_estimate(&self) -> f64 {
        let smin = self
            .svd
            .singular_values
            .iter()
            .cloned()
            .filter(|s| *s > self.abs_cutoff)
            .fold(f64::INFINITY, f64::min);
        self.sigma_max / smin
    }
}

/// Equally spaced unit directions on the circle. `phase` offsets the angles,
/// which keeps check nodes distinct from collocation nodes.
pub fn circle_directions(m: usize, phase: f64) -> Vec<Point> {
    (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64 + phase;
            Point::new2(t.cos(), t.sin())
        })
        .collect()
}

/// Quasi-uniform unit directions on the sphere (golden-spiral lattice).
/// `phase` rotates the spiral so independent node sets can be generated.
pub fn fibonacci_directions(m: usize, phase: f64) -> Vec<Point> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..m)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = 2.0 * PI * (i as f64 / golden + phase);
            Point::new3(r * t.cos(), r * t.sin(), z)
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let eval = |x: f64| -> (f64, f64) {
        let (mut p0, mut p1) = (1.0, x);
        for k in 1..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = eval(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = eval(x);
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Gauss–Legendre × equispaced product grid on the unit sphere, with
/// weights normalized to sum to 1 (spherical means are exact up to harmonic
/// degree ~2·ntheta). Product grids keep fundamental-solution collocation
/// spectrally clean where quasi-random lattices plateau.
pub fn gauss_sphere_directions(ntheta: usize, nphi: usize, phase: f64) -> Vec<(Point, f64)> {
    let (zs, ws) = gauss_legendre(ntheta);
    let mut pts = Vec::with_capacity(ntheta * nphi);
    for (z, w) in zs.iter().zip(&ws) {
        let r = (1.0 - z * z).max(0.0).sqrt();
        for j in 0..nphi {
            let p = 2.0 * PI * j as f64 / nphi as f64 + phase;
            pts.push((Point::new3(r * p.cos(), r * p.sin(), *z), w / (2.0 * nphi as f64)));
        }
    }
    pts
}

/// Product grid sized to approximately `count` points (`nphi = 2·ntheta`).
pub fn sphere_grid(count: usize, phase: f64) -> Vec<(Point, f64)> {
    let nt = (((count as f64) / 2.0).sqrt().round() as usize).max(4);
    gauss_sphere_directions(nt, 2 * nt, phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let lsq = SvdLsq::new(a, SVD_CUTOFF).unwrap();
        let c = lsq.solve(&b).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
        assert!(lsq.residual_inf(&c, &b) < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_regularized() {
        // Second column is a copy of the first; the minimum-norm solution
        // splits the coefficient between them.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let b = DVector::from_row_slice(&[1.0, 2.0]);
        let lsq = SvdLsq::new(a, SVD_CUTOFF).unwrap();
        let c = lsq.solve(&b).unwrap();
        assert!(lsq.residual_inf(&c, &b) < 1e-12);
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn direction_sets_are_unit_and_distinct() {
        for d in circle_directions(64, 0.0) {
            assert!((d.norm() - 1.0).abs() < 1e-14);
        }
        let dirs = fibonacci_directions(200, 0.0);
        for d in &dirs {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
        let shifted = fibonacci_directions(200, 0.37);
        assert!(dirs[0].dist(&shifted[0]) > 1e-3);
    }
}
