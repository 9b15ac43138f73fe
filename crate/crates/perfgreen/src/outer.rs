//! Green's function of the unperturbed ball or disk by the method of images.
//!
//! For the ball `B_R(c)` the reflected source of `y` is
//! `y* = c + R²(y-c)/|y-c|²`, and the image distance
//!
//! ```text
//! s(x, y) = |y-c| |x - y*| = sqrt(|y-c|²|x-c|² - 2R²(x-c)·(y-c) + R⁴)
//! ```
//!
//! is symmetric in `(x, y)` and smooth across `y = c`, so the same expression
//! serves the interior formulas and all their origin limits exactly. On the
//! boundary `s = R|x-y|`, which gives the Dirichlet condition identically.

use crate::geometry::{DimensionConstants, PerforationConfig, Point};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Evaluators for the outer Green's function `G` and its regular part `H`.
#[derive(Clone, Debug)]
pub struct OuterKernel {
    n: usize,
    center: Point,
    radius: f64,
    constants: DimensionConstants,
}

impl OuterKernel {
    pub fn new(config: &PerforationConfig) -> Result<Self> {
        Self::for_ball(config.n(), *config.outer_center(), config.outer_radius())
    }

    pub fn for_ball(n: usize, center: Point, radius: f64) -> Result<Self> {
        if center.dim() != n && !(n > 3) {
            return Err(Error::Dimension(format!(
                "center dimension {} does not match n = {n}",
                center.dim()
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::Geometry("outer radius must be positive".into()));
        }
        Ok(OuterKernel {
            n,
            center,
            radius,
            constants: DimensionConstants::new(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn constants(&self) -> &DimensionConstants {
        &self.constants
    }

    pub fn contains(&self, x: &Point, margin: f64) -> bool {
        x.sub(&self.center).norm() <= self.radius - margin
    }

    /// Point on ∂Ω in the direction `dir` from the center.
    pub fn boundary_point(&self, dir: &Point) -> Result<Point> {
        Ok(self.center.add(&dir.unit()?.scale(self.radius)))
    }

    /// Symmetric image distance; equals `R|x-y|` on the boundary and
    /// `R² - |x-c|²` on the diagonal.
    fn image_distance(&self, x: &Point, y: &Point) -> f64 {
        let xc = x.sub(&self.center);
        let yc = y.sub(&self.center);
        let r2 = self.radius * self.radius;
        let s2 = yc.dot(&yc) * xc.dot(&xc) - 2.0 * r2 * xc.dot(&yc) + r2 * r2;
        s2.max(0.0).sqrt()
    }

    fn check_inside(&self, p: &Point, what: &str) -> Result<()> {
        let d = p.sub(&self.center).norm();
        if d > self.radius * (1.0 + 1e-12) {
            return Err(Error::OutsideDomain(format!(
                "{what} at distance {d} from the center exceeds the radius {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// Green's function of `-Δ` in the ball with zero Dirichlet data.
    pub fn green(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_inside(x, "x")?;
        self.check_inside(y, "y")?;
        let d = x.dist(y);
        if d == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        let s = self.image_distance(x, y);
        let k = self.constants.fundamental_coefficient();
        Ok(if self.n == 2 {
            k * (s / (self.radius * d)).ln()
        } else {
            k * (d.powi(2 - self.n as i32) - (s / self.radius).powi(2 - self.n as i32))
        })
    }

    /// Regular part `H(x, y)`: fundamental solution minus `green`. Harmonic
    /// in each argument and finite on the diagonal.
    pub fn regular(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_inside(x, "x")?;
        self.check_inside(y, "y")?;
        let s = self.image_distance(x, y);
        let k = self.constants.fundamental_coefficient();
        Ok(if self.n == 2 {
            k * (self.radius / s).ln()
        } else {
            k * (s / self.radius).powi(2 - self.n as i32)
        })
    }

    /// `H(x, 0)` — the `y → O` limit, exact by the smoothness of `s`.
    pub fn regular_source_origin(&self, x: &Point) -> Result<f64> {
        self.regular(x, &Point::zero(x.dim())?)
    }

    /// `H(0, y)` — the `x → O` limit.
    pub fn regular_field_origin(&self, y: &Point) -> Result<f64> {
        self.regular(&Point::zero(y.dim())?, y)
    }

    /// `H(0, 0)`.
    pub fn regular_origin(&self) -> f64 {
        let c2 = self.center.dot(&self.center);
        let r2 = self.radius * self.radius;
        let s = r2 - c2; // image distance at the origin pair
        let k = self.constants.fundamental_coefficient();
        if self.n == 2 {
            k * (self.radius / s).ln()
        } else {
            k * (s / self.radius).powi(2 - self.n as i32)
        }
    }

    /// Outer conformal radius `R_Ω = exp(-2πH(0,0))` (planar scenes only).
    pub fn outer_conformal_radius(&self) -> Result<f64> {
        if self.n != 2 {
            return Err(Error::Dimension(
                "the outer conformal radius is a planar quantity".into(),
            ));
        }
        Ok((-2.0 * PI * self.regular_origin()).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HoleShape;
    use approx::assert_relative_eq;

    fn unit_ball(n: usize) -> OuterKernel {
        OuterKernel::for_ball(n, Point::zero(n).unwrap(), 1.0).unwrap()
    }

    fn offcenter_disk() -> OuterKernel {
        OuterKernel::for_ball(2, Point::new2(0.3, 0.0), 1.3).unwrap()
    }

    #[test]
    fn green_unit_ball_axis_pair() {
        // Image formula by hand: E = 1/(4π), image term 1/(4π·1.25).
        let k = unit_ball(3);
        let g = k
            .green(&Point::new3(0.5, 0.0, 0.0), &Point::new3(-0.5, 0.0, 0.0))
            .unwrap();
        assert_relative_eq!(g, 1.0 / (20.0 * PI), max_relative = 1e-14);
    }

    #[test]
    fn green_vanishes_on_boundary() {
        let k = unit_ball(3);
        let x = Point::new3(0.6, 0.8, 0.0); // |x| = 1
        let y = Point::new3(0.1, -0.2, 0.3);
        assert!(k.green(&x, &y).unwrap().abs() <= 1e-13);

        let d = offcenter_disk();
        let bx = d.boundary_point(&Point::new2(0.6, -0.8)).unwrap();
        let y2 = Point::new2(0.2, 0.1);
        assert!(d.green(&bx, &y2).unwrap().abs() <= 1e-13);
    }

    #[test]
    fn green_symmetric_and_positive() {
        for k in [unit_ball(3), offcenter_disk()] {
            let (x, y) = if k.n() == 3 {
                (Point::new3(0.3, -0.2, 0.4), Point::new3(-0.1, 0.5, 0.2))
            } else {
                (Point::new2(0.3, -0.2), Point::new2(-0.1, 0.5))
            };
            let a = k.green(&x, &y).unwrap();
            let b = k.green(&y, &x).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-14);
            assert!(a > 0.0);
        }
    }

    #[test]
    fn green_rejects_coincident_and_outside_points() {
        let k = unit_ball(3);
        let x = Point::new3(0.2, 0.0, 0.0);
        assert!(matches!(k.green(&x, &x), Err(Error::CoincidentPoints)));
        let far = Point::new3(1.5, 0.0, 0.0);
        assert!(matches!(k.green(&far, &x), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn regular_part_is_constant_for_source_at_center() {
        // For the unit ball centered at the origin, H(x, 0) = 1/(4π): the
        // image term has boundary data (4π)^{-1}|x|^{-1} = (4π)^{-1} on |x|=1
        // and a constant is the unique bounded harmonic extension.
        let k = unit_ball(3);
        for x in [
            Point::new3(0.0, 0.0, 0.0),
            Point::new3(0.5, 0.0, 0.0),
            Point::new3(-0.2, 0.7, 0.1),
            Point::new3(0.9, 0.1, -0.3),
        ] {
            assert_relative_eq!(
                k.regular_source_origin(&x).unwrap(),
                1.0 / (4.0 * PI),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn unit_disk_regular_origin_and_conformal_radius() {
        let k = unit_ball(2);
        assert_eq!(k.regular_origin(), 0.0);
        assert_relative_eq!(k.outer_conformal_radius().unwrap(), 1.0, max_relative = 1e-15);
        // H(x, 0) = 0 for every interior x of the unit disk.
        for x in [Point::new2(0.4, 0.1), Point::new2(-0.7, 0.2)] {
            assert!(k.regular_source_origin(&x).unwrap().abs() <= 1e-15);
        }
    }

    #[test]
    fn offcenter_disk_regular_origin_closed_form() {
        let k = offcenter_disk();
        let expected = -((1.3 * 1.3 - 0.09) / 1.3f64).ln() / (2.0 * PI);
        assert_relative_eq!(k.regular_origin(), expected, max_relative = 1e-14);
    }

    #[test]
    fn regular_symmetric_and_matches_fundamental_on_boundary() {
        let k = offcenter_disk();
        let x = Point::new2(0.5, 0.3);
        let y = Point::new2(-0.4, 0.2);
        assert_relative_eq!(
            k.regular(&x, &y).unwrap(),
            k.regular(&y, &x).unwrap(),
            max_relative = 1e-13
        );
        let bx = k.boundary_point(&Point::new2(-0.3, 0.95)).unwrap();
        let h = k.regular(&bx, &y).unwrap();
        let e = k.constants().fundamental(bx.dist(&y));
        assert!((h - e).abs() <= 1e-10, "boundary identity violated: {}", h - e);
    }

    #[test]
    fn regular_is_discretely_harmonic() {
        for k in [unit_ball(3), offcenter_disk()] {
            let h = 1e-3;
            let (x, y) = if k.n() == 3 {
                (Point::new3(0.25, -0.1, 0.2), Point::new3(-0.3, 0.4, 0.1))
            } else {
                (Point::new2(0.25, -0.1), Point::new2(-0.3, 0.4))
            };
            let mut lap = -2.0 * k.n() as f64 * k.regular(&x, &y).unwrap();
            for i in 0..k.n() {
                for s in [-1.0, 1.0] {
                    let mut c = [0.0; 3];
                    c[..x.dim()].copy_from_slice(x.coords());
                    c[i] += s * h;
                    let xp = Point::from_slice(&c[..x.dim()]).unwrap();
                    lap += k.regular(&xp, &y).unwrap();
                }
            }
            lap /= h * h;
            assert!(lap.abs() <= 1e-6, "discrete Laplacian {lap}");
        }
    }

    #[test]
    fn higher_dimensional_formula_path_is_consistent() {
        // n = 4 with points in a 3-coordinate subspace: the kernel depends
        // only on distances, so symmetry and the boundary identity must hold
        // with the n = 4 fundamental coefficient.
        let k = OuterKernel::for_ball(4, Point::zero(3).unwrap(), 1.0).unwrap();
        let x = Point::new3(0.5, 0.1, -0.2);
        let y = Point::new3(-0.3, 0.4, 0.2);
        assert_relative_eq!(
            k.green(&x, &y).unwrap(),
            k.green(&y, &x).unwrap(),
            max_relative = 1e-14
        );
        assert!(k.green(&x, &y).unwrap() > 0.0);
        let bx = Point::new3(0.6, 0.8, 0.0);
        assert!(k.green(&bx, &y).unwrap().abs() <= 1e-13);
        let h = k.regular(&bx, &y).unwrap();
        let e = k.constants().fundamental(bx.dist(&y));
        assert!((h - e).abs() <= 1e-12);
    }

    #[test]
    fn offcenter_regular_origin_matches_collocation_oracle() {
        let k = offcenter_disk();
        let origin = Point::zero(2).unwrap();
        let h_mfs = crate::oracle::collocation::outer_regular_oracle(
            2,
            &Point::new2(0.3, 0.0),
            1.3,
            &origin,
            &origin,
        )
        .unwrap();
        assert!((k.regular_origin() - h_mfs).abs() <= 1e-9);
    }

    #[test]
    fn kernel_from_config() {
        let cfg = PerforationConfig::new(2, Point::new2(0.3, 0.0), 1.3, HoleShape::Ball, 0.1)
            .unwrap()
            .normalize()
            .unwrap();
        let k = OuterKernel::new(&cfg).unwrap();
        assert_eq!(k.radius(), 1.3);
    }
}
