//! Ellipse type, boundary sampling, and point-to-boundary distances.

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2, Polygon, Rect};
use crate::scalar::Real;

/// Number of boundary samples used for point-to-ellipse distances.
///
/// At this density the polyline deviates from the true boundary by under
/// `a * (1 - cos(pi/720))`, about 1e-5 of the semi-major axis, far below
/// the pixel-scale tolerances used anywhere in the pipeline.
pub const DIST_SAMPLES: usize = 720;

/// Ellipse in the image plane.
///
/// `theta` is the angle from the x-axis to the semi-major axis, in radians.
/// Canonical form has `a >= b > 0` and `theta` in `[0, pi)`; [`Ellipse::new`]
/// establishes it. A circle gets `theta = 0`.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Ellipse<R> {
    pub cx: R,
    pub cy: R,
    /// Semi-major axis length.
    pub a: R,
    /// Semi-minor axis length.
    pub b: R,
    /// Major-axis angle in `[0, pi)`.
    #[serde(rename = "theta_radians")]
    pub theta: R,
}

impl<R: Real> Ellipse<R> {
    /// Builds a canonical ellipse, swapping axes and wrapping the angle as
    /// needed. Rejects non-finite or non-positive axes.
    pub fn new(cx: R, cy: R, a: R, b: R, theta: R) -> Result<Self, GeometryError> {
        for v in [cx, cy, a, b, theta] {
            if !v.is_finite() {
                return Err(GeometryError::DegenerateConfiguration(
                    "non-finite ellipse parameter",
                ));
            }
        }
        if a <= R::zero() || b <= R::zero() {
            return Err(GeometryError::DegenerateConfiguration("non-positive semi-axis"));
        }
        let pi = R::from_f64_lossy(std::f64::consts::PI);
        let half_pi = R::from_f64_lossy(std::f64::consts::FRAC_PI_2);
        let (a, b, mut theta) = if a >= b { (a, b, theta) } else { (b, a, theta + half_pi) };
        theta = theta % pi;
        if theta < R::zero() {
            theta += pi;
        }
        if a == b {
            theta = R::zero();
        }
        Ok(Ellipse { cx, cy, a, b, theta })
    }

    pub fn center(&self) -> Point2<R> {
        Point2::new(self.cx, self.cy)
    }

    pub fn area(&self) -> R {
        R::from_f64_lossy(std::f64::consts::PI) * self.a * self.b
    }

    /// Boundary point at parameter `t`.
    pub fn point_at(&self, t: R) -> Point2<R> {
        let (st, ct) = t.sin_cos();
        let (sth, cth) = self.theta.sin_cos();
        let px = self.a * ct;
        let py = self.b * st;
        Point2::new(self.cx + px * cth - py * sth, self.cy + px * sth + py * cth)
    }

    /// `n` boundary points at parameters `t_k = 2 pi k / n`, `k = 0..n`.
    pub fn sample_points(&self, n: usize) -> Vec<Point2<R>> {
        let tau = R::from_f64_lossy(std::f64::consts::TAU);
        let step = tau / R::from_usize_lossy(n);
        (0..n).map(|k| self.point_at(step * R::from_usize_lossy(k))).collect()
    }

    /// Left-hand side of the implicit equation, `(u/a)^2 + (v/b)^2`, where
    /// `(u, v)` are the point's coordinates in the ellipse frame. Equals 1 on
    /// the boundary, less inside, more outside.
    pub fn implicit_value(&self, p: Point2<R>) -> R {
        let (u, v) = self.to_frame(p);
        let ua = u / self.a;
        let vb = v / self.b;
        ua * ua + vb * vb
    }

    /// First-order (Sampson) approximation of the signed distance from `p`
    /// to the boundary: negative inside, positive outside.
    pub fn sampson_distance(&self, p: Point2<R>) -> R {
        let (u, v) = self.to_frame(p);
        let two = R::from_f64_lossy(2.0);
        let ua = u / self.a;
        let vb = v / self.b;
        let q = ua * ua + vb * vb - R::one();
        let gu = two * u / (self.a * self.a);
        let gv = two * v / (self.b * self.b);
        let g = (gu * gu + gv * gv).sqrt();
        if g < R::epsilon() {
            // At the center the gradient vanishes; the boundary is at least
            // a semi-minor axis away.
            return -self.b;
        }
        q / g
    }

    /// Distance from `p` to the nearest of [`DIST_SAMPLES`] boundary points.
    pub fn boundary_distance(&self, p: Point2<R>) -> R {
        let tau = R::from_f64_lossy(std::f64::consts::TAU);
        let step = tau / R::from_usize_lossy(DIST_SAMPLES);
        let mut best = R::infinity();
        for k in 0..DIST_SAMPLES {
            let q = self.point_at(step * R::from_usize_lossy(k));
            best = best.min(p.distance(q));
        }
        best
    }

    /// Boundary polygon with `n` vertices, counter-clockwise by shoelace sign.
    pub fn to_polygon(&self, n: usize) -> Polygon<R> {
        Polygon::new(self.sample_points(n.max(3))).expect("n >= 3 vertices")
    }

    /// Tight axis-aligned bounding rectangle.
    pub fn bounding_rect(&self) -> Rect<R> {
        let (sth, cth) = self.theta.sin_cos();
        let wx = ((self.a * cth) * (self.a * cth) + (self.b * sth) * (self.b * sth)).sqrt();
        let wy = ((self.a * sth) * (self.a * sth) + (self.b * cth) * (self.b * cth)).sqrt();
        Rect::new(self.cx - wx, self.cy - wy, self.cx + wx, self.cy + wy)
    }

    /// Coordinates of `p` in the ellipse frame (centered, axes-aligned).
    fn to_frame(&self, p: Point2<R>) -> (R, R) {
        let dx = p.x - self.cx;
        let dy = p.y - self.cy;
        let (sth, cth) = self.theta.sin_cos();
        (dx * cth + dy * sth, -dx * sth + dy * cth)
    }
}

/// Mean squared distance from each point to the ellipse boundary, with the
/// boundary approximated by [`DIST_SAMPLES`] samples. Zero for no points.
pub fn mean_squared_boundary_distance<R: Real>(e: &Ellipse<R>, points: &[Point2<R>]) -> R {
    if points.is_empty() {
        return R::zero();
    }
    let samples = e.sample_points(DIST_SAMPLES);
    let mut sum = R::zero();
    for &p in points {
        let mut best = R::infinity();
        for &q in &samples {
            best = best.min(p.distance_sq(q));
        }
        sum += best;
    }
    sum / R::from_usize_lossy(points.len())
}
