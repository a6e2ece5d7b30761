//! Points, rectangles, polygons, ellipses, and the direct least-squares
//! ellipse fit.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Real;

mod clip;
mod ellipse;
mod fit;
mod hull;

pub use clip::polygon_clip_area;
pub use ellipse::{mean_squared_boundary_distance, Ellipse, DIST_SAMPLES};
pub use fit::{fit_ellipse_dls, Conic};
pub use hull::convex_hull;

/// Error from a geometric operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    /// The operation needs more input points than were supplied.
    TooFewPoints { needed: usize, got: usize },
    /// The input admits no solution of the requested kind.
    DegenerateConfiguration(&'static str),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::TooFewPoints { needed, got } => {
                write!(f, "needs at least {needed} points, got {got}")
            }
            GeometryError::DegenerateConfiguration(what) => {
                write!(f, "degenerate configuration: {what}")
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// Point in the plane, also used as a 2D vector.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct Point2<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Point2<R> {
    pub fn new(x: R, y: R) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Self) -> R {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product of the two vectors.
    pub fn cross(self, other: Self) -> R {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> R {
        self.dot(self).sqrt()
    }

    /// Sum of absolute coordinates.
    pub fn norm_l1(self) -> R {
        self.x.abs() + self.y.abs()
    }

    pub fn distance(self, other: Self) -> R {
        (self - other).norm()
    }

    pub fn distance_sq(self, other: Self) -> R {
        let d = self - other;
        d.dot(d)
    }
}

impl<R: Real> Add for Point2<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<R: Real> Sub for Point2<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<R: Real> Mul<R> for Point2<R> {
    type Output = Self;
    fn mul(self, rhs: R) -> Self {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl<R: Real> Neg for Point2<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Point2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle, `x_min <= x_max` and `y_min <= y_max`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Rect<R> {
    pub x_min: R,
    pub y_min: R,
    pub x_max: R,
    pub y_max: R,
}

impl<R: Real> Rect<R> {
    pub fn new(x_min: R, y_min: R, x_max: R, y_max: R) -> Self {
        debug_assert!(x_min <= x_max && y_min <= y_max);
        Rect { x_min, y_min, x_max, y_max }
    }

    pub fn width(&self) -> R {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> R {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> R {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2<R> {
        let half = R::from_f64_lossy(0.5);
        Point2::new((self.x_min + self.x_max) * half, (self.y_min + self.y_max) * half)
    }

    pub fn contains(&self, p: Point2<R>) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Overlap rectangle, if the two intersect with positive area.
    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let x_min = self.x_min.max(other.x_min);
        let y_min = self.y_min.max(other.y_min);
        let x_max = self.x_max.min(other.x_max);
        let y_max = self.y_max.min(other.y_max);
        if x_min < x_max && y_min < y_max {
            Some(Rect { x_min, y_min, x_max, y_max })
        } else {
            None
        }
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &Self) -> Self {
        Rect {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }
}

/// Simple polygon as an ordered vertex list.
#[derive(Clone, PartialEq, Debug)]
pub struct Polygon<R> {
    verts: Vec<Point2<R>>,
}

impl<R: Real> Polygon<R> {
    /// Builds a polygon from at least three vertices.
    pub fn new(verts: Vec<Point2<R>>) -> Result<Self, GeometryError> {
        if verts.len() < 3 {
            return Err(GeometryError::TooFewPoints { needed: 3, got: verts.len() });
        }
        Ok(Polygon { verts })
    }

    pub fn vertices(&self) -> &[Point2<R>] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Shoelace area, positive for counter-clockwise vertex order.
    pub fn signed_area(&self) -> R {
        shoelace(&self.verts)
    }

    pub fn area(&self) -> R {
        self.signed_area().abs()
    }
}

/// Signed shoelace area of a vertex list, half the summed cross products.
pub(crate) fn shoelace<R: Real>(verts: &[Point2<R>]) -> R {
    if verts.len() < 3 {
        return R::zero();
    }
    let mut twice = R::zero();
    for (i, &p) in verts.iter().enumerate() {
        let q = verts[(i + 1) % verts.len()];
        twice += p.cross(q);
    }
    twice * R::from_f64_lossy(0.5)
}
