//! Convex hull by monotone chain.

use super::{GeometryError, Point2, Polygon};
use crate::scalar::Real;

/// Convex hull of a point set, counter-clockwise by shoelace sign, starting
/// at the lexicographically smallest vertex. Collinear boundary points are
/// dropped, so the hull is the minimal vertex set.
pub fn convex_hull<R: Real>(points: &[Point2<R>]) -> Result<Polygon<R>, GeometryError> {
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(GeometryError::DegenerateConfiguration("non-finite input point"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::TooFewPoints { needed: 3, got: pts.len() });
    }

    let turns_right = |a: Point2<R>, b: Point2<R>, c: Point2<R>| (b - a).cross(c - a) <= R::zero();
    let chain = |order: &mut dyn Iterator<Item = &Point2<R>>| {
        let mut half: Vec<Point2<R>> = Vec::new();
        for &p in order {
            while half.len() >= 2 && turns_right(half[half.len() - 2], half[half.len() - 1], p) {
                half.pop();
            }
            half.push(p);
        }
        half.pop();
        half
    };

    let mut hull = chain(&mut pts.iter());
    hull.extend(chain(&mut pts.iter().rev()));

    if hull.len() < 3 {
        return Err(GeometryError::DegenerateConfiguration("collinear points"));
    }
    Polygon::new(hull)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn contains(hull: &Polygon<f64>, p: Point2<f64>, tol: f64) -> bool {
        let v = hull.vertices();
        (0..v.len()).all(|i| {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            (b - a).cross(p - a) >= -tol
        })
    }

    #[test]
    fn square_with_interior_points() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 4.0),
            Point2::new(0.0, 4.0),
            Point2::new(2.0, 2.0),
            Point2::new(1.0, 3.0),
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 4);
        assert!(hull.signed_area() > 0.0);
        assert_relative_eq!(hull.area(), 16.0);
        // Starts at the lexicographically smallest point.
        assert_eq!(hull.vertices()[0], Point2::new(0.0, 0.0));
    }

    #[test]
    fn collinear_boundary_points_are_dropped() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 4);
    }

    #[test]
    fn random_points_all_land_inside() {
        let mut rng = StdRng::seed_from_u64(91);
        for _ in 0..20 {
            let pts: Vec<Point2<f64>> = (0..60)
                .map(|_| Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
                .collect();
            let hull = convex_hull(&pts).unwrap();
            assert!(hull.signed_area() > 0.0);
            for &p in &pts {
                assert!(contains(&hull, p, 1e-9));
            }
        }
    }

    #[test]
    fn duplicates_do_not_inflate_the_hull() {
        let mut pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(0.0, 3.0),
        ];
        pts.extend(pts.clone());
        pts.extend(pts.clone());
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 3);
        assert_relative_eq!(hull.area(), 4.5);
    }

    #[test]
    fn degenerate_inputs() {
        let two = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)];
        assert_eq!(
            convex_hull(&two).unwrap_err(),
            GeometryError::TooFewPoints { needed: 3, got: 2 }
        );

        // Many points, two distinct.
        let dup = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 0.0)];
        assert_eq!(
            convex_hull(&dup).unwrap_err(),
            GeometryError::TooFewPoints { needed: 3, got: 2 }
        );

        let line: Vec<Point2<f64>> = (0..10).map(|k| Point2::new(k as f64, k as f64)).collect();
        assert_eq!(
            convex_hull(&line).unwrap_err(),
            GeometryError::DegenerateConfiguration("collinear points")
        );
    }
}
