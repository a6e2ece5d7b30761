//! Polygon-rectangle clipping.

use super::{shoelace, Point2, Polygon, Rect};
use crate::scalar::Real;

/// Area of the intersection of a polygon with an axis-aligned rectangle.
///
/// Clips the polygon against each rectangle edge in turn and takes the
/// shoelace area of what remains; zero when they do not overlap.
pub fn polygon_clip_area<R: Real>(poly: &Polygon<R>, rect: &Rect<R>) -> R {
    let mut verts = poly.vertices().to_vec();
    for edge in 0..4 {
        verts = clip_edge(&verts, edge, rect);
        if verts.is_empty() {
            return R::zero();
        }
    }
    shoelace(&verts).abs()
}

/// One Sutherland-Hodgman pass against a single rectangle edge
/// (0: left, 1: right, 2: top, 3: bottom).
fn clip_edge<R: Real>(verts: &[Point2<R>], edge: usize, rect: &Rect<R>) -> Vec<Point2<R>> {
    let inside = |p: Point2<R>| match edge {
        0 => p.x >= rect.x_min,
        1 => p.x <= rect.x_max,
        2 => p.y >= rect.y_min,
        _ => p.y <= rect.y_max,
    };
    let cross_point = |a: Point2<R>, b: Point2<R>| match edge {
        0 | 1 => {
            let x = if edge == 0 { rect.x_min } else { rect.x_max };
            let t = (x - a.x) / (b.x - a.x);
            Point2::new(x, a.y + (b.y - a.y) * t)
        }
        _ => {
            let y = if edge == 2 { rect.y_min } else { rect.y_max };
            let t = (y - a.y) / (b.y - a.y);
            Point2::new(a.x + (b.x - a.x) * t, y)
        }
    };

    let mut out = Vec::with_capacity(verts.len() + 4);
    for (i, &a) in verts.iter().enumerate() {
        let b = verts[(i + 1) % verts.len()];
        match (inside(a), inside(b)) {
            (true, true) => out.push(b),
            (true, false) => out.push(cross_point(a, b)),
            (false, true) => {
                out.push(cross_point(a, b));
                out.push(b);
            }
            (false, false) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{convex_hull, Ellipse};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn square(x0: f64, y0: f64, side: f64) -> Polygon<f64> {
        Polygon::new(vec![
            Point2::new(x0, y0),
            Point2::new(x0 + side, y0),
            Point2::new(x0 + side, y0 + side),
            Point2::new(x0, y0 + side),
        ])
        .unwrap()
    }

    #[test]
    fn containment_and_disjointness() {
        let poly = square(1.0, 1.0, 2.0);
        let big = Rect::new(0.0, 0.0, 10.0, 10.0);
        assert_relative_eq!(polygon_clip_area(&poly, &big), 4.0);

        let far = Rect::new(20.0, 20.0, 30.0, 30.0);
        assert_relative_eq!(polygon_clip_area(&poly, &far), 0.0);
    }

    #[test]
    fn half_overlap() {
        let poly = square(0.0, 0.0, 4.0);
        let right_half = Rect::new(2.0, -10.0, 100.0, 10.0);
        assert_relative_eq!(polygon_clip_area(&poly, &right_half), 8.0);
    }

    #[test]
    fn corner_overlap_of_a_triangle() {
        // Right triangle with legs 4 along the axes; clip to the unit square
        // at the right-angle corner. The hypotenuse x + y = 4 stays outside,
        // so the clipped region is the full unit square.
        let tri = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(0.0, 4.0),
        ])
        .unwrap();
        let unit = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert_relative_eq!(polygon_clip_area(&tri, &unit), 1.0);

        // A window crossing the hypotenuse: x, y in [1, 3]. The triangle
        // cuts the 2x2 window to the half below x + y = 4, area 2.
        let window = Rect::new(1.0, 1.0, 3.0, 3.0);
        assert_relative_eq!(polygon_clip_area(&tri, &window), 2.0);
    }

    #[test]
    fn circle_against_a_half_plane_window() {
        let circle = Ellipse::new(0.0, 0.0, 10.0, 10.0, 0.0).unwrap();
        let poly = circle.to_polygon(720);
        let right = Rect::new(0.0, -20.0, 20.0, 20.0);
        assert_relative_eq!(
            polygon_clip_area(&poly, &right),
            circle.area() / 2.0,
            max_relative = 1e-3
        );
    }

    #[test]
    fn grid_oracle_on_random_hulls() {
        // Compare against brute-force area estimation on a fine grid.
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..10 {
            let pts: Vec<Point2<f64>> = (0..40)
                .map(|_| Point2::new(rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0)))
                .collect();
            let poly = convex_hull(&pts).unwrap();
            let rect = {
                let x0 = rng.gen_range(0.0..10.0);
                let y0 = rng.gen_range(0.0..10.0);
                Rect::new(x0, y0, x0 + rng.gen_range(4.0..10.0), y0 + rng.gen_range(4.0..10.0))
            };

            let clipped = polygon_clip_area(&poly, &rect);

            let steps = 500;
            let mut hits = 0u64;
            let (dx, dy) = (rect.width() / steps as f64, rect.height() / steps as f64);
            for i in 0..steps {
                for j in 0..steps {
                    let p = Point2::new(
                        rect.x_min + (i as f64 + 0.5) * dx,
                        rect.y_min + (j as f64 + 0.5) * dy,
                    );
                    let v = poly.vertices();
                    let inside = (0..v.len())
                        .all(|k| (v[(k + 1) % v.len()] - v[k]).cross(p - v[k]) >= 0.0);
                    if inside {
                        hits += 1;
                    }
                }
            }
            let estimate = hits as f64 * dx * dy;
            assert!(
                (clipped - estimate).abs() < 0.02 * rect.area().max(1.0),
                "clip {clipped} vs grid {estimate}"
            );
        }
    }
}
