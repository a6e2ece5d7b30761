//! Ordered contour tracing over a binary edge map.

use super::{EdgeMap, PixelPoint, RawContour};

/// 8-neighborhood in clockwise order starting east, `y` growing downward.
const DIRS: [(i64, i64); 8] =
    [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Partitions the edge pixels into ordered contours.
///
/// Every edge pixel lands in exactly one contour. Open curves are walked
/// end to end by seeding at pixels with a single edge neighbor first; loops
/// and junction leftovers are picked up afterwards in row-major order. At
/// each step the walk continues to the unvisited neighbor that bends the
/// least from the current heading, preferring the clockwise side on ties,
/// which keeps the result deterministic.
pub fn trace_contours(edges: &EdgeMap) -> Vec<RawContour> {
    let w = edges.width();
    let mut visited = vec![false; w * edges.height()];
    let mut contours = Vec::new();

    let pixels = edges.edge_pixels();
    let neighbor_count = |p: &PixelPoint| {
        DIRS.iter()
            .filter(|(dx, dy)| edges.contains(p.x as i64 + dx, p.y as i64 + dy))
            .count()
    };

    for p in pixels.iter().filter(|p| neighbor_count(p) == 1) {
        if !visited[p.y as usize * w + p.x as usize] {
            contours.push(walk(edges, &mut visited, *p));
        }
    }
    for p in &pixels {
        if !visited[p.y as usize * w + p.x as usize] {
            contours.push(walk(edges, &mut visited, *p));
        }
    }
    contours
}

fn walk(edges: &EdgeMap, visited: &mut [bool], start: PixelPoint) -> RawContour {
    let w = edges.width();
    let mut points = vec![start];
    visited[start.y as usize * w + start.x as usize] = true;
    let mut cur = start;
    let mut heading: Option<usize> = None;

    loop {
        let mut next: Option<(u32, usize)> = None;
        for (k, (dx, dy)) in DIRS.iter().enumerate() {
            let (nx, ny) = (cur.x as i64 + dx, cur.y as i64 + dy);
            if !edges.contains(nx, ny) || visited[ny as usize * w + nx as usize] {
                continue;
            }
            let key = match heading {
                // First step: fixed scan order.
                None => k as u32,
                Some(h) => {
                    let diff = ((k + 8 - h) % 8) as i64;
                    let signed = if diff > 4 { diff - 8 } else { diff };
                    // Least turn first; clockwise beats counter-clockwise
                    // on equal magnitude.
                    (signed.unsigned_abs() as u32) * 2 + u32::from(signed < 0)
                }
            };
            if next.map_or(true, |(best, _)| key < best) {
                next = Some((key, k));
            }
        }
        let Some((_, k)) = next else { break };
        let (dx, dy) = DIRS[k];
        cur = PixelPoint::new(cur.x + dx as i32, cur.y + dy as i32);
        visited[cur.y as usize * w + cur.x as usize] = true;
        points.push(cur);
        heading = Some(k);
    }
    RawContour { points }
}
