//! Ellipse fitting on grouped contours and the two detection-guided
//! candidate filters.

use crate::contour::{Contour, HyperParams};
use crate::detections::BoundingBox;
use crate::geometry::{convex_hull, mean_squared_boundary_distance, polygon_clip_area};
use crate::Ellipse;

/// Number of polygon vertices used when clipping an ellipse against a box.
pub const PLATE_CLIP_VERTICES: usize = 360;

/// A fitted ellipse with its provenance and residual.
#[derive(Clone, PartialEq, Debug)]
pub struct CandidateEllipse {
    pub ellipse: Ellipse,
    /// Number of contour points the fit came from.
    pub source_contour_size: usize,
    /// Mean squared distance of those points to the fitted boundary.
    pub score: f64,
}

/// Fits one ellipse per contour through its convex hull.
///
/// The hull step discards interior jitter so the fit sees only the outer
/// silhouette. Contours whose hull or fit is degenerate are dropped with a
/// debug log entry.
pub fn fit_candidates(contours: &[Contour]) -> Vec<CandidateEllipse> {
    let mut out = Vec::new();
    for (k, contour) in contours.iter().enumerate() {
        let hull = match convex_hull(&contour.points) {
            Ok(h) => h,
            Err(e) => {
                log::debug!("contour {k} dropped: hull failed: {e}");
                continue;
            }
        };
        let ellipse = match crate::geometry::fit_ellipse_dls(hull.vertices()) {
            Ok(e) => e,
            Err(e) => {
                log::debug!("contour {k} dropped: fit failed: {e}");
                continue;
            }
        };
        let score = mean_squared_boundary_distance(&ellipse, &contour.points);
        out.push(CandidateEllipse { ellipse, source_contour_size: contour.len(), score });
    }
    out
}

/// Removes candidates that stick too far out of their nearest plate box.
///
/// For each candidate the nearest plate or bowl box by center distance is
/// chosen; the candidate is removed when the fraction of its area outside
/// that box reaches `a_p`. The fraction comes from clipping a 360-gon
/// approximation of the ellipse against the box. With no plate boxes the
/// candidates pass unchanged.
pub fn filter_by_plate_box(
    cands: &[CandidateEllipse],
    plates: &[BoundingBox],
    hp: &HyperParams,
) -> Vec<CandidateEllipse> {
    if plates.is_empty() {
        return cands.to_vec();
    }
    cands
        .iter()
        .filter(|cand| {
            let center = cand.ellipse.center();
            let nearest = plates
                .iter()
                .min_by(|p, q| {
                    p.center()
                        .distance_sq(center)
                        .partial_cmp(&q.center().distance_sq(center))
                        .expect("box centers are finite")
                })
                .expect("plates is non-empty");
            let polygon = cand.ellipse.to_polygon(PLATE_CLIP_VERTICES);
            let total = polygon.area();
            let inside = polygon_clip_area(&polygon, &nearest.rect());
            let outside_fraction = 1.0 - inside / total;
            outside_fraction < hp.a_p
        })
        .cloned()
        .collect()
}

/// Removes candidates whose center is far from every food box center.
///
/// The distance to the closest food box center must stay under `d_f`
/// (compared squared when `squared` is set). With no food boxes the
/// candidates pass unchanged.
pub fn filter_by_food_distance(
    cands: &[CandidateEllipse],
    foods: &[BoundingBox],
    hp: &HyperParams,
    squared: bool,
) -> Vec<CandidateEllipse> {
    if foods.is_empty() {
        return cands.to_vec();
    }
    cands
        .iter()
        .filter(|cand| {
            let center = cand.ellipse.center();
            let min_sq = foods
                .iter()
                .map(|f| f.center().distance_sq(center))
                .fold(f64::INFINITY, f64::min);
            let metric = if squared { min_sq } else { min_sq.sqrt() };
            metric < hp.d_f
        })
        .cloned()
        .collect()
}
