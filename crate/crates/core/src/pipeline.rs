//! End-to-end rim detection, from raster to filtered ellipse candidates.

use image::RgbImage;

use crate::config::Config;
use crate::contour::{self, Contour, RimContext};
use crate::detections::{merge_food_boxes, SceneDetections};
use crate::edge::{canny_auto, to_gray, trace_contours, EdgeError};
use crate::filtering::{self, CandidateEllipse};

/// Runs every stage in order: food-box merging, edge detection, tracing,
/// curvature extraction, straightness filtering, per-dish rim filtering,
/// grouping, hull fitting, and the two detection-guided candidate filters.
///
/// Without detections the pipeline degrades to pure geometric fitting: no
/// rim filtering and no candidate filtering. A dish whose food box leaves
/// no vertical gap under its plate box skips rim filtering for that dish.
pub fn run_pipeline(
    image: &RgbImage,
    detections: Option<&SceneDetections>,
    config: &Config,
) -> Result<Vec<CandidateEllipse>, EdgeError> {
    let hp = &config.hp;

    let (plates, foods) = match detections {
        Some(scene) => {
            let merged = merge_food_boxes(scene, hp.g_m, config.strict_containment);
            (merged.plates, merged.foods)
        }
        None => (Vec::new(), Vec::new()),
    };

    let gray = to_gray::<f64>(image)?;
    let edges = canny_auto(
        &gray,
        config.canny_sigma,
        config.canny_low_quantile,
        config.canny_high_quantile,
    )?;
    let raw = trace_contours(&edges);

    let mut contours: Vec<Contour> =
        raw.iter().flat_map(|p| contour::extract_curved(p, hp)).collect();
    contours = contour::filter_straight(&contours, hp, config.squared_chord);

    for food in &foods {
        let Some(ctx) = RimContext::nearest(*food, &plates) else { break };
        match contour::filter_rim(&contours, &ctx, hp) {
            Ok(kept) => contours = kept,
            Err(e) => log::debug!("rim filter skipped for a dish: {e}"),
        }
    }

    let grouped = contour::group_contours(&contours, hp);
    let cands = filtering::fit_candidates(&grouped);
    let cands = filtering::filter_by_plate_box(&cands, &plates, hp);
    Ok(filtering::filter_by_food_distance(
        &cands,
        &foods,
        hp,
        config.squared_food_distance,
    ))
}
