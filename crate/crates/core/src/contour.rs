//! Contour refinement: curvature gating, straightness rejection, rim
//! disambiguation, and grouping of co-elliptical fragments.

use std::fmt;

use crate::detections::{BoundingBox, Label};
use crate::edge::RawContour;
use crate::geometry::{fit_ellipse_dls, mean_squared_boundary_distance};
use crate::Point;

/// Error from contour operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineError {
    /// A sequence index fell outside the contour.
    IndexOutOfRange { index: usize, len: usize },
    /// The food box's bottom edge is at or below the plate box's bottom
    /// edge, so there is no rim band to filter in.
    NoGap,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for contour of length {len}")
            }
            PipelineError::NoGap => {
                write!(f, "no vertical gap between food box bottom and plate box bottom")
            }
        }
    }
}

impl std::error::Error for PipelineError {}

/// Ordered pixel contour with real-valued (but integer-positioned) points.
#[derive(Clone, PartialEq, Debug)]
pub struct Contour {
    pub points: Vec<Point>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `y` of the lowest point in image orientation (largest `y` value).
    pub fn lowest_y(&self) -> f64 {
        self.points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Tunable thresholds of the contour-to-ellipse pipeline.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct HyperParams {
    /// IoU at or above which two food boxes merge.
    pub g_m: f64,
    /// Index step between the paired points of a tangent sample.
    pub s: usize,
    /// Largest L1 change between consecutive tangent samples that still
    /// counts as smooth.
    pub epsilon: f64,
    /// Minimum points a contour must keep to survive extraction.
    pub l_min: usize,
    /// Chord deviation (px) below which a contour counts as straight.
    pub d_chord: f64,
    /// Largest allowed spread (px) of rim-band distances.
    pub h_gap: f64,
    /// Mean squared residual (px^2) below which two contours merge.
    pub m_score: f64,
    /// Fraction of ellipse area allowed outside its plate box.
    pub a_p: f64,
    /// Largest allowed distance (px) from ellipse center to food box center.
    pub d_f: f64,
}

impl HyperParams {
    /// Parameter set A, the defaults: tuned toward recall.
    pub fn set_a() -> Self {
        HyperParams {
            g_m: 0.6,
            s: 8,
            epsilon: 2.0,
            l_min: 60,
            d_chord: 7.0,
            h_gap: 10.0,
            m_score: 150.0,
            a_p: 0.08,
            d_f: 450.0,
        }
    }

    /// Parameter set B: tuned toward precision.
    pub fn set_b() -> Self {
        HyperParams {
            g_m: 0.7,
            s: 7,
            epsilon: 2.0,
            l_min: 60,
            d_chord: 7.5,
            h_gap: 10.0,
            m_score: 125.0,
            a_p: 0.06,
            d_f: 450.0,
        }
    }

    /// Checks the value ranges; returns the first violation.
    pub fn validate(&self) -> Result<(), String> {
        let positive: [(&str, f64); 6] = [
            ("g_m", self.g_m),
            ("epsilon", self.epsilon),
            ("d_chord", self.d_chord),
            ("h_gap", self.h_gap),
            ("m_score", self.m_score),
            ("d_f", self.d_f),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.s < 1 {
            return Err("s must be at least 1".into());
        }
        if self.l_min < 1 {
            return Err("l_min must be at least 1".into());
        }
        if !(self.a_p > 0.0 && self.a_p < 1.0) {
            return Err(format!("a_p must lie in (0, 1), got {}", self.a_p));
        }
        Ok(())
    }
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams::set_a()
    }
}

/// A food box paired with its nearest plate or bowl box.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct RimContext {
    pub food_box: BoundingBox,
    pub plate_box: BoundingBox,
}

impl RimContext {
    pub fn new(food_box: BoundingBox, plate_box: BoundingBox) -> Self {
        debug_assert_eq!(food_box.label, Label::Food);
        debug_assert_ne!(plate_box.label, Label::Food);
        RimContext { food_box, plate_box }
    }

    /// Pairs a food box with the plate box whose center is closest to its
    /// own; `None` when there are no plates.
    pub fn nearest(food_box: BoundingBox, plates: &[BoundingBox]) -> Option<RimContext> {
        let fc = food_box.center();
        let mut best: Option<(f64, &BoundingBox)> = None;
        for p in plates {
            let d = p.center().distance(fc);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, p));
            }
        }
        best.map(|(_, p)| RimContext::new(food_box, *p))
    }
}

/// Difference vector between the contour points `s` steps apart, starting
/// at index `u`.
pub fn step_vector(p: &RawContour, u: usize, s: usize) -> Result<Point, PipelineError> {
    let len = p.points.len();
    if u + s >= len {
        return Err(PipelineError::IndexOutOfRange { index: u + s, len });
    }
    let a = p.points[u];
    let b = p.points[u + s];
    Ok(Point::new((b.x - a.x) as f64, (b.y - a.y) as f64))
}

/// Extracts the smoothly curving stretches of a raw contour.
///
/// Slides a window along the sequence comparing the tangent sample at `u`
/// with the one at `u + s` by L1 distance. While the change stays within
/// `epsilon` the stretch `[u + s, u + 2s]` extends the current candidate;
/// a rougher window closes the candidate, which is kept only at `l_min`
/// points or more. Output contours are contiguous index ranges of the
/// input, so they inherit its ordering, adjacency, and uniqueness.
pub fn extract_curved(p: &RawContour, hp: &HyperParams) -> Vec<Contour> {
    let pts = &p.points;
    let s = hp.s;
    let mut out = Vec::new();
    if pts.len() < 2 * s + 1 {
        return out;
    }

    let diff = |u: usize| (pts[u + s].x - pts[u].x, pts[u + s].y - pts[u].y);
    let mut current: Option<(usize, usize)> = None;
    let close = |current: &mut Option<(usize, usize)>, out: &mut Vec<Contour>| {
        if let Some((start, end)) = current.take() {
            if end - start + 1 >= hp.l_min {
                let points = pts[start..=end].iter().map(|px| px.as_point()).collect();
                out.push(Contour { points });
            }
        }
    };

    for u in 0..pts.len() - 2 * s {
        let (dx1, dy1) = diff(u);
        let (dx2, dy2) = diff(u + s);
        let a = ((dx1 - dx2).abs() + (dy1 - dy2).abs()) as f64;
        if a <= hp.epsilon {
            current = Some(match current {
                None => (u + s, u + 2 * s),
                Some((start, _)) => (start, u + 2 * s),
            });
        } else {
            close(&mut current, &mut out);
        }
    }
    close(&mut current, &mut out);
    out
}

/// Drops contours that are close to straight: maximum point distance to the
/// line through the first and last points under `d_chord`. With `squared`,
/// the threshold applies to the squared deviation instead.
pub fn filter_straight(contours: &[Contour], hp: &HyperParams, squared: bool) -> Vec<Contour> {
    contours
        .iter()
        .filter(|c| {
            let dev = max_chord_deviation(c);
            let metric = if squared { dev * dev } else { dev };
            metric >= hp.d_chord
        })
        .cloned()
        .collect()
}

/// Largest perpendicular distance from any contour point to the infinite
/// line through its endpoints. Zero for degenerate contours.
fn max_chord_deviation(c: &Contour) -> f64 {
    let (Some(&first), Some(&last)) = (c.points.first(), c.points.last()) else {
        return 0.0;
    };
    let chord = last - first;
    let len = chord.norm();
    if len == 0.0 {
        return 0.0;
    }
    c.points.iter().map(|&p| (chord.cross(p - first) / len).abs()).fold(0.0, f64::max)
}

/// Rejects spurious lower-rim contours within one food/plate context.
///
/// A contour is "in the band" when its lowest point lies between the food
/// box's bottom edge and the plate box's bottom edge. For those contours
/// the distance from the food box bottom to the lowest point forms a set;
/// while its spread exceeds `h_gap`, the contour deviating most from the
/// set's mean is deleted (with two left, the one with the larger distance;
/// ties fall to the larger distance, then to the later contour). Contours
/// outside the band pass through untouched, in input order.
pub fn filter_rim(
    contours: &[Contour],
    ctx: &RimContext,
    hp: &HyperParams,
) -> Result<Vec<Contour>, PipelineError> {
    let food_bottom = ctx.food_box.y_max;
    let plate_bottom = ctx.plate_box.y_max;
    if food_bottom >= plate_bottom {
        return Err(PipelineError::NoGap);
    }

    // (input index, distance) for the contours inside the band.
    let mut band: Vec<(usize, f64)> = contours
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let low = c.lowest_y();
            (low >= food_bottom && low <= plate_bottom).then(|| (i, (food_bottom - low).abs()))
        })
        .collect();

    let mut removed = vec![false; contours.len()];
    while band.len() >= 2 {
        let spread = band.iter().map(|&(_, d)| d).fold(f64::NEG_INFINITY, f64::max)
            - band.iter().map(|&(_, d)| d).fold(f64::INFINITY, f64::min);
        if spread <= hp.h_gap {
            break;
        }
        let victim = if band.len() == 2 {
            // With only two left, the larger distance is the outlier.
            if band[1].1 >= band[0].1 {
                1
            } else {
                0
            }
        } else {
            let mean = band.iter().map(|&(_, d)| d).sum::<f64>() / band.len() as f64;
            let mut best = 0;
            for k in 1..band.len() {
                let (dev, dev_best) = ((band[k].1 - mean).abs(), (band[best].1 - mean).abs());
                if dev > dev_best || (dev == dev_best && band[k].1 >= band[best].1) {
                    best = k;
                }
            }
            best
        };
        removed[band[victim].0] = true;
        band.remove(victim);
    }

    Ok(contours
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed[*i])
        .map(|(_, c)| c.clone())
        .collect())
}

/// Merges contour pairs that fit one ellipse well.
///
/// Repeatedly fits an ellipse to each pair's pooled points and computes the
/// mean squared distance of the pooled points to the fitted boundary; the
/// best-scoring pair under `m_score` is merged (concatenated) and scoring
/// starts over, until no pair qualifies. Pairs whose pooled fit is
/// degenerate are skipped. Best-first merging keeps the result independent
/// of input order whenever scores are well separated from the threshold.
pub fn group_contours(contours: &[Contour], hp: &HyperParams) -> Vec<Contour> {
    let mut set: Vec<Contour> = contours.to_vec();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                let pooled: Vec<Point> =
                    set[i].points.iter().chain(set[j].points.iter()).copied().collect();
                let Ok(ellipse) = fit_ellipse_dls(&pooled) else { continue };
                let score = mean_squared_boundary_distance(&ellipse, &pooled);
                if score < hp.m_score && best.map_or(true, |(b, _, _)| score < b) {
                    best = Some((score, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let absorbed = set.remove(j);
        set[i].points.extend(absorbed.points);
    }
    set
}
