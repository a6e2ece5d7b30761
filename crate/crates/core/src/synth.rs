//! Deterministic synthetic table scenes: known rim ellipses, jagged food
//! clutter, and analytically derived detection boxes and ground truth.

use std::fmt;
use std::path::Path;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detections::{BoundingBox, Label, SceneDetections};
use crate::eval::GroundTruth;
use crate::{Ellipse, Point, Rect};

/// Vertical offset of the second-rim arc below its rim center.
pub const SECOND_RIM_OFFSET: f64 = 20.0;

const BACKGROUND: f64 = 0.15;
const CLUTTER_VALUE: f64 = 0.05;
const PLATE_SCORE: f64 = 0.95;
const FOOD_SCORE: f64 = 0.9;
const BOX_PAD: f64 = 5.0;
const SUPERSAMPLE: usize = 4;
const STROKE_HALF_WIDTH: f64 = 1.0;
const CLUTTER_HALF_WIDTH: f64 = 0.75;
/// Clutter stays where the rim ellipse's quadratic form is at most this,
/// well clear of the rim stroke.
const CLUTTER_CONFINE: f64 = 0.72;
/// Luminance of the visible outer-wall band under a bowl's rim.
const WALL_VALUE: f64 = 0.5;
/// The wall shows only below this fraction of the arc's vertical
/// half-extent, the way the far side of a bowl peeks out near the bottom.
const SECOND_RIM_SECTOR: f64 = 0.8;

/// Error from scene parsing or generation.
#[derive(Debug)]
pub enum SynthError {
    /// The scene cannot be rendered as specified.
    SpecInfeasible { image_id: String, reason: String },
    Io(std::io::Error),
    Parse(serde_json::Error),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::SpecInfeasible { image_id, reason } => {
                write!(f, "scene {image_id} is infeasible: {reason}")
            }
            SynthError::Io(e) => write!(f, "scene spec I/O error: {e}"),
            SynthError::Parse(e) => write!(f, "scene spec JSON error: {e}"),
        }
    }
}

impl std::error::Error for SynthError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SynthError::Io(e) => Some(e),
            SynthError::Parse(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for SynthError {
    fn from(e: std::io::Error) -> Self {
        SynthError::Io(e)
    }
}

impl From<serde_json::Error> for SynthError {
    fn from(e: serde_json::Error) -> Self {
        SynthError::Parse(e)
    }
}

/// One dish: a rim ellipse plus its rendering luminances.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct EllipseSpec {
    #[serde(flatten)]
    pub ellipse: Ellipse,
    /// Rim stroke luminance in [0, 1].
    pub stroke: f64,
    /// Dish interior luminance in [0, 1].
    pub fill: f64,
}

/// Declarative description of one synthetic scene.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    /// Dishes, painted in order (later entries over earlier ones).
    pub ellipses: Vec<EllipseSpec>,
    /// Number of jagged clutter polylines, dealt round-robin to the dishes
    /// (or into the central image region when there are no dishes).
    pub clutter: usize,
    /// Draw a lower arc under each rim, the way a bowl shows the far side
    /// of its outer wall below the opening.
    pub second_rim: bool,
    pub seed: u64,
}

/// Reads a scene-set file: a JSON list of scene specs.
pub fn load_scene_specs(path: &Path) -> Result<Vec<SceneSpec>, SynthError> {
    let text = std::fs::read_to_string(path)?;
    parse_scene_specs(&text)
}

/// Parses scene-set JSON text.
pub fn parse_scene_specs(text: &str) -> Result<Vec<SceneSpec>, SynthError> {
    Ok(serde_json::from_str(text)?)
}

/// Renders one scene and derives its ground truth and detection sidecars.
///
/// Dishes are painted as anti-aliased filled ellipses with a bright rim
/// stroke; clutter polylines go inside the dishes as a food stand-in; with
/// `second_rim` an arc mimics a bowl's lower outer contour. The plate box
/// is the tight box of the dish geometry (rim plus arc) padded 5 px and is
/// labeled `Bowl` when the arc is present; each dish's food box is the
/// tight box of its clutter. Identical specs produce bit-identical output.
pub fn generate_scene(
    spec: &SceneSpec,
    image_id: &str,
) -> Result<(RgbImage, GroundTruth, SceneDetections), SynthError> {
    let infeasible = |reason: String| SynthError::SpecInfeasible {
        image_id: image_id.to_string(),
        reason,
    };

    if spec.width == 0 || spec.height == 0 {
        return Err(infeasible("empty canvas".into()));
    }
    let canvas = Rect::new(0.0, 0.0, (spec.width - 1) as f64, (spec.height - 1) as f64);

    // Canonicalized rims plus per-dish luminances and feasibility checks.
    let mut rims: Vec<(Ellipse, f64, f64)> = Vec::with_capacity(spec.ellipses.len());
    for (k, es) in spec.ellipses.iter().enumerate() {
        let e = es.ellipse;
        let rim = Ellipse::new(e.cx, e.cy, e.a, e.b, e.theta)
            .map_err(|err| infeasible(format!("ellipse {k}: {err}")))?;
        for (name, v) in [("stroke", es.stroke), ("fill", es.fill)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(infeasible(format!("ellipse {k}: {name} {v} outside [0, 1]")));
            }
        }
        let footprint = dish_footprint(&rim, spec.second_rim);
        let padded = Rect::new(
            footprint.x_min - BOX_PAD,
            footprint.y_min - BOX_PAD,
            footprint.x_max + BOX_PAD,
            footprint.y_max + BOX_PAD,
        );
        if padded.x_min < canvas.x_min
            || padded.y_min < canvas.y_min
            || padded.x_max > canvas.x_max
            || padded.y_max > canvas.y_max
        {
            return Err(infeasible(format!("ellipse {k} exceeds the canvas margin")));
        }
        rims.push((rim, es.stroke, es.fill));
    }

    // Clutter polylines, dealt round-robin to dishes in a fixed order.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut dish_clutter: Vec<Vec<Vec<Point>>> = vec![Vec::new(); rims.len().max(1)];
    for k in 0..spec.clutter {
        let slot = if rims.is_empty() { 0 } else { k % rims.len() };
        let region = if rims.is_empty() {
            Region::Box(central_region(canvas))
        } else {
            Region::Dish(&rims[slot].0)
        };
        dish_clutter[slot].push(clutter_polyline(&mut rng, &region));
    }

    // Detection boxes derived from the analytic geometry.
    let mut boxes: Vec<BoundingBox> = Vec::new();
    let plate_label = if spec.second_rim { Label::Bowl } else { Label::Plate };
    for (rim, _, _) in &rims {
        let fp = dish_footprint(rim, spec.second_rim);
        boxes.push(
            BoundingBox::new(
                plate_label,
                fp.x_min - BOX_PAD,
                fp.y_min - BOX_PAD,
                fp.x_max + BOX_PAD,
                fp.y_max + BOX_PAD,
                PLATE_SCORE,
            )
            .expect("plate box is valid by construction"),
        );
    }
    for polylines in &dish_clutter {
        if let Some(rect) = clutter_tight_box(polylines) {
            boxes.push(
                BoundingBox::new(
                    Label::Food,
                    rect.x_min - (CLUTTER_HALF_WIDTH + 0.25),
                    rect.y_min - (CLUTTER_HALF_WIDTH + 0.25),
                    rect.x_max + (CLUTTER_HALF_WIDTH + 0.25),
                    rect.y_max + (CLUTTER_HALF_WIDTH + 0.25),
                    FOOD_SCORE,
                )
                .expect("food box is valid by construction"),
            );
        }
    }

    // Render: dishes in order (fill, stroke, wall), then clutter on top.
    let mut canvas_buf = SubCanvas::new(spec.width, spec.height);
    for (rim, stroke, fill) in &rims {
        let rect = rim.bounding_rect();
        canvas_buf.paint(pad_rect(rect, 2.0), |p| {
            (rim.implicit_value(p) < 1.0).then_some(*fill)
        });
        canvas_buf.paint(pad_rect(rect, 3.0), |p| {
            (rim.sampson_distance(p).abs() <= STROKE_HALF_WIDTH).then_some(*stroke)
        });
        if spec.second_rim {
            let arc = lower_arc(rim);
            let arc_rect = arc.bounding_rect();
            let top = wall_top(&arc);
            let wall_rect =
                Rect::new(arc_rect.x_min, top, arc_rect.x_max, arc_rect.y_max);
            canvas_buf.paint(pad_rect(wall_rect, 3.0), |p| {
                (p.y >= top
                    && arc.implicit_value(p) < 1.0
                    && rim.implicit_value(p) >= 1.0)
                    .then_some(WALL_VALUE)
            });
        }
    }
    for polylines in &dish_clutter {
        for verts in polylines {
            for seg in verts.windows(2) {
                let rect = Rect::new(
                    seg[0].x.min(seg[1].x),
                    seg[0].y.min(seg[1].y),
                    seg[0].x.max(seg[1].x),
                    seg[0].y.max(seg[1].y),
                );
                canvas_buf.paint(pad_rect(rect, 2.0), |p| {
                    (segment_distance(p, seg[0], seg[1]) <= CLUTTER_HALF_WIDTH)
                        .then_some(CLUTTER_VALUE)
                });
            }
        }
    }

    let image = canvas_buf.downsample();
    let gt = GroundTruth {
        image_id: image_id.to_string(),
        ellipses: rims.iter().map(|(e, _, _)| *e).collect(),
    };
    let detections = SceneDetections::new(image_id.to_string(), boxes);
    Ok((image, gt, detections))
}

/// The arc mimicking a bowl's lower outer contour: the rim's shape shifted
/// down by the fixed offset. The rendered wall band between the rim and this
/// arc is what shows in the image, and only near the arc's bottom.
pub fn lower_arc(rim: &Ellipse) -> Ellipse {
    Ellipse::new(rim.cx, rim.cy + SECOND_RIM_OFFSET, rim.a, rim.b, rim.theta)
        .expect("offsetting a valid ellipse keeps it valid")
}

/// Where the visible wall band starts, in image rows.
fn wall_top(arc: &Ellipse) -> f64 {
    let half_extent = arc.bounding_rect().y_max - arc.cy;
    arc.cy + SECOND_RIM_SECTOR * half_extent
}

/// Tight box of everything a dish paints: the rim, plus the lower arc when
/// second rims are on.
fn dish_footprint(rim: &Ellipse, second_rim: bool) -> Rect {
    let rect = rim.bounding_rect();
    if !second_rim {
        return rect;
    }
    let arc = lower_arc(rim);
    let arc_rect = arc.bounding_rect();
    // Only the wall band below the sector line is painted.
    let arc_rect = Rect::new(
        arc_rect.x_min,
        arc_rect.y_min.max(wall_top(&arc) - 1.0),
        arc_rect.x_max,
        arc_rect.y_max,
    );
    rect.union(&arc_rect)
}

fn pad_rect(r: Rect, pad: f64) -> Rect {
    Rect::new(r.x_min - pad, r.y_min - pad, r.x_max + pad, r.y_max + pad)
}

fn central_region(canvas: Rect) -> Rect {
    let c = canvas.center();
    let (hw, hh) = (canvas.width() / 4.0, canvas.height() / 4.0);
    Rect::new(c.x - hw, c.y - hh, c.x + hw, c.y + hh)
}

fn clutter_tight_box(polylines: &[Vec<Point>]) -> Option<Rect> {
    let mut pts = polylines.iter().flatten();
    let first = pts.next()?;
    let mut rect = Rect::new(first.x, first.y, first.x, first.y);
    for p in pts {
        rect = Rect::new(
            rect.x_min.min(p.x),
            rect.y_min.min(p.y),
            rect.x_max.max(p.x),
            rect.y_max.max(p.y),
        );
    }
    Some(rect)
}

/// Where a clutter polyline may live.
enum Region<'a> {
    /// Deep inside a dish, clear of the rim stroke.
    Dish(&'a Ellipse),
    Box(Rect),
}

impl Region<'_> {
    fn contains(&self, p: Point) -> bool {
        match self {
            Region::Dish(e) => e.implicit_value(p) <= CLUTTER_CONFINE,
            Region::Box(r) => r.contains(p),
        }
    }

    fn center(&self) -> Point {
        match self {
            Region::Dish(e) => e.center(),
            Region::Box(r) => r.center(),
        }
    }

    fn anchor(&self, rng: &mut ChaCha8Rng) -> Point {
        match self {
            Region::Dish(e) => {
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let rho = rng.gen_range(0.0..0.8);
                let boundary = e.point_at(t);
                e.center() + (boundary - e.center()) * rho
            }
            Region::Box(r) => Point::new(
                rng.gen_range(r.x_min..=r.x_max),
                rng.gen_range(r.y_min..=r.y_max),
            ),
        }
    }

    fn fallback_leg(&self) -> f64 {
        let half_extent = match self {
            Region::Dish(e) => e.b * 0.6,
            Region::Box(r) => r.width().min(r.height()) / 2.0,
        };
        (half_extent * 0.25).clamp(2.0, 10.0)
    }
}

/// One jagged polyline inside the region: 3 to 6 segments of 10 to 25 px
/// turning at least 30° at every vertex. Placement retries a bounded
/// number of times; the last resort is a small right-angle zigzag at the
/// region center.
fn clutter_polyline(rng: &mut ChaCha8Rng, region: &Region) -> Vec<Point> {
    for _ in 0..20 {
        let start = region.anchor(rng);
        if !region.contains(start) {
            continue;
        }
        let n_segments = rng.gen_range(3..=6);
        let mut heading = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut verts = vec![start];
        let mut ok = true;
        for i in 0..n_segments {
            if i > 0 {
                let turn = rng.gen_range(std::f64::consts::FRAC_PI_6..=2.0 * std::f64::consts::FRAC_PI_3);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                heading += sign * turn;
            }
            let len = rng.gen_range(10.0..=25.0);
            let next = *verts.last().unwrap() + Point::new(heading.cos(), heading.sin()) * len;
            if !region.contains(next) {
                ok = false;
                break;
            }
            verts.push(next);
        }
        if ok {
            return verts;
        }
    }
    let c = region.center();
    let leg = region.fallback_leg();
    vec![c + Point::new(-leg, 0.0), c, c + Point::new(0.0, leg)]
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len_sq = ab.dot(ab);
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Grayscale canvas at 4x4 subpixel resolution, box-filtered on output.
struct SubCanvas {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl SubCanvas {
    fn new(width: u32, height: u32) -> Self {
        let (w, h) = (width as usize, height as usize);
        SubCanvas {
            width: w,
            height: h,
            data: vec![BACKGROUND; w * SUPERSAMPLE * h * SUPERSAMPLE],
        }
    }

    /// Subpixel center in image coordinates (pixel index = pixel center).
    fn sample_pos(s: usize) -> f64 {
        (s as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5
    }

    /// Applies `shade` to every subpixel inside `rect` (image coordinates);
    /// `Some(v)` overwrites the subpixel.
    fn paint(&mut self, rect: Rect, shade: impl Fn(Point) -> Option<f64>) {
        let sw = self.width * SUPERSAMPLE;
        let sh = self.height * SUPERSAMPLE;
        let to_index = |coord: f64| (coord + 0.5) * SUPERSAMPLE as f64 - 0.5;
        let sx0 = (to_index(rect.x_min).floor() as i64).max(0);
        let sy0 = (to_index(rect.y_min).floor() as i64).max(0);
        let sx1 = (to_index(rect.x_max).ceil() as i64).min(sw as i64 - 1);
        let sy1 = (to_index(rect.y_max).ceil() as i64).min(sh as i64 - 1);
        if sx0 > sx1 || sy0 > sy1 {
            return;
        }
        for sy in sy0 as usize..=sy1 as usize {
            let y = Self::sample_pos(sy);
            for sx in sx0 as usize..=sx1 as usize {
                let p = Point::new(Self::sample_pos(sx), y);
                if let Some(v) = shade(p) {
                    self.data[sy * sw + sx] = v;
                }
            }
        }
    }

    fn downsample(&self) -> RgbImage {
        let sw = self.width * SUPERSAMPLE;
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let (x, y) = (x as usize, y as usize);
            let mut sum = 0.0;
            for dy in 0..SUPERSAMPLE {
                for dx in 0..SUPERSAMPLE {
                    sum += self.data[(y * SUPERSAMPLE + dy) * sw + x * SUPERSAMPLE + dx];
                }
            }
            let v = sum / (SUPERSAMPLE * SUPERSAMPLE) as f64;
            let g = (v * 255.0).round().clamp(0.0, 255.0) as u8;
            Rgb([g, g, g])
        })
    }
}
