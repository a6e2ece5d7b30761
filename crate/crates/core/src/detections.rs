//! Object-detection boxes: loading, IoU, and food-box merging.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Rect;
use crate::Point;

/// Detection class.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Plate,
    Bowl,
    Food,
}

impl Label {
    fn parse(s: &str) -> Option<Label> {
        match s {
            "plate" => Some(Label::Plate),
            "bowl" => Some(Label::Bowl),
            "food" => Some(Label::Food),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Label::Plate => "plate",
            Label::Bowl => "bowl",
            Label::Food => "food",
        }
    }
}

/// Axis-aligned detection box with class label and confidence.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct BoundingBox {
    pub label: Label,
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub score: f64,
}

impl BoundingBox {
    /// Builds a box, enforcing ordered corners and a score in `[0, 1]`.
    pub fn new(
        label: Label,
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        score: f64,
    ) -> Result<Self, DetectionError> {
        let finite = [x_min, y_min, x_max, y_max, score].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(DetectionError::SchemaViolation(format!(
                "inverted or non-finite box [{x_min}, {y_min}, {x_max}, {y_max}]"
            )));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(DetectionError::SchemaViolation(format!("score {score} outside [0, 1]")));
        }
        Ok(BoundingBox { label, x_min, y_min, x_max, y_max, score })
    }

    pub fn rect(&self) -> Rect<f64> {
        Rect::new(self.x_min, self.y_min, self.x_max, self.y_max)
    }

    pub fn center(&self) -> Point {
        self.rect().center()
    }

    pub fn area(&self) -> f64 {
        self.rect().area()
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.rect().contains(p)
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }
}

/// Detections for one image, split by class.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct SceneDetections {
    pub image_id: String,
    /// Plate and bowl boxes.
    pub plates: Vec<BoundingBox>,
    /// Food boxes.
    pub foods: Vec<BoundingBox>,
}

impl SceneDetections {
    /// Assembles a scene from an unpartitioned box list.
    pub fn new(image_id: impl Into<String>, boxes: Vec<BoundingBox>) -> Self {
        let mut plates = Vec::new();
        let mut foods = Vec::new();
        for b in boxes {
            match b.label {
                Label::Food => foods.push(b),
                Label::Plate | Label::Bowl => plates.push(b),
            }
        }
        SceneDetections { image_id: image_id.into(), plates, foods }
    }
}

/// Error from loading or validating detections.
#[derive(Debug)]
pub enum DetectionError {
    Io(std::io::Error),
    Parse(serde_json::Error),
    SchemaViolation(String),
}

impl fmt::Display for DetectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectionError::Io(e) => write!(f, "detection file unreadable: {e}"),
            DetectionError::Parse(e) => write!(f, "detection file does not parse: {e}"),
            DetectionError::SchemaViolation(what) => write!(f, "detection schema violation: {what}"),
        }
    }
}

impl std::error::Error for DetectionError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            DetectionError::Io(e) => Some(e),
            DetectionError::Parse(e) => Some(e),
            DetectionError::SchemaViolation(_) => None,
        }
    }
}

/// On-disk shape of a detection file.
#[derive(Serialize, Deserialize)]
struct DetectionFile {
    image_id: String,
    detections: Vec<DetectionRecord>,
}

#[derive(Serialize, Deserialize)]
struct DetectionRecord {
    label: String,
    score: f64,
    #[serde(rename = "box")]
    rect: [f64; 4],
}

/// Loads a detection file, dropping boxes with confidence below `floor`.
pub fn load_detections(path: &Path, floor: f64) -> Result<SceneDetections, DetectionError> {
    let text = fs::read_to_string(path).map_err(DetectionError::Io)?;
    parse_detections(&text, floor)
}

/// Parses detection-file text, dropping boxes with confidence below `floor`.
pub fn parse_detections(text: &str, floor: f64) -> Result<SceneDetections, DetectionError> {
    let file: DetectionFile = serde_json::from_str(text).map_err(DetectionError::Parse)?;
    let mut boxes = Vec::with_capacity(file.detections.len());
    for rec in &file.detections {
        let label = Label::parse(&rec.label).ok_or_else(|| {
            DetectionError::SchemaViolation(format!("unknown label {:?}", rec.label))
        })?;
        let [x_min, y_min, x_max, y_max] = rec.rect;
        let bbox = BoundingBox::new(label, x_min, y_min, x_max, y_max, rec.score)?;
        if bbox.score >= floor {
            boxes.push(bbox);
        }
    }
    Ok(SceneDetections::new(file.image_id, boxes))
}

/// Serializes a scene back into the detection-file format, plates first.
pub fn detections_to_json(scene: &SceneDetections) -> String {
    let records = scene
        .plates
        .iter()
        .chain(scene.foods.iter())
        .map(|b| DetectionRecord {
            label: b.label.as_str().to_owned(),
            score: b.score,
            rect: [b.x_min, b.y_min, b.x_max, b.y_max],
        })
        .collect();
    let file = DetectionFile { image_id: scene.image_id.clone(), detections: records };
    serde_json::to_string_pretty(&file).expect("detection file serializes")
}

/// Intersection-over-union of two boxes, in `[0, 1]`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = match a.rect().intersection(&b.rect()) {
        Some(r) => r.area(),
        None => return 0.0,
    };
    inter / (a.area() + b.area() - inter)
}

/// Merges food boxes that belong to the same dish.
///
/// Two food boxes qualify for merging when they sit in the same plate or bowl
/// box, or when their IoU reaches `g_m`. Qualification is grouped
/// transitively: every box connected to another through a chain of qualifying
/// pairs collapses into one tight union rectangle carrying the largest
/// constituent score. Rounds repeat until no pair of the merged boxes
/// qualifies, so the result is a fixed point and a second application changes
/// nothing. "In the same plate box" means both centers inside it; with
/// `strict_containment`, both boxes entirely inside it. Plates pass through
/// unchanged; the resulting food list is sorted by `(x_min, y_min)`.
pub fn merge_food_boxes(
    scene: &SceneDetections,
    g_m: f64,
    strict_containment: bool,
) -> SceneDetections {
    let mergeable = |a: &BoundingBox, b: &BoundingBox| {
        if iou(a, b) >= g_m {
            return true;
        }
        scene.plates.iter().any(|p| {
            if strict_containment {
                p.contains_box(a) && p.contains_box(b)
            } else {
                p.contains_point(a.center()) && p.contains_point(b.center())
            }
        })
    };

    let mut foods = scene.foods.clone();
    loop {
        let n = foods.len();
        let mut grouped = vec![false; n];
        let mut next = Vec::with_capacity(n);
        for start in 0..n {
            if grouped[start] {
                continue;
            }
            grouped[start] = true;
            let mut merged = foods[start];
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if !grouped[j] && mergeable(&foods[i], &foods[j]) {
                        grouped[j] = true;
                        merged = union_box(&merged, &foods[j]);
                        stack.push(j);
                    }
                }
            }
            next.push(merged);
        }
        let done = next.len() == n;
        foods = next;
        if done {
            break;
        }
    }
    sort_boxes(&mut foods);

    SceneDetections { image_id: scene.image_id.clone(), plates: scene.plates.clone(), foods }
}

fn union_box(a: &BoundingBox, b: &BoundingBox) -> BoundingBox {
    BoundingBox {
        label: Label::Food,
        x_min: a.x_min.min(b.x_min),
        y_min: a.y_min.min(b.y_min),
        x_max: a.x_max.max(b.x_max),
        y_max: a.y_max.max(b.y_max),
        score: a.score.max(b.score),
    }
}

fn sort_boxes(boxes: &mut [BoundingBox]) {
    boxes.sort_by(|a, b| {
        (a.x_min, a.y_min, a.x_max, a.y_max)
            .partial_cmp(&(b.x_min, b.y_min, b.x_max, b.y_max))
            .expect("finite box coordinates")
    });
}
