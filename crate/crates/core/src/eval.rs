//! Chamfer-distance evaluation of predicted ellipses against ground truth.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Ellipse, Point};

/// Error from evaluation and ground-truth loading.
#[derive(Debug)]
pub enum EvalError {
    /// A chamfer operand had no points.
    EmptySet,
    Io(std::io::Error),
    Parse(serde_json::Error),
    /// The file parsed but violated the ground-truth schema.
    Schema(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptySet => write!(f, "chamfer distance needs non-empty point sets"),
            EvalError::Io(e) => write!(f, "ground truth I/O error: {e}"),
            EvalError::Parse(e) => write!(f, "ground truth JSON error: {e}"),
            EvalError::Schema(msg) => write!(f, "ground truth schema violation: {msg}"),
        }
    }
}

impl std::error::Error for EvalError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            EvalError::Io(e) => Some(e),
            EvalError::Parse(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Io(e)
    }
}

impl From<serde_json::Error> for EvalError {
    fn from(e: serde_json::Error) -> Self {
        EvalError::Parse(e)
    }
}

/// Annotated rim ellipses for one image.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: String,
    pub ellipses: Vec<Ellipse>,
}

/// Matching protocol: `A` scores each ground-truth ellipse against its
/// nearest prediction (recall-flavored); `B` scores each prediction against
/// its nearest ground-truth ellipse (precision-flavored).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Method {
    A,
    B,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::A => write!(f, "A"),
            Method::B => write!(f, "B"),
        }
    }
}

/// Chamfer values for one image.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ImageValues {
    pub image_id: String,
    pub values: Vec<f64>,
}

/// Aggregated evaluation statistics.
///
/// `mu` and `sigma` summarize the flattened per-ellipse values;
/// `per_image_mean` averages the per-image means instead, as a secondary
/// view. All three are `None` when no image contributed a value.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub n_images: usize,
    pub per_image_mean: Option<f64>,
    pub per_image: Vec<ImageValues>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method {}", self.method)?;
        match (self.mu, self.sigma) {
            (Some(mu), Some(sigma)) => writeln!(f, "mu {mu:.4} px, sigma {sigma:.4} px")?,
            _ => writeln!(f, "mu undefined, sigma undefined")?,
        }
        writeln!(f, "images with values: {}", self.n_images)?;
        if let Some(pim) = self.per_image_mean {
            writeln!(f, "mean of per-image means: {pim:.4} px")?;
        }
        for row in &self.per_image {
            let vals: Vec<String> = row.values.iter().map(|v| format!("{v:.4}")).collect();
            writeln!(f, "  {}: [{}]", row.image_id, vals.join(", "))?;
        }
        Ok(())
    }
}

/// Symmetric chamfer distance between two point sets.
///
/// Each point contributes its distance to the nearest point of the other
/// set. With `normalized` the two directional terms are means, otherwise
/// plain sums; both variants average the two directions.
pub fn chamfer(a: &[Point], b: &[Point], normalized: bool) -> Result<f64, EvalError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvalError::EmptySet);
    }
    let directed_sum = |from: &[Point], to: &[Point]| -> f64 {
        from.iter()
            .map(|p| to.iter().map(|q| p.distance_sq(*q)).fold(f64::INFINITY, f64::min).sqrt())
            .sum()
    };
    let (sa, sb) = (directed_sum(a, b), directed_sum(b, a));
    if normalized {
        Ok(0.5 * (sa / a.len() as f64 + sb / b.len() as f64))
    } else {
        Ok(0.5 * (sa + sb))
    }
}

fn perimeter(e: &Ellipse, n_samples: usize) -> Vec<Point> {
    e.sample_points(n_samples)
}

/// One chamfer value per ground-truth ellipse: its distance to the nearest
/// prediction's perimeter. No predictions means no values.
pub fn eval_method_a(
    gt: &GroundTruth,
    preds: &[Ellipse],
    n_samples: usize,
    normalized: bool,
) -> Vec<f64> {
    debug_assert!(n_samples >= 3);
    if preds.is_empty() {
        return Vec::new();
    }
    let pred_pts: Vec<Vec<Point>> = preds.iter().map(|e| perimeter(e, n_samples)).collect();
    gt.ellipses
        .iter()
        .map(|g| {
            let gp = perimeter(g, n_samples);
            pred_pts
                .iter()
                .map(|pp| chamfer(&gp, pp, normalized).expect("perimeters are non-empty"))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// One chamfer value per prediction: its distance to the nearest
/// ground-truth ellipse's perimeter. No ground truth means no values.
pub fn eval_method_b(
    gt: &GroundTruth,
    preds: &[Ellipse],
    n_samples: usize,
    normalized: bool,
) -> Vec<f64> {
    debug_assert!(n_samples >= 3);
    if gt.ellipses.is_empty() {
        return Vec::new();
    }
    let gt_pts: Vec<Vec<Point>> = gt.ellipses.iter().map(|e| perimeter(e, n_samples)).collect();
    preds
        .iter()
        .map(|p| {
            let pp = perimeter(p, n_samples);
            gt_pts
                .iter()
                .map(|gp| chamfer(&pp, gp, normalized).expect("perimeters are non-empty"))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Folds per-image chamfer values into one report.
///
/// `mu` and `sigma` are the mean and population standard deviation of all
/// values pooled together; `n_images` counts the images that contributed at
/// least one value.
pub fn aggregate(method: Method, values: &BTreeMap<String, Vec<f64>>) -> EvalReport {
    let all: Vec<f64> = values.values().flatten().copied().collect();
    let n_images = values.values().filter(|v| !v.is_empty()).count();

    let (mu, sigma) = if all.is_empty() {
        (None, None)
    } else {
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let var = all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / all.len() as f64;
        (Some(mean), Some(var.sqrt()))
    };

    let per_image_mean = if n_images == 0 {
        None
    } else {
        let sum: f64 = values
            .values()
            .filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
            .sum();
        Some(sum / n_images as f64)
    };

    let per_image = values
        .iter()
        .map(|(id, vals)| ImageValues { image_id: id.clone(), values: vals.clone() })
        .collect();

    EvalReport { method, mu, sigma, n_images, per_image_mean, per_image }
}

/// Loads a ground-truth annotation file: a JSON list of
/// `{image_id, ellipses: [{cx, cy, a, b, theta_radians}]}` entries.
pub fn load_ground_truth(path: &Path) -> Result<Vec<GroundTruth>, EvalError> {
    let text = std::fs::read_to_string(path)?;
    parse_ground_truth(&text)
}

/// Parses and validates ground-truth JSON text.
pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruth>, EvalError> {
    let raw: Vec<GroundTruth> = serde_json::from_str(text)?;
    for gt in &raw {
        if gt.ellipses.is_empty() {
            return Err(EvalError::Schema(format!(
                "image {} has no ground truth ellipses",
                gt.image_id
            )));
        }
        validate_entry_ellipses(gt)?;
    }
    Ok(raw)
}

/// Loads a prediction file. Same format as ground truth, but an image may
/// carry zero ellipses (the pipeline found nothing there).
pub fn load_predictions(path: &Path) -> Result<Vec<GroundTruth>, EvalError> {
    let text = std::fs::read_to_string(path)?;
    parse_predictions(&text)
}

/// Parses prediction JSON text, validating the ellipses that are present.
pub fn parse_predictions(text: &str) -> Result<Vec<GroundTruth>, EvalError> {
    let raw: Vec<GroundTruth> = serde_json::from_str(text)?;
    for entry in &raw {
        validate_entry_ellipses(entry)?;
    }
    Ok(raw)
}

fn validate_entry_ellipses(entry: &GroundTruth) -> Result<(), EvalError> {
    for e in &entry.ellipses {
        Ellipse::new(e.cx, e.cy, e.a, e.b, e.theta)
            .map_err(|err| EvalError::Schema(format!("image {}: {err}", entry.image_id)))?;
    }
    Ok(())
}
