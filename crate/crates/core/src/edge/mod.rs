//! Grayscale rasters, Canny edge detection, and edge-pixel tracing.

use std::fmt;

use image::RgbImage;

use crate::geometry::Point2;
use crate::scalar::Real;

mod canny;
mod trace;

pub use canny::{canny, canny_auto};
pub use trace::trace_contours;

/// Error from edge detection.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeError {
    /// The image has no pixels.
    EmptyImage,
    /// Thresholds are out of order or out of range.
    InvalidThresholds { low: f64, high: f64 },
}

impl fmt::Display for EdgeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeError::EmptyImage => write!(f, "image has no pixels"),
            EdgeError::InvalidThresholds { low, high } => {
                write!(f, "invalid thresholds: low {low}, high {high}")
            }
        }
    }
}

impl std::error::Error for EdgeError {}

/// Single-channel raster with values in `[0, 1]`, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct GrayImage<R> {
    width: usize,
    height: usize,
    data: Vec<R>,
}

impl<R: Real> GrayImage<R> {
    /// Wraps row-major pixel data. The length must be `width * height`.
    pub fn new(width: usize, height: usize, data: Vec<R>) -> Result<Self, EdgeError> {
        if width == 0 || height == 0 {
            return Err(EdgeError::EmptyImage);
        }
        assert_eq!(data.len(), width * height, "pixel count mismatch");
        Ok(GrayImage { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> R) -> Self {
        let data = (0..width * height).map(|i| f(i % width, i / width)).collect();
        GrayImage { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: R) -> Self {
        GrayImage { width, height, data: vec![value; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> R {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: R) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel value with out-of-range indices mirrored back inside.
    pub fn get_mirrored(&self, x: i64, y: i64) -> R {
        self.get(mirror(x, self.width), mirror(y, self.height))
    }

    pub fn pixels(&self) -> &[R] {
        &self.data
    }
}

/// Reflects an index into `[0, n)`, repeating the border pixel
/// (`-1` maps to `0`, `n` maps to `n - 1`).
fn mirror(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - 1 - i;
    }
    i as usize
}

/// Converts an RGB image to grayscale in `[0, 1]` with the usual luma
/// weights 0.299, 0.587, 0.114.
pub fn to_gray<R: Real>(rgb: &RgbImage) -> Result<GrayImage<R>, EdgeError> {
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if w == 0 || h == 0 {
        return Err(EdgeError::EmptyImage);
    }
    let mut data = Vec::with_capacity(w * h);
    for p in rgb.pixels() {
        let [r, g, b] = p.0;
        let luma = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
        data.push(R::from_f64_lossy(luma / 255.0));
    }
    GrayImage::new(w, h, data)
}

/// Integer pixel coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct PixelPoint {
    pub x: i32,
    pub y: i32,
}

impl PixelPoint {
    pub fn new(x: i32, y: i32) -> Self {
        PixelPoint { x, y }
    }

    pub fn as_point<R: Real>(self) -> Point2<R> {
        Point2::new(R::from_i32(self.x).unwrap(), R::from_i32(self.y).unwrap())
    }
}

/// Binary edge mask, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: usize, height: usize) -> Self {
        EdgeMap { width, height, data: vec![false; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    /// True when `(x, y)` is inside the image and marked as an edge.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Edge pixels in row-major order.
    pub fn edge_pixels(&self) -> Vec<PixelPoint> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push(PixelPoint::new(x as i32, y as i32));
                }
            }
        }
        out
    }
}

/// Ordered run of adjacent edge pixels produced by tracing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RawContour {
    pub points: Vec<PixelPoint>,
}

impl RawContour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
