//! Rim ellipse estimation for plates and bowls.
//!
//! The pipeline goes from an RGB photograph plus a set of object-detection
//! boxes to a list of ellipses tracing the visible rims:
//!
//! 1. grayscale conversion and Canny edge detection ([`edge`]),
//! 2. edge-pixel tracing into ordered contours ([`edge::trace_contours`]),
//! 3. curvature gating, straight-segment rejection, rim disambiguation and
//!    contour grouping ([`contour`]),
//! 4. convex-hull conditioning and direct least-squares ellipse fits
//!    ([`geometry`], [`filtering`]),
//! 5. semantic filtering against plate and food boxes ([`filtering`]).
//!
//! [`eval`] scores predictions against ground truth with Chamfer distances,
//! and [`synth`] renders deterministic synthetic scenes with exact ground
//! truth for end-to-end checks.
//!
//! Geometry and image kernels are generic over the scalar type through
//! [`scalar::Real`]; the aliases below pin the `f64` instantiations that the
//! pipeline modules work with.

pub mod config;
pub mod contour;
pub mod detections;
pub mod edge;
pub mod eval;
pub mod filtering;
pub mod geometry;
pub mod pipeline;
pub mod scalar;
pub mod synth;

pub use scalar::Real;

/// `f64` point used by the pipeline stages.
pub type Point = geometry::Point2<f64>;
/// `f64` ellipse used by the pipeline stages.
pub type Ellipse = geometry::Ellipse<f64>;
/// `f64` polygon used by the pipeline stages.
pub type Polygon = geometry::Polygon<f64>;
/// `f64` axis-aligned rectangle used by the pipeline stages.
pub type Rect = geometry::Rect<f64>;
/// `f64` grayscale raster used by the pipeline stages.
pub type GrayImage = edge::GrayImage<f64>;
