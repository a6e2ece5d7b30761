//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression, and double-threshold hysteresis.

use super::{EdgeError, EdgeMap, GrayImage};
use crate::scalar::Real;

/// Canny edge detection with explicit hysteresis thresholds on the gradient
/// magnitude. `low` and `high` must satisfy `0 <= low <= high`.
pub fn canny<R: Real>(
    img: &GrayImage<R>,
    sigma: R,
    low: R,
    high: R,
) -> Result<EdgeMap, EdgeError> {
    if !(low.is_finite() && high.is_finite()) || low < R::zero() || low > high {
        return Err(EdgeError::InvalidThresholds {
            low: low.to_f64_lossy(),
            high: high.to_f64_lossy(),
        });
    }
    let (mag, gx, gy) = gradients(img, sigma);
    let thin = suppress_non_maxima(&mag, &gx, &gy);
    Ok(hysteresis(&thin, low, high))
}

/// Canny edge detection with thresholds taken from quantiles of the nonzero
/// gradient magnitudes. An image with no gradient anywhere (a constant
/// image) yields an empty edge map.
pub fn canny_auto<R: Real>(
    img: &GrayImage<R>,
    sigma: R,
    low_quantile: R,
    high_quantile: R,
) -> Result<EdgeMap, EdgeError> {
    let bad = !(low_quantile.is_finite() && high_quantile.is_finite())
        || low_quantile < R::zero()
        || low_quantile > high_quantile
        || high_quantile > R::one();
    if bad {
        return Err(EdgeError::InvalidThresholds {
            low: low_quantile.to_f64_lossy(),
            high: high_quantile.to_f64_lossy(),
        });
    }

    let (mag, gx, gy) = gradients(img, sigma);
    let mut nonzero: Vec<R> = mag.pixels().iter().copied().filter(|&m| m > R::zero()).collect();
    if nonzero.is_empty() {
        return Ok(EdgeMap::empty(img.width(), img.height()));
    }
    nonzero.sort_by(|a, b| a.partial_cmp(b).expect("magnitudes are finite"));
    let low = quantile(&nonzero, low_quantile);
    let high = quantile(&nonzero, high_quantile);

    let thin = suppress_non_maxima(&mag, &gx, &gy);
    Ok(hysteresis(&thin, low, high))
}

/// Gradient magnitude and the Sobel components it came from.
fn gradients<R: Real>(img: &GrayImage<R>, sigma: R) -> (GrayImage<R>, GrayImage<R>, GrayImage<R>) {
    let smoothed = gaussian_blur(img, sigma);
    let (gx, gy) = sobel(&smoothed);
    let (w, h) = (img.width(), img.height());
    let mut mag = GrayImage::filled(w, h, R::zero());
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (gx.get(x, y), gy.get(x, y));
            mag.set(x, y, (dx * dx + dy * dy).sqrt());
        }
    }
    (mag, gx, gy)
}

/// Separable Gaussian blur with kernel radius `ceil(4 sigma)` and mirrored
/// borders. `sigma <= 0` returns the image unchanged.
fn gaussian_blur<R: Real>(img: &GrayImage<R>, sigma: R) -> GrayImage<R> {
    if sigma <= R::zero() {
        return img.clone();
    }
    let radius = (sigma * R::from_f64_lossy(4.0)).ceil().to_f64_lossy() as i64;
    let two = R::from_f64_lossy(2.0);
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    let mut sum = R::zero();
    for i in -radius..=radius {
        let t = R::from_i64(i).unwrap() / sigma;
        let w = (-(t * t) / two).exp();
        kernel.push(w);
        sum += w;
    }
    for w in &mut kernel {
        *w /= sum;
    }

    let (w, h) = (img.width(), img.height());
    let mut horizontal = GrayImage::filled(w, h, R::zero());
    for y in 0..h {
        for x in 0..w {
            let mut acc = R::zero();
            for (k, &kw) in kernel.iter().enumerate() {
                acc += kw * img.get_mirrored(x as i64 + k as i64 - radius, y as i64);
            }
            horizontal.set(x, y, acc);
        }
    }
    let mut out = GrayImage::filled(w, h, R::zero());
    for y in 0..h {
        for x in 0..w {
            let mut acc = R::zero();
            for (k, &kw) in kernel.iter().enumerate() {
                acc += kw * horizontal.get_mirrored(x as i64, y as i64 + k as i64 - radius);
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Sobel gradient components, with mirrored borders. `y` grows downward.
fn sobel<R: Real>(img: &GrayImage<R>) -> (GrayImage<R>, GrayImage<R>) {
    let (w, h) = (img.width(), img.height());
    let two = R::from_f64_lossy(2.0);
    let mut gx = GrayImage::filled(w, h, R::zero());
    let mut gy = GrayImage::filled(w, h, R::zero());
    for y in 0..h {
        for x in 0..w {
            let (xi, yi) = (x as i64, y as i64);
            let p = |dx: i64, dy: i64| img.get_mirrored(xi + dx, yi + dy);
            // Differences first, so constant regions cancel exactly.
            let dx = (p(1, -1) - p(-1, -1)) + two * (p(1, 0) - p(-1, 0)) + (p(1, 1) - p(-1, 1));
            let dy = (p(-1, 1) - p(-1, -1)) + two * (p(0, 1) - p(0, -1)) + (p(1, 1) - p(1, -1));
            gx.set(x, y, dx);
            gy.set(x, y, dy);
        }
    }
    (gx, gy)
}

/// Keeps only pixels that are local maxima of the magnitude along their
/// quantized gradient direction, zeroing the rest.
///
/// Exact ties along the direction would keep a two-pixel ridge, so the
/// comparison is strict toward the negative side and non-strict toward the
/// positive side: of two equal neighbors exactly one survives.
fn suppress_non_maxima<R: Real>(
    mag: &GrayImage<R>,
    gx: &GrayImage<R>,
    gy: &GrayImage<R>,
) -> GrayImage<R> {
    let (w, h) = (mag.width(), mag.height());
    let mut out = GrayImage::filled(w, h, R::zero());
    for y in 0..h {
        for x in 0..w {
            let m = mag.get(x, y);
            if m <= R::zero() {
                continue;
            }
            let (dx, dy) = direction_sector(gx.get(x, y), gy.get(x, y));
            let neighbor = |sx: i64, sy: i64| -> R {
                let (nx, ny) = (x as i64 + sx, y as i64 + sy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    R::zero()
                } else {
                    mag.get(nx as usize, ny as usize)
                }
            };
            if m > neighbor(-dx, -dy) && m >= neighbor(dx, dy) {
                out.set(x, y, m);
            }
        }
    }
    out
}

/// Quantizes a gradient vector to one of four directions: horizontal,
/// 45 degrees, vertical, or 135 degrees.
fn direction_sector<R: Real>(gx: R, gy: R) -> (i64, i64) {
    let pi = R::from_f64_lossy(std::f64::consts::PI);
    let quarter = R::from_f64_lossy(std::f64::consts::FRAC_PI_4);
    let mut a = gy.atan2(gx);
    if a < R::zero() {
        a += pi;
    }
    let sector = (a / quarter).round().to_f64_lossy() as i64 % 4;
    match sector {
        0 => (1, 0),
        1 => (1, 1),
        2 => (0, 1),
        _ => (-1, 1),
    }
}

/// Double-threshold hysteresis: pixels at or above `high` seed a flood fill
/// that claims 8-connected neighbors at or above `low`.
fn hysteresis<R: Real>(mag: &GrayImage<R>, low: R, high: R) -> EdgeMap {
    let (w, h) = (mag.width(), mag.height());
    let mut edges = EdgeMap::empty(w, h);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let m = mag.get(x, y);
            if m >= high && m > R::zero() && !edges.get(x, y) {
                edges.set(x, y, true);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for sy in -1i64..=1 {
                        for sx in -1i64..=1 {
                            let (nx, ny) = (cx as i64 + sx, cy as i64 + sy);
                            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                                continue;
                            }
                            let (nx, ny) = (nx as usize, ny as usize);
                            let nm = mag.get(nx, ny);
                            if !edges.get(nx, ny) && nm >= low && nm > R::zero() {
                                edges.set(nx, ny, true);
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    edges
}

/// Quantile of an ascending-sorted slice with linear interpolation.
fn quantile<R: Real>(sorted: &[R], q: R) -> R {
    let last = sorted.len() - 1;
    let pos = q * R::from_usize_lossy(last);
    let lo = pos.floor().to_f64_lossy() as usize;
    let hi = pos.ceil().to_f64_lossy() as usize;
    let frac = pos - pos.floor();
    sorted[lo] * (R::one() - frac) + sorted[hi.min(last)] * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn step_image(w: usize, h: usize, split: usize) -> GrayImage<f64> {
        GrayImage::from_fn(w, h, |x, _| if x < split { 0.2 } else { 0.8 })
    }

    #[test]
    fn step_edge_yields_a_single_pixel_line() {
        let img = step_image(40, 40, 20);
        let edges = canny_auto(&img, 2.0, 0.7, 0.9).unwrap();
        // Away from the top and bottom borders, each row crosses the edge
        // exactly once, in the same column every time.
        let mut column = None;
        for y in 5..35 {
            let xs: Vec<usize> = (0..40).filter(|&x| edges.get(x, y)).collect();
            assert_eq!(xs.len(), 1, "row {y} has {xs:?}");
            let x = xs[0];
            assert!(x == 19 || x == 20);
            match column {
                None => column = Some(x),
                Some(c) => assert_eq!(c, x),
            }
        }
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = GrayImage::filled(30, 30, 0.5);
        let edges = canny_auto(&img, 2.5, 0.7, 0.9).unwrap();
        assert_eq!(edges.count(), 0);
    }

    #[test]
    fn disk_produces_a_ring() {
        let (cx, cy, r) = (30.0, 30.0, 15.0);
        let img = GrayImage::from_fn(60, 60, |x, y| {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            if d < r {
                0.9
            } else {
                0.1
            }
        });
        let edges = canny_auto(&img, 2.0, 0.7, 0.9).unwrap();
        let pixels = edges.edge_pixels();
        assert!(pixels.len() > 40, "ring too sparse: {}", pixels.len());
        let near_ring = pixels
            .iter()
            .filter(|p| {
                let d = ((p.x as f64 - cx).powi(2) + (p.y as f64 - cy).powi(2)).sqrt();
                (d - r).abs() <= 3.0
            })
            .count();
        assert!(near_ring as f64 >= 0.95 * pixels.len() as f64);
    }

    #[test]
    fn threshold_validation() {
        let img = GrayImage::filled(8, 8, 0.5);
        assert!(matches!(
            canny(&img, 1.0, 0.9, 0.1),
            Err(EdgeError::InvalidThresholds { .. })
        ));
        assert!(matches!(
            canny(&img, 1.0, -0.1, 0.5),
            Err(EdgeError::InvalidThresholds { .. })
        ));
        assert!(matches!(
            canny_auto(&img, 1.0, 0.9, 0.7),
            Err(EdgeError::InvalidThresholds { .. })
        ));
        assert!(matches!(
            canny_auto(&img, 1.0, 0.7, 1.1),
            Err(EdgeError::InvalidThresholds { .. })
        ));
    }

    #[test]
    fn blur_preserves_constants_and_mass() {
        let flat = GrayImage::filled(20, 20, 0.37);
        let blurred = gaussian_blur(&flat, 2.5);
        for &v in blurred.pixels() {
            assert_relative_eq!(v, 0.37, epsilon = 1e-12);
        }

        let mut impulse = GrayImage::filled(41, 41, 0.0);
        impulse.set(20, 20, 1.0);
        let blurred = gaussian_blur(&impulse, 2.0);
        let total: f64 = blurred.pixels().iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-9);
        // Symmetry around the impulse.
        assert_relative_eq!(blurred.get(18, 20), blurred.get(22, 20), epsilon = 1e-12);
        assert_relative_eq!(blurred.get(20, 17), blurred.get(20, 23), epsilon = 1e-12);
    }

    #[test]
    fn hysteresis_follows_weak_paths_from_strong_seeds() {
        // A weak horizontal path with a single strong pixel at its left end,
        // and an isolated weak path below it.
        let mut mag = GrayImage::filled(12, 7, 0.0);
        mag.set(1, 2, 0.9);
        for x in 2..10 {
            mag.set(x, 2, 0.3);
        }
        for x in 2..10 {
            mag.set(x, 5, 0.3);
        }
        let edges = hysteresis(&mag, 0.2, 0.5);
        for x in 1..10 {
            assert!(edges.get(x, 2), "column {x} should be claimed");
        }
        for x in 2..10 {
            assert!(!edges.get(x, 5), "isolated weak path must stay out");
        }
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(quantile(&v, 0.0), 1.0);
        assert_relative_eq!(quantile(&v, 1.0), 4.0);
        assert_relative_eq!(quantile(&v, 0.5), 2.5);
        assert_relative_eq!(quantile(&v, 0.25), 1.75);
        let single = [7.0];
        assert_relative_eq!(quantile(&single, 0.3), 7.0);
    }

    #[test]
    fn sector_quantization() {
        assert_eq!(direction_sector(1.0, 0.0), (1, 0));
        assert_eq!(direction_sector(-1.0, 0.0), (1, 0));
        assert_eq!(direction_sector(1.0, 1.0), (1, 1));
        assert_eq!(direction_sector(0.0, 1.0), (0, 1));
        assert_eq!(direction_sector(0.0, -1.0), (0, 1));
        assert_eq!(direction_sector(-1.0, 1.0), (-1, 1));
        assert_eq!(direction_sector(1.0, -1.0), (-1, 1));
    }
}
