//! Overlay rendering: predicted rims in red over the photo, ground truth
//! in green.

use image::{Rgb, RgbImage};
use rimfit_core::Ellipse;

const PRED_COLOR: Rgb<u8> = Rgb([255, 40, 40]);
const GT_COLOR: Rgb<u8> = Rgb([40, 200, 40]);

/// Copies the photo and traces each ellipse outline over it, ground truth
/// first so predictions stay visible where the two agree.
pub fn draw(photo: &RgbImage, preds: &[Ellipse], gt: &[Ellipse]) -> RgbImage {
    let mut canvas = photo.clone();
    for e in gt {
        trace(&mut canvas, e, GT_COLOR);
    }
    for e in preds {
        trace(&mut canvas, e, PRED_COLOR);
    }
    canvas
}

fn trace(canvas: &mut RgbImage, e: &Ellipse, color: Rgb<u8>) {
    let n = (std::f64::consts::TAU * e.a.max(e.b) * 2.0).ceil().max(16.0) as usize;
    for p in e.sample_points(n) {
        let (x, y) = (p.x.round(), p.y.round());
        if x >= 0.0 && y >= 0.0 && (x as u32) < canvas.width() && (y as u32) < canvas.height() {
            canvas.put_pixel(x as u32, y as u32, color);
        }
    }
}
