use super::{round_u8, RasterImage};
use crate::error::{Error, Result};

/// Source sample positions and weight of the upper neighbour, using
/// half-pixel centre alignment.
fn taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, s - lo as f64)
        })
        .collect()
}

pub fn resize_bilinear(image: &RasterImage, out_w: usize, out_h: usize) -> Result<RasterImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::contract(format!(
            "resize target {out_w}x{out_h} is empty"
        )));
    }
    if out_w == image.width() && out_h == image.height() {
        return Ok(image.clone());
    }
    let (w, c) = (image.width(), image.channels());
    let src = image.data();
    let xs = taps(w, out_w);
    let ys = taps(image.height(), out_h);

    let mut out = Vec::with_capacity(out_w * out_h * c);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for ch in 0..c {
                let at = |x: usize, y: usize| src[(y * w + x) * c + ch] as f64;
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                out.push(round_u8(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    RasterImage::new(out_w, out_h, image.colorspace(), out)
}
