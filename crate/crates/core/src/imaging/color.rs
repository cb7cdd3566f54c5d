//! Full-range BT.601 conversions between RGB and YCbCr.

use super::{round_u8, ColorSpace, RasterImage};
use crate::error::Result;

#[inline]
fn luma_f(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Rounded BT.601 luma of an RGB image, as a gray image.
pub fn luma(image: &RasterImage) -> Result<RasterImage> {
    image.require(ColorSpace::Rgb, "luma")?;
    let data = image
        .data()
        .chunks_exact(3)
        .map(|p| round_u8(luma_f(p[0] as f64, p[1] as f64, p[2] as f64)))
        .collect();
    RasterImage::gray(image.width(), image.height(), data)
}

pub fn rgb_to_ycbcr(image: &RasterImage) -> Result<RasterImage> {
    image.require(ColorSpace::Rgb, "rgb_to_ycbcr")?;
    let mut data = Vec::with_capacity(image.data().len());
    for p in image.data().chunks_exact(3) {
        let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
        data.push(round_u8(luma_f(r, g, b)));
        data.push(round_u8(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b));
        data.push(round_u8(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b));
    }
    RasterImage::new(image.width(), image.height(), ColorSpace::YCbCr, data)
}

pub fn ycbcr_to_rgb(image: &RasterImage) -> Result<RasterImage> {
    image.require(ColorSpace::YCbCr, "ycbcr_to_rgb")?;
    let mut data = Vec::with_capacity(image.data().len());
    for p in image.data().chunks_exact(3) {
        let y = p[0] as f64;
        let cb = p[1] as f64 - 128.0;
        let cr = p[2] as f64 - 128.0;
        data.push(round_u8(y + 1.402 * cr));
        data.push(round_u8(y - 0.344136 * cb - 0.714136 * cr));
        data.push(round_u8(y + 1.772 * cb));
    }
    RasterImage::new(image.width(), image.height(), ColorSpace::Rgb, data)
}
