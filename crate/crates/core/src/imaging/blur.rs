use super::{round_u8, ColorSpace, RasterImage};
use crate::error::{Error, Result};

/// Normalized 1-D Gaussian weights truncated at `3 * sigma`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let half = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// Separable Gaussian blur of one interleaved channel with edge replication.
fn blur_channel(
    src: &[u8],
    w: usize,
    h: usize,
    stride: usize,
    c: usize,
    kernel: &[f64],
) -> Vec<f64> {
    let half = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                let sx = clamp(x as isize + k as isize - half, w);
                acc += wt * src[(y * w + sx) * stride + c] as f64;
            }
            horiz[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                let sy = clamp(y as isize + k as isize - half, h);
                acc += wt * horiz[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Per channel, `clamp(gain * (in - blur(in)) + offset)` where `blur` is a
/// Gaussian with `sigma = radius / 2`.
pub fn subtract_local_average(
    image: &RasterImage,
    radius: f64,
    gain: f64,
    offset: f64,
) -> Result<RasterImage> {
    image.require(ColorSpace::Rgb, "subtract_local_average")?;
    if radius.is_nan() || radius < 1.0 {
        return Err(Error::contract(format!("blur radius {radius} < 1")));
    }
    let kernel = gaussian_kernel(radius / 2.0);
    let (w, h) = (image.width(), image.height());
    let src = image.data();
    let mut out = vec![0u8; src.len()];
    for c in 0..3 {
        let blurred = blur_channel(src, w, h, 3, c, &kernel);
        for (i, b) in blurred.into_iter().enumerate() {
            let v = src[i * 3 + c] as f64;
            out[i * 3 + c] = round_u8(gain * (v - b) + offset);
        }
    }
    RasterImage::rgb(w, h, out)
}
