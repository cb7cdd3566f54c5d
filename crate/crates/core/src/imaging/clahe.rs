//! Contrast-limited adaptive histogram equalization.

use super::{round_u8, ColorSpace, Histogram256, RasterImage};
use crate::error::{Error, Result};

/// Equalization lookup table for one tile.
///
/// Bins are clipped at `clip_limit * pixels / 256`, the clipped excess is
/// spread evenly over all 256 bins, and the cumulative distribution is
/// stretched so the lowest occupied level maps to 0 and the top to 255.
pub fn tile_mapping(hist: &Histogram256, clip_limit: f64) -> [u8; 256] {
    let pixels = hist.total() as f64;
    let limit = clip_limit * pixels / 256.0;

    let mut excess = 0.0;
    let mut clipped = [0.0f64; 256];
    for (dst, &count) in clipped.iter_mut().zip(hist.bins()) {
        let c = count as f64;
        if c > limit {
            excess += c - limit;
            *dst = limit;
        } else {
            *dst = c;
        }
    }
    let share = excess / 256.0;

    let mut cdf = [0.0f64; 256];
    let mut acc = 0.0;
    for (v, c) in clipped.iter().enumerate() {
        acc += c + share;
        cdf[v] = acc;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0.0).unwrap_or(0.0);
    let span = acc - cdf_min;

    let mut lut = [0u8; 256];
    for (v, out) in lut.iter_mut().enumerate() {
        *out = if span <= 0.0 {
            // single occupied level with nothing redistributed
            v as u8
        } else {
            round_u8(255.0 * ((cdf[v] - cdf_min) / span).max(0.0))
        };
    }
    lut
}

/// Interpolation anchors along one axis: for each coordinate, the two
/// neighbouring tile indices and the weight of the second.
fn axis_weights(len: usize, tiles: usize) -> Vec<(usize, usize, f64)> {
    let bounds: Vec<usize> = (0..=tiles).map(|i| i * len / tiles).collect();
    let centres: Vec<f64> = (0..tiles)
        .map(|i| (bounds[i] + bounds[i + 1] - 1) as f64 / 2.0)
        .collect();
    (0..len)
        .map(|p| {
            let p = p as f64;
            if p <= centres[0] {
                return (0, 0, 0.0);
            }
            if p >= centres[tiles - 1] {
                return (tiles - 1, tiles - 1, 0.0);
            }
            let i = centres.iter().rposition(|&c| c <= p).unwrap();
            let w = (p - centres[i]) / (centres[i + 1] - centres[i]);
            (i, i + 1, w)
        })
        .collect()
}

pub fn adaptive_hist_eq(
    channel: &RasterImage,
    tiles: (usize, usize),
    clip_limit: f64,
) -> Result<RasterImage> {
    if channel.channels() != 1 {
        return Err(Error::contract(
            "adaptive_hist_eq needs a single-channel image",
        ));
    }
    let (tx, ty) = tiles;
    if tx == 0 || ty == 0 {
        return Err(Error::contract("tile grid must be at least 1x1"));
    }
    if clip_limit.is_nan() || clip_limit < 1.0 {
        return Err(Error::contract(format!("clip limit {clip_limit} < 1")));
    }
    let (w, h) = (channel.width(), channel.height());
    if w < tx || h < ty {
        return Err(Error::contract(format!(
            "image {w}x{h} smaller than tile grid {tx}x{ty}"
        )));
    }

    let data = channel.data();
    let mut luts = Vec::with_capacity(tx * ty);
    for j in 0..ty {
        let (y0, y1) = (j * h / ty, (j + 1) * h / ty);
        for i in 0..tx {
            let (x0, x1) = (i * w / tx, (i + 1) * w / tx);
            let hist =
                Histogram256::from_samples((y0..y1).flat_map(|y| &data[y * w + x0..y * w + x1]));
            luts.push(tile_mapping(&hist, clip_limit));
        }
    }

    let cols = axis_weights(w, tx);
    let rows = axis_weights(h, ty);
    let mut out = Vec::with_capacity(data.len());
    for (y, &(j0, j1, wy)) in rows.iter().enumerate() {
        for (x, &(i0, i1, wx)) in cols.iter().enumerate() {
            let v = data[y * w + x] as usize;
            let at = |j: usize, i: usize| luts[j * tx + i][v] as f64;
            let top = (1.0 - wx) * at(j0, i0) + wx * at(j0, i1);
            let bottom = (1.0 - wx) * at(j1, i0) + wx * at(j1, i1);
            out.push(round_u8((1.0 - wy) * top + wy * bottom));
        }
    }
    RasterImage::new(w, h, ColorSpace::Gray, out)
}
