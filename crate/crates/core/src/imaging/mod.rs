//! Fundus image preprocessing: rim cropping, luma equalization, local
//! average subtraction and resizing on 8-bit rasters.

mod blur;
mod clahe;
mod color;
mod crop;
mod histogram;
pub mod io;
mod otsu;
mod pipeline;
mod resize;

pub use blur::{gaussian_kernel, subtract_local_average};
pub use clahe::{adaptive_hist_eq, tile_mapping};
pub use color::{luma, rgb_to_ycbcr, ycbcr_to_rgb};
pub use crop::{crop_to_rim, BoundingBox, RimCrop};
pub use histogram::{compute_histogram, Histogram256};
pub use otsu::{between_class_variance, otsu_threshold};
pub use pipeline::{preprocess, preprocess_traced, PreprocessConfig, Stage, Traced};
pub use resize::resize_bilinear;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    Rgb,
    YCbCr,
    Gray,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            ColorSpace::Rgb | ColorSpace::YCbCr => 3,
        }
    }
}

/// Row-major, channel-interleaved 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    colorspace: ColorSpace,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, colorspace: ColorSpace, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::contract(format!("empty image {width}x{height}")));
        }
        let expected = width * height * colorspace.channels();
        if data.len() != expected {
            return Err(Error::contract(format!(
                "data length {} does not match {width}x{height}x{}",
                data.len(),
                colorspace.channels()
            )));
        }
        Ok(Self {
            width,
            height,
            colorspace,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, colorspace: ColorSpace, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            colorspace,
            vec![value; width * height * colorspace.channels()],
        )
    }

    pub fn gray(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, ColorSpace::Gray, data)
    }

    pub fn rgb(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, ColorSpace::Rgb, data)
    }

    /// Builds an RGB image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn_rgb(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::rgb(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.colorspace.channels()
    }

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let c = self.channels();
        let i = (y * self.width + x) * c;
        &self.data[i..i + c]
    }

    pub(crate) fn require(&self, colorspace: ColorSpace, op: &str) -> Result<()> {
        if self.colorspace != colorspace {
            return Err(Error::contract(format!(
                "{op} expects {colorspace:?} input, got {:?}",
                self.colorspace
            )));
        }
        Ok(())
    }

    /// Extracts channel `c` as a single-channel image.
    pub fn channel(&self, c: usize) -> Result<RasterImage> {
        let n = self.channels();
        if c >= n {
            return Err(Error::contract(format!(
                "channel {c} out of range for {n} channels"
            )));
        }
        let data = self.data.iter().skip(c).step_by(n).copied().collect();
        RasterImage::gray(self.width, self.height, data)
    }

    /// Overwrites channel `c` with the samples of a single-channel image.
    pub fn set_channel(&mut self, c: usize, plane: &RasterImage) -> Result<()> {
        let n = self.channels();
        if c >= n
            || plane.channels() != 1
            || plane.width != self.width
            || plane.height != self.height
        {
            return Err(Error::contract("channel plane does not fit image"));
        }
        for (dst, &src) in self.data.iter_mut().skip(c).step_by(n).zip(&plane.data) {
            *dst = src;
        }
        Ok(())
    }

    /// Copies the `w`×`h` window whose top-left corner is (`x0`, `y0`).
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<RasterImage> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::contract(format!(
                "crop window {w}x{h}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let c = self.channels();
        let mut data = Vec::with_capacity(w * h * c);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * c;
            data.extend_from_slice(&self.data[start..start + w * c]);
        }
        RasterImage::new(w, h, self.colorspace, data)
    }
}

/// Rounds half up and clamps to the 8-bit range.
#[inline]
pub(crate) fn round_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}
