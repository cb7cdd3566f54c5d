use serde::{Deserialize, Serialize};

use super::{
    adaptive_hist_eq, crop_to_rim, resize_bilinear, rgb_to_ycbcr, subtract_local_average,
    ycbcr_to_rgb, ColorSpace, RasterImage,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Tile grid (columns, rows) for adaptive equalization.
    pub clahe_tiles: [usize; 2],
    /// Clip height as a multiple of the uniform bin height.
    pub clahe_clip_limit: f64,
    /// Blur radius as a fraction of the rim radius.
    pub blur_radius_fraction: f64,
    pub subtraction_gain: f64,
    pub subtraction_offset: f64,
    /// Side of the square output image.
    pub output_size: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            clahe_tiles: [8, 8],
            clahe_clip_limit: 4.0,
            blur_radius_fraction: 0.30,
            subtraction_gain: 4.0,
            subtraction_offset: 128.0,
            output_size: 448,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("clahe_clip_limit", self.clahe_clip_limit),
            ("blur_radius_fraction", self.blur_radius_fraction),
            ("subtraction_gain", self.subtraction_gain),
            ("subtraction_offset", self.subtraction_offset),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.clahe_tiles.contains(&0) {
            return Err(Error::invalid("clahe_tiles must be positive"));
        }
        if self.clahe_clip_limit < 1.0 {
            return Err(Error::invalid("clahe_clip_limit must be >= 1"));
        }
        if self.subtraction_offset > 255.0 {
            return Err(Error::invalid("subtraction_offset must be an 8-bit level"));
        }
        if self.output_size < 32 {
            return Err(Error::invalid("output_size must be >= 32"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Crop,
    Equalize,
    Subtract,
    Resize,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Crop => "crop",
            Stage::Equalize => "equalize",
            Stage::Subtract => "subtract",
            Stage::Resize => "resize",
        }
    }
}

/// Pipeline output with the stages that ran and, optionally, the image
/// after each of them.
#[derive(Debug, Clone)]
pub struct Traced {
    pub image: RasterImage,
    pub trace: Vec<Stage>,
    pub intermediates: Vec<RasterImage>,
    pub rim_radius: f64,
}

pub fn preprocess(image: &RasterImage, config: &PreprocessConfig) -> Result<RasterImage> {
    preprocess_traced(image, config, false).map(|t| t.image)
}

pub fn preprocess_traced(
    image: &RasterImage,
    config: &PreprocessConfig,
    keep_intermediates: bool,
) -> Result<Traced> {
    config.validate()?;
    image.require(ColorSpace::Rgb, "preprocess")?;

    let mut trace = Vec::with_capacity(4);
    let mut intermediates = Vec::new();
    let mut record = |stage: Stage, img: &RasterImage| {
        trace.push(stage);
        if keep_intermediates {
            intermediates.push(img.clone());
        }
    };

    let crop = crop_to_rim(image).map_err(|e| e.in_stage(Stage::Crop.name()))?;
    record(Stage::Crop, &crop.image);

    let equalized =
        equalize_luma(&crop.image, config).map_err(|e| e.in_stage(Stage::Equalize.name()))?;
    record(Stage::Equalize, &equalized);

    let radius = (config.blur_radius_fraction * crop.rim_radius).max(1.0);
    let subtracted = subtract_local_average(
        &equalized,
        radius,
        config.subtraction_gain,
        config.subtraction_offset,
    )
    .map_err(|e| e.in_stage(Stage::Subtract.name()))?;
    record(Stage::Subtract, &subtracted);

    let resized = resize_bilinear(&subtracted, config.output_size, config.output_size)
        .map_err(|e| e.in_stage(Stage::Resize.name()))?;
    record(Stage::Resize, &resized);

    Ok(Traced {
        image: resized,
        trace,
        intermediates,
        rim_radius: crop.rim_radius,
    })
}

/// RGB -> YCbCr, equalize Y only, back to RGB.
fn equalize_luma(image: &RasterImage, config: &PreprocessConfig) -> Result<RasterImage> {
    let mut ycc = rgb_to_ycbcr(image)?;
    let y = ycc.channel(0)?;
    let [tx, ty] = config.clahe_tiles;
    let eq = adaptive_hist_eq(&y, (tx, ty), config.clahe_clip_limit)?;
    ycc.set_channel(0, &eq)?;
    ycbcr_to_rgb(&ycc)
}
