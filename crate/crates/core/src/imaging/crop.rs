use serde::Serialize;

use super::{compute_histogram, luma, otsu_threshold, ColorSpace, RasterImage};
use crate::error::{Error, Result};

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

#[derive(Debug, Clone)]
pub struct RimCrop {
    pub image: RasterImage,
    pub bbox: BoundingBox,
    pub threshold: u8,
    /// Half the larger side of the bounding box.
    pub rim_radius: f64,
}

/// Crops an RGB fundus photograph to the bounding box of the pixels whose
/// luma is strictly above the Otsu threshold.
pub fn crop_to_rim(image: &RasterImage) -> Result<RimCrop> {
    image.require(ColorSpace::Rgb, "crop_to_rim")?;
    let gray = luma(image)?;
    let threshold = otsu_threshold(&compute_histogram(&gray)?)?;

    let w = gray.width();
    let mut bbox: Option<BoundingBox> = None;
    for (i, &v) in gray.data().iter().enumerate() {
        if v <= threshold {
            continue;
        }
        let (x, y) = (i % w, i / w);
        bbox = Some(match bbox {
            None => BoundingBox {
                x0: x,
                y0: y,
                x1: x,
                y1: y,
            },
            Some(b) => BoundingBox {
                x0: b.x0.min(x),
                y0: b.y0.min(y),
                x1: b.x1.max(x),
                y1: b.y1.max(y),
            },
        });
    }
    let bbox = bbox.ok_or(Error::BlankImage)?;
    let cropped = image.crop(bbox.x0, bbox.y0, bbox.width(), bbox.height())?;
    Ok(RimCrop {
        image: cropped,
        bbox,
        threshold,
        rim_radius: bbox.width().max(bbox.height()) as f64 / 2.0,
    })
}
