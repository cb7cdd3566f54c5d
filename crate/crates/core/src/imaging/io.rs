//! PNG/JPEG decoding into rasters and PNG encoding back out.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use super::{ColorSpace, RasterImage};
use crate::error::{Error, Result};

/// Decodes any supported file into an RGB raster.
pub fn load_rgb(path: &Path) -> Result<RasterImage> {
    let img = image::open(path)?.into_rgb8();
    let (w, h) = img.dimensions();
    RasterImage::rgb(w as usize, h as usize, img.into_raw())
}

pub fn to_dynamic(image: &RasterImage) -> Result<DynamicImage> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let data = image.data().to_vec();
    let dynamic = match image.colorspace() {
        ColorSpace::Gray => GrayImage::from_raw(w, h, data).map(DynamicImage::ImageLuma8),
        ColorSpace::Rgb => RgbImage::from_raw(w, h, data).map(DynamicImage::ImageRgb8),
        ColorSpace::YCbCr => {
            return Err(Error::contract(
                "YCbCr rasters must be converted before encoding",
            ))
        }
    };
    dynamic.ok_or_else(|| Error::contract("raster buffer does not match its dimensions"))
}

/// Writes a PNG atomically (temporary sibling, then rename).
pub fn save_png(image: &RasterImage, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    to_dynamic(image)?.write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)?;
    crate::fsutil::write_atomic(path, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let img = RasterImage::from_fn_rgb(5, 4, |x, y| [x as u8 * 40, y as u8 * 60, 7]).unwrap();
        save_png(&img, &path).unwrap();
        assert_eq!(load_rgb(&path).unwrap(), img);
    }

    #[test]
    fn gray_saves_and_loads_as_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let img = RasterImage::gray(2, 1, vec![9, 200]).unwrap();
        save_png(&img, &path).unwrap();
        assert_eq!(load_rgb(&path).unwrap().data(), &[9, 9, 9, 200, 200, 200]);
    }

    #[test]
    fn ycbcr_cannot_be_encoded() {
        let img = RasterImage::filled(1, 1, ColorSpace::YCbCr, 0).unwrap();
        assert!(to_dynamic(&img).is_err());
    }
}
