use crate::error::Result;
use crate::imaging::{resize_bilinear, ColorSpace, RasterImage};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub image_id: String,
    /// Row-major, channel-interleaved samples scaled to [0, 1].
    pub values: Vec<f64>,
}

/// Thumbnail of side `side`, scaled by 1/255 and flattened.
pub fn featurize(
    image_id: impl Into<String>,
    image: &RasterImage,
    side: usize,
) -> Result<FeatureVector> {
    image.require(ColorSpace::Rgb, "featurize")?;
    let thumb = resize_bilinear(image, side, side)?;
    Ok(FeatureVector {
        image_id: image_id.into(),
        values: thumb.data().iter().map(|&v| v as f64 / 255.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_and_white() {
        let black = RasterImage::filled(40, 30, ColorSpace::Rgb, 0).unwrap();
        let f = featurize("b", &black, 8).unwrap();
        assert_eq!(f.values.len(), 8 * 8 * 3);
        assert!(f.values.iter().all(|&v| v == 0.0));
        let white = RasterImage::filled(40, 30, ColorSpace::Rgb, 255).unwrap();
        assert!(featurize("w", &white, 8)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 1.0));
    }

    #[test]
    fn checkerboard_same_size() {
        let img = RasterImage::from_fn_rgb(
            2,
            2,
            |x, y| if (x + y) % 2 == 0 { [255; 3] } else { [0; 3] },
        )
        .unwrap();
        let f = featurize("c", &img, 2).unwrap();
        assert_eq!(
            f.values,
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn rejects_gray() {
        let img = RasterImage::gray(2, 2, vec![0; 4]).unwrap();
        assert!(featurize("g", &img, 2).is_err());
    }
}
