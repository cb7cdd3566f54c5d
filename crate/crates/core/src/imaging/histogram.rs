use super::RasterImage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    bins: [u64; 256],
}

impl Histogram256 {
    pub fn from_bins(bins: [u64; 256]) -> Self {
        Self { bins }
    }

    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a u8>) -> Self {
        let mut bins = [0u64; 256];
        for &v in samples {
            bins[v as usize] += 1;
        }
        Self { bins }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

impl std::ops::Index<usize> for Histogram256 {
    type Output = u64;

    fn index(&self, v: usize) -> &u64 {
        &self.bins[v]
    }
}

pub fn compute_histogram(image: &RasterImage) -> Result<Histogram256> {
    if image.channels() != 1 {
        return Err(Error::contract(format!(
            "histogram needs a single-channel image, got {} channels",
            image.channels()
        )));
    }
    Ok(Histogram256::from_samples(image.data()))
}
