use super::Histogram256;
use crate::error::{Error, Result};

/// Between-class variance when class 0 holds `n0` pixels summing to `s0`
/// out of `n` pixels summing to `s`. Zero when either class is empty.
pub fn between_class_variance(n0: u64, s0: u64, n: u64, s: u64) -> f64 {
    let n1 = n - n0;
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let total = n as f64;
    let w0 = n0 as f64 / total;
    let w1 = n1 as f64 / total;
    let mu0 = s0 as f64 / n0 as f64;
    let mu1 = (s - s0) as f64 / n1 as f64;
    let d = mu0 - mu1;
    w0 * w1 * d * d
}

/// Threshold `t` maximizing the between-class variance, with class 0 the
/// levels `<= t`. Ties go to the smallest `t`.
pub fn otsu_threshold(hist: &Histogram256) -> Result<u8> {
    let n = hist.total();
    if n == 0 {
        return Err(Error::EmptyHistogram);
    }
    let s: u64 = hist
        .bins()
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u64 * c)
        .sum();

    let mut best_t = 0u8;
    let mut best = f64::NEG_INFINITY;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (t, &count) in hist.bins().iter().enumerate() {
        n0 += count;
        s0 += t as u64 * count;
        let var = between_class_variance(n0, s0, n, s);
        if var > best {
            best = var;
            best_t = t as u8;
        }
    }
    Ok(best_t)
}
