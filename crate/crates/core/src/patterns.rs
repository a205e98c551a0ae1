//! Deterministic test textures.

use std::f64::consts::PI;

use crate::distort::gaussian_blur;
use crate::rng::CounterRng;
use crate::{GrayImage, Result};

/// Uniform white noise in `[0, 1)`, row-major draws from `CounterRng::new(seed)`.
pub fn noise(rows: usize, cols: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = CounterRng::new(seed);
    GrayImage::from_fn(rows, cols, |_, _| rng.next_f64())
}

/// Noise low-passed by a Gaussian of width `sigma` and stretched back to
/// `[0, 1]`, a stand-in for stochastic natural textures.
pub fn blobs(rows: usize, cols: usize, sigma: f64, seed: u64) -> Result<GrayImage> {
    let smooth = gaussian_blur(&noise(rows, cols, seed)?, sigma)?;
    let lo = smooth.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = smooth.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    Ok(smooth.map(|v| (v - lo) / span))
}

/// Sinusoidal grating `0.5 + 0.5 sin(2 pi (c cos t + r sin t) / period + phase)`;
/// `angle = 0` varies along columns only.
pub fn grating(rows: usize, cols: usize, period: f64, angle: f64, phase: f64) -> Result<GrayImage> {
    let (s, c) = angle.sin_cos();
    GrayImage::from_fn(rows, cols, |r, col| {
        0.5 + 0.5 * (2.0 * PI * (col as f64 * c + r as f64 * s) / period + phase).sin()
    })
}

/// Checkerboard of `cell x cell` squares with levels `lo` and `hi`.
pub fn checkerboard(rows: usize, cols: usize, cell: usize, lo: f64, hi: f64) -> Result<GrayImage> {
    GrayImage::from_fn(rows, cols, |r, c| if (r / cell + c / cell).is_multiple_of(2) { hi } else { lo })
}

/// A grating with a little seeded noise on top, clamped to `[0, 1]`.
pub fn noisy_grating(rows: usize, cols: usize, period: f64, angle: f64, amount: f64, seed: u64) -> Result<GrayImage> {
    let g = grating(rows, cols, period, angle, 0.3)?;
    let n = noise(rows, cols, seed)?;
    GrayImage::from_fn(rows, cols, |r, c| {
        ((1.0 - amount) * g.get(r, c) + amount * n.get(r, c)).clamp(0.0, 1.0)
    })
}
