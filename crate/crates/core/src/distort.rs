//! Controlled degradations standing in for texture-synthesis artifacts:
//! blur, tile shuffling and per-row misalignment. Stochastic kinds are driven
//! by [`CounterRng`], so a `(image, spec)` pair always yields the same output.

use std::fmt;
use std::str::FromStr;

use crate::raster::{Boundary, Image};
use crate::rng::CounterRng;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionKind {
    Blur,
    TileShuffle,
    Misalign,
}

impl DistortionKind {
    pub fn name(self) -> &'static str {
        match self {
            DistortionKind::Blur => "blur",
            DistortionKind::TileShuffle => "tile_shuffle",
            DistortionKind::Misalign => "misalign",
        }
    }
}

/// `kind:magnitude[:seed]`, e.g. `blur:1.5`, `tile_shuffle:16:7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSpec {
    pub kind: DistortionKind,
    /// Gaussian sigma (blur), block side (tile_shuffle) or largest row
    /// shift (misalign), in pixels.
    pub magnitude: f64,
    pub seed: u64,
}

impl DistortionSpec {
    pub fn apply<T: Scalar>(&self, img: &Image<T>) -> Result<Image<T>> {
        match self.kind {
            DistortionKind::Blur => gaussian_blur(img, self.magnitude),
            DistortionKind::TileShuffle => tile_shuffle(img, self.magnitude as usize, self.seed),
            DistortionKind::Misalign => misalign(img, self.magnitude as usize, self.seed),
        }
    }
}

impl FromStr for DistortionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDistortion(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let kind = match parts[0] {
            "blur" => DistortionKind::Blur,
            "tile_shuffle" => DistortionKind::TileShuffle,
            "misalign" => DistortionKind::Misalign,
            other => return Err(Error::UnknownDistortion(other.to_string())),
        };
        let magnitude: f64 = parts[1].parse().map_err(|_| bad())?;
        if !magnitude.is_finite() || magnitude < 0.0 {
            return Err(bad());
        }
        if kind != DistortionKind::Blur && magnitude.fract() != 0.0 {
            return Err(bad());
        }
        let seed = match parts.get(2) {
            Some(t) => t.parse().map_err(|_| bad())?,
            None => 0,
        };
        Ok(Self { kind, magnitude, seed })
    }
}

impl fmt::Display for DistortionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.kind.name(), self.magnitude, self.seed)
    }
}

/// Normalized Gaussian taps for offsets `-radius..=radius`, `radius = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur with symmetric boundaries. `sigma == 0` is the
/// identity.
pub fn gaussian_blur<T: Scalar>(img: &Image<T>, sigma: f64) -> Result<Image<T>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidDistortion(format!("blur sigma {sigma}")));
    }
    if sigma > img.rows().min(img.cols()) as f64 / 4.0 {
        return Err(Error::BlurTooLarge);
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let kernel: Vec<T> = gaussian_kernel(sigma).into_iter().map(T::of).collect();
    let radius = (kernel.len() / 2) as isize;
    let (rows, cols) = (img.rows(), img.cols());
    let b = Boundary::Symmetric;

    let mut tmp = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let row = img.row(r);
        for c in 0..cols {
            let mut acc = T::zero();
            for (k, &w) in kernel.iter().enumerate() {
                acc = acc + w * row[b.index(c as isize + k as isize - radius, cols)];
            }
            tmp.push(acc);
        }
    }
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = T::zero();
            for (k, &w) in kernel.iter().enumerate() {
                acc = acc + w * tmp[b.index(r as isize + k as isize - radius, rows) * cols + c];
            }
            out.push(acc);
        }
    }
    Ok(Image::from_raw(rows, cols, out))
}

/// Permutes the full `block x block` tiles; partial tiles at the right and
/// bottom edges stay in place.
pub fn tile_shuffle<T: Scalar>(img: &Image<T>, block: usize, seed: u64) -> Result<Image<T>> {
    if block == 0 {
        return Err(Error::InvalidDistortion("tile_shuffle block 0".into()));
    }
    if block > img.rows().min(img.cols()) {
        return Err(Error::BlockTooLarge);
    }
    let (rows, cols) = (img.rows(), img.cols());
    let (br, bc) = (rows / block, cols / block);
    let mut order: Vec<usize> = (0..br * bc).collect();
    CounterRng::new(seed).shuffle(&mut order);

    let mut out = img.data().to_vec();
    for (dst, &src) in order.iter().enumerate() {
        let (dr, dc) = (dst / bc * block, dst % bc * block);
        let (sr, sc) = (src / bc * block, src % bc * block);
        for i in 0..block {
            let from = (sr + i) * cols + sc;
            let to = (dr + i) * cols + dc;
            out[to..to + block].copy_from_slice(&img.data()[from..from + block]);
        }
    }
    Ok(Image::from_raw(rows, cols, out))
}

/// Circularly shifts every row by its own uniform draw from
/// `[-max_shift, max_shift]`.
pub fn misalign<T: Scalar>(img: &Image<T>, max_shift: usize, seed: u64) -> Result<Image<T>> {
    let cols = img.cols();
    if max_shift >= cols {
        return Err(Error::ShiftTooLarge);
    }
    let mut rng = CounterRng::new(seed);
    let mut out = Vec::with_capacity(img.data().len());
    for r in 0..img.rows() {
        let shift = rng.symmetric(max_shift as u64).rem_euclid(cols as i64) as usize;
        let row = img.row(r);
        out.extend((0..cols).map(|c| row[(c + cols - shift) % cols]));
    }
    Ok(Image::from_raw(img.rows(), cols, out))
}
