//! Undecimated (à trous) Haar decomposition.
//!
//! Level `j` filters with the Haar pair upsampled by `2^(j-1)`: the lowpass
//! `(x[n] + x[n-d]) / 2` and the highpass `(x[n] - x[n-d]) / 2` with
//! `d = 2^(j-1)`. No subband is decimated, so every output has the input's
//! shape. Only the two oriented detail bands are produced per level:
//!
//! * `hh`: highpass along rows (horizontal frequency), lowpass along columns.
//! * `vh`: lowpass along rows, highpass along columns (vertical frequency).

use crate::raster::{Boundary, Image};
use crate::{Error, Result, Scalar};

/// Detail subbands of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Level<T> {
    pub hh: Image<T>,
    pub vh: Image<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid<T> {
    levels: Vec<Level<T>>,
    ll: Image<T>,
}

impl<T: Scalar> Pyramid<T> {
    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// Detail bands of level `j`, 1-based.
    pub fn level(&self, j: usize) -> &Level<T> {
        &self.levels[j - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Level<T>> {
        self.levels.iter()
    }

    /// Coarsest lowpass residual.
    pub fn ll_final(&self) -> &Image<T> {
        &self.ll
    }
}

/// Tap spacing at level `j` (1-based).
#[inline]
pub fn dilation(j: usize) -> usize {
    1 << (j - 1)
}

/// Largest level count whose dilated filters fit the shorter image side.
pub fn max_levels(rows: usize, cols: usize) -> usize {
    let n = rows.min(cols);
    if n == 0 {
        return 0;
    }
    (usize::BITS - n.leading_zeros()) as usize
}

pub fn decompose<T: Scalar>(img: &Image<T>, levels: usize, boundary: Boundary) -> Result<Pyramid<T>> {
    if levels == 0 {
        return Err(Error::InvalidConfig("levels must be at least 1".into()));
    }
    if levels > max_levels(img.rows(), img.cols()) {
        return Err(Error::TooManyLevels);
    }
    let half = T::of(0.5);
    let mut ll = img.clone();
    let mut out = Vec::with_capacity(levels);
    for j in 1..=levels {
        let d = dilation(j);
        let (lo_r, hi_r) = filter_rows(&ll, d, half, boundary);
        let ((hh, _), (ll_next, vh)) = rayon::join(
            || filter_cols(&hi_r, d, half, boundary, false),
            || filter_cols(&lo_r, d, half, boundary, true),
        );
        out.push(Level { hh, vh: vh.unwrap() });
        ll = ll_next;
    }
    Ok(Pyramid { levels: out, ll })
}

/// Lowpass and highpass along each row.
fn filter_rows<T: Scalar>(img: &Image<T>, d: usize, half: T, boundary: Boundary) -> (Image<T>, Image<T>) {
    let (rows, cols) = (img.rows(), img.cols());
    let mut lo = Vec::with_capacity(rows * cols);
    let mut hi = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let row = img.row(r);
        for c in 0..cols {
            let a = row[c];
            let b = row[boundary.index(c as isize - d as isize, cols)];
            lo.push((a + b) * half);
            hi.push((a - b) * half);
        }
    }
    (Image::from_raw(rows, cols, lo), Image::from_raw(rows, cols, hi))
}

/// Lowpass along each column, plus the highpass when `with_high`.
fn filter_cols<T: Scalar>(
    img: &Image<T>,
    d: usize,
    half: T,
    boundary: Boundary,
    with_high: bool,
) -> (Image<T>, Option<Image<T>>) {
    let (rows, cols) = (img.rows(), img.cols());
    let src = img.data();
    let mut lo = Vec::with_capacity(rows * cols);
    let mut hi = Vec::with_capacity(if with_high { rows * cols } else { 0 });
    for r in 0..rows {
        let prev = boundary.index(r as isize - d as isize, rows) * cols;
        let here = r * cols;
        for c in 0..cols {
            let a = src[here + c];
            let b = src[prev + c];
            lo.push((a + b) * half);
            if with_high {
                hi.push((a - b) * half);
            }
        }
    }
    let hi = with_high.then(|| Image::from_raw(rows, cols, hi));
    (Image::from_raw(rows, cols, lo), hi)
}
