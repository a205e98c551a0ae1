//! Grayscale image carrier, color conversion and gradient magnitude.

use crate::{Error, Result, Scalar};

/// Boundary extension used by every filter in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Half-sample mirror: `x[-1] = x[0]`, `x[n] = x[n - 1]`.
    #[default]
    Symmetric,
    /// Wrap-around. Only meant for testing shift properties.
    Periodic,
}

impl Boundary {
    /// Maps a possibly out-of-range index onto `0..n`.
    #[inline]
    pub fn index(self, i: isize, n: usize) -> usize {
        let n = n as isize;
        match self {
            Boundary::Periodic => i.rem_euclid(n) as usize,
            Boundary::Symmetric => {
                let m = i.rem_euclid(2 * n);
                if m < n {
                    m as usize
                } else {
                    (2 * n - 1 - m) as usize
                }
            }
        }
    }
}

/// Row-major single channel image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinitePixel(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Skips validation; callers guarantee shape and finiteness.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    /// Pixel lookup with boundary extension on both axes.
    #[inline]
    pub fn get_ext(&self, r: isize, c: isize, boundary: Boundary) -> T {
        self.get(boundary.index(r, self.rows), boundary.index(c, self.cols))
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Circular shift: output(r, c) = input(r - dr, c - dc).
    pub fn roll(&self, dr: isize, dc: isize) -> Self {
        let mut out = Vec::with_capacity(self.data.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let sr = (r as isize - dr).rem_euclid(self.rows as isize) as usize;
                let sc = (c as isize - dc).rem_euclid(self.cols as isize) as usize;
                out.push(self.get(sr, sc));
            }
        }
        Self::from_raw(self.rows, self.cols, out)
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / T::of_usize(self.data.len())
    }

    /// Population variance.
    pub fn variance(&self) -> T {
        let mu = self.mean();
        self.data.iter().map(|&v| (v - mu) * (v - mu)).sum::<T>() / T::of_usize(self.data.len())
    }

    pub fn is_constant(&self) -> bool {
        self.data.iter().all(|&v| v == self.data[0])
    }

    pub fn cast<U: Scalar>(&self) -> Image<U> {
        Image::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| U::of(v.to_f64_lossy())).collect(),
        )
    }
}

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

#[inline]
pub(crate) fn luma(r: f64, g: f64, b: f64, max: f64) -> f64 {
    ((LUMA_R * r + LUMA_G * g + LUMA_B * b) / max).clamp(0.0, 1.0)
}

/// BT.601 luma of an 8-bit RGB image, scaled to `[0, 1]`.
pub fn to_grayscale<T: Scalar>(rgb: &::image::RgbImage) -> Result<Image<T>> {
    let (w, h) = rgb.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::EmptyInput);
    }
    let data = rgb
        .pixels()
        .map(|p| T::of(luma(p[0] as f64, p[1] as f64, p[2] as f64, 255.0)))
        .collect();
    Image::new(h as usize, w as usize, data)
}

/// Sobel gradient magnitude, `sqrt((gx^2 + gy^2) / 2)` with `/8`-normalized
/// kernels, computed as a true convolution.
pub fn gradient_magnitude<T: Scalar>(img: &Image<T>, boundary: Boundary) -> Result<Image<T>> {
    let (rows, cols) = (img.rows(), img.cols());
    if rows < 3 || cols < 3 {
        return Err(Error::TooSmallForGradient);
    }
    let two = T::of(2.0);
    let eighth = T::of(0.125);

    // Row pass: horizontal derivative and horizontal smoothing.
    let mut deriv_h = Vec::with_capacity(rows * cols);
    let mut smooth_h = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let row = img.row(r);
        for c in 0..cols {
            let left = row[boundary.index(c as isize - 1, cols)];
            let right = row[boundary.index(c as isize + 1, cols)];
            deriv_h.push(left - right);
            smooth_h.push(left + two * row[c] + right);
        }
    }

    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let up = boundary.index(r as isize - 1, rows) * cols;
        let down = boundary.index(r as isize + 1, rows) * cols;
        let here = r * cols;
        for c in 0..cols {
            let gx = (deriv_h[up + c] + two * deriv_h[here + c] + deriv_h[down + c]) * eighth;
            let gy = (smooth_h[up + c] - smooth_h[down + c]) * eighth;
            out.push(((gx * gx + gy * gy) / two).sqrt());
        }
    }
    Ok(Image::from_raw(rows, cols, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];

    /// Direct 3x3 convolution, no separability.
    fn direct_gm(img: &Image<f64>, boundary: Boundary) -> Vec<f64> {
        let mut out = Vec::new();
        for r in 0..img.rows() as isize {
            for c in 0..img.cols() as isize {
                let (mut gx, mut gy) = (0.0, 0.0);
                for i in -1..=1isize {
                    for j in -1..=1isize {
                        let v = img.get_ext(r - i, c - j, boundary);
                        gx += SOBEL_X[(i + 1) as usize][(j + 1) as usize] / 8.0 * v;
                        gy += SOBEL_X[(j + 1) as usize][(i + 1) as usize] / 8.0 * v;
                    }
                }
                out.push(((gx * gx + gy * gy) / 2.0).sqrt());
            }
        }
        out
    }

    #[test]
    fn symmetric_index_mirrors_with_edge_repeat() {
        let b = Boundary::Symmetric;
        let got: Vec<usize> = (-3..7).map(|i| b.index(i, 4)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
        assert_eq!(Boundary::Periodic.index(-1, 4), 3);
        assert_eq!(Boundary::Periodic.index(5, 4), 1);
    }

    #[test]
    fn rejects_bad_images() {
        assert!(matches!(Image::<f64>::new(0, 3, vec![]), Err(Error::EmptyInput)));
        assert!(matches!(
            Image::new(2, 2, vec![0.0; 3]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            Image::new(1, 2, vec![0.0, f64::NAN]),
            Err(Error::NonFinitePixel(1))
        ));
    }

    #[test]
    fn grayscale_primaries() {
        let mut rgb = ::image::RgbImage::new(3, 1);
        rgb.put_pixel(0, 0, ::image::Rgb([255, 255, 255]));
        rgb.put_pixel(1, 0, ::image::Rgb([0, 0, 0]));
        rgb.put_pixel(2, 0, ::image::Rgb([255, 0, 0]));
        let g: Image<f64> = to_grayscale(&rgb).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(0, 1), 0.0);
        assert_relative_eq!(g.get(0, 2), 0.299, epsilon = 1e-15);
    }

    #[test]
    fn grayscale_of_replicated_gray_is_the_gray_level() {
        for v in 0..=255u8 {
            let rgb = ::image::RgbImage::from_pixel(1, 1, ::image::Rgb([v, v, v]));
            let g: Image<f64> = to_grayscale(&rgb).unwrap();
            assert!((g.get(0, 0) - v as f64 / 255.0).abs() <= 1.0 / 255.0);
        }
    }

    #[test]
    fn grayscale_rejects_empty() {
        let rgb = ::image::RgbImage::new(0, 4);
        assert!(matches!(to_grayscale::<f64>(&rgb), Err(Error::EmptyInput)));
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let img = Image::filled(6, 7, 0.5).unwrap();
        let gm = gradient_magnitude(&img, Boundary::Symmetric).unwrap();
        assert!(gm.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_too_small() {
        let img = Image::filled(2, 8, 0.5).unwrap();
        assert!(matches!(
            gradient_magnitude(&img, Boundary::Symmetric),
            Err(Error::TooSmallForGradient)
        ));
    }

    #[test]
    fn ramp_interior_is_constant() {
        let img = Image::from_fn(8, 8, |_, c| c as f64 / 7.0).unwrap();
        let gm = gradient_magnitude(&img, Boundary::Symmetric).unwrap();
        let oracle = direct_gm(&img, Boundary::Symmetric);
        // Interior: gx = (1 + 2 + 1) * (2/7) / 8 = 1/7, gy = 0.
        let expected = oracle[8 + 1];
        assert_relative_eq!(expected, (1.0f64 / 7.0) / 2.0f64.sqrt(), epsilon = 1e-15);
        for r in 1..7 {
            for c in 1..7 {
                assert_relative_eq!(gm.get(r, c), expected, epsilon = 1e-15);
            }
        }
        for (a, b) in gm.data().iter().zip(&oracle) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn impulse_matches_flipped_kernels() {
        let img = Image::from_fn(5, 5, |r, c| if (r, c) == (2, 2) { 1.0 } else { 0.0 }).unwrap();
        let gm = gradient_magnitude(&img, Boundary::Symmetric).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let (i, j) = (r as isize - 2, c as isize - 2);
                let expected = if i.abs() <= 1 && j.abs() <= 1 {
                    let kx = SOBEL_X[(i + 1) as usize][(j + 1) as usize] / 8.0;
                    let ky = SOBEL_X[(j + 1) as usize][(i + 1) as usize] / 8.0;
                    ((kx * kx + ky * ky) / 2.0).sqrt()
                } else {
                    0.0
                };
                assert_relative_eq!(gm.get(r, c), expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn separable_matches_direct_on_random_images() {
        let mut rng = crate::rng::CounterRng::new(9);
        for boundary in [Boundary::Symmetric, Boundary::Periodic] {
            let img = Image::from_fn(9, 13, |_, _| rng.next_f64()).unwrap();
            let gm = gradient_magnitude(&img, boundary).unwrap();
            for (a, b) in gm.data().iter().zip(direct_gm(&img, boundary)) {
                assert_relative_eq!(*a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn f32_gradient_tracks_f64() {
        let img = Image::from_fn(10, 10, |r, c| ((r * 7 + c * 3) % 11) as f64 / 10.0).unwrap();
        let g64 = gradient_magnitude(&img, Boundary::Symmetric).unwrap();
        let g32 = gradient_magnitude(&img.cast::<f32>(), Boundary::Symmetric).unwrap();
        for (a, b) in g64.data().iter().zip(g32.data()) {
            assert!((a - *b as f64).abs() < 1e-6);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dyadic_image() -> impl Strategy<Value = Image<f64>> {
            (3usize..10, 3usize..10).prop_flat_map(|(r, c)| {
                prop::collection::vec(0u32..=256, r * c).prop_map(move |v| {
                    Image::new(r, c, v.into_iter().map(|x| x as f64 / 256.0).collect()).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn offset_invariance(img in dyadic_image(), k in -8i32..8) {
                let c = k as f64 / 4.0;
                let a = gradient_magnitude(&img, Boundary::Symmetric).unwrap();
                let b = gradient_magnitude(&img.map(|v| v + c), Boundary::Symmetric).unwrap();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn linear_scaling(img in dyadic_image(), a in 0.01f64..50.0) {
                let g = gradient_magnitude(&img, Boundary::Symmetric).unwrap();
                let gs = gradient_magnitude(&img.map(|v| a * v), Boundary::Symmetric).unwrap();
                for (x, y) in g.data().iter().zip(gs.data()) {
                    prop_assert!((a * x - y).abs() <= 1e-12 * y.abs().max(1e-300) + 1e-300);
                }
            }

            #[test]
            fn zero_iff_constant(img in dyadic_image()) {
                let g = gradient_magnitude(&img, Boundary::Symmetric).unwrap();
                prop_assert!(g.data().iter().all(|&v| v >= 0.0));
                prop_assert_eq!(g.data().iter().all(|&v| v == 0.0), img.is_constant());
            }
        }
    }
}
