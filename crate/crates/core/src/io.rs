//! PNG and binary PGM (P5) reading and writing.
//!
//! Samples are normalized by the maximum of their sample type, so 8-bit and
//! 16-bit sources land on the same `[0, 1]` scale. Color inputs are reduced
//! to BT.601 luma; alpha is ignored.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use crate::raster::{luma, to_grayscale};
use crate::{Error, GrayImage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedImage {
    pub image: GrayImage,
    /// Sample depth of the source file.
    pub depth: BitDepth,
}

fn read_err(path: &Path, reason: impl ToString) -> Error {
    Error::ImageRead {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn write_err(path: &Path, reason: impl ToString) -> Error {
    Error::ImageWrite {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let decoded = ImageReader::open(path)
        .map_err(|e| read_err(path, e))?
        .with_guessed_format()
        .map_err(|e| read_err(path, e))?
        .decode()
        .map_err(|e| read_err(path, e))?;
    from_dynamic(decoded).map_err(|e| read_err(path, e))
}

fn gray_from<S: Copy + Into<f64>>(w: u32, h: u32, samples: impl Iterator<Item = S>, max: f64) -> Result<GrayImage> {
    let data = samples.map(|s| s.into() / max).collect();
    GrayImage::new(h as usize, w as usize, data)
}

fn from_dynamic(img: DynamicImage) -> Result<LoadedImage> {
    let (w, h) = (img.width(), img.height());
    let (image, depth) = match img {
        DynamicImage::ImageLuma8(g) => (gray_from(w, h, g.into_raw().into_iter(), 255.0)?, BitDepth::Eight),
        DynamicImage::ImageLumaA8(g) => (
            gray_from(w, h, g.pixels().map(|p| p[0]), 255.0)?,
            BitDepth::Eight,
        ),
        DynamicImage::ImageLuma16(g) => (gray_from(w, h, g.into_raw().into_iter(), 65535.0)?, BitDepth::Sixteen),
        DynamicImage::ImageLumaA16(g) => (
            gray_from(w, h, g.pixels().map(|p| p[0]), 65535.0)?,
            BitDepth::Sixteen,
        ),
        DynamicImage::ImageRgb8(rgb) => (to_grayscale(&rgb)?, BitDepth::Eight),
        DynamicImage::ImageRgba8(_) => (to_grayscale(&img.to_rgb8())?, BitDepth::Eight),
        other => {
            let rgb = other.to_rgb16();
            let data = rgb
                .pixels()
                .map(|p| luma(p[0] as f64, p[1] as f64, p[2] as f64, 65535.0))
                .collect();
            (GrayImage::new(h as usize, w as usize, data)?, BitDepth::Sixteen)
        }
    };
    Ok(LoadedImage { image, depth })
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("pnm"))
}

/// Writes `img` as PGM (by `.pgm`/`.pnm` extension) or PNG, quantizing the
/// clamped `[0, 1]` range to `depth`.
pub fn save_image(path: impl AsRef<Path>, img: &GrayImage, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.cols() as u32, img.rows() as u32);
    let max = depth.max();
    let samples = img.data().iter().map(|&v| (v.clamp(0.0, 1.0) * max).round());
    let mut file = BufWriter::new(File::create(path).map_err(|e| write_err(path, e))?);
    if is_pgm(path) {
        // P5 stores 16-bit samples big-endian.
        let mut bytes = format!("P5\n{w} {h}\n{}\n", max as u32).into_bytes();
        match depth {
            BitDepth::Eight => bytes.extend(samples.map(|v| v as u8)),
            BitDepth::Sixteen => bytes.extend(samples.flat_map(|v| (v as u16).to_be_bytes())),
        }
        return file
            .write_all(&bytes)
            .and_then(|_| file.flush())
            .map_err(|e| write_err(path, e));
    }
    let (bytes, color) = match depth {
        BitDepth::Eight => (samples.map(|v| v as u8).collect::<Vec<u8>>(), ExtendedColorType::L8),
        // The PNG encoder takes native-endian 16-bit samples.
        BitDepth::Sixteen => (
            samples.flat_map(|v| (v as u16).to_ne_bytes()).collect(),
            ExtendedColorType::L16,
        ),
    };
    PngEncoder::new(file)
        .write_image(&bytes, w, h, color)
        .map_err(|e| write_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(rows: usize, cols: usize, levels: f64) -> GrayImage {
        GrayImage::from_fn(rows, cols, |r, c| ((r * 31 + c * 17) % (levels as usize + 1)) as f64 / levels).unwrap()
    }

    #[test]
    fn eight_bit_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let img = pattern(9, 13, 255.0);
        for name in ["a.png", "a.pgm"] {
            let p = dir.path().join(name);
            save_image(&p, &img, BitDepth::Eight).unwrap();
            let back = load_image(&p).unwrap();
            assert_eq!(back.depth, BitDepth::Eight);
            assert_eq!(back.image, img);
        }
    }

    #[test]
    fn sixteen_bit_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let img = pattern(7, 11, 65535.0);
        for name in ["b.png", "b.pgm"] {
            let p = dir.path().join(name);
            save_image(&p, &img, BitDepth::Sixteen).unwrap();
            let back = load_image(&p).unwrap();
            assert_eq!(back.depth, BitDepth::Sixteen);
            assert_eq!(back.image, img);
        }
    }

    #[test]
    fn raw_pgm_is_parsed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("raw.pgm");
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 51, 255, 102, 153, 204]);
        std::fs::write(&p, bytes).unwrap();
        let img = load_image(&p).unwrap().image;
        assert_eq!((img.rows(), img.cols()), (2, 3));
        assert_eq!(img.data(), &[0.0, 0.2, 1.0, 0.4, 0.6, 0.8]);
    }

    #[test]
    fn color_png_becomes_luma() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rgb.png");
        let rgb = image::RgbImage::from_pixel(2, 2, image::Rgb([255, 0, 0]));
        rgb.save(&p).unwrap();
        let img = load_image(&p).unwrap().image;
        assert!(img.data().iter().all(|&v| (v - 0.299).abs() < 1e-12));
    }

    #[test]
    fn missing_file_is_a_read_error() {
        let err = load_image("/nonexistent/x.png").unwrap_err();
        assert!(matches!(err, Error::ImageRead { .. }));
        assert!(err.to_string().starts_with("cannot read image"));
    }
}
