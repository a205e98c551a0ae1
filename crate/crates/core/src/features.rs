//! Reduced-reference texture features.
//!
//! Every detail subband is summarized by six scalars: granularity and
//! regularity (mean and standard deviation of the distances between adjacent
//! peaks of the coefficient magnitudes), and the standard deviation, kurtosis,
//! skewness and mean log-energy of the raw coefficients.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::raster::{gradient_magnitude, Boundary, Image};
use crate::uwt::{decompose, max_levels};
use crate::{Error, Result, Scalar};

/// Smallest image side accepted by feature extraction.
pub const MIN_SIDE: usize = 8;

/// Number of scalars stored per subband.
pub const SCALARS_PER_SUBBAND: usize = 6;

/// Below this standard deviation skewness and kurtosis are reported as 0.
const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    /// The texture itself.
    Image,
    /// Its gradient magnitude.
    Gradient,
}

impl Domain {
    pub const ALL: [Domain; 2] = [Domain::Image, Domain::Gradient];

    pub fn tag(self) -> &'static str {
        match self {
            Domain::Image => "I",
            Domain::Gradient => "IGM",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(Domain::Image),
            "IGM" => Ok(Domain::Gradient),
            other => Err(Error::InvalidConfig(format!("unknown domain tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `hh` bands, peaks scanned along rows.
    H,
    /// `vh` bands, peaks scanned along columns.
    V,
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::H, Orientation::V];

    pub fn tag(self) -> &'static str {
        match self {
            Orientation::H => "H",
            Orientation::V => "V",
        }
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Orientation::H),
            "V" => Ok(Orientation::V),
            other => Err(Error::InvalidConfig(format!("unknown orientation {other:?}"))),
        }
    }
}

/// The six features of one subband.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Features<T> {
    pub g: T,
    pub r: T,
    pub sigma: T,
    pub kurt: T,
    pub skew: T,
    pub entropy: T,
}

impl<T: Scalar> Features<T> {
    pub fn to_array(&self) -> [T; SCALARS_PER_SUBBAND] {
        [self.g, self.r, self.sigma, self.kurt, self.skew, self.entropy]
    }

    pub fn from_array(a: [T; SCALARS_PER_SUBBAND]) -> Self {
        let [g, r, sigma, kurt, skew, entropy] = a;
        Self {
            g,
            r,
            sigma,
            kurt,
            skew,
            entropy,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Features of all `2L` subbands of one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    domain: Domain,
    levels: usize,
    // H scales 1..=L followed by V scales 1..=L.
    subbands: Vec<Features<T>>,
}

impl<T: Scalar> FeatureSet<T> {
    /// `subbands` is ordered H1..HL, V1..VL.
    pub fn new(domain: Domain, levels: usize, subbands: Vec<Features<T>>) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidConfig("levels must be at least 1".into()));
        }
        if subbands.len() != 2 * levels {
            return Err(Error::FeatureSetMismatch(format!(
                "{} subbands for {levels} levels",
                subbands.len()
            )));
        }
        Ok(Self {
            domain,
            levels,
            subbands,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Features at `scale` (1-based).
    pub fn get(&self, orientation: Orientation, scale: usize) -> &Features<T> {
        assert!((1..=self.levels).contains(&scale), "scale {scale} out of range");
        let base = match orientation {
            Orientation::H => 0,
            Orientation::V => self.levels,
        };
        &self.subbands[base + scale - 1]
    }

    pub fn get_mut(&mut self, orientation: Orientation, scale: usize) -> &mut Features<T> {
        assert!((1..=self.levels).contains(&scale), "scale {scale} out of range");
        let base = match orientation {
            Orientation::H => 0,
            Orientation::V => self.levels,
        };
        &mut self.subbands[base + scale - 1]
    }

    /// `(orientation, scale, features)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Orientation, usize, &Features<T>)> {
        let l = self.levels;
        self.subbands.iter().enumerate().map(move |(i, f)| {
            let o = if i < l { Orientation::H } else { Orientation::V };
            (o, i % l + 1, f)
        })
    }

    pub fn subbands(&self) -> &[Features<T>] {
        &self.subbands
    }

    pub fn scalar_count(&self) -> usize {
        self.subbands.len() * SCALARS_PER_SUBBAND
    }

    /// All scalars, subband by subband.
    pub fn to_vec(&self) -> Vec<T> {
        self.subbands.iter().flat_map(|f| f.to_array()).collect()
    }
}

/// Distances between consecutive peaks of `line`.
///
/// A peak is an interior sample strictly above both neighbours; a run of
/// equal samples strictly above the samples on either side of it counts once,
/// at its leftmost index.
pub fn detect_peak_distances<T: PartialOrd + Copy>(line: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    let n = line.len();
    let mut i = 1;
    while i + 1 < n {
        if line[i] > line[i - 1] {
            let mut end = i;
            while end + 1 < n && line[end + 1] == line[i] {
                end += 1;
            }
            if end + 1 < n && line[end + 1] < line[i] {
                if let Some(p) = last {
                    out.push(i - p);
                }
                last = Some(i);
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Granularity and regularity of a subband: mean and population standard
/// deviation of the inter-peak distances of `|coefficients|`, pooled over all
/// rows (`H`) or all columns (`V`). Both are 0 without any distance; `r` is 0
/// with a single one.
pub fn granularity_regularity<T: Scalar>(subband: &Image<T>, orientation: Orientation) -> (T, T) {
    let (rows, cols) = (subband.rows(), subband.cols());
    let mut distances = Vec::new();
    match orientation {
        Orientation::H => {
            let mut line = vec![T::zero(); cols];
            for r in 0..rows {
                for (dst, src) in line.iter_mut().zip(subband.row(r)) {
                    *dst = src.abs();
                }
                distances.extend(detect_peak_distances(&line));
            }
        }
        Orientation::V => {
            let mut line = vec![T::zero(); rows];
            for c in 0..cols {
                for (r, dst) in line.iter_mut().enumerate() {
                    *dst = subband.get(r, c).abs();
                }
                distances.extend(detect_peak_distances(&line));
            }
        }
    }
    if distances.is_empty() {
        return (T::zero(), T::zero());
    }
    let n = T::of_usize(distances.len());
    let total: usize = distances.iter().sum();
    let mean = T::of_usize(total) / n;
    let var = distances
        .iter()
        .map(|&d| {
            let e = T::of_usize(d) - mean;
            e * e
        })
        .sum::<T>()
        / n;
    (mean, var.sqrt())
}

/// Moment and entropy features of one subband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub sigma: T,
    pub kurt: T,
    pub skew: T,
    pub entropy: T,
}

/// Population moments of the signed coefficients and their mean log-energy
/// `(1/n) * sum(ln(c^2))` with `ln(0) := 0`. Kurtosis is non-excess.
///
/// The coefficients are summed in sorted order, so the result depends only on
/// the coefficient multiset.
pub fn subband_statistics<T: Scalar>(coeffs: &[T]) -> Result<Moments<T>> {
    if coeffs.len() < 2 {
        return Err(Error::DegenerateSubband);
    }
    let mut sorted = coeffs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
    let n = T::of_usize(sorted.len());
    let two = T::of(2.0);

    let entropy = sorted
        .iter()
        .map(|&c| if c == T::zero() { T::zero() } else { two * c.abs().ln() })
        .sum::<T>()
        / n;

    let mu = sorted.iter().copied().sum::<T>() / n;
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &c in &sorted {
        let e = c - mu;
        let e2 = e * e;
        m2 = m2 + e2;
        m3 = m3 + e2 * e;
        m4 = m4 + e2 * e2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let sigma = m2.sqrt();
    if sigma < T::of(SIGMA_FLOOR) {
        return Ok(Moments {
            sigma: T::zero(),
            kurt: T::zero(),
            skew: T::zero(),
            entropy,
        });
    }
    Ok(Moments {
        sigma,
        kurt: m4 / (m2 * m2),
        skew: m3 / (m2 * sigma),
        entropy,
    })
}

fn subband_features<T: Scalar>(band: &Image<T>, orientation: Orientation) -> Result<Features<T>> {
    let (g, r) = granularity_regularity(band, orientation);
    let m = subband_statistics(band.data())?;
    Ok(Features {
        g,
        r,
        sigma: m.sigma,
        kurt: m.kurt,
        skew: m.skew,
        entropy: m.entropy,
    })
}

/// Features of a single already-prepared domain image.
pub fn domain_features<T: Scalar>(
    domain_img: &Image<T>,
    domain: Domain,
    levels: usize,
    boundary: Boundary,
) -> Result<FeatureSet<T>> {
    let pyramid = decompose(domain_img, levels, boundary)?;
    let mut h = Vec::with_capacity(levels);
    let mut v = Vec::with_capacity(levels);
    for lvl in pyramid.iter() {
        h.push(subband_features(&lvl.hh, Orientation::H)?);
        v.push(subband_features(&lvl.vh, Orientation::V)?);
    }
    h.extend(v);
    FeatureSet::new(domain, levels, h)
}

/// Extracts one feature set per requested domain, in `Image`, `Gradient`
/// order regardless of the order in `domains`.
pub fn extract_rr_features<T: Scalar>(
    img: &Image<T>,
    levels: usize,
    domains: &[Domain],
    boundary: Boundary,
) -> Result<Vec<FeatureSet<T>>> {
    if domains.is_empty() {
        return Err(Error::InvalidConfig("at least one domain is required".into()));
    }
    if levels == 0 {
        return Err(Error::InvalidConfig("levels must be at least 1".into()));
    }
    if img.rows() < MIN_SIDE || img.cols() < MIN_SIDE {
        return Err(Error::TooSmallForFeatures {
            rows: img.rows(),
            cols: img.cols(),
        });
    }
    if levels > max_levels(img.rows(), img.cols()) {
        return Err(Error::TooManyLevels);
    }
    let mut wanted: Vec<Domain> = domains.to_vec();
    wanted.sort();
    wanted.dedup();
    wanted
        .par_iter()
        .map(|&domain| match domain {
            Domain::Image => domain_features(img, domain, levels, boundary),
            Domain::Gradient => {
                let gm = gradient_magnitude(img, boundary)?;
                domain_features(&gm, domain, levels, boundary)
            }
        })
        .collect()
}
