//! Aggregation of reference and synthesized features into one score.
//!
//! Per domain, the four statistical features contribute the mean absolute
//! difference over all `2L` subbands, and granularity/regularity contribute
//! half the largest per-scale difference of each orientation. The score is
//! `sum over domains of ln(1 + alpha * (sum of the six distances))`.

use std::fmt;
use std::str::FromStr;

use crate::features::{extract_rr_features, FeatureSet, Features, Orientation};
use crate::raster::{Boundary, Image};
use crate::{Domain, Error, Result, Scalar, DEFAULT_ALPHA, DEFAULT_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Sigma,
    Kurt,
    Skew,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spatial {
    Granularity,
    Regularity,
}

impl Statistic {
    fn pick<T: Copy>(self, f: &Features<T>) -> T {
        match self {
            Statistic::Sigma => f.sigma,
            Statistic::Kurt => f.kurt,
            Statistic::Skew => f.skew,
            Statistic::Entropy => f.entropy,
        }
    }
}

impl Spatial {
    fn pick<T: Copy>(self, f: &Features<T>) -> T {
        match self {
            Spatial::Granularity => f.g,
            Spatial::Regularity => f.r,
        }
    }
}

fn check_aligned<T: Scalar>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<()> {
    if a.domain() != b.domain() {
        return Err(Error::FeatureSetMismatch(format!(
            "domain {} vs {}",
            a.domain(),
            b.domain()
        )));
    }
    if a.levels() != b.levels() {
        return Err(Error::FeatureSetMismatch(format!(
            "{} levels vs {}",
            a.levels(),
            b.levels()
        )));
    }
    Ok(())
}

/// Mean absolute difference of one statistic over all `2L` subbands.
pub fn delta_stat<T: Scalar>(reference: &FeatureSet<T>, synth: &FeatureSet<T>, stat: Statistic) -> Result<T> {
    check_aligned(reference, synth)?;
    let total = reference
        .subbands()
        .iter()
        .zip(synth.subbands())
        .map(|(a, b)| (stat.pick(a) - stat.pick(b)).abs())
        .sum::<T>();
    Ok(total / T::of_usize(2 * reference.levels()))
}

/// Half the largest per-scale difference in each orientation, summed.
pub fn delta_spatial<T: Scalar>(reference: &FeatureSet<T>, synth: &FeatureSet<T>, stat: Spatial) -> Result<T> {
    check_aligned(reference, synth)?;
    let half = T::of(0.5);
    let mut total = T::zero();
    for o in Orientation::ALL {
        let worst = (1..=reference.levels())
            .map(|j| (stat.pick(reference.get(o, j)) - stat.pick(synth.get(o, j))).abs())
            .fold(T::zero(), T::max);
        total = total + worst * half;
    }
    Ok(total)
}

/// The six distances of one domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainDeltas<T> {
    pub domain: Domain,
    pub dk: T,
    pub dsigma: T,
    pub dskew: T,
    pub dentropy: T,
    pub dg: T,
    pub dr: T,
}

impl<T: Scalar> DomainDeltas<T> {
    pub fn compute(reference: &FeatureSet<T>, synth: &FeatureSet<T>) -> Result<Self> {
        Ok(Self {
            domain: reference.domain(),
            dk: delta_stat(reference, synth, Statistic::Kurt)?,
            dsigma: delta_stat(reference, synth, Statistic::Sigma)?,
            dskew: delta_stat(reference, synth, Statistic::Skew)?,
            dentropy: delta_stat(reference, synth, Statistic::Entropy)?,
            dg: delta_spatial(reference, synth, Spatial::Granularity)?,
            dr: delta_spatial(reference, synth, Spatial::Regularity)?,
        })
    }

    pub fn total(&self) -> T {
        self.dk + self.dsigma + self.dskew + self.dentropy + self.dg + self.dr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deltas<T> {
    pub per_domain: Vec<DomainDeltas<T>>,
}

impl<T: Scalar> Deltas<T> {
    pub fn compute(reference: &[FeatureSet<T>], synth: &[FeatureSet<T>]) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::FeatureSetMismatch("no feature sets".into()));
        }
        if reference.len() != synth.len() {
            return Err(Error::FeatureSetMismatch(format!(
                "{} domains vs {}",
                reference.len(),
                synth.len()
            )));
        }
        let per_domain = reference
            .iter()
            .zip(synth)
            .map(|(a, b)| DomainDeltas::compute(a, b))
            .collect::<Result<_>>()?;
        Ok(Self { per_domain })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score<T> {
    pub value: T,
    pub alpha: T,
    pub levels: usize,
    pub domains: Vec<Domain>,
    pub deltas: Deltas<T>,
}

/// Combines aligned per-domain feature sets into the quality score.
pub fn igstqa<T: Scalar>(reference: &[FeatureSet<T>], synth: &[FeatureSet<T>], alpha: T) -> Result<Score<T>> {
    if !alpha.is_finite() || alpha <= T::zero() {
        return Err(Error::InvalidAlpha);
    }
    let deltas = Deltas::compute(reference, synth)?;
    let value = deltas
        .per_domain
        .iter()
        .map(|d| (alpha * d.total()).ln_1p())
        .fold(T::zero(), |acc, v| acc + v);
    Ok(Score {
        value,
        alpha,
        levels: reference[0].levels(),
        domains: deltas.per_domain.iter().map(|d| d.domain).collect(),
        deltas,
    })
}

/// Which domains enter the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainSelection {
    #[default]
    Both,
    Spatial,
    Gradient,
}

impl DomainSelection {
    pub fn domains(self) -> &'static [Domain] {
        match self {
            DomainSelection::Both => &Domain::ALL,
            DomainSelection::Spatial => &[Domain::Image],
            DomainSelection::Gradient => &[Domain::Gradient],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainSelection::Both => "both",
            DomainSelection::Spatial => "spatial",
            DomainSelection::Gradient => "gradient",
        }
    }

    /// Inverse of [`DomainSelection::domains`].
    pub fn from_domains(domains: &[Domain]) -> Option<Self> {
        [Self::Both, Self::Spatial, Self::Gradient]
            .into_iter()
            .find(|s| s.domains() == domains)
    }
}

impl fmt::Display for DomainSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Self::Both),
            "spatial" => Ok(Self::Spatial),
            "gradient" => Ok(Self::Gradient),
            other => Err(Error::InvalidConfig(format!("unknown domain selection {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub levels: usize,
    pub alpha: f64,
    pub domains: DomainSelection,
    pub boundary: Boundary,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS,
            alpha: DEFAULT_ALPHA,
            domains: DomainSelection::Both,
            boundary: Boundary::Symmetric,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidConfig("levels must be at least 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::InvalidAlpha);
        }
        Ok(())
    }

    pub fn extract<T: Scalar>(&self, img: &Image<T>) -> Result<Vec<FeatureSet<T>>> {
        self.validate()?;
        extract_rr_features(img, self.levels, self.domains.domains(), self.boundary)
    }
}

/// Scores a synthesized texture against a reference. The two images may
/// have different sizes.
pub fn score_pair<T: Scalar>(reference: &Image<T>, synth: &Image<T>, config: &Config) -> Result<Score<T>> {
    config.validate()?;
    let (r, s) = rayon::join(|| config.extract(reference), || config.extract(synth));
    igstqa(&r?, &s?, T::of(config.alpha))
}
