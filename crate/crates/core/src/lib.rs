//! Reduced-reference quality index for synthesized textures.
//!
//! The reference side reduces a texture to a compact feature payload: for the
//! image and its gradient magnitude, an undecimated Haar decomposition is
//! computed and every horizontal/vertical detail subband is summarized by six
//! scalars (granularity, regularity, standard deviation, kurtosis, skewness
//! and mean log-energy). The receiver extracts the same features from a
//! synthesized texture and folds the per-feature distances into one score,
//! where 0 means identical features and larger means more distorted.
//!
//! The numeric core is generic over the scalar type ([`Scalar`], implemented
//! for `f32` and `f64`). The `f64` instantiations used by the codec, the
//! evaluation harness and the CLI are exported as plain aliases below.

pub mod codec;
pub mod distort;
mod error;
pub mod eval;
pub mod features;
pub mod index;
pub mod io;
pub mod patterns;
pub mod raster;
pub mod rng;
mod scalar;
pub mod uwt;

pub use crate::error::{Error, Result};
pub use crate::scalar::Scalar;

pub use crate::features::{extract_rr_features, Domain, Orientation};
pub use crate::raster::{gradient_magnitude, to_grayscale, Boundary, Image};
pub use crate::index::{igstqa, score_pair, Config, DomainSelection};
pub use crate::uwt::decompose;

/// Default number of decomposition levels.
pub const DEFAULT_LEVELS: usize = 4;
/// Default sensitivity of the log aggregation.
pub const DEFAULT_ALPHA: f64 = 100.0;

pub type GrayImage = raster::Image<f64>;
pub type GrayImage32 = raster::Image<f32>;
pub type WaveletPyramid = uwt::Pyramid<f64>;
pub type WaveletPyramid32 = uwt::Pyramid<f32>;
pub type SubbandFeatures = features::Features<f64>;
pub type SubbandFeatures32 = features::Features<f32>;
pub type RRFeatureSet = features::FeatureSet<f64>;
pub type RRFeatureSet32 = features::FeatureSet<f32>;
pub type DeltaSet = index::Deltas<f64>;
pub type DeltaSet32 = index::Deltas<f32>;
pub type QualityScore = index::Score<f64>;
pub type QualityScore32 = index::Score<f32>;
