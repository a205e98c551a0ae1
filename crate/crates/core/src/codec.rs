//! Reduced-reference payload: the features a sender ships alongside (not
//! instead of) the synthesized texture.
//!
//! The wire format is canonical JSON: keys in a fixed order, two-space
//! indentation, `\n` line endings and a trailing newline. Reals are written
//! as the shortest decimal that parses back to the same `f64`, so
//! `decode(encode(p)) == p` holds bit for bit. Files conventionally use the
//! `.igstqa.json` extension.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::features::{Domain, FeatureSet, Features, Orientation, SCALARS_PER_SUBBAND};
use crate::index::Config;
use crate::{Error, GrayImage, RRFeatureSet, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const HAAR: &str = "haar";
pub const PAYLOAD_EXTENSION: &str = ".igstqa.json";

#[derive(Debug, Clone, PartialEq)]
pub struct RRPayload {
    pub format_version: u32,
    pub wavelet_id: String,
    pub levels: usize,
    pub alpha: f64,
    pub image_id: String,
    pub feature_sets: Vec<RRFeatureSet>,
}

impl RRPayload {
    /// Extracts the reference-side features of `img` under `config`.
    pub fn from_image(img: &GrayImage, config: &Config) -> Result<Self> {
        Ok(Self {
            format_version: FORMAT_VERSION,
            wavelet_id: HAAR.to_string(),
            levels: config.levels,
            alpha: config.alpha,
            image_id: content_id(img),
            feature_sets: config.extract(img)?,
        })
    }

    pub fn domains(&self) -> Vec<Domain> {
        self.feature_sets.iter().map(|s| s.domain()).collect()
    }

    pub fn scalar_count(&self) -> usize {
        self.feature_sets.iter().map(|s| s.scalar_count()).sum()
    }
}

/// `sha256:<hex>` over the image shape and the bit patterns of its samples.
pub fn content_id(img: &GrayImage) -> String {
    let mut h = Sha256::new();
    h.update((img.rows() as u64).to_le_bytes());
    h.update((img.cols() as u64).to_le_bytes());
    for v in img.data() {
        h.update(v.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(7 + 64);
    out.push_str("sha256:");
    for b in digest.iter() {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct WirePayload {
    format_version: u32,
    wavelet_id: String,
    levels: usize,
    alpha: f64,
    image_id: String,
    feature_sets: Vec<WireSet>,
}

#[derive(Serialize, Deserialize)]
struct WireSet {
    domain: String,
    subbands: Vec<WireSubband>,
}

#[derive(Serialize, Deserialize)]
struct WireSubband {
    orientation: String,
    scale: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kurt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    skew: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entropy: Option<f64>,
}

impl WireSubband {
    fn values(&self) -> [Option<f64>; SCALARS_PER_SUBBAND] {
        [self.g, self.r, self.sigma, self.kurt, self.skew, self.entropy]
    }
}

pub fn encode(payload: &RRPayload) -> Result<Vec<u8>> {
    if !payload.alpha.is_finite() || payload.feature_sets.iter().any(|s| s.subbands().iter().any(|f| !f.is_finite())) {
        return Err(Error::NonFiniteFeature);
    }
    let wire = WirePayload {
        format_version: payload.format_version,
        wavelet_id: payload.wavelet_id.clone(),
        levels: payload.levels,
        alpha: payload.alpha,
        image_id: payload.image_id.clone(),
        feature_sets: payload
            .feature_sets
            .iter()
            .map(|set| WireSet {
                domain: set.domain().tag().to_string(),
                subbands: set
                    .iter()
                    .map(|(o, j, f)| WireSubband {
                        orientation: o.tag().to_string(),
                        scale: j,
                        g: Some(f.g),
                        r: Some(f.r),
                        sigma: Some(f.sigma),
                        kurt: Some(f.kurt),
                        skew: Some(f.skew),
                        entropy: Some(f.entropy),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&wire).map_err(|e| Error::Parse(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn decode(bytes: &[u8]) -> Result<RRPayload> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => return Err(Error::UnsupportedVersion(v.min(u32::MAX as u64) as u32)),
        None => return Err(Error::Parse("missing format_version".into())),
    }
    let wire: WirePayload = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let corrupt = |msg: String| Error::CorruptPayload(msg);

    let levels = wire.levels;
    if levels == 0 {
        return Err(corrupt("levels must be at least 1".into()));
    }
    let expected = wire.feature_sets.len() * 2 * levels * SCALARS_PER_SUBBAND;
    let found: usize = wire
        .feature_sets
        .iter()
        .flat_map(|s| &s.subbands)
        .map(|b| b.values().iter().filter(|v| v.is_some()).count())
        .sum();
    if found != expected {
        return Err(corrupt(format!(
            "{found} feature scalars, expected {expected} for {levels} levels and {} domains",
            wire.feature_sets.len()
        )));
    }

    let mut sets = Vec::with_capacity(wire.feature_sets.len());
    for ws in &wire.feature_sets {
        let domain: Domain = ws.domain.parse().map_err(|_| corrupt(format!("unknown domain {:?}", ws.domain)))?;
        if ws.subbands.len() != 2 * levels {
            return Err(corrupt(format!("domain {domain}: {} subbands", ws.subbands.len())));
        }
        let mut slots: Vec<Option<Features<f64>>> = vec![None; 2 * levels];
        for b in &ws.subbands {
            let o: Orientation = b
                .orientation
                .parse()
                .map_err(|_| corrupt(format!("unknown orientation {:?}", b.orientation)))?;
            if !(1..=levels).contains(&b.scale) {
                return Err(corrupt(format!("scale {} out of range", b.scale)));
            }
            let idx = match o {
                Orientation::H => 0,
                Orientation::V => levels,
            } + b.scale
                - 1;
            let vals = b.values();
            let mut arr = [0.0; SCALARS_PER_SUBBAND];
            for (dst, src) in arr.iter_mut().zip(vals) {
                *dst = src.ok_or_else(|| corrupt("missing feature scalar".into()))?;
            }
            if slots[idx].replace(Features::from_array(arr)).is_some() {
                return Err(corrupt(format!("duplicate subband {}{}", o.tag(), b.scale)));
            }
        }
        let subbands = slots.into_iter().map(|s| s.unwrap()).collect();
        sets.push(FeatureSet::new(domain, levels, subbands)?);
    }
    let mut domains: Vec<Domain> = sets.iter().map(|s| s.domain()).collect();
    domains.dedup();
    if sets.is_empty() || domains.len() != sets.len() || !domains.windows(2).all(|w| w[0] < w[1]) {
        return Err(corrupt("feature sets must list distinct domains in I, IGM order".into()));
    }

    Ok(RRPayload {
        format_version: wire.format_version,
        wavelet_id: wire.wavelet_id,
        levels,
        alpha: wire.alpha,
        image_id: wire.image_id,
        feature_sets: sets,
    })
}
