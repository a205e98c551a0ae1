//! Agreement between objective scores and subjective ratings.
//!
//! Scores are mapped onto the DMOS scale with the 4-parameter logistic
//! `q(x) = b1 * (1/2 - 1/(1 + exp(b2 * (x - b3)))) + b4`, then PLCC and RMSE
//! are taken against DMOS; SROCC is computed on the raw scores. DMOS grows
//! with distortion, as does the score, so no sign flip is applied.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{self, PAYLOAD_EXTENSION};
use crate::index::{igstqa, score_pair, Config, DomainSelection};
use crate::io::load_image;
use crate::raster::Boundary;
use crate::{Error, Result};

/// Simplex diameter at which the logistic fit stops.
pub const FIT_TOLERANCE: f64 = 1e-9;
/// Iteration cap of one simplex run.
pub const FIT_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub pair_id: String,
    pub objective: f64,
    pub subjective: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Pearson correlation. Errors when either vector is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 || is_constant(x) || is_constant(y) {
        return Err(Error::DegenerateInput);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn fractional_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman correlation of two columns.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: x.len(),
        });
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::DegenerateRanking);
    }
    pearson(&fractional_ranks(x), &fractional_ranks(y)).map_err(|_| Error::DegenerateRanking)
}

fn columns(records: &[EvalRecord]) -> (Vec<f64>, Vec<f64>) {
    records.iter().map(|r| (r.objective, r.subjective)).unzip()
}

pub fn srocc(records: &[EvalRecord]) -> Result<f64> {
    let (x, y) = columns(records);
    spearman(&x, &y)
}

pub fn rmse(mapped: &[f64], subjective: &[f64]) -> Result<f64> {
    if mapped.len() != subjective.len() {
        return Err(Error::LengthMismatch(mapped.len(), subjective.len()));
    }
    if mapped.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let sse: f64 = mapped.iter().zip(subjective).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / mapped.len() as f64).sqrt())
}

pub fn plcc_rmse(mapped: &[f64], subjective: &[f64]) -> Result<(f64, f64)> {
    if mapped.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: mapped.len(),
        });
    }
    let e = rmse(mapped, subjective)?;
    Ok((pearson(mapped, subjective)?, e))
}

/// `b1 * (1/2 - 1/(1 + exp(b2 * (x - b3)))) + b4`, evaluated through the
/// equivalent `b1/2 * tanh(b2 * (x - b3) / 2) + b4`.
pub fn logistic(params: &[f64; 4], x: f64) -> f64 {
    let [b1, b2, b3, b4] = *params;
    0.5 * b1 * (0.5 * b2 * (x - b3)).tanh() + b4
}

// The simplex works on (slope = b1 * b2, b2, b3, b4). With the slope held
// fixed the curve tends to a straight line as b2 -> 0, so near-linear data is
// reachable instead of sitting at b1 -> infinity.
fn reparam_eval(theta: &[f64; 4], x: f64) -> f64 {
    let [slope, b2, b3, b4] = *theta;
    let u = x - b3;
    let z = 0.5 * b2 * u;
    // tanh(z) / z without the 0/0 at b2 == 0.
    let ratio = if z.abs() < 1e-4 { 1.0 - z * z / 3.0 } else { z.tanh() / z };
    0.25 * slope * u * ratio + b4
}

fn to_standard(theta: &[f64; 4], xs: &[f64]) -> [f64; 4] {
    let [slope, mut b2, b3, b4] = *theta;
    let span = xs.iter().map(|x| (x - b3).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // Smallest b2 whose curvature over the data range is below 1e-13 relative.
    let floor = 1e-6 / span;
    if b2.abs() < floor {
        b2 = if b2 < 0.0 { -floor } else { floor };
    }
    [slope / b2, b2, b3, b4]
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    /// `[b1, b2, b3, b4]`.
    pub params: [f64; 4],
    pub mapped: Vec<f64>,
}

/// Least-squares logistic fit of subjective on objective scores by
/// Nelder-Mead. Two deterministic starts are run: the classic one
/// (b1 = subjective range, b2 = 1 / std(objective), b3 = mean objective,
/// b4 = mean subjective) and the least-squares line; the lower residual wins.
pub fn logistic_fit(records: &[EvalRecord]) -> Result<LogisticFit> {
    if records.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            got: records.len(),
        });
    }
    let (x, y) = columns(records);
    let mx = mean(&x);
    let my = mean(&y);
    let sx = (x.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>() / x.len() as f64).sqrt();
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let sse = |theta: &[f64; 4]| -> f64 {
        x.iter()
            .zip(&y)
            .map(|(&xi, &yi)| {
                let e = reparam_eval(theta, xi) - yi;
                e * e
            })
            .sum()
    };

    let mut starts = Vec::new();
    if sx > 0.0 {
        let b2 = 1.0 / sx;
        starts.push([(ymax - ymin) * b2, b2, mx, my]);
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / (sx * sx * x.len() as f64);
        starts.push([4.0 * slope, 0.0, mx, my]);
    } else {
        starts.push([0.0, 0.0, mx, my]);
    }
    let scales = [(ymax - ymin).max(1e-3) / sx.max(1e-12), 1.0 / sx.max(1e-12), sx.max(1e-3), (ymax - ymin).max(1e-3)];

    let mut best: Option<([f64; 4], f64)> = None;
    for start in starts {
        let (theta, value) = nelder_mead(&sse, start, &scales);
        if !value.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((theta, value));
        }
    }
    let (theta, _) = best.ok_or_else(|| Error::Numerical("logistic fit diverged".into()))?;
    let params = to_standard(&theta, &x);
    let mapped: Vec<f64> = x.iter().map(|&v| logistic(&params, v)).collect();
    if mapped.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite mapped score".into()));
    }
    Ok(LogisticFit { params, mapped })
}

/// Nelder-Mead with standard coefficients (1, 2, 1/2, 1/2). Stops when every
/// vertex lies within [`FIT_TOLERANCE`] of the best one (max-norm) or after
/// [`FIT_MAX_ITER`] iterations.
fn nelder_mead(f: &impl Fn(&[f64; 4]) -> f64, start: [f64; 4], scales: &[f64; 4]) -> ([f64; 4], f64) {
    const N: usize = 4;
    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, f(&start)));
    for i in 0..N {
        let mut p = start;
        let step = if p[i] != 0.0 { 0.1 * p[i].abs() } else { 0.1 * scales[i] };
        p[i] += step;
        simplex.push((p, f(&p)));
    }

    let along = |a: &[f64; 4], b: &[f64; 4], t: f64| -> [f64; 4] {
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        out
    };

    for _ in 0..FIT_MAX_ITER {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < FIT_TOLERANCE {
            break;
        }
        let mut centroid = [0.0; N];
        for (p, _) in &simplex[..N] {
            for k in 0..N {
                centroid[k] += p[k] / N as f64;
            }
        }
        let worst = simplex[N];
        let reflected = along(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            simplex[N] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                along(&centroid, &reflected, 0.5)
            } else {
                along(&centroid, &worst.0, 0.5)
            };
            let fc = f(&contracted);
            if fc < worst.1.min(fr) {
                simplex[N] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = along(&best, &v.0, 0.5);
                    *v = (p, f(&p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// Subjective databases with published results for this index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Database {
    SyntexGranularity,
    ParametricQa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triple {
    pub plcc: f64,
    pub srocc: f64,
    pub rmse: f64,
}

impl Database {
    pub fn name(self) -> &'static str {
        match self {
            Database::SyntexGranularity => "syntex-granularity",
            Database::ParametricQa => "parametric-qa",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "syntex" | "syntex-granularity" => Ok(Database::SyntexGranularity),
            "parametric" | "parametric-qa" => Ok(Database::ParametricQa),
            other => Err(Error::InvalidConfig(format!("unknown database {other:?}"))),
        }
    }

    /// Published results of this index on the database.
    pub fn published(self) -> Triple {
        match self {
            Database::SyntexGranularity => Triple {
                plcc: 0.816,
                srocc: 0.820,
                rmse: 0.718,
            },
            Database::ParametricQa => Triple {
                plcc: 0.733,
                srocc: 0.679,
                rmse: 0.170,
            },
        }
    }

    /// Best competing metric on the database (STQA on both).
    pub fn strongest_competitor(self) -> (&'static str, Triple) {
        match self {
            Database::SyntexGranularity => (
                "STQA",
                Triple {
                    plcc: 0.770,
                    srocc: 0.777,
                    rmse: 0.792,
                },
            ),
            Database::ParametricQa => (
                "STQA",
                Triple {
                    plcc: 0.532,
                    srocc: 0.520,
                    rmse: 0.250,
                },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub levels: usize,
    pub alpha: f64,
    pub domains: String,
    pub boundary: String,
}

impl From<&Config> for ReportConfig {
    fn from(c: &Config) -> Self {
        Self {
            levels: c.levels,
            alpha: c.alpha,
            domains: c.domains.name().to_string(),
            boundary: match c.boundary {
                Boundary::Symmetric => "symmetric",
                Boundary::Periodic => "periodic",
            }
            .to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Competitor {
    pub name: String,
    #[serde(flatten)]
    pub values: Triple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedComparison {
    pub database: String,
    pub published: Triple,
    pub strongest_competitor: Competitor,
    pub srocc_exceeds_strongest_competitor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub plcc: f64,
    pub srocc: f64,
    pub rmse: f64,
    pub logistic_params: [f64; 4],
    pub n: usize,
    pub config: ReportConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<PublishedComparison>,
}

impl EvalReport {
    pub fn from_records(records: &[EvalRecord], config: &Config, database: Option<Database>) -> Result<Self> {
        let fit = logistic_fit(records)?;
        let subjective: Vec<f64> = records.iter().map(|r| r.subjective).collect();
        let (plcc, rmse) = plcc_rmse(&fit.mapped, &subjective)?;
        let srocc = srocc(records)?;
        let comparison = database.map(|db| {
            let (name, values) = db.strongest_competitor();
            PublishedComparison {
                database: db.name().to_string(),
                published: db.published(),
                strongest_competitor: Competitor {
                    name: name.to_string(),
                    values,
                },
                srocc_exceeds_strongest_competitor: srocc > values.srocc,
            }
        });
        Ok(Self {
            plcc,
            srocc,
            rmse,
            logistic_params: fit.params,
            n: records.len(),
            config: config.into(),
            comparison,
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Fixed-width table: one row for this run, plus the published rows when
    /// a database was named. `bold` wraps the header in ANSI bold.
    pub fn render_table(&self, bold: bool) -> String {
        let domains = self.config.domains.parse::<DomainSelection>().unwrap_or_default();
        let per_level = 12 * domains.domains().len();
        let features = format!("{per_level}L = {}", per_level * self.config.levels);
        let header = format!("{:<24} {:>12} {:>7} {:>7} {:>7}", "Metric", "# Features", "PLCC", "SROCC", "RMSE");
        let rule = "-".repeat(header.len());
        let mut out = String::new();
        if bold {
            let _ = writeln!(out, "\x1b[1m{header}\x1b[0m");
        } else {
            let _ = writeln!(out, "{header}");
        }
        let _ = writeln!(out, "{rule}");
        let row = |out: &mut String, name: &str, feat: &str, t: Triple| {
            let _ = writeln!(out, "{name:<24} {feat:>12} {:>7.3} {:>7.3} {:>7.3}", t.plcc, t.srocc, t.rmse);
        };
        let here = Triple {
            plcc: self.plcc,
            srocc: self.srocc,
            rmse: self.rmse,
        };
        row(&mut out, &format!("IGSTQA ({})", self.config.domains), &features, here);
        if let Some(c) = &self.comparison {
            row(&mut out, "IGSTQA (published)", "24L", c.published);
            row(&mut out, &format!("{} (published)", c.strongest_competitor.name), "7", c.strongest_competitor.values);
            let _ = writeln!(out, "{rule}");
            let _ = writeln!(
                out,
                "database: {}  n = {}  SROCC {} strongest competitor",
                c.database,
                self.n,
                if c.srocc_exceeds_strongest_competitor { "exceeds" } else { "does not exceed" }
            );
        } else {
            let _ = writeln!(out, "{rule}");
            let _ = writeln!(out, "n = {}", self.n);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub pair_id: String,
    pub reference: PathBuf,
    pub synth: PathBuf,
    pub dmos: f64,
}

/// Reads a `pair_id,ref,syn,dmos` CSV. Relative paths resolve against the
/// manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Manifest(e.to_string()))?.clone();
    let expected = ["pair_id", "ref", "syn", "dmos"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Manifest(format!(
            "header must be {}, got {}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Manifest(format!("line {}: {e}", i + 2)))?;
        let pair_id = rec[0].to_string();
        let bad = |msg: String| Error::Row {
            pair_id: pair_id.clone(),
            source: Box::new(Error::Manifest(msg)),
        };
        let dmos: f64 = rec[3].parse().map_err(|_| bad(format!("invalid dmos {:?}", &rec[3])))?;
        if !dmos.is_finite() {
            return Err(bad("non-finite dmos".into()));
        }
        if !seen.insert(pair_id.clone()) {
            return Err(bad("duplicate pair_id".into()));
        }
        rows.push(ManifestRow {
            reference: base.join(&rec[1]),
            synth: base.join(&rec[2]),
            pair_id,
            dmos,
        });
    }
    Ok(rows)
}

pub fn is_payload_path(path: &Path) -> bool {
    path.to_str().is_some_and(|s| s.ends_with(PAYLOAD_EXTENSION))
}

/// Loads a payload and checks it was extracted under `config`.
pub fn load_payload(path: &Path, config: &Config) -> Result<codec::RRPayload> {
    let payload = codec::decode(&std::fs::read(path)?)?;
    if payload.wavelet_id != codec::HAAR {
        return Err(Error::FeatureSetMismatch(format!("wavelet {:?}", payload.wavelet_id)));
    }
    if payload.levels != config.levels {
        return Err(Error::FeatureSetMismatch(format!(
            "payload has {} levels, config {}",
            payload.levels, config.levels
        )));
    }
    if payload.domains() != config.domains.domains() {
        return Err(Error::FeatureSetMismatch(format!(
            "payload domains {:?}, config {}",
            payload.domains().iter().map(|d| d.tag()).collect::<Vec<_>>(),
            config.domains
        )));
    }
    Ok(payload)
}

/// Scores a synthesized image against a reference image or payload path.
pub fn score_paths(reference: &Path, synth: &Path, config: &Config) -> Result<f64> {
    let syn = load_image(synth)?.image;
    if is_payload_path(reference) {
        let payload = load_payload(reference, config)?;
        let syn_sets = config.extract(&syn)?;
        Ok(igstqa(&payload.feature_sets, &syn_sets, config.alpha)?.value)
    } else {
        let reference = load_image(reference)?.image;
        Ok(score_pair(&reference, &syn, config)?.value)
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub report: EvalReport,
    /// Sorted by `pair_id`.
    pub records: Vec<EvalRecord>,
}

/// Scores every manifest row (on `jobs` threads), then fits and reports.
/// Any failing row aborts the run.
pub fn run_benchmark(manifest: &Path, config: &Config, jobs: usize, database: Option<Database>) -> Result<BenchmarkOutcome> {
    config.validate()?;
    let rows = read_manifest(manifest)?;
    if rows.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            got: rows.len(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let scored: Vec<Result<EvalRecord>> = pool.install(|| {
        rows.par_iter()
            .map(|row| {
                let objective = score_paths(&row.reference, &row.synth, config).map_err(|e| Error::Row {
                    pair_id: row.pair_id.clone(),
                    source: Box::new(e),
                })?;
                Ok(EvalRecord {
                    pair_id: row.pair_id.clone(),
                    objective,
                    subjective: row.dmos,
                })
            })
            .collect()
    });
    let mut records = scored.into_iter().collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    let report = EvalReport::from_records(&records, config, database)?;
    Ok(BenchmarkOutcome { report, records })
}
