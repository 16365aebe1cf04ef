//! Model-selection simulations: random designs with a planted sparse
//! signal, the lasso path over a `10p`-point grid, and the best relative
//! selection error reachable anywhere on that path.
//!
//! Every replicate draws from its own ChaCha streams keyed by
//! `(seed, replicate)`, so results do not depend on scheduling.

use std::io::Write;

use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::format_g17;
use crate::solver::{default_lambda_grid, lasso_path, log_lambda_grid, SolverConfig, DEFAULT_GRID_RATIO};
use crate::types::{encode_signed, DesignMatrix, Sign, SignedModel};

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;
pub const HISTOGRAM_MAX: f64 = 2.0;

const STREAM_DESIGN: u64 = 0;
const STREAM_FACTOR: u64 = 1;
const STREAM_SIGNAL: u64 = 2;
const STREAM_NOISE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DesignKind {
    IidGaussian,
    /// Unit-variance rows with every pairwise correlation equal to `corr`.
    Equicorrelated { corr: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub signal: f64,
    pub noise_sd: f64,
    pub design: DesignKind,
    pub replicates: usize,
    /// Defaults to `10p` when `None`.
    pub lambda_grid_size: Option<usize>,
    pub seed: u64,
    pub random_signs: bool,
    pub keep_path_errors: bool,
}

impl ExperimentConfig {
    pub fn new(n: usize, p: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            k,
            signal: 10.0,
            noise_sd: 1.0,
            design: DesignKind::IidGaussian,
            replicates: 200,
            lambda_grid_size: None,
            seed,
            random_signs: false,
            keep_path_errors: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidConfig("n and p must be positive".into()));
        }
        if self.k > self.p {
            return Err(Error::InvalidConfig(format!("k = {} exceeds p = {}", self.k, self.p)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if !self.signal.is_finite() || !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidConfig("signal and noise_sd must be finite, noise_sd >= 0".into()));
        }
        if let DesignKind::Equicorrelated { corr } = self.design {
            if !(0.0..1.0).contains(&corr) {
                return Err(Error::InvalidConfig(format!("correlation must lie in [0, 1), got {corr}")));
            }
        }
        if self.lambda_grid_size == Some(0) {
            return Err(Error::InvalidConfig("lambda grid needs at least one point".into()));
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.lambda_grid_size.unwrap_or(10 * self.p)
    }
}

/// Mixes `(seed, replicate)` into a single 64-bit seed (splitmix64 finalizer).
pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    let mut z = seed ^ (replicate as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, replicate: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(seed, replicate));
    rng.set_stream(stream);
    rng
}

/// Draws the design of one replicate.
///
/// The equicorrelated design uses the one-factor form
/// `x_i = sqrt(corr) g_i 1 + sqrt(1 - corr) z_i`, with the `z` entries
/// taken from the same stream as the iid design; `corr = 0` reproduces the
/// iid design bit for bit.
pub fn gen_design(cfg: &ExperimentConfig, replicate: usize) -> DesignMatrix {
    let (n, p) = (cfg.n, cfg.p);
    let mut rng = stream(cfg.seed, replicate, STREAM_DESIGN);
    // column-major fill
    let mut data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    if let DesignKind::Equicorrelated { corr } = cfg.design {
        let mut factor_rng = stream(cfg.seed, replicate, STREAM_FACTOR);
        let factors: Vec<f64> = (0..n).map(|_| factor_rng.sample(StandardNormal)).collect();
        let (a, b) = (corr.sqrt(), (1.0 - corr).sqrt());
        for (idx, v) in data.iter_mut().enumerate() {
            *v = a * factors[idx % n] + b * *v;
        }
    }
    DesignMatrix::from_column_major(n, p, data).expect("generated design is finite")
}

/// Plants `k` entries of magnitude `signal` at uniformly chosen positions.
pub fn gen_signal(p: usize, k: usize, signal: f64, seed: u64, replicate: usize) -> (Vec<f64>, SignedModel) {
    gen_signal_with_signs(p, k, signal, seed, replicate, false)
}

/// As [`gen_signal`], optionally with independent random signs.
pub fn gen_signal_with_signs(
    p: usize,
    k: usize,
    signal: f64,
    seed: u64,
    replicate: usize,
    random_signs: bool,
) -> (Vec<f64>, SignedModel) {
    let mut rng = stream(seed, replicate, STREAM_SIGNAL);
    let mut beta = vec![0.0; p];
    let mut indices = Vec::with_capacity(k);
    for pos in index::sample(&mut rng, p, k).into_iter() {
        let sign = if random_signs && rng.random::<bool>() { Sign::Negative } else { Sign::Positive };
        beta[pos] = if sign == Sign::Positive { signal } else { -signal };
        indices.push(encode_signed(pos, sign, p));
    }
    let model = SignedModel::new(p, indices).expect("distinct positions");
    (beta, model)
}

/// `|truth Δ estimate| / |truth|` over signed indices; a sign flip counts twice.
pub fn relative_selection_error(truth: &SignedModel, estimate: &SignedModel) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    if truth.p() != estimate.p() {
        return Err(Error::DimensionMismatch("models are over different p".into()));
    }
    Ok(truth.symmetric_difference_len(estimate) as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub support_size: usize,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub replicate: usize,
    pub best_error: f64,
    pub argmin_lambda: f64,
    pub best_support_size: usize,
    pub path_errors: Option<Vec<PathPoint>>,
}

/// Runs the lasso path and keeps the smallest selection error, preferring
/// the larger lambda on ties. An empty grid in `solver` selects the default
/// `10p`-point grid.
pub fn best_error_along_path(
    x0: &DesignMatrix,
    y: &[f64],
    truth: &SignedModel,
    solver: &SolverConfig,
    keep_path: bool,
) -> Result<ErrorRecord> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let cfg = if solver.lambda_grid.is_empty() {
        solver.clone().with_grid(default_lambda_grid(x0, y)?)
    } else {
        solver.clone()
    };
    let path = lasso_path(x0, y, &cfg)?;
    let mut best: Option<(f64, f64, usize)> = None;
    let mut points = keep_path.then(|| Vec::with_capacity(path.len()));
    for (lambda, sol) in &path {
        let err = relative_selection_error(truth, &sol.support)?;
        if best.is_none_or(|(b, _, _)| err < b) {
            best = Some((err, *lambda, sol.support.len()));
        }
        if let Some(pts) = points.as_mut() {
            pts.push(PathPoint { lambda: *lambda, support_size: sol.support.len(), error: err });
        }
    }
    let (best_error, argmin_lambda, best_support_size) = best.expect("nonempty path");
    Ok(ErrorRecord { replicate: 0, best_error, argmin_lambda, best_support_size, path_errors: points })
}

/// Generates one replicate's design, signal and response.
pub fn gen_instance(cfg: &ExperimentConfig, replicate: usize) -> (DesignMatrix, Vec<f64>, SignedModel) {
    let x0 = gen_design(cfg, replicate);
    let (beta, truth) = gen_signal_with_signs(cfg.p, cfg.k, cfg.signal, cfg.seed, replicate, cfg.random_signs);
    let mut y = x0.mul_vec(&beta);
    let mut noise = stream(cfg.seed, replicate, STREAM_NOISE);
    for v in y.iter_mut() {
        *v += cfg.noise_sd * noise.sample::<f64, _>(StandardNormal);
    }
    (x0, y, truth)
}

pub fn run_replicate(cfg: &ExperimentConfig, replicate: usize, solver: &SolverConfig) -> Result<ErrorRecord> {
    let (x0, y, truth) = gen_instance(cfg, replicate);
    let grid = match cfg.lambda_grid_size {
        None => default_lambda_grid(&x0, &y)?,
        Some(size) => {
            let lmax = x0.lambda_max(&y);
            if !(lmax > 0.0) {
                return Err(Error::InvalidConfig("response is orthogonal to the design".into()));
            }
            log_lambda_grid(lmax, size, DEFAULT_GRID_RATIO)
        }
    };
    let solver = solver.clone().with_grid(grid);
    let mut record = best_error_along_path(&x0, &y, &truth, &solver, cfg.keep_path_errors)?;
    record.replicate = replicate;
    Ok(record)
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
    /// Values above `hi`.
    pub overflow: usize,
}

impl Histogram {
    pub fn of(values: &[f64]) -> Self {
        let bins = (HISTOGRAM_MAX / HISTOGRAM_BIN_WIDTH).round() as usize;
        let mut counts = vec![0; bins];
        let mut overflow = 0;
        for &v in values {
            if v > HISTOGRAM_MAX {
                overflow += 1;
            } else {
                let b = ((v / HISTOGRAM_BIN_WIDTH).floor() as usize).min(bins - 1);
                counts[b] += 1;
            }
        }
        Self { lo: 0.0, hi: HISTOGRAM_MAX, bin_width: HISTOGRAM_BIN_WIDTH, counts, overflow }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub replicates: usize,
    pub completed: usize,
    pub failures: usize,
    pub mean: f64,
    pub std_error: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// `(level, value)` with linear interpolation between order statistics.
    pub quantiles: Vec<(f64, f64)>,
    /// Records whose error exceeds 2, kept for inspection.
    pub above_two: Vec<usize>,
    pub histogram: Histogram,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Summary {
    pub fn of(records: &[ErrorRecord], replicates: usize) -> Self {
        let mut errors: Vec<f64> = records.iter().map(|r| r.best_error).collect();
        errors.sort_by(f64::total_cmp);
        let m = errors.len();
        let mean = errors.iter().sum::<f64>() / m as f64;
        let var = if m > 1 { errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1) as f64 } else { 0.0 };
        Self {
            replicates,
            completed: m,
            failures: replicates - m,
            mean,
            std_error: (var / m as f64).sqrt(),
            median: quantile(&errors, 0.5),
            min: errors.first().copied().unwrap_or(f64::NAN),
            max: errors.last().copied().unwrap_or(f64::NAN),
            quantiles: [0.05, 0.25, 0.5, 0.75, 0.95].iter().map(|&q| (q, quantile(&errors, q))).collect(),
            above_two: records.iter().filter(|r| r.best_error > HISTOGRAM_MAX).map(|r| r.replicate).collect(),
            histogram: Histogram::of(&errors),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<ReplicateFailure>,
    pub summary: Summary,
}

/// Solver settings used by the simulations.
pub fn simulation_solver() -> SolverConfig {
    SolverConfig::default()
}

/// Runs every replicate (in parallel on the current rayon pool) and merges
/// results in replicate order. Failed replicates are recorded, not fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.k == 0 {
        return Err(Error::EmptyTruth);
    }
    let solver = simulation_solver();
    let outcomes: Vec<Result<ErrorRecord>> =
        (0..cfg.replicates).into_par_iter().map(|r| run_replicate(cfg, r, &solver)).collect();
    let mut records = Vec::with_capacity(cfg.replicates);
    let mut failures = Vec::new();
    for (replicate, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(ReplicateFailure { replicate, message: e.to_string() }),
        }
    }
    let summary = Summary::of(&records, cfg.replicates);
    Ok(ExperimentResult { records, failures, summary })
}

/// Writes `replicate,best_error,argmin_lambda` rows.
pub fn write_records_csv<W: Write>(records: &[ErrorRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "best_error", "argmin_lambda"])?;
    for r in records {
        w.write_record([r.replicate.to_string(), format_g17(r.best_error), format_g17(r.argmin_lambda)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `lambda,support_size,error` rows for one path.
pub fn write_path_csv<W: Write>(points: &[PathPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "support_size", "error"])?;
    for pt in points {
        w.write_record([format_g17(pt.lambda), pt.support_size.to_string(), format_g17(pt.error)])?;
    }
    w.flush()?;
    Ok(())
}
