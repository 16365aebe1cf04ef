//! Geometry of lasso model selection.
//!
//! The null-model polytope `A0 = {f : X^T f <= lambda 1}` collects every
//! response for which the lasso returns zero. A signed model `S` can be
//! selected for some response exactly when the columns `X_S` are the vertex
//! set of a face of the hull of `(X0, -X0)`. This module tests that
//! condition with a margin LP, enumerates accessible models of tiny designs,
//! projects onto `A0` and builds explicit responses selecting a given model.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::solver::{solve_lasso, SolverConfig};
use crate::types::{norm, ExpandedDesign, RegionWitness, SignedModel};

/// A model is a face when the optimal separation margin exceeds this
/// fraction of lambda.
pub const MARGIN_TOL: f64 = 1e-7;

/// Size limits for exhaustive enumeration.
pub const ENUMERATION_MAX_N: usize = 4;
pub const ENUMERATION_MAX_COLUMNS: usize = 16;

/// Default sampling radius as a multiple of lambda.
pub const DEFAULT_RADIUS_FACTOR: f64 = 100.0;

const SAMPLE_CHUNK: usize = 1024;

#[derive(Debug, Clone, Serialize)]
pub struct FaceTestResult {
    pub is_face: bool,
    /// Optimal slack `t`; `-inf` (serialized as null) when the equality
    /// system has no solution inside `A0`.
    pub margin: f64,
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProjectionConfig {
    pub max_sweeps: usize,
    /// Tolerance on multiplier updates and constraint violation, relative
    /// to `max(1, ||X^T y||_inf)`.
    pub tol: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { max_sweeps: 1_000_000, tol: 1e-12 }
    }
}

fn check_response(y: &[f64], x: &ExpandedDesign<'_>, lambda: f64) -> Result<()> {
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch(format!("response has length {}, expected {}", y.len(), x.n())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Euclidean projection of `y` onto `A0`.
pub fn project_null_polytope(y: &[f64], x: &ExpandedDesign<'_>, lambda: f64) -> Result<Vec<f64>> {
    project_null_polytope_with(y, x, lambda, &ProjectionConfig::default())
}

/// Hildreth's dual coordinate ascent: one multiplier per half-space
/// `X_j^T f <= lambda`, each step enforcing a single constraint exactly while
/// keeping its multiplier nonnegative; `f = y - X mu` throughout.
pub fn project_null_polytope_with(
    y: &[f64],
    x: &ExpandedDesign<'_>,
    lambda: f64,
    cfg: &ProjectionConfig,
) -> Result<Vec<f64>> {
    check_response(y, x, lambda)?;
    let m = x.num_columns();
    let norms_sq: Vec<f64> = (0..m).map(|j| x.column_vec(j).iter().map(|v| v * v).sum()).collect();
    let scale = x.base().lambda_max(y).max(1.0);
    let tol = cfg.tol * scale;
    let mut mu = vec![0.0; m];
    let mut f = y.to_vec();
    let mut sweeps = 0;

    let step = |j: usize, f: &mut Vec<f64>, mu: &mut Vec<f64>| -> f64 {
        if norms_sq[j] == 0.0 {
            return 0.0;
        }
        let violation = x.dot(j, f) - lambda;
        let theta = (violation / norms_sq[j]).max(-mu[j]);
        if theta != 0.0 {
            mu[j] += theta;
            x.axpy(j, -theta, f);
        }
        theta.abs() * norms_sq[j]
    };

    loop {
        let full = (0..m).fold(0.0_f64, |acc, j| acc.max(step(j, &mut f, &mut mu)));
        sweeps += 1;
        if full <= tol {
            let fit = x.mul_vec(&mu);
            f = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
            let worst = (0..m).fold(0.0_f64, |acc, j| acc.max(x.dot(j, &f) - lambda));
            if worst <= 10.0 * tol {
                return Ok(f);
            }
        }
        let active: Vec<usize> = (0..m).filter(|&j| mu[j] > 0.0).collect();
        loop {
            if sweeps >= cfg.max_sweeps {
                return Err(Error::NoConvergence { max_iters: cfg.max_sweeps });
            }
            let change = active.iter().fold(0.0_f64, |acc, &j| acc.max(step(j, &mut f, &mut mu)));
            sweeps += 1;
            if change <= tol {
                break;
            }
        }
    }
}

/// `||(y - P(y)) - X beta(y)||`, the gap between the projection residual and
/// the lasso fit at the same lambda.
pub fn projection_fit_gap(y: &[f64], x: &ExpandedDesign<'_>, lambda: f64, solver: &SolverConfig) -> Result<f64> {
    let proj = project_null_polytope(y, x, lambda)?;
    let sol = solve_lasso(x.base(), y, lambda, solver)?;
    let gap: Vec<f64> = y.iter().zip(&proj).zip(&sol.fit).map(|((yi, pi), fi)| (yi - pi) - fi).collect();
    Ok(norm(&gap))
}

fn check_model(s: &SignedModel, x: &ExpandedDesign<'_>) -> Result<()> {
    if s.p() != x.p() {
        return Err(Error::DimensionMismatch(format!("model is over p = {}, design has p = {}", s.p(), x.p())));
    }
    if s.len() > x.n() {
        return Err(Error::ModelTooLarge { size: s.len(), n: x.n() });
    }
    Ok(())
}

/// Tests whether `X_S` is the vertex set of a face of the hull by solving
///
/// ```text
/// maximize t  subject to  X_S^T f = lambda 1,  X_j^T f + t <= lambda  (j not in S)
/// ```
pub fn is_face(s: &SignedModel, x: &ExpandedDesign<'_>, lambda: f64) -> Result<FaceTestResult> {
    check_model(s, x)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    let n = x.n();
    if s.is_empty() {
        return Ok(FaceTestResult { is_face: true, margin: lambda, witness: Some(vec![0.0; n]) });
    }
    let columns: Vec<Vec<f64>> = (0..x.num_columns()).map(|j| x.column_vec(j)).collect();
    let mut lp = LinearProgram::new(n + 1);
    lp.free = vec![true; n + 1];
    lp.objective[n] = -1.0;
    for (j, col) in columns.iter().enumerate() {
        let mut coeffs = col.clone();
        if s.contains(j) {
            coeffs.push(0.0);
            lp.add(coeffs, Relation::Eq, lambda);
        } else {
            coeffs.push(1.0);
            lp.add(coeffs, Relation::Le, lambda);
        }
    }
    match lp.minimize()? {
        LpOutcome::Infeasible => Ok(FaceTestResult { is_face: false, margin: f64::NEG_INFINITY, witness: None }),
        LpOutcome::Optimal { x: sol, .. } => {
            let margin = sol[n];
            let is_face = margin > MARGIN_TOL * lambda;
            let witness = is_face.then(|| sol[..n].to_vec());
            Ok(FaceTestResult { is_face, margin, witness })
        }
    }
}

/// Accessible models grouped by size.
#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    /// Sorted by size, then lexicographically by signed index.
    pub models: Vec<SignedModel>,
    /// `counts_by_size[k]` is the number of accessible models of size `k`.
    pub counts_by_size: Vec<usize>,
}

impl Enumeration {
    pub fn total(&self) -> usize {
        self.models.len()
    }

    pub fn nonempty(&self) -> impl Iterator<Item = &SignedModel> {
        self.models.iter().filter(|m| !m.is_empty())
    }
}

/// Finds every accessible model of size at most `max_size` by levelwise
/// search. A candidate is LP-tested only when all of its one-smaller subsets
/// are faces, which holds for every face when hull faces are simplices
/// (general position).
pub fn enumerate_accessible(x: &ExpandedDesign<'_>, lambda: f64, max_size: usize) -> Result<Enumeration> {
    if x.n() > ENUMERATION_MAX_N || x.num_columns() > ENUMERATION_MAX_COLUMNS {
        return Err(Error::TooLarge(format!(
            "enumeration supports n <= {ENUMERATION_MAX_N} and 2p <= {ENUMERATION_MAX_COLUMNS}, got n = {}, 2p = {}",
            x.n(),
            x.num_columns()
        )));
    }
    let p = x.p();
    let max_size = max_size.min(x.n()).min(p);
    let mut models = vec![SignedModel::empty(p)];
    let mut counts_by_size = vec![1];
    let mut level: Vec<SignedModel> = vec![SignedModel::empty(p)];
    for _ in 1..=max_size {
        let known: HashSet<&SignedModel> = level.iter().collect();
        let mut candidates = Vec::new();
        for face in &level {
            let start = face.indices().last().map_or(0, |&i| i + 1);
            for idx in start..2 * p {
                let var = idx % p;
                if face.contains(var) || face.contains(var + p) {
                    continue;
                }
                let mut indices = face.indices().to_vec();
                indices.push(idx);
                let cand = SignedModel::new(p, indices)?;
                if cand.indices().iter().all(|&i| known.contains(&cand.without(i))) {
                    candidates.push(cand);
                }
            }
        }
        let tested: Vec<Result<bool>> =
            candidates.par_iter().map(|c| is_face(c, x, lambda).map(|r| r.is_face)).collect();
        let mut next = Vec::new();
        for (cand, res) in candidates.into_iter().zip(tested) {
            if res? {
                next.push(cand);
            }
        }
        next.sort();
        counts_by_size.push(next.len());
        models.extend(next.iter().cloned());
        if next.is_empty() {
            break;
        }
        level = next;
    }
    counts_by_size.resize(max_size + 1, 0);
    Ok(Enumeration { models, counts_by_size })
}

/// Draws responses uniformly on the sphere of the given radius, solves the
/// lasso for each and counts the supports observed.
///
/// Samples are drawn in fixed-size chunks, chunk `c` on ChaCha stream `c` of
/// `seed`, so the result does not depend on the thread count.
pub fn sample_accessible(
    x: &ExpandedDesign<'_>,
    lambda: f64,
    num_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<BTreeMap<SignedModel, u64>> {
    if num_samples == 0 {
        return Err(Error::InvalidConfig("num_samples must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {radius}")));
    }
    let n = x.n();
    let x0 = x.base();
    let cfg = SolverConfig::default();
    let chunks = num_samples.div_ceil(SAMPLE_CHUNK);
    let partial: Vec<Result<BTreeMap<SignedModel, u64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = SAMPLE_CHUNK.min(num_samples - c * SAMPLE_CHUNK);
            let mut hits = BTreeMap::new();
            let mut y = vec![0.0; n];
            for _ in 0..count {
                loop {
                    y.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                    let len = norm(&y);
                    if len > 0.0 {
                        y.iter_mut().for_each(|v| *v *= radius / len);
                        break;
                    }
                }
                let sol = solve_lasso(x0, &y, lambda, &cfg)?;
                *hits.entry(sol.support).or_insert(0) += 1;
            }
            Ok(hits)
        })
        .collect();
    let mut merged = BTreeMap::new();
    for part in partial {
        for (model, count) in part? {
            *merged.entry(model).or_insert(0) += count;
        }
    }
    Ok(merged)
}

/// Builds `f_S` from the face LP and unit cone coefficients.
pub fn region_witness(s: &SignedModel, x: &ExpandedDesign<'_>, lambda: f64) -> Result<RegionWitness> {
    let test = is_face(s, x, lambda)?;
    let face_point = match (test.is_face, test.witness) {
        (true, Some(w)) => w,
        _ => return Err(Error::NotAFace),
    };
    Ok(RegionWitness { model: s.clone(), face_point, cone_coeffs: vec![1.0; s.len()] })
}

impl RegionWitness {
    /// The response `f_S + X_S alpha`, which lies in the region of `S`.
    pub fn response(&self, x: &ExpandedDesign<'_>) -> Vec<f64> {
        let mut y = self.face_point.clone();
        for (&j, &a) in self.model.indices().iter().zip(&self.cone_coeffs) {
            x.axpy(j, a, &mut y);
        }
        y
    }
}
