//! Lasso solver in the nonnegative expanded form
//!
//! ```text
//! minimize 1/2 ||y - X beta||^2 + lambda * sum(beta)   subject to beta >= 0
//! ```
//!
//! with `X = (X0, -X0)`, by cyclic coordinate descent with active-set sweeps.
//! Each coordinate step is an exact minimization, so inactive coordinates
//! land on exact zeros.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{dot, DesignMatrix, ExpandedDesign, LassoSolution, SignedModel};

/// Coefficients at or below this value are reported as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// Ratio between the smallest and the largest lambda of the default grid.
pub const DEFAULT_GRID_RATIO: f64 = 1e-3;

const POLISH_AFTER: usize = 8;
const MAX_POLISHES: usize = 64;

fn sub_gram(gram: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&a| idx.iter().map(|&b| gram[a][b]).collect()).collect()
}

/// Solves a symmetric positive definite system; `None` when the matrix is
/// numerically singular.
fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    let scale = (0..k).fold(0.0_f64, |m, i| m.max(a[i][i]));
    for j in 0..k {
        let d = a[j][j] - (0..j).map(|t| a[j][t] * a[j][t]).sum::<f64>();
        if !(d > 1e-12 * scale) {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..k {
            let v = a[i][j] - (0..j).map(|t| a[i][t] * a[j][t]).sum::<f64>();
            a[i][j] = v / d;
        }
    }
    for i in 0..k {
        b[i] = (b[i] - (0..i).map(|t| a[i][t] * b[t]).sum::<f64>()) / a[i][i];
    }
    for i in (0..k).rev() {
        b[i] = (b[i] - (i + 1..k).map(|t| a[t][i] * b[t]).sum::<f64>()) / a[i][i];
    }
    Some(b)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stopping tolerance on the largest gradient-scaled coordinate update,
    /// relative to `max(1, ||X0^T y||_inf)`.
    pub tol: f64,
    /// Strictly decreasing lambdas used by [`lasso_path`].
    pub lambda_grid: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iters: 200_000, tol: 1e-10, lambda_grid: Vec::new() }
    }
}

impl SolverConfig {
    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.lambda_grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidConfig("lambda grid entries must be positive and finite".into()));
        }
        if self.lambda_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("lambda grid must be strictly decreasing".into()));
        }
        Ok(())
    }
}

/// `count` log-spaced values from `lambda_max` down to `ratio * lambda_max`.
pub fn log_lambda_grid(lambda_max: f64, count: usize, ratio: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lambda_max],
        _ => {
            let step = ratio.ln() / (count - 1) as f64;
            (0..count).map(|i| lambda_max * (step * i as f64).exp()).collect()
        }
    }
}

/// The default `10p`-point grid from `||X0^T y||_inf` down to `1e-3` of it.
pub fn default_lambda_grid(x0: &DesignMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let lambda_max = x0.lambda_max(y);
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidConfig("response is orthogonal to every column; no lambda grid".into()));
    }
    Ok(log_lambda_grid(lambda_max, 10 * x0.p(), DEFAULT_GRID_RATIO))
}

fn check_inputs(x0: &DesignMatrix, y: &[f64], lambda: f64) -> Result<()> {
    if y.len() != x0.n() {
        return Err(Error::DimensionMismatch(format!("response has length {}, expected {}", y.len(), x0.n())));
    }
    if y.iter().any(|v| !v.is_finite()) || !lambda.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Solves the lasso at a single `lambda` starting from zero.
pub fn solve_lasso(x0: &DesignMatrix, y: &[f64], lambda: f64, cfg: &SolverConfig) -> Result<LassoSolution> {
    solve_lasso_warm(x0, y, lambda, cfg, None)
}

/// Solves the lasso at `lambda` starting from an expanded coefficient vector.
pub fn solve_lasso_warm(
    x0: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<LassoSolution> {
    check_inputs(x0, y, lambda)?;
    if !(cfg.tol > 0.0) || cfg.max_iters == 0 {
        return Err(Error::InvalidConfig("solver needs tol > 0 and max_iters > 0".into()));
    }
    if let Some(w) = warm {
        if w.len() != 2 * x0.p() {
            return Err(Error::DimensionMismatch(format!("warm start has length {}, expected {}", w.len(), 2 * x0.p())));
        }
    }
    let mut cd = CoordinateDescent::new(x0, y, lambda, warm);
    cd.run(cfg, None)?;
    Ok(cd.into_solution())
}

struct CoordinateDescent<'a> {
    x: ExpandedDesign<'a>,
    y: &'a [f64],
    lambda: f64,
    norms_sq: Vec<f64>,
    beta: Vec<f64>,
    residual: Vec<f64>,
    scale: f64,
    sweeps: usize,
}

impl<'a> CoordinateDescent<'a> {
    fn new(x0: &'a DesignMatrix, y: &'a [f64], lambda: f64, warm: Option<&[f64]>) -> Self {
        let x = x0.expanded();
        let mut norms_sq = x0.column_norms_sq();
        norms_sq.extend_from_within(..);
        let mut beta = warm.map_or_else(|| vec![0.0; x.num_columns()], <[f64]>::to_vec);
        beta.iter_mut().for_each(|b| *b = b.max(0.0));
        let mut cd = Self { x, y, lambda, norms_sq, beta, residual: Vec::new(), scale: x0.lambda_max(y).max(1.0), sweeps: 0 };
        cd.refresh_residual();
        cd
    }

    fn refresh_residual(&mut self) {
        let fit = self.x.mul_vec(&self.beta);
        self.residual = self.y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    }

    fn objective(&self) -> f64 {
        0.5 * dot(&self.residual, &self.residual) + self.lambda * self.beta.iter().sum::<f64>()
    }

    /// One exact minimization over coordinate `j`; returns `|delta| * ||X_j||^2`.
    fn update(&mut self, j: usize) -> f64 {
        let c = self.norms_sq[j];
        if c == 0.0 {
            return 0.0;
        }
        let grad = self.x.dot(j, &self.residual);
        let old = self.beta[j];
        let new = (old + (grad - self.lambda) / c).max(0.0);
        let delta = new - old;
        if delta != 0.0 {
            self.beta[j] = new;
            self.x.axpy(j, -delta, &mut self.residual);
        }
        delta.abs() * c
    }

    fn sweep(&mut self, coords: &[usize]) -> f64 {
        self.sweeps += 1;
        coords.iter().fold(0.0, |m, &j| m.max(self.update(j)))
    }

    fn run(&mut self, cfg: &SolverConfig, mut trace: Option<&mut dyn FnMut(f64)>) -> Result<()> {
        let threshold = cfg.tol * self.scale;
        let all: Vec<usize> = (0..self.x.num_columns()).collect();
        let mut polishes = 0;
        loop {
            let change = self.sweep(&all);
            if let Some(t) = trace.as_deref_mut() {
                t(self.objective());
            }
            if change <= threshold {
                self.refresh_residual();
                if self.kkt_residual() <= 10.0 * threshold {
                    return Ok(());
                }
            }
            let active: Vec<usize> = all.iter().copied().filter(|&j| self.beta[j] > 0.0).collect();
            let mut inner = 0;
            let mut next_polish = POLISH_AFTER;
            loop {
                if self.sweeps >= cfg.max_iters {
                    return Err(Error::NoConvergence { max_iters: cfg.max_iters });
                }
                let change = self.sweep(&active);
                if let Some(t) = trace.as_deref_mut() {
                    t(self.objective());
                }
                if change <= threshold {
                    break;
                }
                inner += 1;
                if inner == next_polish && polishes < MAX_POLISHES {
                    next_polish *= 2;
                    polishes += 1;
                    if self.polish(&active) {
                        break;
                    }
                }
            }
            if self.sweeps >= cfg.max_iters {
                return Err(Error::NoConvergence { max_iters: cfg.max_iters });
            }
        }
    }

    /// Exactly minimizes the objective over the active coordinates with a
    /// Lawson-Hanson active-set pass, warm-started from the current positive
    /// set when it is independent. A tiny ridge keeps the passive solves
    /// defined when columns are dependent. Near-parallel columns make coordinate
    /// descent crawl; the outer full sweep still arbitrates optimality.
    fn polish(&mut self, active: &[usize]) -> bool {
        let k = active.len();
        if k == 0 {
            return false;
        }
        let gram = self.gram(active);
        let c: Vec<f64> = active.iter().map(|&j| self.x.dot(j, self.y) - self.lambda).collect();
        let mut b: Vec<f64> = active.iter().map(|&j| self.beta[j].max(0.0)).collect();
        let mut passive: Vec<usize> = (0..k).filter(|&a| b[a] > 0.0).collect();
        if passive.len() > self.x.n() || cholesky_solve(sub_gram(&gram, &passive), vec![0.0; passive.len()]).is_none() {
            b.iter_mut().for_each(|v| *v = 0.0);
            passive.clear();
        }
        let gtol = 1e-13 * self.scale;
        // dependent passive columns get a large null-space component that
        // the step-back below then trims
        let ridge = 1e-10 * (0..k).fold(0.0_f64, |m, a| m.max(gram[a][a]));
        for _ in 0..3 * k + 10 {
            // restore feasibility on the passive set
            while !passive.is_empty() {
                let rhs: Vec<f64> = passive.iter().map(|&a| c[a]).collect();
                let mut g = sub_gram(&gram, &passive);
                (0..passive.len()).for_each(|i| g[i][i] += ridge);
                let Some(z) = cholesky_solve(g, rhs) else { return false };
                if z.iter().all(|&v| v > 0.0) {
                    passive.iter().zip(&z).for_each(|(&a, &v)| b[a] = v);
                    break;
                }
                let step = passive
                    .iter()
                    .zip(&z)
                    .filter(|(_, &v)| v <= 0.0)
                    .map(|(&a, &v)| b[a] / (b[a] - v))
                    .fold(1.0_f64, f64::min);
                passive.iter().zip(&z).for_each(|(&a, &v)| b[a] += step * (v - b[a]));
                passive.retain(|&a| {
                    let keep = b[a] > 1e-15 * (1.0 + b[a].abs());
                    if !keep {
                        b[a] = 0.0;
                    }
                    keep
                });
            }
            let entering = (0..k)
                .filter(|a| !passive.contains(a))
                .map(|a| (a, c[a] - (0..k).map(|t| gram[a][t] * b[t]).sum::<f64>()))
                .filter(|&(_, w)| w > gtol)
                .max_by(|x, y| x.1.total_cmp(&y.1));
            match entering {
                Some((a, _)) => passive.push(a),
                _ => break,
            }
        }
        // drop the ridge bias when the final passive columns are independent
        let rhs: Vec<f64> = passive.iter().map(|&a| c[a]).collect();
        if let Some(z) = cholesky_solve(sub_gram(&gram, &passive), rhs) {
            if z.iter().all(|&v| v > 0.0) {
                passive.iter().zip(&z).for_each(|(&a, &v)| b[a] = v);
            }
        }
        let saved = self.beta.clone();
        let before = self.objective();
        active.iter().zip(&b).for_each(|(&j, &v)| self.beta[j] = v);
        self.refresh_residual();
        if !(self.objective() < before) {
            self.beta = saved;
            self.refresh_residual();
            return false;
        }
        true
    }

    fn gram(&self, set: &[usize]) -> Vec<Vec<f64>> {
        set.iter().map(|&a| set.iter().map(|&b| self.x.dot(b, &self.x.column_vec(a))).collect()).collect()
    }

    /// Largest stationarity violation over all coordinates.
    fn kkt_residual(&self) -> f64 {
        (0..self.x.num_columns()).fold(0.0, |m: f64, j| {
            let g = self.x.dot(j, &self.residual) - self.lambda;
            let v = if self.beta[j] > 0.0 { g.abs() } else { g.max(0.0) };
            m.max(v)
        })
    }

    fn into_solution(mut self) -> LassoSolution {
        self.refresh_residual();
        let p = self.x.p();
        let support_idx: Vec<usize> = (0..2 * p).filter(|&j| self.beta[j] > SUPPORT_THRESHOLD).collect();
        let support = SignedModel::new(p, support_idx)
            .expect("coordinate descent keeps at most one sign per variable");
        let objective = self.objective();
        let fit = self.x.mul_vec(&self.beta);
        LassoSolution { beta: self.beta, lambda: self.lambda, support, fit, objective, sweeps: self.sweeps }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KktViolation {
    /// 0-based expanded index.
    pub index: usize,
    pub active: bool,
    /// `X_j^T (y - X beta)`.
    pub correlation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KktReport {
    pub pass: bool,
    /// `max |X_j^T r - lambda|` over active coordinates.
    pub max_active_deviation: f64,
    /// `max X_j^T r` over inactive coordinates.
    pub max_inactive_correlation: f64,
    pub violations: Vec<KktViolation>,
}

/// Verifies the stationarity conditions of the expanded problem.
pub fn kkt_check(x0: &DesignMatrix, y: &[f64], lambda: f64, sol: &LassoSolution, tol: f64) -> Result<KktReport> {
    check_inputs(x0, y, lambda)?;
    let x = x0.expanded();
    if sol.beta.len() != x.num_columns() {
        return Err(Error::DimensionMismatch(format!("solution has {} coefficients, expected {}", sol.beta.len(), x.num_columns())));
    }
    let fit = x.mul_vec(&sol.beta);
    let residual: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    let mut report = KktReport {
        pass: true,
        max_active_deviation: 0.0,
        max_inactive_correlation: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for j in 0..x.num_columns() {
        let corr = x.dot(j, &residual);
        let active = sol.beta[j] > SUPPORT_THRESHOLD;
        let bad = if active {
            let dev = (corr - lambda).abs();
            report.max_active_deviation = report.max_active_deviation.max(dev);
            dev > tol
        } else {
            report.max_inactive_correlation = report.max_inactive_correlation.max(corr);
            corr > lambda + tol || sol.beta[j] < 0.0
        };
        if bad {
            report.pass = false;
            report.violations.push(KktViolation { index: j, active, correlation: corr });
        }
    }
    Ok(report)
}

/// Solves along `cfg.lambda_grid`, warm-starting each point from the previous one.
pub fn lasso_path(x0: &DesignMatrix, y: &[f64], cfg: &SolverConfig) -> Result<Vec<(f64, LassoSolution)>> {
    cfg.validate()?;
    if cfg.lambda_grid.is_empty() {
        return Err(Error::InvalidConfig("lambda grid is empty".into()));
    }
    let mut out: Vec<(f64, LassoSolution)> = Vec::with_capacity(cfg.lambda_grid.len());
    for &lambda in &cfg.lambda_grid {
        let warm = out.last().map(|(_, s)| s.beta.as_slice());
        let sol = solve_lasso_warm(x0, y, lambda, cfg, warm)
            .map_err(|e| Error::PathFailed { lambda, source: Box::new(e) })?;
        out.push((lambda, sol));
    }
    Ok(out)
}

#[cfg(test)]
fn solve_traced(x0: &DesignMatrix, y: &[f64], lambda: f64, cfg: &SolverConfig) -> Vec<f64> {
    let mut cd = CoordinateDescent::new(x0, y, lambda, None);
    let mut objectives = vec![cd.objective()];
    cd.run(cfg, Some(&mut |o| objectives.push(o))).unwrap();
    objectives
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Sign;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn identity2() -> DesignMatrix {
        DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DesignMatrix {
        let data = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
        DesignMatrix::from_column_major(n, p, data).unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn orthonormal_design_soft_thresholds() {
        let sol = solve_lasso(&identity2(), &[3.0, 0.5], 1.0, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.signed_coefficients()[0], 2.0, epsilon = 1e-12);
        assert_eq!(sol.signed_coefficients()[1], 0.0);
        assert_eq!(sol.support, SignedModel::from_signed(2, &[(0, Sign::Positive)]).unwrap());
        let kkt = kkt_check(&identity2(), &[3.0, 0.5], 1.0, &sol, 1e-12).unwrap();
        assert!(kkt.pass);
        assert!(kkt.max_active_deviation < 1e-14);
    }

    #[test]
    fn small_response_gives_null_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x0 = random_design(&mut rng, 4, 6);
        let y = random_vec(&mut rng, 4, 1.0);
        let lambda = x0.lambda_max(&y) * 1.0001;
        let sol = solve_lasso(&x0, &y, lambda, &SolverConfig::default()).unwrap();
        assert!(sol.beta.iter().all(|&b| b == 0.0));
        assert!(sol.support.is_empty());
    }

    #[test]
    fn perturbed_solution_names_coordinate() {
        let x0 = identity2();
        let y = [3.0, -2.5];
        let mut sol = solve_lasso(&x0, &y, 1.0, &SolverConfig::default()).unwrap();
        assert!(kkt_check(&x0, &y, 1.0, &sol, 1e-9).unwrap().pass);
        // variable 2 enters with a negative sign: expanded index 3
        assert!(sol.beta[3] > 0.0);
        sol.beta[3] += 0.1;
        let report = kkt_check(&x0, &y, 1.0, &sol, 1e-9).unwrap();
        assert!(!report.pass);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].index, 3);
        assert!(report.violations[0].active);
    }

    #[test]
    fn orthonormal_path_follows_soft_thresholding() {
        let cfg = SolverConfig::default().with_grid(vec![2.9, 0.4]);
        let path = lasso_path(&identity2(), &[3.0, 0.5], &cfg).unwrap();
        assert_eq!(path.len(), 2);
        assert!(path[0].1.support.indices() == [0]);
        assert!(path[1].1.support.indices() == [0, 1]);
    }

    #[test]
    fn grid_at_lambda_max_returns_null_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x0 = random_design(&mut rng, 5, 7);
        let y = random_vec(&mut rng, 5, 1.0);
        let cfg = SolverConfig::default().with_grid(vec![x0.lambda_max(&y)]);
        let path = lasso_path(&x0, &y, &cfg).unwrap();
        assert!(path[0].1.support.is_empty());
    }

    #[test]
    fn default_grid_shape() {
        let grid = log_lambda_grid(5.0, 30, DEFAULT_GRID_RATIO);
        assert_eq!(grid.len(), 30);
        assert_eq!(grid[0], 5.0);
        assert_abs_diff_eq!(grid[29], 5e-3, epsilon = 1e-15);
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_inputs() {
        let x0 = identity2();
        let cfg = SolverConfig::default();
        assert!(matches!(solve_lasso(&x0, &[1.0], 1.0, &cfg), Err(Error::DimensionMismatch(_))));
        assert!(matches!(solve_lasso(&x0, &[f64::NAN, 1.0], 1.0, &cfg), Err(Error::NonFiniteInput)));
        assert!(solve_lasso(&x0, &[1.0, 1.0], 0.0, &cfg).is_err());
        let bad_grid = SolverConfig::default().with_grid(vec![1.0, 2.0]);
        assert!(matches!(lasso_path(&x0, &[1.0, 1.0], &bad_grid), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn reports_non_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x0 = random_design(&mut rng, 6, 12);
        let y = random_vec(&mut rng, 6, 3.0);
        let cfg = SolverConfig { max_iters: 2, ..SolverConfig::default() };
        assert!(matches!(solve_lasso(&x0, &y, 0.01, &cfg), Err(Error::NoConvergence { max_iters: 2 })));
        let path_cfg = cfg.with_grid(vec![0.01]);
        match lasso_path(&x0, &y, &path_cfg) {
            Err(Error::PathFailed { lambda, .. }) => assert_eq!(lambda, 0.01),
            other => panic!("expected PathFailed, got {other:?}"),
        }
    }

    /// Minimizes the signed-form objective by enumerating supports and sign
    /// patterns, solving each restricted stationarity system exactly.
    fn brute_force_objective(x0: &DesignMatrix, y: &[f64], lambda: f64) -> f64 {
        let (n, p) = (x0.n(), x0.p());
        let objective = |b: &[f64]| {
            let fit = x0.mul_vec(b);
            let rss: f64 = y.iter().zip(&fit).map(|(a, f)| (a - f).powi(2)).sum();
            0.5 * rss + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
        };
        let mut best = objective(&vec![0.0; p]);
        for mask in 1u32..(1 << p) {
            let vars: Vec<usize> = (0..p).filter(|j| mask >> j & 1 == 1).collect();
            if vars.len() > n {
                continue;
            }
            let k = vars.len();
            for signs in 0u32..(1 << k) {
                let s: Vec<f64> = (0..k).map(|i| if signs >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
                // (X_A^T X_A) b = X_A^T y - lambda s
                let mut a = vec![vec![0.0; k + 1]; k];
                for (r, &jr) in vars.iter().enumerate() {
                    for (c, &jc) in vars.iter().enumerate() {
                        a[r][c] = dot(x0.column(jr), x0.column(jc));
                    }
                    a[r][k] = dot(x0.column(jr), y) - lambda * s[r];
                }
                let Some(sol) = gauss_solve(a) else { continue };
                if sol.iter().zip(&s).any(|(b, sg)| b * sg <= 0.0) {
                    continue;
                }
                let mut b = vec![0.0; p];
                for (i, &j) in vars.iter().enumerate() {
                    b[j] = sol[i];
                }
                best = best.min(objective(&b));
            }
        }
        best
    }

    fn gauss_solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
        let k = a.len();
        for col in 0..k {
            let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
            if a[piv][col].abs() < 1e-12 {
                return None;
            }
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
    }

    #[test]
    fn matches_brute_force_objective_on_random_3x4() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..25 {
            let x0 = random_design(&mut rng, 3, 4);
            let y = random_vec(&mut rng, 3, 2.0);
            let sol = solve_lasso(&x0, &y, 1.0, &SolverConfig::default()).unwrap();
            let oracle = brute_force_objective(&x0, &y, 1.0);
            assert!((sol.objective - oracle).abs() <= 1e-9 * (1.0 + oracle), "{} vs {oracle}", sol.objective);
        }
    }

    #[test]
    fn path_supports_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let x0 = random_design(&mut rng, 8, 20);
        let y = random_vec(&mut rng, 8, 4.0);
        let cfg = SolverConfig::default().with_grid(default_lambda_grid(&x0, &y).unwrap());
        let path = lasso_path(&x0, &y, &cfg).unwrap();
        assert_eq!(path.len(), 200);
        for (lambda, sol) in &path {
            assert!(sol.support.len() <= x0.n());
            for j in 0..x0.p() {
                assert_eq!(sol.beta[j] * sol.beta[j + x0.p()], 0.0);
            }
            let report = kkt_check(&x0, &y, *lambda, sol, 1e-8).unwrap();
            assert!(report.pass, "lambda {lambda}: {report:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn objective_never_increases(seed in 0u64..10_000, n in 2usize..6, p in 2usize..8, lambda in 0.05f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = random_design(&mut rng, n, p);
            let y = random_vec(&mut rng, n, 2.0);
            let trace = solve_traced(&x0, &y, lambda, &SolverConfig::default());
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
            }
        }

        #[test]
        fn solutions_satisfy_kkt_and_fit_identity(seed in 0u64..10_000, n in 1usize..7, p in 1usize..9, lambda in 0.05f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = random_design(&mut rng, n, p);
            let y = random_vec(&mut rng, n, 3.0);
            let cfg = SolverConfig::default();
            let sol = solve_lasso(&x0, &y, lambda, &cfg).unwrap();
            let scale = x0.lambda_max(&y).max(1.0);
            let report = kkt_check(&x0, &y, lambda, &sol, 10.0 * cfg.tol * scale).unwrap();
            prop_assert!(report.pass, "{:?}", report);
            prop_assert!(report.max_inactive_correlation <= lambda + 10.0 * cfg.tol * scale);
            prop_assert!(sol.support.len() <= n);
            let refit = x0.mul_vec(&sol.signed_coefficients());
            for (a, b) in refit.iter().zip(&sol.fit) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
        }
    }
}
