use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use alasso_core::combinatorics::{
    accessible_bound_size_k, ball_size_bound, binomial, bound_comparison_report, growth_constant, growth_constant_ln,
    naive_model_bound, rho_threshold, total_face_bound, total_face_bound_ln, FVector,
};
use alasso_core::geometry::{enumerate_accessible, is_face, project_null_polytope, sample_accessible};
use alasso_core::io::{read_design_file, read_model_file, read_response_file};
use alasso_core::sim::{
    best_error_along_path, gen_instance, run_experiment, write_path_csv, write_records_csv, DesignKind, ExperimentConfig,
};
use alasso_core::solver::{kkt_check, lasso_path, log_lambda_grid, solve_lasso, SolverConfig};
use alasso_core::{AsymptoticParams, DesignMatrix, Error, Result, SignedModel};
use serde::Serialize;
use serde_json::json;

use crate::output::Envelope;
use crate::{Command, DesignArgs, SolverArgs};

pub fn run(command: Command) -> Result<Envelope> {
    match command {
        Command::Solve { design, response, lambda, solver } => solve(&design, &response, lambda, &solver),
        Command::Path { design, response, grid_size, ratio, solver } => path(&design, &response, grid_size, ratio, &solver),
        Command::Project { design, response, lambda } => project(&design, &response, lambda),
        Command::CheckFace { design, model, lambda } => check_face(&design, &model, lambda),
        Command::Enumerate { design, lambda, max_size } => enumerate(&design, lambda, max_size),
        Command::Sample { design, lambda, samples, radius_factor, seed } => {
            sample(&design, lambda, samples, radius_factor, seed)
        }
        Command::Bounds { n, p, k, rho, kappa, epsilon } => bounds(n, p, k, rho, kappa, epsilon),
        Command::Simulate { n, p, k, corr, signal, noise_sd, reps, seed, grid_size, random_signs, out, summary } => {
            let mut cfg = ExperimentConfig::new(n, p, k, resolve_seed(seed));
            cfg.signal = signal;
            cfg.noise_sd = noise_sd;
            cfg.replicates = reps;
            cfg.lambda_grid_size = grid_size;
            cfg.random_signs = random_signs;
            if let Some(corr) = corr {
                cfg.design = DesignKind::Equicorrelated { corr };
            }
            simulate(cfg, out, summary)
        }
        Command::PathDemo { n, p, k, signal, noise_sd, seed, grid_size, out } => {
            let mut cfg = ExperimentConfig::new(n, p, k, resolve_seed(seed));
            cfg.signal = signal;
            cfg.noise_sd = noise_sd;
            cfg.replicates = 1;
            cfg.lambda_grid_size = grid_size;
            path_demo(cfg, out)
        }
    }
}

/// Uses the given seed or draws one and reports it, so the run can be redone.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        // keep generated seeds exactly representable as JSON doubles
        let s = rand::random::<u64>() >> 11;
        eprintln!("seed: {s}");
        s
    })
}

/// Prefixes I/O failures with the offending path.
fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn load_design(args: &DesignArgs) -> Result<DesignMatrix> {
    let mut x0 = with_path(&args.design, read_design_file(&args.design))?;
    if args.standardize {
        x0.normalize_columns();
    }
    Ok(x0)
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig> {
    let cfg = SolverConfig { max_iters: args.max_iters, tol: args.tol, ..SolverConfig::default() };
    cfg.validate()?;
    if !(args.kkt_tol > 0.0) {
        return Err(Error::InvalidConfig("kkt-tol must be positive".into()));
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct DesignConfig<'a> {
    design: &'a Path,
    standardize: bool,
    n: usize,
    p: usize,
}

impl<'a> DesignConfig<'a> {
    fn new(args: &'a DesignArgs, x0: &DesignMatrix) -> Self {
        Self { design: &args.design, standardize: args.standardize, n: x0.n(), p: x0.p() }
    }
}

fn solve(design: &DesignArgs, response: &Path, lambda: f64, solver: &SolverArgs) -> Result<Envelope> {
    let x0 = load_design(design)?;
    let y = with_path(response, read_response_file(response))?;
    let cfg = solver_config(solver)?;
    let sol = solve_lasso(&x0, &y, lambda, &cfg)?;
    let kkt = kkt_check(&x0, &y, lambda, &sol, solver.kkt_tol)?;
    let config = json!({
        "input": DesignConfig::new(design, &x0),
        "response": response,
        "lambda": lambda,
        "tol": cfg.tol,
        "max_iters": cfg.max_iters,
        "kkt_tol": solver.kkt_tol,
    });
    let payload = json!({
        "lambda": lambda,
        "support": sol.support,
        "coefficients": sol.signed_coefficients(),
        "objective": sol.objective,
        "sweeps": sol.sweeps,
        "kkt": kkt,
    });
    Envelope::new("solve", None, config, payload)
}

fn path(design: &DesignArgs, response: &Path, grid_size: Option<usize>, ratio: f64, solver: &SolverArgs) -> Result<Envelope> {
    let x0 = load_design(design)?;
    let y = with_path(response, read_response_file(response))?;
    if y.len() != x0.n() {
        return Err(Error::DimensionMismatch(format!("response has length {}, expected {}", y.len(), x0.n())));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!("ratio must lie in (0, 1), got {ratio}")));
    }
    let size = grid_size.unwrap_or(10 * x0.p());
    if size == 0 {
        return Err(Error::InvalidConfig("grid size must be at least 1".into()));
    }
    let lmax = x0.lambda_max(&y);
    if !(lmax > 0.0) {
        return Err(Error::InvalidConfig("response is orthogonal to every column".into()));
    }
    let cfg = solver_config(solver)?.with_grid(log_lambda_grid(lmax, size, ratio));
    let path = lasso_path(&x0, &y, &cfg)?;
    let mut points = Vec::with_capacity(path.len());
    for (lambda, sol) in &path {
        let kkt = kkt_check(&x0, &y, *lambda, sol, solver.kkt_tol)?;
        points.push(json!({
            "lambda": lambda,
            "support": sol.support,
            "objective": sol.objective,
            "kkt_pass": kkt.pass,
            "max_active_deviation": kkt.max_active_deviation,
            "max_inactive_correlation": kkt.max_inactive_correlation,
        }));
    }
    let config = json!({
        "input": DesignConfig::new(design, &x0),
        "response": response,
        "grid_size": size,
        "ratio": ratio,
        "lambda_max": lmax,
        "tol": cfg.tol,
        "max_iters": cfg.max_iters,
        "kkt_tol": solver.kkt_tol,
    });
    Envelope::new("path", None, config, json!({ "points": points }))
}

fn project(design: &DesignArgs, response: &Path, lambda: f64) -> Result<Envelope> {
    let x0 = load_design(design)?;
    let y = with_path(response, read_response_file(response))?;
    let x = x0.expanded();
    let projection = project_null_polytope(&y, &x, lambda)?;
    let sol = solve_lasso(&x0, &y, lambda, &SolverConfig::default())?;
    let residual: Vec<f64> = y.iter().zip(&projection).map(|(a, b)| a - b).collect();
    let gap = residual.iter().zip(&sol.fit).map(|(r, f)| (r - f).powi(2)).sum::<f64>().sqrt();
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tolerance = 1e-6 * (1.0 + ynorm);
    let config = json!({ "input": DesignConfig::new(design, &x0), "response": response, "lambda": lambda });
    let payload = json!({
        "projection": projection,
        "residual": residual,
        "lasso_fit": sol.fit,
        "gap": gap,
        "tolerance": tolerance,
        "identity_holds": gap <= tolerance,
    });
    Envelope::new("project", None, config, payload)
}

fn check_face(design: &DesignArgs, model: &Path, lambda: f64) -> Result<Envelope> {
    let x0 = load_design(design)?;
    let s: SignedModel = with_path(model, read_model_file(model))?;
    let result = is_face(&s, &x0.expanded(), lambda)?;
    let config = json!({ "input": DesignConfig::new(design, &x0), "model": s, "lambda": lambda });
    Envelope::new("check-face", None, config, result)
}

fn enumerate(design: &DesignArgs, lambda: f64, max_size: Option<usize>) -> Result<Envelope> {
    let x0 = load_design(design)?;
    let max_size = max_size.unwrap_or(x0.n());
    let e = enumerate_accessible(&x0.expanded(), lambda, max_size)?;
    let config = json!({ "input": DesignConfig::new(design, &x0), "lambda": lambda, "max_size": max_size });
    let payload = json!({
        "total": e.total(),
        "counts_by_size": e.counts_by_size,
        "models": e.models,
        "general_position": x0.is_general_position(),
    });
    Envelope::new("enumerate", None, config, payload)
}

fn sample(design: &DesignArgs, lambda: f64, samples: usize, radius_factor: f64, seed: Option<u64>) -> Result<Envelope> {
    let x0 = load_design(design)?;
    let seed = resolve_seed(seed);
    let radius = radius_factor * lambda;
    let hits = sample_accessible(&x0.expanded(), lambda, samples, radius, seed)?;
    let models: Vec<_> = hits.iter().map(|(m, c)| json!({ "model": m, "hits": c })).collect();
    let config = json!({
        "input": DesignConfig::new(design, &x0),
        "lambda": lambda,
        "samples": samples,
        "radius": radius,
    });
    Envelope::new("sample", Some(seed), config, json!({ "distinct": models.len(), "models": models }))
}

fn bounds(
    n: Option<usize>,
    p: Option<usize>,
    k: Option<usize>,
    rho: Option<f64>,
    kappa: Option<f64>,
    epsilon: f64,
) -> Result<Envelope> {
    if p.is_none() && rho.is_none() {
        return Err(Error::InvalidConfig("bounds needs --n and --p, or --rho and --kappa".into()));
    }
    let mut payload = serde_json::Map::new();
    if let (Some(n), Some(p)) = (n, p) {
        let v = 2 * p;
        let f = FVector::cyclic(n, v)?;
        // neighborliness: f_k should equal C(v, k+1) below floor(d/2)
        let neighborly: Vec<_> = (0..n / 2)
            .map(|j| {
                let cv = binomial(v as i64, j as i64 + 1);
                let cd = binomial(n as i64, j as i64 + 1);
                json!({
                    "k": j,
                    "f_k": f.counts[j].to_string(),
                    "binom_v": cv.to_string(),
                    "binom_d": cd.to_string(),
                    "matches_binom_v": f.counts[j] == cv,
                })
            })
            .collect();
        payload.insert("f_vector".into(), serde_json::to_value(&f)?);
        payload.insert("face_total".into(), json!(f.total().to_string()));
        payload.insert("euler_holds".into(), json!(f.satisfies_euler()));
        payload.insert("neighborliness".into(), json!(neighborly));
        payload.insert("naive_bound".into(), json!(naive_model_bound(n, p).to_string()));
        // the closed-form total bound assumes 2p >= 2n
        let total = if v >= 2 * n {
            json!({ "value": total_face_bound(n, v)?, "ln": total_face_bound_ln(n, v)? })
        } else {
            serde_json::Value::Null
        };
        payload.insert("total_bound".into(), total);
        if let Some(k) = k {
            payload.insert("size_k_bound".into(), json!({ "k": k, "bound": accessible_bound_size_k(n, p, k)?.to_string() }));
        }
    }
    if let (Some(rho), Some(kappa)) = (rho, kappa) {
        let params = AsymptoticParams::new(rho, kappa, epsilon)?;
        let mut section = json!({
            "growth_constant": growth_constant(&params)?,
            "growth_constant_ln": growth_constant_ln(&params)?,
            "rho_threshold": rho_threshold(kappa)?,
        });
        if let Some(n) = n {
            section["comparison"] = serde_json::to_value(bound_comparison_report(rho, n)?)?;
            if epsilon > 0.0 {
                let p = (rho * n as f64).round() as usize;
                section["ball"] = serde_json::to_value(ball_size_bound(p, n, epsilon)?)?;
            }
        }
        payload.insert("asymptotics".into(), section);
    }
    let config = json!({ "n": n, "p": p, "k": k, "rho": rho, "kappa": kappa, "epsilon": epsilon });
    Envelope::new("bounds", None, config, payload)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    with_path(path, File::create(path).map_err(Error::from)).map(BufWriter::new)
}

fn simulate(cfg: ExperimentConfig, out: Option<PathBuf>, summary_path: Option<PathBuf>) -> Result<Envelope> {
    cfg.validate()?;
    let result = run_experiment(&cfg)?;
    if let Some(path) = &out {
        write_records_csv(&result.records, create(path)?)?;
    }
    if let Some(path) = &summary_path {
        let text = alasso_core::io::to_json_g17(&json!({ "summary": result.summary, "failures": result.failures }))?;
        with_path(path, std::fs::write(path, text + "\n").map_err(Error::from))?;
    }
    for f in &result.failures {
        eprintln!("warning: replicate {} failed: {}", f.replicate, f.message);
    }
    let config = json!({ "experiment": cfg, "grid_size": cfg.grid_size(), "out": out, "summary": summary_path });
    let payload = json!({ "summary": result.summary, "failures": result.failures });
    Envelope::new("simulate", Some(cfg.seed), config, payload)
}

fn path_demo(cfg: ExperimentConfig, out: Option<PathBuf>) -> Result<Envelope> {
    cfg.validate()?;
    let (x0, y, truth) = gen_instance(&cfg, 0);
    let lmax = x0.lambda_max(&y);
    if !(lmax > 0.0) {
        return Err(Error::InvalidConfig("response is orthogonal to the design".into()));
    }
    let solver = SolverConfig::default().with_grid(log_lambda_grid(lmax, cfg.grid_size(), 1e-3));
    let record = best_error_along_path(&x0, &y, &truth, &solver, true)?;
    let points = record.path_errors.clone().unwrap_or_default();
    if let Some(path) = &out {
        write_path_csv(&points, create(path)?)?;
    }
    let config = json!({ "experiment": cfg, "grid_size": cfg.grid_size(), "out": out });
    let mut payload = json!({
        "best_error": record.best_error,
        "argmin_lambda": record.argmin_lambda,
        "best_support_size": record.best_support_size,
        "lambda_max": lmax,
    });
    if out.is_none() {
        payload["points"] = serde_json::to_value(&points)?;
    }
    Envelope::new("path-demo", Some(cfg.seed), config, payload)
}
