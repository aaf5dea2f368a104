use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use log::info;
use num_complex::Complex64;

use crate::elliptic::{elliptic_nd_map, elliptic_solve};
use crate::error::Result;
use crate::grid::{build_grid, Grid};
use crate::harness::config::ExperimentConfig;
use crate::harness::metrics::{error_metrics, relative_l2, ErrorMetrics};
use crate::harness::noise::add_noise;
use crate::harness::report::{write_control, write_snapshot, ReportWriter};
use crate::matrix::ComplexMatrix;
use crate::operators::{build_operators, OperatorSet};
use crate::reconstruction::{assemble_k, build_regularized_system, reconstruct, NormalTerms};
use crate::wave::{assemble_hyperbolic_nd_map, assemble_hyperbolic_nd_map_cached, Coefficients, HyperbolicNdMap};

#[derive(Clone, Debug)]
pub struct ReportRow {
    /// Job index; fixes the row order and names the control and snapshot files.
    pub id: usize,
    pub lambda: Complex64,
    pub alpha: f64,
    pub noise: f64,
    pub seed: Option<u64>,
    pub replicate: usize,
    pub l: ComplexMatrix,
    pub truth: ComplexMatrix,
    pub metrics: ErrorMetrics,
    pub snapshot_rel_err: Option<f64>,
    /// Condition estimate of the normal matrix.
    pub condition: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub preset: String,
    pub grid: Grid,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn rows_for<'a>(&'a self, pred: impl Fn(&ReportRow) -> bool + 'a) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| pred(r))
    }
}

struct Job {
    id: usize,
    lambda: Complex64,
    alpha: f64,
}

struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    grid: &'a Grid,
    coeff: &'a Coefficients,
    ops: &'a OperatorSet,
    nd: &'a HyperbolicNdMap,
    terms: &'a NormalTerms,
    noise: f64,
    seed: Option<u64>,
    replicate: usize,
}

fn run_job(s: &Shared, job: &Job) -> Result<ReportRow> {
    let start = Instant::now();
    let cfg = s.cfg;
    let sys = build_regularized_system(s.terms, job.lambda, job.alpha)?;
    let with_snapshot = cfg.snapshot.then_some((s.grid, s.coeff));
    let r = reconstruct(&sys, s.nd, s.ops, with_snapshot)?;
    let truth = elliptic_nd_map(s.grid, s.coeff, job.lambda, cfg.closure)?;
    let metrics = error_metrics(&r.l, &truth.l)?;
    let flux = cfg.flux.map(|v| Complex64::new(v, 0.0));
    let mut snapshot_rel_err = None;
    if let Some(snap) = r.snapshot_for(flux) {
        let u = elliptic_solve(s.grid, s.coeff, job.lambda, flux, cfg.closure)?;
        snapshot_rel_err = Some(relative_l2(&snap, &u)?);
        if let Some(dir) = &cfg.out_dir {
            write_snapshot(&dir.join(format!("snapshot_{:05}.csv", job.id)), &s.grid.x_nodes, &snap, &u)?;
        }
    }
    if let Some(dir) = &cfg.out_dir {
        write_control(&dir.join(format!("control_{:05}.csv", job.id)), &s.grid.t_nodes, &r.control_for(flux))?;
    }
    Ok(ReportRow {
        id: job.id,
        lambda: job.lambda,
        alpha: job.alpha,
        noise: s.noise,
        seed: s.seed,
        replicate: s.replicate,
        l: r.l,
        truth: truth.l,
        metrics,
        snapshot_rel_err,
        condition: sys.condition,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs the jobs on `workers` threads. Results come back in job order; on
/// failure the rows before the first failing job are returned with the error.
fn run_batch(s: &Shared, jobs: &[Job], workers: usize) -> (Vec<ReportRow>, Option<crate::error::Error>) {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<ReportRow>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.min(jobs.len()).max(1) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= jobs.len() {
                    break;
                }
                let out = run_job(s, &jobs[k]);
                let failed = out.is_err();
                slots.lock().expect("no worker panics while holding the lock")[k] = Some(out);
                if failed {
                    // Stop handing out jobs past the failure.
                    next.fetch_max(jobs.len(), Ordering::Relaxed);
                }
            });
        }
    });
    let mut rows = Vec::new();
    for slot in slots.into_inner().expect("workers joined") {
        match slot {
            Some(Ok(row)) => rows.push(row),
            Some(Err(e)) => return (rows, Some(e)),
            None => break,
        }
    }
    (rows, None)
}

/// grid → `Λ` (cached when configured) → noise → `K` → reconstruction per
/// `(λ, α)` → metrics, writing the report and per-run files when an output
/// directory is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = &cfg.coefficients;
    let grid = build_grid(cfg.x_min, cfg.x_max, cfg.n_x, cfg.horizon, |x| spec.speed(x))?;
    grid.check_controllable()?;
    let coeff = Coefficients::sample(&grid, |x| spec.speed(x), |x| spec.potential(x))?;
    let ops = build_operators(&grid);

    let mut writer = match &cfg.out_dir {
        Some(dir) => Some(ReportWriter::create(dir)?),
        None => None,
    };
    let t0 = Instant::now();
    let clean = match &cfg.cache_dir {
        Some(dir) => assemble_hyperbolic_nd_map_cached(&grid, &coeff, dir)?,
        None => assemble_hyperbolic_nd_map(&grid, &coeff)?,
    };
    info!("hyperbolic map {}×{} in {:.2?}", clean.lambda.rows(), clean.lambda.cols(), t0.elapsed());

    let mut per_level = Vec::new();
    for &noise in &cfg.noise {
        if noise == 0.0 {
            per_level.push((noise, 0, None));
        } else {
            let base = cfg.seed.expect("validated");
            per_level.extend((0..cfg.replicates).map(|r| (noise, r, Some(base.wrapping_add(r as u64)))));
        }
    }

    let mut rows = Vec::new();
    let mut next_id = 0;
    for (noise, replicate, seed) in per_level {
        let noisy;
        let nd = if noise == 0.0 {
            &clean
        } else {
            noisy = HyperbolicNdMap::from_lambda(add_noise(&clean.lambda, noise, seed)?, grid.n_t)?;
            &noisy
        };
        let t1 = Instant::now();
        let terms = NormalTerms::new(&assemble_k(nd, &ops)?, &ops, cfg.form)?;
        info!("noise {noise} replicate {replicate}: normal terms in {:.2?}", t1.elapsed());
        let mut jobs = Vec::new();
        for &alpha in &cfg.alphas {
            for &lambda in &cfg.lambdas {
                jobs.push(Job { id: next_id, lambda, alpha });
                next_id += 1;
            }
        }
        let shared = Shared { cfg, grid: &grid, coeff: &coeff, ops: &ops, nd, terms: &terms, noise, seed, replicate };
        let (batch, err) = run_batch(&shared, &jobs, cfg.workers);
        if let Some(w) = writer.as_mut() {
            w.write_rows(&cfg.name, &batch)?;
        }
        rows.extend(batch);
        if let Some(e) = err {
            return Err(e);
        }
    }
    info!("{} rows in {:.2?}", rows.len(), t0.elapsed());
    Ok(ExperimentReport { preset: cfg.name.clone(), grid, rows })
}

/// Convenience for tests and the CLI: runs a config with its output directory replaced.
pub fn run_into(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentReport> {
    let mut c = cfg.clone();
    c.out_dir = Some(dir.to_path_buf());
    run_experiment(&c)
}
