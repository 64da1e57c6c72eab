//! The outer global-local iteration.

use super::indicator::error_indicator;
use super::pce_field::PceField;
use super::relaxation::Relaxation;
use crate::local_solver::{
    solve_local_stochastic, BoundaryData, LocalSolverError, WarmCache,
};
use crate::problem::Problem;
use crate::real::Real;
use crate::sparse_poly::{AdaptiveParams, PceApprox, SampleLog};
use rayon::prelude::*;
use std::io::{self, Write};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IterateError {
    #[error("patch {patch} local solve failed at iteration {k}: {source}")]
    Local { k: usize, patch: usize, source: LocalSolverError },
}

/// One line of the convergence history.
#[derive(Debug, Clone)]
pub struct HistoryRow {
    pub k: usize,
    pub rho: f64,
    /// Relative error indicator against the reference, when available.
    pub error: Option<f64>,
    pub n_samples: Vec<usize>,
    pub dim_w: Vec<usize>,
    pub dim_lambda: Vec<usize>,
}

/// Per-iteration, per-patch solver statistics.
#[derive(Debug, Clone)]
pub struct PatchStat {
    pub k: usize,
    pub q: usize,
    pub n_samples: usize,
    pub dim_w: usize,
    pub dim_lambda: usize,
    pub newton_max: usize,
    pub newton_mean: f64,
    pub fit_converged: bool,
}

/// Final state and bookkeeping of a run.
pub struct RunResult<T> {
    pub u: PceField<T>,
    pub w: Vec<PceApprox<T>>,
    pub lambda: Vec<PceApprox<T>>,
    pub history: Vec<HistoryRow>,
    pub patch_stats: Vec<PatchStat>,
    /// Sample logs of the final iteration, one per patch.
    pub final_logs: Vec<SampleLog<T>>,
    /// Whether every local fit converged at every iteration.
    pub local_fits_converged: bool,
    pub factorize_count: usize,
    /// Wall-clock seconds per iteration.
    pub wall_seconds: Vec<f64>,
}

impl<T: Real> RunResult<T> {
    /// Deterministic history CSV: header plus one row per iteration. Timing
    /// lives in the run summary, not here, so byte-identical reruns compare
    /// equal.
    pub fn write_history_csv<W: Write>(&self, w: &mut W, config_hash: &str) -> io::Result<()> {
        writeln!(w, "# config_sha256={config_hash}")?;
        let q_count = self.w.len();
        let mut header = vec!["k".to_string(), "rho_k".to_string(), "error_indicator".to_string()];
        for q in 1..=q_count {
            header.push(format!("N_{q}"));
        }
        for q in 1..=q_count {
            header.push(format!("dim_w_{q}"));
        }
        for q in 1..=q_count {
            header.push(format!("dim_lambda_{q}"));
        }
        writeln!(w, "{}", header.join(","))?;
        for row in &self.history {
            let mut cells = vec![
                row.k.to_string(),
                format!("{:.17e}", row.rho),
                match row.error {
                    Some(e) => format!("{:.17e}", e),
                    None => "nan".to_string(),
                },
            ];
            cells.extend(row.n_samples.iter().map(|v| v.to_string()));
            cells.extend(row.dim_w.iter().map(|v| v.to_string()));
            cells.extend(row.dim_lambda.iter().map(|v| v.to_string()));
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_patch_stats_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "k,q,n_samples,dim_w,dim_lambda,newton_max,newton_mean,fit_converged")?;
        for s in &self.patch_stats {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.3},{}",
                s.k, s.q + 1, s.n_samples, s.dim_w, s.dim_lambda, s.newton_max, s.newton_mean,
                s.fit_converged
            )?;
        }
        Ok(())
    }
}

/// Run the global-local iteration: global step, relaxation, stochastic local
/// solves on every patch. Deterministic for fixed seeds; the global operator
/// is factorized exactly once (at problem build).
pub fn iterate<T: Real>(
    problem: &Problem<T>,
    reference: Option<&PceField<T>>,
) -> Result<RunResult<T>, IterateError> {
    let cfg = &problem.config;
    let m = problem.m;
    let n_nodes = problem.system.n_nodes;
    let q_count = problem.patches.len();
    let relax = Relaxation::<T>::from_spec(&cfg.relaxation);
    let mut u = PceField::zero(m, n_nodes);
    let mut lambdas: Vec<PceApprox<T>> = problem
        .patches
        .iter()
        .map(|p| PceApprox::deterministic(m, &vec![T::zero(); p.n_multipliers()]))
        .collect();
    let mut w_approx: Vec<PceApprox<T>> = problem
        .patches
        .iter()
        .map(|p| PceApprox::deterministic(m, &vec![T::zero(); p.n_nodes()]))
        .collect();
    let mut warm: Vec<WarmCache<T>> = vec![WarmCache::new(); q_count];
    let mut delta_prev: Option<PceField<T>> = None;
    let mut rho_prev = T::one();
    let mut history = Vec::new();
    let mut patch_stats = Vec::new();
    let mut final_logs: Vec<SampleLog<T>> = Vec::new();
    let mut wall_seconds = Vec::new();
    let mut local_fits_converged = true;
    let newton_tol = crate::real::real::<T>(cfg.newton_tol);
    for k in 1..=cfg.k_max {
        let t0 = Instant::now();
        let u_hat = problem.system.global_step(&u, &lambdas);
        let delta_k = PceField::sub(&u_hat, &u);
        let rho = relax.rho(k, rho_prev, &delta_k, delta_prev.as_ref(), &problem.system.h1);
        let u_new = PceField::combine(&u_hat, rho, &u);
        let results: Vec<Result<_, LocalSolverError>> = problem
            .patches
            .par_iter()
            .enumerate()
            .map(|(q, pp)| {
                let boundary = BoundaryData {
                    set: u_new.set.clone(),
                    iface_coeffs: u_new.restrict_nodes(&pp.iface.coarse_nodes),
                };
                let params = AdaptiveParams::<T> {
                    n0: cfg.n0,
                    p_add: crate::real::real(cfg.p_add),
                    theta: crate::real::real(cfg.theta),
                    eps_cv: crate::real::real(cfg.eps_cv),
                    eps_stagn: crate::real::real(cfg.eps_stagn),
                    eps_overfit: crate::real::real(cfg.eps_overfit),
                    seed: cfg.patch_seed(q),
                    max_samples: cfg.max_samples,
                    max_rounds: cfg.max_rounds,
                    rank_tol: crate::real::real(1e-12),
                };
                solve_local_stochastic(
                    pp,
                    &boundary,
                    &params,
                    newton_tol,
                    Some(&warm[q]),
                    problem.fixed_xi.as_deref(),
                )
            })
            .collect();
        let mut logs = Vec::with_capacity(q_count);
        for (q, r) in results.into_iter().enumerate() {
            let out = r.map_err(|source| IterateError::Local { k, patch: q, source })?;
            if !out.converged {
                local_fits_converged = false;
            }
            let newton_max = out.newton_iters.iter().copied().max().unwrap_or(0);
            let newton_mean = if out.newton_iters.is_empty() {
                0.0
            } else {
                out.newton_iters.iter().sum::<usize>() as f64 / out.newton_iters.len() as f64
            };
            patch_stats.push(PatchStat {
                k,
                q,
                n_samples: out.log.points.len(),
                dim_w: out.w.set.len(),
                dim_lambda: out.lambda.set.len(),
                newton_max,
                newton_mean,
                fit_converged: out.converged,
            });
            warm[q] = out.warm;
            lambdas[q] = out.lambda;
            w_approx[q] = out.w;
            logs.push(out.log);
        }
        let error = reference
            .map(|r| error_indicator(&u_new, r, &problem.system.mass_ext))
            .transpose()
            .ok()
            .flatten()
            .map(|e| e.to_f64_lossy());
        history.push(HistoryRow {
            k,
            rho: rho.to_f64_lossy(),
            error,
            n_samples: patch_stats[patch_stats.len() - q_count..]
                .iter()
                .map(|s| s.n_samples)
                .collect(),
            dim_w: patch_stats[patch_stats.len() - q_count..]
                .iter()
                .map(|s| s.dim_w)
                .collect(),
            dim_lambda: patch_stats[patch_stats.len() - q_count..]
                .iter()
                .map(|s| s.dim_lambda)
                .collect(),
        });
        wall_seconds.push(t0.elapsed().as_secs_f64());
        // early stop on a negligible relative increment
        let increment = PceField::sub(&u_new, &u);
        let inc_norm = increment.gram_norm_sq(&problem.system.mass).sqrt();
        let new_norm = u_new.gram_norm_sq(&problem.system.mass).sqrt();
        delta_prev = Some(delta_k);
        rho_prev = rho;
        u = u_new;
        final_logs = logs;
        if let Some(tol) = cfg.early_stop {
            if new_norm > T::zero()
                && inc_norm / new_norm <= crate::real::real(tol)
                && k >= 2
            {
                break;
            }
        }
    }
    Ok(RunResult {
        u,
        w: w_approx,
        lambda: lambdas,
        history,
        patch_stats,
        final_logs,
        local_fits_converged,
        factorize_count: problem.system.factorize_count(),
        wall_seconds,
    })
}
