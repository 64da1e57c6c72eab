//! One-off probe of the benchmark reproduction (ignored).

use patchdd::config::{presets, WeightMode};
use patchdd::global_local::{iterate, solve_reference};
use patchdd::problem::Problem;
use std::time::Instant;

#[test]
#[ignore]
fn probe_criterion_one() {
    patchdd::init_thread_pool();
    let cfg = presets::benchmark(WeightMode::Isotropic, 1e-3, 2024);
    let problem = Problem::<f64>::build(&cfg).unwrap();
    let t0 = Instant::now();
    let reference = solve_reference(&problem, 1e-6).unwrap();
    println!(
        "reference @1e-6: {:.1}s, N={}, #A_U={}, converged={}",
        t0.elapsed().as_secs_f64(),
        reference.n_samples,
        reference.u_approx.set.len(),
        reference.converged
    );
    for (q, (w, l)) in reference.w.iter().zip(&reference.lambda).enumerate() {
        println!(
            "  q={} dim_w={} dim_lambda={} pdeg_w(own)=({}, {})",
            q + 1,
            w.set.len(),
            l.set.len(),
            w.set.partial_degree(2 * q),
            w.set.partial_degree(2 * q + 1)
        );
    }
    let t1 = Instant::now();
    let mut cfg_run = cfg.clone();
    cfg_run.k_max = 6;
    let problem_run = Problem::<f64>::build(&cfg_run).unwrap();
    let result = iterate(&problem_run, Some(&reference.u)).unwrap();
    println!("run @1e-3 k_max=6: {:.1}s", t1.elapsed().as_secs_f64());
    for row in &result.history {
        println!(
            "k={:2} rho={:.4} err={:.3e} N={:?} dim_l={:?}",
            row.k,
            row.rho,
            row.error.unwrap(),
            row.n_samples,
            row.dim_lambda
        );
    }
    for s in &result.patch_stats {
        if s.q == 0 {
            println!(
                "k={} q=1: N={} dim_w={} dim_l={} converged={}",
                s.k, s.n_samples, s.dim_w, s.dim_lambda, s.fit_converged
            );
        }
    }
    // growth log of patch 1 at the final iteration
    let log = &result.final_logs[0];
    println!("growth rows: {}", log.growth.len());
    for g in log.growth.iter().rev().take(12).collect::<Vec<_>>().iter().rev() {
        println!(
            "  round={} stage={} N={} dims={:?} eps={:?}",
            g.round, g.stage, g.n_samples, g.set_sizes, g.eps_norms
        );
    }
}
