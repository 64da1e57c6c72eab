//! End-to-end checks of the global-local iteration on reduced geometries.

use patchdd::config::{presets, FictitiousRule, RelaxationSpec, RunConfig, WeightMode};
use patchdd::global_local::{
    coupled_residuals, error_indicator, iterate, solve_reference, PceField,
};
use patchdd::problem::Problem;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_config(eps_cv: f64, seed: u64) -> RunConfig {
    let mut cfg = presets::compact(2, eps_cv, seed);
    cfg.k_max = 8;
    cfg
}

/// Linear deterministic setting: frozen sample, zero reaction, matching
/// fictitious coefficient, identical meshes. With ρ = 1 the iteration must
/// agree with the monolithic solution after two iterations.
#[test]
fn linear_deterministic_converges_in_two_iterations() {
    let mut cfg = small_config(1e-8, 5);
    cfg.fine_size = cfg.coarse_size; // identical trial spaces on the patches
    cfg.fixed_xi = Some(vec![0.7, 0.0, 0.3, 0.0]); // reaction components zero
    cfg.fictitious = FictitiousRule::Fixed;
    cfg.relaxation = RelaxationSpec::Fixed { rho: 1.0 };
    cfg.k_max = 2;
    cfg.early_stop = None;
    let problem = Problem::<f64>::build(&cfg).unwrap();
    let reference = solve_reference(&problem, 1e-8).unwrap();
    assert!(reference.converged);
    // deterministic inputs: single-sample reference with the trivial set
    assert_eq!(reference.u_approx.set.len(), 1);
    let result = iterate(&problem, Some(&reference.u)).unwrap();
    let final_err = result.history.last().unwrap().error.unwrap();
    assert!(
        final_err <= 1e-10,
        "two-iteration error {final_err:e} exceeds 1e-10"
    );
}

/// The per-coefficient global solves match a dense from-scratch solve.
#[test]
fn global_step_matches_dense_oracle() {
    let cfg = small_config(1e-3, 9);
    let problem = Problem::<f64>::build(&cfg).unwrap();
    let sys = &problem.system;
    let n = sys.n_nodes;
    // nontrivial multiplier coefficients on both patches, two chaos indices
    let mut lambdas = Vec::new();
    for (q, pp) in problem.patches.iter().enumerate() {
        let nf = pp.n_multipliers();
        let mut set = patchdd::sparse_poly::MultiIndexSet::zero(problem.m);
        set.push(patchdd::sparse_poly::MultiIndex::unit(problem.m, q)).unwrap();
        let mut coeff = ndarray::Array2::<f64>::zeros((2, nf));
        for j in 0..nf {
            coeff[[0, j]] = 0.01 * (j as f64 * 0.4).sin() + 0.02 * q as f64;
            coeff[[1, j]] = 0.005 * (j as f64 * 0.9).cos();
        }
        lambdas.push(patchdd::sparse_poly::PceApprox {
            m: problem.m,
            set,
            coefficients: coeff,
            loo: ndarray::Array1::zeros(nf),
            loo_norm: 0.0,
            seed: 0,
            n_samples: 1,
        });
    }
    let u_prev = PceField::zero(problem.m, n);
    let u_hat = sys.global_step(&u_prev, &lambdas);
    // dense oracle per index: assemble rhs and solve with dense elimination
    let dense_c = sys.c_full.to_dense();
    let free: Vec<usize> = (0..n)
        .filter(|&i| sys.dof.to_reduced(i).is_some())
        .collect();
    for alpha in u_hat.set.iter() {
        let mut rhs = vec![0.0; n];
        for (q, lam) in lambdas.iter().enumerate() {
            if let Some(k) = lam.set.position(alpha) {
                let l: Vec<f64> = lam.coefficients.row(k).to_vec();
                sys.couplings[q].scatter_into(&l, &mut rhs, -1.0);
            }
        }
        if alpha.is_zero() {
            for (r, v) in rhs.iter_mut().zip(&sys.l_ext) {
                *r += *v;
            }
        }
        // dense solve on free dofs
        let nf = free.len();
        let mut a = vec![vec![0.0f64; nf]; nf];
        let mut b = vec![0.0f64; nf];
        for (ri, &i) in free.iter().enumerate() {
            b[ri] = rhs[i];
            for (rj, &j) in free.iter().enumerate() {
                a[ri][rj] = dense_c[[i, j]];
            }
        }
        // Gaussian elimination with partial pivoting
        for c in 0..nf {
            let piv = (c..nf).max_by(|&p, &q2| a[p][c].abs().total_cmp(&a[q2][c].abs())).unwrap();
            a.swap(c, piv);
            b.swap(c, piv);
            for r in c + 1..nf {
                let f = a[r][c] / a[c][c];
                for k in c..nf {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
        for r in (0..nf).rev() {
            for k in r + 1..nf {
                let bk = b[k];
                b[r] -= a[r][k] * bk;
            }
            b[r] /= a[r][r];
        }
        let col = u_hat.coeff(alpha).unwrap();
        for (ri, &i) in free.iter().enumerate() {
            assert!(
                (col[i] - b[ri]).abs() < 1e-10,
                "index {alpha:?} node {i}: {} vs {}",
                col[i],
                b[ri]
            );
        }
    }
}

/// A short stochastic run decreases the error indicator monotonically in the
/// first iterations and satisfies the coupled equations at fresh samples.
#[test]
fn small_stochastic_run_against_reference() {
    let cfg = small_config(1e-3, 31);
    let problem = Problem::<f64>::build(&cfg).unwrap();
    let reference = solve_reference(&problem, 1e-5).unwrap();
    assert!(reference.converged, "reference fit did not converge");
    let result = iterate(&problem, Some(&reference.u)).unwrap();
    let errors: Vec<f64> = result.history.iter().map(|r| r.error.unwrap()).collect();
    assert!(errors[0] < 1.0, "first iterate should already reduce the unit error");
    let final_err = *errors.last().unwrap();
    assert!(final_err < 5e-3, "final error {final_err}");
    assert!(final_err <= errors[0]);
    assert_eq!(result.factorize_count, 1);
    // coupled residuals at fresh samples stay at the local tolerance level
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds.validation);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let xi: Vec<f64> = (0..problem.m).map(|_| rng.sample(Open01)).collect();
        let report =
            coupled_residuals(&problem, &result.u, &result.w, &result.lambda, &xi).unwrap();
        worst = worst.max(report.max());
    }
    assert!(worst <= 10.0 * cfg.eps_cv, "coupled residual {worst:e}");
    // the reference surrogate is at least as consistent as the iterate
    let mut worst_ref = 0.0f64;
    for _ in 0..3 {
        let xi: Vec<f64> = (0..problem.m).map(|_| rng.sample(Open01)).collect();
        let report =
            coupled_residuals(&problem, &reference.u, &reference.w, &reference.lambda, &xi)
                .unwrap();
        worst_ref = worst_ref.max(report.max());
    }
    assert!(worst_ref <= worst.max(10.0 * cfg.eps_cv), "reference residual {worst_ref:e}");
    // the raw monolithic Newton solutions satisfy all coupled equations to
    // solver precision
    let coupled = patchdd::global_local::CoupledSystem::new(&problem);
    for _ in 0..3 {
        let xi: Vec<f64> = (0..problem.m).map(|_| rng.sample(Open01)).collect();
        let (u_s, w_s, lam_s, _iters) = coupled.solve_sample(&xi, 1e-12, None).unwrap();
        let report =
            patchdd::global_local::coupled_residuals_at(&problem, &u_s, &w_s, &lam_s, &xi)
                .unwrap();
        assert!(report.max() <= 1e-9, "raw solve residual {:e}", report.max());
    }
}

/// Reruns with identical seeds produce byte-identical histories.
#[test]
fn reruns_are_byte_identical() {
    let cfg = small_config(1e-2, 77);
    let run = |cfg: &RunConfig| {
        let problem = Problem::<f64>::build(cfg).unwrap();
        let result = iterate(&problem, None).unwrap();
        let mut buf = Vec::new();
        result.write_history_csv(&mut buf, &cfg.hash()).unwrap();
        buf
    };
    let a = run(&cfg);
    let b = run(&cfg);
    assert_eq!(a, b);
}

/// The error indicator of the zero field against any reference is one.
#[test]
fn indicator_normalization() {
    let cfg = small_config(1e-3, 13);
    let problem = Problem::<f64>::build(&cfg).unwrap();
    let reference = solve_reference(&problem, 1e-3).unwrap();
    let zero = PceField::zero(problem.m, problem.global_mesh.n_nodes());
    let e = error_indicator(&zero, &reference.u, &problem.system.mass_ext).unwrap();
    assert!((e - 1.0).abs() < 1e-12);
}
