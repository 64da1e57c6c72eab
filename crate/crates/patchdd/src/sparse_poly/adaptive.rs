//! Adaptive sparse least squares with random sampling and working sets.
//!
//! Outer structure: alternate an adaptive-sampling stage (add `ceil(p_add N)`
//! samples until every target's cross-validation error stagnates or
//! converges) with a working-set stage (per target, fit on the set plus its
//! reduced margin, select the dominant margin subset, expand; stop on
//! convergence, overfitting, or when the candidate set outgrows the sample
//! count). Everything is driven by the corrected leave-one-out error.

use super::legendre::{design_matrix, design_matrix_of};
use super::multi_index::{select_bulk, MultiIndex, MultiIndexSet};
use super::pce::PceApprox;
use super::regression::{loo_errors, ls_fit, LooErrors};
use super::sample_log::{GrowthRow, SampleLog};
use super::SparsePolyError;
use crate::real::{real, Real};
use ndarray::{Array2, ArrayView2};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Parameters of the adaptive solver. Paper defaults: one initial sample, a
/// 10% sampling factor, bulk parameter 0.5, 10% stagnation and overfitting
/// thresholds. The caps are safety nets against runaway adaptation on noisy
/// oracles.
#[derive(Debug, Clone)]
pub struct AdaptiveParams<T> {
    pub n0: usize,
    pub p_add: T,
    pub theta: T,
    pub eps_cv: T,
    pub eps_stagn: T,
    pub eps_overfit: T,
    pub seed: u64,
    pub max_samples: usize,
    pub max_rounds: usize,
    pub rank_tol: T,
}

impl<T: Real> AdaptiveParams<T> {
    pub fn new(eps_cv: T, seed: u64) -> Self {
        Self {
            n0: 1,
            p_add: real(0.1),
            theta: real(0.5),
            eps_cv,
            eps_stagn: real(0.1),
            eps_overfit: real(0.1),
            seed,
            max_samples: 5000,
            max_rounds: 200,
            rank_tol: real(1e-12),
        }
    }
}

/// A named fitting target; the oracle returns one output block per target.
#[derive(Debug, Clone)]
pub struct TargetSpec {
    pub name: String,
}

impl TargetSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into() }
    }
}

/// Result of an adaptive fit over one or more targets.
#[derive(Debug, Clone)]
pub struct AdaptiveOutcome<T> {
    pub approximations: Vec<PceApprox<T>>,
    pub log: SampleLog<T>,
    /// Whether every target reached `‖ε‖ ≤ ε_cv`.
    pub converged: bool,
    pub rounds: usize,
    pub n_samples: usize,
}

struct TargetState<T> {
    set: MultiIndexSet,
    n_out: usize,
    /// Most recent successful fit on the current set.
    fit: Option<(Array2<T>, LooErrors<T>)>,
    /// RMS-scale error vector at the previous sampling round, for stagnation
    /// tests.
    eps_prev: Option<Vec<T>>,
    stagnant: bool,
    /// Snapshot with the smallest error norm seen so far.
    best: Option<(MultiIndexSet, Array2<T>, LooErrors<T>)>,
}

impl<T: Real> TargetState<T> {
    fn eps_norm(&self) -> T {
        self.fit.as_ref().map_or(T::infinity(), |(_, e)| e.norm)
    }

    fn converged(&self, eps_cv: T) -> bool {
        self.eps_norm() <= eps_cv
    }
}

fn flat_view<T: Real>(flat: &[T], n: usize, n_out: usize) -> ArrayView2<'_, T> {
    ArrayView2::from_shape((n, n_out), flat).expect("output buffer shape")
}

/// Fit one target on its current set and refresh its error state.
fn refit<T: Real>(
    state: &mut TargetState<T>,
    samples: &[Vec<T>],
    ys: &[T],
    params: &AdaptiveParams<T>,
) {
    let n = samples.len();
    if n < state.set.len() {
        state.fit = None;
        return;
    }
    let psi = design_matrix(samples, &state.set);
    let y = flat_view(ys, n, state.n_out);
    match ls_fit(psi.view(), y, params.rank_tol)
        .and_then(|fit| loo_errors(&fit, psi.view(), y).map(|loo| (fit, loo)))
    {
        Ok((fit, loo)) => {
            let better = state
                .best
                .as_ref()
                .map_or(true, |(_, _, b)| loo.norm < b.norm || !b.norm.is_finite());
            if better {
                state.best = Some((state.set.clone(), fit.coefficients.clone(), loo.clone()));
            }
            state.fit = Some((fit.coefficients, loo));
        }
        Err(_) => {
            state.fit = None;
        }
    }
}

/// Adaptive sparse least-squares fit of several targets sharing one sample
/// pool. The oracle maps `(sample index, ξ)` to one output block per target
/// and must be deterministic; batch evaluations run in parallel and are
/// committed in sample order.
pub fn adaptive_fit_multi<T, F>(
    m: usize,
    targets: &[TargetSpec],
    oracle: &F,
    params: &AdaptiveParams<T>,
) -> Result<AdaptiveOutcome<T>, SparsePolyError>
where
    T: Real,
    F: Fn(usize, &[T]) -> Vec<Vec<T>> + Sync,
{
    assert!(!targets.is_empty());
    assert!(params.n0 >= 1, "need at least one initial sample");
    assert!(
        params.theta >= T::zero() && params.theta <= T::one(),
        "theta must be in [0, 1]"
    );
    let n_targets = targets.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut samples: Vec<Vec<T>> = Vec::new();
    let mut ys: Vec<Vec<T>> = vec![Vec::new(); n_targets];
    let mut states: Vec<TargetState<T>> = (0..n_targets)
        .map(|_| TargetState {
            set: MultiIndexSet::zero(m),
            n_out: 0,
            fit: None,
            eps_prev: None,
            stagnant: false,
            best: None,
        })
        .collect();
    let mut growth: Vec<GrowthRow> = Vec::new();
    let mut rounds = 0usize;

    let draw_and_eval = |count: usize,
                             rng: &mut ChaCha8Rng,
                             samples: &mut Vec<Vec<T>>,
                             ys: &mut Vec<Vec<T>>,
                             states: &mut Vec<TargetState<T>>| {
        let start = samples.len();
        for _ in 0..count {
            let xi: Vec<T> = (0..m).map(|_| real(rng.sample::<f64, _>(Open01))).collect();
            samples.push(xi);
        }
        let batch: Vec<Vec<Vec<T>>> = (start..samples.len())
            .into_par_iter()
            .map(|l| oracle(l, &samples[l]))
            .collect();
        for outs in batch {
            assert_eq!(outs.len(), n_targets, "oracle returned wrong target count");
            for (t, block) in outs.into_iter().enumerate() {
                if states[t].n_out == 0 {
                    states[t].n_out = block.len();
                }
                assert_eq!(block.len(), states[t].n_out, "oracle output size changed");
                ys[t].extend(block);
            }
        }
    };

    // initial pool
    draw_and_eval(params.n0, &mut rng, &mut samples, &mut ys, &mut states);

    let record = |growth: &mut Vec<GrowthRow>,
                  stage: &'static str,
                  rounds: usize,
                  samples: &[Vec<T>],
                  states: &[TargetState<T>]| {
        growth.push(GrowthRow {
            round: rounds,
            stage,
            n_samples: samples.len(),
            set_sizes: states.iter().map(|s| s.set.len()).collect(),
            eps_norms: states.iter().map(|s| s.eps_norm().to_f64_lossy()).collect(),
        });
    };

    let mut capped = false;
    let mut events = 0usize;
    'outer: loop {
        // ---- adaptive random sampling ----
        // one outer stage counts as one adaptation round toward the cap
        if rounds >= params.max_rounds {
            capped = true;
            break;
        }
        rounds += 1;
        loop {
            if samples.len() >= params.max_samples {
                capped = true;
                break 'outer;
            }
            events += 1;
            let n_add_t = (params.p_add * real::<T>(samples.len() as f64)).ceil();
            let n_add = (n_add_t.to_f64_lossy() as usize)
                .max(1)
                .min(params.max_samples - samples.len());
            draw_and_eval(n_add, &mut rng, &mut samples, &mut ys, &mut states);
            for t in 0..n_targets {
                if states[t].converged(params.eps_cv) {
                    // converged targets keep their fit; a final full-pool
                    // refit happens after the loop
                    continue;
                }
                refit(&mut states[t], &samples, &ys[t], params);
                let (stagnant, eps_now) = match &states[t].fit {
                    Some((_, loo)) if loo.norm.is_finite() => {
                        // compare on the RMS scale, consistent with the
                        // aggregated indicator
                        let rms: Vec<T> = loo.per_output.iter().map(|e| e.sqrt()).collect();
                        let stag = match &states[t].eps_prev {
                            Some(prev) => {
                                let mut diff_sq = T::zero();
                                for (a, b) in rms.iter().zip(prev.iter()) {
                                    let d = *a - *b;
                                    diff_sq = diff_sq + d * d;
                                }
                                let denom = loo.norm;
                                if denom == T::zero() {
                                    true
                                } else {
                                    let rel = diff_sq.sqrt() / denom;
                                    rel <= params.eps_stagn
                                }
                            }
                            None => false,
                        };
                        (stag, Some(rms))
                    }
                    _ => (false, None),
                };
                states[t].stagnant = stagnant;
                if let Some(eps) = eps_now {
                    states[t].eps_prev = Some(eps);
                }
            }
            record(&mut growth, "sample", events, &samples, &states);
            let all_converged = states.iter().all(|s| s.converged(params.eps_cv));
            if all_converged {
                break 'outer;
            }
            let all_settled =
                states.iter().all(|s| s.converged(params.eps_cv) || s.stagnant);
            if all_settled {
                break;
            }
        }

        // ---- working set strategy, per target ----
        for t in 0..n_targets {
            if states[t].converged(params.eps_cv) {
                continue;
            }
            loop {
                let margin = states[t].set.reduced_margin()?;
                if margin.is_empty() {
                    break;
                }
                if states[t].set.len() + margin.len() > samples.len() {
                    break;
                }
                let eps_before = states[t].eps_norm();
                // fit on A ∪ M to read the margin coefficient energies
                let mut extended: Vec<MultiIndex> = states[t].set.indices().to_vec();
                extended.extend(margin.iter().cloned());
                let psi_t = design_matrix_of(&samples, &extended, m);
                let y = flat_view(&ys[t], samples.len(), states[t].n_out);
                let fit_t = match ls_fit(psi_t.view(), y, params.rank_tol) {
                    Ok(f) => f,
                    Err(_) => break, // unstable: go collect more samples
                };
                let base = states[t].set.len();
                let norms_sq: Vec<T> = (0..margin.len())
                    .map(|j| {
                        let row = fit_t.coefficients.row(base + j);
                        row.iter().map(|v| *v * *v).sum()
                    })
                    .collect();
                let selected = select_bulk(&margin, &norms_sq, params.theta);
                for mi in selected {
                    states[t].set.push(mi)?;
                }
                debug_assert!(states[t].set.is_monotone());
                events += 1;
                refit(&mut states[t], &samples, &ys[t], params);
                record(&mut growth, "expand", events, &samples, &states);
                let eps_after = states[t].eps_norm();
                if !eps_after.is_finite() {
                    break; // unstable after expansion: resample
                }
                if eps_after <= params.eps_cv {
                    break;
                }
                if eps_before.is_finite()
                    && eps_after / eps_before > T::one() + params.eps_overfit
                {
                    break; // overfitting: return to the sampling stage
                }
            }
        }
        // leaving the working stage resets the stagnation baseline
        for s in states.iter_mut() {
            s.eps_prev = s
                .fit
                .as_ref()
                .map(|(_, loo)| loo.per_output.iter().map(|e| e.sqrt()).collect());
            s.stagnant = false;
        }
        if states.iter().all(|s| s.converged(params.eps_cv)) {
            // refit every target on the full pool; resume if anything drifts
            // back above the tolerance
            for t in 0..n_targets {
                refit(&mut states[t], &samples, &ys[t], params);
            }
            events += 1;
            record(&mut growth, "final", events, &samples, &states);
            if states.iter().all(|s| s.converged(params.eps_cv)) {
                break;
            }
        }
    }

    let converged = !capped && states.iter().all(|s| s.converged(params.eps_cv));
    let n_samples = samples.len();
    let approximations: Vec<PceApprox<T>> = states
        .into_iter()
        .map(|s| {
            // prefer the current fit; fall back to the best stable snapshot
            let (set, coefficients, loo) = match (s.fit, s.best) {
                (Some((c, e)), _) => (s.set, c, e),
                (None, Some((set, c, e))) => (set, c, e),
                (None, None) => (
                    s.set.clone(),
                    Array2::zeros((s.set.len(), s.n_out)),
                    LooErrors {
                        per_output: ndarray::Array1::from_elem(s.n_out, T::infinity()),
                        per_output_raw: ndarray::Array1::from_elem(s.n_out, T::infinity()),
                        correction: T::one(),
                        norm: T::infinity(),
                    },
                ),
            };
            PceApprox {
                m,
                set,
                coefficients,
                loo: loo.per_output,
                loo_norm: loo.norm,
                seed: params.seed,
                n_samples,
            }
        })
        .collect();
    let outputs: Vec<Vec<T>> = (0..n_samples)
        .map(|l| {
            let mut row = Vec::new();
            for (t, y) in ys.iter().enumerate() {
                let n_out = approximations[t].n_outputs();
                row.extend_from_slice(&y[l * n_out..(l + 1) * n_out]);
            }
            row
        })
        .collect();
    Ok(AdaptiveOutcome {
        approximations,
        log: SampleLog { seed: params.seed, points: samples, outputs, growth },
        converged,
        rounds,
        n_samples,
    })
}

/// Single-target adaptive fit.
pub fn adaptive_fit<T, F>(
    m: usize,
    oracle: &F,
    params: &AdaptiveParams<T>,
) -> Result<(PceApprox<T>, SampleLog<T>, bool), SparsePolyError>
where
    T: Real,
    F: Fn(usize, &[T]) -> Vec<T> + Sync,
{
    let wrapped = |l: usize, xi: &[T]| vec![oracle(l, xi)];
    let outcome =
        adaptive_fit_multi(m, &[TargetSpec::new("u")], &wrapped, params)?;
    let mut approximations = outcome.approximations;
    Ok((approximations.remove(0), outcome.log, outcome.converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse_poly::legendre::eval_basis;

    #[test]
    fn constant_oracle_terminates_immediately() {
        let oracle = |_l: usize, _xi: &[f64]| vec![2.5, -1.0];
        let params = AdaptiveParams::new(1e-10, 42);
        let (pce, log, converged) = adaptive_fit(3, &oracle, &params).unwrap();
        assert!(converged);
        assert_eq!(pce.set.len(), 1);
        assert!(pce.set.get(0).is_zero());
        assert!((pce.coefficients[[0, 0]] - 2.5).abs() < 1e-12);
        assert!(pce.loo_norm < 1e-12);
        assert_eq!(log.points.len(), log.outputs.len());
        for p in &log.points {
            assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }

    #[test]
    fn recovers_sparse_polynomial_in_high_dimension() {
        // pure degree-2 polynomial in ξ₁ only, m = 16
        let m = 16;
        let a1 = MultiIndex::unit(m, 0);
        let mut d2 = vec![0u8; m];
        d2[0] = 2;
        let a2 = MultiIndex::new(&d2);
        let oracle = |_l: usize, xi: &[f64]| {
            vec![1.0 + 2.0 * eval_basis(&a1, xi) - 0.5 * eval_basis(&a2, xi)]
        };
        let params = AdaptiveParams::new(1e-10, 7);
        let (pce, _log, converged) = adaptive_fit(m, &oracle, &params).unwrap();
        assert!(converged, "eps = {}", pce.loo_norm);
        assert!(pce.n_samples <= 200, "N = {}", pce.n_samples);
        assert!(pce.loo_norm <= 1e-10);
        // recovered set concentrates on ξ₁ with a little slack
        for mi in pce.set.iter() {
            assert!(mi.deg(0) <= 3);
            for i in 1..m {
                assert!(mi.deg(i) <= 1, "unexpected degree in dim {i}: {:?}", mi);
            }
        }
        // fitted values reproduce the oracle away from the samples
        let xi: Vec<f64> = (0..m).map(|i| 0.3 + 0.02 * i as f64).collect();
        let want: f64 = 1.0 + 2.0 * eval_basis(&a1, &xi) - 0.5 * eval_basis(&a2, &xi);
        assert!((pce.evaluate(&xi)[0] - want).abs() < 1e-8);
    }

    #[test]
    fn reproducible_given_seed() {
        let oracle = |_l: usize, xi: &[f64]| {
            vec![(xi[0] * 3.0).sin() + xi[1] * xi[1], (xi[1] - 0.5).powi(3)]
        };
        let params = AdaptiveParams { max_rounds: 40, ..AdaptiveParams::new(1e-4, 123) };
        let a = adaptive_fit_multi(2, &[TargetSpec::new("u")], &|l, xi| vec![oracle(l, xi)], &params)
            .unwrap();
        let b = adaptive_fit_multi(2, &[TargetSpec::new("u")], &|l, xi| vec![oracle(l, xi)], &params)
            .unwrap();
        assert_eq!(a.n_samples, b.n_samples);
        assert_eq!(a.rounds, b.rounds);
        let (pa, pb) = (&a.approximations[0], &b.approximations[0]);
        assert_eq!(pa.set.indices(), pb.set.indices());
        for (x, y) in pa.coefficients.iter().zip(pb.coefficients.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn pair_of_targets_with_distinct_structure() {
        // target 0 depends on ξ₁, target 1 on ξ₂; joint sampling, separate sets
        let oracle = |_l: usize, xi: &[f64]| {
            vec![vec![2.0 * xi[0] * xi[0]], vec![0.5 - xi[1]]]
        };
        let params = AdaptiveParams::new(1e-9, 5);
        let out = adaptive_fit_multi(
            2,
            &[TargetSpec::new("a"), TargetSpec::new("b")],
            &oracle,
            &params,
        )
        .unwrap();
        assert!(out.converged);
        let sa = &out.approximations[0].set;
        let sb = &out.approximations[1].set;
        assert!(sa.partial_degree(0) >= 2);
        assert_eq!(sa.partial_degree(1), 0);
        assert_eq!(sb.partial_degree(0), 0);
        assert!(sb.partial_degree(1) >= 1);
        assert!(out.approximations[0].set.is_monotone());
        assert!(out.approximations[1].set.is_monotone());
    }

    #[test]
    fn caps_return_best_effort_with_flag() {
        // noisy oracle that can never reach the tolerance
        let oracle = |l: usize, xi: &[f64]| {
            let noise = ((l as f64 * 12.9898).sin() * 43758.5453).fract();
            vec![xi[0] + 0.5 * noise]
        };
        let params = AdaptiveParams {
            max_rounds: 25,
            max_samples: 60,
            ..AdaptiveParams::new(1e-14, 3)
        };
        let out = adaptive_fit_multi(2, &[TargetSpec::new("u")], &|l, xi| vec![oracle(l, xi)], &params)
            .unwrap();
        assert!(!out.converged);
        assert!(out.n_samples <= 60);
        assert!(out.approximations[0].loo_norm.is_finite());
    }
}
