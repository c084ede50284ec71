//! Minimization of real objectives over the unitary group U(m).
//!
//! The engine is Riemannian gradient descent: at each iterate `U` the
//! anti-Hermitian gradient `G_R = U^H G − G^H U` (with `G` the Euclidean
//! Wirtinger gradient `∂f/∂U*`) is followed through the exponential-map
//! retraction `U ← U · exp(−η G_R)`, with η found by Armijo backtracking.
//! Multistart wraps the descent: start 0 begins from the identity, the rest
//! from Haar-random unitaries drawn from per-start seeded streams, so results
//! are reproducible bit for bit and independent of scheduling.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::linalg;
use crate::states::MixingUnitary;
use crate::{Error, Result};

/// Armijo sufficient-decrease constant.
const ARMIJO_C: f64 = 1e-4;
/// Line-search shrink factor.
const ARMIJO_SHRINK: f64 = 0.5;
/// Initial trial step of every line search.
const INITIAL_STEP: f64 = 1.0;
/// Smallest step the line search will try before giving up.
const MIN_STEP: f64 = 1e-14;
/// Largest step the expansion phase will try.
const MAX_STEP: f64 = 1e6;
/// Iterations between explicit re-orthonormalizations of the iterate.
const REORTHONORMALIZE_EVERY: usize = 50;

/// Configuration for [`minimize_unitary`].
#[derive(Debug, Clone)]
pub struct OptimConfig {
    /// Number of independent starts (start 0 is the identity).
    pub starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Stop when the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop when an accepted step improves the objective by less than this.
    pub value_tol: f64,
    /// Central-difference step for the finite-difference gradient.
    pub fd_step: f64,
    /// Seed of the random-start stream; start `k` draws from `seed + k`.
    pub seed: u64,
    /// Worker threads for the multistart loop; 1 runs fully sequentially.
    pub threads: usize,
    /// Record the accepted objective values of every start.
    pub record_trace: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            max_iters: 2000,
            grad_tol: 1e-9,
            value_tol: 1e-12,
            fd_step: 1e-6,
            seed: 0,
            threads: 1,
            record_trace: false,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(Error::BadParameter {
                family: "optim".into(),
                reason: "starts must be at least 1".into(),
            });
        }
        for (name, value) in [
            ("grad_tol", self.grad_tol),
            ("value_tol", self.value_tol),
            ("fd_step", self.fd_step),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::BadParameter {
                    family: "optim".into(),
                    reason: format!("{name} must be positive, got {value}"),
                });
            }
        }
        Ok(())
    }
}

/// A real objective on U(m), optionally with a closed-form Euclidean gradient.
pub trait UnitaryObjective: Sync {
    /// The matrix dimension m.
    fn dim(&self) -> usize;

    /// Objective value; must be deterministic in `u`.
    fn value(&self, u: &DMatrix<C64>) -> f64;

    /// Wirtinger gradient `G_{pq} = ∂f/∂conj(U_{pq})`, if available in closed
    /// form. Engines fall back to finite differences when this is `None`.
    fn euclidean_grad(&self, _u: &DMatrix<C64>) -> Option<DMatrix<C64>> {
        None
    }
}

/// Wrap a plain closure as an objective (finite-difference gradients only).
pub struct FnObjective<F: Fn(&DMatrix<C64>) -> f64 + Sync> {
    m: usize,
    f: F,
}

impl<F: Fn(&DMatrix<C64>) -> f64 + Sync> FnObjective<F> {
    pub fn new(m: usize, f: F) -> Self {
        Self { m, f }
    }
}

impl<F: Fn(&DMatrix<C64>) -> f64 + Sync> UnitaryObjective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.m
    }

    fn value(&self, u: &DMatrix<C64>) -> f64 {
        (self.f)(u)
    }
}

/// How [`riemannian_gradient`] obtains the Euclidean gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Closed-form gradient from the objective. Panics if the objective does
    /// not provide one; that is a caller bug, not a runtime condition.
    Analytic,
    /// Central finite differences over the m² tangent coordinates.
    FiniteDifference,
}

/// Result of a multistart minimization.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub best_value: f64,
    pub best_u: MixingUnitary,
    pub per_start_values: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    /// Accepted objective values per start, present when
    /// `cfg.record_trace` was set.
    pub traces: Option<Vec<Vec<f64>>>,
}

/// The orthonormal basis of the anti-Hermitian m×m matrices under
/// `⟨X, Y⟩ = Re Tr(X^H Y)`.
fn antihermitian_basis(m: usize) -> Vec<DMatrix<C64>> {
    let mut basis = Vec::with_capacity(m * m);
    let i = C64::new(0.0, 1.0);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for j in 0..m {
        let mut e = DMatrix::<C64>::zeros(m, m);
        e[(j, j)] = i;
        basis.push(e);
    }
    for j in 0..m {
        for k in (j + 1)..m {
            let mut e = DMatrix::<C64>::zeros(m, m);
            e[(j, k)] = s;
            e[(k, j)] = -s;
            basis.push(e);
            let mut e = DMatrix::<C64>::zeros(m, m);
            e[(j, k)] = i * s;
            e[(k, j)] = i * s;
            basis.push(e);
        }
    }
    basis
}

/// Riemannian gradient of the objective at `u`: the anti-Hermitian matrix
/// `G_R` with `d/dt f(u·exp(t A))|₀ = Re Tr(G_R^H A)` for anti-Hermitian `A`.
pub fn riemannian_gradient<O: UnitaryObjective + ?Sized>(
    objective: &O,
    u: &MixingUnitary,
    mode: GradientMode,
    fd_step: f64,
) -> Result<DMatrix<C64>> {
    let um = u.matrix();
    match mode {
        GradientMode::Analytic => {
            let g = objective
                .euclidean_grad(um)
                .expect("analytic gradient requested from an objective without one");
            if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFiniteObjective);
            }
            Ok(um.adjoint() * &g - g.adjoint() * um)
        }
        GradientMode::FiniteDifference => {
            let m = objective.dim();
            let mut grad = DMatrix::<C64>::zeros(m, m);
            for basis_elem in antihermitian_basis(m) {
                let step = linalg::exp_antihermitian(&basis_elem.scale(fd_step))?;
                let back = linalg::exp_antihermitian(&basis_elem.scale(-fd_step))?;
                let plus = objective.value(&(um * &step));
                let minus = objective.value(&(um * &back));
                if !plus.is_finite() || !minus.is_finite() {
                    return Err(Error::NonFiniteObjective);
                }
                let coeff = (plus - minus) / (2.0 * fd_step);
                grad += basis_elem * C64::new(coeff, 0.0);
            }
            Ok(grad)
        }
    }
}

fn frobenius_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

struct StartOutcome {
    value: f64,
    u: DMatrix<C64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn descend<O: UnitaryObjective + ?Sized>(
    objective: &O,
    start: DMatrix<C64>,
    cfg: &OptimConfig,
    use_analytic: bool,
) -> Result<StartOutcome> {
    let mode = if use_analytic {
        GradientMode::Analytic
    } else {
        GradientMode::FiniteDifference
    };
    let mut u = start;
    let mut value = objective.value(&u);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(value);
    }

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let wrapped = MixingUnitary::new(u.clone()).map_err(|_| {
            Error::ComputationFailed("iterate drifted off the unitary group".into())
        })?;
        let grad = riemannian_gradient(objective, &wrapped, mode, cfg.fd_step)?;
        let grad_norm = frobenius_norm(&grad);
        if grad_norm < cfg.grad_tol {
            converged = true;
            break;
        }

        // Armijo backtracking along U exp(-eta * grad); when the unit step
        // already satisfies the sufficient-decrease condition, keep doubling
        // while it continues to hold (degenerate valleys need steps far
        // beyond the gradient scale to converge in the iteration budget)
        let armijo = |eta: f64, candidate_value: f64| {
            candidate_value <= value - ARMIJO_C * eta * grad_norm * grad_norm
        };
        let try_step = |eta: f64| -> Result<(DMatrix<C64>, f64)> {
            let step = linalg::exp_antihermitian(&grad.scale(-eta))?;
            let candidate = &u * step;
            let candidate_value = objective.value(&candidate);
            if !candidate_value.is_finite() {
                return Err(Error::NonFiniteObjective);
            }
            Ok((candidate, candidate_value))
        };

        let mut eta = INITIAL_STEP;
        let mut found: Option<(DMatrix<C64>, f64)> = None;
        let (first, first_value) = try_step(eta)?;
        if armijo(eta, first_value) {
            let mut best = (first, first_value);
            while eta <= MAX_STEP {
                let doubled = eta * 2.0;
                let (cand, cand_value) = try_step(doubled)?;
                if armijo(doubled, cand_value) && cand_value < best.1 {
                    best = (cand, cand_value);
                    eta = doubled;
                } else {
                    break;
                }
            }
            found = Some(best);
        } else {
            eta *= ARMIJO_SHRINK;
            while eta >= MIN_STEP {
                let (cand, cand_value) = try_step(eta)?;
                if armijo(eta, cand_value) {
                    found = Some((cand, cand_value));
                    break;
                }
                eta *= ARMIJO_SHRINK;
            }
        }

        let accepted = if let Some((candidate, candidate_value)) = found {
            debug_assert!(candidate_value <= value, "line search increased the objective");
            let improvement = value - candidate_value;
            u = candidate;
            value = candidate_value;
            if cfg.record_trace {
                trace.push(value);
            }
            if improvement < cfg.value_tol {
                converged = true;
            }
            true
        } else {
            false
        };
        if !accepted {
            // no admissible step: first-order stationary to working precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
        if (iter + 1) % REORTHONORMALIZE_EVERY == 0 {
            u = linalg::project_unitary(&u);
            value = objective.value(&u);
        }
    }

    let u = linalg::project_unitary(&u);
    let value = objective.value(&u);
    if cfg.record_trace {
        trace.push(value);
    }
    Ok(StartOutcome {
        value,
        u,
        iterations,
        converged,
        trace,
    })
}

/// Multistart Riemannian descent over U(m).
///
/// Deterministic for a fixed `(cfg.seed, m, objective)`: per-start random
/// streams are derived as `seed + start`, and the winner is the lowest value
/// with ties broken by start index, independent of thread scheduling.
pub fn minimize_unitary<O: UnitaryObjective + ?Sized>(
    objective: &O,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    let m = objective.dim();
    let use_analytic = objective.euclidean_grad(&DMatrix::identity(m, m)).is_some();

    let run_start = |start: usize| -> Result<StartOutcome> {
        let initial = if start == 0 {
            DMatrix::identity(m, m)
        } else {
            let mut rng = linalg::seeded_rng(cfg.seed.wrapping_add(start as u64));
            linalg::haar_unitary(m, &mut rng)
        };
        descend(objective, initial, cfg, use_analytic)
    };

    let outcomes: Vec<Result<StartOutcome>> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::ComputationFailed(format!("thread pool: {e}")))?;
        pool.install(|| (0..cfg.starts).into_par_iter().map(run_start).collect())
    } else {
        (0..cfg.starts).map(run_start).collect()
    };

    let mut per_start_values = Vec::with_capacity(cfg.starts);
    let mut iterations = Vec::with_capacity(cfg.starts);
    let mut converged = Vec::with_capacity(cfg.starts);
    let mut traces = Vec::with_capacity(cfg.starts);
    let mut best: Option<(usize, f64)> = None;
    let mut results = Vec::with_capacity(cfg.starts);
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        let mut outcome = outcome?;
        per_start_values.push(outcome.value);
        iterations.push(outcome.iterations);
        converged.push(outcome.converged);
        traces.push(std::mem::take(&mut outcome.trace));
        if best.is_none_or(|(_, b)| outcome.value < b) {
            best = Some((idx, outcome.value));
        }
        results.push(outcome);
    }
    let (best_idx, best_value) = best.expect("starts >= 1");
    let best_u = MixingUnitary::new(results[best_idx].u.clone())
        .map_err(|_| Error::ComputationFailed("optimizer returned a non-unitary matrix".into()))?;

    Ok(OptimResult {
        best_value,
        best_u,
        per_start_values,
        iterations,
        converged,
        traces: cfg.record_trace.then_some(traces),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{seeded_rng, unitarity_deviation};

    #[test]
    fn constant_objective_converges_immediately() {
        let objective = FnObjective::new(3, |_: &DMatrix<C64>| 0.0);
        let cfg = OptimConfig {
            starts: 2,
            ..OptimConfig::default()
        };
        let result = minimize_unitary(&objective, &cfg).unwrap();
        assert_eq!(result.best_value, 0.0);
        assert!(result.converged.iter().all(|&c| c));
        assert_eq!(result.iterations[0], 1);
        assert!(unitarity_deviation(result.best_u.matrix()) < 1e-10);
    }

    #[test]
    fn corner_weight_objective_reaches_zero() {
        // f(U) = |U_00|^2 has minimum 0 on U(2)
        let objective = FnObjective::new(2, |u: &DMatrix<C64>| u[(0, 0)].norm_sqr());
        let cfg = OptimConfig {
            starts: 4,
            seed: 5,
            ..OptimConfig::default()
        };
        let result = minimize_unitary(&objective, &cfg).unwrap();
        assert!(result.best_value < 1e-9, "best = {}", result.best_value);
    }

    #[test]
    fn determinism_across_runs_and_thread_counts() {
        let objective = FnObjective::new(3, |u: &DMatrix<C64>| {
            (u[(0, 0)].norm_sqr() - 0.25).powi(2) + u[(1, 2)].norm_sqr()
        });
        let cfg = OptimConfig {
            starts: 4,
            seed: 9,
            max_iters: 200,
            ..OptimConfig::default()
        };
        let a = minimize_unitary(&objective, &cfg).unwrap();
        let b = minimize_unitary(&objective, &cfg).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.per_start_values, b.per_start_values);

        let parallel = OptimConfig {
            threads: 4,
            ..cfg.clone()
        };
        let c = minimize_unitary(&objective, &parallel).unwrap();
        assert_eq!(a.best_value.to_bits(), c.best_value.to_bits());
        assert_eq!(a.per_start_values, c.per_start_values);
    }

    #[test]
    fn multistart_dominates_identity_start() {
        let objective = FnObjective::new(4, |u: &DMatrix<C64>| {
            (0..4).map(|mu| u[(mu, 0)].norm_sqr().powi(2)).sum()
        });
        let cfg = OptimConfig {
            starts: 6,
            seed: 2,
            ..OptimConfig::default()
        };
        let result = minimize_unitary(&objective, &cfg).unwrap();
        assert!(result.best_value <= result.per_start_values[0] + 1e-15);
    }

    #[test]
    fn fd_gradient_of_known_functional() {
        // f(U) = |U_00|^2: df along A at U=I picks out the tangent component
        let objective = FnObjective::new(2, |u: &DMatrix<C64>| u[(0, 0)].norm_sqr());
        let mut rng = seeded_rng(11);
        let u = MixingUnitary::haar(2, &mut rng);
        let grad = riemannian_gradient(&objective, &u, GradientMode::FiniteDifference, 1e-6)
            .unwrap();
        // anti-Hermitian
        let sum = &grad + grad.adjoint();
        assert!(frobenius_norm(&sum) < 1e-8);
        // directional derivative check against a secant
        let basis = antihermitian_basis(2);
        for elem in basis {
            let h = 1e-7;
            let forward = objective.value(
                &(u.matrix() * linalg::exp_antihermitian(&elem.scale(h)).unwrap()),
            );
            let backward = objective.value(
                &(u.matrix() * linalg::exp_antihermitian(&elem.scale(-h)).unwrap()),
            );
            let secant = (forward - backward) / (2.0 * h);
            let predicted: f64 = grad
                .iter()
                .zip(elem.iter())
                .map(|(g, a)| (g.conj() * a).re)
                .sum();
            assert!(
                (secant - predicted).abs() < 1e-6,
                "secant {secant} vs predicted {predicted}"
            );
        }
    }

    #[test]
    fn gradient_vanishes_at_converged_minimizer() {
        // smooth strictly-positive quartic with a clean interior minimum:
        // value_tol tightened so the gradient criterion is the active stop
        let objective = FnObjective::new(2, |u: &DMatrix<C64>| {
            (u[(0, 0)].norm_sqr() - 0.5).powi(2) + (u[(1, 1)].norm_sqr() - 0.5).powi(2)
        });
        let cfg = OptimConfig {
            starts: 3,
            seed: 13,
            value_tol: 1e-18,
            max_iters: 5000,
            ..OptimConfig::default()
        };
        let result = minimize_unitary(&objective, &cfg).unwrap();
        let grad = riemannian_gradient(
            &objective,
            &result.best_u,
            GradientMode::FiniteDifference,
            cfg.fd_step,
        )
        .unwrap();
        let norm = frobenius_norm(&grad);
        assert!(norm < 10.0 * cfg.grad_tol, "gradient norm {norm}");
    }

    #[test]
    fn trace_recording_is_optional_and_monotone() {
        let objective = FnObjective::new(2, |u: &DMatrix<C64>| u[(0, 0)].norm_sqr());
        let cfg = OptimConfig {
            starts: 2,
            seed: 4,
            record_trace: true,
            ..OptimConfig::default()
        };
        let result = minimize_unitary(&objective, &cfg).unwrap();
        let traces = result.traces.expect("traces recorded");
        assert_eq!(traces.len(), 2);
        for trace in &traces {
            for pair in trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12);
            }
        }

        let quiet = OptimConfig {
            record_trace: false,
            ..cfg
        };
        assert!(minimize_unitary(&objective, &quiet).unwrap().traces.is_none());
    }

    #[test]
    fn config_validation() {
        let cfg = OptimConfig {
            starts: 0,
            ..OptimConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = OptimConfig {
            grad_tol: 0.0,
            ..OptimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let objective = FnObjective::new(2, |u: &DMatrix<C64>| {
            if u[(0, 0)].norm_sqr() < 0.99 {
                f64::NAN
            } else {
                1.0 - u[(0, 0)].norm_sqr()
            }
        });
        let cfg = OptimConfig {
            starts: 3,
            seed: 1,
            ..OptimConfig::default()
        };
        assert!(matches!(
            minimize_unitary(&objective, &cfg),
            Err(Error::NonFiniteObjective)
        ));
    }
}
