//! Symmetric strategy optimization and best-response search.
//!
//! Both searches run multi-start quasi-Newton gradient ascent with central
//! finite differences and a backtracking (Armijo) line search over the
//! `m^2 - 1` generator coefficients of a special-unitary matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::OutcomePartition;
use crate::qstate::{PureState, SquareMatrix};
use crate::scalar::Real;
use crate::su_param::{
    generator_basis, random_params, unitary_from_coeffs, GeneratorBasis, ParamsJson, UnitaryJson,
    UnitaryParams,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_tolerance: f64,
    pub value_tolerance: f64,
    pub seed: u64,
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 2000,
            step_tolerance: 1e-9,
            value_tolerance: 1e-10,
            seed: 0,
            fd_step: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_restarts(self, restarts: usize) -> Self {
        Self { restarts, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::input("restarts must be at least 1"));
        }
        for (name, v) in [
            ("step_tolerance", self.step_tolerance),
            ("value_tolerance", self.value_tolerance),
            ("fd_step", self.fd_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult<T> {
    /// For [`best_response`] these parametrize the left factor `W` of `W * fixed`.
    pub best_params: UnitaryParams<T>,
    pub best_unitary: SquareMatrix<T>,
    pub payoff: T,
    /// Ascent iterations summed over all restarts.
    pub iterations_used: usize,
    pub restarts_used: usize,
    pub converged: bool,
}

impl<T: Real> OptimizationResult<T> {
    pub fn to_json(&self) -> OptimizationJson {
        OptimizationJson {
            params: self.best_params.to_json(),
            unitary: self.best_unitary.to_json(),
            payoff: self.payoff.to_f64_lossy(),
            iterations_used: self.iterations_used,
            restarts_used: self.restarts_used,
            converged: self.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationJson {
    pub params: ParamsJson,
    pub unitary: UnitaryJson,
    pub payoff: f64,
    pub iterations_used: usize,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Payoff of player 1 when every player applies `u` to `initial`.
pub fn symmetric_payoff<T: Real>(
    u: &SquareMatrix<T>,
    initial: &PureState<T>,
    partition: &OutcomePartition,
) -> Result<T> {
    let ops = vec![u.clone(); initial.n()];
    partition.expected_payoff(&initial.apply_local(&ops)?, 0)
}

/// Expected payoffs of all players under an arbitrary local profile.
pub fn profile_payoffs<T: Real>(
    ops: &[SquareMatrix<T>],
    initial: &PureState<T>,
    partition: &OutcomePartition,
) -> Result<Vec<T>> {
    partition.payoffs(&initial.apply_local(ops)?)
}

/// Seed of restart `index` under base seed `base` (splitmix64 mixing).
pub fn restart_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct LocalRun<T> {
    x: Vec<T>,
    value: T,
    iterations: usize,
    converged: bool,
}

fn fd_gradient<T, F>(objective: &F, x: &[T], h: T, probe: &mut [T], grad: &mut [T]) -> Result<()>
where
    T: Real,
    F: Fn(&[T]) -> Result<T>,
{
    let two = T::lit(2.0);
    probe.copy_from_slice(x);
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let up = objective(probe)?;
        probe[k] = x[k] - h;
        let down = objective(probe)?;
        probe[k] = x[k];
        grad[k] = (up - down) / (two * h);
    }
    Ok(())
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Quasi-Newton (BFGS) ascent from `x` with central-difference gradients and
/// an Armijo backtracking line search. The inverse-Hessian estimate falls back
/// to the identity whenever it stops producing an ascent direction.
fn ascend<T, F>(objective: &F, mut x: Vec<T>, config: &OptimizerConfig) -> Result<LocalRun<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T>,
{
    let dim = x.len();
    let h = T::lit(config.fd_step);
    let step_tol = T::lit(config.step_tolerance);
    let value_tol = T::lit(config.value_tolerance);
    let armijo = T::lit(1e-4);
    let half = T::lit(0.5);
    // Longest trial step; generator coefficients are angles.
    let max_step = T::PI();

    let identity = |m: &mut Vec<T>| {
        m.iter_mut().enumerate().for_each(|(i, v)| *v = if i % (dim + 1) == 0 { T::one() } else { T::zero() })
    };
    let mut inv_hessian = vec![T::zero(); dim * dim];
    identity(&mut inv_hessian);

    let mut value = objective(&x)?;
    let mut grad = vec![T::zero(); dim];
    let mut new_grad = vec![T::zero(); dim];
    let mut probe = x.clone();
    let mut dir = vec![T::zero(); dim];
    fd_gradient(objective, &x, h, &mut probe, &mut grad)?;

    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        if dot(&grad, &grad).sqrt() < step_tol {
            converged = true;
            break;
        }
        for i in 0..dim {
            dir[i] = dot(&inv_hessian[i * dim..(i + 1) * dim], &grad);
        }
        let mut slope = dot(&grad, &dir);
        if !(slope > T::zero()) {
            identity(&mut inv_hessian);
            dir.copy_from_slice(&grad);
            slope = dot(&grad, &grad);
        }
        let dir_norm = dot(&dir, &dir).sqrt();
        let mut t = T::one().min(max_step / dir_norm);
        let accepted = loop {
            for k in 0..dim {
                probe[k] = x[k] + t * dir[k];
            }
            let candidate = objective(&probe)?;
            if candidate >= value + armijo * t * slope {
                break Some(candidate);
            }
            t = t * half;
            if t * dir_norm < step_tol {
                break None;
            }
        };
        let Some(new_value) = accepted else {
            // No ascent step longer than the step tolerance exists.
            converged = true;
            break;
        };

        let step = t * dir_norm;
        let gain = new_value - value;
        let s: Vec<T> = dir.iter().map(|d| t * *d).collect();
        x.copy_from_slice(&probe);
        value = new_value;
        if step < step_tol && gain < value_tol {
            converged = true;
            break;
        }

        fd_gradient(objective, &x, h, &mut probe, &mut new_grad)?;
        // Curvature pair for the minimization of -f.
        let y: Vec<T> = grad.iter().zip(&new_grad).map(|(g0, g1)| *g0 - *g1).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if iterations == 1 {
                let scale = sy / dot(&y, &y);
                inv_hessian.iter_mut().for_each(|v| *v = *v * scale);
            }
            bfgs_update(&mut inv_hessian, &s, &y, sy);
        }
        std::mem::swap(&mut grad, &mut new_grad);
    }
    Ok(LocalRun { x, value, iterations, converged })
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T` with `rho = 1 / (y^T s)`.
fn bfgs_update<T: Real>(inv_hessian: &mut [T], s: &[T], y: &[T], sy: T) {
    let dim = s.len();
    let rho = T::one() / sy;
    let hy: Vec<T> = (0..dim).map(|i| dot(&inv_hessian[i * dim..(i + 1) * dim], y)).collect();
    let yhy = dot(y, &hy);
    let factor = (T::one() + rho * yhy) * rho;
    for i in 0..dim {
        for j in 0..dim {
            let v = inv_hessian[i * dim + j] + factor * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
            inv_hessian[i * dim + j] = v;
        }
    }
}

struct SearchOutcome<T> {
    x: Vec<T>,
    value: T,
    iterations: usize,
    restarts: usize,
    converged: bool,
}

/// Runs `config.restarts` ascents; `first_start` overrides the start of restart 0.
fn multi_start<T, F>(
    objective: &F,
    m: usize,
    first_start: Option<Vec<T>>,
    config: &OptimizerConfig,
) -> Result<SearchOutcome<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T>,
{
    config.validate()?;
    let mut first_start = first_start;
    let mut best: Option<LocalRun<T>> = None;
    let mut iterations = 0;
    for r in 0..config.restarts {
        let x0 = match (r, first_start.take()) {
            (0, Some(x)) => x,
            _ => random_params::<T>(restart_seed(config.seed, r as u64), m, T::one())?.into_coeffs(),
        };
        let run = ascend(objective, x0, config)?;
        iterations += run.iterations;
        // Ties keep the earlier restart so results do not depend on restart count.
        if best.as_ref().map_or(true, |b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(SearchOutcome {
        x: best.x,
        value: best.value,
        iterations,
        restarts: config.restarts,
        converged: best.converged,
    })
}

fn basis_for<T: Real>(initial: &PureState<T>) -> Result<GeneratorBasis<T>> {
    generator_basis(initial.m())
}

fn check_shapes<T: Real>(initial: &PureState<T>, partition: &OutcomePartition) -> Result<()> {
    let spec = partition.spec();
    if spec.n() != initial.n() || spec.m() != initial.m() {
        return Err(Error::input("initial state does not match the game shape"));
    }
    Ok(())
}

/// Maximizes [`symmetric_payoff`] over one unitary shared by all players.
pub fn optimize_symmetric<T: Real>(
    initial: &PureState<T>,
    partition: &OutcomePartition,
    config: &OptimizerConfig,
) -> Result<OptimizationResult<T>> {
    check_shapes(initial, partition)?;
    let basis = basis_for(initial)?;
    let objective = |x: &[T]| symmetric_payoff(&unitary_from_coeffs(x, &basis)?, initial, partition);
    let out = multi_start(&objective, initial.m(), None, config)?;
    let best_unitary = unitary_from_coeffs(&out.x, &basis)?;
    Ok(OptimizationResult {
        best_params: UnitaryParams::new(initial.m(), out.x)?,
        best_unitary,
        payoff: out.value,
        iterations_used: out.iterations,
        restarts_used: out.restarts,
        converged: out.converged,
    })
}

/// Best unilateral deviation of `player` while everybody else plays `fixed`.
///
/// The deviation is searched as `W * fixed` with `W` in SU(m); restart 0 starts
/// at `W = I`, so the result never falls below the payoff of playing `fixed`.
pub fn best_response<T: Real>(
    initial: &PureState<T>,
    fixed: &SquareMatrix<T>,
    player: usize,
    partition: &OutcomePartition,
    config: &OptimizerConfig,
) -> Result<OptimizationResult<T>> {
    check_shapes(initial, partition)?;
    if player >= initial.n() {
        return Err(Error::input(format!("player {player} is outside [0, {})", initial.n())));
    }
    if fixed.dim() != initial.m() {
        return Err(Error::input("fixed strategy has the wrong dimension"));
    }
    let basis = basis_for(initial)?;
    let ops = vec![fixed.clone(); initial.n()];
    let objective = |x: &[T]| {
        let mut ops = ops.clone();
        ops[player] = unitary_from_coeffs(x, &basis)?.matmul(fixed);
        partition.expected_payoff(&initial.apply_local(&ops)?, player)
    };
    let zeros = vec![T::zero(); basis.len()];
    let out = multi_start(&objective, initial.m(), Some(zeros), config)?;
    let best_unitary = unitary_from_coeffs(&out.x, &basis)?.matmul(fixed);
    Ok(OptimizationResult {
        best_params: UnitaryParams::new(initial.m(), out.x)?,
        best_unitary,
        payoff: out.value,
        iterations_used: out.iterations,
        restarts_used: out.restarts,
        converged: out.converged,
    })
}

/// How much player 1 gains by deviating from the symmetric profile `[u; n]`.
///
/// For permutation-symmetric initial states every player sees the same gap.
pub fn nash_gap<T: Real>(
    initial: &PureState<T>,
    u: &SquareMatrix<T>,
    partition: &OutcomePartition,
    config: &OptimizerConfig,
) -> Result<T> {
    let deviation = best_response(initial, u, 0, partition, config)?;
    Ok(deviation.payoff - symmetric_payoff(u, initial, partition)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{build_partition, GameSpec};
    use crate::su_param::fourier_gate;
    use num_complex::Complex;

    fn ghz() -> PureState<f64> {
        let one = Complex::new(1.0, 0.0);
        PureState::superpose(3, &[(vec![0, 0, 0], one), (vec![1, 1, 1], one), (vec![2, 2, 2], one)])
            .unwrap()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig { restarts: 4, max_iters: 500, ..Default::default() }
    }

    #[test]
    fn symmetric_payoff_examples() {
        let p = build_partition(GameSpec::three_qutrits()).unwrap();
        let f = fourier_gate::<f64>(3).unwrap();
        assert!((symmetric_payoff(&f, &ghz(), &p).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(symmetric_payoff(&SquareMatrix::identity(3), &ghz(), &p).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        let p = build_partition(GameSpec::three_qutrits()).unwrap();
        let bad = OptimizerConfig { restarts: 0, ..Default::default() };
        assert!(optimize_symmetric(&ghz(), &p, &bad).is_err());
        let bad = OptimizerConfig { fd_step: 0.0, ..Default::default() };
        assert!(optimize_symmetric(&ghz(), &p, &bad).is_err());
    }

    #[test]
    fn restart_seeds_differ() {
        let seeds: std::collections::HashSet<_> = (0..100).map(|i| restart_seed(42, i)).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn best_response_never_below_fixed() {
        let p = build_partition(GameSpec::three_qutrits()).unwrap();
        let f = fourier_gate::<f64>(3).unwrap();
        let s = PureState::basis_state(&[2, 2, 2], 3).unwrap();
        let br = best_response(&s, &f, 0, &p, &quick()).unwrap();
        assert!(br.payoff >= symmetric_payoff(&f, &s, &p).unwrap() - 1e-9);
        assert!(best_response(&s, &f, 3, &p, &quick()).is_err());
    }

    #[test]
    fn optimizer_is_deterministic() {
        let p = build_partition(GameSpec::three_qutrits()).unwrap();
        let a = optimize_symmetric(&ghz(), &p, &quick().with_seed(9)).unwrap();
        let b = optimize_symmetric(&ghz(), &p, &quick().with_seed(9)).unwrap();
        assert_eq!(a.payoff.to_bits(), b.payoff.to_bits());
        assert_eq!(a.best_params, b.best_params);
    }
}
