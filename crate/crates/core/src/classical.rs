//! Classical mixed strategies, evaluated exactly by enumerating all outcomes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{build_partition, GameSpec};
use crate::qstate::decode_index;
use crate::scalar::Real;

/// Probability distribution over the `m` choices of one player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy<T> {
    probs: Vec<T>,
}

impl<T: Real> MixedStrategy<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("mixed strategy has no choices".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::input("probabilities must be finite and nonnegative"));
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > crate::qstate::norm_tolerance::<T>() {
            return Err(Error::input(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(m: usize) -> Self {
        Self { probs: vec![T::one() / T::lit(m as f64); m] }
    }

    pub fn pure(m: usize, choice: usize) -> Result<Self> {
        if choice >= m {
            return Err(Error::input(format!("choice {choice} is outside [0, {m})")));
        }
        let mut probs = vec![T::zero(); m];
        probs[choice] = T::one();
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }
}

/// Per-player expected payoff of independent mixed strategies.
pub fn mixed_payoff<T: Real>(strategies: &[MixedStrategy<T>], spec: GameSpec) -> Result<Vec<T>> {
    let (n, m) = (spec.n(), spec.m());
    if strategies.len() != n {
        return Err(Error::input(format!("expected {n} strategies, got {}", strategies.len())));
    }
    if let Some(s) = strategies.iter().find(|s| s.probs.len() != m) {
        return Err(Error::input(format!("strategy has {} entries, expected {m}", s.probs.len())));
    }
    let partition = build_partition(spec)?;
    let mut payoffs = vec![T::zero(); n];
    // Fixed index order keeps the summation deterministic.
    for (k, winners) in partition.winners_by_index().iter().enumerate() {
        if winners.is_empty() {
            continue;
        }
        let choices = decode_index(k, n, m)?;
        let p = choices
            .iter()
            .zip(strategies)
            .fold(T::one(), |acc, (&c, s)| acc * s.probs[c]);
        for player in winners.iter() {
            payoffs[player] = payoffs[player] + p;
        }
    }
    Ok(payoffs)
}

/// Payoff of player 1 when everyone randomizes uniformly.
pub fn uniform_baseline<T: Real>(spec: GameSpec) -> Result<T> {
    let strategies = vec![MixedStrategy::uniform(spec.m()); spec.n()];
    Ok(mixed_payoff(&strategies, spec)?[0])
}

fn symmetric_value<T: Real>(probs: &[T], spec: GameSpec) -> Result<T> {
    let s = MixedStrategy { probs: probs.to_vec() };
    Ok(mixed_payoff(&vec![s; spec.n()], spec)?[0])
}

/// Visits every point `c / resolution` with `sum c = resolution` on the `m`-simplex.
fn for_each_grid_point(m: usize, resolution: usize, mut f: impl FnMut(&[usize])) {
    let mut counts = vec![0usize; m];
    fn rec(counts: &mut Vec<usize>, pos: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            f(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(counts, pos + 1, left - c, f);
        }
    }
    rec(&mut counts, 0, resolution, &mut f);
}

/// Best common payoff over symmetric mixed strategies.
///
/// Searches a simplex grid with the given resolution, then polishes the best
/// grid point by pairwise mass transfers with a shrinking step.
pub fn best_symmetric_classical<T: Real>(
    spec: GameSpec,
    grid_resolution: usize,
) -> Result<(MixedStrategy<T>, T)> {
    if grid_resolution < 10 {
        return Err(Error::input(format!("grid resolution {grid_resolution} must be at least 10")));
    }
    let m = spec.m();
    let res = T::lit(grid_resolution as f64);
    let mut best: Option<(Vec<T>, T)> = None;
    let mut failure = None;
    for_each_grid_point(m, grid_resolution, |counts| {
        let probs: Vec<T> = counts.iter().map(|&c| T::lit(c as f64) / res).collect();
        match symmetric_value(&probs, spec) {
            Ok(v) => {
                if best.as_ref().map_or(true, |(_, b)| v > *b) {
                    best = Some((probs, v));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (mut probs, mut value) = best.expect("simplex grid is nonempty");

    let mut delta = T::one() / res;
    let floor = T::lit(1e-13);
    while delta > floor {
        let mut improved = false;
        for from in 0..m {
            for to in 0..m {
                if from == to {
                    continue;
                }
                let step = delta.min(probs[from]);
                if step <= T::zero() {
                    continue;
                }
                let mut trial = probs.clone();
                trial[from] = trial[from] - step;
                trial[to] = trial[to] + step;
                let v = symmetric_value(&trial, spec)?;
                if v > value {
                    probs = trial;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            delta = delta / T::lit(2.0);
        }
    }
    Ok((MixedStrategy { probs }, value))
}

/// Output of the `classical` CLI subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalReport {
    pub baseline: f64,
    pub best_symmetric: BestSymmetric,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestSymmetric {
    pub probs: Vec<f64>,
    pub value: f64,
}

pub fn classical_report(spec: GameSpec, grid_resolution: usize) -> Result<ClassicalReport> {
    let baseline = uniform_baseline::<f64>(spec)?;
    let (strategy, value) = best_symmetric_classical::<f64>(spec, grid_resolution)?;
    Ok(ClassicalReport {
        baseline,
        best_symmetric: BestSymmetric { probs: strategy.probs, value },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: [f64; 3]) -> MixedStrategy<f64> {
        MixedStrategy::new(p.to_vec()).unwrap()
    }

    #[test]
    fn mixed_payoff_examples() {
        let spec = GameSpec::three_qutrits();
        let u = MixedStrategy::<f64>::uniform(3);
        for v in mixed_payoff(&[u.clone(), u.clone(), u], spec).unwrap() {
            assert!((v - 4.0 / 9.0).abs() < 1e-12);
        }
        let a = s([1.0, 0.0, 0.0]);
        assert_eq!(mixed_payoff(&[a.clone(), a.clone(), a], spec).unwrap(), vec![0.0; 3]);
        let got = mixed_payoff(&[s([1.0, 0.0, 0.0]), s([0.0, 1.0, 0.0]), s([0.0, 0.0, 1.0])], spec).unwrap();
        assert_eq!(got, vec![1.0; 3]);
    }

    #[test]
    fn invalid_distributions() {
        assert!(MixedStrategy::new(vec![0.5, 0.6, -0.1]).is_err());
        assert!(MixedStrategy::new(vec![0.5, 0.4]).is_err());
        assert!(MixedStrategy::<f64>::new(vec![]).is_err());
        let spec = GameSpec::three_qutrits();
        let u = MixedStrategy::<f64>::uniform(2);
        assert!(mixed_payoff(&[u.clone(), u.clone(), u], spec).is_err());
    }

    #[test]
    fn baselines_match_closed_forms() {
        let b33 = uniform_baseline::<f64>(GameSpec::new(3, 3).unwrap()).unwrap();
        assert!((b33 - 4.0 / 9.0).abs() < 1e-12);
        let b32 = uniform_baseline::<f64>(GameSpec::new(3, 2).unwrap()).unwrap();
        assert!((b32 - 0.25).abs() < 1e-12);
        let b22 = uniform_baseline::<f64>(GameSpec::new(2, 2).unwrap()).unwrap();
        assert!((b22 - 0.5).abs() < 1e-12);
        for m in 2..=6 {
            let b = uniform_baseline::<f64>(GameSpec::new(3, m).unwrap()).unwrap();
            let closed = (1.0 - 1.0 / m as f64).powi(2);
            assert!((b - closed).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn grid_resolution_floor() {
        assert!(best_symmetric_classical::<f64>(GameSpec::three_qutrits(), 9).is_err());
    }

    #[test]
    fn grid_point_count() {
        let mut count = 0;
        for_each_grid_point(3, 10, |c| {
            assert_eq!(c.iter().sum::<usize>(), 10);
            count += 1;
        });
        assert_eq!(count, 66);
    }
}
