//! Unique-choice payoff rule and the outcome partition it induces.
//!
//! A player is paid 1 when no other player made the same choice, 0 otherwise.
//! For three players with three choices the outcomes split into the classes
//! `L` (nobody wins), `G` (everybody wins) and `D_i` (only player `i` wins).
//!
//! Players are 0-based in this API; labels such as `D1` and the JSON dump use
//! 1-based player numbers.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{checked_dim, decode_index, PureState};
use crate::scalar::Real;

/// Shape of a Kolkata game: `n` players choosing among `m` options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameSpec {
    n: usize,
    m: usize,
}

impl GameSpec {
    pub const WIN_PAYOFF: f64 = 1.0;
    pub const LOSE_PAYOFF: f64 = 0.0;

    pub fn new(n: usize, m: usize) -> Result<Self> {
        checked_dim(n, m)?;
        Ok(Self { n, m })
    }

    /// Three players, three choices.
    pub fn three_qutrits() -> Self {
        Self { n: 3, m: 3 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    fn has_class_view(&self) -> bool {
        self.n == 3 && self.m == 3
    }
}

/// Set of (0-based) players, stored as a bitmask. The dimension cap keeps `n <= 12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WinnerSet(u32);

impl WinnerSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn all(n: usize) -> Self {
        Self((1u32 << n) - 1)
    }

    pub fn insert(&mut self, player: usize) {
        self.0 |= 1 << player;
    }

    pub fn contains(&self, player: usize) -> bool {
        player < 32 && self.0 & (1 << player) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |&p| self.contains(p))
    }
}

impl FromIterator<usize> for WinnerSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = Self::empty();
        for p in iter {
            s.insert(p);
        }
        s
    }
}

/// Players whose choice nobody else made.
pub fn winners(choices: &[usize]) -> WinnerSet {
    choices
        .iter()
        .enumerate()
        .filter(|&(i, c)| choices.iter().enumerate().all(|(j, d)| j == i || d != c))
        .map(|(i, _)| i)
        .collect()
}

/// Outcome class for three players with three choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeClass {
    /// Nobody is paid.
    L,
    /// Everybody is paid.
    G,
    /// Only the given (0-based) player is paid.
    D(usize),
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeClass::L => f.write_str("L"),
            OutcomeClass::G => f.write_str("G"),
            OutcomeClass::D(i) => write!(f, "D{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePartition {
    spec: GameSpec,
    winners_by_index: Vec<WinnerSet>,
    classes: Option<Vec<OutcomeClass>>,
    /// Winning indices per player, precomputed for payoff sums.
    winning_indices: Vec<Vec<usize>>,
}

pub fn build_partition(spec: GameSpec) -> Result<OutcomePartition> {
    let dim = checked_dim(spec.n, spec.m)?;
    let winners_by_index = (0..dim)
        .map(|k| decode_index(k, spec.n, spec.m).map(|c| winners(&c)))
        .collect::<Result<Vec<_>>>()?;
    let classes = spec.has_class_view().then(|| {
        winners_by_index
            .iter()
            .map(|w| match w.len() {
                0 => OutcomeClass::L,
                1 => OutcomeClass::D(w.iter().next().unwrap_or(0)),
                _ => OutcomeClass::G,
            })
            .collect()
    });
    let winning_indices = (0..spec.n)
        .map(|p| (0..dim).filter(|&k| winners_by_index[k].contains(p)).collect())
        .collect();
    Ok(OutcomePartition { spec, winners_by_index, classes, winning_indices })
}

impl OutcomePartition {
    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn winners_by_index(&self) -> &[WinnerSet] {
        &self.winners_by_index
    }

    /// Five-class labels, only for three players with three choices.
    pub fn classes(&self) -> Option<&[OutcomeClass]> {
        self.classes.as_deref()
    }

    /// Basis indices belonging to `class` (empty when there is no class view).
    pub fn indices_of(&self, class: OutcomeClass) -> Vec<usize> {
        self.classes()
            .map(|cs| cs.iter().enumerate().filter(|(_, c)| **c == class).map(|(k, _)| k).collect())
            .unwrap_or_default()
    }

    /// Basis indices at which `player` is paid.
    pub fn winning_indices(&self, player: usize) -> Result<&[usize]> {
        self.winning_indices
            .get(player)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::input(format!("player {player} is outside [0, {})", self.spec.n)))
    }

    fn check_state<T: Real>(&self, state: &PureState<T>) -> Result<()> {
        if state.n() != self.spec.n || state.m() != self.spec.m {
            return Err(Error::input(format!(
                "state has n={}, m={} but the game has n={}, m={}",
                state.n(),
                state.m(),
                self.spec.n,
                self.spec.m
            )));
        }
        Ok(())
    }

    /// Probability that `player` ends up with a unique choice.
    pub fn expected_payoff<T: Real>(&self, state: &PureState<T>, player: usize) -> Result<T> {
        self.check_state(state)?;
        let amps = state.amps();
        Ok(self.winning_indices(player)?.iter().map(|&k| amps[k].norm_sqr()).sum())
    }

    /// Expected payoff of every player.
    pub fn payoffs<T: Real>(&self, state: &PureState<T>) -> Result<Vec<T>> {
        (0..self.spec.n).map(|p| self.expected_payoff(state, p)).collect()
    }

    pub fn class_probabilities<T: Real>(&self, state: &PureState<T>) -> Result<ClassMasses<T>> {
        let classes = self.classes().ok_or_else(|| {
            Error::UnsupportedShape(format!(
                "class masses need n=3, m=3 (got n={}, m={})",
                self.spec.n, self.spec.m
            ))
        })?;
        self.check_state(state)?;
        let mut masses = ClassMasses::default();
        for (a, class) in state.amps().iter().zip(classes) {
            let p = a.norm_sqr();
            match class {
                OutcomeClass::L => masses.l = masses.l + p,
                OutcomeClass::G => masses.g = masses.g + p,
                OutcomeClass::D(i) => masses.d[*i] = masses.d[*i] + p,
            }
        }
        Ok(masses)
    }

    /// Debug dump keyed by the basis string (`"ijk"` for single-digit choices).
    pub fn dump(&self) -> BTreeMap<String, PartitionEntry> {
        let (n, m) = (self.spec.n, self.spec.m);
        self.winners_by_index
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let digits = decode_index(k, n, m).unwrap_or_default();
                let key = if m <= 10 {
                    digits.iter().map(|d| d.to_string()).collect::<String>()
                } else {
                    digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
                };
                let entry = PartitionEntry {
                    class: self.classes.as_ref().map(|c| c[k].to_string()),
                    winners: w.iter().map(|p| p + 1).collect(),
                };
                (key, entry)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// 1-based player numbers.
    pub winners: Vec<usize>,
}

/// Probability mass on `L`, `G` and each `D_i`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ClassMasses<T> {
    pub l: T,
    pub g: T,
    pub d: [T; 3],
}

impl<T: Real> ClassMasses<T> {
    pub fn total(&self) -> T {
        self.l + self.g + self.d.iter().copied().sum::<T>()
    }
}
