//! Dense state-vector algebra for `n` players holding one `m`-level system each.
//!
//! Basis outcomes are encoded with player 1 as the most significant base-`m`
//! digit, so for three qutrits `|ijk>` sits at index `9i + 3j + k`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ComplexAmp, Real};

/// Largest supported Hilbert-space dimension `m^n`.
pub const MAX_DIM: usize = 4096;

/// Norm tolerance used when validating states: `1e-12` for `f64`, looser for `f32`.
pub fn norm_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

/// Returns `m^n` after checking the shape against [`MAX_DIM`].
pub fn checked_dim(n: usize, m: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::input(format!("player count {n} must be at least 2")));
    }
    if m < 2 {
        return Err(Error::input(format!("choice count {m} must be at least 2")));
    }
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim.saturating_mul(m);
        if dim > MAX_DIM {
            return Err(Error::input(format!(
                "dimension {m}^{n} exceeds the cap of {MAX_DIM}"
            )));
        }
    }
    Ok(dim)
}

pub fn basis_index(choices: &[usize], m: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::input(format!("choice count {m} must be at least 2")));
    }
    choices.iter().enumerate().try_fold(0usize, |acc, (player, &c)| {
        if c >= m {
            return Err(Error::input(format!(
                "choice {c} of player {} is outside [0, {m})",
                player + 1
            )));
        }
        acc.checked_mul(m)
            .and_then(|v| v.checked_add(c))
            .ok_or_else(|| Error::input("basis index overflows"))
    })
}

pub fn decode_index(index: usize, n: usize, m: usize) -> Result<Vec<usize>> {
    let dim = checked_dim(n, m)?;
    if index >= dim {
        return Err(Error::input(format!("index {index} is outside [0, {dim})")));
    }
    let mut digits = vec![0; n];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = rest % m;
        rest /= m;
    }
    Ok(digits)
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    entries: Vec<ComplexAmp<T>>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn new(dim: usize, entries: Vec<ComplexAmp<T>>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::input(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> ComplexAmp<T>) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { Complex::one() } else { Complex::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[ComplexAmp<T>] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> ComplexAmp<T> {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: ComplexAmp<T>) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = vec![Complex::zero(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.entries[k * d..(k + 1) * d];
                for (o, b) in out[r * d..(r + 1) * d].iter_mut().zip(row) {
                    *o = *o + a * *b;
                }
            }
        }
        Self { dim: d, entries: out }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, factor: ComplexAmp<T>) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| *z * factor).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn trace(&self) -> ComplexAmp<T> {
        (0..self.dim).map(|i| self.get(i, i)).fold(Complex::zero(), |a, b| a + b)
    }

    /// Largest entry modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Maximum-modulus norm (largest absolute row sum).
    pub fn inf_norm(&self) -> T {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c).norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Largest entry modulus of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> T {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() < tol
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.max_abs_diff(&self.adjoint()) < tol
    }

    /// Determinant via LU decomposition with partial pivoting.
    pub fn det(&self) -> ComplexAmp<T> {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut det = Complex::<T>::one();
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&i, &j| {
                    a[i * d + col]
                        .norm()
                        .partial_cmp(&a[j * d + col].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[pivot * d + col].is_zero() {
                return Complex::zero();
            }
            if pivot != col {
                for k in 0..d {
                    a.swap(pivot * d + k, col * d + k);
                }
                det = -det;
            }
            let p = a[col * d + col];
            det = det * p;
            for r in col + 1..d {
                let factor = a[r * d + col] / p;
                for k in col..d {
                    let v = a[col * d + k];
                    a[r * d + k] = a[r * d + k] - factor * v;
                }
            }
        }
        det
    }
}

/// Normalized pure state over `m^n` basis outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    n: usize,
    m: usize,
    amps: Vec<ComplexAmp<T>>,
}

impl<T: Real> PureState<T> {
    /// Wraps an amplitude vector, checking length, finiteness and unit norm.
    pub fn from_amplitudes(n: usize, m: usize, amps: Vec<ComplexAmp<T>>) -> Result<Self> {
        let state = Self::unchecked_norm(n, m, amps)?;
        let defect = (state.norm_sqr() - T::one()).abs();
        if defect > norm_tolerance::<T>() {
            return Err(Error::input(format!(
                "state is not normalized (|norm^2 - 1| = {defect})"
            )));
        }
        Ok(state)
    }

    /// Like [`Self::from_amplitudes`] but rescales to unit norm.
    pub fn normalized(n: usize, m: usize, amps: Vec<ComplexAmp<T>>) -> Result<Self> {
        let mut state = Self::unchecked_norm(n, m, amps)?;
        let norm = state.norm_sqr().sqrt();
        if norm.is_zero() {
            return Err(Error::Degenerate("all amplitudes are zero".into()));
        }
        for a in &mut state.amps {
            *a = *a / norm;
        }
        Ok(state)
    }

    fn unchecked_norm(n: usize, m: usize, amps: Vec<ComplexAmp<T>>) -> Result<Self> {
        let dim = checked_dim(n, m)?;
        if amps.len() != dim {
            return Err(Error::input(format!(
                "expected {dim} amplitudes for n={n}, m={m}, got {}",
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("state has non-finite amplitudes"));
        }
        Ok(Self { n, m, amps })
    }

    pub fn basis_state(choices: &[usize], m: usize) -> Result<Self> {
        let n = choices.len();
        let dim = checked_dim(n, m)?;
        let idx = basis_index(choices, m)?;
        let mut amps = vec![Complex::zero(); dim];
        amps[idx] = Complex::one();
        Ok(Self { n, m, amps })
    }

    /// Normalized superposition `sum_k w_k |choices_k>`.
    ///
    /// Repeated basis terms add up. All terms must have the same player count.
    pub fn superpose(m: usize, terms: &[(Vec<usize>, ComplexAmp<T>)]) -> Result<Self> {
        let n = match terms.first() {
            Some((choices, _)) => choices.len(),
            None => return Err(Error::Degenerate("superposition has no terms".into())),
        };
        let dim = checked_dim(n, m)?;
        let mut amps = vec![Complex::zero(); dim];
        for (choices, w) in terms {
            if choices.len() != n {
                return Err(Error::input("superposition terms have differing player counts"));
            }
            let k = basis_index(choices, m)?;
            amps[k] = amps[k] + *w;
        }
        Self::normalized(n, m, amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[ComplexAmp<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, index: usize) -> Result<T> {
        self.amps
            .get(index)
            .map(|a| a.norm_sqr())
            .ok_or_else(|| Error::input(format!("index {index} is outside [0, {})", self.dim())))
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<ComplexAmp<T>> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::input("inner product of states with different shapes"));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).fold(Complex::zero(), |s, t| s + t))
    }

    /// Applies `ops[0] (x) ops[1] (x) ... (x) ops[n-1]`, with `ops[i]` acting on player `i`.
    ///
    /// The result is not renormalized, so a non-unitary operator shows up as a
    /// norm defect on the returned state.
    pub fn apply_local(&self, ops: &[SquareMatrix<T>]) -> Result<Self> {
        let amps = apply_local_amps(self.n, self.m, &self.amps, ops)?;
        Ok(Self { n: self.n, m: self.m, amps })
    }

    /// Relabels players: digit `i` of the result holds digit `perm[i]` of `self`.
    pub fn permute_players(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n || !perm.iter().all(|&p| p < self.n && !std::mem::replace(&mut seen[p], true)) {
            return Err(Error::input(format!("{perm:?} is not a permutation of {} players", self.n)));
        }
        let mut amps = vec![Complex::zero(); self.dim()];
        let mut new_digits = vec![0; self.n];
        for (k, a) in self.amps.iter().enumerate() {
            let digits = decode_index(k, self.n, self.m)?;
            for (i, &p) in perm.iter().enumerate() {
                new_digits[i] = digits[p];
            }
            amps[basis_index(&new_digits, self.m)?] = *a;
        }
        Ok(Self { n: self.n, m: self.m, amps })
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            n: self.n,
            m: self.m,
            amps: self.amps.iter().map(|a| [a.re.to_f64_lossy(), a.im.to_f64_lossy()]).collect(),
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let amps = json
            .amps
            .iter()
            .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
            .collect();
        Self::from_amplitudes(json.n, json.m, amps)
    }
}

/// Raw local-operator application on an amplitude slice of length `m^n`.
pub fn apply_local_amps<T: Real>(
    n: usize,
    m: usize,
    amps: &[ComplexAmp<T>],
    ops: &[SquareMatrix<T>],
) -> Result<Vec<ComplexAmp<T>>> {
    let dim = checked_dim(n, m)?;
    if amps.len() != dim {
        return Err(Error::input(format!("expected {dim} amplitudes, got {}", amps.len())));
    }
    if ops.len() != n {
        return Err(Error::input(format!("expected {n} local operators, got {}", ops.len())));
    }
    if let Some(op) = ops.iter().find(|op| op.dim() != m) {
        return Err(Error::input(format!(
            "local operator is {0}x{0}, expected {m}x{m}",
            op.dim()
        )));
    }
    let mut cur = amps.to_vec();
    let mut next = vec![Complex::zero(); dim];
    let mut stride = dim;
    for op in ops {
        stride /= m;
        let block = stride * m;
        for base in (0..dim).step_by(block) {
            for offset in 0..stride {
                let at = |d: usize| base + d * stride + offset;
                for row in 0..m {
                    let mut acc = Complex::zero();
                    for col in 0..m {
                        acc = acc + op.get(row, col) * cur[at(col)];
                    }
                    next[at(row)] = acc;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// JSON form of a state: `{"n":3,"m":3,"amps":[[re,im],...]}` in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub n: usize,
    pub m: usize,
    pub amps: Vec<[f64; 2]>,
}
