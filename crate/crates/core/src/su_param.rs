//! Special-unitary strategy matrices: generator basis, exponential map,
//! the Fourier gate and seeded random parameter draws.

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::SquareMatrix;
use crate::scalar::{ComplexAmp, Real};

/// Largest `m` for which a generator basis is built.
pub const MAX_GENERATOR_DIM: usize = 8;

/// Generator coefficients of `exp(i sum_a coeffs[a] T_a)`; length `m^2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryParams<T> {
    m: usize,
    coeffs: Vec<T>,
}

impl<T: Real> UnitaryParams<T> {
    pub fn new(m: usize, coeffs: Vec<T>) -> Result<Self> {
        if m < 2 {
            return Err(Error::input(format!("m = {m} must be at least 2")));
        }
        if coeffs.len() != m * m - 1 {
            return Err(Error::input(format!(
                "SU({m}) needs {} coefficients, got {}",
                m * m - 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("non-finite generator coefficient"));
        }
        Ok(Self { m, coeffs })
    }

    pub fn zeros(m: usize) -> Self {
        Self { m, coeffs: vec![T::zero(); m * m - 1] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn to_json(&self) -> ParamsJson {
        ParamsJson { m: self.m, coeffs: self.coeffs.iter().map(|c| c.to_f64_lossy()).collect() }
    }

    pub fn from_json(json: &ParamsJson) -> Result<Self> {
        Self::new(json.m, json.coeffs.iter().map(|&c| T::lit(c)).collect())
    }
}

/// Traceless Hermitian basis of su(m), normalized so that `Tr(T_a T_b) = 2 delta_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorBasis<T> {
    m: usize,
    matrices: Vec<SquareMatrix<T>>,
}

impl<T: Real> GeneratorBasis<T> {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrices(&self) -> &[SquareMatrix<T>] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `sum_a coeffs[a] T_a`.
    pub fn combine(&self, coeffs: &[T]) -> Result<SquareMatrix<T>> {
        if coeffs.len() != self.matrices.len() {
            return Err(Error::input(format!(
                "expected {} coefficients, got {}",
                self.matrices.len(),
                coeffs.len()
            )));
        }
        let d = self.m;
        let mut acc = SquareMatrix::zeros(d);
        for (t, &c) in self.matrices.iter().zip(coeffs) {
            if c.is_zero() {
                continue;
            }
            for r in 0..d {
                for col in 0..d {
                    let v = t.get(r, col);
                    if !v.is_zero() {
                        acc.set(r, col, acc.get(r, col) + v * c);
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// Symmetric, antisymmetric and diagonal generators of su(m) (Gell-Mann for m = 3).
pub fn generator_basis<T: Real>(m: usize) -> Result<GeneratorBasis<T>> {
    if !(2..=MAX_GENERATOR_DIM).contains(&m) {
        return Err(Error::input(format!("generator basis needs 2 <= m <= {MAX_GENERATOR_DIM}, got {m}")));
    }
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let mut matrices = Vec::with_capacity(m * m - 1);
    for j in 0..m {
        for k in j + 1..m {
            let mut sym = SquareMatrix::zeros(m);
            sym.set(j, k, one);
            sym.set(k, j, one);
            matrices.push(sym);
            let mut anti = SquareMatrix::zeros(m);
            anti.set(j, k, -i);
            anti.set(k, j, i);
            matrices.push(anti);
        }
    }
    for l in 1..m {
        let norm = T::lit((2.0 / (l * (l + 1)) as f64).sqrt());
        let mut diag = SquareMatrix::zeros(m);
        for j in 0..l {
            diag.set(j, j, one * norm);
        }
        diag.set(l, l, one * norm * T::lit(-(l as f64)));
        matrices.push(diag);
    }
    Ok(GeneratorBasis { m, matrices })
}

/// Matrix exponential by scaling and squaring around a Taylor core.
pub fn expm<T: Real>(a: &SquareMatrix<T>) -> SquareMatrix<T> {
    let d = a.dim();
    let norm = a.inf_norm();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    let half = T::lit(0.5);
    let target = T::lit(0.25);
    while scaled_norm > target {
        scaled_norm = scaled_norm * half;
        squarings += 1;
    }
    let scale = Complex::new(T::lit(0.5f64.powi(squarings as i32)), T::zero());
    let b = a.scale(scale);

    let mut sum = SquareMatrix::identity(d);
    let mut term = SquareMatrix::identity(d);
    for k in 1..=30 {
        term = term.matmul(&b).scale(Complex::new(T::one() / T::lit(k as f64), T::zero()));
        sum = sum.add(&term);
        if term.inf_norm() <= T::epsilon() * T::lit(0.5) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// `U = exp(i sum_a coeffs[a] T_a)`.
pub fn unitary_from_params<T: Real>(
    params: &UnitaryParams<T>,
    basis: &GeneratorBasis<T>,
) -> Result<SquareMatrix<T>> {
    if params.m != basis.m {
        return Err(Error::input(format!(
            "parameters are for SU({}), basis is for SU({})",
            params.m, basis.m
        )));
    }
    unitary_from_coeffs(&params.coeffs, basis)
}

pub(crate) fn unitary_from_coeffs<T: Real>(coeffs: &[T], basis: &GeneratorBasis<T>) -> Result<SquareMatrix<T>> {
    let h = basis.combine(coeffs)?;
    Ok(expm(&h.scale(Complex::new(T::zero(), T::one()))))
}

/// Discrete Fourier gate `F[j][k] = w^(jk) / sqrt(m)`, `w = exp(2 pi i / m)`.
pub fn fourier_gate<T: Real>(m: usize) -> Result<SquareMatrix<T>> {
    if m < 2 {
        return Err(Error::input(format!("m = {m} must be at least 2")));
    }
    let norm = T::one() / T::lit(m as f64).sqrt();
    let two_pi = T::TAU();
    Ok(SquareMatrix::from_fn(m, |j, k| {
        // Reduce the exponent first so large m keeps full phase accuracy.
        let phase = two_pi * T::lit(((j * k) % m) as f64) / T::lit(m as f64);
        Complex::from_polar(norm, phase)
    }))
}

/// Coefficients drawn uniformly from `[-scale * pi, scale * pi]`, deterministic in `seed`.
pub fn random_params<T: Real>(seed: u64, m: usize, scale: T) -> Result<UnitaryParams<T>> {
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(Error::input(format!("scale must be positive, got {scale}")));
    }
    if m < 2 {
        return Err(Error::input(format!("m = {m} must be at least 2")));
    }
    let bound = scale.to_f64_lossy() * std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..m * m - 1).map(|_| T::lit(rng.gen_range(-bound..=bound))).collect();
    Ok(UnitaryParams { m, coeffs })
}

/// JSON form of a matrix: `{"m":3,"entries":[[[re,im],...],...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryJson {
    pub m: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

/// JSON form of generator coefficients: `{"m":3,"coeffs":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub m: usize,
    pub coeffs: Vec<f64>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn to_json(&self) -> UnitaryJson {
        let d = self.dim();
        UnitaryJson {
            m: d,
            entries: (0..d)
                .map(|r| {
                    (0..d)
                        .map(|c| {
                            let z = self.get(r, c);
                            [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Parses a matrix file; does not require unitarity (see [`SquareMatrix::is_unitary`]).
    pub fn from_json(json: &UnitaryJson) -> Result<Self> {
        if json.entries.len() != json.m || json.entries.iter().any(|row| row.len() != json.m) {
            return Err(Error::input(format!("matrix entries are not {0}x{0}", json.m)));
        }
        let entries: Vec<ComplexAmp<T>> = json
            .entries
            .iter()
            .flatten()
            .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
            .collect();
        Self::new(json.m, entries)
    }
}

/// Multiplies a matrix by a global phase `exp(i phi)`.
pub fn with_global_phase<T: Real>(u: &SquareMatrix<T>, phi: T) -> SquareMatrix<T> {
    u.scale(Complex::from_polar(T::one(), phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        assert_eq!(generator_basis::<f64>(2).unwrap().len(), 3);
        assert_eq!(generator_basis::<f64>(3).unwrap().len(), 8);
        assert_eq!(generator_basis::<f64>(8).unwrap().len(), 63);
        assert!(generator_basis::<f64>(1).is_err());
        assert!(generator_basis::<f64>(9).is_err());
    }

    #[test]
    fn generators_hermitian_traceless_orthogonal() {
        for m in 2..=MAX_GENERATOR_DIM {
            let basis = generator_basis::<f64>(m).unwrap();
            for (a, ta) in basis.matrices().iter().enumerate() {
                assert!(ta.is_hermitian(1e-14));
                assert!(ta.trace().norm() < 1e-14);
                for (b, tb) in basis.matrices().iter().enumerate() {
                    let tr = ta.matmul(tb).trace();
                    let expect = if a == b { 2.0 } else { 0.0 };
                    assert!((tr - Complex::new(expect, 0.0)).norm() < 1e-12, "m={m} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn zero_params_give_identity() {
        let basis = generator_basis::<f64>(3).unwrap();
        let u = unitary_from_params(&UnitaryParams::zeros(3), &basis).unwrap();
        assert_eq!(u, SquareMatrix::identity(3));
    }

    #[test]
    fn mismatched_params_rejected() {
        let basis = generator_basis::<f64>(3).unwrap();
        assert!(UnitaryParams::<f64>::new(3, vec![0.0; 7]).is_err());
        assert!(unitary_from_params(&UnitaryParams::zeros(2), &basis).is_err());
    }

    #[test]
    fn random_params_unitary_with_unit_det() {
        let basis = generator_basis::<f64>(3).unwrap();
        for seed in 0..50 {
            let p = random_params(seed, 3, 1.0).unwrap();
            let u = unitary_from_params(&p, &basis).unwrap();
            assert!(u.unitarity_defect() < 1e-12);
            assert!((u.det() - Complex::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn fourier_gate_entries() {
        let f = fourier_gate::<f64>(3).unwrap();
        for k in 0..3 {
            assert!((f.get(0, k) - Complex::new(1.0 / 3f64.sqrt(), 0.0)).norm() < 1e-15);
        }
        assert!(f.unitarity_defect() < 1e-14);
        let h = fourier_gate::<f64>(2).unwrap();
        let r = 0.5f64.sqrt();
        let expect = [r, r, r, -r];
        for (z, e) in h.entries().iter().zip(expect) {
            assert!((z - Complex::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn random_params_deterministic_and_bounded() {
        let a = random_params::<f64>(7, 3, 1.0).unwrap();
        let b = random_params::<f64>(7, 3, 1.0).unwrap();
        assert_eq!(a, b);
        let c = random_params::<f64>(8, 3, 1.0).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.coeffs().len(), 8);
        assert!(a.coeffs().iter().all(|x| x.abs() <= std::f64::consts::PI));
        assert!(random_params::<f64>(7, 3, 0.0).is_err());
    }

    #[test]
    fn json_formats() {
        let f = fourier_gate::<f64>(3).unwrap();
        let back = SquareMatrix::<f64>::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let text = serde_json::to_string(&UnitaryParams::<f64>::zeros(2).to_json()).unwrap();
        assert_eq!(text, r#"{"m":2,"coeffs":[0.0,0.0,0.0]}"#);
        let bad = UnitaryJson { m: 3, entries: vec![vec![[0.0, 0.0]; 2]; 3] };
        assert!(SquareMatrix::<f64>::from_json(&bad).is_err());
    }

    #[test]
    fn f32_is_supported() {
        let basis = generator_basis::<f32>(3).unwrap();
        let p = random_params::<f32>(3, 3, 1.0).unwrap();
        let u = unitary_from_params(&p, &basis).unwrap();
        assert!(u.unitarity_defect() < 1e-5);
    }
}
