//! Independent reference computations checked against the library.
//!
//! Nothing here goes through `apply_local`, the outcome partition or the
//! scaling-and-squaring exponential: each oracle recomputes its quantity the
//! long way (explicit Kronecker products, multiplicity counting, plain series).

mod common;

use common::{brute_payoff, dense_apply, FOURIER_SUPPORT};
use num_complex::Complex64 as C;
use qkolkata::experiments::ghz_family;
use qkolkata::game::OutcomeClass;
use qkolkata::optimize::profile_payoffs;
use qkolkata::su_param::{fourier_gate, generator_basis, random_params, unitary_from_params, UnitaryParams};
use qkolkata::{
    best_response, build_partition, nash_gap, optimize_symmetric, symmetric_payoff, GameSpec, Matrix,
    OptimizerConfig, State,
};

fn ghz() -> State {
    let one = C::new(1.0, 0.0);
    State::superpose(3, &[(vec![0, 0, 0], one), (vec![1, 1, 1], one), (vec![2, 2, 2], one)]).unwrap()
}

#[test]
fn fourier_on_ghz_matches_dense_oracle() {
    let f = fourier_gate::<f64>(3).unwrap();
    let fast = ghz().apply_local(&[f.clone(), f.clone(), f.clone()]).unwrap();
    let dense = dense_apply([&f, &f, &f], ghz().amps());
    for k in 0..27 {
        assert!((fast.amps()[k] - dense[k]).norm() < 1e-14);
        let expect = if FOURIER_SUPPORT.contains(&k) { 1.0 / 9.0 } else { 0.0 };
        assert!((dense[k].norm_sqr() - expect).abs() < 1e-14, "index {k}");
        if FOURIER_SUPPORT.contains(&k) {
            assert!((dense[k] - C::new(1.0 / 3.0, 0.0)).norm() < 1e-14, "amplitude at {k}");
        }
    }
}

#[test]
fn fourier_on_product_state_is_uniform() {
    let f = fourier_gate::<f64>(3).unwrap();
    let s = State::basis_state(&[0, 0, 0], 3).unwrap();
    let dense = dense_apply([&f, &f, &f], s.amps());
    let fast = s.apply_local(&[f.clone(), f.clone(), f]).unwrap();
    for k in 0..27 {
        assert!((dense[k].norm_sqr() - 1.0 / 27.0).abs() < 1e-15);
        assert!((fast.amps()[k] - dense[k]).norm() < 1e-14);
    }
}

#[test]
fn random_local_ops_match_dense_oracle() {
    let basis = generator_basis::<f64>(3).unwrap();
    for seed in 0..100u64 {
        let us: Vec<Matrix> = (0..3)
            .map(|i| unitary_from_params(&random_params(seed * 3 + i, 3, 1.0).unwrap(), &basis).unwrap())
            .collect();
        let psi = ghz_family::<f64>(0.1 * seed as f64, 0.37 * seed as f64);
        let fast = psi.apply_local(&us).unwrap();
        let dense = dense_apply([&us[0], &us[1], &us[2]], psi.amps());
        for k in 0..27 {
            assert!((fast.amps()[k] - dense[k]).norm() < 1e-13);
        }
    }
}

#[test]
fn partition_matches_multiplicity_recount() {
    let p = build_partition(GameSpec::three_qutrits()).unwrap();
    let classes = p.classes().unwrap();
    for k in 0..27 {
        let c = [k / 9, (k / 3) % 3, k % 3];
        let unique: Vec<usize> = (0..3).filter(|&i| c.iter().filter(|&&x| x == c[i]).count() == 1).collect();
        let got: Vec<usize> = p.winners_by_index()[k].iter().collect();
        assert_eq!(got, unique, "index {k}");
        let expect = match unique.len() {
            0 => OutcomeClass::L,
            3 => OutcomeClass::G,
            1 => OutcomeClass::D(unique[0]),
            _ => unreachable!("two unique choices imply the third is unique too"),
        };
        assert_eq!(classes[k], expect);
    }
    for (shape_n, shape_m) in [(2, 2), (4, 2), (3, 4), (5, 3)] {
        let p = build_partition(GameSpec::new(shape_n, shape_m).unwrap()).unwrap();
        for (k, w) in p.winners_by_index().iter().enumerate() {
            let c = qkolkata::decode_index(k, shape_n, shape_m).unwrap();
            for i in 0..shape_n {
                let unique = c.iter().filter(|&&x| x == c[i]).count() == 1;
                assert_eq!(w.contains(i), unique);
            }
        }
    }
}

/// `exp(i theta T)` by a plain 80-term Taylor series, no scaling.
fn series_exp(t: &Matrix, theta: f64) -> Matrix {
    let a = t.scale(C::new(0.0, theta));
    let mut sum = Matrix::identity(t.dim());
    let mut term = Matrix::identity(t.dim());
    for k in 1..80 {
        term = term.matmul(&a).scale(C::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    sum
}

#[test]
fn exponential_matches_series_for_single_generators() {
    let basis = generator_basis::<f64>(3).unwrap();
    for a in 0..8 {
        for theta in [-3.0, -1.2, -0.01, 0.3, 1.0, 2.5, 3.14] {
            let mut coeffs = vec![0.0; 8];
            coeffs[a] = theta;
            let u = unitary_from_params(&UnitaryParams::new(3, coeffs).unwrap(), &basis).unwrap();
            let reference = series_exp(&basis.matrices()[a], theta);
            assert!(u.max_abs_diff(&reference) < 1e-10, "generator {a}, theta {theta}");
        }
    }
}

#[test]
fn fourier_closed_form_matches_dense_evaluation() {
    let f = fourier_gate::<f64>(3).unwrap();
    let p = build_partition(GameSpec::three_qutrits()).unwrap();
    for i in 0..200 {
        let theta = 1.5707963 * (i as f64 / 199.0);
        let phi = 1.5707963 * ((i * 37 % 199) as f64 / 199.0);
        let psi = ghz_family::<f64>(theta, phi);
        let (a, b, g) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let closed = 1.0 / 3.0 + (a + b + g).powi(2) / 9.0;
        let dense = brute_payoff(&dense_apply([&f, &f, &f], psi.amps()), 0);
        assert!((dense - closed).abs() < 1e-12, "theta {theta} phi {phi}");
        assert!((symmetric_payoff(&f, &psi, &p).unwrap() - closed).abs() < 1e-12);
    }
}

/// Max over a simplex grid of `sum_c p_c (1 - p_c)^2`, the symmetric product-state payoff.
fn product_state_grid_max(resolution: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..=resolution {
        for j in 0..=resolution - i {
            let p = [i, j, resolution - i - j].map(|c| c as f64 / resolution as f64);
            best = best.max(p.iter().map(|q| q * (1.0 - q).powi(2)).sum());
        }
    }
    best
}

#[test]
fn product_state_optimum_is_four_ninths() {
    let grid = product_state_grid_max(300);
    assert!((grid - 4.0 / 9.0).abs() < 1e-12);
    let p = build_partition(GameSpec::three_qutrits()).unwrap();
    let s = State::basis_state(&[2, 2, 2], 3).unwrap();
    let r = optimize_symmetric(&s, &p, &OptimizerConfig::default().with_restarts(4)).unwrap();
    assert!((r.payoff - grid).abs() < 1e-4);
}

/// Against identity on GHZ the other two always collide, so the deviator wins
/// whenever it leaves their common choice. The cyclic shift reaches payoff 1.
#[test]
fn best_response_to_identity_on_ghz() {
    let p = build_partition(GameSpec::three_qutrits()).unwrap();
    let id = Matrix::identity(3);
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let mut brute: f64 = 0.0;
    for perm in [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]] {
        let u = Matrix::from_fn(3, |r, c| if r == perm[c] { one } else { zero });
        let psi = dense_apply([&u, &id, &id], ghz().amps());
        brute = brute.max(brute_payoff(&psi, 0));
    }
    let basis = generator_basis::<f64>(3).unwrap();
    for seed in 0..500 {
        let u = unitary_from_params(&random_params(seed, 3, 1.0).unwrap(), &basis).unwrap();
        let payoff = brute_payoff(&dense_apply([&u, &id, &id], ghz().amps()), 0);
        assert!(payoff <= 1.0 + 1e-12);
        brute = brute.max(payoff);
    }
    assert!((brute - 1.0).abs() < 1e-12);

    let config = OptimizerConfig::default().with_restarts(8);
    let br = best_response(&ghz(), &id, 0, &p, &config).unwrap();
    assert!((br.payoff - 1.0).abs() < 1e-9, "best response {}", br.payoff);
    let gap = nash_gap(&ghz(), &id, &p, &config).unwrap();
    assert!((gap - 1.0).abs() < 1e-9);
}

#[test]
fn deviation_payoff_matches_dense_oracle() {
    let p = build_partition(GameSpec::three_qutrits()).unwrap();
    let f = fourier_gate::<f64>(3).unwrap();
    let br = best_response(&ghz(), &f, 1, &p, &OptimizerConfig::default().with_restarts(3)).unwrap();
    let dense = dense_apply([&f, &br.best_unitary, &f], ghz().amps());
    assert!((brute_payoff(&dense, 1) - br.payoff).abs() < 1e-12);
    let profile = profile_payoffs(&[f.clone(), br.best_unitary.clone(), f], &ghz(), &p).unwrap();
    assert!((profile[1] - br.payoff).abs() < 1e-12);
}
