//! Dense reference computations shared by the oracle and acceptance suites.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use qkolkata::Matrix;

pub fn kron(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![C::new(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn rows(u: &Matrix) -> Vec<Vec<C>> {
    (0..u.dim()).map(|r| (0..u.dim()).map(|c| u.get(r, c)).collect()).collect()
}

/// `(U1 (x) U2 (x) U3) psi` by an explicit 27x27 matrix-vector product.
pub fn dense_apply(ops: [&Matrix; 3], psi: &[C]) -> Vec<C> {
    let full = kron(&kron(&rows(ops[0]), &rows(ops[1])), &rows(ops[2]));
    full.iter().map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum()).collect()
}

/// Payoff of `player` by counting choice multiplicities directly.
pub fn brute_payoff(psi: &[C], player: usize) -> f64 {
    (0..27)
        .filter(|&k| {
            let c = [k / 9, (k / 3) % 3, k % 3];
            c.iter().filter(|&&x| x == c[player]).count() == 1
        })
        .map(|k| psi[k].norm_sqr())
        .sum()
}

/// Support of the optimal GHZ final state: 000,012,021,102,111,120,201,210,222.
pub const FOURIER_SUPPORT: [usize; 9] = [0, 5, 7, 11, 13, 15, 19, 21, 26];
