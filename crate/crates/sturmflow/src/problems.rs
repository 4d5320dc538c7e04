//! Canonical test problems and the randomized problem generator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::hermitian::CMatrix;
use crate::matpoly::MatrixPolynomial;
use crate::sturm::{leading_symmetry, SturmProblem};

/// c = (2.5 pi)^2, the zero-order coefficient magnitude of PROB-A.
pub const PROB_A_C: f64 = 61.685027506808491;

/// c1 = (1.5 pi)^2.
pub const PROB_B_C1: f64 = 22.206609902451056;
/// c2 = (2.5 pi)^2.
pub const PROB_B_C2: f64 = PROB_A_C;

fn const_poly(m: CMatrix) -> MatrixPolynomial {
    MatrixPolynomial::constant(m)
}

fn real_diag(d: &[f64]) -> CMatrix {
    DMatrix::from_fn(d.len(), d.len(), |r, c| {
        Complex64::new(if r == c { d[r] } else { 0.0 }, 0.0)
    })
}

/// m=1, n=1, nu=0, omega11 = 1, omega00 = 0. No conjugate instants.
pub fn prob_0() -> SturmProblem {
    let one = const_poly(CMatrix::identity(1, 1));
    let zero = MatrixPolynomial::zero(1);
    SturmProblem::new(1, 1, 0, vec![vec![zero.clone(), zero.clone()], vec![zero, one]])
        .expect("PROB-0 is valid")
}

/// m=1, n=1, nu=0, omega11 = 1, omega00 = -c with c = (2.5 pi)^2.
pub fn prob_a() -> SturmProblem {
    prob_scalar_second_order(PROB_A_C)
}

/// Scalar -u'' - c u problem (omega00 = -c).
pub fn prob_scalar_second_order(c: f64) -> SturmProblem {
    let one = const_poly(CMatrix::identity(1, 1));
    let w00 = const_poly(real_diag(&[-c]));
    let zero = MatrixPolynomial::zero(1);
    SturmProblem::new(1, 1, 0, vec![vec![w00, zero.clone()], vec![zero, one]])
        .expect("scalar second-order problem is valid")
}

/// Scalar indefinite problem: m=1, n=1, nu=1, omega11 = -1, omega00 = +c.
pub fn prob_scalar_indefinite(c: f64) -> SturmProblem {
    let w11 = const_poly(leading_symmetry(1, 1));
    let w00 = const_poly(real_diag(&[c]));
    let zero = MatrixPolynomial::zero(1);
    SturmProblem::new(1, 1, 1, vec![vec![w00, zero.clone()], vec![zero, w11]])
        .expect("scalar indefinite problem is valid")
}

/// m=1, n=2, nu=1, omega11 = diag(1,-1), omega00 = diag(-c1, +c2).
pub fn prob_b() -> SturmProblem {
    prob_b_with(PROB_B_C1, PROB_B_C2)
}

pub fn prob_b_with(c1: f64, c2: f64) -> SturmProblem {
    let w11 = const_poly(leading_symmetry(2, 1));
    let w00 = const_poly(real_diag(&[-c1, c2]));
    let zero = MatrixPolynomial::zero(2);
    SturmProblem::new(1, 2, 1, vec![vec![w00, zero.clone()], vec![zero, w11]])
        .expect("PROB-B is valid")
}

/// m=2, n=1, nu=0, omega22 = 1, omega00 = -c (clamped fourth-order problem).
pub fn prob_c(c: f64) -> SturmProblem {
    let one = const_poly(CMatrix::identity(1, 1));
    let w00 = const_poly(real_diag(&[-c]));
    let zero = MatrixPolynomial::zero(1);
    SturmProblem::new(
        2,
        1,
        0,
        vec![
            vec![w00, zero.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), zero, one],
        ],
    )
    .expect("PROB-C is valid")
}

/// First positive root of cos(k) cosh(k) = 1, found by bisection. Conjugate
/// instants of the clamped fourth-order problem sit at roots of this equation.
pub fn clamped_beam_first_root() -> f64 {
    let f = |k: f64| k.cos() * k.cosh() - 1.0;
    let (mut lo, mut hi) = (4.0f64, 5.0f64);
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn random_hermitian_entry<R: Rng>(n: usize, max_mag: f64, rng: &mut R) -> CMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-max_mag..max_mag), rng.gen_range(-max_mag..max_mag))
    });
    (&a + a.adjoint()).scale(0.5)
}

/// Random problem with m in {1,2}, n in {1,2,3}, nu in 0..=n, Hermitian
/// matrix-polynomial coefficients of degree <= 2 and entry magnitude <= 5.
pub fn random_problem<R: Rng>(rng: &mut R) -> SturmProblem {
    let m = rng.gen_range(1..=2usize);
    let n = rng.gen_range(1..=3usize);
    let nu = rng.gen_range(0..=n);
    let mut table = vec![vec![MatrixPolynomial::zero(n); m + 1]; m + 1];
    for i in 0..=m {
        for j in i..=m {
            if i == m && j == m {
                continue;
            }
            let deg = rng.gen_range(0..=2u32);
            let terms = (0..=deg)
                .map(|p| (p, random_hermitian_entry(n, 5.0, rng)))
                .collect();
            let poly = MatrixPolynomial::from_terms(n, terms);
            table[i][j] = poly.clone();
            table[j][i] = poly;
        }
    }
    table[m][m] = const_poly(leading_symmetry(n, nu));
    SturmProblem::new(m, n, nu, table).expect("generated problem is valid by construction")
}
