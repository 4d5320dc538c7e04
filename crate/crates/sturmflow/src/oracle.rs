//! Independent classical oracle for scalar second-order definite problems:
//! the zero count of the solution with u(0) = 0, u'(0) = 1 on (0, 1).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SturmError};
use crate::hermitian::TolerancePolicy;
use crate::ode::{integrate, to_first_order};
use crate::sturm::SturmProblem;

/// Counts the interior zeros of the shooting solution u with u(0) = 0,
/// u'(0) = 1.  Only defined for scalar second-order definite problems
/// (m = 1, n = 1, nu = 0), where this count equals the classical Morse
/// index by Sturm oscillation theory.
pub fn oracle_zero_count(problem: &SturmProblem, tol: &TolerancePolicy) -> Result<usize> {
    if problem.m != 1 || problem.n != 1 || problem.nu != 0 {
        return Err(SturmError::Domain(
            "zero-count oracle requires a scalar second-order definite problem \
             (m = 1, n = 1, nu = 0)"
                .into(),
        ));
    }
    let sys = to_first_order(problem, 1.0)?;
    let mut y0 = DMatrix::zeros(2, 1);
    y0[(1, 0)] = Complex64::new(1.0, 0.0);
    let out = integrate(&sys, 0.0, 1.0, y0, tol.integ_rel_tol, true)?;
    let dense = out.dense.expect("dense output requested");

    // Hermitian 1 x 1 coefficients are real, so u stays real; sample a grid
    // fine enough that no pair of zeros can hide between nodes and count
    // sign changes strictly inside (0, 1).
    let samples = 4096;
    let mut zeros = 0;
    let mut prev: Option<f64> = None;
    for k in 1..samples {
        let x = k as f64 / samples as f64;
        let u = dense.eval(x)[(0, 0)].re;
        if u == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            if p * u < 0.0 {
                zeros += 1;
            }
        }
        prev = Some(u);
    }
    Ok(zeros)
}
