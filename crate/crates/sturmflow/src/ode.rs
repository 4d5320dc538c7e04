//! Companion reduction of l_lambda(x,D)u = 0 and adaptive Runge-Kutta
//! integration of fundamental solutions with dense jet output.

use std::rc::Rc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Result, SturmError};
use crate::hermitian::{CMatrix, CVector, TolerancePolicy};
use crate::matpoly::MatrixPolynomial;
use crate::sturm::{OperatorCoefficients, SturmProblem};

/// First-order system y' = M(x) y on the stacked jet y = (u, u', ..., u^(2m-1)).
#[derive(Debug, Clone)]
pub struct FirstOrderSystem {
    pub m: usize,
    pub n: usize,
    /// Bottom block row: u^(2m) = sum_k bottom[k](x) u^(k), k = 0..2m-1.
    bottom: Vec<MatrixPolynomial>,
}

impl FirstOrderSystem {
    /// Companion reduction using p_{2m}^{-1} = p_{2m}: the assembled leading
    /// coefficient is leading_sign * p_{2m}, so
    /// u^(2m) = -leading_sign * p_{2m} * sum_{k<2m} p_k(x) u^(k).
    pub fn from_operator(op: &OperatorCoefficients, p2m: &CMatrix) -> Self {
        let sign = -(op.leading_sign as f64);
        let bottom = (0..2 * op.m)
            .map(|k| op.coefficient(k).left_mul(p2m).scaled(Complex64::new(sign, 0.0)))
            .collect();
        Self { m: op.m, n: op.n, bottom }
    }

    pub fn dim(&self) -> usize {
        2 * self.m * self.n
    }

    /// Dense coefficient matrix M(x).
    pub fn eval(&self, x: f64) -> CMatrix {
        self.eval_with(x, |p| p.eval(x))
    }

    /// dM/dx, used for the quintic Hermite dense output.
    pub fn eval_derivative(&self, x: f64) -> CMatrix {
        let mut out = self.eval_with(x, |p| p.derivative().eval(x));
        // The super-diagonal identity blocks are constant.
        let n = self.n;
        for b in 0..(2 * self.m - 1) {
            out.view_mut((b * n, (b + 1) * n), (n, n)).fill(Complex64::new(0.0, 0.0));
        }
        out
    }

    fn eval_with<F: Fn(&MatrixPolynomial) -> CMatrix>(&self, _x: f64, f: F) -> CMatrix {
        let n = self.n;
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for b in 0..(2 * self.m - 1) {
            m.view_mut((b * n, (b + 1) * n), (n, n)).copy_from(&CMatrix::identity(n, n));
        }
        let last = (2 * self.m - 1) * n;
        for (k, p) in self.bottom.iter().enumerate() {
            if !p.is_zero() {
                m.view_mut((last, k * n), (n, n)).copy_from(&f(p));
            }
        }
        m
    }
}

/// Rescales the problem at `lambda` and reduces it to a first-order system.
pub fn to_first_order(problem: &SturmProblem, lambda: f64) -> Result<FirstOrderSystem> {
    let rescaled = problem.rescale(lambda)?;
    let op = rescaled.assemble_operator();
    Ok(FirstOrderSystem::from_operator(&op, &problem.p2m()))
}

#[derive(Debug, Clone)]
struct Node {
    x: f64,
    y: CMatrix,
    f: CMatrix,
    g: CMatrix,
}

/// Dense output over accepted steps: quintic Hermite interpolation from
/// (y, y', y'') at both step ends.
#[derive(Debug, Clone)]
pub struct DenseOutput {
    nodes: Vec<Node>,
}

impl DenseOutput {
    pub fn x_start(&self) -> f64 {
        self.nodes.first().expect("dense output is nonempty").x
    }

    pub fn x_end(&self) -> f64 {
        self.nodes.last().expect("dense output is nonempty").x
    }

    fn bracket(&self, x: f64) -> (&Node, &Node) {
        let idx = self.nodes.partition_point(|n| n.x < x).clamp(1, self.nodes.len() - 1);
        (&self.nodes[idx - 1], &self.nodes[idx])
    }

    pub fn eval(&self, x: f64) -> CMatrix {
        self.hermite(x, false)
    }

    /// Analytic x-derivative of the interpolant (used by residual checks).
    pub fn eval_derivative(&self, x: f64) -> CMatrix {
        self.hermite(x, true)
    }

    fn hermite(&self, x: f64, derivative: bool) -> CMatrix {
        let (n0, n1) = self.bracket(x);
        let h = n1.x - n0.x;
        let s = (x - n0.x) / h;
        let hc = Complex64::new(h, 0.0);
        let h2 = hc * hc;
        // Two-point Taylor interpolation of degree 5 in s.
        let a1 = &n1.y - &n0.y - (&n0.f * hc) - (&n0.g * (h2 * 0.5));
        let a2 = (&n1.f - &n0.f) * hc - (&n0.g * h2);
        let a3 = (&n1.g - &n0.g) * h2;
        let c3 = &a1 * Complex64::new(10.0, 0.0) - &a2 * Complex64::new(4.0, 0.0)
            + &a3 * Complex64::new(0.5, 0.0);
        let c4 = &a1 * Complex64::new(-15.0, 0.0) + &a2 * Complex64::new(7.0, 0.0)
            - &a3 * Complex64::new(1.0, 0.0);
        let c5 = &a1 * Complex64::new(6.0, 0.0) - &a2 * Complex64::new(3.0, 0.0)
            + &a3 * Complex64::new(0.5, 0.0);
        let sc = |v: f64| Complex64::new(v, 0.0);
        if derivative {
            (&n0.f * hc
                + &n0.g * (h2 * s)
                + &c3 * sc(3.0 * s * s)
                + &c4 * sc(4.0 * s * s * s)
                + &c5 * sc(5.0 * s * s * s * s))
                / hc
        } else {
            &n0.y
                + &n0.f * (hc * s)
                + &n0.g * (h2 * (0.5 * s * s))
                + &c3 * sc(s * s * s)
                + &c4 * sc(s * s * s * s)
                + &c5 * sc(s * s * s * s * s)
        }
    }
}

pub struct Integration {
    pub final_value: CMatrix,
    pub dense: Option<DenseOutput>,
}

const STAGES: usize = 7;
const A: [[f64; 6]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; STAGES] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; STAGES] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; STAGES] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Absolute error floor below which componentwise error control saturates.
pub const ABS_TOL_FLOOR: f64 = 1e-13;

/// Dormand-Prince 5(4) with componentwise error control. The state is a
/// matrix so a whole block of columns integrates in lockstep.
pub fn integrate(
    sys: &FirstOrderSystem,
    x0: f64,
    x1: f64,
    y0: CMatrix,
    rtol: f64,
    dense: bool,
) -> Result<Integration> {
    assert!(x1 > x0, "integration interval must be increasing");
    let mut x = x0;
    let mut y = y0;
    let mut h = (x1 - x0) / 16.0;
    let mut nodes: Vec<Node> = Vec::new();
    if dense {
        let f = sys.eval(x) * &y;
        let g = sys.eval_derivative(x) * &y + sys.eval(x) * &f;
        nodes.push(Node { x, y: y.clone(), f, g });
    }
    let mut k: Vec<CMatrix> = Vec::with_capacity(STAGES);
    while x < x1 {
        if x + h > x1 {
            h = x1 - x;
        }
        if h < 1e-14 {
            return Err(SturmError::Stiffness { x });
        }
        k.clear();
        for s in 0..STAGES {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys += kj * Complex64::new(h * A[s][j], 0.0);
                }
            }
            k.push(sys.eval(x + C[s] * h) * ys);
        }
        let mut y5 = y.clone();
        let mut err = CMatrix::zeros(y.nrows(), y.ncols());
        for s in 0..STAGES {
            if B5[s] != 0.0 {
                y5 += &k[s] * Complex64::new(h * B5[s], 0.0);
            }
            let d = B5[s] - B4[s];
            if d != 0.0 {
                err += &k[s] * Complex64::new(h * d, 0.0);
            }
        }
        let mut err_norm = 0.0f64;
        for (e, (a, b)) in err.iter().zip(y.iter().zip(y5.iter())) {
            let scale = ABS_TOL_FLOOR + rtol * a.norm().max(b.norm());
            err_norm = err_norm.max(e.norm() / scale);
        }
        if err_norm <= 1.0 {
            x += h;
            y = y5;
            if dense {
                let f = sys.eval(x) * &y;
                let g = sys.eval_derivative(x) * &y + sys.eval(x) * &f;
                nodes.push(Node { x, y: y.clone(), f, g });
            }
        }
        let fac = (0.9 * err_norm.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
    }
    Ok(Integration {
        final_value: y,
        dense: if dense { Some(DenseOutput { nodes }) } else { None },
    })
}

/// Fundamental solution of the rescaled system at `lambda`, integrated from
/// the full 2mn jet basis at x = 0 (columns of the identity).
pub struct FundamentalSolution {
    pub lambda: f64,
    pub system: FirstOrderSystem,
    pub dense: Rc<DenseOutput>,
    pub at_one: CMatrix,
}

pub fn fundamental_solution(
    problem: &SturmProblem,
    lambda: f64,
    tol: &TolerancePolicy,
) -> Result<FundamentalSolution> {
    let sys = to_first_order(problem, lambda)?;
    let d = sys.dim();
    let run = integrate(&sys, 0.0, 1.0, CMatrix::identity(d, d), tol.integ_rel_tol, true)?;
    Ok(FundamentalSolution {
        lambda,
        system: sys,
        dense: Rc::new(run.dense.expect("dense output requested")),
        at_one: run.final_value,
    })
}

/// A single solution expressed as a coefficient vector over a fundamental
/// dense output. Immutable and cheap to clone.
#[derive(Clone)]
pub struct SolutionHandle {
    dense: Rc<DenseOutput>,
    coeffs: CVector,
    m: usize,
    n: usize,
}

impl SolutionHandle {
    pub fn new(dense: Rc<DenseOutput>, coeffs: CVector, m: usize, n: usize) -> Self {
        Self { dense, coeffs, m, n }
    }

    /// Stacked 2m-jet (u, u', ..., u^(2m-1)) at x.
    pub fn jet(&self, x: f64) -> CVector {
        self.dense.eval(x) * &self.coeffs
    }

    /// The i-th derivative block u^(i)(x), 0 <= i <= 2m-1.
    pub fn derivative_block(&self, x: f64, i: usize) -> CVector {
        let jet = self.jet(x);
        DVector::from_iterator(self.n, (0..self.n).map(|r| jet[i * self.n + r]))
    }

    pub fn initial_coefficients(&self) -> &CVector {
        &self.coeffs
    }

    /// The same solution scaled by a constant factor.
    pub fn rescaled(&self, factor: Complex64) -> Self {
        Self {
            dense: Rc::clone(&self.dense),
            coeffs: self.coeffs.map(|z| z * factor),
            m: self.m,
            n: self.n,
        }
    }

    /// Max relative residual of the first-order system over sample points,
    /// probing the dense interpolant between accepted steps.
    pub fn max_residual(&self, sys: &FirstOrderSystem, samples: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for &x in samples {
            let y = self.dense.eval(x) * &self.coeffs;
            let dy = self.dense.eval_derivative(x) * &self.coeffs;
            let r = (&dy - sys.eval(x) * &y).norm();
            worst = worst.max(r / y.norm().max(1e-30));
        }
        worst
    }
}

/// Shooting matrix W(lambda): columns are j^m u_k(1) for the mn basis
/// solutions with vanishing m-jet at 0 and unit upper jet.
#[derive(Debug, Clone)]
pub struct ShootingMatrix {
    pub lambda: f64,
    pub w: CMatrix,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Initial condition block [0; I] of shape 2mn x mn.
fn dirichlet_initial(m: usize, n: usize) -> CMatrix {
    let mn = m * n;
    let mut y0 = CMatrix::zeros(2 * mn, mn);
    y0.view_mut((mn, 0), (mn, mn)).copy_from(&CMatrix::identity(mn, mn));
    y0
}

pub fn shooting_matrix(
    problem: &SturmProblem,
    lambda: f64,
    tol: &TolerancePolicy,
) -> Result<ShootingMatrix> {
    let sys = to_first_order(problem, lambda)?;
    let mn = problem.jet_dim();
    let run = integrate(&sys, 0.0, 1.0, dirichlet_initial(problem.m, problem.n), tol.integ_rel_tol, false)?;
    let w = run.final_value.view((0, 0), (mn, mn)).into_owned();
    let sv = w.clone().svd(false, false).singular_values;
    Ok(ShootingMatrix {
        lambda,
        w,
        sigma_min: sv.iter().copied().fold(f64::INFINITY, f64::min),
        sigma_max: sv.iter().copied().fold(0.0, f64::max),
    })
}

/// Solutions spanning the Dirichlet kernel at a conjugate instant: right
/// singular vectors of W below the rank threshold, mapped to initial jets.
pub fn kernel_solutions(
    problem: &SturmProblem,
    lambda0: f64,
    tol: &TolerancePolicy,
) -> Result<Vec<SolutionHandle>> {
    let sys = to_first_order(problem, lambda0)?;
    let (m, n) = (problem.m, problem.n);
    let mn = m * n;
    let run = integrate(&sys, 0.0, 1.0, dirichlet_initial(m, n), tol.integ_rel_tol, true)?;
    let dense = Rc::new(run.dense.expect("dense output requested"));
    let w = run.final_value.view((0, 0), (mn, mn)).into_owned();
    let svd = w.svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let thresh = tol.rank_rel_tol * smax.max(1.0);
    let vt = svd.v_t.expect("svd with right singular vectors");
    let mut handles = Vec::new();
    for (idx, s) in sv.iter().enumerate() {
        if *s < thresh {
            let v: CVector = vt.row(idx).adjoint();
            // Initial stacked jet (0, v): coefficient vector over the [0; I]
            // fundamental block is v itself.
            handles.push(SolutionHandle::new(Rc::clone(&dense), v, m, n));
        }
    }
    if handles.is_empty() {
        return Err(SturmError::EmptyKernel { lambda: lambda0 });
    }
    Ok(handles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{prob_0, prob_a, prob_b, prob_b_with, prob_c, PROB_A_C, PROB_B_C2};
    use approx::assert_relative_eq;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn companion_reduction_examples() {
        // PROB-A at lambda = 1: u'' = -c u.
        let sys = to_first_order(&prob_a(), 1.0).unwrap();
        let m = sys.eval(0.3);
        assert_relative_eq!(m[(0, 1)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(m[(1, 0)].re, -PROB_A_C, epsilon = 1e-12);
        assert_relative_eq!(m[(1, 1)].norm(), 0.0, epsilon = 1e-14);

        // PROB-0: u'' = 0.
        let sys = to_first_order(&prob_0(), 0.7).unwrap();
        assert_relative_eq!(sys.eval(0.5)[(1, 0)].norm(), 0.0, epsilon = 1e-14);

        // PROB-B at lambda = 1: block companion, p2^{-1} = diag(1,-1) applied:
        // u1'' = -c1 u1 (from -u1'' - c1 u1 = 0), u2'' = -c2 u2 (from u2'' + c2 u2 = 0).
        let sys = to_first_order(&prob_b(), 1.0).unwrap();
        let m = sys.eval(0.1);
        assert_relative_eq!(m[(2, 0)].re, -crate::problems::PROB_B_C1, epsilon = 1e-12);
        assert_relative_eq!(m[(3, 1)].re, -PROB_B_C2, epsilon = 1e-12);
        assert_relative_eq!(m[(2, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_sine_solution() {
        let sys = to_first_order(&prob_a(), 1.0).unwrap();
        let k = PROB_A_C.sqrt();
        let y0 = CMatrix::from_row_slice(2, 1, &[Complex64::new(0.0, 0.0), Complex64::new(k, 0.0)]);
        let run = integrate(&sys, 0.0, 1.0, y0, 1e-10, true).unwrap();
        let dense = run.dense.unwrap();
        for x in [0.3, 0.11, 0.77] {
            assert_relative_eq!(dense.eval(x)[(0, 0)].re, (k * x).sin(), epsilon = 1e-8);
        }
    }

    #[test]
    fn integrates_linear_solution_exactly() {
        let sys = to_first_order(&prob_0(), 1.0).unwrap();
        let y0 = CMatrix::from_row_slice(2, 1, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let run = integrate(&sys, 0.0, 1.0, y0, 1e-10, true).unwrap();
        let dense = run.dense.unwrap();
        for x in [0.25, 0.5, 0.9] {
            assert_relative_eq!(dense.eval(x)[(0, 0)].re, x, epsilon = 1e-12);
        }
    }

    #[test]
    fn integrates_beam_closed_form() {
        // u'''' = c u with initial jet (0,0,0,k^3): u = (sinh(kx) - sin(kx))/2.
        let c = PROB_A_C;
        let k = c.powf(0.25);
        let sys = to_first_order(&prob_c(c), 1.0).unwrap();
        let y0 = CMatrix::from_row_slice(
            4,
            1,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(k * k * k, 0.0),
            ],
        );
        let run = integrate(&sys, 0.0, 1.0, y0, 1e-10, true).unwrap();
        let dense = run.dense.unwrap();
        for x in [0.3, 0.6, 1.0] {
            let exact = 0.5 * ((k * x).sinh() - (k * x).sin());
            assert_relative_eq!(dense.eval(x)[(0, 0)].re, exact, epsilon = 1e-7);
        }
    }

    #[test]
    fn flow_linearity_and_liouville() {
        let sys = to_first_order(&prob_b(), 0.8).unwrap();
        let d = sys.dim();
        let run = integrate(&sys, 0.0, 1.0, CMatrix::identity(d, d), 1e-10, false).unwrap();
        let phi = run.final_value;
        let sv = phi.clone().svd(false, false).singular_values;
        assert!(sv.iter().copied().fold(f64::INFINITY, f64::min) > 1e-8);

        // Linearity: Phi * (a y0 + b z0) equals a Phi y0 + b Phi z0 by
        // construction; verify against separate integrations.
        let a = Complex64::new(0.3, 0.7);
        let b = Complex64::new(-1.1, 0.2);
        let y0 = CMatrix::from_fn(d, 1, |r, _| Complex64::new((r + 1) as f64, 0.5));
        let z0 = CMatrix::from_fn(d, 1, |r, _| Complex64::new(1.0, -(r as f64)));
        let ry = integrate(&sys, 0.0, 1.0, y0.clone(), 1e-10, false).unwrap().final_value;
        let rz = integrate(&sys, 0.0, 1.0, z0.clone(), 1e-10, false).unwrap().final_value;
        let rc = integrate(&sys, 0.0, 1.0, &y0 * a + &z0 * b, 1e-10, false).unwrap().final_value;
        let diff = (&rc - (&ry * a + &rz * b)).norm();
        assert!(diff < 1e-7 * rc.norm().max(1.0), "linearity violated: {diff:.3e}");
    }

    #[test]
    fn shooting_matrix_closed_forms() {
        let t = tol();
        // PROB-A: W(lambda) = sin(sqrt(c) lambda) / (sqrt(c) lambda).
        let k = PROB_A_C.sqrt();
        for lambda in [0.3, 0.55, 0.9] {
            let w = shooting_matrix(&prob_a(), lambda, &t).unwrap();
            assert_relative_eq!(w.w[(0, 0)].re, (k * lambda).sin() / (k * lambda), epsilon = 1e-8);
        }
        // PROB-0: W = 1 always.
        for lambda in [0.1, 0.6, 1.0] {
            let w = shooting_matrix(&prob_0(), lambda, &t).unwrap();
            assert_relative_eq!(w.w[(0, 0)].re, 1.0, epsilon = 1e-10);
        }
        // PROB-A is singular exactly at lambda in {0.4, 0.8}.
        for lambda in [0.4, 0.8] {
            let w = shooting_matrix(&prob_a(), lambda, &t).unwrap();
            assert!(w.sigma_min < 1e-8, "sigma_min = {:.3e}", w.sigma_min);
        }
        // PROB-B decouples into two scalar shooting values.
        let w = shooting_matrix(&prob_b(), 2.0 / 3.0, &t).unwrap();
        assert!(w.sigma_min < 1e-8);
        assert_relative_eq!(w.w[(0, 1)].norm(), 0.0, epsilon = 1e-10);
        assert_relative_eq!(w.w[(1, 0)].norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn kernel_solutions_examples() {
        let t = tol();
        // PROB-A at 0.4: one solution proportional to sin(pi x).
        let hs = kernel_solutions(&prob_a(), 0.4, &t).unwrap();
        assert_eq!(hs.len(), 1);
        let u_mid = hs[0].derivative_block(0.5, 0)[0];
        let u_q = hs[0].derivative_block(0.25, 0)[0];
        assert_relative_eq!(
            (u_q / u_mid).re,
            (std::f64::consts::PI * 0.25).sin(),
            epsilon = 1e-7
        );
        assert_relative_eq!(hs[0].derivative_block(1.0, 0)[0].norm(), 0.0, epsilon = 1e-7);

        // PROB-B at 0.4: kernel supported in component 2.
        let hs = kernel_solutions(&prob_b(), 0.4, &t).unwrap();
        assert_eq!(hs.len(), 1);
        let u = hs[0].derivative_block(0.5, 0);
        assert!(u[1].norm() > 1e-3);
        assert!(u[0].norm() < 1e-8);

        // Degenerate variant: c1 = c2 gives a two-dimensional kernel at 0.4.
        let hs = kernel_solutions(&prob_b_with(PROB_B_C2, PROB_B_C2), 0.4, &t).unwrap();
        assert_eq!(hs.len(), 2);

        // Non-conjugate instants have empty kernels.
        assert!(matches!(
            kernel_solutions(&prob_a(), 0.5, &t),
            Err(SturmError::EmptyKernel { .. })
        ));
    }

    #[test]
    fn solution_residual_is_small() {
        let t = tol();
        let sys = to_first_order(&prob_a(), 0.4).unwrap();
        let hs = kernel_solutions(&prob_a(), 0.4, &t).unwrap();
        let mut r = crate::testutil::rng(3);
        let samples: Vec<f64> = (0..20).map(|_| rand::Rng::gen_range(&mut r, 0.0..1.0)).collect();
        assert!(hs[0].max_residual(&sys, &samples) < 1e-7);
    }

    #[test]
    fn shooting_sigma_min_is_grid_continuous() {
        let t = tol();
        for problem in [prob_a(), prob_b()] {
            let grid: Vec<f64> = (0..=512).map(|i| 0.02 + 0.98 * i as f64 / 512.0).collect();
            let sig: Vec<f64> = grid
                .iter()
                .map(|l| shooting_matrix(&problem, *l, &t).unwrap().sigma_min)
                .collect();
            // No jumps far above the grid-local variation scale.
            let mut max_step = 0.0f64;
            for w in sig.windows(2) {
                max_step = max_step.max((w[1] - w[0]).abs());
            }
            let scale = sig.iter().copied().fold(0.0f64, f64::max);
            assert!(max_step < 0.1 * scale.max(1e-12), "sigma_min jumps: {max_step:.3e}");
        }
    }
}
