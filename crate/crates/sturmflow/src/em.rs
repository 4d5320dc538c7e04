//! The solution-space superlagrangian path a(lambda), conjugate instants,
//! analytic crossing forms and the EM-index of the problem.

use std::rc::Rc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, SturmError};
use crate::hermitian::{self, CMatrix, CVector, HermMatrix, Inertia, TolerancePolicy};
use crate::ode::{fundamental_solution, kernel_solutions, shooting_matrix, SolutionHandle};
use crate::quad::gauss_legendre_unit;
use crate::scan::{grid, local_minima_below, resolve_dip};
use crate::sturm::SturmProblem;
use crate::superlag::{
    crossing_form_numeric, doubled_space, is_superlagrangian, standard_space, SuperhermitianSpace,
    SuperlagFrame, SuperlagPath,
};

/// Relative tolerance for the h-constancy invariant of integrated solutions.
pub const H_CONSTANCY_TOL: f64 = 1e-8;

/// The ambient space of the path a(lambda): the double of the standard
/// 2mn-dimensional superhermitian space, coupling boundary data at x = 0
/// (with -h) and x = 1 (with +h).
pub fn solution_space(mn: usize, tol: &TolerancePolicy) -> SuperhermitianSpace {
    doubled_space(&standard_space(mn, tol), tol)
}

/// The fixed Dirichlet reference plane {0} + C^mn + {0} + C^mn.
pub fn reference_plane(mn: usize) -> SuperlagFrame {
    let mut raw = CMatrix::zeros(4 * mn, 2 * mn);
    for k in 0..mn {
        raw[(mn + k, k)] = Complex64::new(1.0, 0.0);
        raw[(3 * mn + k, mn + k)] = Complex64::new(1.0, 0.0);
    }
    SuperlagFrame::orthonormalized(raw)
}

/// One point of the path: the 2mn basis solutions of the rescaled equation
/// and the boundary-data frame with columns
/// (j^m u(0), A(0) j^{2m}u(0), j^m u(1), A(1) j^{2m}u(1)).
pub struct SolutionSpacePoint {
    pub lambda: f64,
    pub basis: Vec<SolutionHandle>,
    /// Unnormalized frame, columns indexed by initial-jet basis vectors.
    pub raw_frame: CMatrix,
    pub frame: SuperlagFrame,
    pub isotropy_residual: f64,
}

/// Integrates the full jet basis at `lambda` and assembles the frame of
/// a(lambda), verifying isotropy and h-constancy of every basis solution.
pub fn solution_path(
    problem: &SturmProblem,
    lambda: f64,
    tol: &TolerancePolicy,
) -> Result<SolutionSpacePoint> {
    let mn = problem.jet_dim();
    let fund = fundamental_solution(problem, lambda, tol)?;
    let rescaled = problem.rescale(lambda)?;
    let bmap = rescaled.assemble_boundary_map();
    let a0 = bmap.eval(0.0);
    let a1 = bmap.eval(1.0);
    let phi1 = &fund.at_one;

    let mut raw = CMatrix::zeros(4 * mn, 2 * mn);
    let mut top = CMatrix::zeros(mn, 2 * mn);
    top.view_mut((0, 0), (mn, mn)).copy_from(&CMatrix::identity(mn, mn));
    raw.view_mut((0, 0), (mn, 2 * mn)).copy_from(&top);
    raw.view_mut((mn, 0), (mn, 2 * mn)).copy_from(&a0);
    raw.view_mut((2 * mn, 0), (mn, 2 * mn))
        .copy_from(&phi1.view((0, 0), (mn, 2 * mn)).into_owned());
    raw.view_mut((3 * mn, 0), (mn, 2 * mn)).copy_from(&(&a1 * phi1));

    let space = solution_space(mn, tol);
    let frame = SuperlagFrame::orthonormalized(raw.clone());
    let report = is_superlagrangian(&frame, &space, tol);
    if !report.verdict {
        return Err(SturmError::IsotropyResidual { lambda, residual: report.residual });
    }

    let basis: Vec<SolutionHandle> = (0..2 * mn)
        .map(|k| {
            let mut c = CVector::zeros(2 * mn);
            c[k] = Complex64::new(1.0, 0.0);
            SolutionHandle::new(Rc::clone(&fund.dense), c, problem.m, problem.n)
        })
        .collect();

    // h[u](x) = Im<j^m u(x), A(x) j^{2m}u(x)> must be x-independent.
    for handle in &basis {
        let mut values = Vec::with_capacity(17);
        let mut scale = 0.0f64;
        for x in grid(0.0, 1.0, 17) {
            let jet = handle.jet(x);
            let ax = bmap.eval(x);
            let eta = &ax * &jet;
            let xi = CVector::from_iterator(mn, (0..mn).map(|r| jet[r]));
            values.push(xi.dotc(&eta).im);
            scale = scale.max(xi.norm() * eta.norm());
        }
        let spread =
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - values.iter().copied().fold(f64::INFINITY, f64::min);
        if spread > H_CONSTANCY_TOL * scale.max(1.0) {
            return Err(SturmError::Inconsistency {
                lambda,
                detail: format!(
                    "h[u](x) varies by {spread:.3e} along a basis solution (scale {scale:.3e})"
                ),
            });
        }
    }

    Ok(SolutionSpacePoint {
        lambda,
        basis,
        raw_frame: raw,
        frame,
        isotropy_residual: report.residual,
    })
}

/// Certified conjugate-point-free initial interval (0, epsilon].
#[derive(Debug, Clone, Copy)]
pub struct EpsilonCertificate {
    pub epsilon: f64,
    /// Smallest sigma_min(W) seen on the certification grid.
    pub grid_min: f64,
    pub threshold: f64,
}

/// Certifies an epsilon with no conjugate instants in (0, epsilon]:
/// sigma_min(W(lambda)) on a 128-point grid must stay above a fixed fraction
/// of the lambda = 0 reference value. Halves epsilon up to 6 times.
pub fn epsilon_guard(problem: &SturmProblem, tol: &TolerancePolicy) -> Result<EpsilonCertificate> {
    let reference = shooting_matrix(problem, 0.0, tol)?.sigma_min;
    let threshold = 0.2 * reference;
    let mut epsilon = 1.0 / 64.0;
    for _ in 0..=6 {
        let mut grid_min = f64::INFINITY;
        for i in 1..=128 {
            let lambda = epsilon * i as f64 / 128.0;
            grid_min = grid_min.min(shooting_matrix(problem, lambda, tol)?.sigma_min);
            if grid_min <= threshold {
                break;
            }
        }
        if grid_min > threshold {
            return Ok(EpsilonCertificate { epsilon, grid_min, threshold });
        }
        epsilon *= 0.5;
    }
    Err(SturmError::GuardFailure { halvings: 6 })
}

/// A located conjugate instant (position and kernel dimension only).
#[derive(Debug, Clone, Copy)]
pub struct ConjugateInstant {
    pub lambda: f64,
    pub kernel_dim: usize,
}

pub struct ConjugateScan {
    pub instants: Vec<ConjugateInstant>,
    pub endpoint_degenerate: bool,
}

/// Scans sigma_min(W(lambda)) over [epsilon, 1] on a 512-point grid, refines
/// each dip by golden-section search and keeps those with a nontrivial
/// Dirichlet kernel. Degeneracy at lambda = 1 is flagged, not resolved.
pub fn conjugate_points(
    problem: &SturmProblem,
    epsilon: f64,
    tol: &TolerancePolicy,
) -> Result<ConjugateScan> {
    let sigma = |lambda: f64| -> Result<f64> { Ok(shooting_matrix(problem, lambda, tol)?.sigma_min) };
    let ts = grid(epsilon, 1.0, 512);
    let vals: Vec<f64> = ts.iter().map(|t| sigma(*t)).collect::<Result<_>>()?;
    let scale = vals.iter().copied().fold(0.0f64, f64::max);

    let end = shooting_matrix(problem, 1.0, tol)?;
    let endpoint_degenerate = end.sigma_min < tol.rank_rel_tol * end.sigma_max.max(1.0);

    let mut instants: Vec<ConjugateInstant> = Vec::new();
    let mut candidates: Vec<f64> = Vec::new();
    let indicator = |t: f64| sigma(t).unwrap_or(f64::INFINITY);
    let accept = 1e-6 * scale.max(1.0);
    for idx in local_minima_below(&vals, 0.5 * scale) {
        candidates.extend(resolve_dip(&indicator, ts[idx - 1], ts[idx + 1], accept));
    }
    // The grid detector misses a dip sitting exactly on the right endpoint.
    if !endpoint_degenerate && vals[511] <= vals[510] && vals[511] < 0.5 * scale {
        candidates.extend(resolve_dip(&indicator, ts[509], 1.0, accept));
    }
    for lambda0 in candidates {
        if instants.iter().any(|c| (c.lambda - lambda0).abs() < 1e-8) {
            continue;
        }
        match kernel_solutions(problem, lambda0, tol) {
            Ok(kernel) => instants.push(ConjugateInstant { lambda: lambda0, kernel_dim: kernel.len() }),
            Err(SturmError::EmptyKernel { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    instants.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(ConjugateScan { instants, endpoint_degenerate })
}

/// Analytic crossing form at a conjugate instant: the lambda-derivative of
/// the rescaled coefficient family integrated along the kernel solutions,
/// Gamma[a][b] = int_0^1 sum_{i,j} <D^i u_a, (d/dlambda omega^lambda_ij) D^j u_b> dx
/// by 64-node Gauss-Legendre quadrature.
pub fn crossing_form_analytic(
    problem: &SturmProblem,
    lambda0: f64,
    kernel: &[SolutionHandle],
) -> Result<HermMatrix> {
    assert!(!kernel.is_empty());
    let m = problem.m;
    let dot = problem.rescale_derivative(lambda0);
    let (nodes, weights) = gauss_legendre_unit(64);
    let d = kernel.len();
    let mut gamma = CMatrix::zeros(d, d);
    for (x, w) in nodes.iter().zip(&weights) {
        // D^i u_a(x) for i = 0..=m, per kernel element.
        let derivs: Vec<Vec<CVector>> = kernel
            .iter()
            .map(|u| (0..=m).map(|i| u.derivative_block(*x, i)).collect())
            .collect();
        let wc = Complex64::new(*w, 0.0);
        for i in 0..=m {
            for j in 0..=m {
                let od = &dot[i][j];
                if od.is_zero() {
                    continue;
                }
                let odx = od.eval(*x);
                for a in 0..d {
                    for b in 0..d {
                        gamma[(a, b)] += wc * derivs[a][i].dotc(&(&odx * &derivs[b][j]));
                    }
                }
            }
        }
    }
    HermMatrix::new((&gamma + gamma.adjoint()).scale(0.5))
}

/// Geometric crossing form on the path a(lambda) at lambda0 by central
/// differencing of the chart, evaluated on the frame images of the given
/// kernel solutions (same vectors as the analytic form, not renormalized).
pub fn crossing_form_geometric<R: Rng>(
    problem: &SturmProblem,
    lambda0: f64,
    kernel: &[SolutionHandle],
    tol: &TolerancePolicy,
    rng: &mut R,
) -> Result<HermMatrix> {
    let mn = problem.jet_dim();
    let space = solution_space(mn, tol);
    let p0 = reference_plane(mn);
    let point0 = solution_path(problem, lambda0, tol)?;
    let basis: Vec<CVector> = kernel
        .iter()
        .map(|u| {
            // Kernel solutions have initial jet (0, v): coefficient vector
            // over the [0; I] shooting block, so the full-jet coefficient is
            // the stacked (0, v).
            let v = u.initial_coefficients();
            let mut c = CVector::zeros(2 * mn);
            for k in 0..mn {
                c[mn + k] = v[k];
            }
            &point0.raw_frame * c
        })
        .collect();
    let path = SuperlagPath::new(lambda0 - 1e-3, lambda0 + 1e-3, |l| {
        Ok(solution_path(problem, l, tol)?.frame)
    });
    crossing_form_numeric(&path, &p0, lambda0, 1e-4, &space, tol, rng, Some(&basis))
}

/// A fully resolved crossing of the path a(lambda) with S(P0).
pub struct EmCrossing {
    pub lambda: f64,
    pub kernel: Vec<SolutionHandle>,
    pub gamma: HermMatrix,
    pub inertia: Inertia,
    pub signature: i64,
}

pub struct EmOutcome {
    pub index: i64,
    pub epsilon: f64,
    pub crossings: Vec<EmCrossing>,
}

/// mu_EM of the problem: the signature sum of analytic crossing forms over
/// all conjugate instants in [epsilon, 1].
pub fn em_index(problem: &SturmProblem, tol: &TolerancePolicy) -> Result<EmOutcome> {
    let guard = epsilon_guard(problem, tol)?;
    em_index_with_epsilon(problem, guard.epsilon, tol)
}

/// Same as [`em_index`] with an externally certified epsilon (used by the
/// epsilon-independence property).
pub fn em_index_with_epsilon(
    problem: &SturmProblem,
    epsilon: f64,
    tol: &TolerancePolicy,
) -> Result<EmOutcome> {
    let scan = conjugate_points(problem, epsilon, tol)?;
    if scan.endpoint_degenerate {
        return Err(SturmError::EndpointDegenerate);
    }
    let mut crossings = Vec::new();
    let mut index = 0i64;
    for instant in &scan.instants {
        let kernel = kernel_solutions(problem, instant.lambda, tol)?;
        let gamma = crossing_form_analytic(problem, instant.lambda, &kernel)?;
        let inertia = hermitian::inertia(&gamma, tol);
        // Degenerate forms and zero-signature clusters both force the
        // delta-perturbation step that splits them into simple crossings.
        if inertia.n_zero > 0 || (inertia.dim() >= 2 && inertia.signature() == 0) {
            return Err(SturmError::NonRegularCrossing { lambda: instant.lambda });
        }
        index += inertia.signature();
        crossings.push(EmCrossing {
            lambda: instant.lambda,
            kernel,
            gamma,
            inertia,
            signature: inertia.signature(),
        });
    }
    Ok(EmOutcome { index, epsilon, crossings })
}

/// Cross-validates the analytic crossing form against the geometric
/// finite-difference form at a crossing: identical signatures and entrywise
/// agreement to the stated absolute/relative tolerance.
pub fn check_crossing_consistency<R: Rng>(
    problem: &SturmProblem,
    crossing: &EmCrossing,
    tol: &TolerancePolicy,
    rng: &mut R,
) -> Result<()> {
    let geo = crossing_form_geometric(problem, crossing.lambda, &crossing.kernel, tol, rng)?;
    let scale = crossing
        .gamma
        .matrix()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let dev = (geo.matrix() - crossing.gamma.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev > 1e-4 * scale {
        return Err(SturmError::Inconsistency {
            lambda: crossing.lambda,
            detail: format!("entrywise deviation {dev:.3e} at scale {scale:.3e}"),
        });
    }
    let gi = hermitian::inertia(&geo, tol);
    if gi.signature() != crossing.signature || gi.n_zero != crossing.inertia.n_zero {
        return Err(SturmError::Inconsistency {
            lambda: crossing.lambda,
            detail: format!(
                "signature mismatch: analytic {}, geometric {}",
                crossing.signature,
                gi.signature()
            ),
        });
    }
    Ok(())
}
