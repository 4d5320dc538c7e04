//! Galerkin discretization of the rescaled form family and the regularized
//! Morse index as a finite-dimensional spectral flow.

use num_complex::Complex64;

use crate::error::{Result, SturmError};
use crate::hermitian::{self, CMatrix, CVector, HermMatrix, Inertia, TolerancePolicy};
use crate::matpoly::MatrixPolynomial;
use crate::quad::{gauss_legendre_unit, legendre_derivative_table};
use crate::scan::{bisect_integer_jump, grid, local_minima_below, resolve_dip};
use crate::sturm::{binom, SturmProblem};

/// Scalar basis functions phi_k(x) = x^m (1-x)^m L_k(2x - 1), k = 0..N-1,
/// tensored with the n coordinate directions. Every member has vanishing
/// m-jet at both endpoints.
pub struct GalerkinBasis {
    pub m: usize,
    pub n: usize,
    pub n_polys: usize,
    /// Monomial coefficients of the window x^m (1-x)^m (degree 2m).
    window: Vec<f64>,
}

impl GalerkinBasis {
    pub fn new(m: usize, n: usize, n_polys: usize) -> Self {
        assert!(n_polys >= m + 1, "need at least m + 1 basis polynomials");
        let mut window = vec![0.0; 2 * m + 1];
        for l in 0..=m {
            window[m + l] = binom(m as u32, l as u32) * if l % 2 == 0 { 1.0 } else { -1.0 };
        }
        Self { m, n, n_polys, window }
    }

    /// Total discretization dimension N*n.
    pub fn dim(&self) -> usize {
        self.n_polys * self.n
    }

    /// Degree of the highest-degree basis polynomial.
    pub fn max_degree(&self) -> usize {
        2 * self.m + self.n_polys - 1
    }

    fn window_derivative(&self, x: f64, r: usize) -> f64 {
        let mut v = 0.0;
        for (p, c) in self.window.iter().enumerate() {
            if *c == 0.0 || p < r {
                continue;
            }
            let mut factor = *c;
            for q in 0..r {
                factor *= (p - q) as f64;
            }
            v += factor * x.powi((p - r) as i32);
        }
        v
    }

    /// jets[k][i] = D^i phi_k(x) for i = 0..=max_order, by the Leibniz rule
    /// over window * L_k(2x-1) with the Legendre derivative recurrence.
    pub fn jets(&self, x: f64, max_order: usize) -> Vec<Vec<f64>> {
        let table = legendre_derivative_table(2.0 * x - 1.0, self.n_polys, max_order);
        let wder: Vec<f64> = (0..=max_order).map(|r| self.window_derivative(x, r)).collect();
        let mut out = vec![vec![0.0; max_order + 1]; self.n_polys];
        for k in 0..self.n_polys {
            for i in 0..=max_order {
                let mut v = 0.0;
                for s in 0..=i {
                    v += binom(i as u32, s as u32) * wder[i - s] * 2f64.powi(s as i32) * table[s][k];
                }
                out[k][i] = v;
            }
        }
        out
    }
}

/// Assembles the Nn x Nn matrix of the form with coefficient table `omega`
/// ((m+1)^2 matrix polynomials) over the Galerkin basis, using a node count
/// exact for the polynomial degree of every entry.
fn assemble(omega_table: &[Vec<MatrixPolynomial>], basis: &GalerkinBasis) -> HermMatrix {
    let (m, n) = (basis.m, basis.n);
    let max_omega_deg = omega_table
        .iter()
        .flatten()
        .map(|p| p.degree() as usize)
        .max()
        .unwrap_or(0);
    let bound = 2 * basis.max_degree() + max_omega_deg;
    let nodes = bound / 2 + 1;
    let (xs, ws) = gauss_legendre_unit(nodes);
    let dim = basis.dim();
    let mut g = CMatrix::zeros(dim, dim);
    for (x, w) in xs.iter().zip(&ws) {
        let jets = basis.jets(*x, m);
        for i in 0..=m {
            for j in 0..=m {
                let poly = &omega_table[i][j];
                if poly.is_zero() {
                    continue;
                }
                let om = poly.eval(*x);
                for ka in 0..basis.n_polys {
                    for kb in 0..basis.n_polys {
                        let scalar = Complex64::new(w * jets[ka][i] * jets[kb][j], 0.0);
                        for da in 0..n {
                            for db in 0..n {
                                g[(ka * n + da, kb * n + db)] += scalar * om[(da, db)];
                            }
                        }
                    }
                }
            }
        }
    }
    HermMatrix::new((&g + g.adjoint()).scale(0.5)).expect("Galerkin matrix is Hermitian")
}

/// G_N(lambda): the rescaled form on the Galerkin basis.
pub fn gram(problem: &SturmProblem, lambda: f64, n_polys: usize) -> Result<HermMatrix> {
    let rescaled = problem.rescale(lambda)?;
    let basis = GalerkinBasis::new(problem.m, problem.n, n_polys);
    let table: Vec<Vec<MatrixPolynomial>> = (0..=problem.m)
        .map(|i| (0..=problem.m).map(|j| rescaled.omega(i, j).clone()).collect())
        .collect();
    Ok(assemble(&table, &basis))
}

/// Analytic dG_N/dlambda from the coefficient family's lambda-derivative.
pub fn gram_derivative(problem: &SturmProblem, lambda: f64, n_polys: usize) -> HermMatrix {
    let basis = GalerkinBasis::new(problem.m, problem.n, n_polys);
    let table = problem.rescale_derivative(lambda);
    assemble(&table, &basis)
}

/// Spectral flow by inertia difference: n_minus(G(0)) - n_minus(G(1)),
/// the crossing-sum convention. Fails on degenerate endpoints.
pub fn spectral_flow_inertia(
    problem: &SturmProblem,
    n_polys: usize,
    tol: &TolerancePolicy,
) -> Result<i64> {
    let (i0, i1) = endpoint_inertias(problem, n_polys, tol)?;
    Ok(i0.n_minus as i64 - i1.n_minus as i64)
}

pub fn endpoint_inertias(
    problem: &SturmProblem,
    n_polys: usize,
    tol: &TolerancePolicy,
) -> Result<(Inertia, Inertia)> {
    let i0 = hermitian::inertia(&gram(problem, 0.0, n_polys)?, tol);
    let i1 = hermitian::inertia(&gram(problem, 1.0, n_polys)?, tol);
    if !i0.is_nondegenerate() || !i1.is_nondegenerate() {
        return Err(SturmError::EndpointDegenerate);
    }
    Ok((i0, i1))
}

/// One crossing of the discrete family G_N(lambda).
#[derive(Debug, Clone)]
pub struct MorseCrossing {
    pub lambda: f64,
    pub kernel_dim: usize,
    pub signature: i64,
}

/// Spectral flow by crossing-form summation: locates the degeneracy
/// set of G_N on (0,1) by n_minus jumps plus sigma_min dips on a 512-point
/// grid, restricts dG_N/dlambda to each kernel and sums the signatures.
pub fn spectral_flow_crossings(
    problem: &SturmProblem,
    n_polys: usize,
    tol: &TolerancePolicy,
) -> Result<(i64, Vec<MorseCrossing>)> {
    endpoint_inertias(problem, n_polys, tol)?;
    // Strict sign counting (no zero band): the jump bisection must converge
    // to the eigenvalue zero itself, not to the edge of a counting band.
    let spectrum = |lambda: f64| -> Result<(usize, f64)> {
        let g = gram(problem, lambda, n_polys)?;
        let eig = g.matrix().clone().symmetric_eigen().eigenvalues;
        let n_minus = eig.iter().filter(|v| **v < 0.0).count();
        let smin = eig.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        Ok((n_minus, smin))
    };
    let ts = grid(0.0, 1.0, 512);
    let samples: Vec<(usize, f64)> = ts.iter().map(|t| spectrum(*t)).collect::<Result<_>>()?;
    let sig_vals: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let scale = sig_vals.iter().copied().fold(0.0f64, f64::max).max(1.0);

    let mut candidates: Vec<f64> = Vec::new();
    for w in 0..ts.len() - 1 {
        if samples[w].0 != samples[w + 1].0 {
            candidates.push(bisect_integer_jump(
                |l| spectrum(l).map(|s| s.0 as i64).unwrap_or(-1),
                ts[w],
                ts[w + 1],
                1e-11,
            ));
        }
    }
    // Zero-signature crossings leave n_minus unchanged; catch them as dips,
    // resolving clusters of delta-split zeros.
    let smallest = |l: f64| spectrum(l).map(|s| s.1).unwrap_or(f64::INFINITY);
    for idx in local_minima_below(&sig_vals, 0.5 * scale) {
        candidates.extend(resolve_dip(&smallest, ts[idx - 1], ts[idx + 1], 1e-6 * scale));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() < 1e-8);

    let mut crossings = Vec::new();
    let mut total = 0i64;
    for lambda0 in candidates {
        let g = gram(problem, lambda0, n_polys)?;
        let kernel: Vec<CVector> = hermitian::kernel_basis(&g, tol);
        if kernel.is_empty() {
            continue;
        }
        let dg = gram_derivative(problem, lambda0, n_polys);
        let gamma = hermitian::restrict_form(|u, v| dg.form(u, v), &kernel)?;
        let inertia = hermitian::inertia(&gamma, tol);
        if inertia.n_zero > 0 || (inertia.dim() >= 2 && inertia.signature() == 0) {
            return Err(SturmError::NonRegularCrossing { lambda: lambda0 });
        }
        total += inertia.signature();
        crossings.push(MorseCrossing {
            lambda: lambda0,
            kernel_dim: kernel.len(),
            signature: inertia.signature(),
        });
    }
    Ok((total, crossings))
}

pub struct MorseOutcome {
    pub index: i64,
    /// Largest Galerkin N of the stability certificate.
    pub n_certificate: usize,
    pub crossings: Vec<MorseCrossing>,
    /// n_minus(G(1)) - n_minus(G(0)), the classical count convention.
    pub classical_index: i64,
}

/// mu_Mor by inertia difference at N, N+4, N+8 (stability certificate),
/// cross-checked against the crossing-sum method at the largest N.
pub fn morse_index(
    problem: &SturmProblem,
    base_n: usize,
    tol: &TolerancePolicy,
) -> Result<MorseOutcome> {
    let mut base = base_n;
    loop {
        let ns = [base, base + 4, base + 8];
        if ns[2] > 32 {
            return Err(SturmError::Convergence { max_n: 32 });
        }
        let flows = ns
            .iter()
            .map(|n| spectral_flow_inertia(problem, *n, tol))
            .collect::<Result<Vec<_>>>()?;
        if flows[0] != flows[1] || flows[1] != flows[2] {
            base += 8;
            continue;
        }
        let (cross_total, crossings) = spectral_flow_crossings(problem, ns[2], tol)?;
        if cross_total != flows[0] {
            return Err(SturmError::Inconsistency {
                lambda: f64::NAN,
                detail: format!(
                    "inertia-difference flow {} != crossing-sum flow {cross_total} at N = {}",
                    flows[0], ns[2]
                ),
            });
        }
        let (i0, i1) = endpoint_inertias(problem, ns[2], tol)?;
        return Ok(MorseOutcome {
            index: flows[0],
            n_certificate: ns[2],
            crossings,
            classical_index: i1.n_minus as i64 - i0.n_minus as i64,
        });
    }
}

/// The regularizing zero-order shift: omega00 += (3 delta / 2) I, the
/// operator shift delta plus the extra half-delta L2 term.
pub fn delta_regularize(problem: &SturmProblem, delta: f64) -> SturmProblem {
    assert!(delta >= 0.0);
    let m = problem.m;
    let n = problem.n;
    let mut table: Vec<Vec<MatrixPolynomial>> = (0..=m)
        .map(|i| (0..=m).map(|j| problem.omega(i, j).clone()).collect())
        .collect();
    table[0][0].add_term(
        0,
        &CMatrix::identity(n, n),
        Complex64::new(1.5 * delta, 0.0),
    );
    SturmProblem::new(m, n, problem.nu, table).expect("shift preserves validity")
}
