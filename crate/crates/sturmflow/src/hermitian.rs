//! Finite-dimensional Hermitian linear algebra: inertia, kernels and
//! restriction of sesquilinear forms.
//!
//! Convention used everywhere in this crate: the inner product is antilinear
//! in the FIRST argument and linear in the second, `<a, b> = sum conj(a_k) b_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, SturmError};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_SYM_TOL: f64 = 1e-12;

/// Tolerance knobs shared by every numerically rank-sensitive decision.
#[derive(Debug, Clone, Copy)]
pub struct TolerancePolicy {
    /// Relative threshold for treating eigen/singular values as zero.
    pub rank_rel_tol: f64,
    /// ODE / quadrature relative tolerance.
    pub integ_rel_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rank_rel_tol: 1e-8, integ_rel_tol: 1e-10 }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rel_tol: f64, integ_rel_tol: f64) -> Result<Self> {
        for t in [rank_rel_tol, integ_rel_tol] {
            if !(t > 0.0 && t < 1.0) {
                return Err(SturmError::Domain(format!(
                    "tolerances must lie strictly in (0, 1), got {t}"
                )));
            }
        }
        Ok(Self { rank_rel_tol, integ_rel_tol })
    }
}

/// A validated Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermMatrix {
    mat: CMatrix,
}

impl HermMatrix {
    /// Accepts `mat` if it is Hermitian to within `HERMITIAN_SYM_TOL` relative
    /// to the largest entry magnitude, and stores the symmetrized matrix
    /// `(M + M*)/2` so downstream eigen-decompositions see an exactly
    /// Hermitian input.
    pub fn new(mat: CMatrix) -> Result<Self> {
        assert_eq!(mat.nrows(), mat.ncols(), "HermMatrix requires a square matrix");
        let scale = mat.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
        let residual = (&mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if residual > 2.0 * HERMITIAN_SYM_TOL * scale {
            return Err(SturmError::SymmetryViolation {
                residual: residual / scale,
                tol: HERMITIAN_SYM_TOL,
            });
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat: sym })
    }

    /// Real diagonal matrix, trivially Hermitian.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (k, d) in diag.iter().enumerate() {
            m[(k, k)] = Complex64::new(*d, 0.0);
        }
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Evaluates the associated form, antilinear in `u`: `<u, M v>`.
    pub fn form(&self, u: &CVector, v: &CVector) -> Complex64 {
        u.dotc(&(&self.mat * v))
    }
}

/// Eigenvalue sign counts of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Inertia {
    pub fn signature(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.n_zero == 0
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }
}

fn eigen(h: &HermMatrix) -> (Vec<f64>, CMatrix) {
    let se = h.mat.clone().symmetric_eigen();
    (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
}

/// Counts eigenvalue signs. Eigenvalues with `|mu| < rank_rel_tol * max(1, spectral radius)`
/// are counted as zero.
pub fn inertia(h: &HermMatrix, tol: &TolerancePolicy) -> Inertia {
    let (vals, _) = eigen(h);
    let radius = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thresh = tol.rank_rel_tol * radius.max(1.0);
    let mut out = Inertia { n_plus: 0, n_minus: 0, n_zero: 0 };
    for v in vals {
        if v.abs() < thresh {
            out.n_zero += 1;
        } else if v > 0.0 {
            out.n_plus += 1;
        } else {
            out.n_minus += 1;
        }
    }
    out
}

/// Orthonormal basis of the numerical kernel; empty when nondegenerate.
pub fn kernel_basis(h: &HermMatrix, tol: &TolerancePolicy) -> Vec<CVector> {
    let (vals, vecs) = eigen(h);
    let radius = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thresh = tol.rank_rel_tol * radius.max(1.0);
    vals.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() < thresh)
        .map(|(k, _)| vecs.column(k).into_owned())
        .collect()
}

/// Matrix of a Hermitian-symmetric sesquilinear form on the span of `basis`:
/// `out[j][k] = B(basis[j], basis[k])` (antilinear in the first slot).
pub fn restrict_form<F>(bform: F, basis: &[CVector]) -> Result<HermMatrix>
where
    F: Fn(&CVector, &CVector) -> Complex64,
{
    let d = basis.len();
    assert!(d > 0, "restrict_form requires a nonempty basis");
    // Linear independence via the Gram determinant of the basis.
    let mut gram = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            gram[(j, k)] = basis[j].dotc(&basis[k]);
        }
    }
    let scale: f64 = basis.iter().map(|b| b.norm_squared()).product();
    let det = gram.determinant().norm();
    if det < 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(SturmError::DegenerateBasis { det });
    }
    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            out[(j, k)] = bform(&basis[j], &basis[k]);
        }
    }
    HermMatrix::new(out)
}
