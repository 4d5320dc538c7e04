//! JSON problem configuration: parsing, validation and conversion to
//! [`SturmProblem`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SturmError};
use crate::matpoly::MatrixPolynomial;
use crate::sturm::SturmProblem;

/// One monomial term `coeff * x^power` of a matrix polynomial, with the
/// coefficient split into real and imaginary n x n parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermConfig {
    pub power: u32,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// The coefficient omega_{i,j}; only i <= j entries may appear, the (j,i)
/// mirror is implied by Hermitian index symmetry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaEntryConfig {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TermConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub m: usize,
    pub n: usize,
    pub nu: usize,
    pub omega: Vec<OmegaEntryConfig>,
}

fn validation(msg: impl Into<String>) -> SturmError {
    SturmError::Validation(msg.into())
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| validation(format!("JSON parse error: {e}")))
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| validation(format!("JSON parse error: {e}")))
    }

    fn term_matrix(&self, term: &TermConfig) -> Result<DMatrix<Complex64>> {
        let n = self.n;
        for part in [&term.re, &term.im] {
            if part.len() != n || part.iter().any(|row| row.len() != n) {
                return Err(validation(format!(
                    "coefficient matrices must be {n} x {n} (term with power {})",
                    term.power
                )));
            }
        }
        let mut out = DMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let (re, im) = (term.re[r][c], term.im[r][c]);
                if !re.is_finite() || !im.is_finite() {
                    return Err(validation(format!(
                        "non-finite coefficient entry at ({r}, {c}), power {}",
                        term.power
                    )));
                }
                out[(r, c)] = Complex64::new(re, im);
            }
        }
        Ok(out)
    }

    /// Builds and validates the problem: entries with i > j are rejected,
    /// the (j, i) mirror is filled with the coefficient-wise adjoint.
    pub fn to_problem(&self) -> Result<SturmProblem> {
        let m = self.m;
        if m == 0 {
            return Err(validation("order parameter m must be at least 1"));
        }
        if self.n == 0 {
            return Err(validation("system dimension n must be at least 1"));
        }
        let mut table = vec![vec![MatrixPolynomial::zero(self.n); m + 1]; m + 1];
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.omega {
            if entry.i > entry.j {
                return Err(validation(format!(
                    "only i <= j entries may be given, found ({}, {})",
                    entry.i, entry.j
                )));
            }
            if entry.j > m {
                return Err(validation(format!(
                    "omega index ({}, {}) exceeds the order m = {m}",
                    entry.i, entry.j
                )));
            }
            if !seen.insert((entry.i, entry.j)) {
                return Err(validation(format!(
                    "duplicate omega entry ({}, {})",
                    entry.i, entry.j
                )));
            }
            let terms: Vec<(u32, DMatrix<Complex64>)> = entry
                .terms
                .iter()
                .map(|t| Ok((t.power, self.term_matrix(t)?)))
                .collect::<Result<_>>()?;
            let mirrored: Vec<(u32, DMatrix<Complex64>)> =
                terms.iter().map(|(p, c)| (*p, c.adjoint())).collect();
            table[entry.i][entry.j] = MatrixPolynomial::from_terms(self.n, terms);
            if entry.i != entry.j {
                table[entry.j][entry.i] = MatrixPolynomial::from_terms(self.n, mirrored);
            }
        }
        SturmProblem::new(m, self.n, self.nu, table)
    }
}

/// Serializes a problem back into the config shape (i <= j entries only).
pub fn config_from_problem(problem: &SturmProblem) -> ProblemConfig {
    let mut omega = Vec::new();
    for i in 0..=problem.m {
        for j in i..=problem.m {
            let poly = problem.omega(i, j);
            if poly.is_zero() {
                continue;
            }
            let terms = poly
                .terms()
                .map(|(power, coeff)| TermConfig {
                    power,
                    re: (0..problem.n)
                        .map(|r| (0..problem.n).map(|c| coeff[(r, c)].re).collect())
                        .collect(),
                    im: (0..problem.n)
                        .map(|r| (0..problem.n).map(|c| coeff[(r, c)].im).collect())
                        .collect(),
                })
                .collect();
            omega.push(OmegaEntryConfig { i, j, terms });
        }
    }
    ProblemConfig { m: problem.m, n: problem.n, nu: problem.nu, omega }
}
