//! Matrix polynomials in a single real variable x, closed under exact
//! differentiation and the substitution x -> lambda*x.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::hermitian::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    dim: usize,
    /// power -> coefficient matrix; zero coefficients are pruned.
    terms: BTreeMap<u32, CMatrix>,
}

impl MatrixPolynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(coeff: CMatrix) -> Self {
        Self::from_terms(coeff.nrows(), vec![(0, coeff)])
    }

    pub fn from_terms(dim: usize, terms: Vec<(u32, CMatrix)>) -> Self {
        let mut p = Self::zero(dim);
        for (pow, c) in terms {
            p.add_term(pow, &c, Complex64::new(1.0, 0.0));
        }
        p
    }

    /// Scalar polynomial embedded as a 1x1 matrix polynomial.
    pub fn scalar(coeffs: &[f64]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(p, c)| (p as u32, DMatrix::from_element(1, 1, Complex64::new(*c, 0.0))))
            .collect();
        Self::from_terms(1, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().copied().max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &CMatrix)> {
        self.terms.iter().map(|(p, c)| (*p, c))
    }

    pub fn add_term(&mut self, power: u32, coeff: &CMatrix, scale: Complex64) {
        assert_eq!(coeff.nrows(), self.dim);
        assert_eq!(coeff.ncols(), self.dim);
        let entry = self
            .terms
            .entry(power)
            .or_insert_with(|| CMatrix::zeros(self.dim, self.dim));
        *entry += coeff.map(|z| z * scale);
        if entry.iter().all(|z| z.norm() == 0.0) {
            self.terms.remove(&power);
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, scale: Complex64) {
        assert_eq!(self.dim, other.dim);
        for (p, c) in other.terms() {
            self.add_term(p, c, scale);
        }
    }

    pub fn eval(&self, x: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (p, c) in &self.terms {
            let xp = x.powi(*p as i32);
            out += c.map(|z| z * xp);
        }
        out
    }

    /// Exact derivative d/dx.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (p, c) in &self.terms {
            if *p > 0 {
                out.add_term(p - 1, c, Complex64::new(*p as f64, 0.0));
            }
        }
        out
    }

    pub fn derivative_n(&self, n: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.derivative();
        }
        out
    }

    /// The polynomial `scale * p(lambda * x)`: each degree-k coefficient is
    /// multiplied by `scale * lambda^k`. Exact.
    pub fn substitute_scaled(&self, lambda: f64, scale: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for (p, c) in &self.terms {
            let f = scale * lambda.powi(*p as i32);
            out.add_term(*p, c, Complex64::new(f, 0.0));
        }
        out
    }

    /// Left-multiplies every coefficient by a constant matrix.
    pub fn left_mul(&self, lhs: &CMatrix) -> Self {
        let mut out = Self::zero(self.dim);
        for (p, c) in &self.terms {
            out.add_term(*p, &(lhs * c), Complex64::new(1.0, 0.0));
        }
        out
    }

    pub fn scaled(&self, scale: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        out.add_assign_scaled(self, scale);
        out
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Max entrywise deviation from coefficientwise equality with `other`.
    pub fn coeff_distance(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        let powers: std::collections::BTreeSet<u32> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        let zero = CMatrix::zeros(self.dim, self.dim);
        for p in powers {
            let a = self.terms.get(&p).unwrap_or(&zero);
            let b = other.terms.get(&p).unwrap_or(&zero);
            d = d.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        d
    }
}
