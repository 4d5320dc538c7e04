//! The derivative-dependent Hermitian form Omega, the assembled differential
//! operator l(x, D), the boundary map A(x) produced by symbolic integration by
//! parts, and the rescaled family.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SturmError};
use crate::hermitian::{CMatrix, HERMITIAN_SYM_TOL};
use crate::matpoly::MatrixPolynomial;

pub(crate) fn binom(n: u32, k: u32) -> f64 {
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// The symmetry diag(I_{n-nu}, -I_nu).
pub fn leading_symmetry(n: usize, nu: usize) -> CMatrix {
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(if r < n - nu { 1.0 } else { -1.0 }, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Table of coefficients omega_{i,j} for 0 <= i, j <= m, each an n x n
/// Hermitian-valued matrix polynomial with omega_{m,m} = diag(I_{n-nu}, -I_nu).
#[derive(Debug, Clone)]
pub struct SturmProblem {
    pub m: usize,
    pub n: usize,
    pub nu: usize,
    omega: Vec<Vec<MatrixPolynomial>>,
}

impl SturmProblem {
    /// Builds and validates a problem from the (m+1)x(m+1) coefficient table
    /// (row-major: `omega[i][j]`).
    pub fn new(m: usize, n: usize, nu: usize, omega: Vec<Vec<MatrixPolynomial>>) -> Result<Self> {
        let p = Self { m, n, nu, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn omega(&self, i: usize, j: usize) -> &MatrixPolynomial {
        &self.omega[i][j]
    }

    pub fn p2m(&self) -> CMatrix {
        leading_symmetry(self.n, self.nu)
    }

    pub fn jet_dim(&self) -> usize {
        self.m * self.n
    }

    pub fn max_omega_degree(&self) -> u32 {
        self.omega
            .iter()
            .flatten()
            .map(|p| if p.is_zero() { 0 } else { p.degree() })
            .max()
            .unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(SturmError::Validation("half-order m must be >= 1".into()));
        }
        if self.n < 1 {
            return Err(SturmError::Validation("dimension n must be >= 1".into()));
        }
        if self.nu > self.n {
            return Err(SturmError::Validation(format!(
                "signature index nu = {} exceeds n = {}",
                self.nu, self.n
            )));
        }
        if self.omega.len() != self.m + 1 || self.omega.iter().any(|r| r.len() != self.m + 1) {
            return Err(SturmError::Validation(format!(
                "omega table must be {0} x {0}",
                self.m + 1
            )));
        }
        for (i, row) in self.omega.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                if w.dim() != self.n {
                    return Err(SturmError::Validation(format!(
                        "omega[{i}][{j}] has dimension {} but n = {}",
                        w.dim(),
                        self.n
                    )));
                }
                let scale = w.max_coeff_norm().max(1.0);
                for (p, c) in w.terms() {
                    let asym = (c - c.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    if asym > 2.0 * HERMITIAN_SYM_TOL * scale {
                        return Err(SturmError::Validation(format!(
                            "omega[{i}][{j}], x^{p} coefficient is not Hermitian \
                             (asymmetry {asym:.3e})"
                        )));
                    }
                }
                if i < j {
                    let d = w.coeff_distance(&self.omega[j][i]);
                    if d > 2.0 * HERMITIAN_SYM_TOL * scale {
                        return Err(SturmError::Validation(format!(
                            "index-symmetry violation: omega[{i}][{j}] != omega[{j}][{i}] \
                             (max entry deviation {d:.3e})"
                        )));
                    }
                }
            }
        }
        // Leading coefficient: constant and entrywise equal to diag(I_{n-nu}, -I_nu).
        let lead = &self.omega[self.m][self.m];
        let expected = MatrixPolynomial::constant(leading_symmetry(self.n, self.nu));
        if lead.degree() != 0 || lead.coeff_distance(&expected) != 0.0 {
            return Err(SturmError::Validation(format!(
                "leading symmetry mismatch: omega[{0}][{0}] must equal diag(I_{1}, -I_{2}) exactly",
                self.m,
                self.n - self.nu,
                self.nu
            )));
        }
        Ok(())
    }

    /// The rescaled table `omega^lambda_{i,j}(x) = lambda^{2m-(i+j)} omega_{i,j}(lambda x)`,
    /// itself a valid problem (the leading entry is unchanged).
    pub fn rescale(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(SturmError::Domain(format!(
                "rescale parameter lambda = {lambda} outside [0, 1]"
            )));
        }
        let mut table = Vec::with_capacity(self.m + 1);
        for i in 0..=self.m {
            let mut row = Vec::with_capacity(self.m + 1);
            for j in 0..=self.m {
                let e = (2 * self.m - i - j) as i32;
                // scale * p(lambda x) with scale = lambda^e; exact even at
                // lambda = 0 where only the exponent-0 leading entry survives.
                let scale = if e == 0 { 1.0 } else { lambda.powi(e) };
                row.push(self.omega[i][j].substitute_scaled(lambda, scale));
            }
            table.push(row);
        }
        Self::new(self.m, self.n, self.nu, table)
    }

    /// Exact lambda-derivative of the rescaled table:
    /// d/dlambda [ lambda^{2m-i-j+p} c_p x^p ] summed over monomials.
    pub fn rescale_derivative(&self, lambda: f64) -> Vec<Vec<MatrixPolynomial>> {
        let mut table = Vec::with_capacity(self.m + 1);
        for i in 0..=self.m {
            let mut row = Vec::with_capacity(self.m + 1);
            for j in 0..=self.m {
                let e = (2 * self.m - i - j) as u32;
                let mut out = MatrixPolynomial::zero(self.n);
                for (p, c) in self.omega[i][j].terms() {
                    let tot = e + p;
                    if tot == 0 {
                        continue;
                    }
                    let f = tot as f64 * lambda.powi(tot as i32 - 1);
                    out.add_term(p, c, Complex64::new(f, 0.0));
                }
                row.push(out);
            }
            table.push(row);
        }
        table
    }

    /// Coefficients of l(x,D)u = sum_{i,j} (-1)^i D^i ( omega_{i,j}(x) D^j u ),
    /// expanded by the Leibniz rule into sum_k p_k(x) D^k u.
    pub fn assemble_operator(&self) -> OperatorCoefficients {
        let mut p = vec![MatrixPolynomial::zero(self.n); 2 * self.m + 1];
        for i in 0..=self.m {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..=self.m {
                for t in 0..=i {
                    // D^i(w D^j u) contributes binom(i,t) w^{(i-t)} D^{t+j} u.
                    let k = t + j;
                    let coeff = sign * binom(i as u32, t as u32);
                    let der = self.omega[i][j].derivative_n((i - t) as u32);
                    p[k].add_assign_scaled(&der, Complex64::new(coeff, 0.0));
                }
            }
        }
        let leading_sign: i32 = if self.m % 2 == 0 { 1 } else { -1 };
        OperatorCoefficients { m: self.m, n: self.n, leading_sign, p }
    }

    /// The boundary map A(x) collecting every integration-by-parts boundary
    /// term: phi(v, u) = [< j^m v(x), A(x) j^{2m} u(x) >]_{x=0}^{1}.
    pub fn assemble_boundary_map(&self) -> BoundaryMap {
        let m = self.m;
        let mut blocks = vec![vec![MatrixPolynomial::zero(self.n); 2 * m]; m];
        for i in 1..=m {
            for j in 0..=m {
                for r in 0..i {
                    // Integrating <D^i v, w D^j u> by parts r+1 times leaves the
                    // boundary term (-1)^r <D^{i-1-r} v, D^r(w D^j u)>.
                    let row = i - 1 - r;
                    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                    for s in 0..=r {
                        let col = j + s;
                        let coeff = sign * binom(r as u32, s as u32);
                        let der = self.omega[i][j].derivative_n((r - s) as u32);
                        blocks[row][col].add_assign_scaled(&der, Complex64::new(coeff, 0.0));
                    }
                }
            }
        }
        BoundaryMap { m, n: self.n, blocks }
    }
}

/// l(x,D)u = leading_sign * p_{2m} D^{2m} u + sum_{k<2m} p_k(x) D^k u,
/// with leading_sign = (-1)^m recorded explicitly and never renormalized.
#[derive(Debug, Clone)]
pub struct OperatorCoefficients {
    pub m: usize,
    pub n: usize,
    pub leading_sign: i32,
    /// p[k] for k = 0..=2m; p[2m] = leading_sign * p_{2m} as assembled.
    p: Vec<MatrixPolynomial>,
}

impl OperatorCoefficients {
    pub fn coefficient(&self, k: usize) -> &MatrixPolynomial {
        &self.p[k]
    }

    pub fn order(&self) -> usize {
        2 * self.m
    }

    /// Applies l(x,D) to a 2m-jet extended with u^{(2m)}: given the stacked
    /// values (u, u', ..., u^{(2m)}), returns l u at x.
    pub fn apply_to_jet(&self, x: f64, jet: &[nalgebra::DVector<Complex64>]) -> nalgebra::DVector<Complex64> {
        assert_eq!(jet.len(), 2 * self.m + 1);
        let mut out = nalgebra::DVector::zeros(self.n);
        for (k, pk) in self.p.iter().enumerate() {
            if !pk.is_zero() {
                out += pk.eval(x) * &jet[k];
            }
        }
        out
    }
}

/// Block matrix A(x) with rows indexed by m-jet components of the test
/// function and columns by 2m-jet components of the solution.
#[derive(Debug, Clone)]
pub struct BoundaryMap {
    pub m: usize,
    pub n: usize,
    blocks: Vec<Vec<MatrixPolynomial>>,
}

impl BoundaryMap {
    pub fn block(&self, j: usize, k: usize) -> &MatrixPolynomial {
        &self.blocks[j][k]
    }

    /// Dense mn x 2mn matrix at x.
    pub fn eval(&self, x: f64) -> CMatrix {
        let n = self.n;
        let mut a = CMatrix::zeros(self.m * n, 2 * self.m * n);
        for (j, row) in self.blocks.iter().enumerate() {
            for (k, b) in row.iter().enumerate() {
                if !b.is_zero() {
                    a.view_mut((j * n, k * n), (n, n)).copy_from(&b.eval(x));
                }
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{prob_0, prob_a, prob_b, prob_c, PROB_A_C};
    use crate::quad::gauss_legendre_unit;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn validate_accepts_canonical_problems() {
        prob_0();
        prob_a();
        prob_b();
        prob_c(PROB_A_C);
    }

    #[test]
    fn validate_rejects_leading_mismatch() {
        // omega11 = diag(1,1) with nu = 1 declared.
        let id = MatrixPolynomial::constant(CMatrix::identity(2, 2));
        let z = MatrixPolynomial::zero(2);
        let err = SturmProblem::new(1, 2, 1, vec![vec![z.clone(), z.clone()], vec![z, id]]);
        match err {
            Err(SturmError::Validation(msg)) => assert!(msg.contains("leading symmetry")),
            other => panic!("expected leading-symmetry rejection, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_index_asymmetry() {
        let one = MatrixPolynomial::constant(CMatrix::identity(1, 1));
        let z = MatrixPolynomial::zero(1);
        let two = one.scaled(c(2.0));
        let err = SturmProblem::new(1, 1, 0, vec![vec![z, one.clone()], vec![two, one]]);
        match err {
            Err(SturmError::Validation(msg)) => assert!(msg.contains("index-symmetry")),
            other => panic!("expected index-symmetry rejection, got {other:?}"),
        }
    }

    #[test]
    fn operator_assembly_prob_a() {
        // l u = -u'' - c u.
        let op = prob_a().assemble_operator();
        assert_eq!(op.leading_sign, -1);
        assert_relative_eq!(op.coefficient(2).eval(0.3)[(0, 0)].re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(op.coefficient(0).eval(0.3)[(0, 0)].re, -PROB_A_C, epsilon = 1e-12);
        assert!(op.coefficient(1).is_zero());
    }

    #[test]
    fn operator_assembly_prob_0_and_c() {
        let op = prob_0().assemble_operator();
        assert_relative_eq!(op.coefficient(2).eval(0.0)[(0, 0)].re, -1.0, epsilon = 1e-14);
        assert!(op.coefficient(0).is_zero());

        // PROB-C: l u = u'''' - c u.
        let p = prob_c(PROB_A_C);
        let op = p.assemble_operator();
        assert_eq!(op.leading_sign, 1);
        assert_relative_eq!(op.coefficient(4).eval(0.5)[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(op.coefficient(0).eval(0.5)[(0, 0)].re, -PROB_A_C, epsilon = 1e-12);
        for k in 1..4 {
            assert!(op.coefficient(k).is_zero());
        }
    }

    #[test]
    fn boundary_map_prob_a_and_c() {
        let a = prob_a().assemble_boundary_map();
        assert!(a.block(0, 0).is_zero());
        assert_relative_eq!(a.block(0, 1).eval(0.7)[(0, 0)].re, 1.0, epsilon = 1e-14);

        let ac = prob_c(PROB_A_C).assemble_boundary_map();
        // phi = [<v', u''> - <v, u'''>]_0^1.
        assert_relative_eq!(ac.block(0, 3).eval(0.2)[(0, 0)].re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(ac.block(1, 2).eval(0.2)[(0, 0)].re, 1.0, epsilon = 1e-14);
        for (j, k) in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 3)] {
            assert!(ac.block(j, k).is_zero(), "block ({j},{k}) should vanish");
        }
    }

    #[test]
    fn antidiagonal_law_on_random_problems() {
        let mut rng = crate::testutil::rng(23);
        for _ in 0..20 {
            let p = crate::problems::random_problem(&mut rng);
            let a = p.assemble_boundary_map();
            let p2m = p.p2m();
            for j in 0..p.m {
                let k = 2 * p.m - j - 1;
                let b = a.block(j, k);
                // a_{j, 2m-j-1} = (-1)^{m-1-j} p_{2m} exactly.
                let sign = if (p.m - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
                let expected = MatrixPolynomial::constant(p2m.map(|z| z * c(sign)));
                assert_eq!(b.coeff_distance(&expected), 0.0);
                // Zero above the antidiagonal.
                for kk in (k + 1)..(2 * p.m) {
                    assert!(a.block(j, kk).is_zero());
                }
            }
        }
    }

    #[test]
    fn rescale_identity_zero_and_midpoint() {
        let p = prob_a();
        let r1 = p.rescale(1.0).unwrap();
        for i in 0..=1 {
            for j in 0..=1 {
                assert_eq!(p.omega(i, j).coeff_distance(r1.omega(i, j)), 0.0);
            }
        }
        let r0 = p.rescale(0.0).unwrap();
        assert!(r0.omega(0, 0).is_zero());
        assert_eq!(
            r0.omega(1, 1)
                .coeff_distance(&MatrixPolynomial::constant(CMatrix::identity(1, 1))),
            0.0
        );
        let rh = p.rescale(0.5).unwrap();
        assert_relative_eq!(
            rh.omega(0, 0).eval(0.9)[(0, 0)].re,
            -0.25 * PROB_A_C,
            epsilon = 1e-12
        );
        assert_relative_eq!(rh.omega(1, 1).eval(0.9)[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert!(p.rescale(1.5).is_err());
    }

    #[test]
    fn rescale_formula_at_random_points() {
        let mut rng = crate::testutil::rng(31);
        let p = crate::problems::random_problem(&mut rng);
        for _ in 0..50 {
            let lambda: f64 = rng.gen_range(0.0..1.0);
            let x: f64 = rng.gen_range(0.0..1.0);
            let r = p.rescale(lambda).unwrap();
            for i in 0..=p.m {
                for j in 0..=p.m {
                    let direct = p
                        .omega(i, j)
                        .eval(lambda * x)
                        .map(|z| z * c(lambda.powi((2 * p.m - i - j) as i32)));
                    let d = (r.omega(i, j).eval(x) - direct)
                        .iter()
                        .map(|z| z.norm())
                        .fold(0.0, f64::max);
                    assert!(d < 1e-12 * p.omega(i, j).max_coeff_norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn rescale_derivative_matches_finite_differences() {
        let mut rng = crate::testutil::rng(37);
        for _ in 0..5 {
            let p = crate::problems::random_problem(&mut rng);
            let lambda: f64 = rng.gen_range(0.2..0.9);
            let h = 1e-5;
            let der = p.rescale_derivative(lambda);
            let plus = p.rescale(lambda + h).unwrap();
            let minus = p.rescale(lambda - h).unwrap();
            for i in 0..=p.m {
                for j in 0..=p.m {
                    for x in [0.1, 0.5, 0.9] {
                        let fd = (plus.omega(i, j).eval(x) - minus.omega(i, j).eval(x))
                            .map(|z| z / c(2.0 * h));
                        let an = der[i][j].eval(x);
                        let scale = an.iter().map(|z| z.norm()).fold(1.0, f64::max);
                        let d = (an - fd).iter().map(|z| z.norm()).fold(0.0, f64::max);
                        assert!(d < 1e-6 * scale, "derivative mismatch {d:.3e} at ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn rescale_derivative_prob_a_entry() {
        let p = prob_a();
        let der = p.rescale_derivative(0.4);
        assert_relative_eq!(
            der[0][0].eval(0.3)[(0, 0)].re,
            -2.0 * 0.4 * PROB_A_C,
            epsilon = 1e-10
        );
        // Constant leading term contributes nothing.
        assert!(der[1][1].is_zero());
    }

    /// Jets of a vector-valued polynomial test function, exact.
    struct VecPoly {
        coeffs: Vec<DVector<Complex64>>,
    }

    impl VecPoly {
        fn random<R: Rng>(n: usize, deg: usize, rng: &mut R) -> Self {
            let coeffs = (0..=deg)
                .map(|_| {
                    DVector::from_fn(n, |_, _| {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                })
                .collect();
            Self { coeffs }
        }

        fn jet(&self, x: f64, orders: usize) -> Vec<DVector<Complex64>> {
            let n = self.coeffs[0].len();
            (0..=orders)
                .map(|r| {
                    let mut v = DVector::zeros(n);
                    for (p, cf) in self.coeffs.iter().enumerate() {
                        if p >= r {
                            let mut f = 1.0;
                            for q in 0..r {
                                f *= (p - q) as f64;
                            }
                            v += cf.map(|z| z * c(f * x.powi((p - r) as i32)));
                        }
                    }
                    v
                })
                .collect()
        }
    }

    #[test]
    fn reconstruction_identity_on_random_problems() {
        // q(v,u) = int <v, l u> + [<j^m v, A j^{2m} u>]_0^1 for polynomial v, u.
        let mut rng = crate::testutil::rng(41);
        for _ in 0..8 {
            let p = crate::problems::random_problem(&mut rng);
            let op = p.assemble_operator();
            let bmap = p.assemble_boundary_map();
            let u = VecPoly::random(p.n, 4, &mut rng);
            let v = VecPoly::random(p.n, 4, &mut rng);

            let deg = (p.max_omega_degree() as usize + 8 + 2) / 2 + 2;
            let (xs, ws) = gauss_legendre_unit(deg.max(8));

            // Left side: integral of the form itself.
            let mut q = Complex64::new(0.0, 0.0);
            for (x, w) in xs.iter().zip(&ws) {
                let ju = u.jet(*x, p.m);
                let jv = v.jet(*x, p.m);
                for i in 0..=p.m {
                    for j in 0..=p.m {
                        let wij = p.omega(i, j).eval(*x);
                        q += jv[i].dotc(&(&wij * &ju[j])) * c(*w);
                    }
                }
            }

            // Right side: bulk + boundary.
            let mut rhs = Complex64::new(0.0, 0.0);
            for (x, w) in xs.iter().zip(&ws) {
                let ju = u.jet(*x, 2 * p.m);
                let jv = v.jet(*x, 0);
                let lu = op.apply_to_jet(*x, &ju);
                rhs += jv[0].dotc(&lu) * c(*w);
            }
            for (x, sgn) in [(1.0, 1.0), (0.0, -1.0)] {
                let a = bmap.eval(x);
                let ju = u.jet(x, 2 * p.m - 1);
                let jv = v.jet(x, p.m - 1);
                let stack_u = DVector::from_iterator(
                    2 * p.m * p.n,
                    ju.iter().flat_map(|b| b.iter().copied()),
                );
                let stack_v = DVector::from_iterator(
                    p.m * p.n,
                    jv.iter().flat_map(|b| b.iter().copied()),
                );
                rhs += stack_v.dotc(&(&a * &stack_u)) * c(sgn);
            }
            let scale = q.norm().max(rhs.norm()).max(1.0);
            assert!(
                (q - rhs).norm() < 1e-9 * scale,
                "reconstruction identity violated: lhs {q}, rhs {rhs}"
            );
        }
    }
}
