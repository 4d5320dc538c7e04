//! Superhermitian linear geometry: isotropy tests, intersections, charts,
//! crossing forms and the EM-index of a path of superlagrangians.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, SturmError};
use crate::hermitian::{CMatrix, CVector, HermMatrix, TolerancePolicy};
use crate::scan::{golden_section_min, grid, local_minima_below};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative isotropy tolerance from the frame invariant.
pub const ISOTROPY_TOL: f64 = 1e-8;

/// A complex 2N-dimensional space with a nondegenerate zero-signature
/// Hermitian structure form h.
#[derive(Debug, Clone)]
pub struct SuperhermitianSpace {
    h: CMatrix,
    /// h-orthonormal frames of the positive and negative eigenspaces,
    /// scaled so plus* H plus = I and minus* H minus = -I.
    plus: CMatrix,
    minus: CMatrix,
}

impl SuperhermitianSpace {
    pub fn new(structure: HermMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let h = structure.matrix().clone();
        let dim = h.nrows();
        if dim % 2 != 0 {
            return Err(SturmError::Geometry("superhermitian space must be even dimensional".into()));
        }
        let inertia = crate::hermitian::inertia(&structure, tol);
        if inertia.n_zero != 0 || inertia.n_plus != inertia.n_minus {
            return Err(SturmError::Geometry(format!(
                "structure form must be nondegenerate of zero signature, got inertia ({}, {}, {})",
                inertia.n_plus, inertia.n_minus, inertia.n_zero
            )));
        }
        let se = h.clone().symmetric_eigen();
        let half = dim / 2;
        let mut plus = CMatrix::zeros(dim, half);
        let mut minus = CMatrix::zeros(dim, half);
        let (mut ip, mut im) = (0, 0);
        for (k, ev) in se.eigenvalues.iter().enumerate() {
            let col = se.eigenvectors.column(k).map(|z| z / Complex64::new(ev.abs().sqrt(), 0.0));
            if *ev > 0.0 {
                plus.set_column(ip, &col);
                ip += 1;
            } else {
                minus.set_column(im, &col);
                im += 1;
            }
        }
        Ok(Self { h, plus, minus })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn half_dim(&self) -> usize {
        self.dim() / 2
    }

    pub fn structure(&self) -> &CMatrix {
        &self.h
    }

    /// h[v] = <v, H v> (real by Hermitian symmetry).
    pub fn h_value(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.h * v)).re
    }

    /// Superlagrangian spanned by plus + minus * W for a unitary W; every
    /// superlagrangian arises this way.
    pub fn superlagrangian_from_unitary(&self, w: &CMatrix) -> SuperlagFrame {
        let raw = &self.plus + &self.minus * w;
        SuperlagFrame::orthonormalized(raw)
    }

    pub fn random_superlagrangian<R: Rng>(&self, rng: &mut R) -> SuperlagFrame {
        let n = self.half_dim();
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let w = g.qr().q();
        self.superlagrangian_from_unitary(&w)
    }
}

/// The standard structure on C^N + (C^N)*: h[(xi, eta)] = Im<xi, eta> under
/// the crate-wide antilinear-first inner product.
pub fn standard_space(n: usize, tol: &TolerancePolicy) -> SuperhermitianSpace {
    assert!(n >= 1);
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        h[(k, n + k)] = -I / 2.0;
        h[(n + k, k)] = I / 2.0;
    }
    SuperhermitianSpace::new(HermMatrix::new(h).expect("standard structure is Hermitian"), tol)
        .expect("standard structure has zero signature")
}

/// The doubled space (S + S, -h + h).
pub fn doubled_space(base: &SuperhermitianSpace, tol: &TolerancePolicy) -> SuperhermitianSpace {
    let d = base.dim();
    let mut h = CMatrix::zeros(2 * d, 2 * d);
    h.view_mut((0, 0), (d, d)).copy_from(&(-base.structure().clone()));
    h.view_mut((d, d), (d, d)).copy_from(base.structure());
    SuperhermitianSpace::new(HermMatrix::new(h).expect("doubled structure is Hermitian"), tol)
        .expect("doubled structure has zero signature")
}

/// Orthonormalized spanning frame of a half-dimensional h-isotropic subspace.
#[derive(Debug, Clone)]
pub struct SuperlagFrame {
    frame: CMatrix,
}

impl SuperlagFrame {
    /// QR-orthonormalizes a raw full-rank frame without isotropy checks.
    pub fn orthonormalized(raw: CMatrix) -> Self {
        let q = raw.qr().q();
        Self { frame: q }
    }

    /// Validates rank and the isotropy invariant against the ambient space.
    pub fn new(space: &SuperhermitianSpace, raw: CMatrix, tol: &TolerancePolicy) -> Result<Self> {
        assert_eq!(raw.nrows(), space.dim());
        assert_eq!(raw.ncols(), space.half_dim());
        let sv = raw.clone().svd(false, false).singular_values;
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().copied().fold(0.0f64, f64::max);
        if smin < tol.rank_rel_tol * smax.max(1.0) {
            return Err(SturmError::FrameRank { sigma: smin });
        }
        let f = Self::orthonormalized(raw);
        let report = is_superlagrangian(&f, space, tol);
        if !report.verdict {
            return Err(SturmError::Geometry(format!(
                "frame is not h-isotropic: residual {:.3e} above {:.3e}",
                report.residual, report.threshold
            )));
        }
        Ok(f)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.frame
    }

    pub fn half_dim(&self) -> usize {
        self.frame.ncols()
    }

    /// Graph of a matrix T over the first factor of a 2N-dimensional space,
    /// columns (e_k, T e_k).
    pub fn graph(t: &CMatrix) -> Self {
        let n = t.nrows();
        let mut raw = CMatrix::zeros(2 * n, n);
        raw.view_mut((0, 0), (n, n)).copy_from(&CMatrix::identity(n, n));
        raw.view_mut((n, 0), (n, n)).copy_from(t);
        Self::orthonormalized(raw)
    }

    /// Coordinates of an ambient vector lying in the span: c = F* v.
    pub fn coordinates(&self, v: &CVector) -> CVector {
        self.frame.adjoint() * v
    }
}

pub struct IsotropyReport {
    pub residual: f64,
    pub threshold: f64,
    pub verdict: bool,
}

/// Max entry of |F* H F| against the isotropy tolerance.
pub fn is_superlagrangian(
    frame: &SuperlagFrame,
    space: &SuperhermitianSpace,
    _tol: &TolerancePolicy,
) -> IsotropyReport {
    let f = frame.matrix();
    let residual = (f.adjoint() * space.structure() * f)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let hnorm = space.structure().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = ISOTROPY_TOL * hnorm.max(1e-300) * (frame.half_dim() as f64).max(1.0);
    IsotropyReport { residual, threshold, verdict: residual <= threshold }
}

/// Smallest singular value of the stacked matrix [F_P | F_P0]; zero exactly
/// when the subspaces intersect.
pub fn intersection_indicator(p: &SuperlagFrame, p0: &SuperlagFrame) -> f64 {
    let (rows, c1, c2) = (p.matrix().nrows(), p.matrix().ncols(), p0.matrix().ncols());
    let mut s = CMatrix::zeros(rows, c1 + c2);
    s.view_mut((0, 0), (rows, c1)).copy_from(p.matrix());
    s.view_mut((0, c1), (rows, c2)).copy_from(p0.matrix());
    let sv = s.svd(false, false).singular_values;
    sv.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Numerical intersection of two subspaces: dimension and an orthonormal
/// basis, from the SVD null space of [F_P | -F_P0].
pub fn intersection(
    p: &SuperlagFrame,
    p0: &SuperlagFrame,
    tol: &TolerancePolicy,
) -> (usize, Vec<CVector>) {
    let (rows, c1, c2) = (p.matrix().nrows(), p.matrix().ncols(), p0.matrix().ncols());
    let mut s = CMatrix::zeros(rows, c1 + c2);
    s.view_mut((0, 0), (rows, c1)).copy_from(p.matrix());
    s.view_mut((0, c1), (rows, c2)).copy_from(&(-p0.matrix().clone()));
    let svd = s.svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let thresh = tol.rank_rel_tol * smax.max(1.0);
    let vt = svd.v_t.expect("svd with right singular vectors");
    let mut raw: Vec<CVector> = Vec::new();
    for (idx, sig) in sv.iter().enumerate() {
        if *sig < thresh {
            let z: CVector = vt.row(idx).adjoint();
            let alpha = CVector::from_iterator(c1, (0..c1).map(|r| z[r]));
            raw.push(p.matrix() * alpha);
        }
    }
    if raw.is_empty() {
        return (0, raw);
    }
    // Orthonormalize the intersection representatives.
    let mut m = CMatrix::zeros(rows, raw.len());
    for (k, v) in raw.iter().enumerate() {
        m.set_column(k, v);
    }
    let q = m.qr().q();
    let basis = (0..raw.len()).map(|k| q.column(k).into_owned()).collect();
    (raw.len(), basis)
}

/// Chart matrix of P relative to the complementary pair (P0, P1): the
/// Hermitian matrix of the form v = (u, T_P u) -> h[jv] with j acting as the
/// identity on P0 and multiplication by i on P1, expressed in the
/// orthonormal-frame coordinates of P0.
pub fn chart(
    p: &SuperlagFrame,
    p0: &SuperlagFrame,
    p1: &SuperlagFrame,
    space: &SuperhermitianSpace,
) -> Result<HermMatrix> {
    let n = space.half_dim();
    let mut basis = CMatrix::zeros(2 * n, 2 * n);
    basis.view_mut((0, 0), (2 * n, n)).copy_from(p0.matrix());
    basis.view_mut((0, n), (2 * n, n)).copy_from(p1.matrix());
    let lu = basis.lu();
    let x = lu
        .solve(p.matrix())
        .ok_or_else(|| SturmError::Geometry("P0 and P1 are not complementary".into()))?;
    let c = x.view((0, 0), (n, n)).into_owned();
    let d = x.view((n, 0), (n, n)).into_owned();
    let c_svd = c.clone().svd(false, false).singular_values;
    let smin = c_svd.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = c_svd.iter().copied().fold(0.0f64, f64::max);
    if smin < 1e-10 * smax.max(1.0) {
        return Err(SturmError::ChartDomain { sigma: smin });
    }
    let t = &d * c.try_inverse().ok_or(SturmError::ChartDomain { sigma: smin })?;
    let g = p0.matrix().adjoint() * space.structure() * p1.matrix();
    let igt = (&g * &t) * I;
    let m = &igt + igt.adjoint();
    HermMatrix::new(m)
}

/// A continuous path of superlagrangians on [a, b].
pub struct SuperlagPath<'a> {
    pub a: f64,
    pub b: f64,
    pub eval: Box<dyn Fn(f64) -> Result<SuperlagFrame> + 'a>,
}

impl<'a> SuperlagPath<'a> {
    pub fn new(a: f64, b: f64, eval: impl Fn(f64) -> Result<SuperlagFrame> + 'a) -> Self {
        Self { a, b, eval: Box::new(eval) }
    }

    pub fn at(&self, t: f64) -> Result<SuperlagFrame> {
        (self.eval)(t)
    }
}

/// Picks a superlagrangian complementary to every frame in `avoid`,
/// maximizing the worst transversality margin over a few random draws.
pub fn complementary_superlagrangian<R: Rng>(
    space: &SuperhermitianSpace,
    avoid: &[&SuperlagFrame],
    rng: &mut R,
) -> Result<SuperlagFrame> {
    let mut best: Option<(f64, SuperlagFrame)> = None;
    for _ in 0..40 {
        let cand = space.random_superlagrangian(rng);
        let margin = avoid
            .iter()
            .map(|f| intersection_indicator(&cand, f))
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().map_or(true, |(b, _)| margin > *b) {
            best = Some((margin, cand));
        }
        if margin > 0.3 {
            break;
        }
    }
    let (margin, frame) = best.expect("at least one candidate drawn");
    if margin < 1e-3 {
        return Err(SturmError::Geometry(format!(
            "no complementary superlagrangian found (best margin {margin:.3e})"
        )));
    }
    Ok(frame)
}

/// Crossing form of a path at t0 by central differencing of the chart,
/// restricted to a basis of P(t0) and P0's intersection. The result is
/// Richardson-extrapolated from steps `step` and `step/2` and is independent
/// of the random complement P1 to the difference order.
pub fn crossing_form_numeric<R: Rng>(
    path: &SuperlagPath,
    p0: &SuperlagFrame,
    t0: f64,
    step: f64,
    space: &SuperhermitianSpace,
    tol: &TolerancePolicy,
    rng: &mut R,
    basis: Option<&[CVector]>,
) -> Result<HermMatrix> {
    let pt0 = path.at(t0)?;
    let owned_basis;
    let basis: &[CVector] = match basis {
        Some(b) => b,
        None => {
            let (dim, b) = intersection(&pt0, p0, tol);
            if dim == 0 {
                return Err(SturmError::Geometry(format!(
                    "no intersection with the reference plane at t0 = {t0}"
                )));
            }
            owned_basis = b;
            &owned_basis
        }
    };
    let p1 = complementary_superlagrangian(space, &[&pt0, p0], rng)?;
    let diff = |s: f64| -> Result<CMatrix> {
        let mp = chart(&path.at(t0 + s)?, p0, &p1, space)?;
        let mm = chart(&path.at(t0 - s)?, p0, &p1, space)?;
        Ok((mp.matrix() - mm.matrix()).map(|z| z / Complex64::new(2.0 * s, 0.0)))
    };
    let d1 = diff(step)?;
    let d2 = diff(0.5 * step)?;
    let dm = d2.map(|z| z * Complex64::new(4.0 / 3.0, 0.0)) - d1.map(|z| z / Complex64::new(3.0, 0.0));
    let k = basis.len();
    let mut out = CMatrix::zeros(k, k);
    for a in 0..k {
        let ca = p0.coordinates(&basis[a]);
        for b in 0..k {
            let cb = p0.coordinates(&basis[b]);
            out[(a, b)] = ca.dotc(&(&dm * &cb));
        }
    }
    HermMatrix::new((&out + out.adjoint()).scale(0.5))
}

/// One located crossing of a path with the singular variety S(P0).
#[derive(Debug, Clone)]
pub struct GeomCrossing {
    pub t0: f64,
    pub kernel_dim: usize,
    pub signature: i64,
}

/// EM-index of an admissible path: locates crossings by singular-value dips
/// of the stacked-frame indicator on a 512-point grid refined by
/// golden-section search, then sums crossing-form signatures.
pub fn em_index<R: Rng>(
    path: &SuperlagPath,
    p0: &SuperlagFrame,
    space: &SuperhermitianSpace,
    tol: &TolerancePolicy,
    rng: &mut R,
) -> Result<(i64, Vec<GeomCrossing>)> {
    let indicator = |t: f64| -> Result<f64> { Ok(intersection_indicator(&path.at(t)?, p0)) };
    let admis_thresh = 1e-6;
    if indicator(path.a)? < admis_thresh || indicator(path.b)? < admis_thresh {
        return Err(SturmError::Admissibility);
    }
    let ts = grid(path.a, path.b, 512);
    let vals: Vec<f64> = ts.iter().map(|t| indicator(*t)).collect::<Result<_>>()?;
    let scale = vals.iter().copied().fold(0.0f64, f64::max);
    let mut crossings = Vec::new();
    let mut total = 0i64;
    let span = path.b - path.a;
    for idx in local_minima_below(&vals, 0.5 * scale) {
        let (lo, hi) = (ts[idx - 1], ts[idx + 1]);
        let (t0, v0) = golden_section_min(
            |t| indicator(t).unwrap_or(f64::INFINITY),
            lo,
            hi,
            1e-12 * span.max(1.0),
        );
        if v0 > 1e-5 * scale.max(1.0) {
            continue; // near miss, not a crossing
        }
        let pt0 = path.at(t0)?;
        let (dim, basis) = intersection(&pt0, p0, tol);
        if dim == 0 {
            continue;
        }
        let gamma =
            crossing_form_numeric(path, p0, t0, 1e-4 * span, space, tol, rng, Some(&basis))?;
        let inertia = crate::hermitian::inertia(&gamma, tol);
        if inertia.n_zero > 0 {
            return Err(SturmError::NonRegularCrossing { lambda: t0 });
        }
        total += inertia.signature();
        crossings.push(GeomCrossing { t0, kernel_dim: dim, signature: inertia.signature() });
    }
    crossings.sort_by(|a, b| a.t0.total_cmp(&b.t0));
    Ok((total, crossings))
}
