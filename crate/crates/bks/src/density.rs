//! Order-alpha densities on finite-dimensional real vector spaces and the
//! canonical isomorphisms they inherit from exact sequences, culminating in
//! the two constructions of the BKS density on a clean intersection of
//! Lagrangian subspaces.
//!
//! A density of order alpha on an n-dimensional space is determined by its
//! value on one reference basis: on a tuple whose coordinate matrix is A the
//! value is `value * |det A|^alpha`. All constructions below reduce to
//! bookkeeping of such determinant factors; half-density values are carried
//! as complex scalars whose modulus is the nonnegative density magnitude.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Numerical rank/kernel tolerance for the double-precision path.
const EPS: f64 = 1e-10;

/// A finite-dimensional real vector space, identified by dimension plus an
/// opaque id so that distinct spaces of equal dimension stay distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceRef {
    pub dim: usize,
    pub id: u32,
}

impl SpaceRef {
    pub fn new(dim: usize, id: u32) -> Self {
        SpaceRef { dim, id }
    }
}

/// A density of order `order` on `space`, stored as its value on the
/// space's reference basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub space: SpaceRef,
    pub order: f64,
    pub value: Complex64,
}

/// A linear map between reference-based spaces, as a target_dim x source_dim
/// matrix.
#[derive(Debug, Clone)]
pub struct LinearMapMatrix {
    pub source: SpaceRef,
    pub target: SpaceRef,
    pub matrix: DMatrix<f64>,
}

impl LinearMapMatrix {
    pub fn new(source: SpaceRef, target: SpaceRef, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != target.dim || matrix.ncols() != source.dim {
            return Err(Error::Validation("linear map shape mismatch".into()));
        }
        Ok(LinearMapMatrix { source, target, matrix })
    }
}

/// A short exact sequence 0 -> U -i-> V -j-> W -> 0.
#[derive(Debug, Clone)]
pub struct ExactSequence {
    pub i: LinearMapMatrix,
    pub j: LinearMapMatrix,
}

impl ExactSequence {
    pub fn new(i: LinearMapMatrix, j: LinearMapMatrix) -> Result<Self> {
        if i.target != j.source {
            return Err(Error::Validation("exact sequence: middle spaces differ".into()));
        }
        let (nu, nv, nw) = (i.source.dim, i.target.dim, j.target.dim);
        if nv != nu + nw {
            return Err(Error::Validation("exact sequence: dim V != dim U + dim W".into()));
        }
        if rank(&i.matrix) != nu {
            return Err(Error::Validation("exact sequence: i is not injective".into()));
        }
        if rank(&j.matrix) != nw {
            return Err(Error::Validation("exact sequence: j is not surjective".into()));
        }
        let comp = &j.matrix * &i.matrix;
        if comp.iter().any(|x| x.abs() > 1e-8) {
            return Err(Error::Validation("exact sequence: j o i != 0".into()));
        }
        Ok(ExactSequence { i, j })
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone().svd(false, false).rank(1e-8)
}

/// Orthonormal basis of the column space of `m` (as matrix columns).
fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let gram = m * m.transpose();
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > EPS {
            cols.push(eig.eigenvectors.column(idx).into_owned());
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols)
}

/// Orthonormal basis of the kernel of `m`.
fn kernel(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let gram = m.transpose() * m;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev.abs() < EPS {
            cols.push(eig.eigenvectors.column(idx).into_owned());
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols)
}

fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    m.clone()
        .svd(true, true)
        .pseudo_inverse(EPS)
        .expect("svd pseudo-inverse")
}

/// Evaluate a density on a tuple given by its coordinate matrix in the
/// reference basis: `value * |det A|^alpha`.
pub fn eval_density(d: &DensityValue, tuple: &DMatrix<f64>) -> Result<Complex64> {
    if tuple.nrows() != d.space.dim || tuple.ncols() != d.space.dim {
        return Err(Error::Validation("eval_density: tuple shape mismatch".into()));
    }
    let det = if d.space.dim == 0 { 1.0 } else { tuple.determinant() };
    Ok(d.value * det.abs().powf(d.order))
}

/// Pointwise product of two half-densities on the same space; an order-1
/// density.
pub fn product_density(d1: &DensityValue, d2: &DensityValue) -> Result<DensityValue> {
    if d1.space != d2.space {
        return Err(Error::Validation("product_density: space mismatch".into()));
    }
    Ok(DensityValue {
        space: d1.space,
        order: d1.order + d2.order,
        value: d1.value * d2.value,
    })
}

/// Pull back a density on the target along an isomorphism phi:
/// `phi*(rho)(v...) = rho(phi v ...)`.
pub fn pullback(phi: &LinearMapMatrix, d: &DensityValue) -> Result<DensityValue> {
    if phi.target != d.space || phi.source.dim != phi.target.dim {
        return Err(Error::Validation("pullback: not an endpoint-compatible square map".into()));
    }
    let det = if phi.matrix.nrows() == 0 { 1.0 } else { phi.matrix.determinant() };
    if det.abs() < EPS {
        return Err(Error::Validation("pullback: singular map".into()));
    }
    Ok(DensityValue {
        space: phi.source,
        order: d.order,
        value: d.value * det.abs().powf(d.order),
    })
}

/// The canonical isomorphism |U|^{1/2} x |W|^{1/2} -> |V|^{1/2} induced by a
/// short exact sequence, computed with an explicitly supplied complement
/// `wprime` of ker(j) in V (columns spanning the complement).
///
/// Recipe: assemble the basis {i(u_p), (j|_{W'})^{-1}(w_q)} of V from the
/// reference bases of U and W; the result is the half-density on V whose
/// value on that assembled basis equals dU.value * dW.value. The output is
/// independent of the choice of complement.
pub fn seq_iso_with_complement(
    seq: &ExactSequence,
    du: &DensityValue,
    dw: &DensityValue,
    wprime: &DMatrix<f64>,
) -> Result<DensityValue> {
    let (nu, nv, nw) = (seq.i.source.dim, seq.i.target.dim, seq.j.target.dim);
    if du.space != seq.i.source || dw.space != seq.j.target {
        return Err(Error::Validation("seq_iso: density spaces do not match sequence".into()));
    }
    if wprime.nrows() != nv || wprime.ncols() != nw {
        return Err(Error::Validation("seq_iso: complement has wrong shape".into()));
    }
    // j restricted to W' must be invertible onto W.
    let j_on_wprime = &seq.j.matrix * wprime;
    let lift = if nw == 0 {
        DMatrix::zeros(nv, 0)
    } else {
        let inv = j_on_wprime
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Validation("seq_iso: W' is not a complement of ker j".into()))?;
        wprime * inv
    };
    // Assembled basis of V, columns = {i(u_p)} then {(j|W')^{-1}(w_q)}.
    let mut basis = DMatrix::zeros(nv, nv);
    basis.view_mut((0, 0), (nv, nu)).copy_from(&seq.i.matrix);
    basis.view_mut((0, nu), (nv, nw)).copy_from(&lift);
    let det = if nv == 0 { 1.0 } else { basis.determinant() };
    if det.abs() < EPS {
        return Err(Error::Check("seq_iso: assembled basis is degenerate".into()));
    }
    // rho_V(assembled) = a*b, so on the reference basis the value divides by
    // |det|^{1/2}.
    Ok(DensityValue {
        space: seq.i.target,
        order: 0.5,
        value: du.value * dw.value / det.abs().sqrt(),
    })
}

/// [`seq_iso_with_complement`] with the default choice: the orthogonal
/// complement of ker(j).
pub fn seq_iso(seq: &ExactSequence, du: &DensityValue, dw: &DensityValue) -> Result<DensityValue> {
    let ker = kernel(&seq.j.matrix);
    let nv = seq.i.target.dim;
    // Orthogonal complement of the kernel: kernel of ker^T.
    let compl = if ker.ncols() == 0 {
        DMatrix::identity(nv, nv)
    } else {
        kernel(&ker.transpose())
    };
    seq_iso_with_complement(seq, du, dw, &compl)
}

/// Verify the scaling lemma: two exact sequences with the same end spaces
/// related by an automorphism k of V (k o i = i', j' o k = j) induce
/// isomorphisms with theta = |det k|^{1/2} theta'. Returns (theta value,
/// theta' value, ratio) on a probe pair of unit half-densities.
pub fn scaling_check(
    seq: &ExactSequence,
    seq2: &ExactSequence,
    k: &DMatrix<f64>,
) -> Result<(Complex64, Complex64, f64)> {
    if seq.i.source != seq2.i.source || seq.j.target != seq2.j.target || seq.i.target != seq2.i.target
    {
        return Err(Error::Validation("scaling_check: sequences do not share end spaces".into()));
    }
    let ki = k * &seq.i.matrix;
    let jk = &seq2.j.matrix * k;
    let commutes = ki
        .iter()
        .zip(seq2.i.matrix.iter())
        .all(|(a, b)| (a - b).abs() < 1e-8)
        && jk.iter().zip(seq.j.matrix.iter()).all(|(a, b)| (a - b).abs() < 1e-8);
    if !commutes {
        return Err(Error::Validation("scaling_check: diagram does not commute".into()));
    }
    let du = DensityValue { space: seq.i.source, order: 0.5, value: Complex64::new(1.0, 0.0) };
    let dw = DensityValue { space: seq.j.target, order: 0.5, value: Complex64::new(1.0, 0.0) };
    let theta = seq_iso(seq, &du, &dw)?.value;
    let theta2 = seq_iso(seq2, &du, &dw)?.value;
    Ok((theta, theta2, (theta / theta2).norm()))
}

/// Verify the direct-sum lemma: the square
/// zeta o (theta x theta') = theta'' o tau commutes, where theta'' is the
/// isomorphism of the direct-sum sequence. Returns (pass, max deviation).
pub fn direct_sum_check(
    seq: &ExactSequence,
    seq2: &ExactSequence,
    probes: &[(Complex64, Complex64, Complex64, Complex64)],
    tol: f64,
) -> Result<(bool, f64)> {
    // Direct-sum sequence with block-diagonal maps; fresh space ids.
    let (nu, nv, nw) = (seq.i.source.dim, seq.i.target.dim, seq.j.target.dim);
    let (nu2, nv2, nw2) = (seq2.i.source.dim, seq2.i.target.dim, seq2.j.target.dim);
    let usum = SpaceRef::new(nu + nu2, 9001);
    let vsum = SpaceRef::new(nv + nv2, 9002);
    let wsum = SpaceRef::new(nw + nw2, 9003);
    let mut i_sum = DMatrix::zeros(nv + nv2, nu + nu2);
    i_sum.view_mut((0, 0), (nv, nu)).copy_from(&seq.i.matrix);
    i_sum.view_mut((nv, nu), (nv2, nu2)).copy_from(&seq2.i.matrix);
    let mut j_sum = DMatrix::zeros(nw + nw2, nv + nv2);
    j_sum.view_mut((0, 0), (nw, nv)).copy_from(&seq.j.matrix);
    j_sum.view_mut((nw, nv), (nw2, nv2)).copy_from(&seq2.j.matrix);
    let sum_seq = ExactSequence::new(
        LinearMapMatrix::new(usum, vsum, i_sum)?,
        LinearMapMatrix::new(vsum, wsum, j_sum)?,
    )?;

    let mut max_dev: f64 = 0.0;
    for &(a, b, a2, b2) in probes {
        let du = DensityValue { space: seq.i.source, order: 0.5, value: a };
        let dw = DensityValue { space: seq.j.target, order: 0.5, value: b };
        let du2 = DensityValue { space: seq2.i.source, order: 0.5, value: a2 };
        let dw2 = DensityValue { space: seq2.j.target, order: 0.5, value: b2 };
        // Route 1: zeta o (theta x theta'). The canonical iso
        // |V|^{1/2} x |V'|^{1/2} -> |V + V'|^{1/2} multiplies values on the
        // stacked reference basis (block determinant 1).
        let lhs = seq_iso(seq, &du, &dw)?.value * seq_iso(seq2, &du2, &dw2)?.value;
        // Route 2: theta'' o tau, with xi and eta the same stacking isos.
        let du_sum = DensityValue { space: usum, order: 0.5, value: a * a2 };
        let dw_sum = DensityValue { space: wsum, order: 0.5, value: b * b2 };
        let rhs = seq_iso(&sum_seq, &du_sum, &dw_sum)?.value;
        let dev = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300);
        max_dev = max_dev.max(dev);
    }
    Ok((max_dev <= tol, max_dev))
}

/// Pfaffian of a skew-symmetric matrix by recursive first-row expansion.
/// Intended for the small dimensions that occur in the quotient step.
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "pfaffian: square matrix required");
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    if n == 2 {
        return m[(0, 1)];
    }
    let mut acc = 0.0;
    for j in 1..n {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let keep: Vec<usize> = (1..n).filter(|&t| t != j).collect();
        let sub = DMatrix::from_fn(n - 2, n - 2, |a, b| m[(keep[a], keep[b])]);
        acc += sign * m[(0, j)] * pfaffian(&sub);
    }
    acc
}

/// Result of a BKS density construction: the stated basis of the
/// intersection and the scalar factor that carries the input half-density
/// values a, b to the output density value `a * b * factor` on that basis.
#[derive(Debug, Clone)]
pub struct BksDensity {
    pub intersection_basis: DMatrix<f64>,
    pub factor: f64,
}

/// Shared geometry of a clean Lagrangian pair: intersection basis K (as
/// ambient columns) and an orthonormal complement C of K inside L1 + L2.
struct PairGeometry {
    k_basis: DMatrix<f64>,
    c_basis: DMatrix<f64>,
}

fn validate_lagrangian(omega: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<()> {
    let two_n = omega.nrows();
    if two_n % 2 != 0 || omega.ncols() != two_n {
        return Err(Error::Validation("ambient dimension must be even".into()));
    }
    let skew = omega + omega.transpose();
    if skew.iter().any(|x| x.abs() > 1e-8) {
        return Err(Error::Validation("omega is not skew-symmetric".into()));
    }
    if omega.clone().determinant().abs() < EPS {
        return Err(Error::Validation("omega is degenerate".into()));
    }
    if l.nrows() != two_n || l.ncols() != two_n / 2 || rank(l) != two_n / 2 {
        return Err(Error::Validation("Lagrangian basis has wrong shape or rank".into()));
    }
    let iso = l.transpose() * omega * l;
    if iso.iter().any(|x| x.abs() > 1e-7) {
        return Err(Error::Validation("subspace is not isotropic".into()));
    }
    Ok(())
}

fn pair_geometry(l1: &DMatrix<f64>, l2: &DMatrix<f64>) -> PairGeometry {
    let two_n = l1.nrows();
    let n = l1.ncols();
    // Intersection: kernel of [l1 | -l2]; K columns are l1 * (top half).
    let mut stacked = DMatrix::zeros(two_n, 2 * n);
    stacked.view_mut((0, 0), (two_n, n)).copy_from(l1);
    stacked.view_mut((0, n), (two_n, n)).copy_from(&(-l2.clone()));
    let ker = kernel(&stacked);
    let k_raw = l1 * ker.view((0, 0), (n, ker.ncols()));
    let k_basis = column_space(&k_raw);
    // Sum S = col([l1 l2]); C = orthogonal complement of K inside S.
    let mut both = DMatrix::zeros(two_n, 2 * n);
    both.view_mut((0, 0), (two_n, n)).copy_from(l1);
    both.view_mut((0, n), (two_n, n)).copy_from(l2);
    let s_basis = column_space(&both);
    let projected = if k_basis.ncols() == 0 {
        s_basis
    } else {
        &s_basis - &k_basis * (k_basis.transpose() * &s_basis)
    };
    let c_basis = column_space(&projected);
    PairGeometry { k_basis, c_basis }
}

/// The reduced symplectic form on the quotient (L1+L2)/K, evaluated on the
/// classes of the C-basis columns; its |Pf|^{1/2} is the canonical
/// half-density of the quotient symplectic structure.
fn quotient_pfaffian(omega: &DMatrix<f64>, c_basis: &DMatrix<f64>) -> f64 {
    let bar = c_basis.transpose() * omega * c_basis;
    pfaffian(&bar)
}

/// The canonical BKS map |L1|^{1/2} x |L2|^{1/2} -> |L1 n L2|, assembled
/// from the two exact sequences
/// 0 -> K -> L1 (+) L2 -> L1 + L2 -> 0  (gamma: v -> (v,v); delta: (v1,v2) -> v1 - v2)
/// 0 -> K -> L1 + L2 -> Q -> 0
/// and the symplectic trivialization |Q|^{1/2} ~ C by |Pf|^{1/2}.
pub fn bks_density_phi(
    omega: &DMatrix<f64>,
    l1: &DMatrix<f64>,
    l2: &DMatrix<f64>,
) -> Result<BksDensity> {
    validate_lagrangian(omega, l1)?;
    validate_lagrangian(omega, l2)?;
    let n = l1.ncols();
    let geo = pair_geometry(l1, l2);
    let d = geo.k_basis.ncols();
    let q_dim = geo.c_basis.ncols();

    // Coordinates on L1 (+) L2 are (x, y) with x, y coordinates in the given
    // l1, l2 bases. gamma sends the K basis to (coords in l1, coords in l2).
    let l1_pinv = pseudo_inverse(l1);
    let l2_pinv = pseudo_inverse(l2);
    let gamma_cols_top = &l1_pinv * &geo.k_basis;
    let gamma_cols_bot = &l2_pinv * &geo.k_basis;

    // delta in coordinates: (x, y) -> coords of l1 x - l2 y in the S basis
    // [K | C]. Lifts of the S reference basis are taken in the orthogonal
    // complement of ker(delta) via the pseudo-inverse.
    let mut s_full = DMatrix::zeros(l1.nrows(), d + q_dim);
    s_full.view_mut((0, 0), (l1.nrows(), d)).copy_from(&geo.k_basis);
    s_full
        .view_mut((0, d), (l1.nrows(), q_dim))
        .copy_from(&geo.c_basis);
    let s_pinv = pseudo_inverse(&s_full);
    let mut delta = DMatrix::zeros(d + q_dim, 2 * n);
    delta
        .view_mut((0, 0), (d + q_dim, n))
        .copy_from(&(&s_pinv * l1));
    delta
        .view_mut((0, n), (d + q_dim, n))
        .copy_from(&(-(&s_pinv * l2)));
    let lifts = pseudo_inverse(&delta); // (2n) x (d + q_dim)

    // Assembled basis M1 of L1 (+) L2: {gamma(K)} then {lift(S ref basis)}.
    // rho_{12}(M1) = a * b * |det M1|^{1/2} = rho_K(ref) * rho_S(ref); with
    // the split normalized by rho_K = 1 the S half-density inherits the
    // whole factor. The second sequence contributes no determinant (its
    // assembled basis is the identity in [K | C] coordinates), so the
    // quotient half-density keeps the same value and the trivialization
    // divides by |Pf|^{1/2}.
    let mut m1 = DMatrix::zeros(2 * n, 2 * n);
    m1.view_mut((0, 0), (n, d)).copy_from(&gamma_cols_top);
    m1.view_mut((n, 0), (n, d)).copy_from(&gamma_cols_bot);
    m1.view_mut((0, d), (2 * n, d + q_dim)).copy_from(&lifts);
    let det_m1 = if 2 * n == 0 { 1.0 } else { m1.determinant() };
    if det_m1.abs() < EPS {
        return Err(Error::Check("bks_density_phi: degenerate assembled basis".into()));
    }
    let pf = quotient_pfaffian(omega, &geo.c_basis);
    if q_dim > 0 && pf.abs() < EPS {
        return Err(Error::Check("bks_density_phi: degenerate quotient form".into()));
    }
    Ok(BksDensity {
        intersection_basis: geo.k_basis,
        factor: det_m1.abs().sqrt() / pf.abs().sqrt(),
    })
}

/// The split route: decompose L1 = K (+) V1 and L2 = K (+) V2 with chosen
/// complements, use that (v1, v2) -> [v1 - v2] identifies V1 (+) V2 with the
/// quotient, and multiply the two K-factors.
pub fn bks_density_phi_split(
    omega: &DMatrix<f64>,
    l1: &DMatrix<f64>,
    l2: &DMatrix<f64>,
    v1: &DMatrix<f64>,
    v2: &DMatrix<f64>,
) -> Result<BksDensity> {
    validate_lagrangian(omega, l1)?;
    validate_lagrangian(omega, l2)?;
    let n = l1.ncols();
    let geo = pair_geometry(l1, l2);
    let d = geo.k_basis.ncols();
    let q_dim = geo.c_basis.ncols();
    if v1.ncols() != n - d || v2.ncols() != n - d {
        return Err(Error::Validation("complement dimensions do not match intersection".into()));
    }
    // V1 must complement K inside L1 (and V2 inside L2): [K | V1] spans L1.
    let check_complement = |l: &DMatrix<f64>, v: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let mut kv = DMatrix::zeros(l.nrows(), d + v.ncols());
        kv.view_mut((0, 0), (l.nrows(), d)).copy_from(&geo.k_basis);
        kv.view_mut((0, d), (l.nrows(), v.ncols())).copy_from(v);
        let t = pseudo_inverse(l) * &kv;
        let resid = l * &t - &kv;
        if resid.iter().any(|x| x.abs() > 1e-7) || t.clone().determinant().abs() < EPS {
            return Err(Error::Validation("complement is not a complement inside its Lagrangian".into()));
        }
        Ok(t)
    };
    let t1 = check_complement(l1, v1)?;
    let t2 = check_complement(l2, v2)?;
    // V1 and V2 intersect trivially.
    let mut v12 = DMatrix::zeros(l1.nrows(), 2 * (n - d));
    v12.view_mut((0, 0), (l1.nrows(), n - d)).copy_from(v1);
    v12.view_mut((0, n - d), (l1.nrows(), n - d)).copy_from(v2);
    if rank(&v12) != 2 * (n - d) {
        return Err(Error::Validation("V1 and V2 intersect nontrivially".into()));
    }
    if 2 * (n - d) != q_dim {
        return Err(Error::Check("quotient dimension mismatch".into()));
    }

    // (beta o delta)|_{V1 (+) V2}: (v1, v2) -> class(v1 - v2), expressed in
    // the C-basis coordinates of the quotient.
    let mut s_full = DMatrix::zeros(l1.nrows(), d + q_dim);
    s_full.view_mut((0, 0), (l1.nrows(), d)).copy_from(&geo.k_basis);
    s_full
        .view_mut((0, d), (l1.nrows(), q_dim))
        .copy_from(&geo.c_basis);
    let s_pinv = pseudo_inverse(&s_full);
    let mut images = DMatrix::zeros(l1.nrows(), q_dim);
    images.view_mut((0, 0), (l1.nrows(), n - d)).copy_from(v1);
    images
        .view_mut((0, n - d), (l1.nrows(), n - d))
        .copy_from(&(-v2.clone()));
    let f = (&s_pinv * &images).view((d, 0), (q_dim, q_dim)).into_owned();
    let det_f = if q_dim == 0 { 1.0 } else { f.determinant() };
    if det_f.abs() < EPS {
        return Err(Error::Check("split route: quotient identification degenerate".into()));
    }
    let pf = quotient_pfaffian(omega, &geo.c_basis);
    if q_dim > 0 && pf.abs() < EPS {
        return Err(Error::Check("split route: degenerate quotient form".into()));
    }
    // rho_1([K | V1]) = a |det T1|^{1/2} = rho_K * rho_{V1}; same for rho_2.
    // rho_Q = rho_{V1} rho_{V2} / |det F|^{1/2}; output = rho_Q / |Pf|^{1/2}.
    Ok(BksDensity {
        intersection_basis: geo.k_basis,
        factor: (t1.determinant().abs() * t2.determinant().abs()).sqrt()
            / (det_f.abs().sqrt() * pf.abs().sqrt()),
    })
}

/// A randomly generated clean pair of Lagrangians with chosen complements,
/// produced from a standard symplectic basis so cleanness holds by
/// construction.
#[derive(Debug, Clone)]
pub struct CleanConfig {
    pub omega: DMatrix<f64>,
    pub l1: DMatrix<f64>,
    pub l2: DMatrix<f64>,
    pub v1: DMatrix<f64>,
    pub v2: DMatrix<f64>,
    pub n_half: usize,
    pub dim_intersection: usize,
}

fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0f64..1.0));
        if m.determinant().abs() > 0.2 {
            return m;
        }
    }
}

/// Standard symplectic form on basis (e_1..e_N, f_1..f_N).
pub fn standard_omega(n_half: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_half, 2 * n_half);
    for i in 0..n_half {
        omega[(i, n_half + i)] = 1.0;
        omega[(n_half + i, i)] = -1.0;
    }
    omega
}

/// Build a clean configuration: intersection span(e_1..e_d), L1 extended by
/// span(e_{d+1}..e_N), L2 by span(f_{d+1}..f_N); then move everything by a
/// random symplectic map and randomize the stated bases.
pub fn random_clean_config<R: Rng>(rng: &mut R, n_half: usize, d: usize) -> CleanConfig {
    assert!(d <= n_half);
    let two_n = 2 * n_half;
    let omega = standard_omega(n_half);
    // Random symplectic map: products of [[A,0],[0,A^-T]] and shears
    // [[I,B],[0,I]], [[I,0],[C,I]] with B, C symmetric.
    let a = random_invertible(rng, n_half);
    let a_inv_t = a.clone().lu().try_inverse().expect("invertible").transpose();
    let mut sp = DMatrix::zeros(two_n, two_n);
    sp.view_mut((0, 0), (n_half, n_half)).copy_from(&a);
    sp.view_mut((n_half, n_half), (n_half, n_half)).copy_from(&a_inv_t);
    let mut b = DMatrix::from_fn(n_half, n_half, |_, _| rng.random_range(-0.5..0.5));
    b = (&b + b.transpose()) * 0.5;
    let mut shear = DMatrix::identity(two_n, two_n);
    shear.view_mut((0, n_half), (n_half, n_half)).copy_from(&b);
    let mut c = DMatrix::from_fn(n_half, n_half, |_, _| rng.random_range(-0.5..0.5));
    c = (&c + c.transpose()) * 0.5;
    let mut shear2 = DMatrix::identity(two_n, two_n);
    shear2.view_mut((n_half, 0), (n_half, n_half)).copy_from(&c);
    let sympl = &sp * &shear * &shear2;

    let col = |i: usize| -> DVector<f64> {
        let mut v = DVector::zeros(two_n);
        v[i] = 1.0;
        v
    };
    let take = |idx: Vec<usize>| -> DMatrix<f64> {
        if idx.is_empty() {
            return DMatrix::zeros(two_n, 0);
        }
        let cols: Vec<DVector<f64>> = idx.iter().map(|&i| &sympl * col(i)).collect();
        DMatrix::from_fn(two_n, cols.len(), |r, c| cols[c][r])
    };
    let k = take((0..d).collect());
    let v1_raw = take((d..n_half).collect());
    let v2_raw = take((d..n_half).map(|i| n_half + i).collect());
    // Randomize complement bases and the stated Lagrangian bases.
    let v1 = &v1_raw * random_invertible(rng, n_half - d);
    let v2 = &v2_raw * random_invertible(rng, n_half - d);
    let mut assemble = |v: &DMatrix<f64>| -> DMatrix<f64> {
        let mut l = DMatrix::zeros(two_n, n_half);
        l.view_mut((0, 0), (two_n, d)).copy_from(&k);
        l.view_mut((0, d), (two_n, n_half - d)).copy_from(v);
        &l * random_invertible(rng, n_half)
    };
    let l1 = assemble(&v1);
    let l2 = assemble(&v2);
    CleanConfig {
        omega,
        l1,
        l2,
        v1,
        v2,
        n_half,
        dim_intersection: d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn unit(space: SpaceRef, v: f64) -> DensityValue {
        DensityValue { space, order: 0.5, value: c(v) }
    }

    #[test]
    fn eval_density_examples() {
        let s = SpaceRef::new(2, 0);
        let d1 = DensityValue { space: s, order: 1.0, value: c(1.0) };
        assert_eq!(eval_density(&d1, &DMatrix::identity(2, 2)).unwrap(), c(1.0));
        let half = DensityValue { space: s, order: 0.5, value: c(1.0) };
        let t = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!((eval_density(&half, &t).unwrap() - c(2.0)).norm() < 1e-12);
        let neg = DMatrix::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, 1.0]);
        let dc = DensityValue { space: s, order: 1.0, value: c(0.5) };
        assert!((eval_density(&dc, &neg).unwrap() - c(1.5)).norm() < 1e-12);
        assert!(eval_density(&dc, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn product_and_pullback() {
        let s = SpaceRef::new(3, 0);
        let d1 = unit(s, 2.0);
        let d2 = unit(s, 3.0);
        let p = product_density(&d1, &d2).unwrap();
        assert_eq!(p.order, 1.0);
        assert_eq!(p.value, c(6.0));
        // product evaluates multiplicatively
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let lhs = eval_density(&p, &t).unwrap();
            let rhs = eval_density(&d1, &t).unwrap() * eval_density(&d2, &t).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
        }
        // pullback along 2*identity on dim 3, order 1
        let s2 = SpaceRef::new(3, 1);
        let phi = LinearMapMatrix::new(s2, s, DMatrix::identity(3, 3) * 2.0).unwrap();
        let dv = DensityValue { space: s, order: 1.0, value: c(1.0) };
        let back = pullback(&phi, &dv).unwrap();
        assert!((back.value - c(8.0)).norm() < 1e-12);
        // functoriality: pullback(psi, pullback(phi, d)) = pullback(phi o psi, d)
        let s3 = SpaceRef::new(3, 2);
        for _ in 0..20 {
            let m1 = random_invertible(&mut rng, 3);
            let m2 = random_invertible(&mut rng, 3);
            let phi = LinearMapMatrix::new(s2, s, m1.clone()).unwrap();
            let psi = LinearMapMatrix::new(s3, s2, m2.clone()).unwrap();
            let one = pullback(&psi, &pullback(&phi, &dv).unwrap()).unwrap();
            let comp = LinearMapMatrix::new(s3, s, &m1 * &m2).unwrap();
            let two = pullback(&comp, &dv).unwrap();
            assert!((one.value - two.value).norm() < 1e-9 * two.value.norm());
        }
    }

    fn random_exact_sequence<R: Rng>(
        rng: &mut R,
        nu: usize,
        nw: usize,
        ids: (u32, u32, u32),
    ) -> ExactSequence {
        let nv = nu + nw;
        let u = SpaceRef::new(nu, ids.0);
        let v = SpaceRef::new(nv, ids.1);
        let w = SpaceRef::new(nw, ids.2);
        // i = first nu columns of a random automorphism; j kills exactly im(i).
        let auto = random_invertible(rng, nv);
        let i_mat = auto.view((0, 0), (nv, nu)).into_owned();
        let auto_inv = auto.clone().lu().try_inverse().unwrap();
        let j_mat = auto_inv.view((nu, 0), (nw, nv)).into_owned();
        ExactSequence::new(
            LinearMapMatrix::new(u, v, i_mat).unwrap(),
            LinearMapMatrix::new(v, w, j_mat).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn seq_iso_block_case_and_degenerate_ends() {
        // V = U (+) W with block maps: value multiplies.
        let u = SpaceRef::new(2, 0);
        let v = SpaceRef::new(3, 1);
        let w = SpaceRef::new(1, 2);
        let mut i_mat = DMatrix::zeros(3, 2);
        i_mat[(0, 0)] = 1.0;
        i_mat[(1, 1)] = 1.0;
        let mut j_mat = DMatrix::zeros(1, 3);
        j_mat[(0, 2)] = 1.0;
        let seq = ExactSequence::new(
            LinearMapMatrix::new(u, v, i_mat).unwrap(),
            LinearMapMatrix::new(v, w, j_mat).unwrap(),
        )
        .unwrap();
        let out = seq_iso(&seq, &unit(u, 2.0), &unit(w, 3.0)).unwrap();
        assert!((out.value - c(6.0)).norm() < 1e-12);

        // U = V, W = 0: identity.
        let seq0 = ExactSequence::new(
            LinearMapMatrix::new(u, SpaceRef::new(2, 5), DMatrix::identity(2, 2)).unwrap(),
            LinearMapMatrix::new(SpaceRef::new(2, 5), SpaceRef::new(0, 6), DMatrix::zeros(0, 2))
                .unwrap(),
        )
        .unwrap();
        let out0 = seq_iso(&seq0, &unit(u, 5.0), &unit(SpaceRef::new(0, 6), 1.0)).unwrap();
        assert!((out0.value - c(5.0)).norm() < 1e-12);
    }

    #[test]
    fn seq_iso_independent_of_complement_choice() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let nu = 2 + (trial % 3);
            let nw = 1 + (trial % 2);
            let seq = random_exact_sequence(&mut rng, nu, nw, (0, 1, 2));
            let du = unit(seq.i.source, rng.random_range(0.5..2.0));
            let dw = unit(seq.j.target, rng.random_range(0.5..2.0));
            let reference = seq_iso(&seq, &du, &dw).unwrap().value;
            let nv = seq.i.target.dim;
            for _ in 0..3 {
                // Random complement: kernel basis + random multiple shifts.
                let ker = kernel(&seq.j.matrix);
                let mut wp = DMatrix::from_fn(nv, nw, |_, _| rng.random_range(-1.0..1.0));
                wp += &ker * DMatrix::from_fn(ker.ncols(), nw, |_, _| rng.random_range(-1.0..1.0));
                let got = match seq_iso_with_complement(&seq, &du, &dw, &wp) {
                    Ok(d) => d.value,
                    Err(_) => continue, // random wp failed to be a complement
                };
                assert!(
                    (got - reference).norm() < 1e-9 * reference.norm(),
                    "complement dependence detected"
                );
            }
        }
    }

    #[test]
    fn scaling_lemma() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let seq = random_exact_sequence(&mut rng, 2, 2, (0, 1, 2));
            let nv = seq.i.target.dim;
            let k = random_invertible(&mut rng, nv);
            // Second sequence: i' = k i, j' = j k^{-1}.
            let k_inv = k.clone().lu().try_inverse().unwrap();
            let seq2 = ExactSequence::new(
                LinearMapMatrix::new(seq.i.source, seq.i.target, &k * &seq.i.matrix).unwrap(),
                LinearMapMatrix::new(seq.i.target, seq.j.target, &seq.j.matrix * &k_inv).unwrap(),
            )
            .unwrap();
            let (_, _, ratio) = scaling_check(&seq, &seq2, &k).unwrap();
            let expected = k.determinant().abs().sqrt();
            assert!((ratio - expected).abs() < 1e-9 * expected);
        }
        // identity k gives ratio 1
        let seq = random_exact_sequence(&mut rng, 1, 2, (0, 1, 2));
        let (_, _, ratio) = scaling_check(&seq, &seq.clone(), &DMatrix::identity(3, 3)).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direct_sum_lemma() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let seq = random_exact_sequence(&mut rng, 2, 1, (0, 1, 2));
            let seq2 = random_exact_sequence(&mut rng, 1, 2, (3, 4, 5));
            let probes = vec![(c(1.0), c(1.0), c(1.0), c(1.0)), (c(2.0), c(0.5), c(3.0), c(1.5))];
            let (pass, dev) = direct_sum_check(&seq, &seq2, &probes, 1e-9).unwrap();
            assert!(pass, "direct-sum deviation {dev}");
        }
    }

    #[test]
    fn pfaffian_small_cases() {
        assert_eq!(pfaffian(&DMatrix::zeros(0, 0)), 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        assert_eq!(pfaffian(&m), 3.0);
        // Pf^2 = det for a random 4x4 skew matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
            let skew = &a - a.transpose();
            let pf = pfaffian(&skew);
            assert!((pf * pf - skew.determinant()).abs() < 1e-9);
        }
    }

    #[test]
    fn bks_phi_coincident_and_transverse() {
        // L1 = L2: factor 1 on the stated basis (pure product iso).
        let omega = standard_omega(2);
        let mut l = DMatrix::zeros(4, 2);
        l[(0, 0)] = 1.0;
        l[(1, 1)] = 1.0;
        let out = bks_density_phi(&omega, &l, &l).unwrap();
        assert_eq!(out.intersection_basis.ncols(), 2);
        // Transformation to the stated basis must make the result basis
        // independent; compare against the split route with empty complements.
        let split = bks_density_phi_split(&omega, &l, &l, &DMatrix::zeros(4, 0), &DMatrix::zeros(4, 0))
            .unwrap();
        assert!((out.factor - split.factor).abs() < 1e-9 * split.factor);

        // Transverse in 2N = 2: Omega(e, f) = 1, factor 1.
        let omega2 = standard_omega(1);
        let e = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let f = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let out = bks_density_phi(&omega2, &e, &f).unwrap();
        assert_eq!(out.intersection_basis.ncols(), 0);
        assert!((out.factor - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_lagrangian_inputs_rejected() {
        let omega = standard_omega(2);
        // Not isotropic: span(e1, f1).
        let mut bad = DMatrix::zeros(4, 2);
        bad[(0, 0)] = 1.0;
        bad[(2, 1)] = 1.0;
        let mut good = DMatrix::zeros(4, 2);
        good[(0, 0)] = 1.0;
        good[(1, 1)] = 1.0;
        assert!(bks_density_phi(&omega, &bad, &good).is_err());
        assert!(bks_density_phi(&DMatrix::zeros(4, 4), &good, &good).is_err());
    }

    #[test]
    fn phi_equals_split_phi_on_random_clean_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..60 {
            let n_half = 1 + trial % 4; // 2N <= 8
            let d = trial % (n_half + 1);
            let cfg = random_clean_config(&mut rng, n_half, d);
            let a = bks_density_phi(&cfg.omega, &cfg.l1, &cfg.l2).unwrap();
            let b = bks_density_phi_split(&cfg.omega, &cfg.l1, &cfg.l2, &cfg.v1, &cfg.v2).unwrap();
            assert_eq!(a.intersection_basis.ncols(), d);
            let rel = (a.factor - b.factor).abs() / a.factor.max(b.factor);
            assert!(rel < 1e-9, "trial {trial}: phi {} vs split {}", a.factor, b.factor);
        }
    }

    #[test]
    fn split_phi_invariant_under_complement_choice() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let cfg = random_clean_config(&mut rng, 3, 1);
        let reference =
            bks_density_phi_split(&cfg.omega, &cfg.l1, &cfg.l2, &cfg.v1, &cfg.v2).unwrap();
        let geo_k = reference.intersection_basis.clone();
        for _ in 0..5 {
            // New complements: shift V columns by K-directions and remix.
            let remix1 = random_invertible(&mut rng, cfg.v1.ncols());
            let shift1 = &geo_k * DMatrix::from_fn(geo_k.ncols(), cfg.v1.ncols(), |_, _| rng.random_range(-1.0..1.0));
            let v1 = &cfg.v1 * remix1 + shift1;
            let remix2 = random_invertible(&mut rng, cfg.v2.ncols());
            let shift2 = &geo_k * DMatrix::from_fn(geo_k.ncols(), cfg.v2.ncols(), |_, _| rng.random_range(-1.0..1.0));
            let v2 = &cfg.v2 * remix2 + shift2;
            let got = bks_density_phi_split(&cfg.omega, &cfg.l1, &cfg.l2, &v1, &v2).unwrap();
            let rel = (got.factor - reference.factor).abs() / reference.factor;
            assert!(rel < 1e-9, "complement dependence in split route");
        }
    }
}
