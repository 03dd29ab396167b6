//! The quantitative layer: orbit symplectic-form coefficients, volumes of
//! G/T, the torus constant kappa(G), intersection bookkeeping over the Weyl
//! group, phases, and the headline BKS pairing value.
//!
//! All 2*pi powers are carried symbolically as integer exponents until the
//! final numeric rendering; in the pairing constant they cancel, and that
//! cancellation is asserted rather than assumed.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use std::f64::consts::TAU;

use crate::alcove;
use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::rootsys::RootSystem;
use crate::weyl::WeylElement;

/// Haar-measure normalization for the torus density behind kappa(G).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Haar {
    /// Theta induces probability Haar measure: kappa^2 = 1/det(coroot Gram).
    #[default]
    Probability,
    /// Lebesgue measure of the normalized form (total mass = coroot-lattice
    /// covolume): kappa = 1.
    UnitLattice,
}

/// Evaluation conventions exposed to the caller.
#[derive(Debug, Clone, Copy, Default, serde::Serialize, serde::Deserialize)]
pub struct Conventions {
    pub haar: Haar,
    /// Multiply the phase exponent by k (the alternative reading of the
    /// gerbe phases); default follows the printed theorem (off).
    pub phase_k: bool,
}

/// kappa(G) with its exact rational square.
#[derive(Debug, Clone, Copy)]
pub struct Kappa {
    pub sq: Rat,
    pub value: f64,
}

/// Product of alpha(xi) over positive roots, plus the count m; the full
/// top-form coefficient is (-2*pi)^m times this, with 2*pi kept symbolic.
pub fn omega_top_coeff(rs: &RootSystem, xi: &[Rat]) -> Result<(Rat, usize)> {
    Ok((rs.root_product(xi)?, rs.m))
}

/// Check prod alpha(w xi) = (-1)^{l(w)} prod alpha(xi) exactly for every
/// given Weyl element. Returns the word of the first counterexample, if any.
pub fn sign_identity_check(
    rs: &RootSystem,
    elements: &[WeylElement],
    xi: &[Rat],
) -> Result<Option<Vec<usize>>> {
    let base = rs.root_pairings(xi)?;
    if base.iter().any(|p| p.is_zero()) {
        return Err(Error::Validation("sign identity requires regular xi".into()));
    }
    // Compare factor multisets instead of full products: w^{-1} permutes the
    // positive roots up to sign, so the identity holds exactly iff the
    // absolute factors agree as multisets and the count of negative factors
    // changes parity with the length. This avoids overflowing 64-bit
    // rationals on products over many positive roots.
    let neg_base = base.iter().filter(|p| p.is_negative()).count();
    let mut abs_base: Vec<Rat> = base.iter().map(|p| p.abs()).collect();
    abs_base.sort();
    for w in elements {
        let moved = rs.root_pairings(&w.act(xi))?;
        let neg = moved.iter().filter(|p| p.is_negative()).count();
        let mut abs_moved: Vec<Rat> = moved.iter().map(|p| p.abs()).collect();
        abs_moved.sort();
        if abs_moved != abs_base || (neg + neg_base + w.length) % 2 != 0 {
            return Ok(Some(w.word.clone()));
        }
    }
    Ok(None)
}

/// kappa(G) under the chosen Haar convention. The coroot Gram matrix is
/// exact, so the square is exposed as a rational.
pub fn kappa(rs: &RootSystem, haar: Haar) -> Kappa {
    match haar {
        Haar::UnitLattice => Kappa { sq: Rat::one(), value: 1.0 },
        Haar::Probability => {
            let r = rs.rank;
            let mut coroots: Vec<Vec<Rat>> = Vec::with_capacity(r);
            for i in 0..r {
                let a = rs.simple_root(i);
                let nsq = rs.norm_sq(&a).expect("dimension ok");
                coroots.push(a.iter().map(|x| x * rat::rat(2, 1) / nsq).collect());
            }
            let gram: Vec<Vec<Rat>> = (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| rs.inner_product(&coroots[i], &coroots[j]).expect("dimension ok"))
                        .collect()
                })
                .collect();
            let det = rat::det(&gram);
            let sq = Rat::one() / det;
            Kappa { sq, value: rat::sqrt_rat(&sq) }
        }
    }
}

/// Vol(G/T, theta) as (rational Q, power p of 2*pi):
/// Q = 1 / prod <alpha, rho>, p = -m.
pub fn vol_gt_metric(rs: &RootSystem) -> (Rat, i64) {
    let q = Rat::one() / rs.root_product(&rs.rho).expect("dimension ok");
    (q, -(rs.m as i64))
}

/// Vol(G/T, |Xi_xi|^{1/2} |Xi_xi'|^{1/2}) = sqrt(prod alpha(xi) alpha(xi'))
/// / prod <alpha, rho>. The identity against (2*pi)^m sqrt(prod) *
/// vol_gt_metric is verified exactly at the level of rational squares.
pub fn vol_gt_pair(rs: &RootSystem, xi: &[Rat], xi_prime: &[Rat]) -> Result<f64> {
    let p1 = rs.root_product(xi)?;
    let p2 = rs.root_product(xi_prime)?;
    if !p1.is_positive() || !p2.is_positive() {
        return Err(Error::Validation(
            "vol_gt_pair requires dominant regular arguments (positive root products)".into(),
        ));
    }
    let (q, p) = vol_gt_metric(rs);
    // value^2 = prod * Q^2, and the 2*pi powers (m from the form values,
    // p = -m from the metric volume) cancel.
    let value_sq = p1 * p2 * q * q;
    assert_eq!(rs.m as i64 + p, 0, "2*pi powers must cancel in vol_gt_pair");
    let direct_sq = (p1 * p2) / (rs.root_product(&rs.rho)? * rs.root_product(&rs.rho)?);
    assert_eq!(value_sq, direct_sq);
    Ok(rat::sqrt_rat(&value_sq))
}

/// e^{2 pi i E} with E = ||w beta - beta'||^2 (or k times that with the
/// phase-k flag); E is exact and reduced mod 1 before exponentiation.
pub fn phase_at(
    rs: &RootSystem,
    k: i64,
    w: &WeylElement,
    beta: &[Rat],
    beta_prime: &[Rat],
    include_k_exponent: bool,
) -> Result<Complex64> {
    let moved = w.act(beta);
    let diff: Vec<Rat> = moved.iter().zip(beta_prime).map(|(a, b)| a - b).collect();
    let mut e = rs.norm_sq(&diff)?;
    if include_k_exponent {
        e *= Rat::from_integer(k);
    }
    let f = rat::rat_to_f64(&rat::frac_mod_one(&e));
    Ok(Complex64::new((TAU * f).cos(), (TAU * f).sin()))
}

/// One transverse intersection orbit: the Weyl element, the exact difference
/// w beta - beta', and its exact squared norm.
#[derive(Debug, Clone)]
pub struct IntersectionPoint {
    pub word: Vec<usize>,
    pub length: usize,
    pub diff: Vec<Rat>,
    pub norm_sq: Rat,
}

/// One point per Weyl element; requires both classes regular (the orbit
/// bijection needs regularity) and checks the diffs are pairwise distinct.
pub fn intersection_points(
    rs: &RootSystem,
    elements: &[WeylElement],
    beta: &[Rat],
    beta_prime: &[Rat],
) -> Result<Vec<IntersectionPoint>> {
    if rs.root_product(beta)?.is_zero() || rs.root_product(beta_prime)?.is_zero() {
        return Err(Error::Validation("intersection_points requires regular classes".into()));
    }
    let mut out = Vec::with_capacity(elements.len());
    for w in elements {
        let moved = w.act(beta);
        let diff: Vec<Rat> = moved.iter().zip(beta_prime).map(|(a, b)| a - b).collect();
        let norm_sq = rs.norm_sq(&diff)?;
        out.push(IntersectionPoint {
            word: w.word.clone(),
            length: w.length,
            diff,
            norm_sq,
        });
    }
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            if out[i].diff == out[j].diff {
                return Err(Error::Check("distinct Weyl elements gave equal intersection diffs".into()));
            }
        }
    }
    Ok(out)
}

/// One summand of the Weyl sum.
#[derive(Debug, Clone)]
pub struct WeylTerm {
    pub word: Vec<usize>,
    pub length: usize,
    pub norm_sq: Rat,
    pub phase: Complex64,
}

/// The assembled pairing value with its full per-element breakdown.
#[derive(Debug, Clone)]
pub struct PairingResult {
    pub k: i64,
    /// k^{n-r} * kappa(G) / prod <alpha, rho>.
    pub prefactor: f64,
    /// (prod alpha(beta) alpha(beta'))^{1/2}.
    pub product_term: f64,
    pub weyl_terms: Vec<WeylTerm>,
    pub total: Complex64,
}

/// Kahan-compensated complex summation in the given (deterministic) order.
fn compensated_sum(terms: impl Iterator<Item = Complex64>) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for t in terms {
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum
}

/// The BKS pairing of the two admissible classes:
/// k^{n-r} * (kappa/prod<alpha,rho>) * (prod alpha(beta) alpha(beta'))^{1/2}
/// * sum over W of the intersection phases.
pub fn bks_pairing(
    rs: &RootSystem,
    elements: &[WeylElement],
    k: i64,
    beta: &[Rat],
    beta_prime: &[Rat],
    conventions: Conventions,
) -> Result<PairingResult> {
    for b in [beta, beta_prime] {
        let point = alcove::classify(rs, b, k)?;
        if !point.is_regular || !point.is_k_integral {
            return Err(Error::Validation(format!(
                "class is not admissible at level {k} (regular: {}, {k}-integral: {})",
                point.is_regular, point.is_k_integral
            )));
        }
    }

    // Constant assembly with symbolic 2*pi exponents: the half-density
    // magnitudes contribute (2*pi)^{m} (half from each class), the metric
    // volume contributes (2*pi)^{-m}; assert the cancellation.
    let kap = kappa(rs, conventions.haar);
    let (q, vol_pow) = vol_gt_metric(rs);
    let two_pi_power = rs.m as i64 + vol_pow;
    assert_eq!(two_pi_power, 0, "2*pi powers must cancel in the pairing constant");
    let c_gt_sq = kap.sq * q * q;
    let c_gt = rat::sqrt_rat(&c_gt_sq);
    let prefactor = (k as f64).powi((rs.n - rs.rank) as i32) * c_gt;

    let prod_sq = rs.root_product(beta)? * rs.root_product(beta_prime)?;
    let product_term = rat::sqrt_rat(&prod_sq);

    // elements are assumed sorted by (length, word); enforce determinism.
    let mut idx: Vec<usize> = (0..elements.len()).collect();
    idx.sort_by(|&a, &b| {
        (elements[a].length, &elements[a].word).cmp(&(elements[b].length, &elements[b].word))
    });
    let mut weyl_terms = Vec::with_capacity(elements.len());
    for &i in &idx {
        let w = &elements[i];
        let moved = w.act(beta);
        let diff: Vec<Rat> = moved.iter().zip(beta_prime).map(|(a, b)| a - b).collect();
        let norm_sq = rs.norm_sq(&diff)?;
        let phase = phase_at(rs, k, w, beta, beta_prime, conventions.phase_k)?;
        weyl_terms.push(WeylTerm {
            word: w.word.clone(),
            length: w.length,
            norm_sq,
            phase,
        });
    }
    let sum = compensated_sum(weyl_terms.iter().map(|t| t.phase));
    Ok(PairingResult {
        k,
        prefactor,
        product_term,
        weyl_terms,
        total: sum * prefactor * product_term,
    })
}

/// kappa^{1/2} |Omega_{k beta}(eta_1, ..., eta_{n-r})|^{1/2} where the tuple
/// is given by its coordinate matrix in the standard {x_alpha, y_alpha}
/// basis and Omega has top coefficient (-2*pi)^m prod alpha(k beta).
pub fn half_density_value(
    rs: &RootSystem,
    k: i64,
    beta: &[Rat],
    eta_tuple: &nalgebra::DMatrix<f64>,
    conventions: Conventions,
) -> Result<f64> {
    let dim = rs.n - rs.rank;
    if eta_tuple.nrows() != dim || eta_tuple.ncols() != dim {
        return Err(Error::Validation(format!(
            "eta tuple must be {dim} x {dim} in the x/y basis"
        )));
    }
    let kb: Vec<Rat> = beta.iter().map(|x| x * Rat::from_integer(k)).collect();
    let (p, m) = omega_top_coeff(rs, &kb)?;
    let kap = kappa(rs, conventions.haar);
    let det = if dim == 0 { 1.0 } else { eta_tuple.determinant() };
    let coeff = TAU.powi(m as i32) * rat::rat_to_f64(&p).abs();
    Ok(kap.value.sqrt() * (coeff * det.abs()).sqrt())
}
