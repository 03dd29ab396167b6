//! Independent brute-force verifiers for the derived quantities: the
//! Pfaffian of the orbit form against the closed-form coefficient, classical
//! Weyl-order formulas against the BFS enumeration, lattice-scan
//! admissibility counts, and diagonal-unitary checks of the type-A
//! intersection geometry.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::rootsys::RootSystem;
use crate::weyl::WeylElement;

/// The skew matrix of the orbit two-form omega_xi in the ordered basis
/// (x_{alpha_1}, y_{alpha_1}, x_{alpha_2}, y_{alpha_2}, ...): one 2x2 block
/// [[0, -2 pi alpha(xi)], [2 pi alpha(xi), 0]] per positive root.
pub fn omega_matrix(rs: &RootSystem, xi: &[Rat]) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(2 * rs.m, 2 * rs.m);
    for (idx, alpha) in rs.positive_roots.iter().enumerate() {
        let a = TAU * rat::rat_to_f64(&rs.inner_product(alpha, xi)?);
        m[(2 * idx, 2 * idx + 1)] = -a;
        m[(2 * idx + 1, 2 * idx)] = a;
    }
    Ok(m)
}

/// Pfaffian by the block product: for the block-diagonal omega matrix,
/// Pf = prod over blocks of the (0,1) entry = prod(-2 pi alpha(xi)).
pub fn pfaffian_block(rs: &RootSystem, xi: &[Rat]) -> Result<f64> {
    let mut p = 1.0;
    for alpha in &rs.positive_roots {
        p *= -TAU * rat::rat_to_f64(&rs.inner_product(alpha, xi)?);
    }
    Ok(p)
}

/// Compare |Pf(omega_xi)| against (2 pi)^m |prod alpha(xi)|, using the
/// generic recursive expansion when 2m <= 12 and the block product
/// otherwise. Returns (pass, relative deviation).
pub fn pfaffian_check(rs: &RootSystem, xi: &[Rat], tol: f64) -> Result<(bool, f64)> {
    let pf = if 2 * rs.m <= 12 {
        crate::density::pfaffian(&omega_matrix(rs, xi)?)
    } else {
        pfaffian_block(rs, xi)?
    };
    let expected = TAU.powi(rs.m as i32) * rat::rat_to_f64(&rs.root_product(xi)?).abs();
    let dev = if expected == 0.0 {
        pf.abs()
    } else {
        (pf.abs() - expected).abs() / expected
    };
    Ok((dev <= tol, dev))
}

/// Classical Weyl group order by the hard-coded product formulas.
pub fn classical_weyl_order(rs: &RootSystem) -> u64 {
    let r = rs.rank as u32;
    let fact = |n: u32| -> u64 { (1..=n as u64).product() };
    match rs.type_letter {
        'A' => fact(r + 1),
        'B' | 'C' => 2u64.pow(r) * fact(r),
        'D' => 2u64.pow(r - 1) * fact(r),
        'G' => 12,
        'F' => 1152,
        'E' => match r {
            6 => 51_840,
            7 => 2_903_040,
            _ => 696_729_600,
        },
        _ => unreachable!("validated type"),
    }
}

/// Independent admissibility count: exhaustive box scan over integer
/// fundamental-weight coordinates (each >= 1) with level < k. The level of
/// the i-th fundamental weight is computed directly from the highest-root
/// expansion, <alpha_0, omega_i> = c_i <alpha_i, alpha_i> / 2.
pub fn admissible_count_scan(rs: &RootSystem, k: i64) -> Result<u64> {
    if rs.rank > 4 {
        return Err(Error::Validation("scan oracle limited to rank <= 4".into()));
    }
    if k < 1 {
        return Err(Error::Validation("level k must be >= 1".into()));
    }
    let levels: Vec<Rat> = (0..rs.rank)
        .map(|i| {
            let a = rs.simple_root(i);
            rs.highest_root[i] * rs.norm_sq(&a).expect("dimension ok") / rat::rat(2, 1)
        })
        .collect();
    let kr = Rat::from_integer(k);
    fn scan(levels: &[Rat], acc: Rat, limit: Rat) -> u64 {
        match levels.split_first() {
            None => {
                if acc < limit {
                    1
                } else {
                    0
                }
            }
            Some((l0, rest)) => {
                let mut count = 0;
                let mut a = 1i64;
                loop {
                    let next = acc + Rat::from_integer(a) * l0;
                    if next >= limit {
                        break;
                    }
                    count += scan(rest, next, limit);
                    a += 1;
                }
                count
            }
        }
    }
    Ok(scan(&levels, Rat::zero(), kr))
}

/// Multiset comparison by greedy nearest matching. Sorting complex values
/// lexicographically is not robust here: rounding noise can reorder nearly
/// equal entries and pair distant eigenvalues.
fn multisets_match(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut remaining: Vec<Complex64> = b.to_vec();
    for x in a {
        let Some((idx, _)) = remaining
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).expect("finite"))
        else {
            return false;
        };
        if (x - remaining[idx]).norm() >= tol {
            return false;
        }
        remaining.swap_remove(idx);
    }
    true
}

/// Diagonal entries of the SU(rank+1) element exp(2 pi i diag(v)) for v in
/// simple-root coordinates (alpha_i = e_i - e_{i+1}, trace-zero embedding).
fn diag_unitary(v: &[Rat]) -> Vec<Complex64> {
    let r = v.len();
    (0..=r)
        .map(|j| {
            let above = if j < r { rat::rat_to_f64(&v[j]) } else { 0.0 };
            let below = if j > 0 { rat::rat_to_f64(&v[j - 1]) } else { 0.0 };
            let angle = TAU * (above - below);
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Matrix-level check of the intersection points for SU(rank+1):
/// g = exp(2 pi i diag(w beta - beta')), h = exp(2 pi i diag(beta')). Checks
/// that g and h commute, that h lies in the class of exp(2 pi i diag(beta')),
/// and that hg lies in the class of exp(2 pi i diag(beta)) (eigenvalue
/// multisets), all within `tol`.
pub fn type_a_matrix_check(
    rs: &RootSystem,
    w: &WeylElement,
    beta: &[Rat],
    beta_prime: &[Rat],
    tol: f64,
) -> Result<bool> {
    if rs.type_letter != 'A' {
        return Err(Error::Validation("matrix oracle is type A only".into()));
    }
    let moved = w.act(beta);
    let diff: Vec<Rat> = moved.iter().zip(beta_prime).map(|(a, b)| a - b).collect();
    let g = diag_unitary(&diff);
    let h = diag_unitary(beta_prime);
    let n = g.len();
    // (i) commutation, checked as full matrices.
    let gm = DMatrix::from_fn(n, n, |i, j| if i == j { g[i] } else { Complex64::zero() });
    let hm = DMatrix::from_fn(n, n, |i, j| if i == j { h[i] } else { Complex64::zero() });
    let comm = &gm * &hm - &hm * &gm;
    if comm.iter().any(|x| x.norm() > tol) {
        return Ok(false);
    }
    // (ii) h is in the class of exp(2 pi i diag(beta')).
    if !multisets_match(&h, &diag_unitary(beta_prime), tol) {
        return Ok(false);
    }
    // (iii) hg is in the class of exp(2 pi i diag(beta)).
    let hg: Vec<Complex64> = h.iter().zip(&g).map(|(a, b)| a * b).collect();
    Ok(multisets_match(&hg, &diag_unitary(beta), tol))
}
