//! Fundamental-alcove parametrization of conjugacy classes.
//!
//! A class is represented by its alcove point beta (simple-root coordinates,
//! identified with the Lie-algebra representative through the normalized
//! form). Regularity and 1/k-integrality are decided exactly. Since the
//! highest root is long with squared length 2, it is its own coroot and the
//! wall inequality reads `<alpha_0, beta> <= 1`.

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rat::{self, mat_vec, Rat};
use crate::rootsys::RootSystem;

/// A point of the fundamental alcove, with its admissibility flags at level k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlcovePoint {
    pub beta: Vec<Rat>,
    pub k: i64,
    pub is_regular: bool,
    pub is_k_integral: bool,
}

/// Classify a rational point: alcove membership (rejecting outside points
/// with the violated inequality named), regularity, and k-integrality.
pub fn classify(rs: &RootSystem, beta: &[Rat], k: i64) -> Result<AlcovePoint> {
    if k < 1 {
        return Err(Error::Validation(format!("level k must be >= 1, got {k}")));
    }
    if beta.len() != rs.rank {
        return Err(Error::Validation("beta has wrong dimension".into()));
    }
    let mut strict = true;
    for i in 0..rs.rank {
        let p = rs.inner_product(&rs.simple_root(i), beta)?;
        if p.is_negative() {
            return Err(Error::Validation(format!(
                "beta outside alcove: <alpha_{i}, beta> = {} < 0",
                rat::rat_to_string(&p)
            )));
        }
        strict &= p.is_positive();
    }
    let top = rs.inner_product(&rs.highest_root, beta)?;
    if top > Rat::one() {
        return Err(Error::Validation(format!(
            "beta outside alcove: <alpha_0, beta> = {} > 1",
            rat::rat_to_string(&top)
        )));
    }
    strict &= top < Rat::one();

    let kb: Vec<Rat> = beta.iter().map(|x| x * Rat::from_integer(k)).collect();
    let mut integral = true;
    for i in 0..rs.rank {
        integral &= rs.pairing_with_coroot(&kb, &rs.simple_root(i))?.is_integer();
    }
    Ok(AlcovePoint {
        beta: beta.to_vec(),
        k,
        is_regular: strict,
        is_k_integral: integral,
    })
}

/// All interior 1/k-integral alcove points: beta = lambda/k with lambda a
/// strictly dominant integral weight of level < k. Deterministic order:
/// lexicographic in fundamental-weight coordinates.
pub fn enumerate_admissible(rs: &RootSystem, k: i64, max_count: usize) -> Result<Vec<AlcovePoint>> {
    if k < 1 {
        return Err(Error::Validation(format!("level k must be >= 1, got {k}")));
    }
    let w2r = rs.weight_to_root_matrix();
    // Level of the fundamental weight omega_i: <alpha_0, omega_i>, rational.
    let levels: Vec<Rat> = (0..rs.rank)
        .map(|i| {
            let col: Vec<Rat> = (0..rs.rank).map(|j| w2r[j][i]).collect();
            rs.inner_product(&rs.highest_root, &col).expect("dimension ok")
        })
        .collect();

    let mut out = Vec::new();
    let mut coords = vec![1i64; rs.rank];
    let kr = Rat::from_integer(k);
    'outer: loop {
        let level: Rat = coords
            .iter()
            .zip(&levels)
            .map(|(&a, l)| Rat::from_integer(a) * l)
            .sum();
        if level < kr {
            if out.len() >= max_count {
                return Err(Error::ResourceCap(format!(
                    "admissible enumeration for {} at k={k} exceeds max_count {max_count}",
                    rs.label()
                )));
            }
            let weight: Vec<Rat> = coords.iter().map(|&a| Rat::from_integer(a)).collect();
            let beta: Vec<Rat> = mat_vec(&w2r, &weight).iter().map(|x| x / kr).collect();
            let point = classify(rs, &beta, k)?;
            debug_assert!(point.is_regular && point.is_k_integral);
            out.push(point);
            // Lexicographic successor: bump the last coordinate.
            coords[rs.rank - 1] += 1;
        } else {
            // Level only grows in the last coordinate; carry.
            let mut pos = rs.rank - 1;
            loop {
                if pos == 0 {
                    break 'outer;
                }
                coords[pos] = 1;
                pos -= 1;
                coords[pos] += 1;
                let lvl: Rat = coords
                    .iter()
                    .zip(&levels)
                    .map(|(&a, l)| Rat::from_integer(a) * l)
                    .sum();
                if lvl < kr {
                    break;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::rootsys::build_root_system;

    #[test]
    fn a1_examples() {
        let rs = build_root_system('A', 1).unwrap();
        // <alpha, beta> = 1/2 means beta = alpha/4.
        let p = classify(&rs, &[rat(1, 4)], 2).unwrap();
        assert!(p.is_regular && p.is_k_integral);
        let origin = classify(&rs, &[rat(0, 1)], 3).unwrap();
        assert!(!origin.is_regular);
        // outside points are rejected with the inequality named
        let err = classify(&rs, &[rat(-1, 4)], 2).unwrap_err();
        assert!(err.to_string().contains("alpha_0") || err.to_string().contains("alpha_"));
        assert!(classify(&rs, &[rat(3, 4)], 2).is_err());
    }

    #[test]
    fn a2_rho_over_three() {
        let rs = build_root_system('A', 2).unwrap();
        let beta: Vec<_> = rs.rho.iter().map(|x| x / rat(3, 1)).collect();
        assert_eq!(rs.inner_product(&rs.highest_root, &beta).unwrap(), rat(2, 3));
        let p = classify(&rs, &beta, 3).unwrap();
        assert!(p.is_regular && p.is_k_integral);
    }

    #[test]
    fn a1_admissible_counts() {
        let rs = build_root_system('A', 1).unwrap();
        assert!(enumerate_admissible(&rs, 1, 10_000).unwrap().is_empty());
        for k in 1..=20 {
            let pts = enumerate_admissible(&rs, k, 10_000).unwrap();
            assert_eq!(pts.len(), (k - 1) as usize, "A1 level {k}");
        }
    }

    #[test]
    fn a2_count_at_k4() {
        let rs = build_root_system('A', 2).unwrap();
        let pts = enumerate_admissible(&rs, 4, 10_000).unwrap();
        assert_eq!(pts.len(), 3);
        // closed under the predicate, no duplicates
        for (i, p) in pts.iter().enumerate() {
            assert!(p.is_regular && p.is_k_integral);
            for q in &pts[i + 1..] {
                assert_ne!(p.beta, q.beta);
            }
        }
    }

    #[test]
    fn max_count_cap() {
        let rs = build_root_system('A', 1).unwrap();
        assert!(matches!(
            enumerate_admissible(&rs, 10, 3),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn alcove_is_strict_fundamental_domain_on_g2_regular_points() {
        let rs = build_root_system('G', 2).unwrap();
        let pts = enumerate_admissible(&rs, 7, 10_000).unwrap();
        let elements = crate::weyl::enumerate_weyl(&rs, 10_000).unwrap();
        for p in &pts {
            for w in &elements {
                if w.length == 0 {
                    continue;
                }
                let img = w.act(&p.beta);
                assert!(
                    classify(&rs, &img, p.k).is_err(),
                    "nontrivial Weyl image stayed in the alcove"
                );
            }
        }
    }
}
