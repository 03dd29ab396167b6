//! Exact root-system construction for all compact simple simply-connected
//! types.
//!
//! All vectors are stored as rational coordinates in the simple-root basis;
//! the inner product is carried by the Gram matrix of the simple roots,
//! rescaled once so that the highest root has squared length exactly 2 (long
//! roots have length sqrt(2)). With that normalization the Cartan subalgebra
//! and its dual are identified and the code works in a single coordinate
//! system.

use num_traits::{One, Signed, Zero};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rat::{self, dot, mat_vec, Rat, RatMat};

/// Root-system data for one simple type, immutable after construction.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub type_letter: char,
    pub rank: usize,
    /// Gram matrix B with `B[i][j] = <alpha_i, alpha_j>` (normalized form).
    pub gram: RatMat,
    /// Positive roots as rational coordinate vectors in the simple-root basis
    /// (the coordinates are in fact integers).
    pub positive_roots: Vec<Vec<Rat>>,
    /// Highest root.
    pub highest_root: Vec<Rat>,
    /// Half-sum of positive roots.
    pub rho: Vec<Rat>,
    /// Number of positive roots.
    pub m: usize,
    /// Dimension of the group, `rank + 2 m`.
    pub n: usize,
    /// Cartan matrix `A[i][j] = 2<alpha_i, alpha_j> / <alpha_i, alpha_i>`.
    cartan: Vec<Vec<i64>>,
}

/// Validated (letter, rank) combination with the standard Cartan matrix.
fn cartan_matrix(letter: char, r: usize) -> Result<Vec<Vec<i64>>> {
    let bad = || {
        Error::Validation(format!(
            "invalid type {letter}{r}; valid: A(r>=1), B(r>=2), C(r>=3), D(r>=4), E(6..8), F4, G2"
        ))
    };
    // Start from a simply-laced chain and adjust.
    let mut a = vec![vec![0i64; r]; r];
    for i in 0..r {
        a[i][i] = 2;
    }
    let chain = |edges: &[(usize, usize)], a: &mut Vec<Vec<i64>>| {
        for &(i, j) in edges {
            a[i][j] = -1;
            a[j][i] = -1;
        }
    };
    match (letter, r) {
        ('A', r) if r >= 1 => {
            chain(&(0..r.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>(), &mut a);
        }
        ('B', r) if r >= 2 => {
            chain(&(0..r - 1).map(|i| (i, i + 1)).collect::<Vec<_>>(), &mut a);
            // last simple root is short
            a[r - 1][r - 2] = -2;
        }
        ('C', r) if r >= 3 => {
            chain(&(0..r - 1).map(|i| (i, i + 1)).collect::<Vec<_>>(), &mut a);
            // last simple root is long
            a[r - 2][r - 1] = -2;
        }
        ('D', r) if r >= 4 => {
            chain(&(0..r - 2).map(|i| (i, i + 1)).collect::<Vec<_>>(), &mut a);
            chain(&[(r - 3, r - 1)], &mut a);
        }
        ('E', 6) => chain(&[(0, 2), (2, 3), (3, 4), (4, 5), (1, 3)], &mut a),
        ('E', 7) => chain(&[(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 3)], &mut a),
        ('E', 8) => chain(&[(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)], &mut a),
        ('F', 4) => {
            chain(&[(0, 1), (2, 3)], &mut a);
            a[1][2] = -1;
            a[2][1] = -2;
        }
        ('G', 2) => {
            a[0][1] = -1;
            a[1][0] = -3;
        }
        _ => return Err(bad()),
    }
    Ok(a)
}

/// Build the root system with the normalized inner product.
pub fn build_root_system(type_letter: char, rank: usize) -> Result<RootSystem> {
    let cartan = cartan_matrix(type_letter, rank)?;
    let r = rank;

    // Symmetrize the Cartan matrix: find squared lengths t_i (up to a global
    // scale) with t_i * A[i][j] = t_j * A[j][i], by propagation over the
    // Dynkin graph.
    let mut t = vec![Rat::zero(); r];
    t[0] = Rat::one();
    let mut placed = vec![false; r];
    placed[0] = true;
    for _ in 0..r {
        for i in 0..r {
            if !placed[i] {
                continue;
            }
            for j in 0..r {
                if i != j && cartan[i][j] != 0 && !placed[j] {
                    t[j] = t[i] * rat::rat(cartan[i][j], cartan[j][i]);
                    placed[j] = true;
                }
            }
        }
    }
    if placed.iter().any(|p| !p) {
        return Err(Error::Check("Dynkin graph is disconnected".into()));
    }

    // Gram matrix up to scale: B[i][j] = A[i][j] * t_i / 2.
    let mut gram: RatMat = (0..r)
        .map(|i| (0..r).map(|j| rat::rat(cartan[i][j], 2) * t[i]).collect())
        .collect();

    // Generate the positive roots by the standard root-string closure over
    // integer coordinates in the simple-root basis.
    let coroot_pairing = |alpha: &[i64], i: usize| -> i64 {
        (0..r).map(|j| alpha[j] * cartan[i][j]).sum()
    };
    let mut roots: HashSet<Vec<i64>> = HashSet::new();
    let mut frontier: Vec<Vec<i64>> = Vec::new();
    for i in 0..r {
        let mut e = vec![0i64; r];
        e[i] = 1;
        roots.insert(e.clone());
        frontier.push(e);
    }
    let cap = 10 * r * r;
    let mut iterations = 0;
    while !frontier.is_empty() {
        iterations += 1;
        if iterations > cap {
            return Err(Error::Check("root closure failed to terminate".into()));
        }
        let mut next = Vec::new();
        for alpha in &frontier {
            for i in 0..r {
                // p = how far the root string continues below alpha.
                let mut p = 0i64;
                loop {
                    let mut down = alpha.clone();
                    down[i] -= p + 1;
                    if down.iter().all(|&c| c >= 0) && roots.contains(&down) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                if p - coroot_pairing(alpha, i) > 0 {
                    let mut up = alpha.clone();
                    up[i] += 1;
                    if roots.insert(up.clone()) {
                        next.push(up);
                    }
                }
            }
        }
        frontier = next;
    }

    // Sort by (height, coordinates) for a deterministic listing.
    let mut positive: Vec<Vec<i64>> = roots.into_iter().collect();
    positive.sort_by_key(|alpha| (alpha.iter().sum::<i64>(), alpha.clone()));

    // The highest root is the unique root of maximal height; it dominates
    // every other positive root coordinatewise.
    let highest = positive.last().expect("nonempty root set").clone();
    for alpha in &positive {
        for j in 0..r {
            if highest[j] < alpha[j] {
                return Err(Error::Check("highest root does not dominate".into()));
            }
        }
    }

    // Rescale the Gram matrix so <alpha_0, alpha_0> = 2 exactly.
    let h_rat: Vec<Rat> = highest.iter().map(|&c| Rat::from_integer(c)).collect();
    let norm = dot(&mat_vec(&gram, &h_rat), &h_rat);
    let scale = rat::rat(2, 1) / norm;
    for row in gram.iter_mut() {
        for x in row.iter_mut() {
            *x *= scale;
        }
    }

    let positive_roots: Vec<Vec<Rat>> = positive
        .iter()
        .map(|alpha| alpha.iter().map(|&c| Rat::from_integer(c)).collect())
        .collect();
    let m = positive_roots.len();
    let mut rho = vec![Rat::zero(); r];
    for alpha in &positive_roots {
        for j in 0..r {
            rho[j] += alpha[j] / 2;
        }
    }

    let rs = RootSystem {
        type_letter,
        rank: r,
        gram,
        positive_roots,
        highest_root: h_rat,
        rho,
        m,
        n: r + 2 * m,
        cartan,
    };
    rs.check_invariants()?;
    Ok(rs)
}

impl RootSystem {
    /// Short label such as "G2" or "A3".
    pub fn label(&self) -> String {
        format!("{}{}", self.type_letter, self.rank)
    }

    pub fn cartan(&self) -> &Vec<Vec<i64>> {
        &self.cartan
    }

    /// Exact normalized inner product `v^T B w`.
    pub fn inner_product(&self, v: &[Rat], w: &[Rat]) -> Result<Rat> {
        if v.len() != self.rank || w.len() != self.rank {
            return Err(Error::Validation(format!(
                "dimension mismatch: rank {} vs vectors of length {} and {}",
                self.rank,
                v.len(),
                w.len()
            )));
        }
        Ok(dot(&mat_vec(&self.gram, w), v))
    }

    pub fn norm_sq(&self, v: &[Rat]) -> Result<Rat> {
        self.inner_product(v, v)
    }

    /// `2 <lam, alpha> / <alpha, alpha>`; `alpha` must be a root.
    pub fn pairing_with_coroot(&self, lam: &[Rat], alpha: &[Rat]) -> Result<Rat> {
        if !self.is_root(alpha) {
            return Err(Error::Validation("coroot pairing against a non-root".into()));
        }
        let num = self.inner_product(lam, alpha)?;
        let den = self.inner_product(alpha, alpha)?;
        Ok(rat::rat(2, 1) * num / den)
    }

    /// Membership in Phi = Phi+ union -Phi+.
    pub fn is_root(&self, v: &[Rat]) -> bool {
        if v.len() != self.rank {
            return false;
        }
        let neg: Vec<Rat> = v.iter().map(|x| -x).collect();
        self.positive_roots.iter().any(|a| a[..] == v[..] || a[..] == neg[..])
    }

    /// Simple root alpha_i as a coordinate vector.
    pub fn simple_root(&self, i: usize) -> Vec<Rat> {
        let mut e = vec![Rat::zero(); self.rank];
        e[i] = Rat::one();
        e
    }

    /// Change of basis taking fundamental-weight coordinates to simple-root
    /// coordinates (the inverse Cartan matrix).
    pub fn weight_to_root_matrix(&self) -> RatMat {
        let a: RatMat = self
            .cartan
            .iter()
            .map(|row| row.iter().map(|&x| Rat::from_integer(x)).collect())
            .collect();
        rat::inverse(&a).expect("Cartan matrix is invertible")
    }

    /// Product of `alpha(xi) = <alpha, xi>` over all positive roots.
    /// The pairings <alpha, xi> over all positive roots, in enumeration
    /// order. Prefer these over `root_product` when only signs or individual
    /// factors are needed: the full product can overflow 64-bit rationals
    /// for larger types.
    pub fn root_pairings(&self, xi: &[Rat]) -> Result<Vec<Rat>> {
        self.positive_roots
            .iter()
            .map(|alpha| self.inner_product(alpha, xi))
            .collect()
    }

    pub fn root_product(&self, xi: &[Rat]) -> Result<Rat> {
        let mut p = Rat::one();
        for alpha in &self.positive_roots {
            p *= self.inner_product(alpha, xi)?;
        }
        Ok(p)
    }

    fn check_invariants(&self) -> Result<()> {
        // Gram symmetric positive definite: leading principal minors > 0.
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.gram[i][j] != self.gram[j][i] {
                    return Err(Error::Check("Gram matrix not symmetric".into()));
                }
            }
        }
        for k in 1..=self.rank {
            let minor: RatMat = (0..k).map(|i| self.gram[i][..k].to_vec()).collect();
            if !rat::det(&minor).is_positive() {
                return Err(Error::Check("Gram matrix not positive definite".into()));
            }
        }
        // Normalization.
        if self.norm_sq(&self.highest_root)? != rat::rat(2, 1) {
            return Err(Error::Check("highest root norm^2 != 2".into()));
        }
        // At most two root lengths, all norms <= 2.
        let mut norms: Vec<Rat> = Vec::new();
        for alpha in &self.positive_roots {
            let nsq = self.norm_sq(alpha)?;
            if !norms.contains(&nsq) {
                norms.push(nsq);
            }
            if nsq > rat::rat(2, 1) || !nsq.is_positive() {
                return Err(Error::Check("root norm out of range".into()));
            }
        }
        if norms.len() > 2 {
            return Err(Error::Check("more than two root lengths".into()));
        }
        Ok(())
    }
}

/// Classical positive-root count per type; used by tests as an independent
/// expectation for the closure algorithm.
pub fn classical_positive_count(letter: char, r: usize) -> Option<usize> {
    match (letter, r) {
        ('A', r) => Some(r * (r + 1) / 2),
        ('B', r) | ('C', r) => Some(r * r),
        ('D', r) => Some(r * (r - 1)),
        ('E', 6) => Some(36),
        ('E', 7) => Some(63),
        ('E', 8) => Some(120),
        ('F', 4) => Some(24),
        ('G', 2) => Some(6),
        _ => None,
    }
}

/// All types with the given rank caps; the standard small-type test matrix.
pub fn standard_types() -> Vec<(char, usize)> {
    vec![
        ('A', 1),
        ('A', 2),
        ('A', 3),
        ('A', 4),
        ('B', 2),
        ('B', 3),
        ('C', 3),
        ('D', 4),
        ('G', 2),
        ('F', 4),
        ('E', 6),
    ]
}
