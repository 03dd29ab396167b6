//! Exact rational scalars and small dense rational linear algebra.
//!
//! Everything in the Lie-theoretic layer is exact: vectors live in the
//! simple-root basis with `Rat` coordinates, and determinants / inverses are
//! computed by fraction-free Gaussian elimination over `Rat`.

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. 64-bit components are ample for the matrix sizes
/// (rank <= 8) and entry magnitudes that occur here.
pub type Rat = Rational64;

/// Dense row-major rational matrix.
pub type RatMat = Vec<Vec<Rat>>;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

/// Canonical `"p/q"` string (reduced, `q > 0`). Integers render as `"p/1"`.
pub fn rat_to_string(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse the canonical `"p/q"` form produced by [`rat_to_string`].
pub fn rat_from_string(s: &str) -> Result<Rat> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| Error::Validation(format!("malformed rational {s:?}")))?;
    let p: i64 = p
        .parse()
        .map_err(|_| Error::Validation(format!("malformed rational {s:?}")))?;
    let q: i64 = q
        .parse()
        .map_err(|_| Error::Validation(format!("malformed rational {s:?}")))?;
    if q == 0 {
        return Err(Error::Validation(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(p, q))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn identity(n: usize) -> RatMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &RatMat, b: &RatMat) -> RatMat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![Rat::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x.is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn mat_vec(a: &RatMat, v: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn dot(u: &[Rat], v: &[Rat]) -> Rat {
    u.iter().zip(v).map(|(x, y)| x * y).sum()
}

/// Exact determinant by Gaussian elimination with partial (nonzero) pivoting.
pub fn det(a: &RatMat) -> Rat {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero());
        let Some(pivot) = pivot else {
            return Rat::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            d = -d;
        }
        let p = m[col][col];
        d *= p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col] / p;
            for c in col..n {
                let sub = f * m[col][c];
                m[r][c] -= sub;
            }
        }
    }
    d
}

/// Exact inverse; errors on singular input.
pub fn inverse(a: &RatMat) -> Result<RatMat> {
    let n = a.len();
    let mut m = a.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::Check("singular matrix in inverse".into()))?;
        m.swap(pivot, col);
        inv.swap(pivot, col);
        let p = m[col][col];
        for c in 0..n {
            m[col][c] /= p;
            inv[col][c] /= p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col];
            for c in 0..n {
                let s1 = f * m[col][c];
                m[r][c] -= s1;
                let s2 = f * inv[col][c];
                inv[r][c] -= s2;
            }
        }
    }
    Ok(inv)
}

/// Solve `a x = b` exactly; errors on singular `a`.
pub fn solve(a: &RatMat, b: &[Rat]) -> Result<Vec<Rat>> {
    Ok(mat_vec(&inverse(a)?, b))
}

/// Reduce a rational modulo 1 into `[0, 1)`.
pub fn frac_mod_one(x: &Rat) -> Rat {
    let f = x.floor();
    x - f
}

/// `|x|` as an f64 square root of an exact nonnegative rational.
pub fn sqrt_rat(x: &Rat) -> f64 {
    assert!(!x.is_negative(), "sqrt of negative rational");
    rat_to_f64(x).sqrt()
}
