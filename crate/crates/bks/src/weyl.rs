//! Weyl group enumeration as exact matrices on simple-root coordinates.
//!
//! In the simple-root basis every Weyl element acts by an integer matrix
//! (it permutes the roots, which have integer coordinates), so breadth-first
//! closure over the simple reflections runs on integer matrices and converts
//! to rational form only at the boundary. Deduplication is by the exact
//! matrix, never by floats.

use num_traits::Signed;
use std::collections::{HashSet, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rat::{self, mat_vec, Rat, RatMat};
use crate::rootsys::RootSystem;

/// Cache format version; bump when the on-disk layout changes.
pub const CACHE_VERSION: u32 = 1;

/// Default enumeration cap. E8 (|W| ~ 6.97e8) is out of scope at this cap
/// and requires an explicitly raised limit.
pub const DEFAULT_MAX_WEYL: usize = 1_000_000;

/// One Weyl group element: exact matrix, a reduced word, and its length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    /// Action on simple-root coordinates (entries are integers).
    pub matrix: RatMat,
    /// Reduced word in simple-reflection indices (0-based), shortest by BFS.
    pub word: Vec<usize>,
    /// Coxeter length, equal to `word.len()`.
    pub length: usize,
}

impl WeylElement {
    /// Apply the element to a coordinate vector, exactly.
    pub fn act(&self, v: &[Rat]) -> Vec<Rat> {
        mat_vec(&self.matrix, v)
    }
}

fn int_to_rat(m: &[Vec<i64>]) -> RatMat {
    m.iter()
        .map(|row| row.iter().map(|&x| Rat::from_integer(x)).collect())
        .collect()
}

/// Integer matrix of the simple reflection s_i in simple-root coordinates:
/// identity except row i, where `M[i][j] = delta_ij - A[i][j]`.
fn reflection_matrix(rs: &RootSystem, i: usize) -> Vec<Vec<i64>> {
    let r = rs.rank;
    let a = rs.cartan();
    let mut m = vec![vec![0i64; r]; r];
    for d in 0..r {
        m[d][d] = 1;
    }
    for j in 0..r {
        m[i][j] -= a[i][j];
    }
    m
}

/// The simple reflection s_i (0-based index).
pub fn simple_reflection(rs: &RootSystem, i: usize) -> Result<WeylElement> {
    if i >= rs.rank {
        return Err(Error::Validation(format!(
            "simple-reflection index {i} out of range 0..{}",
            rs.rank
        )));
    }
    Ok(WeylElement {
        matrix: int_to_rat(&reflection_matrix(rs, i)),
        word: vec![i],
        length: 1,
    })
}

/// Enumerate all of W by breadth-first closure over the simple reflections.
///
/// Each element carries the first (hence shortest, hence reduced) word found
/// for it. The result is sorted by (length, lexicographic word). Errors with
/// the partial count if the group exceeds `max_size`.
pub fn enumerate_weyl(rs: &RootSystem, max_size: usize) -> Result<Vec<WeylElement>> {
    if max_size < 1 {
        return Err(Error::Validation("max_size must be >= 1".into()));
    }
    let r = rs.rank;
    let gens: Vec<Vec<Vec<i64>>> = (0..r).map(|i| reflection_matrix(rs, i)).collect();

    let flat = |m: &[Vec<i64>]| -> Vec<i64> { m.iter().flatten().copied().collect() };
    let mut ident = vec![vec![0i64; r]; r];
    for d in 0..r {
        ident[d][d] = 1;
    }

    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    seen.insert(flat(&ident));
    let mut out: Vec<(Vec<usize>, Vec<Vec<i64>>)> = vec![(Vec::new(), ident.clone())];
    let mut queue: VecDeque<(Vec<usize>, Vec<Vec<i64>>)> = VecDeque::new();
    queue.push_back((Vec::new(), ident));

    while let Some((word, mat)) = queue.pop_front() {
        for (i, g) in gens.iter().enumerate() {
            // (w s_i) v = w (s_i v): matrix product mat * g.
            let mut prod = vec![vec![0i64; r]; r];
            for a in 0..r {
                for c in 0..r {
                    let x = mat[a][c];
                    if x == 0 {
                        continue;
                    }
                    for b in 0..r {
                        prod[a][b] += x * g[c][b];
                    }
                }
            }
            if seen.insert(flat(&prod)) {
                if out.len() >= max_size {
                    return Err(Error::ResourceCap(format!(
                        "Weyl group of {} exceeds max_size {max_size} ({} elements found so far)",
                        rs.label(),
                        out.len()
                    )));
                }
                let mut w = word.clone();
                w.push(i);
                out.push((w.clone(), prod.clone()));
                queue.push_back((w, prod));
            }
        }
    }

    let mut elements: Vec<WeylElement> = out
        .into_iter()
        .map(|(word, mat)| WeylElement {
            matrix: int_to_rat(&mat),
            length: word.len(),
            word,
        })
        .collect();
    elements.sort_by(|a, b| (a.length, &a.word).cmp(&(b.length, &b.word)));
    Ok(elements)
}

/// Number of positive roots sent to negative roots by w; the intrinsic
/// length function, computed independently of the BFS word.
pub fn inversion_count(rs: &RootSystem, w: &WeylElement) -> usize {
    rs.positive_roots
        .iter()
        .filter(|alpha| {
            let img = w.act(alpha);
            // A root is negative iff its first nonzero coordinate is.
            img.iter().find(|c| !num_traits::Zero::is_zero(*c)).map(Signed::is_negative)
                == Some(true)
        })
        .count()
}

/// Canonical cache file name for a root system.
pub fn cache_file_name(rs: &RootSystem) -> String {
    format!("weyl_{}_v{}.txt", rs.label(), CACHE_VERSION)
}

/// Write the enumeration to a versioned, self-describing text file.
pub fn write_cache(path: &Path, rs: &RootSystem, elements: &[WeylElement]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "bks-weyl-cache {CACHE_VERSION}")?;
    writeln!(f, "type {}", rs.label())?;
    writeln!(f, "count {}", elements.len())?;
    for e in elements {
        let word = e.word.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        let mat = e
            .matrix
            .iter()
            .flatten()
            .map(rat::rat_to_string)
            .collect::<Vec<_>>()
            .join(",");
        writeln!(f, "word={word}|mat={mat}")?;
    }
    Ok(())
}

/// Read a cache file back; validates version, type label and record shapes.
pub fn read_cache(path: &Path, rs: &RootSystem) -> Result<Vec<WeylElement>> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();
    let bad = |msg: &str| Error::Check(format!("weyl cache {}: {msg}", path.display()));

    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    if header != format!("bks-weyl-cache {CACHE_VERSION}") {
        return Err(bad("version mismatch"));
    }
    let type_line = lines.next().ok_or_else(|| bad("missing type line"))??;
    if type_line != format!("type {}", rs.label()) {
        return Err(bad("type mismatch"));
    }
    let count_line = lines.next().ok_or_else(|| bad("missing count line"))??;
    let count: usize = count_line
        .strip_prefix("count ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("malformed count line"))?;

    let r = rs.rank;
    let mut elements = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (word_part, mat_part) = line
            .strip_prefix("word=")
            .and_then(|s| s.split_once("|mat="))
            .ok_or_else(|| bad("malformed record"))?;
        let word: Vec<usize> = if word_part.is_empty() {
            Vec::new()
        } else {
            word_part
                .split(',')
                .map(|t| t.parse().map_err(|_| bad("malformed word")))
                .collect::<Result<_>>()?
        };
        let entries: Vec<Rat> = mat_part
            .split(',')
            .map(rat::rat_from_string)
            .collect::<Result<_>>()?;
        if entries.len() != r * r {
            return Err(bad("matrix entry count mismatch"));
        }
        let matrix: RatMat = entries.chunks(r).map(|c| c.to_vec()).collect();
        elements.push(WeylElement {
            length: word.len(),
            word,
            matrix,
        });
    }
    if elements.len() != count {
        return Err(bad("record count mismatch"));
    }
    Ok(elements)
}

/// Enumerate with a read-through disk cache keyed by (type, rank, version).
pub fn enumerate_weyl_cached(
    rs: &RootSystem,
    max_size: usize,
    cache_dir: Option<&Path>,
) -> Result<Vec<WeylElement>> {
    if let Some(dir) = cache_dir {
        let path = dir.join(cache_file_name(rs));
        if path.exists() {
            return read_cache(&path, rs);
        }
        let elements = enumerate_weyl(rs, max_size)?;
        std::fs::create_dir_all(dir)?;
        write_cache(&path, rs, &elements)?;
        return Ok(elements);
    }
    enumerate_weyl(rs, max_size)
}
