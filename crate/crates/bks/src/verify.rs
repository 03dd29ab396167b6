//! Seeded verification suites: randomized property checks for the density
//! calculus, exhaustive exact checks of the sign identity, and the
//! brute-force oracles. Shared by the CLI `verify` command and the test
//! suite; a given (suite, trials, seed) is fully deterministic.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{
    bks_density_phi, bks_density_phi_split, random_clean_config, scaling_check, seq_iso,
    seq_iso_with_complement, ExactSequence, LinearMapMatrix, SpaceRef,
};
use crate::error::Result;
use crate::oracle;
use crate::pairing;
use crate::rat::{self, Rat};
use crate::rootsys::{build_root_system, RootSystem};
use crate::weyl::{enumerate_weyl, DEFAULT_MAX_WEYL};
use nalgebra::DMatrix;

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub max_deviation: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, pass: bool, max_deviation: f64, detail: String) -> Self {
        CheckResult { name: name.into(), pass, max_deviation, detail }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
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

fn random_exact_sequence(rng: &mut ChaCha8Rng, nu: usize, nw: usize) -> ExactSequence {
    let nv = nu + nw;
    let auto = random_invertible(rng, nv);
    let auto_inv = auto.clone().lu().try_inverse().expect("invertible");
    let i_mat = auto.view((0, 0), (nv, nu)).into_owned();
    let j_mat = auto_inv.view((nu, 0), (nw, nv)).into_owned();
    ExactSequence::new(
        LinearMapMatrix::new(SpaceRef::new(nu, 0), SpaceRef::new(nv, 1), i_mat).expect("shape"),
        LinearMapMatrix::new(SpaceRef::new(nv, 1), SpaceRef::new(nw, 2), j_mat).expect("shape"),
    )
    .expect("constructed sequence is exact")
}

/// A random regular rational point (all alpha(xi) nonzero), small entries.
pub fn random_regular_xi(rs: &RootSystem, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    loop {
        let xi: Vec<Rat> = (0..rs.rank)
            .map(|_| rat::rat(rng.random_range(-9..10), rng.random_range(1..10)))
            .collect();
        let pairings = rs.root_pairings(&xi).expect("dimension ok");
        if pairings.iter().all(|p| *p != rat::rat(0, 1)) {
            return xi;
        }
    }
}

/// Density-calculus suite: per trial, seq_iso choice independence, the
/// |det k|^{1/2} scaling lemma, the direct-sum diagram, and Phi = Phi^{V1,V2}.
pub fn suite_densities(trials: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut dev_choice: f64 = 0.0;
    let mut dev_scaling: f64 = 0.0;
    let mut dev_sum: f64 = 0.0;
    let mut dev_phi: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);

        // seq_iso independence of the complement choice.
        let seq = random_exact_sequence(&mut rng, 1 + (trial % 3) as usize, 1 + (trial % 2) as usize);
        let du = crate::density::DensityValue {
            space: seq.i.source,
            order: 0.5,
            value: Complex64::new(rng.random_range(0.5..2.0), 0.0),
        };
        let dw = crate::density::DensityValue {
            space: seq.j.target,
            order: 0.5,
            value: Complex64::new(rng.random_range(0.5..2.0), 0.0),
        };
        let reference = seq_iso(&seq, &du, &dw)?.value;
        let (nv, nw) = (seq.i.target.dim, seq.j.target.dim);
        for _ in 0..3 {
            let wp = DMatrix::from_fn(nv, nw, |_, _| rng.random_range(-1.0..1.0));
            if let Ok(got) = seq_iso_with_complement(&seq, &du, &dw, &wp) {
                dev_choice = dev_choice.max((got.value - reference).norm() / reference.norm());
            }
        }

        // scaling lemma.
        let seq_s = random_exact_sequence(&mut rng, 2, 2);
        let k = random_invertible(&mut rng, 4);
        let k_inv = k.clone().lu().try_inverse().expect("invertible");
        let seq2 = ExactSequence::new(
            LinearMapMatrix::new(seq_s.i.source, seq_s.i.target, &k * &seq_s.i.matrix)?,
            LinearMapMatrix::new(seq_s.i.target, seq_s.j.target, &seq_s.j.matrix * &k_inv)?,
        )?;
        let (_, _, ratio) = scaling_check(&seq_s, &seq2, &k)?;
        let expected = k.determinant().abs().sqrt();
        dev_scaling = dev_scaling.max((ratio - expected).abs() / expected);

        // direct-sum diagram.
        let sa = random_exact_sequence(&mut rng, 2, 1);
        let sb = random_exact_sequence(&mut rng, 1, 2);
        let probes = vec![(
            Complex64::new(rng.random_range(0.5..2.0), 0.0),
            Complex64::new(rng.random_range(0.5..2.0), 0.0),
            Complex64::new(rng.random_range(0.5..2.0), 0.0),
            Complex64::new(rng.random_range(0.5..2.0), 0.0),
        )];
        let (_, dev) = crate::density::direct_sum_check(&sa, &sb, &probes, 1e-9)?;
        dev_sum = dev_sum.max(dev);

        // Phi = Phi^{V1,V2} on a random clean configuration.
        let n_half = 1 + (trial % 4) as usize;
        let d = (trial % (n_half as u64 + 1)) as usize;
        let cfg = random_clean_config(&mut rng, n_half, d);
        let a = bks_density_phi(&cfg.omega, &cfg.l1, &cfg.l2)?;
        let b = bks_density_phi_split(&cfg.omega, &cfg.l1, &cfg.l2, &cfg.v1, &cfg.v2)?;
        dev_phi = dev_phi.max((a.factor - b.factor).abs() / a.factor.max(b.factor));
    }
    let tol = 1e-9;
    Ok(vec![
        CheckResult::new("density.seq_iso_choice_independence", dev_choice <= tol, dev_choice, format!("{trials} trials x 3 complements")),
        CheckResult::new("density.scaling_lemma", dev_scaling <= tol, dev_scaling, format!("{trials} trials")),
        CheckResult::new("density.direct_sum_diagram", dev_sum <= tol, dev_sum, format!("{trials} trials")),
        CheckResult::new("density.phi_equals_split_phi", dev_phi <= tol, dev_phi, format!("{trials} trials, 2N <= 8")),
    ])
}

/// Types whose Weyl group has order at most 1152.
pub fn small_weyl_types() -> Vec<(char, usize)> {
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
    ]
}

/// Exact sign-identity suite over every type with |W| <= 1152, with the
/// given number of random regular rational points per type.
pub fn suite_signs(points_per_type: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (idx, (l, r)) in small_weyl_types().into_iter().enumerate() {
        let rs = build_root_system(l, r)?;
        let elements = enumerate_weyl(&rs, DEFAULT_MAX_WEYL)?;
        let mut rng = trial_rng(seed, idx as u64);
        let mut pass = true;
        let mut detail = format!("|W| = {}, {points_per_type} random regular xi, exact", elements.len());
        for _ in 0..points_per_type {
            let xi = random_regular_xi(&rs, &mut rng);
            if let Some(word) = pairing::sign_identity_check(&rs, &elements, &xi)? {
                pass = false;
                detail = format!("counterexample word {word:?} at xi {xi:?}");
                break;
            }
        }
        out.push(CheckResult::new(&format!("signs.{}", rs.label()), pass, 0.0, detail));
    }
    Ok(out)
}

/// Brute-force oracle suite: Weyl orders, Pfaffian of the orbit form,
/// admissibility scan counts, and the type-A matrix-level intersection check.
pub fn suite_oracles(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // Classical orders against BFS enumeration (small types; E6 is covered
    // by the acceptance suite to keep `verify` fast).
    let mut pass = true;
    let mut detail = String::new();
    for (l, r) in small_weyl_types() {
        let rs = build_root_system(l, r)?;
        let got = enumerate_weyl(&rs, DEFAULT_MAX_WEYL)?.len() as u64;
        let want = oracle::classical_weyl_order(&rs);
        if got != want {
            pass = false;
            detail = format!("{l}{r}: {got} != {want}");
            break;
        }
    }
    out.push(CheckResult::new("oracle.weyl_orders", pass, 0.0, if detail.is_empty() { "A1..F4 vs product formulas".into() } else { detail }));

    // Pfaffian check, 20 random regular xi per type of rank <= 3.
    let mut max_dev: f64 = 0.0;
    let mut pass = true;
    for (idx, (l, r)) in [('A', 1), ('A', 2), ('A', 3), ('B', 2), ('B', 3), ('C', 3), ('G', 2)]
        .into_iter()
        .enumerate()
    {
        let rs = build_root_system(l, r)?;
        let mut rng = trial_rng(seed, 100 + idx as u64);
        for _ in 0..20 {
            let xi = random_regular_xi(&rs, &mut rng);
            let (ok, dev) = oracle::pfaffian_check(&rs, &xi, 1e-12)?;
            max_dev = max_dev.max(dev);
            pass &= ok;
        }
    }
    out.push(CheckResult::new("oracle.pfaffian", pass, max_dev, "20 xi per type, rank <= 3, tol 1e-12".into()));

    // Admissible-count scan vs enumeration.
    let mut pass = true;
    let mut detail = "A1 k<=20, A2 k<=10, B2 k<=8, G2 k<=8".to_string();
    for (l, r, kmax) in [('A', 1, 20i64), ('A', 2, 10), ('B', 2, 8), ('G', 2, 8)] {
        let rs = build_root_system(l, r)?;
        for k in 1..=kmax {
            let scan = oracle::admissible_count_scan(&rs, k)?;
            let enumerated = crate::alcove::enumerate_admissible(&rs, k, 1_000_000)?.len() as u64;
            let a1_ok = l != 'A' || r != 1 || scan == (k - 1) as u64;
            if scan != enumerated || !a1_ok {
                pass = false;
                detail = format!("{l}{r} k={k}: scan {scan}, enumerated {enumerated}");
            }
        }
    }
    out.push(CheckResult::new("oracle.admissible_counts", pass, 0.0, detail));

    // Type-A matrix-level intersection points.
    let mut pass = true;
    let mut detail = "SU(2) k=2,3; SU(3) k=4; all w, all admissible pairs".to_string();
    for (r, ks) in [(1usize, vec![2i64, 3]), (2, vec![4])] {
        let rs = build_root_system('A', r)?;
        let elements = enumerate_weyl(&rs, DEFAULT_MAX_WEYL)?;
        for k in ks {
            let pts = crate::alcove::enumerate_admissible(&rs, k, 10_000)?;
            for b in &pts {
                for bp in &pts {
                    for w in &elements {
                        if !oracle::type_a_matrix_check(&rs, w, &b.beta, &bp.beta, 1e-10)? {
                            pass = false;
                            detail = format!("A{r} k={k} w={:?}", w.word);
                        }
                    }
                }
            }
        }
    }
    out.push(CheckResult::new("oracle.type_a_matrix", pass, 0.0, detail));

    Ok(out)
}

/// Run a named suite ("densities", "signs", "oracles", or "all").
pub fn run_suite(suite: &str, trials: u64, seed: u64) -> Result<Vec<CheckResult>> {
    if trials == 0 {
        return Err(crate::Error::Validation("trials must be >= 1".into()));
    }
    let mut out = Vec::new();
    match suite {
        "densities" => out.extend(suite_densities(trials, seed)?),
        "signs" => out.extend(suite_signs(5, seed)?),
        "oracles" => out.extend(suite_oracles(seed)?),
        "all" => {
            out.extend(suite_densities(trials, seed)?);
            out.extend(suite_signs(5, seed)?);
            out.extend(suite_oracles(seed)?);
        }
        other => {
            return Err(crate::Error::Validation(format!(
                "unknown suite {other:?}; expected densities|signs|oracles|all"
            )))
        }
    }
    Ok(out)
}
