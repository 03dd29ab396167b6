//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them on success).

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bks::alcove::enumerate_admissible;
use bks::cli::{cmd_verify, OutputFormat, RunConfig};
use bks::oracle::{classical_weyl_order, pfaffian_check, type_a_matrix_check};
use bks::pairing::{bks_pairing, intersection_points, phase_at, sign_identity_check, Conventions};
use bks::rat::{rat, Rat};
use bks::rootsys::build_root_system;
use bks::verify::{random_regular_xi, small_weyl_types, suite_densities};
use bks::weyl::{enumerate_weyl, DEFAULT_MAX_WEYL};

fn report(criterion: u32, what: &str) {
    println!("acceptance criterion {criterion}: PASS - {what}");
}

#[test]
fn criterion_1_weyl_orders_match_classical() {
    let started = Instant::now();
    let types = [
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
    ];
    for (l, r) in types {
        let rs = build_root_system(l, r).unwrap();
        let elements = enumerate_weyl(&rs, DEFAULT_MAX_WEYL).unwrap();
        assert_eq!(elements.len() as u64, classical_weyl_order(&rs), "{l}{r}");
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "Weyl enumeration took {elapsed:.1}s (budget 60s)");
    report(1, "Weyl orders A1-A4, B2, B3, C3, D4, G2, F4, E6 match the classical formulas");
}

#[test]
fn criterion_2_sign_identity_exact() {
    for (l, r) in small_weyl_types() {
        let rs = build_root_system(l, r).unwrap();
        let elements = enumerate_weyl(&rs, DEFAULT_MAX_WEYL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2025);
        for _ in 0..5 {
            let xi = random_regular_xi(&rs, &mut rng);
            let counterexample = sign_identity_check(&rs, &elements, &xi).unwrap();
            assert_eq!(counterexample, None, "{l}{r} xi={xi:?}");
        }
    }
    report(2, "sign identity holds exactly for all w and 5 random regular xi, all |W| <= 1152");
}

#[test]
fn criterion_3_density_suite_200_trials() {
    let started = Instant::now();
    let checks = suite_densities(200, 42).unwrap();
    assert_eq!(checks.len(), 4);
    for c in &checks {
        assert!(c.pass, "{}: max deviation {}", c.name, c.max_deviation);
        assert!(c.max_deviation <= 1e-9, "{}: {}", c.name, c.max_deviation);
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "density suite took {elapsed:.1}s (budget 30s)");
    report(3, "density suite passes 200 seeded trials x 4 properties within 1e-9");
}

#[test]
fn criterion_4_pfaffian_oracle_rank_le_3() {
    for (l, r) in [('A', 1), ('A', 2), ('A', 3), ('B', 2), ('B', 3), ('C', 3), ('G', 2)] {
        let rs = build_root_system(l, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let xi = random_regular_xi(&rs, &mut rng);
            let (pass, dev) = pfaffian_check(&rs, &xi, 1e-12).unwrap();
            assert!(pass, "{l}{r} xi={xi:?} relative deviation {dev}");
        }
    }
    report(4, "|Pf(omega_xi)| = (2pi)^m |prod alpha(xi)| within 1e-12 for 20 xi per rank <= 3 type");
}

#[test]
fn criterion_5_a1_closed_form() {
    // A1: beta = (j/2k) alpha in simple-root coordinates, so alpha(beta) = j/k.
    // Expected: k^2 * (1/sqrt 2) * sqrt(j j')/k
    //           * (e^{2 pi i (j-j')^2/(2k^2)} + e^{2 pi i (j+j')^2/(2k^2)}).
    let rs = build_root_system('A', 1).unwrap();
    let elements = enumerate_weyl(&rs, 10).unwrap();
    for k in 2..=6i64 {
        for j in 1..k {
            for jp in 1..k {
                let beta = [rat(j, 2 * k)];
                let beta_p = [rat(jp, 2 * k)];
                let got = bks_pairing(&rs, &elements, k, &beta, &beta_p, Conventions::default())
                    .unwrap()
                    .total;
                let phase = |num: i64| {
                    let e = (num * num) as f64 / (2.0 * (k * k) as f64);
                    Complex64::new((TAU * e).cos(), (TAU * e).sin())
                };
                let expected = (k * k) as f64 / 2f64.sqrt() * ((j * jp) as f64).sqrt()
                    / k as f64
                    * (phase(j - jp) + phase(j + jp));
                assert!(
                    (got - expected).norm() <= 1e-12 * expected.norm().max(1.0),
                    "k={k} j={j} j'={jp}: got {got}, expected {expected}"
                );
            }
        }
    }
    report(5, "A1 pairing matches the hand-derived closed form within 1e-12 for k = 2..6");
}

#[test]
fn criterion_6_g2_weyl_sum_invariance() {
    let rs = build_root_system('G', 2).unwrap();
    let elements = enumerate_weyl(&rs, 100).unwrap();
    let k = 7;
    let pts = enumerate_admissible(&rs, k, 1_000).unwrap();
    assert!(!pts.is_empty());
    for b in &pts {
        for bp in &pts {
            let reference: Complex64 = elements
                .iter()
                .map(|w| phase_at(&rs, k, w, &b.beta, &bp.beta, false).unwrap())
                .sum();
            let mut ref_norms: Vec<Rat> = intersection_points(&rs, &elements, &b.beta, &bp.beta)
                .unwrap()
                .iter()
                .map(|p| p.norm_sq)
                .collect();
            ref_norms.sort();
            for u in &elements {
                let moved = u.act(&b.beta);
                let sum: Complex64 = elements
                    .iter()
                    .map(|w| phase_at(&rs, k, w, &moved, &bp.beta, false).unwrap())
                    .sum();
                assert!(
                    (sum - reference).norm() <= 1e-9,
                    "u={:?}: |sum - reference| = {}",
                    u.word,
                    (sum - reference).norm()
                );
                let mut norms: Vec<Rat> = intersection_points(&rs, &elements, &moved, &bp.beta)
                    .unwrap()
                    .iter()
                    .map(|p| p.norm_sq)
                    .collect();
                norms.sort();
                assert_eq!(norms, ref_norms, "norm-squared multiset changed under u={:?}", u.word);
            }
        }
    }
    report(6, "G2 k=7 Weyl sum is invariant under u in W (1e-9; exact norm multisets)");
}

#[test]
fn criterion_7_admissible_counts_match_scan() {
    for (l, r, kmax) in [('A', 1, 20), ('A', 2, 10), ('B', 2, 8), ('G', 2, 8)] {
        let rs = build_root_system(l, r).unwrap();
        for k in 1..=kmax {
            let enumerated = enumerate_admissible(&rs, k, 1_000_000).unwrap().len() as u64;
            let scanned = bks::oracle::admissible_count_scan(&rs, k).unwrap();
            assert_eq!(enumerated, scanned, "{l}{r} k={k}");
            if (l, r) == ('A', 1) {
                assert_eq!(enumerated, (k - 1) as u64, "A1 k={k}");
            }
        }
    }
    report(7, "enumerate_admissible agrees with the box-scan oracle (and A1 count = k-1)");
}

#[test]
fn criterion_8_type_a_matrix_oracle() {
    for (r, ks) in [(1usize, vec![2i64, 3]), (2, vec![4])] {
        let rs = build_root_system('A', r).unwrap();
        let elements = enumerate_weyl(&rs, 100).unwrap();
        for k in ks {
            let pts = enumerate_admissible(&rs, k, 1_000).unwrap();
            for b in &pts {
                for bp in &pts {
                    for w in &elements {
                        assert!(
                            type_a_matrix_check(&rs, w, &b.beta, &bp.beta, 1e-10).unwrap(),
                            "SU({}) k={k} w={:?}",
                            r + 1,
                            w.word
                        );
                    }
                }
            }
        }
    }
    report(8, "SU(2) k=2,3 and SU(3) k=4 matrix-level intersection checks pass at 1e-10");
}

#[test]
fn criterion_9_verify_all_is_deterministic() {
    let config = RunConfig {
        type_letter: 'A',
        rank: 1,
        k: 2,
        conventions: Conventions::default(),
        seed: 42,
        weyl_cache_dir: None,
        output: OutputFormat::Json,
        max_weyl: DEFAULT_MAX_WEYL,
    };
    let first = cmd_verify(&config, "all", 200).unwrap();
    let second = cmd_verify(&config, "all", 200).unwrap();
    assert!(first.all_pass(), "verify --suite all --seed 42 must pass");
    assert_eq!(first.digest, second.digest, "report digests differ between identical runs");
    report(9, "two runs of `verify --suite all --seed 42` produce identical digests");
}
