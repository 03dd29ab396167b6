//! Randomized property tests for the exact layer: serialization round-trips,
//! Weyl elements as isometries, alcove classification, and phase modulus.

use proptest::prelude::*;

use bks::alcove::classify;
use bks::pairing::phase_at;
use bks::rat::{rat, rat_from_string, rat_to_string, Rat};
use bks::rootsys::build_root_system;
use bks::weyl::{enumerate_weyl, simple_reflection};

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-1000i64..1000, 1i64..1000).prop_map(|(p, q)| rat(p, q))
}

fn small_type() -> impl Strategy<Value = (char, usize)> {
    prop::sample::select(vec![('A', 1), ('A', 2), ('A', 3), ('B', 2), ('C', 3), ('G', 2)])
}

proptest! {
    #[test]
    fn rational_string_round_trip(x in arb_rat()) {
        prop_assert_eq!(rat_from_string(&rat_to_string(&x)).unwrap(), x);
    }

    #[test]
    fn weyl_words_act_as_isometries(
        (letter, rank) in small_type(),
        word in prop::collection::vec(0usize..3, 0..8),
        coords in prop::collection::vec(arb_rat(), 3),
    ) {
        let rs = build_root_system(letter, rank).unwrap();
        let apply = |v: &[Rat]| -> Vec<Rat> {
            word.iter().fold(v.to_vec(), |acc, &i| {
                simple_reflection(&rs, i % rank).unwrap().act(&acc)
            })
        };
        let v: Vec<Rat> = coords[..rank].to_vec();
        prop_assert_eq!(
            rs.norm_sq(&apply(&v)).unwrap(),
            rs.norm_sq(&v).unwrap(),
            "length not preserved"
        );
        // roots map to roots
        for alpha in &rs.positive_roots {
            prop_assert!(rs.is_root(&apply(alpha)));
        }
    }

    #[test]
    fn classify_rejects_points_outside_and_accepts_scaled_interior(
        (letter, rank) in small_type(),
        k in 1i64..9,
        num in 1i64..6,
    ) {
        let rs = build_root_system(letter, rank).unwrap();
        // rho scaled strictly inside the alcove: <alpha_0, rho/s> < 1.
        let level = rs.inner_product(&rs.highest_root, &rs.rho).unwrap();
        let s = level.ceil().to_integer() + num;
        let beta: Vec<Rat> = rs.rho.iter().map(|x| x / Rat::from_integer(s)).collect();
        let p = classify(&rs, &beta, k).unwrap();
        prop_assert!(p.is_regular);
        // the reflected point leaves the alcove
        let refl = simple_reflection(&rs, 0).unwrap().act(&beta);
        prop_assert!(classify(&rs, &refl, k).is_err());
    }

    #[test]
    fn phases_have_unit_modulus(
        (letter, rank) in small_type(),
        k in 1i64..9,
        // small entries: the squared norm is computed exactly in 64 bits
        coords in prop::collection::vec((-30i64..30, 1i64..30).prop_map(|(p, q)| rat(p, q)), 6),
    ) {
        let rs = build_root_system(letter, rank).unwrap();
        let elements = enumerate_weyl(&rs, 10_000).unwrap();
        let beta: Vec<Rat> = coords[..rank].to_vec();
        let beta_p: Vec<Rat> = coords[3..3 + rank].to_vec();
        for w in elements.iter().take(4) {
            let z = phase_at(&rs, k, w, &beta, &beta_p, false).unwrap();
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            let zk = phase_at(&rs, k, w, &beta, &beta_p, true).unwrap();
            prop_assert!((zk.norm() - 1.0).abs() < 1e-12);
        }
    }
}
