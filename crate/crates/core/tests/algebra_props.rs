mod common;

use common::*;
use diffgerm::cyclotomic::{cyclo_arith, root_of_unity_order, ArithOp, CycloElem};
use diffgerm::germs::{conjugate, evaluate_word, iterate, tangency_data, Germ, Word};
use diffgerm::jets::{Jet, RightComposer};
use proptest::prelude::*;
use rand::Rng;

fn conductor<R: Rng>(rng: &mut R) -> u32 {
    CONDUCTORS[rng.gen_range(0..CONDUCTORS.len())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(seed in seeds()) {
        let mut r = rng(seed);
        let n = conductor(&mut r);
        let (a, b, c) = (rand_scalar(&mut r, n), rand_scalar(&mut r, n), rand_scalar(&mut r, n));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, CycloElem::zero(n));
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn galois_and_norm_are_multiplicative(seed in seeds()) {
        let mut r = rng(seed);
        let n = [5u32, 8, 12][r.gen_range(0..3)];
        let (a, b) = (rand_scalar(&mut r, n), rand_scalar(&mut r, n));
        let k = match n { 5 => 2, 8 => 3, _ => 5 };
        prop_assert_eq!((&a * &b).galois(k), &a.galois(k) * &b.galois(k));
        prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
    }

    #[test]
    fn lifting_commutes_with_arithmetic(seed in seeds()) {
        let mut r = rng(seed);
        let (a, b) = (rand_scalar(&mut r, 4), rand_scalar(&mut r, 3));
        let s = &a * &b + &a;
        let (al, bl) = (a.lift(12).unwrap(), b.lift(12).unwrap());
        prop_assert_eq!(s.clone(), &al * &bl + &al);
        prop_assert!(cyclo_arith(ArithOp::Mul, &a, &b).is_err());
        prop_assert_eq!(cyclo_arith(ArithOp::Add, &al, &bl).unwrap(), &a + &b);
    }

    #[test]
    fn root_orders(n in 1u32..30, k in 0i64..60) {
        let z = CycloElem::zeta_pow(n, k);
        let ord = root_of_unity_order(&z).unwrap();
        let k_mod = k.rem_euclid(n as i64) as u64;
        prop_assert_eq!(ord, n as u64 / num_integer::gcd(n as u64, k_mod));
        prop_assert!(z.pow(ord as i64).unwrap().is_one());
    }

    #[test]
    fn jet_ring_and_composition(seed in seeds()) {
        let mut r = rng(seed);
        let n = conductor(&mut r);
        let order = r.gen_range(1..10);
        let (f, g, h) = (rand_jet(&mut r, n, order), rand_jet(&mut r, n, order), rand_jet(&mut r, n, order));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        let (u, v) = (rand_series(&mut r, n, order), rand_series(&mut r, n, order));
        let lhs = f.compose(&u).unwrap().compose(&v).unwrap();
        let rhs = f.compose(&u.compose(&v).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert_eq!(&RightComposer::new(&u).unwrap().compose(&f).unwrap(), &f.compose(&u).unwrap());
        prop_assert_eq!((&f * &g).compose(&u).unwrap(), &f.compose(&u).unwrap() * &g.compose(&u).unwrap());
    }

    #[test]
    fn inverses(seed in seeds()) {
        let mut r = rng(seed);
        let n = conductor(&mut r);
        let order = r.gen_range(1..12);
        let g = rand_germ(&mut r, n, order).into_jet();
        let id = Jet::identity(order, n);
        let gi = g.comp_inverse().unwrap();
        prop_assert_eq!(&g.compose(&gi).unwrap(), &id);
        prop_assert_eq!(&gi.compose(&g).unwrap(), &id);
        let mut u = rand_jet(&mut r, n, order).coeffs();
        u[0] = rand_nonzero(&mut r, n);
        let u = Jet::from_coeffs(&u, order).unwrap();
        prop_assert_eq!(&u * &u.mul_inverse().unwrap(), Jet::one(order, n));
    }

    #[test]
    fn chain_rule(seed in seeds()) {
        let mut r = rng(seed);
        let n = conductor(&mut r);
        let order = r.gen_range(2..10);
        let f = rand_jet(&mut r, n, order);
        let g = rand_series(&mut r, n, order);
        let lhs = f.compose(&g).unwrap().derivative();
        let rhs = &f.derivative().compose(&g.truncate(order - 1)).unwrap() * &g.derivative();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rational_powers(seed in seeds(), q in 1u32..5) {
        let mut r = rng(seed);
        let order = r.gen_range(1..10);
        let mut c = rand_jet(&mut r, 1, order).coeffs();
        c[0] = CycloElem::one(1);
        let f = Jet::from_coeffs(&c, order).unwrap();
        let root = f.rational_power(&rat(1, q as i64)).unwrap();
        prop_assert_eq!(root.pow(q), f.clone());
        let inv = f.rational_power(&rat(-1, 1)).unwrap();
        prop_assert_eq!(inv, f.mul_inverse().unwrap());
    }

    #[test]
    fn germ_group_laws(seed in seeds()) {
        let mut r = rng(seed);
        let n = conductor(&mut r);
        let order = r.gen_range(1..10);
        let (f, g) = (rand_germ(&mut r, n, order), rand_germ(&mut r, n, order));
        let fg = f.compose(&g).unwrap();
        prop_assert_eq!(fg.multiplier(), &f.multiplier() * &g.multiplier());
        prop_assert!(f.compose(&f.inverse()).unwrap().is_identity());
        let c = conjugate(&g, &f).unwrap();
        prop_assert_eq!(c.multiplier(), f.multiplier());
    }

    #[test]
    fn conjugation_keeps_flat_tangency(seed in seeds()) {
        let mut r = rng(seed);
        let order = 10;
        let k = r.gen_range(1..6);
        let f = rand_germ_tangent(&mut r, &CycloElem::one(3), k, order);
        let g = rand_germ(&mut r, 3, order);
        let (a, b) = (tangency_data(&f), tangency_data(&conjugate(&g, &f).unwrap()));
        prop_assert!(a.flat && b.flat);
        prop_assert_eq!(a.k, b.k);
    }

    #[test]
    fn iterate_matches_words(seed in seeds(), times in 1u64..=8) {
        let mut r = rng(seed);
        let f = rand_germ(&mut r, 4, 8);
        let w = Word::from_pairs(&vec![(1, 1); times as usize]);
        prop_assert_eq!(iterate(&f, times), evaluate_word(&w, &[f.clone()]).unwrap());
    }
}

#[test]
fn identity_and_rotation_iterates() {
    let r = diffgerm::germs::rotation(4, 1, 10);
    assert!(iterate(&r, 4).is_identity());
    assert_eq!(iterate(&r, 1), r);
    let id = Germ::identity(5, 1);
    assert_eq!(evaluate_word(&Word::empty(), &[id.clone()]).unwrap(), id);
}
