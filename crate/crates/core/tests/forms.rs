mod common;

use common::*;
use diffgerm::cyclotomic::CycloElem;
use diffgerm::expr::Env;
use diffgerm::pforms::{
    blowup_chart_pullback, chart_map, cone_matches_pullback, differential, exterior_d, first_integral_check,
    integrability_check, kupka_test, lowest_jet, meromorphic_first_integral_check, parse_form, parse_poly, pullback,
    radial_contraction, tangent_cone, wedge, Form, MultiPoly,
};
use diffgerm::registry::{ex6_1, ex6_1_omega, ex6_1_q, ex6_2, ex6_2_as_printed, Ex61Params};
use proptest::prelude::*;
use rand::Rng;

// P(R_y − Q_z) + Q(P_z − R_x) + R(Q_x − P_y), written out by hand.
fn curl_pairing(w: &Form) -> MultiPoly {
    let (p, q, s) = (w.coeff(&[0]), w.coeff(&[1]), w.coeff(&[2]));
    let a = &s.derivative(1) - &q.derivative(2);
    let b = &p.derivative(2) - &s.derivative(0);
    let c = &q.derivative(0) - &p.derivative(1);
    &(&(&p * &a) + &(&q * &b)) + &(&s * &c)
}

fn ex61(k: u32, coeffs: [i64; 6]) -> Ex61Params {
    Ex61Params::new(k, coeffs.map(int)).unwrap()
}

#[test]
fn ex6_1_identities() {
    for k in 2..=5 {
        for p in [ex61(k, [1; 6]), ex61(k, [2, -3, 5, 3, 3 * (-1i64).pow(k), 7])] {
            let omega = ex6_1_omega(&p).unwrap();
            let q = ex6_1_q(&p).unwrap();
            assert!(q.terms().all(|(e, _)| e.iter().map(|&d| d as u32).sum::<u32>() == k + 1));
            let x = MultiPoly::var(0, 4);
            let rhs = Form::basis(0, 4)
                .mul_poly(&q.scale(&int(-(k as i64 + 1))))
                .try_add(&differential(&q).mul_poly(&x))
                .unwrap();
            assert_eq!(omega, rhs, "k={k}");
            assert!(integrability_check(&omega).unwrap());
            let rad = radial_contraction(&omega).unwrap();
            assert!(rad.is_zero(), "Ω is homogeneous with zero radial contraction");
            let ex = ex6_1(&p).unwrap();
            assert!(meromorphic_first_integral_check(&ex.omega, &q, ex.denominator.as_ref().unwrap()).unwrap());
            assert!(!first_integral_check(&ex.omega, &q).unwrap());
        }
    }
}

#[test]
fn ex6_1_kupka_point() {
    for k in 2..=4 {
        let p = ex61(k, [2, -3, 5, 3, 3 * (-1i64).pow(k), 7]);
        let omega = ex6_1_omega(&p).unwrap();
        assert!(kupka_test(&omega, &[int(0), int(1), int(-1), int(0)]).unwrap(), "k={k}");
        assert!(!kupka_test(&omega, &[int(0), int(0), int(0), int(0)]).unwrap());
    }
    let odd = ex6_1_omega(&Ex61Params::ones(3).unwrap()).unwrap();
    assert!(!kupka_test(&odd, &[int(0), int(1), int(-1), int(0)]).unwrap());
}

#[test]
fn ex6_2_checks() {
    let ex = ex6_2().unwrap();
    assert!(integrability_check(&ex.omega).unwrap());
    assert!(curl_pairing(&ex.omega).is_zero());
    assert!(first_integral_check(&ex.omega, ex.integral.as_ref().unwrap()).unwrap());
    let cone = tangent_cone(&ex.omega).unwrap();
    assert_eq!(cone.nu, 2);
    assert!(!cone.dicritical);
    assert_eq!(cone.cone.as_ref().unwrap().factored_string(), "2*x*(y^2+z^2)");
    let (m, _) = blowup_chart_pullback(&ex.omega, 0).unwrap();
    assert_eq!(m, 2);
    assert!(cone_matches_pullback(&ex.omega, 0).unwrap());

    let printed = ex6_2_as_printed().unwrap();
    assert!(!integrability_check(&printed.omega).unwrap());
    assert!(!first_integral_check(&printed.omega, printed.integral.as_ref().unwrap()).unwrap());
    let expect = parse_poly("8*x^3*y*z*(z^2 - y^2)", &Env::new(), 3).unwrap();
    assert_eq!(curl_pairing(&printed.omega), expect);
    assert_eq!(tangent_cone(&printed.omega).unwrap(), cone);
}

#[test]
fn known_non_integrable() {
    let w = parse_form("y*dx + x*z*dy + dz", &Env::new(), 3, 1).unwrap();
    assert!(!integrability_check(&w).unwrap());
    assert_eq!(curl_pairing(&w), parse_poly("z - 1 - x*y", &Env::new(), 3).unwrap());
}

#[test]
fn cone_and_pullback_agree_on_examples() {
    let mut forms = vec![ex6_2().unwrap().omega];
    for k in 2..=4 {
        forms.push(ex6_1(&Ex61Params::ones(k).unwrap()).unwrap().omega);
    }
    for w in &forms {
        for c in 0..w.nvars() {
            assert!(cone_matches_pullback(w, c).unwrap());
        }
    }
    let dicritical = parse_form("x*dy - y*dx + x^2*dx", &Env::new(), 2, 1).unwrap();
    let cone = tangent_cone(&dicritical).unwrap();
    assert!(cone.dicritical);
    assert_eq!(blowup_chart_pullback(&dicritical, 0).unwrap().0, 2);
    assert!(cone_matches_pullback(&dicritical, 0).unwrap());
}

#[test]
fn errors() {
    let w = parse_form("x*dy", &Env::new(), 2, 1).unwrap();
    assert!(kupka_test(&w, &[int(0)]).is_err());
    assert!(lowest_jet(&Form::zero(2, 1)).is_err());
    assert!(integrability_check(&Form::zero(3, 2)).is_err());
    assert!(meromorphic_first_integral_check(&w, &MultiPoly::one(2), &MultiPoly::zero(2)).is_err());
    assert!(parse_form("x*dy*dy + ", &Env::new(), 2, 1).is_err());
    assert!(parse_form("dx", &Env::new(), 2, 2).is_err());
    assert!(Form::basis(0, 2).try_add(&Form::basis_multi(&[0, 1], 2)).is_err());
    assert_eq!(Form::basis(0, 2).try_add(&Form::zero(2, 2)).unwrap(), Form::basis(0, 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_squared_is_zero(seed in seeds()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let deg = r.gen_range(0..n);
        let f = rand_form(&mut r, n, deg);
        prop_assert!(exterior_d(&exterior_d(&f)).is_zero());
    }

    #[test]
    fn leibniz_rule(seed in seeds()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let (p, q) = (r.gen_range(0..n), r.gen_range(0..n));
        let u = rand_form(&mut r, n, p);
        let v = rand_form(&mut r, n, q.min(n - 1 - p.min(n - 1)));
        let lhs = exterior_d(&wedge(&u, &v).unwrap());
        let sign = int(if p % 2 == 0 { 1 } else { -1 });
        let rhs = wedge(&exterior_d(&u), &v)
            .unwrap()
            .try_add(&wedge(&u, &exterior_d(&v)).unwrap().scale(&sign))
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_graded_commutative_and_bilinear(seed in seeds()) {
        let mut r = rng(seed);
        let n = 4;
        let (u, v, t) = (rand_form(&mut r, n, 1), rand_form(&mut r, n, 1), rand_form(&mut r, n, 2));
        prop_assert_eq!(wedge(&u, &v).unwrap(), wedge(&v, &u).unwrap().scale(&int(-1)));
        prop_assert!(wedge(&u, &u).unwrap().is_zero());
        let c = rand_nonzero(&mut r, 1);
        let lhs = wedge(&u.scale(&c).try_add(&v).unwrap(), &t).unwrap();
        let rhs = wedge(&u, &t).unwrap().scale(&c).try_add(&wedge(&v, &t).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_commutes_with_d(seed in seeds()) {
        let mut r = rng(seed);
        let n = 3;
        let deg = r.gen_range(0..3);
        let w = rand_form(&mut r, n, deg);
        let map: Vec<MultiPoly> = (0..n).map(|_| rand_poly(&mut r, n, 2)).collect();
        prop_assert_eq!(exterior_d(&pullback(&w, &map).unwrap()), pullback(&exterior_d(&w), &map).unwrap());
        let chart = r.gen_range(0..n);
        let cm = chart_map(n, chart);
        prop_assert_eq!(exterior_d(&pullback(&w, &cm).unwrap()), pullback(&exterior_d(&w), &cm).unwrap());
    }

    #[test]
    fn integrability_matches_hand_formula(seed in seeds()) {
        let mut r = rng(seed);
        let w = rand_form(&mut r, 3, 1);
        prop_assert_eq!(integrability_check(&w).unwrap(), curl_pairing(&w).is_zero());
        let f = rand_poly(&mut r, 3, 4);
        let g = rand_poly(&mut r, 3, 2);
        let exact = differential(&f).mul_poly(&g);
        prop_assert!(integrability_check(&exact).unwrap());
        prop_assert!(first_integral_check(&exact, &f).unwrap());
    }

    #[test]
    fn cone_matches_pullback_for_random_forms(seed in seeds()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let w = rand_form(&mut r, n, 1);
        prop_assume!(!w.is_zero());
        for c in 0..n {
            prop_assert!(cone_matches_pullback(&w, c).unwrap());
        }
    }

    #[test]
    fn display_round_trips(seed in seeds()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let deg = r.gen_range(0..=n);
        let w = rand_form(&mut r, n, deg);
        let back = parse_form(&w.to_string(), &Env::new(), n, deg).unwrap();
        prop_assert_eq!(back, w);
        let p = rand_poly(&mut r, n, 5);
        prop_assert_eq!(parse_poly(&p.factored_string(), &Env::new(), n).unwrap(), p.clone());
        let pt: Vec<CycloElem> = (0..n).map(|_| rand_scalar(&mut r, 1)).collect();
        let direct = p.terms().fold(CycloElem::zero(1), |acc, (e, c)| {
            let m = e.iter().zip(&pt).fold(c.clone(), |m, (&d, x)| &m * &x.pow(d as i64).unwrap());
            &acc + &m
        });
        prop_assert_eq!(p.eval(&pt).unwrap(), direct);
    }
}
