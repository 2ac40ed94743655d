#![allow(dead_code)]

use diffgerm::cyclotomic::{CycloElem, Rational};
use diffgerm::germs::Germ;
use diffgerm::jets::Jet;
use diffgerm::pforms::{Exps, Form, MultiPoly};
use proptest::prelude::*;
use rand::Rng;

pub const CONDUCTORS: [u32; 6] = [1, 3, 4, 5, 8, 12];

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p, q).unwrap()
}

pub fn int(n: i64) -> CycloElem {
    CycloElem::from_int(n)
}

/// An element with small numerators and denominators 1..=3.
pub fn rand_scalar<R: Rng>(rng: &mut R, conductor: u32) -> CycloElem {
    let phi = diffgerm::cyclotomic::euler_totient(conductor) as usize;
    let coeffs: Vec<Rational> = (0..phi)
        .map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)))
        .collect();
    CycloElem::from_coeffs(conductor, &coeffs).unwrap()
}

pub fn rand_nonzero<R: Rng>(rng: &mut R, conductor: u32) -> CycloElem {
    loop {
        let x = rand_scalar(rng, conductor);
        if !x.is_zero() {
            return x;
        }
    }
}

/// A jet whose coefficients vanish with probability about 1/3.
pub fn rand_jet<R: Rng>(rng: &mut R, conductor: u32, order: usize) -> Jet {
    let coeffs: Vec<CycloElem> = (0..=order)
        .map(|_| {
            if rng.gen_range(0..3) == 0 {
                CycloElem::zero(conductor)
            } else {
                rand_scalar(rng, conductor)
            }
        })
        .collect();
    Jet::from_coeffs(&coeffs, order).unwrap()
}

/// Zero constant term.
pub fn rand_series<R: Rng>(rng: &mut R, conductor: u32, order: usize) -> Jet {
    let mut coeffs = rand_jet(rng, conductor, order).coeffs();
    coeffs[0] = CycloElem::zero(conductor);
    Jet::from_coeffs(&coeffs, order).unwrap()
}

pub fn rand_germ<R: Rng>(rng: &mut R, conductor: u32, order: usize) -> Germ {
    let mut coeffs = rand_series(rng, conductor, order).coeffs();
    coeffs[1] = rand_nonzero(rng, conductor);
    Germ::new(Jet::from_coeffs(&coeffs, order).unwrap()).unwrap()
}

/// Germ with the given multiplier and zero coefficients at z^2 … z^k.
pub fn rand_germ_tangent<R: Rng>(rng: &mut R, mu: &CycloElem, k: usize, order: usize) -> Germ {
    let conductor = mu.conductor();
    let mut coeffs = rand_series(rng, conductor, order).coeffs();
    coeffs[1] = mu.clone();
    for c in coeffs.iter_mut().take(k + 1).skip(2) {
        *c = CycloElem::zero(conductor);
    }
    Germ::new(Jet::from_coeffs(&coeffs, order).unwrap()).unwrap()
}

pub fn rand_poly<R: Rng>(r: &mut R, nvars: usize, max_deg: u16) -> MultiPoly {
    let n = r.gen_range(0..6);
    MultiPoly::from_terms(
        nvars,
        (0..n).map(|_| {
            let mut e: Exps = [0; 4];
            for slot in e.iter_mut().take(nvars) {
                *slot = r.gen_range(0..=max_deg / nvars as u16 + 1);
            }
            (e, int(r.gen_range(-4..=4)))
        }),
    )
}

pub fn rand_form<R: Rng>(r: &mut R, nvars: usize, degree: usize) -> Form {
    let mut f = Form::zero(nvars, degree);
    for _ in 0..r.gen_range(1..4) {
        let mut idx: Vec<u8> = (0..nvars as u8).collect();
        while idx.len() > degree {
            idx.remove(r.gen_range(0..idx.len()));
        }
        let term = Form::basis_multi(&idx, nvars).mul_poly(&rand_poly(r, nvars, 4));
        f = f.try_add(&term).unwrap();
    }
    f
}

pub fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
