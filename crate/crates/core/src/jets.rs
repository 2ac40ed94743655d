//! Truncated power series in one variable over ℚ(ζ_n).
//!
//! A [`Jet`] of order N stores the coefficients of z^0 … z^N; everything is
//! computed in ℚ(ζ_n)[z]/(z^{N+1}). Internally the whole jet shares one
//! positive denominator, so the kernels below run on integer vectors in
//! ℤ[ζ_n] and normalize once per operation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclotomic::{
    common_conductor, lift_vec, normalize, tables, CycloElem, FieldTables, Rational, Scalar,
};
use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 32;

#[derive(Clone)]
pub struct Jet {
    order: usize,
    field: Arc<FieldTables>,
    den: BigInt,
    /// (order + 1) blocks of φ(n) integers.
    num: Vec<BigInt>,
}

impl Jet {
    fn from_parts(order: usize, field: Arc<FieldTables>, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        debug_assert_eq!(num.len(), (order + 1) * field.phi);
        normalize(&mut num, &mut den);
        Jet {
            order,
            field,
            den,
            num,
        }
    }

    fn phi(&self) -> usize {
        self.field.phi
    }

    fn elem(&self, i: usize) -> &[BigInt] {
        let phi = self.phi();
        &self.num[i * phi..(i + 1) * phi]
    }

    fn elem_is_zero(&self, i: usize) -> bool {
        self.elem(i).iter().all(Zero::is_zero)
    }

    pub fn zero(order: usize, conductor: u32) -> Self {
        let field = tables(conductor);
        let num = vec![BigInt::zero(); (order + 1) * field.phi];
        Jet {
            order,
            field,
            den: BigInt::one(),
            num,
        }
    }

    pub fn constant(c: &Scalar, order: usize) -> Self {
        Self::monomial(c, 0, order)
    }

    pub fn one(order: usize, conductor: u32) -> Self {
        Self::constant(&CycloElem::one(conductor), order)
    }

    /// The identity series z.
    pub fn identity(order: usize, conductor: u32) -> Self {
        Self::monomial(&CycloElem::one(conductor), 1, order)
    }

    /// c·z^k (zero when k > order).
    pub fn monomial(c: &Scalar, k: usize, order: usize) -> Self {
        let mut j = Self::zero(order, c.conductor());
        if k <= order {
            let phi = j.phi();
            j.num[k * phi..(k + 1) * phi].clone_from_slice(c.raw_num());
            j.den = c.raw_den().clone();
        }
        j
    }

    /// Builds a jet of the given order from leading coefficients; missing
    /// ones are zero, extra ones are an error. All coefficients are lifted to
    /// a common conductor.
    pub fn from_coeffs(coeffs: &[Scalar], order: usize) -> Result<Self> {
        if coeffs.len() > order + 1 {
            return Err(Error::usage(format!(
                "{} coefficients do not fit a jet of order {order}",
                coeffs.len()
            )));
        }
        let conductor = coeffs
            .iter()
            .fold(1, |acc, c| common_conductor(acc, c.conductor()));
        let lifted: Vec<CycloElem> = coeffs
            .iter()
            .map(|c| c.lift(conductor))
            .collect::<Result<_>>()?;
        let field = tables(conductor);
        let den = lifted
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.raw_den()));
        let mut num = Vec::with_capacity((order + 1) * field.phi);
        for c in &lifted {
            let scale = &den / c.raw_den();
            num.extend(c.raw_num().iter().map(|x| x * &scale));
        }
        num.resize((order + 1) * field.phi, BigInt::zero());
        Ok(Self::from_parts(order, field, num, den))
    }

    /// Convenience constructor from rational coefficients.
    pub fn from_rationals(coeffs: &[Rational], order: usize) -> Result<Self> {
        let cs: Vec<Scalar> = coeffs.iter().map(|q| CycloElem::from_rational(q, 1)).collect();
        Self::from_coeffs(&cs, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn conductor(&self) -> u32 {
        self.field.n
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        assert!(i <= self.order, "coefficient z^{i} beyond order {}", self.order);
        CycloElem::from_raw(self.field.n, self.elem(i).to_vec(), self.den.clone())
    }

    pub fn coeffs(&self) -> Vec<Scalar> {
        (0..=self.order).map(|i| self.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient, `None` for the zero jet.
    pub fn valuation(&self) -> Option<usize> {
        (0..=self.order).find(|&i| !self.elem_is_zero(i))
    }

    /// Re-expresses every coefficient in ℚ(ζ_m), m a multiple of the conductor.
    pub fn lift(&self, m: u32) -> Result<Self> {
        if m == self.field.n {
            return Ok(self.clone());
        }
        if m % self.field.n != 0 {
            return Err(Error::ConductorMismatch(self.field.n, m));
        }
        let to = tables(m);
        let mut num = Vec::with_capacity((self.order + 1) * to.phi);
        for i in 0..=self.order {
            num.extend(lift_vec(&self.field, &to, self.elem(i)));
        }
        Ok(Jet {
            order: self.order,
            field: to,
            den: self.den.clone(),
            num,
        })
    }

    /// Drops every coefficient above z^order.
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order, "truncate cannot raise the order");
        let num = self.num[..(order + 1) * self.phi()].to_vec();
        Self::from_parts(order, Arc::clone(&self.field), num, self.den.clone())
    }

    fn aligned(a: &Jet, b: &Jet) -> (Jet, Jet) {
        if a.field.n == b.field.n {
            return (a.clone(), b.clone());
        }
        let m = common_conductor(a.field.n, b.field.n);
        (a.lift(m).unwrap(), b.lift(m).unwrap())
    }

    fn with_aligned<T>(a: &Jet, b: &Jet, f: impl FnOnce(&Jet, &Jet) -> T) -> T {
        if a.field.n == b.field.n {
            f(a, b)
        } else {
            let (a, b) = Self::aligned(a, b);
            f(&a, &b)
        }
    }

    fn add_same(&self, other: &Jet, negate: bool) -> Jet {
        let l = self.den.lcm(&other.den);
        let sa = &l / &self.den;
        let sb = &l / &other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(x, y)| {
                let x = if sa.is_one() { x.clone() } else { x * &sa };
                let y = if sb.is_one() { y.clone() } else { y * &sb };
                if negate {
                    x - y
                } else {
                    x + y
                }
            })
            .collect();
        Self::from_parts(self.order, Arc::clone(&self.field), num, l)
    }

    /// Product up to z^prec using whatever coefficients both operands
    /// carry; callers guarantee the omitted terms vanish by valuation.
    fn product(a: &Jet, b: &Jet, prec: usize) -> Jet {
        let t = &a.field;
        let phi = t.phi;
        let nza: Vec<bool> = (0..=a.order).map(|i| !a.elem_is_zero(i)).collect();
        let nzb: Vec<bool> = (0..=b.order).map(|i| !b.elem_is_zero(i)).collect();
        let mut out = Vec::with_capacity((prec + 1) * phi);
        let mut wide = vec![BigInt::zero(); 2 * phi - 1];
        for n in 0..=prec {
            wide.iter_mut().for_each(|w| w.set_zero());
            let lo = n.saturating_sub(b.order);
            let hi = n.min(a.order);
            for i in lo..=hi {
                if nza[i] && nzb[n - i] {
                    t.mul_acc(a.elem(i), b.elem(n - i), &mut wide);
                }
            }
            if phi == 1 {
                out.push(wide[0].clone());
            } else {
                out.extend(t.reduce(&wide));
            }
        }
        Self::from_parts(prec, Arc::clone(t), out, &a.den * &b.den)
    }

    /// Multiplies every coefficient by a scalar.
    pub fn scale(&self, c: &Scalar) -> Jet {
        let m = common_conductor(self.field.n, c.conductor());
        let this = self.lift(m).unwrap();
        let c = c.lift(m).unwrap();
        let t = &this.field;
        let mut num = Vec::with_capacity(this.num.len());
        for i in 0..=this.order {
            num.extend(t.mul(this.elem(i), c.raw_num()));
        }
        Self::from_parts(this.order, Arc::clone(t), num, &this.den * c.raw_den())
    }

    pub fn scale_rational(&self, q: &Rational) -> Jet {
        let num = self.num.iter().map(|x| x * q.numer()).collect();
        Self::from_parts(self.order, Arc::clone(&self.field), num, &self.den * q.denom())
    }

    /// Adds c·z^k in place of building a monomial jet.
    pub fn add_term(&self, c: &Scalar, k: usize) -> Jet {
        self + &Jet::monomial(&c.lift(common_conductor(c.conductor(), self.conductor())).unwrap(), k, self.order)
    }

    fn check_same_order(&self, other: &Jet, what: &str) {
        assert_eq!(
            self.order, other.order,
            "{what}: jets must share a truncation order"
        );
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, exp: u32) -> Jet {
        let mut result = Jet::one(self.order, self.conductor());
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// f ∘ g truncated to the common order, by Horner accumulation
    /// c_0 + g·(c_1 + g·(c_2 + …)). The partial sum multiplying g^i only
    /// needs precision N − i, which keeps the cost near N³/6 products.
    pub fn compose(&self, g: &Jet) -> Result<Jet> {
        if self.order != g.order {
            return Err(Error::usage(format!(
                "compose: orders differ ({} vs {})",
                self.order, g.order
            )));
        }
        if !g.elem_is_zero(0) {
            return Err(Error::domain("compose: inner series has a nonzero constant term"));
        }
        Ok(Self::with_aligned(self, g, |f, g| f.compose_same(g)))
    }

    fn compose_same(&self, g: &Jet) -> Jet {
        let n = self.order;
        let t = Arc::clone(&self.field);
        let phi = t.phi;
        // Horner over the integer numerators of f; divide by f.den at the end.
        let mut acc = Jet::from_parts(0, Arc::clone(&t), self.elem(n).to_vec(), BigInt::one());
        for i in (0..n).rev() {
            let mut next = Jet::product(g, &acc, n - i);
            if !self.elem_is_zero(i) {
                for (dst, src) in next.num[..phi].iter_mut().zip(self.elem(i)) {
                    *dst += src * &next.den;
                }
                normalize(&mut next.num, &mut next.den);
            }
            acc = next;
        }
        let den = &acc.den * &self.den;
        Jet::from_parts(n, t, acc.num, den)
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn mul_inverse(&self) -> Result<Jet> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(Error::domain("mul_inverse: constant term is zero"));
        }
        let inv0 = c0.inv()?;
        let f = self.coeffs();
        let mut g: Vec<Scalar> = Vec::with_capacity(self.order + 1);
        g.push(inv0.clone());
        for n in 1..=self.order {
            let mut s = CycloElem::zero(self.conductor());
            for i in 1..=n {
                if !f[i].is_zero() {
                    s = s + &f[i] * &g[n - i];
                }
            }
            g.push(-(s * &inv0));
        }
        Jet::from_coeffs(&g, self.order)
    }

    /// Compositional inverse, solving for one coefficient at a time: with
    /// f = a_1 z + Σ_{j≥2} a_j z^j, the z^n coefficient of f∘g is
    /// a_1 g_n + Σ_{j≥2} a_j [z^n] g^j, and the second sum only involves
    /// g_1 … g_{n−1}.
    pub fn comp_inverse(&self) -> Result<Jet> {
        if !self.elem_is_zero(0) {
            return Err(Error::domain("comp_inverse: constant term is nonzero"));
        }
        if self.order == 0 {
            return Err(Error::domain("comp_inverse: order 0 jet has no linear term"));
        }
        let a1 = self.coeff(1);
        if a1.is_zero() {
            return Err(Error::domain("comp_inverse: linear coefficient is zero"));
        }
        let n_max = self.order;
        let cond = self.conductor();
        let a = self.coeffs();
        let inv_a1 = a1.inv()?;
        let zero = CycloElem::zero(cond);
        // pw[j][m] = [z^m] g^j for j ≥ 1
        let mut pw: Vec<Vec<Scalar>> = vec![vec![zero.clone(); n_max + 1]; n_max + 1];
        pw[1][1] = inv_a1.clone();
        for n in 2..=n_max {
            let mut s = zero.clone();
            for j in 2..=n {
                let mut c = zero.clone();
                for i in 1..=(n + 1 - j) {
                    let (gi, prev) = (&pw[1][i], &pw[j - 1][n - i]);
                    if !gi.is_zero() && !prev.is_zero() {
                        c = c + gi * prev;
                    }
                }
                if !a[j].is_zero() && !c.is_zero() {
                    s = s + &a[j] * &c;
                }
                pw[j][n] = c;
            }
            pw[1][n] = -(s * &inv_a1);
        }
        let mut g = pw.swap_remove(1);
        g[0] = zero;
        Jet::from_coeffs(&g, n_max)
    }

    /// Term-wise derivative; the result has order N − 1.
    pub fn derivative(&self) -> Jet {
        if self.order == 0 {
            return Jet::zero(0, self.conductor());
        }
        let phi = self.phi();
        let mut num = Vec::with_capacity(self.order * phi);
        for i in 1..=self.order {
            let k = BigInt::from(i);
            num.extend(self.elem(i).iter().map(|x| x * &k));
        }
        Self::from_parts(self.order - 1, Arc::clone(&self.field), num, self.den.clone())
    }

    /// f^r for rational r via Σ_k C(r, k)(f − 1)^k; needs constant term 1.
    pub fn rational_power(&self, r: &Rational) -> Result<Jet> {
        if !self.coeff(0).is_one() {
            return Err(Error::domain("rational_power: constant term must be 1"));
        }
        let one = Jet::one(self.order, self.conductor());
        let u = self - &one;
        let mut result = one.clone();
        let mut upow = one;
        let mut binom = Rational::one();
        let mut k: i64 = 1;
        let start = u.valuation().unwrap_or(self.order + 1);
        while (k as usize) * start <= self.order {
            upow = &upow * &u;
            binom = binom * (r - &Rational::from(k - 1)) * Rational::new(1, k).unwrap();
            if binom.is_zero() {
                break;
            }
            result = &result + &upow.scale_rational(&binom);
            k += 1;
        }
        Ok(result)
    }

    /// Byte key identifying the jet's value; only meaningful between jets
    /// of the same conductor and order.
    pub fn value_key(&self) -> Vec<u8> {
        let mut out = self.den.to_signed_bytes_le();
        out.push(0xff);
        for x in &self.num {
            let b = x.to_signed_bytes_le();
            out.push(b.len() as u8);
            out.extend(b);
        }
        out
    }
}

/// Precomputed powers g^0 … g^N so many series can be composed on the right
/// with the same g in O(N²) coefficient products each.
pub struct RightComposer {
    order: usize,
    field: Arc<FieldTables>,
    /// Common denominator of every stored power.
    den: BigInt,
    powers: Vec<Vec<BigInt>>,
}

impl RightComposer {
    pub fn new(g: &Jet) -> Result<Self> {
        if !g.elem_is_zero(0) {
            return Err(Error::domain("compose: inner series has a nonzero constant term"));
        }
        let mut raw = vec![Jet::one(g.order, g.conductor())];
        for j in 1..=g.order {
            let next = &raw[j - 1] * g;
            raw.push(next);
        }
        let den = raw.iter().fold(BigInt::one(), |acc, p| acc.lcm(&p.den));
        let powers = raw
            .iter()
            .map(|p| {
                let s = &den / &p.den;
                p.num.iter().map(|x| x * &s).collect()
            })
            .collect();
        Ok(RightComposer {
            order: g.order,
            field: Arc::clone(&g.field),
            den,
            powers,
        })
    }

    pub fn compose(&self, f: &Jet) -> Result<Jet> {
        if f.order != self.order {
            return Err(Error::usage("compose: orders differ"));
        }
        if f.field.n != self.field.n {
            let m = common_conductor(f.field.n, self.field.n);
            if m != self.field.n {
                return Err(Error::ConductorMismatch(f.field.n, self.field.n));
            }
            return self.compose(&f.lift(m)?);
        }
        let t = &self.field;
        let phi = t.phi;
        let n = self.order;
        let mut wide = vec![BigInt::zero(); (n + 1) * (2 * phi - 1)];
        let w = 2 * phi - 1;
        for j in 0..=n {
            if f.elem_is_zero(j) {
                continue;
            }
            let fj = f.elem(j);
            let p = &self.powers[j];
            for m in j..=n {
                let pm = &p[m * phi..(m + 1) * phi];
                t.mul_acc(fj, pm, &mut wide[m * w..(m + 1) * w]);
            }
        }
        let mut num = Vec::with_capacity((n + 1) * phi);
        for m in 0..=n {
            let chunk = &wide[m * w..(m + 1) * w];
            if phi == 1 {
                num.push(chunk[0].clone());
            } else {
                num.extend(t.reduce(chunk));
            }
        }
        Ok(Jet::from_parts(n, Arc::clone(t), num, &f.den * &self.den))
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        if self.order != other.order {
            return false;
        }
        Jet::with_aligned(self, other, |a, b| a.den == b.den && a.num == b.num)
    }
}

impl Eq for Jet {}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_same_order(rhs, "add");
        Jet::with_aligned(self, rhs, |a, b| a.add_same(b, false))
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_same_order(rhs, "sub");
        Jet::with_aligned(self, rhs, |a, b| a.add_same(b, true))
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_same_order(rhs, "mul");
        Jet::with_aligned(self, rhs, |a, b| Jet::product(a, b, a.order))
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            order: self.order,
            field: Arc::clone(&self.field),
            den: self.den.clone(),
            num: self.num.iter().map(|x| -x).collect(),
        }
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Jet {
    /// `jet(N=4)[0, 1, 1, 0, 0]` is z + z².
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coeffs().iter().map(|c| c.to_string()).collect();
        write!(f, "jet(N={})[{}]", self.order, cs.join(", "))
    }
}

/// Splits on commas that are not nested inside brackets or parentheses.
pub(crate) fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl FromStr for Jet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::parse(0, format!("{msg} in jet literal {s:?}"));
        let rest = s.strip_prefix("jet(N=").ok_or_else(|| bad("expected 'jet(N='"))?;
        let (order, rest) = rest.split_once(')').ok_or_else(|| bad("missing ')'"))?;
        let order: usize = order.trim().parse().map_err(|_| bad("bad order"))?;
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| bad("expected [..]"))?;
        let coeffs = split_top_level(body)
            .into_iter()
            .map(str::parse)
            .collect::<Result<Vec<Scalar>>>()?;
        if coeffs.len() != order + 1 {
            return Err(bad("coefficient count does not match order"));
        }
        Jet::from_coeffs(&coeffs, order)
    }
}

impl Serialize for Jet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Jet", 2)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("coeffs", &self.coeffs())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Jet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            order: usize,
            coeffs: Vec<Scalar>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.coeffs.len() != raw.order + 1 {
            return Err(serde::de::Error::custom("coefficient count does not match order"));
        }
        Jet::from_coeffs(&raw.coeffs, raw.order).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
}

pub fn jet_ring(op: RingOp, f: &Jet, g: &Jet) -> Jet {
    match op {
        RingOp::Add => f + g,
        RingOp::Sub => f - g,
        RingOp::Mul => f * g,
    }
}

pub fn jet_compose(f: &Jet, g: &Jet) -> Result<Jet> {
    f.compose(g)
}

pub fn jet_comp_inverse(f: &Jet) -> Result<Jet> {
    f.comp_inverse()
}

pub fn jet_mul_inverse(f: &Jet) -> Result<Jet> {
    f.mul_inverse()
}

pub fn jet_derivative(f: &Jet) -> Jet {
    f.derivative()
}

pub fn jet_rational_power(f: &Jet, r: &Rational) -> Result<Jet> {
    f.rational_power(r)
}
