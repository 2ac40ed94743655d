//! Exact arithmetic in ℚ and in cyclotomic fields ℚ(ζ_n).
//!
//! Elements are stored in the power basis 1, ζ_n, …, ζ_n^{φ(n)−1} as an
//! integer numerator vector over one positive common denominator. The
//! representation is canonical, so structural equality within a conductor is
//! field equality. Binary operators lift mismatched conductors to their lcm;
//! [`cyclo_arith`] is the strict entry point that refuses to.

mod rational;
mod tables;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use rational::Rational;
pub(crate) use tables::{lift_vec, normalize, tables, FieldTables};
pub use tables::{cyclotomic_polynomial, euler_totient};

use crate::error::{Error, Result};

/// An element of ℚ(ζ_n).
#[derive(Clone)]
pub struct CycloElem {
    conductor: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

/// The scalar type used for every coefficient in the crate.
pub type Scalar = CycloElem;

impl CycloElem {
    pub(crate) fn from_raw(conductor: u32, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        debug_assert_eq!(num.len(), euler_totient(conductor));
        normalize(&mut num, &mut den);
        CycloElem { conductor, num, den }
    }

    pub(crate) fn raw_num(&self) -> &[BigInt] {
        &self.num
    }

    pub(crate) fn raw_den(&self) -> &BigInt {
        &self.den
    }

    pub fn zero(conductor: u32) -> Self {
        let phi = euler_totient(conductor);
        CycloElem {
            conductor,
            num: vec![BigInt::zero(); phi],
            den: BigInt::one(),
        }
    }

    pub fn one(conductor: u32) -> Self {
        Self::from_rational(&Rational::one(), conductor)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from(n), 1)
    }

    /// Embeds q as q·1 in ℚ(ζ_n).
    pub fn from_rational(q: &Rational, conductor: u32) -> Self {
        let mut e = Self::zero(conductor);
        e.num[0] = q.numer().clone();
        e.den = q.denom().clone();
        e
    }

    /// Builds an element from its power-basis coefficients.
    pub fn from_coeffs(conductor: u32, coeffs: &[Rational]) -> Result<Self> {
        let phi = euler_totient(conductor);
        if coeffs.len() != phi {
            return Err(Error::DimensionMismatch {
                expected: phi,
                found: coeffs.len(),
            });
        }
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Ok(Self::from_raw(conductor, num, den))
    }

    /// ζ_n^k for any integer k.
    pub fn zeta_pow(conductor: u32, k: i64) -> Self {
        let t = tables(conductor);
        let e = k.rem_euclid(conductor as i64) as usize;
        let num = t.powers[e].iter().map(|&c| BigInt::from(c)).collect();
        CycloElem {
            conductor,
            num,
            den: BigInt::one(),
        }
    }

    /// The primitive root ζ_n = exp(2πi/n).
    pub fn zeta(conductor: u32) -> Self {
        Self::zeta_pow(conductor, 1)
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    /// Power-basis coefficients as rationals.
    pub fn coeffs(&self) -> Vec<Rational> {
        self.num
            .iter()
            .map(|c| Rational::new(c.clone(), self.den.clone()).unwrap())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational()
            .then(|| Rational::new(self.num[0].clone(), self.den.clone()).unwrap())
    }

    /// Re-expresses the element in ℚ(ζ_m); `m` must be a multiple of the
    /// current conductor.
    pub fn lift(&self, m: u32) -> Result<Self> {
        if m == self.conductor {
            return Ok(self.clone());
        }
        if m == 0 || m % self.conductor != 0 {
            return Err(Error::ConductorMismatch(self.conductor, m));
        }
        let from = tables(self.conductor);
        let to = tables(m);
        Ok(CycloElem {
            conductor: m,
            num: lift_vec(&from, &to, &self.num),
            den: self.den.clone(),
        })
    }

    fn field(&self) -> Arc<FieldTables> {
        tables(self.conductor)
    }

    fn aligned<'a>(
        x: &'a CycloElem,
        y: &'a CycloElem,
    ) -> (std::borrow::Cow<'a, CycloElem>, std::borrow::Cow<'a, CycloElem>) {
        use std::borrow::Cow;
        if x.conductor == y.conductor {
            return (Cow::Borrowed(x), Cow::Borrowed(y));
        }
        let m = common_conductor(x.conductor, y.conductor);
        (
            Cow::Owned(x.lift(m).unwrap()),
            Cow::Owned(y.lift(m).unwrap()),
        )
    }

    fn add_same(&self, other: &Self, negate: bool) -> Self {
        let num = if self.den == other.den {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| if negate { a - b } else { a + b })
                .collect()
        } else {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| {
                    let l = a * &other.den;
                    let r = b * &self.den;
                    if negate {
                        l - r
                    } else {
                        l + r
                    }
                })
                .collect()
        };
        let den = if self.den == other.den {
            self.den.clone()
        } else {
            &self.den * &other.den
        };
        Self::from_raw(self.conductor, num, den)
    }

    fn mul_same(&self, other: &Self) -> Self {
        let num = self.field().mul(&self.num, &other.num);
        Self::from_raw(self.conductor, num, &self.den * &other.den)
    }

    /// Applies the field automorphism ζ_n ↦ ζ_n^k (k coprime to n).
    pub fn galois(&self, k: u32) -> Self {
        let t = self.field();
        Self::from_raw(self.conductor, t.galois(&self.num, k), self.den.clone())
    }

    /// The field norm down to ℚ.
    pub fn norm(&self) -> Rational {
        let t = self.field();
        let mut prod = self.clone();
        for &k in &t.nontrivial_units {
            prod = prod.mul_same(&self.galois(k));
        }
        prod.as_rational().expect("norm lies in ℚ")
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let t = self.field();
        // x⁻¹ = ∏_{σ≠1} σ(x) / N(x)
        let mut co = CycloElem::one(self.conductor);
        for &k in &t.nontrivial_units {
            co = co.mul_same(&self.galois(k));
        }
        let norm = self.mul_same(&co);
        let n = norm.as_rational().expect("norm lies in ℚ");
        Ok(co.scale(&n.inv()?))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let num = self.num.iter().map(|c| c * q.numer()).collect();
        Self::from_raw(self.conductor, num, &self.den * q.denom())
    }

    pub fn pow(&self, exp: i64) -> Result<Self> {
        if exp < 0 {
            return self.inv()?.pow(-exp);
        }
        let mut result = CycloElem::one(self.conductor);
        let mut base = self.clone();
        let mut e = exp as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_same(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_same(&base);
            }
        }
        Ok(result)
    }

    /// Renders the element as an expression over `zeta(n)`, suitable for the
    /// expression parser.
    pub fn to_expr_string(&self) -> String {
        if let Some(q) = self.as_rational() {
            return q.to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs().into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let basis = match i {
                0 => String::new(),
                1 => format!("zeta({})", self.conductor),
                _ => format!("zeta({})^{}", self.conductor, i),
            };
            parts.push(match (i, c.is_one()) {
                (0, _) => c.to_string(),
                (_, true) => basis,
                _ => format!("{c}*{basis}"),
            });
        }
        format!("({})", parts.join(" + ").replace("+ -", "- "))
    }
}

/// Smallest conductor hosting both fields.
pub fn common_conductor(n: u32, m: u32) -> u32 {
    n.lcm(&m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Strict field arithmetic: both operands must already share a conductor.
pub fn cyclo_arith(op: ArithOp, x: &CycloElem, y: &CycloElem) -> Result<CycloElem> {
    if x.conductor != y.conductor {
        return Err(Error::ConductorMismatch(x.conductor, y.conductor));
    }
    Ok(match op {
        ArithOp::Add => x.add_same(y, false),
        ArithOp::Sub => x.add_same(y, true),
        ArithOp::Mul => x.mul_same(y),
        ArithOp::Div => x.mul_same(&y.inv()?),
    })
}

pub fn cyclo_embed(q: &Rational, conductor: u32) -> CycloElem {
    CycloElem::from_rational(q, conductor)
}

/// Multiplicative order of `x` if it is a root of unity.
///
/// The roots of unity of ℚ(ζ_n) are exactly ±ζ_n^k, so `x` is compared with
/// those 2n candidates.
pub fn root_of_unity_order(x: &CycloElem) -> Option<u64> {
    if !x.den.is_one() {
        return None;
    }
    let n = x.conductor as u64;
    let t = x.field();
    for k in 0..n {
        let cand = &t.powers[k as usize];
        let plus = x.num.iter().zip(cand).all(|(a, &b)| *a == BigInt::from(b));
        let minus = x.num.iter().zip(cand).all(|(a, &b)| *a == BigInt::from(-b));
        // ±ζ_n^k = ζ_{2n}^j with j = 2k (plus) or 2k + n (minus)
        let j = if plus {
            2 * k
        } else if minus {
            2 * k + n
        } else {
            continue;
        };
        let two_n = 2 * n;
        return Some(two_n / two_n.gcd(&(j % two_n)));
    }
    None
}

/// Outcome of factoring a multiplier order as a prime power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimePowerOrder {
    /// m = 1: the multiplier is 1 (tangent to the identity, s = 0).
    Flat,
    PrimePower { p: u64, s: u32 },
}

impl PrimePowerOrder {
    pub fn exponent(&self) -> u32 {
        match self {
            PrimePowerOrder::Flat => 0,
            PrimePowerOrder::PrimePower { s, .. } => *s,
        }
    }
}

/// Writes m = p^s; `None` when m has two or more distinct prime factors.
pub fn prime_power_order(m: u64) -> Option<PrimePowerOrder> {
    assert!(m >= 1, "prime_power_order: m must be positive");
    if m == 1 {
        return Some(PrimePowerOrder::Flat);
    }
    let p = smallest_prime_factor(m);
    let mut rest = m;
    let mut s = 0;
    while rest % p == 0 {
        rest /= p;
        s += 1;
    }
    (rest == 1).then_some(PrimePowerOrder::PrimePower { p, s })
}

/// Number of distinct prime factors.
pub fn distinct_prime_factors(mut m: u64) -> usize {
    let mut count = 0;
    while m > 1 {
        let p = smallest_prime_factor(m);
        count += 1;
        while m % p == 0 {
            m /= p;
        }
    }
    count
}

fn smallest_prime_factor(m: u64) -> u64 {
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            return p;
        }
        p += 1;
    }
    m
}

/// A root of unity ζ_m^k satisfying a set of relations.
#[derive(Debug, Clone)]
pub struct RootSolution {
    pub k: u32,
    pub value: CycloElem,
}

/// Enumerates ζ_m^k, 0 ≤ k < m, in ℚ(ζ_m) and keeps those accepted by
/// `relation`. An evaluation error (say a vanishing denominator) rejects the
/// candidate.
pub fn solve_root_constraints<F>(m: u32, relation: F) -> Vec<RootSolution>
where
    F: Fn(&CycloElem) -> Result<bool>,
{
    (0..m)
        .filter_map(|k| {
            let value = CycloElem::zeta_pow(m, k as i64);
            matches!(relation(&value), Ok(true)).then_some(RootSolution { k, value })
        })
        .collect()
}

impl PartialEq for CycloElem {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.den == other.den && self.num == other.num;
        }
        let (a, b) = CycloElem::aligned(self, other);
        a.den == b.den && a.num == b.num
    }
}

impl Eq for CycloElem {}

impl fmt::Debug for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conductor == 1 {
            return write!(f, "{}", self.coeffs()[0]);
        }
        let cs: Vec<String> = self.coeffs().iter().map(|c| c.to_string()).collect();
        write!(f, "cyclo({})[{}]", self.conductor, cs.join(","))
    }
}

impl FromStr for CycloElem {
    type Err = Error;

    /// Parses `"p/q"` (conductor 1) or `"cyclo(n)[c0,c1,...]"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(rest) = s.strip_prefix("cyclo(") else {
            let q: Rational = s.parse()?;
            return Ok(CycloElem::from_rational(&q, 1));
        };
        let (n, rest) = rest
            .split_once(')')
            .ok_or_else(|| Error::parse(0, format!("missing ')' in {s:?}")))?;
        let n: u32 = n
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::parse(6, format!("bad conductor in {s:?}")))?;
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::parse(0, format!("expected [..] in {s:?}")))?;
        let coeffs = body
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Rational>>>()?;
        CycloElem::from_coeffs(n, &coeffs)
    }
}

impl Serialize for CycloElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CycloElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&CycloElem> for &CycloElem {
            type Output = CycloElem;
            fn $method(self, rhs: &CycloElem) -> CycloElem {
                let (a, b) = CycloElem::aligned(self, rhs);
                $body(&*a, &*b)
            }
        }
        impl $trait<CycloElem> for CycloElem {
            type Output = CycloElem;
            fn $method(self, rhs: CycloElem) -> CycloElem {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&CycloElem> for CycloElem {
            type Output = CycloElem;
            fn $method(self, rhs: &CycloElem) -> CycloElem {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<CycloElem> for &CycloElem {
            type Output = CycloElem;
            fn $method(self, rhs: CycloElem) -> CycloElem {
                $trait::$method(self, &rhs)
            }
        }
    };
}

scalar_binop!(Add, add, |a: &CycloElem, b: &CycloElem| a.add_same(b, false));
scalar_binop!(Sub, sub, |a: &CycloElem, b: &CycloElem| a.add_same(b, true));
scalar_binop!(Mul, mul, |a: &CycloElem, b: &CycloElem| a.mul_same(b));
scalar_binop!(Div, div, |a: &CycloElem, b: &CycloElem| a
    .checked_div(b)
    .expect("division by zero scalar"));

impl Neg for &CycloElem {
    type Output = CycloElem;
    fn neg(self) -> CycloElem {
        CycloElem {
            conductor: self.conductor,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycloElem {
    type Output = CycloElem;
    fn neg(self) -> CycloElem {
        -&self
    }
}

impl From<Rational> for CycloElem {
    fn from(q: Rational) -> Self {
        CycloElem::from_rational(&q, 1)
    }
}

impl From<i64> for CycloElem {
    fn from(n: i64) -> Self {
        CycloElem::from_int(n)
    }
}
