//! Polynomial differential forms in up to four variables x, y, z, w with
//! exact scalar coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::cyclotomic::{CycloElem, Rational, Scalar};
use crate::error::{Error, Result};
use crate::expr::{eval_scalar, parse, Env, Expr};

pub const VARS: [&str; 4] = ["x", "y", "z", "w"];
pub const MAX_DEGREE: u32 = 64;

pub type Exps = [u16; 4];

/// A polynomial in `nvars` variables; no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exps, Scalar>,
}

fn check_nvars(nvars: usize) -> Result<()> {
    if !(1..=4).contains(&nvars) {
        return Err(Error::usage(format!("between 1 and 4 variables supported, got {nvars}")));
    }
    Ok(())
}

fn total(e: &Exps) -> u32 {
    e.iter().map(|&x| x as u32).sum()
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar, nvars: usize) -> Self {
        MultiPoly::monomial(c, [0; 4], nvars)
    }

    pub fn one(nvars: usize) -> Self {
        MultiPoly::constant(CycloElem::one(1), nvars)
    }

    /// x_i, 0-based.
    pub fn var(i: usize, nvars: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        MultiPoly::monomial(CycloElem::one(1), e, nvars)
    }

    pub fn monomial(c: Scalar, exps: Exps, nvars: usize) -> Self {
        let mut p = MultiPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exps, Scalar)>>(nvars: usize, terms: I) -> Self {
        let mut p = MultiPoly::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exps, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exps) -> Scalar {
        self.terms.get(e).cloned().unwrap_or_else(|| CycloElem::zero(1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(total).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(total).min()
    }

    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| total(e) == d)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> MultiPoly {
        MultiPoly::from_terms(self.nvars, self.terms.iter().map(|(e, v)| (*e, v * c)))
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut r = MultiPoly::one(self.nvars);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> MultiPoly {
        let mut p = MultiPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                p.add_term(f, c.scale(&Rational::from(e[i] as i64)));
            }
        }
        p
    }

    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let mut acc = CycloElem::zero(1);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate() {
                if e[i] > 0 {
                    t = t * x.pow(e[i] as i64)?;
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// p(map_1, …, map_n): the i-th variable replaced by `map[i]`.
    pub fn substitute(&self, map: &[MultiPoly]) -> Result<MultiPoly> {
        if map.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: map.len(),
            });
        }
        let out_vars = map.iter().map(|m| m.nvars).max().unwrap_or(self.nvars);
        let mut powers: Vec<Vec<MultiPoly>> = map.iter().map(|m| vec![MultiPoly::one(m.nvars)]).collect();
        let mut acc = MultiPoly::zero(out_vars);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(c.clone(), out_vars);
            for i in 0..self.nvars {
                let k = e[i] as usize;
                while powers[i].len() <= k {
                    let next = &powers[i][powers[i].len() - 1] * &map[i];
                    powers[i].push(next);
                }
                if k > 0 {
                    t = &t * &powers[i][k];
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Largest m with x_i^m dividing every term (0 for the zero polynomial).
    pub fn var_valuation(&self, i: usize) -> u16 {
        self.terms.keys().map(|e| e[i]).min().unwrap_or(0)
    }

    fn shift_down(&self, i: usize, m: u16) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut f = *e;
                    f[i] -= m;
                    (f, c.clone())
                })
                .collect(),
        }
    }

    /// Sets x_i = value.
    pub fn specialize(&self, i: usize, value: &Scalar) -> MultiPoly {
        let mut p = MultiPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut f = *e;
            let k = f[i];
            f[i] = 0;
            p.add_term(f, c * &value.pow(k as i64).expect("nonnegative power"));
        }
        p
    }

    /// Writes the polynomial as content · monomial · rest, e.g. "2*x*(y^2+z^2)".
    pub fn factored_string(&self) -> String {
        if self.terms.len() <= 1 {
            return self.to_string();
        }
        let mut mono = [u16::MAX; 4];
        for e in self.terms.keys() {
            for i in 0..4 {
                mono[i] = mono[i].min(e[i]);
            }
        }
        let content = self.rational_content();
        let inv = content.inv().expect("content is nonzero");
        let rest = MultiPoly::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| {
                let mut f = *e;
                for i in 0..4 {
                    f[i] -= mono[i];
                }
                (f, c.scale(&inv))
            }),
        );
        let mut parts = Vec::new();
        if !content.is_one() {
            parts.push(content.to_string());
        }
        let m = MultiPoly::monomial(CycloElem::one(1), mono, self.nvars);
        if mono != [0; 4] {
            parts.push(m.to_string());
        }
        parts.push(format!("({rest})"));
        parts.join("*")
    }

    /// gcd of numerators over lcm of denominators when every coefficient is
    /// rational, else 1.
    fn rational_content(&self) -> Rational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            match c.as_rational() {
                Some(q) => {
                    num = num.gcd(q.numer());
                    den = den.lcm(q.denom());
                }
                None => return Rational::one(),
            }
        }
        Rational::from(num_rational::BigRational::new(num, den))
    }

    fn widen(&self, nvars: usize) -> MultiPoly {
        MultiPoly {
            nvars: nvars.max(self.nvars),
            terms: self.terms.clone(),
        }
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut p = self.widen(rhs.nvars);
        for (e, c) in &rhs.terms {
            p.add_term(*e, c.clone());
        }
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut p = self.widen(rhs.nvars);
        for (e, c) in &rhs.terms {
            p.add_term(*e, -c.clone());
        }
        p
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut p = MultiPoly::zero(self.nvars.max(rhs.nvars));
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                p.add_term(e, x * y);
            }
        }
        p
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

fn coeff_text(c: &Scalar) -> (bool, String) {
    match c.as_rational() {
        Some(q) if q.is_negative() => (true, q.abs().to_string()),
        Some(q) => (false, q.to_string()),
        None => (false, c.to_expr_string()),
    }
}

impl fmt::Display for MultiPoly {
    /// Terms by descending degree, then descending exponents; no spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<(&Exps, &Scalar)> = self.terms.iter().collect();
        order.sort_by(|a, b| total(b.0).cmp(&total(a.0)).then(b.0.cmp(a.0)));
        for (n, (e, c)) in order.into_iter().enumerate() {
            let (neg, text) = coeff_text(c);
            if neg {
                write!(f, "-")?;
            } else if n > 0 {
                write!(f, "+")?;
            }
            let mut factors = Vec::new();
            if text != "1" || *e == [0; 4] {
                factors.push(text);
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(VARS[i].to_string()),
                    _ => factors.push(format!("{}^{}", VARS[i], k)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A homogeneous-degree differential form Σ a_I dx_I with I strictly
/// increasing. Degree 0 forms are polynomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Form {
    nvars: usize,
    degree: usize,
    terms: BTreeMap<Vec<u8>, MultiPoly>,
}

pub type PForm1 = Form;
pub type PForm2 = Form;
pub type PForm3 = Form;

/// Sign of the permutation sorting `idx`, or None on a repeated index.
fn sort_sign(idx: &mut [u8]) -> Option<i8> {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in 0..idx.len() - 1 - i {
            if idx[j] == idx[j + 1] {
                return None;
            }
            if idx[j] > idx[j + 1] {
                idx.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

impl Form {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        Form {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let mut f = Form::zero(p.nvars, 0);
        f.add_term(vec![], p);
        f
    }

    /// dx_i.
    pub fn basis(i: usize, nvars: usize) -> Self {
        Form::basis_multi(&[i as u8], nvars)
    }

    /// dx_{i1} ∧ … ∧ dx_{ip}, in the given order.
    pub fn basis_multi(idx: &[u8], nvars: usize) -> Self {
        let mut f = Form::zero(nvars, idx.len());
        let mut sorted = idx.to_vec();
        if let Some(s) = sort_sign(&mut sorted) {
            f.add_term(sorted, MultiPoly::constant(CycloElem::from_int(s as i64), nvars));
        }
        f
    }

    /// Σ coeffs[i] dx_i.
    pub fn one_form(coeffs: Vec<MultiPoly>) -> Result<Self> {
        let nvars = coeffs.len();
        check_nvars(nvars)?;
        let mut f = Form::zero(nvars, 1);
        for (i, c) in coeffs.into_iter().enumerate() {
            if c.nvars > nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: c.nvars,
                });
            }
            f.add_term(vec![i as u8], c.widen(nvars));
        }
        Ok(f)
    }

    fn add_term(&mut self, idx: Vec<u8>, p: MultiPoly) {
        if p.is_zero() {
            return;
        }
        let p = p.widen(self.nvars);
        match self.terms.remove(&idx) {
            Some(old) => {
                let s = &old + &p;
                if !s.is_zero() {
                    self.terms.insert(idx, s);
                }
            }
            None => {
                self.terms.insert(idx, p);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of dx_I for strictly increasing I.
    pub fn coeff(&self, idx: &[u8]) -> MultiPoly {
        self.terms
            .get(idx)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(self.nvars))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &MultiPoly)> {
        self.terms.iter()
    }

    /// The 0-form as a polynomial.
    pub fn as_poly(&self) -> Option<MultiPoly> {
        (self.degree == 0).then(|| self.coeff(&[]))
    }

    pub fn mul_poly(&self, p: &MultiPoly) -> Form {
        let mut f = Form::zero(self.nvars.max(p.nvars), self.degree);
        for (idx, c) in &self.terms {
            f.add_term(idx.clone(), c * p);
        }
        f
    }

    pub fn scale(&self, c: &Scalar) -> Form {
        self.mul_poly(&MultiPoly::constant(c.clone(), self.nvars))
    }

    fn combine(&self, other: &Form, sign: i64) -> Result<Form> {
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::usage(format!(
                "cannot add a {}-form and a {}-form",
                self.degree, other.degree
            )));
        }
        let degree = if self.is_zero() { other.degree } else { self.degree };
        let mut f = Form::zero(self.nvars.max(other.nvars), degree);
        for (idx, c) in &self.terms {
            f.add_term(idx.clone(), c.clone());
        }
        for (idx, c) in &other.terms {
            f.add_term(idx.clone(), if sign < 0 { -c } else { c.clone() });
        }
        Ok(f)
    }

    pub fn try_add(&self, other: &Form) -> Result<Form> {
        self.combine(other, 1)
    }

    pub fn try_sub(&self, other: &Form) -> Result<Form> {
        self.combine(other, -1)
    }

    /// The part whose coefficients are homogeneous of degree d.
    pub fn homogeneous_part(&self, d: u32) -> Form {
        let mut f = Form::zero(self.nvars, self.degree);
        for (idx, c) in &self.terms {
            f.add_term(idx.clone(), c.homogeneous_part(d));
        }
        f
    }

    pub fn min_coeff_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(MultiPoly::min_degree).min()
    }

    pub fn eval(&self, point: &[Scalar]) -> Result<BTreeMap<Vec<u8>, Scalar>> {
        let mut out = BTreeMap::new();
        for (idx, c) in &self.terms {
            let v = c.eval(point)?;
            if !v.is_zero() {
                out.insert(idx.clone(), v);
            }
        }
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        Ok(out)
    }

    fn label(idx: &[u8]) -> String {
        idx.iter()
            .map(|&i| format!("d{}", VARS[i as usize]))
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(idx, c)| {
                if idx.is_empty() {
                    c.to_string()
                } else {
                    format!("({})*{}", c, Form::label(idx))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.terms.len()))?;
        for (idx, c) in &self.terms {
            let key = if idx.is_empty() { "1".to_string() } else { Form::label(idx) };
            m.serialize_entry(&key, c)?;
        }
        m.end()
    }
}

fn same_vars(a: &Form, b: &Form) -> Result<()> {
    if a.nvars != b.nvars {
        return Err(Error::DimensionMismatch {
            expected: a.nvars,
            found: b.nvars,
        });
    }
    Ok(())
}

pub fn wedge(u: &Form, v: &Form) -> Result<Form> {
    same_vars(u, v)?;
    let mut f = Form::zero(u.nvars, u.degree + v.degree);
    for (i, a) in &u.terms {
        for (j, b) in &v.terms {
            let mut idx: Vec<u8> = i.iter().chain(j.iter()).copied().collect();
            if let Some(s) = sort_sign(&mut idx) {
                let c = a * b;
                f.add_term(idx, if s < 0 { -&c } else { c });
            }
        }
    }
    Ok(f)
}

pub fn exterior_d(form: &Form) -> Form {
    let mut f = Form::zero(form.nvars, form.degree + 1);
    for (idx, c) in &form.terms {
        for i in 0..form.nvars {
            if idx.contains(&(i as u8)) {
                continue;
            }
            let dc = c.derivative(i);
            if dc.is_zero() {
                continue;
            }
            let before = idx.iter().filter(|&&j| (j as usize) < i).count();
            let mut new_idx = idx.clone();
            new_idx.insert(before, i as u8);
            f.add_term(new_idx, if before % 2 == 1 { -&dc } else { dc });
        }
    }
    f
}

/// dp for a polynomial p.
pub fn differential(p: &MultiPoly) -> Form {
    exterior_d(&Form::from_poly(p.clone()))
}

fn need_one_form(w: &Form, op: &str) -> Result<()> {
    if w.degree != 1 {
        return Err(Error::usage(format!("{op} expects a 1-form, got a {}-form", w.degree)));
    }
    Ok(())
}

/// ω ∧ dω = 0.
pub fn integrability_check(w: &Form) -> Result<bool> {
    need_one_form(w, "integrability_check")?;
    Ok(wedge(w, &exterior_d(w))?.is_zero())
}

/// Σ x_i a_i: the contraction of ω with the radial field.
pub fn radial_contraction(w: &Form) -> Result<MultiPoly> {
    need_one_form(w, "radial_contraction")?;
    let mut p = MultiPoly::zero(w.nvars);
    for (idx, c) in &w.terms {
        p = &p + &(c * &MultiPoly::var(idx[0] as usize, w.nvars));
    }
    Ok(p)
}

/// (ν, ω_ν): the lowest total degree among coefficients and that part.
pub fn lowest_jet(w: &Form) -> Result<(u32, Form)> {
    let nu = w
        .min_coeff_degree()
        .ok_or_else(|| Error::domain("lowest_jet of the zero form"))?;
    Ok((nu, w.homogeneous_part(nu)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TangentCone {
    pub nu: u32,
    pub dicritical: bool,
    pub cone: Option<MultiPoly>,
}

/// P = radial contraction of ω_ν; dicritical iff P ≡ 0.
pub fn tangent_cone(w: &Form) -> Result<TangentCone> {
    let (nu, jet) = lowest_jet(w)?;
    let p = radial_contraction(&jet)?;
    let dicritical = p.is_zero();
    Ok(TangentCone {
        nu,
        dicritical,
        cone: (!dicritical).then_some(p),
    })
}

/// φ*ω where `map[i]` gives the old coordinate x_i in the new coordinates.
pub fn pullback(form: &Form, map: &[MultiPoly]) -> Result<Form> {
    if map.len() != form.nvars {
        return Err(Error::DimensionMismatch {
            expected: form.nvars,
            found: map.len(),
        });
    }
    let nvars = map.iter().map(MultiPoly::nvars).max().unwrap_or(form.nvars);
    let dmaps: Vec<Form> = map
        .iter()
        .map(|m| exterior_d(&Form::from_poly(m.widen(nvars))))
        .collect();
    let mut f = Form::zero(nvars, form.degree);
    for (idx, c) in &form.terms {
        let mut t = Form::from_poly(c.substitute(map)?.widen(nvars));
        for &i in idx {
            t = wedge(&t, &dmaps[i as usize])?;
        }
        f = f.try_add(&t)?;
    }
    Ok(f)
}

/// The chart substitution x_j = x_c·u_j (j ≠ c), with u_j in slot j.
pub fn chart_map(nvars: usize, chart: usize) -> Vec<MultiPoly> {
    (0..nvars)
        .map(|j| {
            if j == chart {
                MultiPoly::var(chart, nvars)
            } else {
                &MultiPoly::var(chart, nvars) * &MultiPoly::var(j, nvars)
            }
        })
        .collect()
}

/// (m, π*ω / x_c^m) with m maximal.
pub fn blowup_chart_pullback(w: &Form, chart: usize) -> Result<(u16, Form)> {
    if chart >= w.nvars {
        return Err(Error::InvalidIndex {
            index: chart,
            count: w.nvars,
        });
    }
    if w.is_zero() {
        return Err(Error::domain("pullback of the zero form"));
    }
    let full = pullback(w, &chart_map(w.nvars, chart))?;
    let m = full.terms.values().map(|c| c.var_valuation(chart)).min().unwrap_or(0);
    let mut reduced = Form::zero(full.nvars, full.degree);
    for (idx, c) in &full.terms {
        reduced.add_term(idx.clone(), c.shift_down(chart, m));
    }
    Ok((m, reduced))
}

/// The dx_c coefficient of the reduced pullback restricted to x_c = 0 equals
/// the cone with x_c = 1 (nondicritical case).
pub fn cone_matches_pullback(w: &Form, chart: usize) -> Result<bool> {
    let cone = tangent_cone(w)?;
    let (m, reduced) = blowup_chart_pullback(w, chart)?;
    let zero = CycloElem::zero(1);
    let one = CycloElem::one(1);
    match cone.cone {
        Some(p) => {
            let restricted = reduced.coeff(&[chart as u8]).specialize(chart, &zero);
            Ok(m as u32 == cone.nu && restricted == p.specialize(chart, &one))
        }
        None => Ok(m as u32 == cone.nu + 1),
    }
}

/// ω(q) = 0 and dω(q) ≠ 0.
pub fn kupka_test(w: &Form, q: &[Scalar]) -> Result<bool> {
    if q.len() != w.nvars {
        return Err(Error::DimensionMismatch {
            expected: w.nvars,
            found: q.len(),
        });
    }
    Ok(w.eval(q)?.is_empty() && !exterior_d(w).eval(q)?.is_empty())
}

/// df ∧ ω = 0.
pub fn first_integral_check(w: &Form, f: &MultiPoly) -> Result<bool> {
    let df = exterior_d(&Form::from_poly(f.widen(w.nvars)));
    Ok(wedge(&df, w)?.is_zero())
}

/// ω ∧ (Q dP − P dQ) = 0, i.e. P/Q is a first integral.
pub fn meromorphic_first_integral_check(w: &Form, p: &MultiPoly, q: &MultiPoly) -> Result<bool> {
    if q.is_zero() {
        return Err(Error::domain("meromorphic first integral with zero denominator"));
    }
    let n = w.nvars;
    let dp = differential(&p.widen(n));
    let dq = differential(&q.widen(n));
    let inner = dp.mul_poly(&q.widen(n)).try_sub(&dq.mul_poly(&p.widen(n)))?;
    Ok(wedge(w, &inner)?.is_zero())
}

/// Mixed-degree values produced while evaluating a form expression.
#[derive(Clone)]
struct Mixed {
    nvars: usize,
    parts: BTreeMap<usize, Form>,
}

impl Mixed {
    fn from_form(f: Form) -> Self {
        let mut parts = BTreeMap::new();
        let nvars = f.nvars;
        if !f.is_zero() {
            parts.insert(f.degree, f);
        }
        Mixed { nvars, parts }
    }

    fn scalar(c: Scalar, nvars: usize) -> Self {
        Mixed::from_form(Form::from_poly(MultiPoly::constant(c, nvars)))
    }

    fn add(&self, o: &Mixed, sign: i64) -> Result<Mixed> {
        let mut parts = self.parts.clone();
        for (d, f) in &o.parts {
            let cur = parts.remove(d).unwrap_or_else(|| Form::zero(self.nvars, *d));
            let s = if sign < 0 { cur.try_sub(f)? } else { cur.try_add(f)? };
            if !s.is_zero() {
                parts.insert(*d, s);
            }
        }
        Ok(Mixed {
            nvars: self.nvars,
            parts,
        })
    }

    fn mul(&self, o: &Mixed) -> Result<Mixed> {
        let mut acc = Mixed {
            nvars: self.nvars,
            parts: BTreeMap::new(),
        };
        for a in self.parts.values() {
            for b in o.parts.values() {
                acc = acc.add(&Mixed::from_form(wedge(a, b)?), 1)?;
            }
        }
        Ok(acc)
    }

    fn as_constant(&self) -> Option<Scalar> {
        match self.parts.len() {
            0 => Some(CycloElem::zero(1)),
            1 => {
                let p = self.parts.get(&0)?.as_poly()?;
                match p.degree() {
                    Some(0) => Some(p.coeff(&[0; 4])),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn as_poly(&self) -> Option<MultiPoly> {
        match self.parts.len() {
            0 => Some(MultiPoly::zero(self.nvars)),
            1 => self.parts.get(&0)?.as_poly(),
            _ => None,
        }
    }
}

fn eval_mixed(e: &Expr, env: &Env, nvars: usize) -> Result<Mixed> {
    let var_index = |name: &str| VARS[..nvars].iter().position(|v| *v == name);
    Ok(match e {
        Expr::Var(name) => {
            if let Some(i) = var_index(name) {
                Mixed::from_form(Form::from_poly(MultiPoly::var(i, nvars)))
            } else if let Some(i) = name.strip_prefix('d').and_then(var_index) {
                Mixed::from_form(Form::basis(i, nvars))
            } else {
                Mixed::scalar(eval_scalar(e, env)?, nvars)
            }
        }
        Expr::Num(_) | Expr::Call(..) => Mixed::scalar(eval_scalar(e, env)?, nvars),
        Expr::Neg(a) => Mixed::scalar(CycloElem::zero(1), nvars).add(&eval_mixed(a, env, nvars)?, -1)?,
        Expr::Add(a, b) => eval_mixed(a, env, nvars)?.add(&eval_mixed(b, env, nvars)?, 1)?,
        Expr::Sub(a, b) => eval_mixed(a, env, nvars)?.add(&eval_mixed(b, env, nvars)?, -1)?,
        Expr::Mul(a, b) => eval_mixed(a, env, nvars)?.mul(&eval_mixed(b, env, nvars)?)?,
        Expr::Div(a, b) => {
            let c = eval_mixed(b, env, nvars)?
                .as_constant()
                .ok_or_else(|| Error::domain("can only divide by a constant"))?;
            let inv = Mixed::scalar(c.inv()?, nvars);
            eval_mixed(a, env, nvars)?.mul(&inv)?
        }
        Expr::Pow(a, k) => {
            let base = eval_mixed(a, env, nvars)?;
            if *k < 0 {
                let c = base
                    .as_constant()
                    .ok_or_else(|| Error::domain("negative powers need a constant base"))?;
                Mixed::scalar(c.pow(*k)?, nvars)
            } else {
                let p = base
                    .as_poly()
                    .ok_or_else(|| Error::domain("powers of forms are not supported"))?;
                if p.degree().unwrap_or(0) as i64 * *k > MAX_DEGREE as i64 {
                    return Err(Error::domain(format!("degree exceeds {MAX_DEGREE}")));
                }
                Mixed::from_form(Form::from_poly(p.pow(*k as u32)))
            }
        }
    })
}

/// Parses a polynomial in x, y, z, w (the first `nvars` of them).
pub fn parse_poly(src: &str, env: &Env, nvars: usize) -> Result<MultiPoly> {
    check_nvars(nvars)?;
    eval_mixed(&parse(src)?, env, nvars)?
        .as_poly()
        .ok_or_else(|| Error::domain("expected a polynomial, found differentials"))
}

/// Parses a `degree`-form such as "P*dx + Q*dy"; products of differentials
/// are wedges.
pub fn parse_form(src: &str, env: &Env, nvars: usize, degree: usize) -> Result<Form> {
    check_nvars(nvars)?;
    let m = eval_mixed(&parse(src)?, env, nvars)?;
    match m.parts.len() {
        0 => Ok(Form::zero(nvars, degree)),
        1 if m.parts.contains_key(&degree) => Ok(m.parts[&degree].clone()),
        _ => Err(Error::domain(format!(
            "expected a {degree}-form, found degrees {:?}",
            m.parts.keys().collect::<Vec<_>>()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3(s: &str) -> MultiPoly {
        parse_poly(s, &Env::new(), 3).unwrap()
    }

    fn f3(s: &str) -> Form {
        parse_form(s, &Env::new(), 3, 1).unwrap()
    }

    #[test]
    fn d_examples() {
        assert!(differential(&p3("7")).is_zero());
        assert_eq!(differential(&p3("x*y")), f3("y*dx + x*dy"));
        let p = p3("x^3*y - 4*z^2*y + x*z");
        assert!(exterior_d(&differential(&p)).is_zero());
    }

    #[test]
    fn wedge_examples() {
        let u = f3("y*dx + z^2*dz");
        assert!(wedge(&u, &u).unwrap().is_zero());
        let dxdy = wedge(&Form::basis(0, 3), &Form::basis(1, 3)).unwrap();
        assert_eq!(dxdy, Form::basis_multi(&[0, 1], 3));
        assert_eq!(
            wedge(&Form::basis(1, 3), &Form::basis(0, 3)).unwrap(),
            Form::basis_multi(&[1, 0], 3)
        );
        assert_eq!(parse_form("dy*dx", &Env::new(), 3, 2).unwrap().coeff(&[0, 1]), p3("-1"));
    }

    #[test]
    fn integrability_examples() {
        assert!(integrability_check(&differential(&p3("x*y*z + y^3"))).unwrap());
        assert!(!integrability_check(&f3("y*dx + x*z*dy + dz")).unwrap());
    }

    #[test]
    fn radial_and_jet() {
        let f = p3("x^2*y + z^3");
        assert_eq!(radial_contraction(&differential(&f)).unwrap(), f.scale(&CycloElem::from_int(3)));
        let two = parse_form("y*dx - x*dy", &Env::new(), 2, 1).unwrap();
        assert!(radial_contraction(&two).unwrap().is_zero());
        assert!(tangent_cone(&two).unwrap().dicritical);
        let (nu, j) = lowest_jet(&f3("dx + x*dy")).unwrap();
        assert_eq!((nu, j), (0, f3("dx")));
        assert!(lowest_jet(&Form::zero(3, 1)).is_err());
        let s = p3("x^2 + y^2 + z^2");
        let cone = tangent_cone(&differential(&s)).unwrap();
        assert_eq!(cone.cone, Some(s.scale(&CycloElem::from_int(2))));
    }

    #[test]
    fn pullback_examples() {
        let (m, w) = blowup_chart_pullback(&f3("dx"), 0).unwrap();
        assert_eq!((m, w), (0, f3("dx")));
        let (m, w) = blowup_chart_pullback(&f3("x*dy - y*dx"), 0).unwrap();
        assert_eq!((m, w), (2, f3("dy")));
        assert!(blowup_chart_pullback(&f3("dx"), 3).is_err());
    }

    #[test]
    fn kupka_and_integrals() {
        let morse = differential(&p3("x^2 + y^2 + z^2"));
        let origin = vec![CycloElem::zero(1); 3];
        assert!(!kupka_test(&morse, &origin).unwrap());
        assert!(!kupka_test(&f3("y*dx + x*dy"), &origin).unwrap());
        assert!(kupka_test(&f3("y*dx"), &origin).unwrap());
        assert!(kupka_test(&f3("y*dx"), &origin[..2]).is_err());
        let f = p3("x*y + z");
        assert!(first_integral_check(&differential(&f), &f).unwrap());
        assert!(!first_integral_check(&f3("x*dy"), &p3("x")).unwrap());
        assert!(meromorphic_first_integral_check(&differential(&f), &f, &p3("1")).unwrap());
        assert!(meromorphic_first_integral_check(&differential(&f), &f, &p3("0")).is_err());
    }

    #[test]
    fn display_and_factoring() {
        let p = p3("2*x*y^2 + 2*x*z^2");
        assert_eq!(p.to_string(), "2*x*y^2+2*x*z^2");
        assert_eq!(p.factored_string(), "2*x*(y^2+z^2)");
        assert_eq!(p3("-x + 1/2").to_string(), "-x+1/2");
        assert_eq!(p3("0").to_string(), "0");
        assert!(parse_poly("dx", &Env::new(), 3).is_err());
        assert!(parse_poly("w", &Env::new(), 3).is_err());
    }
}
