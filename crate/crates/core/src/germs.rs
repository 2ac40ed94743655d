//! Germs of diffeomorphisms of (ℂ, 0) at a fixed truncation order, and words
//! over a list of generators.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclotomic::{CycloElem, Scalar};
use crate::error::{Error, Result};
use crate::jets::Jet;

/// A jet with zero constant term and invertible linear coefficient. All
/// equalities between germs hold modulo z^{N+1}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Germ(Jet);

impl Germ {
    pub fn new(jet: Jet) -> Result<Self> {
        if jet.order() == 0 {
            return Err(Error::domain("a germ needs order at least 1"));
        }
        if !jet.coeff(0).is_zero() {
            return Err(Error::domain("a germ must fix the origin (zero constant term)"));
        }
        if jet.coeff(1).is_zero() {
            return Err(Error::domain("a germ must have a nonzero linear coefficient"));
        }
        Ok(Germ(jet))
    }

    pub fn identity(order: usize, conductor: u32) -> Self {
        Germ(Jet::identity(order, conductor))
    }

    /// The rotation z ↦ μz.
    pub fn linear(mu: &Scalar, order: usize) -> Result<Self> {
        Germ::new(Jet::monomial(mu, 1, order))
    }

    pub fn jet(&self) -> &Jet {
        &self.0
    }

    pub fn into_jet(self) -> Jet {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn conductor(&self) -> u32 {
        self.0.conductor()
    }

    pub fn lift(&self, m: u32) -> Result<Self> {
        Ok(Germ(self.0.lift(m)?))
    }

    pub fn multiplier(&self) -> Scalar {
        self.0.coeff(1)
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.0.coeff(i)
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Germ) -> Result<Germ> {
        Ok(Germ(self.0.compose(&other.0)?))
    }

    pub fn inverse(&self) -> Germ {
        Germ(self.0.comp_inverse().expect("germs are invertible"))
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Jet::identity(self.order(), self.conductor())
    }

    /// True when the germ equals μz modulo z^{N+1}.
    pub fn is_linear(&self) -> bool {
        self.is_linear_to(self.order())
    }

    /// True when every coefficient of z^2 … z^k vanishes.
    pub fn is_linear_to(&self, k: usize) -> bool {
        (2..=k.min(self.order())).all(|i| self.0.coeff(i).is_zero())
    }
}

impl fmt::Display for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Germ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// One letter of a word: generator `index` (1-based) raised to ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub index: usize,
    pub exp: i8,
}

impl Letter {
    pub fn new(index: usize, exp: i8) -> Self {
        Letter { index, exp }
    }

    pub fn inverse(self) -> Self {
        Letter {
            index: self.index,
            exp: -self.exp,
        }
    }
}

/// A word over the generators, evaluated left to right as a composition:
/// `[(1,+1), (5,+1)]` is f_1 ∘ f_5.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn from_pairs(pairs: &[(usize, i8)]) -> Self {
        Word {
            letters: pairs.iter().map(|&(i, e)| Letter::new(i, e)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn validate(&self, count: usize) -> Result<()> {
        for l in &self.letters {
            if l.index == 0 || l.index > count {
                return Err(Error::InvalidIndex {
                    index: l.index,
                    count,
                });
            }
            if l.exp != 1 && l.exp != -1 {
                return Err(Error::usage(format!("letter exponent must be ±1, got {}", l.exp)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "id");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| {
                if l.exp == 1 {
                    format!("f{}", l.index)
                } else {
                    format!("f{}^-1", l.index)
                }
            })
            .collect();
        write!(f, "{}", parts.join("∘"))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(usize, i8)> = self.letters.iter().map(|l| (l.index, l.exp)).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(usize, i8)>::deserialize(d)?;
        Ok(Word::from_pairs(&pairs))
    }
}

/// f′(0).
pub fn multiplier(f: &Germ) -> Scalar {
    f.multiplier()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TangencyData {
    pub flat: bool,
    /// f = μz + t·z^{k+1} + …
    pub k: Option<usize>,
    pub t: Option<Scalar>,
}

pub fn tangency_data(f: &Germ) -> TangencyData {
    let flat = f.multiplier().is_one();
    let first = (2..=f.order()).find(|&i| !f.coeff(i).is_zero());
    TangencyData {
        flat,
        k: first.map(|i| i - 1),
        t: first.map(|i| f.coeff(i)),
    }
}

/// g ∘ f ∘ g⁻¹.
pub fn conjugate(g: &Germ, f: &Germ) -> Result<Germ> {
    g.compose(f)?.compose(&g.inverse())
}

/// Composes the letters of `w` left to right; the empty word is z.
pub fn evaluate_word(w: &Word, gens: &[Germ]) -> Result<Germ> {
    let first = gens
        .first()
        .ok_or_else(|| Error::usage("evaluate_word needs at least one generator"))?;
    w.validate(gens.len())?;
    let mut inverses: Vec<Option<Germ>> = vec![None; gens.len()];
    let mut acc = Germ::identity(first.order(), first.conductor());
    for l in &w.letters {
        let g = if l.exp == 1 {
            &gens[l.index - 1]
        } else {
            inverses[l.index - 1].get_or_insert_with(|| gens[l.index - 1].inverse())
        };
        acc = acc.compose(g)?;
    }
    Ok(acc)
}

/// The n-fold composite f^{∘n}, by repeated squaring.
pub fn iterate(f: &Germ, n: u64) -> Germ {
    let mut result = Germ::identity(f.order(), f.conductor());
    let mut base = f.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.compose(&base).expect("same order");
        }
        e >>= 1;
        if e > 0 {
            base = base.compose(&base).expect("same order");
        }
    }
    result
}

/// Convenience: the rotation ζ_n^k · z.
pub fn rotation(conductor: u32, k: i64, order: usize) -> Germ {
    Germ::linear(&CycloElem::zeta_pow(conductor, k), order).expect("roots of unity are nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{jet_from_str, Env};

    fn germ(src: &str, env: &Env, order: usize) -> Germ {
        Germ::new(jet_from_str(src, env, order).unwrap()).unwrap()
    }

    #[test]
    fn germ_invariants() {
        assert!(Germ::new(jet_from_str("1 + z", &Env::new(), 3).unwrap()).is_err());
        assert!(Germ::new(jet_from_str("z^2", &Env::new(), 3).unwrap()).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let env = Env::new().with("a", CycloElem::zeta(6)).with("mu", CycloElem::zeta(5));
        assert!(multiplier(&Germ::identity(4, 1)).is_one());
        let f5 = germ("z/(a+z)", &env, 6);
        assert_eq!(multiplier(&f5), CycloElem::zeta(6).inv().unwrap());
        assert_eq!(multiplier(&germ("mu*z + z^2", &env, 4)), CycloElem::zeta(5));
    }

    #[test]
    fn tangency_examples() {
        let env = Env::new().with("a", CycloElem::zeta(6));
        let lin = Germ::linear(&CycloElem::zeta(3), 6).unwrap();
        assert_eq!(
            tangency_data(&lin),
            TangencyData {
                flat: false,
                k: None,
                t: None
            }
        );
        assert!(tangency_data(&Germ::identity(5, 1)).flat);
        let f = germ("z + 5*z^3", &env, 6);
        assert_eq!(
            tangency_data(&f),
            TangencyData {
                flat: true,
                k: Some(2),
                t: Some(CycloElem::from_int(5))
            }
        );
        let f5 = germ("z/(a+z)", &env, 6);
        let ia = CycloElem::zeta(6).inv().unwrap();
        assert_eq!(
            tangency_data(&f5),
            TangencyData {
                flat: false,
                k: Some(1),
                t: Some(-ia.pow(2).unwrap())
            }
        );
    }

    #[test]
    fn conjugate_examples() {
        let env = Env::new();
        let f = germ("2*z + z^2 - z^3", &env, 6);
        assert_eq!(conjugate(&Germ::identity(6, 1), &f).unwrap(), f);
        let h = germ("z + z^2", &env, 3);
        let lin = Germ::linear(&CycloElem::from_int(-1), 3).unwrap();
        assert_eq!(conjugate(&h, &lin).unwrap().multiplier(), CycloElem::from_int(-1));
    }

    #[test]
    fn words() {
        let env = Env::new();
        let gens = vec![germ("z + z^2", &env, 5), germ("2*z", &env, 5)];
        assert_eq!(evaluate_word(&Word::empty(), &gens).unwrap(), Germ::identity(5, 1));
        assert_eq!(evaluate_word(&Word::from_pairs(&[(1, 1)]), &gens).unwrap(), gens[0]);
        let w = Word::from_pairs(&[(1, 1), (2, -1), (1, -1)]);
        let direct = gens[0]
            .compose(&gens[1].inverse())
            .unwrap()
            .compose(&gens[0].inverse())
            .unwrap();
        assert_eq!(evaluate_word(&w, &gens).unwrap(), direct);
        assert_eq!(
            evaluate_word(&Word::from_pairs(&[(3, 1)]), &gens),
            Err(Error::InvalidIndex { index: 3, count: 2 })
        );
        assert_eq!(w.to_string(), "f1∘f2^-1∘f1^-1");
        assert_eq!(serde_json::to_string(&w).unwrap(), "[[1,1],[2,-1],[1,-1]]");
    }

    #[test]
    fn iterate_examples() {
        let env = Env::new();
        let f = germ("z + z^2 + 3*z^4", &env, 8);
        assert_eq!(iterate(&f, 1), f);
        let r = rotation(4, 1, 8);
        assert!(iterate(&r, 4).is_identity());
        let mut by_hand = Germ::identity(8, 1);
        for n in 1..=8u64 {
            by_hand = by_hand.compose(&f).unwrap();
            assert_eq!(iterate(&f, n), by_hand, "n = {n}");
        }
    }

    #[test]
    fn radical_iterate() {
        // f = z/(1 − z²)^{1/2}: f^{∘3} = z/(1 − 3z²)^{1/2}
        let env = Env::new();
        let f = germ("z*pow(1 - z^2, -1/2)", &env, 10);
        let f3 = germ("z*pow(1 - 3*z^2, -1/2)", &env, 10);
        assert_eq!(iterate(&f, 3), f3);
    }
}
