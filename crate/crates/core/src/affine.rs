//! The affine group Aff(ℂ) over exact scalars.

use std::fmt;

use serde::Serialize;

use crate::cyclotomic::{common_conductor, distinct_prime_factors, CycloElem, Scalar};
use crate::error::{Error, Result};
use crate::germs::{Letter, Word};
use crate::search::{breadth_first, Visit};

/// z ↦ linear·z + translation, linear ≠ 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineMap {
    linear: Scalar,
    translation: Scalar,
}

impl AffineMap {
    pub fn new(linear: Scalar, translation: Scalar) -> Result<Self> {
        if linear.is_zero() {
            return Err(Error::domain("affine map with zero linear part"));
        }
        Ok(AffineMap {
            linear,
            translation,
        })
    }

    pub fn identity() -> Self {
        AffineMap {
            linear: CycloElem::one(1),
            translation: CycloElem::zero(1),
        }
    }

    pub fn linear(&self) -> &Scalar {
        &self.linear
    }

    pub fn translation(&self) -> &Scalar {
        &self.translation
    }

    /// (a, b) ∘ (c, d) = (ac, ad + b).
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &self.linear * &other.linear,
            translation: &self.linear * &other.translation + &self.translation,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self.linear.inv().expect("linear part is nonzero");
        AffineMap {
            translation: -(&self.translation * &inv),
            linear: inv,
        }
    }

    pub fn apply(&self, z: &Scalar) -> Scalar {
        &self.linear * z + &self.translation
    }

    fn key(&self, conductor: u32) -> (String, String) {
        (
            self.linear.lift(conductor).unwrap().to_string(),
            self.translation.lift(conductor).unwrap().to_string(),
        )
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z ↦ {}·z + {}", self.linear, self.translation)
    }
}

pub fn affine_compose(f: &AffineMap, g: &AffineMap) -> AffineMap {
    f.compose(g)
}

pub fn affine_inverse(f: &AffineMap) -> AffineMap {
    f.inverse()
}

/// Conjugacy rigidity for Γ = ⟨ηz + β_i⟩ with η a primitive l-th root of
/// unity: the generators are pairwise conjugate in Γ iff l has two distinct
/// prime divisors, or l is a prime power and all β_i coincide.
pub fn lemma_predicate(l: u64, betas: &[Scalar]) -> Result<bool> {
    if l <= 1 {
        return Err(Error::usage(format!("lemma_predicate needs l > 1, got {l}")));
    }
    if distinct_prime_factors(l) >= 2 {
        return Ok(true);
    }
    Ok(betas.windows(2).all(|w| w[0] == w[1]))
}

/// Bounded search for a word h over `gens` with gens[i] ∘ h = h ∘ gens[j]
/// (indices 1-based). `None` only means nothing was found up to `max_len`.
pub fn affine_conjugator_search(
    gens: &[AffineMap],
    i: usize,
    j: usize,
    max_len: usize,
) -> Result<Option<Word>> {
    for &idx in &[i, j] {
        if idx == 0 || idx > gens.len() {
            return Err(Error::InvalidIndex {
                index: idx,
                count: gens.len(),
            });
        }
    }
    let conductor = gens.iter().fold(1, |acc, g| {
        common_conductor(
            acc,
            common_conductor(g.linear.conductor(), g.translation.conductor()),
        )
    });
    let (fi, fj) = (&gens[i - 1], &gens[j - 1]);
    let mut letters = Vec::new();
    let mut values: Vec<AffineMap> = Vec::new();
    for (idx, g) in gens.iter().enumerate() {
        for (exp, v) in [(1i8, g.clone()), (-1i8, g.inverse())] {
            if !values.contains(&v) {
                letters.push(Letter::new(idx + 1, exp));
                values.push(v);
            }
        }
    }
    let mut found = None;
    breadth_first(
        &letters,
        AffineMap::identity(),
        max_len,
        |h, li| h.compose(&values[li]),
        |h| h.key(conductor),
        |w, h| {
            if fi.compose(h) == h.compose(fj) {
                found = Some(w.clone());
                Visit::Stop
            } else {
                Visit::Continue
            }
        },
    );
    Ok(found)
}
