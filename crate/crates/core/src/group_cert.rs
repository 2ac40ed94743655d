//! Irreducibility certificates: the product relation, conjugacy of the
//! generators inside the group, and multiplier analysis.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::cyclotomic::{prime_power_order, root_of_unity_order, PrimePowerOrder, Scalar};
use crate::error::{Error, Result};
use crate::germs::{evaluate_word, Germ, Letter, Word};
use crate::jets::{Jet, RightComposer};
use crate::search::{breadth_first, Visit};

pub const DEFAULT_MAX_WORD_LEN: usize = 8;

/// Order used by the cheap low-order rejection test during searches.
const PREFILTER_ORDER: usize = 4;

/// Generators f_1 … f_{ν+1} (stored 0-based, addressed 1-based) with optional
/// conjugacy witnesses: a word g with f_i ∘ g = g ∘ f_j.
#[derive(Debug, Clone)]
pub struct GroupPresentation {
    gens: Vec<Germ>,
    witnesses: BTreeMap<(usize, usize), Word>,
    order: usize,
}

impl GroupPresentation {
    /// Lifts every generator to a common conductor.
    pub fn new(gens: Vec<Germ>) -> Result<Self> {
        if gens.len() < 2 {
            return Err(Error::usage("a presentation needs at least two generators"));
        }
        let order = gens[0].order();
        if let Some(g) = gens.iter().find(|g| g.order() != order) {
            return Err(Error::DimensionMismatch {
                expected: order,
                found: g.order(),
            });
        }
        let m = gens
            .iter()
            .fold(1, |acc, g| crate::cyclotomic::common_conductor(acc, g.conductor()));
        let gens = gens.iter().map(|g| g.lift(m)).collect::<Result<Vec<_>>>()?;
        Ok(GroupPresentation {
            gens,
            witnesses: BTreeMap::new(),
            order,
        })
    }

    pub fn with_witness(mut self, i: usize, j: usize, w: Word) -> Result<Self> {
        self.check_index(i)?;
        self.check_index(j)?;
        w.validate(self.gens.len())?;
        self.witnesses.insert((i, j), w);
        Ok(self)
    }

    pub fn gens(&self) -> &[Germ] {
        &self.gens
    }

    pub fn gen(&self, i: usize) -> &Germ {
        &self.gens[i - 1]
    }

    pub fn witnesses(&self) -> &BTreeMap<(usize, usize), Word> {
        &self.witnesses
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn conductor(&self) -> u32 {
        self.gens[0].conductor()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.gens.len() {
            return Err(Error::InvalidIndex {
                index: i,
                count: self.gens.len(),
            });
        }
        Ok(())
    }
}

/// f_1 ∘ f_2 ∘ … ∘ f_{ν+1} = z to order N.
pub fn check_product_identity(pres: &GroupPresentation) -> bool {
    let mut acc = Germ::identity(pres.order, pres.conductor());
    for g in &pres.gens {
        acc = acc.compose(g).expect("generators share an order");
    }
    acc.is_identity()
}

/// f_i ∘ g = g ∘ f_j for g the value of `w`.
pub fn check_conjugacy_witness(pres: &GroupPresentation, i: usize, j: usize, w: &Word) -> Result<bool> {
    pres.check_index(i)?;
    pres.check_index(j)?;
    let g = evaluate_word(w, &pres.gens)?;
    Ok(pres.gen(i).compose(&g)? == g.compose(pres.gen(j))?)
}

/// First word (shortest, then lexicographic) conjugating f_j to f_i, if one
/// exists up to `max_len`.
pub fn search_conjugator(pres: &GroupPresentation, i: usize, j: usize, max_len: usize) -> Result<Option<Word>> {
    let found = search_conjugators(pres, &[(i, j)], max_len)?;
    Ok(found.into_iter().next().and_then(|(_, w)| w))
}

/// One breadth-first pass serving several pairs at once.
pub fn search_conjugators(
    pres: &GroupPresentation,
    pairs: &[(usize, usize)],
    max_len: usize,
) -> Result<BTreeMap<(usize, usize), Option<Word>>> {
    for &(i, j) in pairs {
        pres.check_index(i)?;
        pres.check_index(j)?;
    }
    let n = pres.order;
    let keys: Vec<Vec<u8>> = pres.gens.iter().map(|g| g.jet().value_key()).collect();
    // Pairs with identical generator values share one search target.
    let mut targets: Vec<(usize, usize)> = Vec::new();
    let mut target_of: Vec<usize> = Vec::new();
    for &(i, j) in pairs {
        let pos = targets
            .iter()
            .position(|&(a, b)| keys[a - 1] == keys[i - 1] && keys[b - 1] == keys[j - 1]);
        target_of.push(pos.unwrap_or_else(|| {
            targets.push((i, j));
            targets.len() - 1
        }));
    }
    let mut results: Vec<Option<Word>> = vec![None; targets.len()];
    let mut open = targets.len();

    let mut letters = Vec::new();
    let mut letter_values: Vec<Jet> = Vec::new();
    let mut seen_values: Vec<Vec<u8>> = Vec::new();
    for (idx, g) in pres.gens.iter().enumerate() {
        for (exp, v) in [(1i8, g.jet().clone()), (-1i8, g.inverse().into_jet())] {
            let key = v.value_key();
            if !seen_values.contains(&key) {
                seen_values.push(key);
                letters.push(Letter::new(idx + 1, exp));
                letter_values.push(v);
            }
        }
    }
    let step_composers = letter_values
        .iter()
        .map(RightComposer::new)
        .collect::<Result<Vec<_>>>()?;

    struct Target {
        left: Jet,
        right: RightComposer,
        left_low: Jet,
        right_low: Jet,
    }
    let low = PREFILTER_ORDER.min(n);
    let tdata = targets
        .iter()
        .map(|&(i, j)| {
            Ok(Target {
                left: pres.gen(i).jet().clone(),
                right: RightComposer::new(pres.gen(j).jet())?,
                left_low: pres.gen(i).jet().truncate(low),
                right_low: pres.gen(j).jet().truncate(low),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let identity = Jet::identity(n, pres.conductor());
    let mut failure = None;
    breadth_first(
        &letters,
        identity,
        max_len,
        |h, li| step_composers[li].compose(h).expect("orders agree"),
        |h| h.value_key(),
        |w, h| {
            let h_low = h.truncate(low);
            for (t, data) in tdata.iter().enumerate() {
                if results[t].is_some() {
                    continue;
                }
                let quick = data.left_low.compose(&h_low).and_then(|l| Ok((l, h_low.compose(&data.right_low)?)));
                match quick {
                    Ok((l, r)) if l != r => continue,
                    Ok(_) => {}
                    Err(e) => {
                        failure = Some(e);
                        return Visit::Stop;
                    }
                }
                let full = data.left.compose(h).and_then(|l| Ok((l, data.right.compose(h)?)));
                match full {
                    Ok((l, r)) if l == r => {
                        results[t] = Some(w.clone());
                        open -= 1;
                    }
                    Ok(_) => {}
                    Err(e) => {
                        failure = Some(e);
                        return Visit::Stop;
                    }
                }
            }
            if open == 0 {
                Visit::Stop
            } else {
                Visit::Continue
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(pairs
        .iter()
        .zip(target_of)
        .map(|(&p, t)| (p, results[t].clone()))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ConjugacyStatus {
    VerifiedByWitness { word: Word },
    FoundBySearch { word: Word },
    NotFoundUpTo { length: usize },
}

impl ConjugacyStatus {
    pub fn is_resolved(&self) -> bool {
        !matches!(self, ConjugacyStatus::NotFoundUpTo { .. })
    }

    pub fn word(&self) -> Option<&Word> {
        match self {
            ConjugacyStatus::VerifiedByWitness { word } | ConjugacyStatus::FoundBySearch { word } => Some(word),
            ConjugacyStatus::NotFoundUpTo { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrreducibilityReport {
    pub product_ok: bool,
    pub multiplier: Scalar,
    pub multiplier_order: Option<u64>,
    pub multipliers_all_equal: bool,
    #[serde(serialize_with = "serialize_pairs")]
    pub conjugacy: BTreeMap<(usize, usize), ConjugacyStatus>,
    pub theorem_a_applicable: bool,
    /// (p, s) with multiplier order p^s, present when the theorem applies.
    pub prime_power: Option<PrimePowerOrder>,
}

impl IrreducibilityReport {
    pub fn all_conjugacies_resolved(&self) -> bool {
        self.conjugacy.values().all(ConjugacyStatus::is_resolved)
    }
}

fn serialize_pairs<S: Serializer>(
    map: &BTreeMap<(usize, usize), ConjugacyStatus>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut m = s.serialize_map(Some(map.len()))?;
    for ((i, j), v) in map {
        m.serialize_entry(&format!("({i},{j})"), v)?;
    }
    m.end()
}

/// Product check, multiplier analysis and conjugacy resolution. Supplied
/// witnesses are checked first (in parallel); every pair not settled by a
/// valid witness in either orientation goes to one shared bounded search.
pub fn certify(pres: &GroupPresentation, max_len: usize) -> IrreducibilityReport {
    let product_ok = check_product_identity(pres);
    let multiplier = pres.gens[0].multiplier();
    let multipliers_all_equal = pres.gens.iter().all(|g| g.multiplier() == multiplier);
    let multiplier_order = root_of_unity_order(&multiplier);

    let checked: Vec<((usize, usize), Word, bool)> = pres
        .witnesses
        .par_iter()
        .map(|(&(i, j), w)| ((i, j), w.clone(), check_conjugacy_witness(pres, i, j, w).unwrap_or(false)))
        .collect();
    let mut conjugacy = BTreeMap::new();
    let mut settled = BTreeSet::new();
    for ((i, j), w, ok) in checked {
        if ok {
            conjugacy.insert((i, j), ConjugacyStatus::VerifiedByWitness { word: w });
            settled.insert((i.min(j), i.max(j)));
        }
    }
    let k = pres.gens.len();
    let mut pending = Vec::new();
    for i in 1..=k {
        for j in i + 1..=k {
            if !settled.contains(&(i, j)) {
                pending.push((i, j));
            }
        }
    }
    let found = search_conjugators(pres, &pending, max_len).expect("indices are valid");
    for (pair, w) in found {
        let status = match w {
            Some(word) => ConjugacyStatus::FoundBySearch { word },
            None => ConjugacyStatus::NotFoundUpTo { length: max_len },
        };
        conjugacy.insert(pair, status);
    }

    let resolved = conjugacy.values().all(ConjugacyStatus::is_resolved);
    let prime_power = multiplier_order.and_then(prime_power_order);
    let theorem_a_applicable = product_ok && multipliers_all_equal && resolved && prime_power.is_some();
    IrreducibilityReport {
        product_ok,
        multiplier,
        multiplier_order,
        multipliers_all_equal,
        conjugacy,
        theorem_a_applicable,
        prime_power: if theorem_a_applicable { prime_power } else { None },
    }
}
