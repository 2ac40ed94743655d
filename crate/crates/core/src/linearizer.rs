//! Order-by-order linearization of a presentation with a common multiplier,
//! the flat-case check, and the morphisms φ and ψ read off at a given order.

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::affine::{lemma_predicate, AffineMap};
use crate::cyclotomic::{root_of_unity_order, CycloElem, Rational, Scalar};
use crate::error::{Error, Result};
use crate::germs::Germ;
use crate::group_cert::GroupPresentation;
use crate::jets::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Linearized,
    Obstruction,
    FlatTrivial,
    FlatInconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    MuPowerIdentity,
    MuPowerNonidentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    AllZero,
    Conjugated,
    Obstruction,
}

/// One order of the algorithm: generators are μz + t_i z^{k+1} + … on entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub t: Vec<Scalar>,
    pub branch: Branch,
    pub action: Action,
    /// Σ t_i/μ, reported for obstructions with μ^k = 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_sum: Option<Scalar>,
    /// For obstructions with μ^k ≠ 1: the order l of μ^{-k} and whether the
    /// affine images ψ(f_i) = μ^{-k}z + t_i/μ^{k+1} are pairwise conjugate in
    /// the group they generate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affine_order: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affine_conjugate: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearizationResult {
    pub outcome: Outcome,
    #[serde(rename = "mu")]
    pub final_multiplier: Scalar,
    pub steps: Vec<StepRecord>,
    /// Composite of the step conjugators; set when linearized (z in the flat
    /// trivial case).
    #[serde(rename = "H")]
    pub conjugator: Option<Germ>,
}

fn is_linear_below(f: &Germ, k: usize) -> bool {
    f.is_linear_to(k)
}

/// φ(az + bz^{k+1} + …) = b/a, defined when a^k = 1.
pub fn phi_morphism(f: &Germ, k: usize) -> Result<Scalar> {
    check_k(f, k)?;
    let a = f.multiplier();
    if !a.pow(k as i64)?.is_one() {
        return Err(Error::usage(format!("phi_morphism: multiplier^{k} is not 1")));
    }
    if !is_linear_below(f, k) {
        return Err(Error::usage(format!("phi_morphism: germ is not linear below order {}", k + 1)));
    }
    Ok(f.coeff(k + 1).checked_div(&a)?)
}

/// ψ(az + bz^{k+1} + …) = (az + b)/a^{k+1}.
pub fn psi_morphism(f: &Germ, k: usize) -> Result<AffineMap> {
    check_k(f, k)?;
    if !is_linear_below(f, k) {
        return Err(Error::usage(format!("psi_morphism: germ is not linear below order {}", k + 1)));
    }
    let a = f.multiplier();
    let ak1 = a.pow(k as i64 + 1)?;
    AffineMap::new(a.checked_div(&ak1)?, f.coeff(k + 1).checked_div(&ak1)?)
}

fn check_k(f: &Germ, k: usize) -> Result<()> {
    if k == 0 || k + 1 > f.order() {
        return Err(Error::usage(format!(
            "order k = {k} needs 1 ≤ k < N = {}",
            f.order()
        )));
    }
    Ok(())
}

/// Reads t_i at z^{k+1} and decides: nothing to do, conjugate by
/// h_k = z + t/(μ − μ^{k+1})·z^{k+1}, or an obstruction.
pub fn linearize_step(gens: &[Germ], k: usize) -> Result<(Option<Germ>, StepRecord)> {
    let first = gens
        .first()
        .ok_or_else(|| Error::usage("linearize_step needs generators"))?;
    check_k(first, k)?;
    let mu = first.multiplier();
    for g in gens {
        if g.order() != first.order() {
            return Err(Error::usage("linearize_step: generators have different orders"));
        }
        if g.multiplier() != mu {
            return Err(Error::usage("linearize_step: multipliers differ"));
        }
        if !g.is_linear_to(k) {
            return Err(Error::usage(format!("linearize_step: generators are not linear to order {k}")));
        }
    }
    let t: Vec<Scalar> = gens.iter().map(|g| g.coeff(k + 1)).collect();
    let mu_k = mu.pow(k as i64)?;
    let branch = if mu_k.is_one() {
        Branch::MuPowerIdentity
    } else {
        Branch::MuPowerNonidentity
    };
    let mut record = StepRecord {
        k,
        t,
        branch,
        action: Action::AllZero,
        phi_sum: None,
        affine_order: None,
        affine_conjugate: None,
    };
    if record.t.iter().all(CycloElem::is_zero) {
        return Ok((None, record));
    }
    let all_equal = record.t.windows(2).all(|w| w[0] == w[1]);
    match branch {
        Branch::MuPowerIdentity => {
            record.action = Action::Obstruction;
            let sum = record
                .t
                .iter()
                .fold(CycloElem::zero(mu.conductor()), |acc, x| acc + x);
            record.phi_sum = Some(sum.checked_div(&mu)?);
            Ok((None, record))
        }
        Branch::MuPowerNonidentity if all_equal => {
            let c = record.t[0].checked_div(&(&mu - &(&mu_k * &mu)))?;
            let h = Germ::new(Jet::identity(first.order(), mu.conductor()).add_term(&c, k + 1))?;
            record.action = Action::Conjugated;
            Ok((Some(h), record))
        }
        Branch::MuPowerNonidentity => {
            record.action = Action::Obstruction;
            let eta = mu_k.inv()?;
            let l = root_of_unity_order(&eta);
            record.affine_order = l;
            if let Some(l) = l {
                let mu_k1 = &mu_k * &mu;
                let betas = record
                    .t
                    .iter()
                    .map(|t| t.checked_div(&mu_k1))
                    .collect::<Result<Vec<_>>>()?;
                record.affine_conjugate = Some(lemma_predicate(l, &betas)?);
            }
            Ok((None, record))
        }
    }
}

/// X ↦ X + c·X^{k+1}, i.e. (z + c z^{k+1}) ∘ X.
fn left_binomial(x: &Jet, c: &Scalar, k: usize) -> Jet {
    x + &x.pow(k as u32 + 1).scale(c)
}

/// h ∘ g ∘ h⁻¹ for h = z + c z^{k+1}. Solves X ∘ h = g for X = g ∘ h⁻¹ by a
/// triangular recurrence, then applies h on the left.
fn conjugate_binomial(g: &Germ, c: &Scalar, k: usize) -> Germ {
    let n = g.order();
    let gc = g.jet().coeffs();
    let max_i = n / k;
    let mut c_pows = vec![CycloElem::one(c.conductor())];
    for i in 1..=max_i {
        let next = &c_pows[i - 1] * c;
        c_pows.push(next);
    }
    // (z + c z^{k+1})^j = Σ_i C(j,i) c^i z^{j+ik}.
    let mut x: Vec<Scalar> = vec![CycloElem::zero(c.conductor()); n + 1];
    for m in 1..=n {
        let mut v = gc[m].clone();
        let mut i = 1;
        while i * k < m {
            let j = m - i * k;
            if i <= j && !x[j].is_zero() {
                let binom = Rational::from(binomial(j, i));
                v = v - (&x[j] * &c_pows[i]).scale(&binom);
            }
            i += 1;
        }
        x[m] = v;
    }
    let xj = Jet::from_coeffs(&x, n).expect("coefficients share a field");
    Germ::new(left_binomial(&xj, c, k)).expect("conjugates of germs are germs")
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Runs linearize_step for k = 1 … N−1, conjugating the working generators
/// after each successful step and accumulating H ← h_k ∘ H.
pub fn linearize(pres: &GroupPresentation) -> Result<LinearizationResult> {
    let gens = pres.gens();
    let mu = gens[0].multiplier();
    if gens.iter().any(|g| g.multiplier() != mu) {
        return Err(Error::usage("linearize: generators have different multipliers"));
    }
    let n = pres.order();
    // Repeated generators are conjugated once.
    let mut distinct: Vec<Germ> = Vec::new();
    let mut slot: Vec<usize> = Vec::new();
    for g in gens {
        match distinct.iter().position(|d| d == g) {
            Some(p) => slot.push(p),
            None => {
                distinct.push(g.clone());
                slot.push(distinct.len() - 1);
            }
        }
    }
    let mut h_total = Jet::identity(n, pres.conductor());
    let mut steps = Vec::new();
    for k in 1..n {
        let (h, mut record) = linearize_step(&distinct, k)?;
        record.t = slot.iter().map(|&s| record.t[s].clone()).collect();
        let action = record.action;
        steps.push(record);
        match action {
            Action::AllZero => {}
            Action::Obstruction => {
                return Ok(LinearizationResult {
                    outcome: Outcome::Obstruction,
                    final_multiplier: mu,
                    steps,
                    conjugator: None,
                })
            }
            Action::Conjugated => {
                let h = h.expect("conjugated steps carry a conjugator");
                let c = h.coeff(k + 1);
                distinct = distinct
                    .par_iter()
                    .map(|g| conjugate_binomial(g, &c, k))
                    .collect();
                h_total = left_binomial(&h_total, &c, k);
            }
        }
    }
    Ok(LinearizationResult {
        outcome: Outcome::Linearized,
        final_multiplier: mu,
        steps,
        conjugator: Some(Germ::new(h_total)?),
    })
}

/// For multiplier 1: if every generator is z + O(z^n), the z^n coefficients
/// must agree (conjugacy) and sum to zero (product relation), hence vanish.
/// Walks n = 2 … N on the given data and reports where that fails.
pub fn flat_case_check(pres: &GroupPresentation) -> Result<LinearizationResult> {
    let gens = pres.gens();
    if gens.iter().any(|g| !g.multiplier().is_one()) {
        return Err(Error::usage("flat_case_check needs every multiplier equal to 1"));
    }
    let one = CycloElem::one(pres.conductor());
    let mut steps = Vec::new();
    for m in 2..=pres.order() {
        let t: Vec<Scalar> = gens.iter().map(|g| g.coeff(m)).collect();
        let all_zero = t.iter().all(CycloElem::is_zero);
        let sum = t.iter().fold(CycloElem::zero(pres.conductor()), |acc, x| acc + x);
        steps.push(StepRecord {
            k: m - 1,
            t,
            branch: Branch::MuPowerIdentity,
            action: if all_zero { Action::AllZero } else { Action::Obstruction },
            phi_sum: if all_zero { None } else { Some(sum) },
            affine_order: None,
            affine_conjugate: None,
        });
        if !all_zero {
            return Ok(LinearizationResult {
                outcome: Outcome::FlatInconsistent,
                final_multiplier: one,
                steps,
                conjugator: None,
            });
        }
    }
    Ok(LinearizationResult {
        outcome: Outcome::FlatTrivial,
        final_multiplier: one,
        steps,
        conjugator: Some(Germ::identity(pres.order(), pres.conductor())),
    })
}

/// ord(μ) for a linearized group, 1 when flat and trivial.
pub fn group_order(result: &LinearizationResult) -> Option<u64> {
    match result.outcome {
        Outcome::Linearized => root_of_unity_order(&result.final_multiplier),
        Outcome::FlatTrivial => Some(1),
        _ => None,
    }
}
