//! Presentation files and the built-in examples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cyclotomic::{solve_root_constraints, CycloElem, Scalar};
use crate::error::{Error, Result};
use crate::expr::{eval_scalar, jet_from_str, parse_relation, Env};
use crate::germs::{Germ, Word};
use crate::group_cert::GroupPresentation;
use crate::jets::DEFAULT_ORDER;
use crate::pforms::{parse_form, parse_poly, Form, MultiPoly};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub conductor: u32,
    /// Relations in the variable `a`, which ranges over the conductor-th
    /// roots of unity.
    #[serde(default)]
    pub constraints: Vec<String>,
}

/// The JSON presentation schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationSpec {
    #[serde(default)]
    pub field: FieldSpec,
    #[serde(default)]
    pub order: Option<usize>,
    pub generators: Vec<String>,
    #[serde(default)]
    pub witnesses: BTreeMap<String, Vec<(usize, i8)>>,
}

/// One root `a` satisfying the constraints, with its presentation.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Option<Scalar>,
    pub pres: GroupPresentation,
}

fn parse_pair(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::Input(format!("witnesses: key {key:?} is not of the form \"(i,j)\""));
    let inner = key
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let (i, j) = inner.split_once(',').ok_or_else(bad)?;
    Ok((
        i.trim().parse().map_err(|_| bad())?,
        j.trim().parse().map_err(|_| bad())?,
    ))
}

impl PresentationSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("presentation file: {e}")))
    }

    /// Enumerates the admissible roots and builds one presentation per root.
    /// `order` overrides the file's truncation order.
    pub fn instantiate(&self, order: Option<usize>) -> Result<Vec<Instance>> {
        let n = order.or(self.order).unwrap_or(DEFAULT_ORDER);
        if n == 0 {
            return Err(Error::Input("order must be positive".into()));
        }
        let conductor = self.field.conductor.max(1);
        let mut relations = Vec::new();
        for (idx, c) in self.field.constraints.iter().enumerate() {
            relations.push(
                parse_relation(c).map_err(|e| Error::Input(format!("field.constraints[{idx}]: {e}")))?,
            );
        }
        let roots: Vec<Option<Scalar>> = if relations.is_empty() {
            vec![None]
        } else {
            let sols = solve_root_constraints(conductor, |a| {
                let env = Env::new().with("a", a.clone());
                for (l, r) in &relations {
                    if eval_scalar(l, &env)? != eval_scalar(r, &env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            });
            if sols.is_empty() {
                return Err(Error::Input("field.constraints have no root-of-unity solution".into()));
            }
            sols.into_iter().map(|s| Some(s.value)).collect()
        };
        let mut witnesses = Vec::new();
        for (key, pairs) in &self.witnesses {
            witnesses.push((parse_pair(key)?, Word::from_pairs(pairs)));
        }
        roots
            .into_iter()
            .map(|a| {
                let env = match &a {
                    Some(v) => Env::new().with("a", v.clone()),
                    None => Env::new(),
                };
                let mut gens = Vec::new();
                for (idx, src) in self.generators.iter().enumerate() {
                    let jet = jet_from_str(src, &env, n)
                        .and_then(|j| j.lift(crate::cyclotomic::common_conductor(j.conductor(), conductor)))
                        .map_err(|e| Error::Input(format!("generators[{idx}]: {e}")))?;
                    gens.push(Germ::new(jet).map_err(|e| Error::Input(format!("generators[{idx}]: {e}")))?);
                }
                let mut pres = GroupPresentation::new(gens).map_err(|e| Error::Input(format!("generators: {e}")))?;
                for ((i, j), w) in &witnesses {
                    pres = pres
                        .with_witness(*i, *j, w.clone())
                        .map_err(|e| Error::Input(format!("witnesses[\"({i},{j})\"]: {e}")))?;
                }
                Ok(Instance { a, pres })
            })
            .collect()
    }
}

pub const GROUP_EXAMPLES: [&str; 8] = ["ex4.1", "g10", "g12", "g12p", "g14", "g18", "g18p", "ex4.3"];
pub const FORM_EXAMPLES: [&str; 2] = ["ex6.1", "ex6.2"];

/// Rotations z/a repeated, then z/(a+z) and z/(a − a^{n−1}z), over ℚ(ζ_n).
fn rotation_family(n: u32, relation: &str) -> PresentationSpec {
    let mut generators = vec!["z/a".to_string(); n as usize - 2];
    generators.push("z/(a + z)".into());
    generators.push(format!("z/(a - a^{}*z)", n - 1));
    PresentationSpec {
        field: FieldSpec {
            conductor: n,
            constraints: vec![relation.to_string()],
        },
        order: None,
        generators,
        witnesses: BTreeMap::new(),
    }
}

/// Group examples by id; `p` parameterizes "ex4.3" (default 2).
pub fn group_example(id: &str, p: Option<u32>) -> Result<PresentationSpec> {
    Ok(match id {
        "ex4.1" => {
            let mut spec = rotation_family(6, "a = 1/(1 - a)");
            spec.witnesses
                .insert("(5,1)".into(), vec![(1, 1), (5, 1), (1, 1), (1, 1), (1, 1), (1, 1)]);
            spec
        }
        "g10" => rotation_family(10, "a^3 + a = 1/(1 - a)"),
        "g12" => rotation_family(12, "a = 1/(1 - a)"),
        "g12p" => rotation_family(12, "a^3 + a^2 = 1/(1 - a)"),
        "g14" => rotation_family(14, "a^5 + a^3 + a = 1/(1 - a)"),
        "g18" => rotation_family(18, "a = 1/(1 - a)"),
        "g18p" => rotation_family(18, "a^5 + a^4 + a^3 = 1/(1 - a)"),
        "ex4.3" => {
            let p = p.unwrap_or(2);
            if p == 0 {
                return Err(Error::usage("ex4.3 needs p ≥ 1"));
            }
            PresentationSpec {
                field: FieldSpec {
                    conductor: 2 * p,
                    constraints: vec![],
                },
                order: None,
                generators: vec![
                    format!("z*pow(1 - z^{p}, -1/{p})"),
                    format!("z*pow(1 + z^{p}, -1/{p})"),
                ],
                witnesses: BTreeMap::new(),
            }
        }
        _ => return Err(Error::usage(format!("unknown group example {id:?}"))),
    })
}

/// A 1-form together with the first integral the example claims for it.
#[derive(Debug, Clone)]
pub struct FormExample {
    pub omega: Form,
    /// Holomorphic first integral f, or the numerator of P/Q.
    pub integral: Option<MultiPoly>,
    pub denominator: Option<MultiPoly>,
}

/// Form files: {"nvars": 3, "form": "...", "scalars": {...},
/// "first_integral": "...", "denominator": "..."}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub nvars: usize,
    pub form: String,
    #[serde(default)]
    pub scalars: BTreeMap<String, String>,
    #[serde(default)]
    pub first_integral: Option<String>,
    #[serde(default)]
    pub denominator: Option<String>,
}

impl FormSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("form file: {e}")))
    }

    pub fn build(&self) -> Result<FormExample> {
        let mut env = Env::new();
        for (name, v) in &self.scalars {
            let val: Scalar = v
                .parse()
                .or_else(|_| eval_scalar(&crate::expr::parse(v)?, &Env::new()))
                .map_err(|e| Error::Input(format!("scalars.{name}: {e}")))?;
            env = env.with(name, val);
        }
        let omega = parse_form(&self.form, &env, self.nvars, 1).map_err(|e| Error::Input(format!("form: {e}")))?;
        let poly = |field: &str, s: &Option<String>| -> Result<Option<MultiPoly>> {
            s.as_ref()
                .map(|src| parse_poly(src, &env, self.nvars).map_err(|e| Error::Input(format!("{field}: {e}"))))
                .transpose()
        };
        Ok(FormExample {
            omega,
            integral: poly("first_integral", &self.first_integral)?,
            denominator: poly("denominator", &self.denominator)?,
        })
    }
}

/// The parameters (a, b, c, α, β, γ) of the degree-k family in ℂ⁴.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ex61Params {
    pub k: u32,
    pub coeffs: [Scalar; 6],
}

impl Ex61Params {
    pub fn new(k: u32, coeffs: [Scalar; 6]) -> Result<Self> {
        if k < 2 {
            return Err(Error::usage("ex6.1 needs k ≥ 2"));
        }
        if coeffs.iter().any(CycloElem::is_zero) {
            return Err(Error::usage("ex6.1 parameters must be nonzero"));
        }
        Ok(Ex61Params { k, coeffs })
    }

    pub fn ones(k: u32) -> Result<Self> {
        Ex61Params::new(k, std::array::from_fn(|_| CycloElem::one(1)))
    }

    fn env(&self) -> Env {
        ["a", "b", "c", "alpha", "beta", "gamma"]
            .iter()
            .zip(self.coeffs.iter())
            .fold(Env::new(), |env, (n, v)| env.with(n, v.clone()))
    }
}

/// Ω of the degree-k family: Ω(R⃗) = 0 and Ω = −(k+1)Q dx + x dQ.
pub fn ex6_1_omega(p: &Ex61Params) -> Result<Form> {
    let k = p.k;
    let src = format!(
        "(-x^2*(a*y^{km1} + b*z^{km1} + c*w^{km1}) + alpha*y^{kp1} + beta*z^{kp1} + gamma*w^{kp1})*dx \
         + x*y^{km2}*(a*x^2 - alpha*y^2)*dy + x*z^{km2}*(b*x^2 - beta*z^2)*dz \
         + x*w^{km2}*(c*x^2 - gamma*w^2)*dw",
        km1 = k - 1,
        kp1 = k + 1,
        km2 = k - 2
    );
    parse_form(&src, &p.env(), 4, 1)
}

/// Q with F = xQ and Ω = x^{k+2} d(Q/x^{k+1}).
pub fn ex6_1_q(p: &Ex61Params) -> Result<MultiPoly> {
    let k = p.k;
    let src = format!(
        "x^2*(a*y^{km1}/{km1} + b*z^{km1}/{km1} + c*w^{km1}/{km1}) \
         - alpha*y^{kp1}/{kp1} - beta*z^{kp1}/{kp1} - gamma*w^{kp1}/{kp1} + x^{kp1}",
        km1 = k - 1,
        kp1 = k + 1
    );
    parse_poly(&src, &p.env(), 4)
}

pub fn ex6_1(p: &Ex61Params) -> Result<FormExample> {
    Ok(FormExample {
        omega: ex6_1_omega(p)?,
        integral: Some(ex6_1_q(p)?),
        denominator: Some(parse_poly(&format!("x^{}", p.k + 1), &Env::new(), 4)?),
    })
}

/// The local integrable form in ℂ³ and its first integral.
pub fn ex6_2() -> Result<FormExample> {
    let env = Env::new();
    Ok(FormExample {
        omega: parse_form(
            "((y^2 + z^2) - x^2*(y^4 + z^4))*dx + x*y*(1 - x^2*y^2)*dy + x*z*(1 - x^2*z^2)*dz",
            &env,
            3,
            1,
        )?,
        integral: Some(parse_poly("x^2*(y^2 + z^2)/2 - x^4*y^4/4 - x^4*z^4/4", &env, 3)?),
        denominator: None,
    })
}

/// The same form with the opposite sign on x²(y⁴+z⁴); neither integrable
/// nor annihilated by df.
pub fn ex6_2_as_printed() -> Result<FormExample> {
    let mut ex = ex6_2()?;
    ex.omega = parse_form(
        "((y^2 + z^2) + x^2*(y^4 + z^4))*dx + x*y*(1 - x^2*y^2)*dy + z*x*(1 - x^2*z^2)*dz",
        &Env::new(),
        3,
        1,
    )?;
    Ok(ex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_cert::check_product_identity;

    #[test]
    fn every_group_example_builds() {
        for id in GROUP_EXAMPLES {
            let inst = group_example(id, None).unwrap().instantiate(Some(6)).unwrap();
            assert!(!inst.is_empty(), "{id}");
            for i in &inst {
                assert!(check_product_identity(&i.pres), "{id}");
            }
        }
        assert!(group_example("nope", None).is_err());
    }

    #[test]
    fn ex41_roots() {
        let inst = group_example("ex4.1", None).unwrap().instantiate(Some(8)).unwrap();
        let roots: Vec<Scalar> = inst.iter().map(|i| i.a.clone().unwrap()).collect();
        assert_eq!(roots, vec![CycloElem::zeta_pow(6, 1), CycloElem::zeta_pow(6, 5)]);
    }

    #[test]
    fn file_round_trip() {
        let text = r#"{"field":{"conductor":6,"constraints":["a = 1/(1-a)"]},"order":8,
            "generators":["z/a","z/a","z/a","z/a","z/(a+z)","z/(a-a^5*z)"],
            "witnesses":{"(5,1)":[[1,1],[5,1],[1,1],[1,1],[1,1],[1,1]]}}"#;
        let spec = PresentationSpec::from_json(text).unwrap();
        assert_eq!(spec, {
            let mut s = group_example("ex4.1", None).unwrap();
            s.order = Some(8);
            s.generators = s.generators.iter().map(|g| g.replace(' ', "")).collect();
            s.field.constraints = vec!["a = 1/(1-a)".into()];
            s
        });
        assert!(PresentationSpec::from_json("{\"generators\": 3}").is_err());
        let bad = r#"{"generators":["z"],"witnesses":{"1,2":[]}}"#;
        assert!(PresentationSpec::from_json(bad).unwrap().instantiate(None).is_err());
    }

    #[test]
    fn form_examples_build() {
        for k in 2..=4 {
            ex6_1(&Ex61Params::ones(k).unwrap()).unwrap();
        }
        assert!(Ex61Params::ones(1).is_err());
        ex6_2().unwrap();
        ex6_2_as_printed().unwrap();
        let spec = FormSpec::from_json(r#"{"nvars":2,"form":"y*dx - x*dy","scalars":{"q":"1/2"}}"#).unwrap();
        assert_eq!(spec.build().unwrap().omega.nvars(), 2);
    }
}
