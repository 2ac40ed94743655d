//! Command implementations behind the `diffgerm` binary. Each returns the
//! JSON text to print and the process exit code: 0 when the verdict is
//! positive, 1 when it is negative or unresolved, 2 on bad input.

use std::path::PathBuf;

use serde::Serialize;

use crate::cyclotomic::Scalar;
use crate::error::{Error, Result};
use crate::expr::{eval_scalar, parse, Env};
use crate::group_cert::{certify, IrreducibilityReport};
use crate::jets::split_top_level;
use crate::linearizer::{flat_case_check, group_order, linearize, LinearizationResult, Outcome};
use crate::pforms::{
    blowup_chart_pullback, cone_matches_pullback, first_integral_check, integrability_check, kupka_test,
    meromorphic_first_integral_check, tangent_cone, Form, VARS,
};
use crate::registry::{ex6_1, ex6_2, group_example, Ex61Params, FormExample, FormSpec, Instance, PresentationSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub json: String,
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Example(String),
    File(PathBuf),
}

impl Source {
    pub fn from_args(example: Option<String>, file: Option<PathBuf>) -> Result<Source> {
        match (example, file) {
            (Some(e), None) => Ok(Source::Example(e)),
            (None, Some(f)) => Ok(Source::File(f)),
            (Some(_), Some(_)) => Err(Error::usage("give either --example or a file, not both")),
            (None, None) => Err(Error::usage("an input file or --example is required")),
        }
    }

    fn read(&self) -> Result<String> {
        match self {
            Source::File(p) => std::fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
            Source::Example(_) => unreachable!("examples are built in"),
        }
    }

    fn label(&self) -> String {
        match self {
            Source::Example(e) => e.clone(),
            Source::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroupOpts {
    pub source: Source,
    pub order: Option<usize>,
    pub max_word_len: usize,
    pub p: Option<u32>,
    pub pretty: bool,
}

fn render<T: Serialize>(value: &T, pretty: bool, code: i32) -> Output {
    let json = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("reports serialize");
    Output { json, code }
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
}

fn failure(e: &Error, pretty: bool) -> Output {
    render(&ErrorReport { error: e.to_string() }, pretty, 2)
}

fn load_instances(opts: &GroupOpts) -> Result<Vec<Instance>> {
    let spec = match &opts.source {
        Source::Example(id) => group_example(id, opts.p)?,
        src => PresentationSpec::from_json(&src.read()?)?,
    };
    spec.instantiate(opts.order)
}

#[derive(Serialize)]
struct CertifyInstance {
    a: Option<Scalar>,
    report: IrreducibilityReport,
}

#[derive(Serialize)]
struct CertifyOutput {
    input: String,
    order: usize,
    max_word_len: usize,
    instances: Vec<CertifyInstance>,
}

pub fn cmd_certify(opts: &GroupOpts) -> Output {
    let instances = match load_instances(opts) {
        Ok(i) => i,
        Err(e) => return failure(&e, opts.pretty),
    };
    let order = instances[0].pres.order();
    let reports: Vec<CertifyInstance> = instances
        .into_iter()
        .map(|i| CertifyInstance {
            report: certify(&i.pres, opts.max_word_len),
            a: i.a,
        })
        .collect();
    let ok = reports
        .iter()
        .all(|r| r.report.product_ok && r.report.all_conjugacies_resolved());
    render(
        &CertifyOutput {
            input: opts.source.label(),
            order,
            max_word_len: opts.max_word_len,
            instances: reports,
        },
        opts.pretty,
        if ok { 0 } else { 1 },
    )
}

#[derive(Serialize)]
struct LinearizeInstance {
    a: Option<Scalar>,
    group_order: Option<u64>,
    result: LinearizationResult,
}

#[derive(Serialize)]
struct LinearizeOutput {
    input: String,
    order: usize,
    instances: Vec<LinearizeInstance>,
}

pub fn cmd_linearize(opts: &GroupOpts) -> Output {
    let run = || -> Result<LinearizeOutput> {
        let instances = load_instances(opts)?;
        let order = instances[0].pres.order();
        let mut out = Vec::new();
        for i in instances {
            let mu = i.pres.gen(1).multiplier();
            let result = if mu.is_one() {
                flat_case_check(&i.pres)?
            } else {
                linearize(&i.pres)?
            };
            out.push(LinearizeInstance {
                a: i.a,
                group_order: group_order(&result),
                result,
            });
        }
        Ok(LinearizeOutput {
            input: opts.source.label(),
            order,
            instances: out,
        })
    };
    match run() {
        Ok(out) => {
            let ok = out
                .instances
                .iter()
                .all(|i| matches!(i.result.outcome, Outcome::Linearized | Outcome::FlatTrivial));
            render(&out, opts.pretty, if ok { 0 } else { 1 })
        }
        Err(e) => failure(&e, opts.pretty),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormCommand {
    Integrable,
    Cone,
    Kupka,
    FirstIntegral,
    Pullback,
}

#[derive(Debug, Clone)]
pub struct FormOpts {
    pub source: Source,
    pub k: Option<u32>,
    pub params: Option<String>,
    pub point: Option<String>,
    pub chart: String,
    pub pretty: bool,
}

/// Comma-separated scalars, each either canonical ("cyclo(6)[0,1]", "1/2")
/// or an expression ("zeta(6, 5)", "-2").
pub fn parse_scalar_list(src: &str) -> Result<Vec<Scalar>> {
    split_top_level(src)
        .into_iter()
        .map(|s| {
            let s = s.trim();
            s.parse::<Scalar>()
                .or_else(|_| eval_scalar(&parse(s)?, &Env::new()))
                .map_err(|e| Error::usage(format!("bad scalar {s:?}: {e}")))
        })
        .collect()
}

fn load_form(opts: &FormOpts) -> Result<FormExample> {
    match &opts.source {
        Source::Example(id) if id == "ex6.1" => {
            let k = opts.k.unwrap_or(2);
            let params = match &opts.params {
                Some(p) => {
                    let v = parse_scalar_list(p)?;
                    let arr: [Scalar; 6] = v
                        .try_into()
                        .map_err(|_| Error::usage("--params needs six scalars: a,b,c,alpha,beta,gamma"))?;
                    Ex61Params::new(k, arr)?
                }
                None => Ex61Params::ones(k)?,
            };
            ex6_1(&params)
        }
        Source::Example(id) if id == "ex6.2" => ex6_2(),
        Source::Example(id) => Err(Error::usage(format!("unknown form example {id:?}"))),
        src => FormSpec::from_json(&src.read()?)?.build(),
    }
}

fn chart_index(name: &str, nvars: usize) -> Result<usize> {
    VARS[..nvars]
        .iter()
        .position(|v| *v == name)
        .or_else(|| name.parse().ok().filter(|&i: &usize| i < nvars))
        .ok_or_else(|| Error::usage(format!("--chart must name one of the {nvars} variables")))
}

#[derive(Serialize)]
struct Verdict<T: Serialize> {
    input: String,
    command: &'static str,
    verdict: bool,
    #[serde(flatten)]
    detail: T,
}

#[derive(Serialize)]
struct NoDetail {}

#[derive(Serialize)]
struct ConeDetail {
    nu: u32,
    dicritical: bool,
    cone: Option<String>,
    cone_factored: Option<String>,
}

#[derive(Serialize)]
struct KupkaDetail {
    point: Vec<Scalar>,
}

#[derive(Serialize)]
struct IntegralDetail {
    kind: &'static str,
    numerator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    denominator: Option<String>,
}

#[derive(Serialize)]
struct PullbackDetail {
    chart: String,
    m: u16,
    reduced: Form,
    agrees_with_cone: bool,
}

pub fn cmd_forms(cmd: FormCommand, opts: &FormOpts) -> Output {
    let input = opts.source.label();
    let run = || -> Result<Output> {
        let ex = load_form(opts)?;
        let w = &ex.omega;
        let out = match cmd {
            FormCommand::Integrable => {
                let v = integrability_check(w)?;
                verdict(&input, "integrable", v, NoDetail {}, opts.pretty)
            }
            FormCommand::Cone => {
                let c = tangent_cone(w)?;
                let detail = ConeDetail {
                    nu: c.nu,
                    dicritical: c.dicritical,
                    cone: c.cone.as_ref().map(|p| p.to_string()),
                    cone_factored: c.cone.as_ref().map(|p| p.factored_string()),
                };
                verdict(&input, "cone", !c.dicritical, detail, opts.pretty)
            }
            FormCommand::Kupka => {
                let src = opts
                    .point
                    .as_ref()
                    .ok_or_else(|| Error::usage("kupka needs --point"))?;
                let q = parse_scalar_list(src)?;
                let v = kupka_test(w, &q)?;
                verdict(&input, "kupka", v, KupkaDetail { point: q }, opts.pretty)
            }
            FormCommand::FirstIntegral => {
                let f = ex
                    .integral
                    .as_ref()
                    .ok_or_else(|| Error::usage("the input names no first integral"))?;
                let (v, detail) = match &ex.denominator {
                    Some(q) => (
                        meromorphic_first_integral_check(w, f, q)?,
                        IntegralDetail {
                            kind: "meromorphic",
                            numerator: f.to_string(),
                            denominator: Some(q.to_string()),
                        },
                    ),
                    None => (
                        first_integral_check(w, f)?,
                        IntegralDetail {
                            kind: "holomorphic",
                            numerator: f.to_string(),
                            denominator: None,
                        },
                    ),
                };
                verdict(&input, "first-integral", v, detail, opts.pretty)
            }
            FormCommand::Pullback => {
                let c = chart_index(&opts.chart, w.nvars())?;
                let (m, reduced) = blowup_chart_pullback(w, c)?;
                let agrees = cone_matches_pullback(w, c)?;
                let detail = PullbackDetail {
                    chart: VARS[c].to_string(),
                    m,
                    reduced,
                    agrees_with_cone: agrees,
                };
                verdict(&input, "pullback", agrees, detail, opts.pretty)
            }
        };
        Ok(out)
    };
    run().unwrap_or_else(|e| failure(&e, opts.pretty))
}

fn verdict<T: Serialize>(input: &str, command: &'static str, v: bool, detail: T, pretty: bool) -> Output {
    render(
        &Verdict {
            input: input.to_string(),
            command,
            verdict: v,
            detail,
        },
        pretty,
        if v { 0 } else { 1 },
    )
}
