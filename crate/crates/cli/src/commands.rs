use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use dlr_core::eqtheory::{check_derivation, check_dlog, Derivation, DerivationError, DlogProbes};
use dlr_core::quantale::{check_section3_props, FiniteQuantale};
use dlr_core::relations::{
    check_delta, check_eta, check_fundamental, check_gamma, check_rho, check_theorem_approx, generate_probes,
    RelError, SelfProbes, Verdict,
};
use dlr_core::semantics::{diff_eval_closed, eval_closed, Diff, Value};
use dlr_core::syntax::{derivative_term, normalize, partial_type, typecheck as type_of, PrimRegistry, Type, TypingContext};
use dlr_core::scalar::render_exact;
use dlr_core::ExtNonNegReal;
use num_rational::BigRational;
use serde_json::{json, Value as Json};

use crate::source::Source;
use crate::{Invalid, RunConfig};

/// What a command prints, in both formats, and whether it succeeded.
pub struct Report {
    pub text: String,
    pub json: Json,
    pub ok: bool,
}

impl Report {
    fn ok(text: String, json: Json) -> Self {
        Self { text, json, ok: true }
    }
}

pub fn typecheck(cfg: &RunConfig, path: &Path) -> Result<Report> {
    let src = Source::load(path, cfg.eps.as_deref())?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for d in &src.defs {
        let ty = typecheck_def(&src, &d.name, d.line)?;
        writeln!(text, "{} : {ty}", d.name)?;
        rows.push(json!({ "name": d.name, "type": ty.ascii() }));
    }
    Ok(Report::ok(text, json!(rows)))
}

fn typecheck_def(src: &Source, name: &str, line: usize) -> Result<Type> {
    let d = src.defs.iter().find(|d| d.name == name).expect("a parsed definition");
    type_of(&TypingContext::new(), &d.term)
        .map_err(|e| Invalid(format!("{}:{line}: `{name}`: {e}", src.path.display())).into())
}

pub fn derive(cfg: &RunConfig, path: &Path, expr: &str, norm: bool) -> Result<Report> {
    let src = Source::load(path, cfg.eps.as_deref())?;
    let (t, ty) = src.closed(expr)?;
    let ctx = TypingContext::new();
    let mut dt = derivative_term(&ctx, &t).map_err(|e| Invalid(e.to_string()))?;
    if norm {
        dt = normalize(&ctx, &dt)?;
    }
    let dty = partial_type(&ty);
    Ok(Report::ok(format!("{dt}\n"), json!({ "term": dt.to_string(), "type": dty.ascii() })))
}

pub fn eval(cfg: &RunConfig, path: &Path, expr: &str, exact: bool) -> Result<Report> {
    let src = Source::load(path, cfg.eps.as_deref())?;
    let (t, ty) = src.closed(expr)?;
    let shown = if exact {
        eval_closed::<BigRational>(&t).map(|v| match v {
            Value::Real(r) => render_exact(&r),
            other => other.to_string(),
        })
    } else {
        eval_closed::<f64>(&t).map(|v| v.to_string())
    }
    .map_err(|e| Invalid(format!("`{expr}`: {e}")))?;
    Ok(Report::ok(format!("{shown}\n"), json!({ "value": shown, "type": ty.ascii() })))
}

fn real_at(f: &Value<f64>, x: f64) -> Result<f64> {
    Ok(*f.apply(&Value::Real(x))?.as_real()?)
}

fn distance(d: f64) -> Json {
    if d.is_infinite() {
        json!("inf")
    } else {
        json!(d)
    }
}

/// The pointwise larger of two first-order distances.
fn larger(a: Diff<f64>, b: Diff<f64>) -> Diff<f64> {
    Diff::fun(move |x, e| {
        let (u, v) = (a.apply(x, e)?.as_real()?.to_float(), b.apply(x, e)?.as_real()?.to_float());
        Ok(Diff::Real(ExtNonNegReal::from_float(u.max(v)).expect("a distance")))
    })
}

pub fn diff(cfg: &RunConfig, path: &Path, f: &str, g: &str, points: &[(f64, f64)], rows: usize) -> Result<Report> {
    let src = Source::load(path, cfg.eps.as_deref())?;
    let (tf, ty) = src.closed(f)?;
    let (tg, ty2) = src.closed(g)?;
    if ty != ty2 {
        return Err(Invalid(format!("`{f}` has type {ty} but `{g}` has type {ty2}")).into());
    }
    if ty != Type::real_fn() {
        return Err(Invalid(format!("diff compares functions of type Real ⇒ Real, found {ty}")).into());
    }
    let probes = generate_probes(&ty, cfg.probe_config()?)?;
    let (vf, vg) = (eval_closed::<f64>(&tf)?, eval_closed::<f64>(&tg)?);
    let self_distance = larger(diff_eval_closed::<f64>(&tf)?, diff_eval_closed::<f64>(&tg)?);
    let points: Vec<(f64, f64)> = if points.is_empty() {
        probes
            .at(&Type::Real)?
            .iter()
            .take(rows)
            .map(|p| Ok((*p.x.as_real()?, p.b.as_real()?.to_float())))
            .collect::<Result<_>>()?
    } else {
        points.to_vec()
    };

    let mut text = format!("{:>12} {:>12} {:>14} {:>14} {:>14}\n", "x", "b", "vertical", "self", "bound");
    let mut table = Vec::new();
    for &(x, b) in &points {
        let vertical = (real_at(&vf, x)? - real_at(&vg, x)?).abs();
        let e = Diff::Real(ExtNonNegReal::from_float(b).context("bad input error")?);
        let own = self_distance.apply(&Value::Real(x), &e)?.as_real()?.to_float();
        let bound = vertical + own;
        writeln!(text, "{x:>12.6} {b:>12.6} {vertical:>14.10} {own:>14.10} {bound:>14.10}")?;
        table.push(json!({
            "x": x, "b": b, "vertical": distance(vertical), "self_distance": distance(own), "bound": distance(bound),
        }));
    }

    let (vf2, vg2) = (vf.clone(), vg.clone());
    let vertical = Diff::fun(move |x, _| {
        let gap = (vf2.apply(x)?.as_real()? - vg2.apply(x)?.as_real()?).abs();
        Ok(Diff::Real(ExtNonNegReal::from_float(gap).expect("a distance")))
    });
    let (verdict, hypothesis) = match check_theorem_approx(&Type::Real, &vf, &vg, &vertical, &self_distance, &probes) {
        Ok(v) => (Some(v), None),
        Err(RelError::Hypothesis { hypothesis, witness }) => (None, Some(format!("{hypothesis}: {witness}"))),
        Err(e) => return Err(e.into()),
    };
    let ok = verdict.as_ref().is_some_and(Verdict::is_consistent);
    match (&verdict, &hypothesis) {
        (Some(v), _) => writeln!(text, "{f} vs {g}: {v}")?,
        (_, Some(h)) => writeln!(text, "{f} vs {g}: hypothesis fails: {h}")?,
        _ => {}
    }
    let json = json!({ "f": f, "g": g, "rows": table, "verdict": verdict, "hypothesis_failure": hypothesis });
    Ok(Report { text, json, ok })
}

pub fn laws(builtin: Option<&str>, file: Option<&Path>, size: usize) -> Result<Report> {
    let q = match file {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            match FiniteQuantale::parse(&text) {
                Ok(q) => q,
                Err(e) => {
                    let text = format!("rejected: {e}\n");
                    return Ok(Report { text, json: json!({ "rejected": e.to_string() }), ok: false });
                }
            }
        }
        None => {
            let name = builtin.unwrap_or("bool");
            match FiniteQuantale::builtin(name) {
                Some(q) => q,
                None => bail!("unknown built-in quantale `{name}`; expected bool or chainK with K >= 2"),
            }
        }
    };
    let report = check_section3_props(&q, size)?;
    let ok = report.passed();
    Ok(Report { text: report.to_string(), json: serde_json::to_value(&report)?, ok })
}

pub fn judge(cfg: &RunConfig, path: &Path, dlog: bool) -> Result<Report> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let d = Derivation::from_json_str(&text, &PrimRegistry::standard())
        .map_err(|e: DerivationError| anyhow::anyhow!("{}: schema error: {e}", path.display()))?;
    let c = &d.conclusion;
    if let Err(bad) = check_derivation(&d) {
        let json = json!({ "valid": false, "error": bad });
        return Ok(Report { text: format!("invalid: {bad}\n"), json, ok: false });
    }
    let mut text = format!("valid: {c} ({} nodes, depth {})\n", d.size(), d.depth());
    let mut json = json!({ "valid": true, "conclusion": c.to_json(), "nodes": d.size(), "depth": d.depth() });
    let mut ok = true;
    if dlog {
        if !c.ctx.is_empty() {
            bail!("--dlog needs a closed conclusion");
        }
        let probes = DlogProbes::for_type(&c.ty, 24, 8, cfg.seed);
        let v = check_dlog(&c.ty, &c.t, &c.a, &c.t2, &probes).map_err(|e| Invalid(e.to_string()))?;
        ok = v.is_consistent();
        writeln!(text, "dlog: {v}")?;
        json["dlog"] = serde_json::to_value(&v)?;
    }
    Ok(Report { text, json, ok })
}

pub fn fundamental(cfg: &RunConfig, path: &Path, expr: &str) -> Result<Report> {
    let src = Source::load(path, cfg.eps.as_deref())?;
    let (t, ty) = src.closed(expr)?;
    let probes = generate_probes(&ty, cfg.probe_config()?)?;
    let v = check_fundamental(&t, &probes)?;
    verdict_report(expr, &ty, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RelationArg {
    Rho,
    Gamma,
    Eta,
    Delta,
    Dlog,
}

pub fn check(cfg: &RunConfig, rel: RelationArg, path: &Path, f: &str, a: &str, g: &str) -> Result<Report> {
    let src = Source::load(path, cfg.eps.as_deref())?;
    let (tf, ty) = src.closed(f)?;
    let (tg, ty2) = src.closed(g)?;
    let (ta, aty) = src.closed(a)?;
    if ty != ty2 {
        return Err(Invalid(format!("`{f}` has type {ty} but `{g}` has type {ty2}")).into());
    }
    if aty != partial_type(&ty) {
        return Err(Invalid(format!("`{a}` should have type {}, found {aty}", partial_type(&ty))).into());
    }
    let v = if rel == RelationArg::Dlog {
        let probes = DlogProbes::for_type(&ty, 24, 8, cfg.seed);
        check_dlog(&ty, &tf, &ta, &tg, &probes).map_err(|e| Invalid(e.to_string()))?
    } else {
        let probes = generate_probes(&ty, cfg.probe_config()?)?;
        let (x, x2) = (eval_closed::<f64>(&tf)?, eval_closed::<f64>(&tg)?);
        let d = Diff::from_value(&ty, &eval_closed::<f64>(&ta)?).map_err(|e| Invalid(format!("`{a}`: {e}")))?;
        match rel {
            RelationArg::Rho => check_rho(&ty, &x, &d, &x2, &probes)?,
            RelationArg::Gamma => check_gamma(&ty, &x, &d, &x2, &probes, &SelfProbes::Estimated)?,
            RelationArg::Eta => check_eta(&ty, &x, &d, &x2, &probes, None)?,
            RelationArg::Delta => check_delta(&ty, &x, &d, &x2, &probes, &SelfProbes::Estimated)?,
            RelationArg::Dlog => unreachable!(),
        }
    };
    verdict_report(&format!("({f}, {a}, {g})"), &ty, v)
}

fn verdict_report(subject: &str, ty: &Type, v: Verdict) -> Result<Report> {
    let text = format!("{subject} : {ty}: {v}\n");
    let json = json!({ "subject": subject, "type": ty.ascii(), "result": v });
    Ok(Report { text, json, ok: v.is_consistent() })
}
