use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dlr_core::syntax::{parse, parse_definitions, typecheck, Definition, PrimRegistry, Term, Type, TypingContext};

use crate::Invalid;

/// A definitions file, optionally with `eps` rebound.
pub struct Source {
    pub path: PathBuf,
    text: String,
    pub defs: Vec<Definition>,
    pub prims: PrimRegistry,
}

/// Name given to expressions passed on the command line.
const EXPR: &str = "__expr";

impl Source {
    pub fn load(path: &Path, eps: Option<&str>) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let text = match eps {
            Some(e) => rebind_eps(&text, e)?,
            None => text,
        };
        let prims = PrimRegistry::standard();
        let defs = parse_definitions(&text, &prims)
            .map_err(|e| Invalid(format!("{}:{e}", path.display())))?;
        Ok(Self { path: path.to_path_buf(), text, defs, prims })
    }

    /// A defined name, or any term over the definitions.
    pub fn term(&self, expr: &str) -> Result<Term> {
        if let Some(d) = self.defs.iter().find(|d| d.name == expr) {
            return Ok(d.term.clone());
        }
        let text = format!("{}\n{EXPR} = {expr}\n", self.text);
        let defs = parse_definitions(&text, &self.prims).with_context(|| format!("cannot parse `{expr}`"))?;
        Ok(defs.into_iter().last().expect("the expression was appended").term)
    }

    /// A closed term and its type; ill-typed terms are invalid input.
    pub fn closed(&self, expr: &str) -> Result<(Term, Type)> {
        let t = self.term(expr)?;
        let ty = typecheck(&TypingContext::new(), &t).map_err(|e| Invalid(format!("`{expr}`: {e}")))?;
        Ok((t, ty))
    }
}

/// Replaces the body of the one-line definition `eps = …` by `value`.
fn rebind_eps(text: &str, value: &str) -> Result<String> {
    match parse(value).ok().and_then(|t| t.as_lit().cloned()) {
        Some(r) if *r.numer() > 0.into() => {}
        _ => bail!("--eps expects a positive literal, found `{value}`"),
    }
    let mut found = false;
    let lines: Vec<String> = text
        .lines()
        .map(|line| {
            let code = line.split('#').next().unwrap_or("");
            let is_eps = code
                .split_once('=')
                .is_some_and(|(lhs, rhs)| lhs.trim() == "eps" && !rhs.starts_with('>'));
            if is_eps {
                found = true;
                format!("eps = {value}")
            } else {
                line.to_string()
            }
        })
        .collect();
    if !found {
        bail!("--eps given but the file defines no `eps`");
    }
    Ok(lines.join("\n") + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_is_rebound() {
        let out = rebind_eps("eps = 0.1 # step\nD = eps\n", "0.5").unwrap();
        assert_eq!(out, "eps = 0.5\nD = eps\n");
        assert!(rebind_eps("x = 1\n", "0.5").is_err());
        assert!(rebind_eps("eps = 1\n", "-1").is_err());
    }
}
