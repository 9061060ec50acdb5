//! Solution files: one `name = value` or `name = [v1, v2, ...]` per line.
//!
//! Values of enum-typed variables print as labels. Arrays are listed in
//! row-major order. `%` starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::flat::{BaseType, FlatModel, FlatVar, Solution};
use crate::span::Diagnostics;
use crate::value::Value;

use super::cursor::{Cursor, PResult};
use super::lexer::Tok;

fn label(fm: &FlatModel, var: &FlatVar, v: i64) -> Option<String> {
    let values = fm.enum_types.get(var.enum_tag.as_ref()?)?;
    let k = usize::try_from(v).ok()?.checked_sub(1)?;
    values.get(k).cloned()
}

fn render_value(fm: &FlatModel, var: &FlatVar, v: &Value) -> String {
    match v {
        Value::Int(i) => label(fm, var, *i).unwrap_or_else(|| i.to_string()),
        Value::Set(s) if var.enum_tag.is_some() => {
            let parts: Vec<String> = s
                .iter()
                .map(|i| label(fm, var, *i).unwrap_or_else(|| i.to_string()))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
        Value::Set(s) => {
            let parts: Vec<String> = s.iter().map(i64::to_string).collect();
            format!("{{{}}}", parts.join(", "))
        }
        v => v.to_string(),
    }
}

/// Renders the assignment of every variable of `fm`, in declaration order.
pub fn render_solution(fm: &FlatModel, s: &Solution) -> String {
    let mut out = String::new();
    for var in &fm.variables {
        let Some(vals) = s.get(&var.name) else { continue };
        let vs: Vec<String> = vals.iter().map(|v| render_value(fm, var, v)).collect();
        if var.shape.is_empty() && vs.len() == 1 {
            writeln!(out, "{} = {}", var.name, vs[0]).unwrap();
        } else {
            writeln!(out, "{} = [{}]", var.name, vs.join(", ")).unwrap();
        }
    }
    if let Some(obj) = &s.objective {
        writeln!(out, "% objective = {obj}").unwrap();
    }
    out
}

/// Blanks out `%` comments so spans keep their columns.
fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| match l.find('%') {
            Some(i) => format!("{}{}", &l[..i], " ".repeat(l.len() - i)),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses a solution for `fm`. Every variable must be assigned exactly once.
pub fn parse_solution(text: &str, file: &str, fm: &FlatModel) -> Result<Solution, Diagnostics> {
    let text = strip_comments(text);
    let mut c = Cursor::new(&text, file);
    let mut sol = Solution::default();
    while !c.at_eof() {
        if assignment(&mut c, fm, &mut sol).is_err() {
            // Resume at the next `name =`.
            while !c.at_eof() && !(matches!(c.peek().tok, Tok::Ident(_)) && c.peek_n(1).is_sym("=")) {
                c.next();
            }
        }
    }
    let end = c.peek().span.clone();
    if c.diags.is_empty() {
        for v in &fm.variables {
            if !sol.values.contains_key(&v.name) {
                c.error_at(end.clone(), format!("no value for `{}`", v.name));
            }
        }
    }
    if c.diags.is_empty() {
        let mut ordered = Solution::default();
        for v in &fm.variables {
            ordered.values.insert(v.name.clone(), sol.values.swap_remove(&v.name).unwrap());
        }
        Ok(ordered)
    } else {
        Err(Diagnostics(c.diags))
    }
}

fn assignment(c: &mut Cursor, fm: &FlatModel, sol: &mut Solution) -> PResult<()> {
    let (name, span) = match &c.peek().tok {
        Tok::Ident(n) => {
            let n = n.clone();
            (n, c.next().span)
        }
        _ => {
            c.expected("a variable name");
            return Err(());
        }
    };
    c.expect_sym("=")?;
    let Some(var) = fm.var(&name) else {
        c.error_at(span, format!("unknown variable `{name}`"));
        return Err(());
    };
    let vals = if c.eat_sym("[") {
        let (vs, end) = c.list("]", |c| value(c, fm, var))?;
        if vs.len() != var.len() {
            c.error_at(end, format!("`{name}` needs {} values, found {}", var.len(), vs.len()));
            return Err(());
        }
        vs
    } else {
        let v = value(c, fm, var)?;
        if var.len() != 1 {
            c.error_at(span, format!("`{name}` is an array of {} values", var.len()));
            return Err(());
        }
        vec![v]
    };
    if sol.values.insert(name.clone(), vals).is_some() {
        c.error_at(span, format!("`{name}` assigned twice"));
    }
    Ok(())
}

fn element(c: &mut Cursor, fm: &FlatModel, var: &FlatVar) -> PResult<i64> {
    let t = c.peek().clone();
    let neg = c.eat_sym("-");
    match &c.peek().tok {
        Tok::Int(v) => {
            let v = if neg { -*v } else { *v };
            c.next();
            Ok(v)
        }
        Tok::Ident(l) if !neg => {
            let l = l.clone();
            let pos = var
                .enum_tag
                .as_ref()
                .and_then(|tag| fm.enum_types.get(tag))
                .and_then(|vs| vs.iter().position(|x| *x == l));
            match pos {
                Some(p) => {
                    c.next();
                    Ok(p as i64 + 1)
                }
                None => {
                    c.error_at(t.span, format!("`{l}` is not a value of `{}`", var.name));
                    Err(())
                }
            }
        }
        _ => {
            c.expected("an integer");
            Err(())
        }
    }
}

fn value(c: &mut Cursor, fm: &FlatModel, var: &FlatVar) -> PResult<Value> {
    match var.base {
        BaseType::SetOfInt => {
            c.expect_sym("{")?;
            let (es, _) = c.list("}", |c| element(c, fm, var))?;
            Ok(Value::Set(es.into_iter().collect::<BTreeSet<_>>()))
        }
        BaseType::Bool => match c.peek().tok.clone() {
            Tok::Ident(w) if w == "true" || w == "false" => {
                c.next();
                Ok(Value::Bool(w == "true"))
            }
            _ => {
                c.expected("`true` or `false`");
                Err(())
            }
        },
        BaseType::Real => {
            let neg = c.eat_sym("-");
            let r = match c.peek().tok {
                Tok::Real(r) => r,
                Tok::Int(i) => i as f64,
                _ => {
                    c.expected("a number");
                    return Err(());
                }
            };
            c.next();
            Ok(Value::Real(if neg { -r } else { r }))
        }
        BaseType::Int => element(c, fm, var).map(Value::Int),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::Domain;

    fn model() -> FlatModel {
        let mut fm = FlatModel::default();
        fm.enum_types.insert("E".into(), vec!["a".into(), "b".into()]);
        fm.variables = vec![
            FlatVar {
                name: "x".into(),
                base: BaseType::Int,
                shape: vec![2],
                domain: Domain::IntRange(1, 2),
                enum_tag: Some("E".into()),
            },
            FlatVar {
                name: "s".into(),
                base: BaseType::SetOfInt,
                shape: vec![],
                domain: Domain::IntRange(-3, 3),
                enum_tag: None,
            },
            FlatVar {
                name: "b".into(),
                base: BaseType::Bool,
                shape: vec![],
                domain: Domain::IntRange(0, 1),
                enum_tag: None,
            },
        ];
        fm
    }

    #[test]
    fn round_trip_with_labels() {
        let fm = model();
        let mut s = Solution::default();
        s.values.insert("x".into(), vec![Value::Int(2), Value::Int(1)]);
        s.values.insert("s".into(), vec![Value::Set([-2, 3].into_iter().collect())]);
        s.values.insert("b".into(), vec![Value::Bool(true)]);
        let text = render_solution(&fm, &s);
        assert_eq!(text, "x = [b, a]\ns = {-2, 3}\nb = true\n");
        assert_eq!(parse_solution(&text, "s.sol", &fm).unwrap(), s);
    }

    #[test]
    fn comments_and_errors() {
        let fm = model();
        let ok = "% solution 1\nb = false % trailing\ns = {}\nx = [1, 2]\n";
        assert!(parse_solution(ok, "s.sol", &fm).is_ok());
        let e = parse_solution("x = [a]\nb = true\ns = {}", "s.sol", &fm).unwrap_err().to_string();
        assert!(e.contains("needs 2 values"), "{e}");
        let e = parse_solution("x = [a, c]\nb = true\ns = {}", "s.sol", &fm).unwrap_err().to_string();
        assert!(e.contains("`c` is not a value of `x`"), "{e}");
        let e = parse_solution("b = true", "s.sol", &fm).unwrap_err().to_string();
        assert!(e.contains("no value for `x`"), "{e}");
    }
}
