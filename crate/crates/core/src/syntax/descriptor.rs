//! Backend descriptors (`.bd`): templates, symbols, rewrite rules and the
//! constructs a target cannot express.

use indexmap::IndexMap;

use crate::backend::schema::{self, FieldKind};
use crate::backend::{BackendDescriptor, Construct, Part, RuleSpec, Template, Unsupported, RULES};
use crate::span::{Diagnostics, SourceSpan};

use super::cursor::{Cursor, PResult};
use super::lexer::Tok;

pub fn parse_descriptor(text: &str, file: &str) -> Result<BackendDescriptor, Diagnostics> {
    let mut c = Cursor::new(text, file);
    let mut bd = BackendDescriptor {
        name: String::new(),
        file_extension: "txt".to_string(),
        header: String::new(),
        footer: String::new(),
        auto_parens: true,
        symbols: IndexMap::new(),
        templates: IndexMap::new(),
        rules: Vec::new(),
        unsupported: Vec::new(),
    };
    let mut named = false;
    while !c.at_eof() {
        if item(&mut c, &mut bd, &mut named).is_err() {
            c.recover();
        }
    }
    let eof = c.peek().span.clone();
    if !named && c.diags.is_empty() {
        c.error_at(eof.clone(), "missing `backend NAME;` declaration");
    }
    if !bd.templates.contains_key("Problem") && c.diags.is_empty() {
        c.error_at(eof, "descriptor has no `Problem` template");
    }
    if c.diags.is_empty() {
        Ok(bd)
    } else {
        Err(Diagnostics(c.diags))
    }
}

fn string(c: &mut Cursor, what: &str) -> PResult<String> {
    if let Tok::Str(s) = &c.peek().tok {
        let s = s.clone();
        c.next();
        Ok(s)
    } else {
        c.expected(what);
        Err(())
    }
}

fn strings(c: &mut Cursor) -> PResult<String> {
    let mut out = string(c, "a string")?;
    while let Tok::Str(s) = &c.peek().tok {
        out.push_str(&s.clone());
        c.next();
    }
    Ok(out)
}

fn word(c: &mut Cursor, what: &str) -> PResult<(String, SourceSpan)> {
    if let Tok::Ident(s) = &c.peek().tok {
        let s = s.clone();
        Ok((s, c.next().span))
    } else {
        c.expected(what);
        Err(())
    }
}

fn item(c: &mut Cursor, bd: &mut BackendDescriptor, named: &mut bool) -> PResult<()> {
    let (kw, span) = word(c, "a descriptor item")?;
    match kw.as_str() {
        "backend" => {
            let (name, _) = word(c, "a target name")?;
            if *named {
                c.error_at(span, "`backend` declared twice");
            }
            bd.name = name;
            *named = true;
        }
        "extension" => bd.file_extension = string(c, "a file extension")?,
        "header" => bd.header = strings(c)?,
        "footer" => bd.footer = strings(c)?,
        "parens" => {
            let (mode, mspan) = word(c, "`auto` or `none`")?;
            match mode.as_str() {
                "auto" => bd.auto_parens = true,
                "none" => bd.auto_parens = false,
                _ => c.error_at(mspan, format!("unknown parenthesization `{mode}`")),
            }
        }
        "symbol" => {
            let (concept, cspan) = word(c, "an operator concept")?;
            c.expect_sym("=")?;
            let s = string(c, "a symbol string")?;
            let is_op = crate::ast::BinOp::ALL.iter().any(|op| op.concept() == concept)
                || schema::UNARY_CONCEPTS.contains(&concept.as_str());
            if !is_op {
                c.error_at(cspan, format!("`{concept}` is not an operator concept"));
            } else {
                bd.symbols.insert(concept, s);
            }
        }
        "rule" => rule(c, bd)?,
        "unsupported" => {
            let (what, wspan) = word(c, "a construct")?;
            let fix = if c.eat_kw("fix") {
                Some(word(c, "a rule name")?)
            } else {
                None
            };
            let Some(construct) = Construct::from_keyword(&what) else {
                c.error_at(wspan, format!("unknown construct `{what}`"));
                return Err(());
            };
            if let Some((r, rspan)) = &fix {
                if !RULES.iter().any(|(n, _)| n == r) {
                    c.error_at(rspan.clone(), format!("unknown rewrite rule `{r}`"));
                }
            }
            bd.unsupported.push(Unsupported {
                construct,
                fix: fix.map(|(r, _)| r),
            });
        }
        "template" => {
            let (concept, cspan) = word(c, "a concept name")?;
            c.expect_sym(":")?;
            if schema::fields(&concept).is_none() {
                c.error_at(cspan.clone(), format!("unknown concept `{concept}`"));
                return Err(());
            }
            let mut scope = Scope {
                concept: &concept,
                vars: Vec::new(),
            };
            let parts = parts(c, &mut scope, &[";"])?;
            if bd.templates.contains_key(&concept) {
                c.error_at(cspan, format!("template `{concept}` defined twice"));
            }
            bd.templates.insert(concept.clone(), Template { concept, parts });
        }
        _ => {
            c.error_at(span, format!("unknown descriptor item `{kw}`"));
            return Err(());
        }
    }
    c.expect_sym(";")?;
    Ok(())
}

fn rule(c: &mut Cursor, bd: &mut BackendDescriptor) -> PResult<()> {
    let (name, span) = word(c, "a rule name")?;
    let mut spec = RuleSpec::new(&name);
    if c.eat_sym("(") {
        let (params, _) = c.list(")", |c| {
            let (k, kspan) = word(c, "a parameter name")?;
            c.expect_sym("=")?;
            let v = string(c, "a parameter value")?;
            Ok((k, kspan, v))
        })?;
        for (k, kspan, v) in params {
            if let Some((_, allowed)) = RULES.iter().find(|(n, _)| *n == name) {
                if !allowed.contains(&k.as_str()) {
                    c.error_at(kspan, format!("rule `{name}` has no parameter `{k}`"));
                }
            }
            spec.params.insert(k, v);
        }
    }
    if !RULES.iter().any(|(n, _)| *n == name) {
        c.error_at(span, format!("unknown rewrite rule `{name}`"));
        return Err(());
    }
    bd.rules.push(spec);
    Ok(())
}

/// What a name inside a template refers to.
#[derive(Clone, Copy)]
enum Kind {
    Concept(&'static str),
    /// An expression whose concept is known only at emit time.
    Expr,
    Text,
    Flag,
    List(&'static str),
    ExprList,
}

fn of_field(k: FieldKind) -> Kind {
    match k {
        FieldKind::Text => Kind::Text,
        FieldKind::Flag => Kind::Flag,
        FieldKind::Node(c) => Kind::Concept(c),
        FieldKind::List(c) => Kind::List(c),
        FieldKind::Expr => Kind::Expr,
        FieldKind::ExprList => Kind::ExprList,
    }
}

struct Scope<'a> {
    concept: &'a str,
    vars: Vec<(String, Kind)>,
}

impl Scope<'_> {
    fn resolve(&self, c: &mut Cursor, path: &[String], span: &SourceSpan) -> PResult<Kind> {
        let first = &path[0];
        let mut kind = if let Some((_, k)) = self.vars.iter().rev().find(|(v, _)| v == first) {
            *k
        } else if let Some(k) = schema::field(self.concept, first) {
            of_field(k)
        } else {
            c.error_at(
                span.clone(),
                format!("concept `{}` has no field `{first}`", self.concept),
            );
            return Err(());
        };
        for seg in &path[1..] {
            kind = match kind {
                Kind::Concept(con) => match schema::field(con, seg) {
                    Some(k) => of_field(k),
                    None => {
                        c.error_at(span.clone(), format!("concept `{con}` has no field `{seg}`"));
                        return Err(());
                    }
                },
                Kind::Expr => {
                    c.error_at(
                        span.clone(),
                        format!("cannot access `{seg}` of an expression; give its concept a template"),
                    );
                    return Err(());
                }
                _ => {
                    c.error_at(span.clone(), format!("`{seg}` accessed on a value without fields"));
                    return Err(());
                }
            };
        }
        Ok(kind)
    }
}

fn path(c: &mut Cursor) -> PResult<(Vec<String>, SourceSpan)> {
    let (first, span) = word(c, "a field name")?;
    let mut segs = vec![first];
    let mut end = span.clone();
    while c.eat_sym(".") {
        let (s, sp) = word(c, "a field name")?;
        segs.push(s);
        end = sp;
    }
    Ok((segs, span.to(&end)))
}

fn parts(c: &mut Cursor, scope: &mut Scope, stop: &[&str]) -> PResult<Vec<Part>> {
    let mut out = Vec::new();
    loop {
        if stop.iter().any(|s| c.at_sym(s)) || c.at_kw("separator") || c.at_eof() {
            return Ok(out);
        }
        match &c.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                c.next();
                out.push(Part::Lit(s));
            }
            Tok::Ident(_) => {
                let (p, span) = path(c)?;
                let kind = scope.resolve(c, &p, &span)?;
                if matches!(kind, Kind::List(_) | Kind::ExprList) {
                    c.error_at(span, format!("`{}` is a list; use foreach", p.join(".")));
                    return Err(());
                }
                out.push(Part::Field(p, span));
            }
            Tok::Sym("(") => {
                c.next();
                out.push(special(c, scope)?);
            }
            _ => {
                c.expected("a string, a field or `(`");
                return Err(());
            }
        }
    }
}

fn special(c: &mut Cursor, scope: &mut Scope) -> PResult<Part> {
    if c.eat_kw("isDefined") {
        c.expect_sym("(")?;
        let (p, span) = path(c)?;
        scope.resolve(c, &p, &span)?;
        c.expect_sym(")")?;
        c.expect_sym("?")?;
        let then = parts(c, scope, &[":", ")"])?;
        let otherwise = if c.eat_sym(":") {
            parts(c, scope, &[")"])?
        } else {
            Vec::new()
        };
        c.expect_sym(")")?;
        return Ok(Part::IfDefined { path: p, then, otherwise });
    }
    if c.eat_kw("foreach") {
        let (var, _) = word(c, "a loop variable")?;
        c.expect_kw("in")?;
        let (p, span) = path(c)?;
        let elem = match scope.resolve(c, &p, &span)? {
            Kind::List(con) => Kind::Concept(con),
            Kind::ExprList => Kind::Expr,
            _ => {
                c.error_at(span, format!("`{}` is not a list", p.join(".")));
                return Err(());
            }
        };
        c.expect_sym("?")?;
        scope.vars.push((var.clone(), elem));
        let body = parts(c, scope, &[")"]);
        scope.vars.pop();
        let body = body?;
        let separator = if c.eat_kw("separator") {
            string(c, "a separator string")?
        } else {
            String::new()
        };
        c.expect_sym(")")?;
        return Ok(Part::Foreach {
            var,
            path: p,
            body,
            separator,
        });
    }
    c.expected("`isDefined` or `foreach`");
    Err(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> String {
        parse_descriptor(text, "t.bd").unwrap_err().to_string()
    }

    #[test]
    fn minimal() {
        let bd = parse_descriptor("backend t; template Problem: \"x\" name;", "t.bd").unwrap();
        assert_eq!(bd.name, "t");
        assert_eq!(
            bd.templates["Problem"].parts[0],
            Part::Lit("x".to_string())
        );
    }

    #[test]
    fn unknown_field() {
        let e = err("backend t; template Problem: nme;");
        assert!(e.contains("concept `Problem` has no field `nme`"), "{e}");
        assert!(e.starts_with("t.bd:1:30: error"), "{e}");
    }

    #[test]
    fn unknown_concept() {
        assert!(err("backend t; template Problem: name; template Foo: \"\";").contains("unknown concept `Foo`"));
    }

    #[test]
    fn foreach_needs_list() {
        assert!(err("backend t; template Problem: (foreach v in name ? v);").contains("is not a list"));
    }

    #[test]
    fn list_needs_foreach() {
        assert!(err("backend t; template Problem: variables;").contains("use foreach"));
    }

    #[test]
    fn dotted_access_into_expression() {
        let e = err("backend t; template Problem: name; template Constraint: expr.left;");
        assert!(e.contains("cannot access `left`"), "{e}");
    }

    #[test]
    fn nested_paths_resolve() {
        let bd = parse_descriptor(
            "backend t; template Problem: (foreach v in variables ? v.domain.lo (isDefined(v.array) ? v.array.row) separator \",\");",
            "t.bd",
        )
        .unwrap();
        assert!(matches!(bd.templates["Problem"].parts[0], Part::Foreach { .. }));
    }

    #[test]
    fn unknown_rule_and_parameter() {
        assert!(err("backend t; rule frobnicate; template Problem: name;").contains("unknown rewrite rule"));
        assert!(err("backend t; rule rename_reserved_words(x = \"a\"); template Problem: name;")
            .contains("has no parameter `x`"));
    }

    #[test]
    fn symbol_must_name_an_operator() {
        assert!(err("backend t; symbol VarRef = \"x\"; template Problem: name;").contains("not an operator concept"));
    }

    #[test]
    fn problem_template_required() {
        assert!(err("backend t;").contains("no `Problem` template"));
    }
}
