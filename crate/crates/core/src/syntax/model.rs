//! Model files: imports and classes.

use crate::ast::{
    Attribute, Bound, ClassDef, ConstraintZone, DomainDecl, Expr, ExprKind, Import, Item, Model,
    ObjectiveKind, RangeExpr, TypeRef, GLOBALS,
};
use crate::span::{Diagnostic, Diagnostics, SourceSpan};

use super::cursor::{Cursor, PResult};
use super::lexer::Tok;

/// Model name derived from a file path: the file stem.
pub fn model_name(file: &str) -> String {
    let base = file.rsplit(['/', '\\']).next().unwrap_or(file);
    match base.rfind('.') {
        Some(i) if i > 0 => base[..i].to_string(),
        _ => base.to_string(),
    }
}

pub fn parse_model(text: &str, file: &str) -> Result<Model, Diagnostics> {
    let mut p = ModelParser {
        c: Cursor::new(text, file),
        text,
    };
    let mut imports = Vec::new();
    let mut classes = Vec::new();
    while !p.c.at_eof() {
        if p.c.at_kw("import") {
            if let Ok(imp) = p.import() {
                imports.push(imp);
            }
        } else if p.c.at_kw("class") {
            if let Ok(class) = p.class() {
                classes.push(class);
            }
        } else {
            p.c.expected("`class` or `import`");
            p.c.next();
            p.c.recover();
        }
    }
    let mut diags = p.c.diags;
    if diags.is_empty() && classes.is_empty() {
        let span = SourceSpan::new(file.into(), 1, 1, 0, 0);
        diags.push(Diagnostic::error(span, "model declares no class"));
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    let main_class = classes[0].name.clone();
    Ok(Model {
        name: model_name(file),
        imports,
        classes,
        main_class,
    })
}

struct ModelParser<'a> {
    c: Cursor,
    text: &'a str,
}

/// `int`, `real`, `bool`, `set of int`, `set of E`, or an enum/class name.
pub(crate) fn parse_type(c: &mut Cursor) -> PResult<TypeRef> {
    if c.eat_kw("int") {
        return Ok(TypeRef::Int);
    }
    if c.eat_kw("real") {
        return Ok(TypeRef::Real);
    }
    if c.eat_kw("bool") {
        return Ok(TypeRef::Bool);
    }
    if c.at_kw("set") && c.peek_n(1).is_ident("of") {
        c.next();
        c.next();
        if c.eat_kw("int") {
            return Ok(TypeRef::SetOfInt);
        }
        let (name, _) = c.expect_ident("an element type")?;
        return Ok(TypeRef::SetOf(name));
    }
    let (name, _) = c.expect_ident("a type")?;
    Ok(TypeRef::Named(name))
}

impl ModelParser<'_> {
    fn import(&mut self) -> PResult<Import> {
        let kw = self.c.next().span;
        let start = kw.offset + kw.length as usize;
        while !self.c.at_sym(";") && !self.c.at_eof() {
            self.c.next();
        }
        let semi = self.c.expect_sym(";")?;
        let path = self.text[start..semi.offset].trim().to_string();
        if path.is_empty() {
            self.c.error_at(kw.clone(), "import names no data file");
            return Err(());
        }
        Ok(Import {
            path,
            span: kw.to(&semi),
        })
    }

    fn class(&mut self) -> PResult<ClassDef> {
        let kw = self.c.next().span;
        let (name, _) = self.c.expect_ident("a class name").map_err(|_| self.c.sync_statement())?;
        let superclass = if self.c.eat_kw("extends") {
            Some(self.c.expect_ident("a superclass name")?.0)
        } else {
            None
        };
        let open = self.c.expect_sym("{")?;
        let mut attributes = Vec::new();
        let mut zones = Vec::new();
        loop {
            if self.c.eat_sym("}") {
                break;
            }
            if self.c.at_eof() || self.c.at_kw("class") {
                self.c.error_at(open.clone(), format!("unterminated body of class `{name}`"));
                return Err(());
            }
            if self.c.eat_sym(";") {
                continue;
            }
            if self.c.at_kw("constraint") {
                if let Ok(z) = self.zone() {
                    zones.push(z);
                }
            } else {
                match self.attribute() {
                    Ok(a) => attributes.push(a),
                    Err(()) => self.c.sync_statement(),
                }
            }
        }
        Ok(ClassDef {
            name,
            superclass,
            attributes,
            zones,
            span: kw,
        })
    }

    fn attribute(&mut self) -> PResult<Attribute> {
        let start = self.c.peek().span.clone();
        let ty = parse_type(&mut self.c)?;
        let (name, _) = self.c.expect_ident("an attribute name")?;
        let mut shape = Vec::new();
        if self.c.eat_sym("[") {
            let (bounds, end) = self.c.list("]", |c| {
                let t = c.peek().clone();
                match t.tok {
                    Tok::Int(v) => {
                        c.next();
                        Ok(Bound::Int(v))
                    }
                    _ => c.expect_ident("an array bound").map(|(n, _)| Bound::Name(n)),
                }
            })?;
            if bounds.is_empty() || bounds.len() > 2 {
                self.c.error_at(end, "arrays have one or two dimensions");
                return Err(());
            }
            shape = bounds;
        }
        let domain = if self.c.eat_kw("in") {
            Some(self.domain()?)
        } else {
            None
        };
        let end = self.c.expect_sym(";")?;
        Ok(Attribute {
            name,
            ty,
            shape,
            domain,
            span: start.to(&end),
        })
    }

    fn domain(&mut self) -> PResult<DomainDecl> {
        if self.c.eat_sym("[") {
            let lo = self.c.expr()?;
            self.c.expect_sym(",")?;
            let hi = self.c.expr()?;
            self.c.expect_sym("]")?;
            return Ok(DomainDecl::Interval(lo, hi));
        }
        if self.c.eat_sym("{") {
            let (es, end) = self.c.list("}", |c| c.expr())?;
            if es.is_empty() {
                self.c.error_at(end, "empty domain set");
                return Err(());
            }
            return Ok(DomainDecl::Set(es));
        }
        let lo = self.c.expr()?;
        self.c.expect_sym("..")?;
        let hi = self.c.expr()?;
        Ok(DomainDecl::Interval(lo, hi))
    }

    fn zone(&mut self) -> PResult<ConstraintZone> {
        let kw = self.c.next().span;
        let (name, _) = self.c.expect_ident("a constraint zone name")?;
        let open = self.c.expect_sym("{")?;
        let items = self.block_items(&open, "constraint zone")?;
        Ok(ConstraintZone {
            name,
            items,
            span: kw,
        })
    }

    /// Items up to and including the closing `}`.
    fn block_items(&mut self, open: &SourceSpan, what: &str) -> PResult<Vec<Item>> {
        let mut items = Vec::new();
        loop {
            if self.c.eat_sym("}") {
                return Ok(items);
            }
            if self.c.at_eof() || self.c.at_kw("class") {
                self.c.error_at(open.clone(), format!("unterminated {what}"));
                return Err(());
            }
            if self.c.eat_sym(";") {
                continue;
            }
            match self.item() {
                Ok(it) => items.push(it),
                Err(()) => self.c.sync_statement(),
            }
        }
    }

    fn body(&mut self) -> PResult<Vec<Item>> {
        if self.c.at_sym("{") {
            let open = self.c.next().span;
            self.block_items(&open, "block")
        } else {
            Ok(vec![self.item()?])
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.c.peek().span.clone();
        if self.c.eat_kw("forall") {
            self.c.expect_sym("(")?;
            let (binders, _) = self.c.list(")", |c| {
                let (var, _) = c.expect_ident("a loop variable")?;
                c.expect_kw("in")?;
                let lo = c.expr()?;
                if c.eat_sym("..") {
                    let hi = c.expr()?;
                    return Ok((var, RangeExpr::Interval(lo, hi)));
                }
                match lo.kind {
                    ExprKind::Name(n) => Ok((var, RangeExpr::Named(n, lo.span))),
                    _ => {
                        c.error_at(lo.span, "expected a range `lo..hi` or an enum name");
                        Err(())
                    }
                }
            })?;
            if binders.is_empty() {
                self.c.error_at(start, "forall declares no loop variable");
                return Err(());
            }
            let mut body = self.body()?;
            // `forall(i in a, j in b)` nests, outermost first.
            for (var, range) in binders.into_iter().rev() {
                body = vec![Item::Forall {
                    var,
                    range,
                    body,
                    span: start.clone(),
                }];
            }
            return Ok(body.pop().expect("one binder at least"));
        }
        if self.c.eat_kw("if") {
            self.c.expect_sym("(")?;
            let cond = self.c.expr()?;
            self.c.expect_sym(")")?;
            let then_items = self.body()?;
            if self.c.at_sym(";") && self.c.peek_n(1).is_ident("else") {
                self.c.next();
            }
            let else_items = if self.c.eat_kw("else") {
                Some(self.body()?)
            } else {
                None
            };
            return Ok(Item::If {
                cond,
                then_items,
                else_items,
                span: start,
            });
        }
        if self.c.at_sym("[") {
            let kind = match &self.c.peek_n(1).tok {
                Tok::Ident(w) if w == "minimize" => Some(ObjectiveKind::Minimize),
                Tok::Ident(w) if w == "maximize" => Some(ObjectiveKind::Maximize),
                _ => None,
            };
            if let (Some(kind), true) = (kind, self.c.peek_n(2).is_sym("]")) {
                self.c.next();
                self.c.next();
                self.c.next();
                let expr = self.c.expr()?;
                let end = self.c.expect_sym(";")?;
                return Ok(Item::Objective {
                    kind,
                    expr,
                    span: start.to(&end),
                });
            }
        }
        let e = self.c.expr()?;
        self.c.expect_sym(";")?;
        Ok(match e.kind {
            ExprKind::Call(name, args) if GLOBALS.contains(&name.as_str()) => Item::Global {
                name,
                args,
                span: e.span,
            },
            kind => Item::Constraint(Expr::new(kind, e.span)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_class() {
        let m = parse_model("class A {}", "a.scm").unwrap();
        assert_eq!(m.name, "a");
        assert_eq!(m.main_class, "A");
        assert_eq!(m.classes.len(), 1);
        assert!(m.classes[0].attributes.is_empty());
    }

    #[test]
    fn empty_domain_is_not_a_parse_error() {
        let m = parse_model("class A { int x in [1,0]; }", "a.scm").unwrap();
        assert!(m.classes[0].attributes[0].domain.is_some());
    }

    #[test]
    fn unterminated_class_points_at_brace() {
        let err = parse_model("class A {\n  int x;\n", "a.scm").unwrap_err();
        let d = &err.0[0];
        assert!(d.message.contains("unterminated"), "{d}");
        assert_eq!((d.span.line, d.span.column), (1, 9));
    }

    #[test]
    fn recovers_at_statement_boundaries() {
        let src = "class A { int x; constraint c { x = ; x < 3; y +; } }";
        let err = parse_model(src, "a.scm").unwrap_err();
        assert_eq!(err.0.len(), 2, "{err}");
    }

    #[test]
    fn multi_binder_forall_nests() {
        let src = "class A { int x[2,2]; constraint c { forall(i in 1..2, j in 1..2) x[i,j] > 0; } }";
        let m = parse_model(src, "a.scm").unwrap();
        let Item::Forall { var, body, .. } = &m.classes[0].zones[0].items[0] else {
            panic!()
        };
        assert_eq!(var, "i");
        assert!(matches!(&body[0], Item::Forall { var, .. } if var == "j"));
    }

    #[test]
    fn single_item_if_else() {
        let src = "class A { int x; int y; constraint c { if (x < 1) y = 2; else y = 3; } }";
        let m = parse_model(src, "a.scm").unwrap();
        assert!(matches!(
            &m.classes[0].zones[0].items[0],
            Item::If { else_items: Some(e), .. } if e.len() == 1
        ));
    }

    #[test]
    fn globals_and_objectives() {
        let src = "class A { int x[3] in [1,3]; constraint c { alldifferent(x); [maximize] x[1] + x[2]; } }";
        let m = parse_model(src, "a.scm").unwrap();
        let items = &m.classes[0].zones[0].items;
        assert!(matches!(&items[0], Item::Global { name, .. } if name == "alldifferent"));
        assert!(matches!(&items[1], Item::Objective { kind: ObjectiveKind::Maximize, .. }));
    }
}
