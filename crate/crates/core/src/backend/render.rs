//! Template interpretation over the flat model.

use crate::ast::{BinOp, ObjectiveKind, UnOp, UNARY_PRECEDENCE};
use crate::flat::{needs_parens, BaseType, Domain, FlatExpr, FlatModel, FlatTable, FlatVar, Objective};
use crate::value::{format_real, Value};

use super::{BackendDescriptor, BackendError, Part};

#[derive(Clone, Copy)]
enum Node<'a> {
    Problem(&'a FlatModel),
    Variable(&'a FlatVar),
    Array(&'a [usize]),
    Domain(&'a Domain),
    Table(&'a FlatTable),
    Constraint(&'a FlatExpr, usize),
    Comparison(BinOp, &'a FlatExpr, &'a FlatExpr),
    Objective(&'a Objective),
    EnumType(&'a str, &'a [String]),
    /// An expression; `wrap` asks for surrounding parentheses.
    Expr(&'a FlatExpr, bool),
}

enum Val<'a> {
    Text(String),
    Flag,
    Node(Node<'a>),
    List(Vec<Node<'a>>),
}

struct Ctx<'a> {
    bd: &'a BackendDescriptor,
}

fn flag<'a>(b: bool) -> Option<Val<'a>> {
    b.then_some(Val::Flag)
}

fn text<'a>(s: impl ToString) -> Option<Val<'a>> {
    Some(Val::Text(s.to_string()))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn exprs<'a>(es: &'a [FlatExpr]) -> Option<Val<'a>> {
    Some(Val::List(es.iter().map(|e| Node::Expr(e, false)).collect()))
}

impl<'a> Ctx<'a> {
    fn concept(&self, n: &Node<'a>) -> &'static str {
        match n {
            Node::Problem(_) => "Problem",
            Node::Variable(_) => "Variable",
            Node::Array(_) => "Array",
            Node::Domain(_) => "Domain",
            Node::Table(_) => "Table",
            Node::Constraint(..) => "Constraint",
            Node::Comparison(..) => "Comparison",
            Node::Objective(_) => "Objective",
            Node::EnumType(..) => "EnumType",
            Node::Expr(e, _) => match e {
                FlatExpr::Lit(Value::Int(_)) => "IntLit",
                FlatExpr::Lit(Value::Real(_)) => "RealLit",
                FlatExpr::Lit(Value::Bool(_)) => "BoolLit",
                FlatExpr::Lit(Value::Set(_)) | FlatExpr::SetLit(_) => "SetLit",
                FlatExpr::ArrayLit(_) => "ArrayLit",
                FlatExpr::Ref { index, .. } if index.is_empty() => "VarRef",
                FlatExpr::Ref { .. } => "ElemRef",
                FlatExpr::Call(..) => "Call",
                FlatExpr::Unary(op, _) if self.bd.templates.contains_key(op.concept()) => op.concept(),
                FlatExpr::Unary(..) => "Unary",
                FlatExpr::Binary(op, ..) if self.bd.templates.contains_key(op.concept()) => op.concept(),
                FlatExpr::Binary(..) => "Binary",
            },
        }
    }

    fn bin_sym(&self, op: BinOp) -> String {
        match self.bd.symbols.get(op.concept()) {
            Some(s) => s.clone(),
            None if op.is_word() || op.is_logical() => format!(" {} ", op.symbol()),
            None => op.symbol().to_string(),
        }
    }

    fn un_sym(&self, op: UnOp) -> String {
        match self.bd.symbols.get(op.concept()) {
            Some(s) => s.clone(),
            None if op == UnOp::Not => "not ".to_string(),
            None => op.symbol().to_string(),
        }
    }

    fn child(&self, parent: BinOp, e: &'a FlatExpr, right: bool) -> Node<'a> {
        let wrap = self.bd.auto_parens
            && (needs_parens(parent.precedence(), e.precedence(), right, parent.is_right_assoc())
                || (right && e.starts_with_minus()));
        Node::Expr(e, wrap)
    }

    fn field(&self, n: &Node<'a>, name: &str) -> Option<Val<'a>> {
        match *n {
            Node::Problem(fm) => match name {
                "name" => text(&fm.name),
                "variables" => Some(Val::List(fm.variables.iter().map(Node::Variable).collect())),
                "tables" => Some(Val::List(fm.tables.iter().map(Node::Table).collect())),
                "constraints" => Some(Val::List(
                    fm.constraints
                        .iter()
                        .enumerate()
                        .map(|(i, c)| Node::Constraint(&c.expr, i + 1))
                        .collect(),
                )),
                "objective" => fm.objective.as_ref().map(|o| Val::Node(Node::Objective(o))),
                "enumTypes" => Some(Val::List(
                    fm.enum_types
                        .iter()
                        .map(|(k, v)| Node::EnumType(k.as_str(), v.as_slice()))
                        .collect(),
                )),
                _ => None,
            },
            Node::Variable(v) => match name {
                "name" => text(&v.name),
                "type" => text(v.type_name()),
                "base" => text(v.base.keyword()),
                "enumTag" => v.enum_tag.as_ref().and_then(text),
                "array" => (!v.shape.is_empty()).then(|| Val::Node(Node::Array(&v.shape))),
                "domain" => Some(Val::Node(Node::Domain(&v.domain))),
                "size" => text(v.len()),
                "scalar" => flag(v.shape.is_empty()),
                "vector" => flag(v.shape.len() == 1),
                "matrix" => flag(v.shape.len() == 2),
                "isInt" => flag(v.base == BaseType::Int),
                "isBool" => flag(v.base == BaseType::Bool),
                "isReal" => flag(v.base == BaseType::Real),
                "isSet" => flag(v.base == BaseType::SetOfInt),
                _ => None,
            },
            Node::Array(shape) => match name {
                "row" => shape.first().and_then(text),
                "col" => shape.get(1).and_then(text),
                "size" => text(shape.iter().product::<usize>()),
                _ => None,
            },
            Node::Domain(d) => match (name, d) {
                ("lo", Domain::RealRange(lo, _)) => text(format_real(*lo)),
                ("hi", Domain::RealRange(_, hi)) => text(format_real(*hi)),
                ("lo", _) => d.bounds().and_then(|b| text(b.0)),
                ("hi", _) => d.bounds().and_then(|b| text(b.1)),
                ("elements", Domain::IntSet(vs)) => text(join(vs)),
                ("interval", _) => flag(!matches!(d, Domain::IntSet(_))),
                ("set", _) => flag(matches!(d, Domain::IntSet(_))),
                ("real", _) => flag(matches!(d, Domain::RealRange(..))),
                _ => None,
            },
            Node::Table(t) => match name {
                "name" => text(&t.name),
                "type" => text(t.base.keyword()),
                "array" => (!t.shape.is_empty()).then(|| Val::Node(Node::Array(&t.shape))),
                "values" => text(join(&t.values)),
                "size" => text(t.values.len()),
                _ => None,
            },
            Node::Constraint(e, i) => match name {
                "expr" => Some(Val::Node(Node::Expr(e, false))),
                "index" => text(i),
                "cmp" => match e {
                    FlatExpr::Binary(op, l, r) if op.is_comparison() => {
                        Some(Val::Node(Node::Comparison(*op, l, r)))
                    }
                    _ => None,
                },
                _ => None,
            },
            Node::Comparison(op, l, r) => self.binary_field(op, l, r, name),
            Node::Objective(o) => match name {
                "kind" => text(match o.kind {
                    ObjectiveKind::Minimize => "minimize",
                    ObjectiveKind::Maximize => "maximize",
                }),
                "expr" => Some(Val::Node(Node::Expr(&o.expr, false))),
                "minimize" => flag(o.kind == ObjectiveKind::Minimize),
                "maximize" => flag(o.kind == ObjectiveKind::Maximize),
                _ => None,
            },
            Node::EnumType(n, vs) => match name {
                "name" => text(n),
                "values" => text(vs.join(",")),
                "size" => text(vs.len()),
                _ => None,
            },
            Node::Expr(e, _) => match (e, name) {
                (FlatExpr::Lit(v), "value") => text(v),
                (FlatExpr::SetLit(es) | FlatExpr::ArrayLit(es), "elements") => exprs(es),
                (FlatExpr::Ref { name: n, .. }, "name") => text(n),
                (FlatExpr::Ref { index, .. }, "index") if !index.is_empty() => exprs(index),
                (FlatExpr::Ref { index, .. }, "constIndex") => {
                    flag(!index.is_empty() && index.iter().all(|i| i.as_const_int().is_some()))
                }
                (FlatExpr::Ref { index, .. }, "varIndex") => {
                    flag(index.iter().any(|i| i.as_const_int().is_none()))
                }
                (FlatExpr::Call(n, _), "name") => text(n),
                (FlatExpr::Call(_, args), "args") => exprs(args),
                (FlatExpr::Unary(op, x), _) => match name {
                    "operand" => {
                        let wrap = self.bd.auto_parens
                            && *op != UnOp::Card
                            && (x.precedence() < UNARY_PRECEDENCE || x.starts_with_minus());
                        Some(Val::Node(Node::Expr(x, wrap)))
                    }
                    "sym" => text(self.un_sym(*op)),
                    "op" => text(op.symbol()),
                    _ => None,
                },
                (FlatExpr::Binary(op, l, r), _) => self.binary_field(*op, l, r, name),
                _ => None,
            },
        }
    }

    fn binary_field(&self, op: BinOp, l: &'a FlatExpr, r: &'a FlatExpr, name: &str) -> Option<Val<'a>> {
        match name {
            "left" => Some(Val::Node(self.child(op, l, false))),
            "right" => Some(Val::Node(self.child(op, r, true))),
            "sym" => text(self.bin_sym(op)),
            "op" => text(op.symbol()),
            _ => None,
        }
    }

    fn render_node(&self, n: Node<'a>, out: &mut String) -> Result<(), BackendError> {
        let concept = self.concept(&n);
        let t = self
            .bd
            .template(concept)
            .ok_or_else(|| BackendError::MissingTemplate(concept.to_string()))?;
        let wrap = matches!(n, Node::Expr(_, true));
        if wrap {
            out.push('(');
        }
        let mut env = Vec::new();
        self.parts(&t.parts, n, &mut env, out)?;
        if wrap {
            out.push(')');
        }
        Ok(())
    }

    /// Resolves `path`; `Ok(Err((concept, field)))` names the first absent field.
    fn lookup(
        &self,
        path: &[String],
        this: Node<'a>,
        env: &[(&str, Node<'a>)],
    ) -> Result<Result<Val<'a>, (String, String)>, BackendError> {
        let mut owner = self.concept(&this);
        let mut cur = match env.iter().rev().find(|(v, _)| *v == path[0]) {
            Some((_, n)) => Some(Val::Node(*n)),
            None => self.field(&this, &path[0]),
        };
        for (k, seg) in path.iter().enumerate().skip(1) {
            cur = match cur {
                Some(Val::Node(n)) => {
                    owner = self.concept(&n);
                    self.field(&n, seg)
                }
                Some(_) => {
                    return Err(BackendError::AbsentField {
                        concept: owner.to_string(),
                        field: seg.clone(),
                    })
                }
                None => return Ok(Err((owner.to_string(), path[k - 1].clone()))),
            };
        }
        Ok(cur.ok_or_else(|| (owner.to_string(), path.last().unwrap().clone())))
    }

    fn parts(
        &self,
        parts: &'a [Part],
        this: Node<'a>,
        env: &mut Vec<(&'a str, Node<'a>)>,
        out: &mut String,
    ) -> Result<(), BackendError> {
        for p in parts {
            match p {
                Part::Lit(s) => out.push_str(s),
                Part::Field(path, _) => match self.lookup(path, this, env)? {
                    Ok(Val::Text(s)) => out.push_str(&s),
                    Ok(Val::Flag) => {}
                    Ok(Val::Node(n)) => self.render_node(n, out)?,
                    Ok(Val::List(_)) => unreachable!("rejected when the descriptor is parsed"),
                    Err((concept, field)) => return Err(BackendError::AbsentField { concept, field }),
                },
                Part::IfDefined { path, then, otherwise } => {
                    let defined = match self.lookup(path, this, env)? {
                        Err(_) => false,
                        Ok(Val::List(xs)) => !xs.is_empty(),
                        Ok(_) => true,
                    };
                    self.parts(if defined { then } else { otherwise }, this, env, out)?;
                }
                Part::Foreach {
                    var,
                    path,
                    body,
                    separator,
                } => {
                    let items = match self.lookup(path, this, env)? {
                        Ok(Val::List(xs)) => xs,
                        _ => Vec::new(),
                    };
                    for (i, item) in items.into_iter().enumerate() {
                        if i > 0 {
                            out.push_str(separator);
                        }
                        env.push((var.as_str(), item));
                        let r = self.parts(body, this, env, out);
                        env.pop();
                        r?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Set-valued literals render through the `SetLit` template like written sets.
fn expand_set_literals(fm: &FlatModel) -> FlatModel {
    let mut fm = fm.clone();
    let mut f = |e: FlatExpr| match e {
        FlatExpr::Lit(Value::Set(s)) => FlatExpr::SetLit(s.into_iter().map(FlatExpr::int).collect()),
        e => e,
    };
    for c in &mut fm.constraints {
        c.expr = std::mem::replace(&mut c.expr, FlatExpr::int(0)).map(&mut f);
    }
    if let Some(o) = &mut fm.objective {
        o.expr = std::mem::replace(&mut o.expr, FlatExpr::int(0)).map(&mut f);
    }
    fm
}

/// Renders `fm` with the descriptor's templates, without running its rules.
pub fn render(fm: &FlatModel, bd: &BackendDescriptor) -> Result<String, BackendError> {
    let fm = expand_set_literals(fm);
    let ctx = Ctx { bd };
    let mut out = bd.header.clone();
    ctx.render_node(Node::Problem(&fm), &mut out)?;
    out.push_str(&bd.footer);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_descriptor;

    fn model() -> FlatModel {
        FlatModel {
            name: "m".into(),
            variables: vec![FlatVar {
                name: "x".into(),
                base: BaseType::Int,
                shape: vec![],
                domain: Domain::IntRange(0, 9),
                enum_tag: None,
            }],
            constraints: vec![crate::flat::FlatConstraint {
                expr: FlatExpr::bin(
                    BinOp::Mul,
                    FlatExpr::bin(BinOp::Add, FlatExpr::var("x"), FlatExpr::int(1)),
                    FlatExpr::int(-2),
                ),
            }],
            ..Default::default()
        }
    }

    const BASE: &str = r#"backend t;
        template Problem: (foreach c in constraints ? c.expr separator "\n");
        template VarRef: name; template IntLit: value;
        template Binary: left sym right;"#;

    #[test]
    fn auto_parens() {
        let bd = parse_descriptor(BASE, "t.bd").unwrap();
        assert_eq!(render(&model(), &bd).unwrap(), "(x+1)*(-2)\n");
    }

    #[test]
    fn no_parens_and_symbols() {
        let text = format!("{BASE} parens none; symbol Mul = \" times \";");
        let bd = parse_descriptor(&text, "t.bd").unwrap();
        assert_eq!(render(&model(), &bd).unwrap(), "x+1 times -2\n");
    }

    #[test]
    fn missing_template_names_concept() {
        let bd = parse_descriptor("backend t; template Problem: (foreach c in constraints ? c.expr);", "t.bd")
            .unwrap();
        let e = render(&model(), &bd).unwrap_err().to_string();
        assert!(e.contains("`Binary`"), "{e}");
    }

    #[test]
    fn absent_field_names_concept_and_field() {
        let bd = parse_descriptor(
            "backend t; template Problem: (foreach v in variables ? v.array.row);",
            "t.bd",
        )
        .unwrap();
        let e = render(&model(), &bd).unwrap_err().to_string();
        assert!(e.contains("`Variable`") && e.contains("`array`"), "{e}");
    }

    #[test]
    fn is_defined_chooses_branch() {
        let bd = parse_descriptor(
            r#"backend t; template Problem: (foreach v in variables ? (isDefined(v.array) ? "arr" : "scalar")) (isDefined(tables) ? "T");"#,
            "t.bd",
        )
        .unwrap();
        assert_eq!(render(&model(), &bd).unwrap(), "scalar\n");
    }
}
