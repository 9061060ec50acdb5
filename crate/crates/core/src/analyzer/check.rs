use std::collections::HashMap;

use indexmap::IndexMap;

use super::bind::bind_data;
use super::inherit::{check_inheritance, linearize_inheritance};
use super::*;
use crate::data::{ConstDecl, DataValue, DataValueKind};
use crate::eval::{apply_binary, apply_unary};

struct Scope<'s> {
    class: Option<&'s TClass>,
    loops: Vec<(String, Ty)>,
    in_loop: usize,
    in_cond: usize,
}

pub(crate) struct Analyzer {
    diags: Vec<Diagnostic>,
    enums: IndexMap<String, Vec<String>>,
    /// Enum label to (enum, ordinal) candidates.
    labels: HashMap<String, Vec<(String, i64)>>,
    constants: IndexMap<String, ConstVal>,
    class_names: Vec<String>,
    /// Attribute types per class, for `.field` lookups across classes.
    attr_types: HashMap<String, IndexMap<String, Ty>>,
}

impl Analyzer {
    pub(crate) fn run(m: &Model, d: &DataFile) -> Result<TypedModel, Diagnostics> {
        let inh = check_inheritance(m);
        if !inh.is_empty() {
            return Err(Diagnostics(inh));
        }
        let lin = linearize_inheritance(m)?;
        let mut a = Analyzer {
            diags: Vec::new(),
            enums: IndexMap::new(),
            labels: HashMap::new(),
            constants: IndexMap::new(),
            class_names: lin.classes.iter().map(|c| c.name.clone()).collect(),
            attr_types: HashMap::new(),
        };
        for (i, c) in lin.classes.iter().enumerate() {
            if lin.classes[..i].iter().any(|p| p.name == c.name) {
                a.error(&c.span, format!("class `{}` declared twice", c.name));
            }
        }
        for e in d.enums.values() {
            if a.class_names.contains(&e.name) {
                a.error(&e.span, format!("enum `{}` has the same name as a class", e.name));
            }
            for (k, label) in e.values.iter().enumerate() {
                a.labels
                    .entry(label.clone())
                    .or_default()
                    .push((e.name.clone(), k as i64 + 1));
            }
            a.enums.insert(e.name.clone(), e.values.clone());
        }
        for c in d.constants.values() {
            if let Some(v) = a.const_val(c) {
                a.constants.insert(c.name.clone(), v);
            }
        }

        // Attribute headers first, so zones can refer to any class.
        let mut classes: Vec<TClass> = lin
            .classes
            .iter()
            .map(|c| TClass {
                name: c.name.clone(),
                attributes: c.attributes.iter().map(|at| a.attr(at)).collect(),
                zones: Vec::new(),
                span: c.span.clone(),
            })
            .collect();
        for c in &classes {
            let tys = c.attributes.iter().map(|at| (at.name.clone(), at.full_ty())).collect();
            a.attr_types.insert(c.name.clone(), tys);
        }
        a.check_composition(&classes);
        let counts = instance_counts(&classes, &lin.main_class);
        let mut objectives = Vec::new();
        for (ci, c) in lin.classes.iter().enumerate() {
            let mut zones = Vec::new();
            for z in &c.zones {
                let mut scope = Scope {
                    class: Some(&classes[ci]),
                    loops: Vec::new(),
                    in_loop: 0,
                    in_cond: 0,
                };
                let items = z
                    .items
                    .iter()
                    .filter_map(|it| a.item(it, &mut scope, &mut objectives, counts.get(&c.name)))
                    .collect();
                zones.push(TZone {
                    name: z.name.clone(),
                    items,
                    span: z.span.clone(),
                });
            }
            classes[ci].zones = zones;
        }
        if objectives.len() > 1 {
            let span = objectives[1].clone();
            a.error(&span, "more than one objective in the model");
        }

        let mut tm = TypedModel {
            name: lin.name.clone(),
            main_class: lin.main_class.clone(),
            imports: lin.imports.clone(),
            classes,
            enums: a.enums.clone(),
            constants: a.constants.clone(),
            enum_tables: IndexMap::new(),
            warnings: Vec::new(),
        };
        if !a.diags.iter().any(Diagnostic::is_error) {
            match bind_data(&tm, d) {
                Ok((_, warnings)) => a.diags.extend(warnings),
                Err(errs) => a.diags.extend(errs.0),
            }
        }
        if a.diags.iter().any(Diagnostic::is_error) {
            return Err(Diagnostics(a.diags));
        }
        tm.warnings = a.diags;
        Ok(tm)
    }

    fn error(&mut self, span: &SourceSpan, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span.clone(), msg));
    }

    fn warn(&mut self, span: &SourceSpan, msg: impl Into<String>) {
        self.diags.push(Diagnostic::warning(span.clone(), msg));
    }

    fn const_val(&mut self, c: &ConstDecl) -> Option<ConstVal> {
        let elem = match &c.ty {
            TypeRef::Int => Ty::Int,
            TypeRef::Real => Ty::Real,
            TypeRef::Bool => Ty::Bool,
            TypeRef::SetOfInt => Ty::Set,
            TypeRef::SetOf(e) if self.enums.contains_key(e) => Ty::Set,
            TypeRef::Named(e) if self.enums.contains_key(e) => Ty::Enum(e.clone()),
            other => {
                self.error(
                    &c.span,
                    format!("constant `{}` has unsupported type `{}`", c.name, crate::syntax::printer::type_name(other)),
                );
                return None;
            }
        };
        let (shape, cells) = self.const_cells(&c.value)?;
        let set_enum = match &c.ty {
            TypeRef::SetOf(e) => Some(e.clone()),
            _ => None,
        };
        let mut values = Vec::new();
        for cell in cells {
            values.push(self.const_scalar(&elem, set_enum.as_deref(), cell)?);
        }
        Some(ConstVal {
            elem,
            shape,
            values,
        })
    }

    fn const_cells<'v>(&mut self, v: &'v DataValue) -> Option<(Vec<usize>, Vec<&'v DataValue>)> {
        let rows: Vec<&DataValue> = match &v.kind {
            DataValueKind::Array(vs) => vs.iter().collect(),
            DataValueKind::Keyed(kvs) => {
                let ordered = self.order_keyed(kvs, &v.span)?;
                ordered
            }
            _ => return Some((Vec::new(), vec![v])),
        };
        if rows.is_empty() {
            self.error(&v.span, "constant arrays must not be empty");
            return None;
        }
        let nested = rows
            .iter()
            .filter(|r| matches!(r.kind, DataValueKind::Array(_) | DataValueKind::Keyed(_)))
            .count();
        if nested == 0 {
            return Some((vec![rows.len()], rows));
        }
        if nested != rows.len() {
            self.error(&v.span, "mixed rows and scalars in a constant array");
            return None;
        }
        let mut cells = Vec::new();
        let mut width = None;
        for r in &rows {
            let (shape, row) = self.const_cells(r)?;
            if shape.len() != 1 {
                self.error(&r.span, "constant arrays have at most two dimensions");
                return None;
            }
            if *width.get_or_insert(shape[0]) != shape[0] {
                self.error(&r.span, "rows of a constant matrix differ in length");
                return None;
            }
            cells.extend(row);
        }
        Some((vec![rows.len(), width.unwrap()], cells))
    }

    /// Orders `[A:1, B:2]` entries by the ordinal of their keys in one enum.
    fn order_keyed<'v>(
        &mut self,
        kvs: &'v [(String, DataValue)],
        span: &SourceSpan,
    ) -> Option<Vec<&'v DataValue>> {
        let owner = self.labels.get(&kvs[0].0).and_then(|c| c.first()).map(|c| c.0.clone());
        let Some(owner) = owner else {
            self.error(span, format!("`{}` is not an enum value", kvs[0].0));
            return None;
        };
        let values = self.enums[&owner].clone();
        let mut out: Vec<Option<&DataValue>> = vec![None; values.len()];
        for (k, v) in kvs {
            match values.iter().position(|x| x == k) {
                Some(i) if out[i].is_none() => out[i] = Some(v),
                Some(_) => {
                    self.error(&v.span, format!("key `{k}` given twice"));
                    return None;
                }
                None => {
                    self.error(&v.span, format!("`{k}` is not a value of enum `{owner}`"));
                    return None;
                }
            }
        }
        if out.iter().any(Option::is_none) {
            self.error(span, format!("keyed array does not cover every value of `{owner}`"));
            return None;
        }
        Some(out.into_iter().map(Option::unwrap).collect())
    }

    fn const_scalar(&mut self, elem: &Ty, set_enum: Option<&str>, v: &DataValue) -> Option<Value> {
        let r = match (&v.kind, elem) {
            (DataValueKind::Int(i), Ty::Int | Ty::Enum(_)) => Some(Value::Int(*i)),
            (DataValueKind::Int(i), Ty::Real) => Some(Value::Real(*i as f64)),
            (DataValueKind::Real(r), Ty::Real) => Some(Value::Real(*r)),
            (DataValueKind::Bool(b), Ty::Bool) => Some(Value::Bool(*b)),
            (DataValueKind::Symbol(s), Ty::Enum(e)) => self.enums[e]
                .iter()
                .position(|x| x == s)
                .map(|i| Value::Int(i as i64 + 1)),
            (DataValueKind::Symbol(s), _) => self
                .constants
                .get(s)
                .filter(|c| c.shape.is_empty() && &c.elem == elem)
                .map(|c| c.values[0].clone()),
            (DataValueKind::Braced(items), Ty::Set) => {
                let mut set = std::collections::BTreeSet::new();
                for it in items {
                    match (&it.kind, set_enum) {
                        (DataValueKind::Int(i), _) => {
                            set.insert(*i);
                        }
                        (DataValueKind::Symbol(s), Some(e)) => {
                            let i = self.enums[e].iter().position(|x| x == s)?;
                            set.insert(i as i64 + 1);
                        }
                        _ => {
                            self.error(&it.span, "set elements must be integers or enum values");
                            return None;
                        }
                    }
                }
                Some(Value::Set(set))
            }
            _ => None,
        };
        if r.is_none() {
            self.error(&v.span, format!("value does not fit type `{elem}`"));
        }
        r
    }

    fn attr(&mut self, at: &Attribute) -> TAttr {
        let ty = match &at.ty {
            TypeRef::Int => AttrTy::Int,
            TypeRef::Real => AttrTy::Real,
            TypeRef::Bool => AttrTy::Bool,
            TypeRef::SetOfInt => AttrTy::SetOfInt,
            TypeRef::SetOf(e) => {
                if !self.enums.contains_key(e) {
                    self.error(&at.span, format!("unknown enum `{e}` in set type"));
                }
                AttrTy::SetOf(e.clone())
            }
            TypeRef::Named(n) if self.enums.contains_key(n) => AttrTy::Enum(n.clone()),
            TypeRef::Named(n) if self.class_names.contains(n) => AttrTy::Object(n.clone()),
            TypeRef::Named(n) => {
                self.error(&at.span, format!("unknown type `{n}` (neither an enum nor a class)"));
                AttrTy::Int
            }
        };
        let mut dims = Vec::new();
        for b in &at.shape {
            let (size, enum_name) = match b {
                Bound::Int(k) if *k >= 1 => (*k as usize, None),
                Bound::Int(k) => {
                    self.error(&at.span, format!("array bound {k} of `{}` is not positive", at.name));
                    (1, None)
                }
                Bound::Name(n) => {
                    if let Some(vals) = self.enums.get(n) {
                        (vals.len(), Some(n.clone()))
                    } else if let Some(c) = self.constants.get(n) {
                        match (c.shape.is_empty(), c.values.first()) {
                            (true, Some(Value::Int(k))) if *k >= 1 => (*k as usize, None),
                            _ => {
                                self.error(
                                    &at.span,
                                    format!("array bound `{n}` of `{}` is not a positive integer", at.name),
                                );
                                (1, None)
                            }
                        }
                    } else {
                        self.error(&at.span, format!("unknown array bound `{n}` (no such enum or constant)"));
                        (1, None)
                    }
                }
            };
            dims.push(Dim {
                size,
                bound: b.clone(),
                enum_name,
            });
        }
        let domain = self.attr_domain(at, &ty);
        TAttr {
            name: at.name.clone(),
            ty,
            dims,
            domain,
            enum_tag: None,
            decl: at.domain.clone(),
            span: at.span.clone(),
        }
    }

    fn attr_domain(&mut self, at: &Attribute, ty: &AttrTy) -> Option<Domain> {
        if let AttrTy::SetOf(e) = ty {
            if at.domain.is_some() {
                self.error(&at.span, format!("`{}` takes its elements from enum `{e}`", at.name));
            }
            return self.enums.get(e).map(|v| Domain::IntRange(1, v.len() as i64));
        }
        let decl = at.domain.as_ref()?;
        match ty {
            AttrTy::Object(_) | AttrTy::Enum(_) | AttrTy::Bool => {
                self.error(&at.span, format!("attribute `{}` cannot declare a domain", at.name));
                return None;
            }
            _ => {}
        }
        let real = *ty == AttrTy::Real;
        match decl {
            DomainDecl::Interval(lo, hi) => {
                let (lo, hi) = (self.const_expr(lo)?, self.const_expr(hi)?);
                let d = if real {
                    Domain::RealRange(lo.as_real()?, hi.as_real()?)
                } else {
                    match (lo.as_int(), hi.as_int()) {
                        (Some(l), Some(h)) => Domain::IntRange(l, h),
                        _ => {
                            self.error(&at.span, format!("domain bounds of `{}` must be integers", at.name));
                            return None;
                        }
                    }
                };
                if d.is_empty() {
                    self.error(&at.span, format!("empty domain {d} for `{}`", at.name));
                    return None;
                }
                Some(d)
            }
            DomainDecl::Set(es) => {
                if real {
                    self.error(&at.span, "real attributes take interval domains");
                    return None;
                }
                let mut vals = Vec::new();
                for e in es {
                    match self.const_expr(e)?.as_int() {
                        Some(v) => vals.push(v),
                        None => {
                            self.error(&e.span, "domain values must be integers");
                            return None;
                        }
                    }
                }
                vals.sort_unstable();
                vals.dedup();
                Some(Domain::IntSet(vals))
            }
        }
    }

    /// Type-checks an expression that may only mention data, then evaluates it.
    fn const_expr(&mut self, e: &Expr) -> Option<Value> {
        let mut scope = Scope {
            class: None,
            loops: Vec::new(),
            in_loop: 0,
            in_cond: 0,
        };
        let te = self.expr(e, &mut scope)?;
        let v = self.const_eval(&te);
        if v.is_none() {
            self.error(&e.span, "expected a constant expression");
        }
        v
    }

    /// Value of an expression built from literals and data alone.
    fn const_eval(&self, e: &TExpr) -> Option<Value> {
        match &e.kind {
            TKind::Lit(v) => Some(v.clone()),
            TKind::EnumLit { ordinal, .. } => Some(Value::Int(*ordinal)),
            TKind::Const(n) => {
                let c = self.constants.get(n)?;
                c.shape.is_empty().then(|| c.values[0].clone())
            }
            TKind::Unary(op, a) => apply_unary(*op, self.const_eval(a)?).ok(),
            TKind::Binary(op, l, r) => {
                apply_binary(*op, self.const_eval(l)?, self.const_eval(r)?).ok()
            }
            _ => None,
        }
    }

    fn check_composition(&mut self, classes: &[TClass]) {
        fn visit(
            classes: &[TClass],
            name: &str,
            stack: &mut Vec<String>,
            done: &mut Vec<String>,
            out: &mut Vec<(SourceSpan, String)>,
        ) {
            if done.iter().any(|d| d == name) {
                return;
            }
            if let Some(pos) = stack.iter().position(|s| s == name) {
                let mut cycle: Vec<String> = stack[pos..].to_vec();
                cycle.push(name.to_string());
                let span = classes.iter().find(|c| c.name == name).unwrap().span.clone();
                out.push((span, format!("composition cycle: {}", cycle.join(" -> "))));
                return;
            }
            let Some(c) = classes.iter().find(|c| c.name == name) else {
                return;
            };
            stack.push(name.to_string());
            for a in &c.attributes {
                if let AttrTy::Object(o) = &a.ty {
                    visit(classes, o, stack, done, out);
                }
            }
            stack.pop();
            done.push(name.to_string());
        }
        let mut done = Vec::new();
        let mut out = Vec::new();
        for c in classes {
            visit(classes, &c.name, &mut Vec::new(), &mut done, &mut out);
        }
        for (span, msg) in out {
            self.error(&span, msg);
        }
    }

    fn item(
        &mut self,
        it: &Item,
        scope: &mut Scope,
        objectives: &mut Vec<SourceSpan>,
        instances: Option<&usize>,
    ) -> Option<TItem> {
        match it {
            Item::Constraint(e) => {
                let te = self.expr(e, scope)?;
                if te.ty != Ty::Bool {
                    self.error(&e.span, format!("a constraint must be boolean, found `{}`", te.ty));
                    return None;
                }
                Some(TItem::Constraint(te))
            }
            Item::Forall {
                var,
                range,
                body,
                span,
            } => {
                let (trange, ty) = match range {
                    RangeExpr::Interval(lo, hi) => {
                        let tl = self.range_bound(lo, scope);
                        let th = self.range_bound(hi, scope);
                        let (tl, th) = (tl?, th?);
                        if let (Some(Value::Int(l)), Some(Value::Int(h))) =
                            (self.const_eval(&tl), self.const_eval(&th))
                        {
                            if l > h {
                                self.warn(span, format!("empty loop range {l}..{h}: the loop contributes nothing"));
                            }
                        }
                        (TRange::Interval(tl, th), Ty::Int)
                    }
                    RangeExpr::Named(n, nspan) => {
                        if !self.enums.contains_key(n) {
                            self.error(nspan, format!("loop range `{n}` is not an enum"));
                            return None;
                        }
                        (TRange::Enum(n.clone(), nspan.clone()), Ty::Enum(n.clone()))
                    }
                };
                scope.loops.push((var.clone(), ty));
                scope.in_loop += 1;
                let items: Vec<TItem> = body
                    .iter()
                    .filter_map(|b| self.item(b, scope, objectives, instances))
                    .collect();
                scope.in_loop -= 1;
                scope.loops.pop();
                Some(TItem::Forall {
                    var: var.clone(),
                    range: trange,
                    body: items,
                    span: span.clone(),
                })
            }
            Item::If {
                cond,
                then_items,
                else_items,
                span,
            } => {
                let tc = self.expr(cond, scope);
                if let Some(tc) = &tc {
                    if tc.ty != Ty::Bool {
                        self.error(&cond.span, format!("condition must be boolean, found `{}`", tc.ty));
                    }
                }
                scope.in_cond += 1;
                let t: Vec<TItem> = then_items
                    .iter()
                    .filter_map(|b| self.item(b, scope, objectives, instances))
                    .collect();
                let e = else_items.as_ref().map(|items| {
                    items
                        .iter()
                        .filter_map(|b| self.item(b, scope, objectives, instances))
                        .collect()
                });
                scope.in_cond -= 1;
                Some(TItem::If {
                    cond: tc?,
                    then_items: t,
                    else_items: e,
                    span: span.clone(),
                })
            }
            Item::Objective { kind, expr, span } => {
                if scope.in_loop > 0 || scope.in_cond > 0 {
                    self.error(span, "an objective cannot appear inside a loop or conditional");
                }
                for _ in 0..instances.copied().unwrap_or(0) {
                    objectives.push(span.clone());
                }
                let te = self.expr(expr, scope)?;
                if !te.ty.is_numeric() {
                    self.error(&expr.span, format!("objective must be numeric, found `{}`", te.ty));
                    return None;
                }
                Some(TItem::Objective {
                    kind: *kind,
                    expr: te,
                    span: span.clone(),
                })
            }
            Item::Global { name, args, span } => {
                let targs: Vec<TExpr> = args.iter().filter_map(|a| self.expr(a, scope)).collect();
                if targs.len() != args.len() {
                    return None;
                }
                let int_array = |t: &TExpr| matches!(&t.ty, Ty::Array { elem, .. } if elem.is_intlike());
                let ok = match name.as_str() {
                    "alldifferent" => targs.len() == 1 && int_array(&targs[0]),
                    "cumulatives" => {
                        targs.len() == 4
                            && targs[..3].iter().all(|t| matches!(&t.ty, Ty::Array { elem, dims: 1 } if elem.is_intlike()))
                            && targs[3].ty.is_intlike()
                    }
                    _ => false,
                };
                if !ok {
                    let sig = match name.as_str() {
                        "alldifferent" => "alldifferent takes one integer array",
                        _ => "cumulatives takes three integer arrays (starts, durations, heights) and a capacity",
                    };
                    self.error(span, sig);
                    return None;
                }
                Some(TItem::Global {
                    name: name.clone(),
                    args: targs,
                    span: span.clone(),
                })
            }
        }
    }

    fn range_bound(&mut self, e: &Expr, scope: &mut Scope) -> Option<TExpr> {
        let te = self.expr(e, scope)?;
        if !te.ty.is_intlike() {
            self.error(&e.span, format!("loop bounds must be integers, found `{}`", te.ty));
            return None;
        }
        if te.any(&|n| matches!(n.kind, TKind::Attr(_))) {
            self.error(&e.span, "loop bounds must not depend on attributes");
            return None;
        }
        Some(te)
    }

    fn name(&mut self, n: &str, span: &SourceSpan, scope: &Scope) -> Option<TExpr> {
        let mk = |kind, ty| Some(TExpr { kind, ty, span: span.clone() });
        if let Some((_, ty)) = scope.loops.iter().rev().find(|(v, _)| v == n) {
            return mk(TKind::LoopVar(n.to_string()), ty.clone());
        }
        if let Some(a) = scope.class.and_then(|c| c.attr(n)) {
            return mk(TKind::Attr(n.to_string()), a.full_ty());
        }
        if let Some(c) = self.constants.get(n) {
            return mk(TKind::Const(n.to_string()), c.ty());
        }
        if let Some(cands) = self.labels.get(n) {
            if cands.len() > 1 {
                self.error(span, format!("enum value `{n}` is ambiguous between several enums"));
                return None;
            }
            let (e, ord) = cands[0].clone();
            return mk(
                TKind::EnumLit {
                    enum_name: e.clone(),
                    label: n.to_string(),
                    ordinal: ord,
                },
                Ty::Enum(e),
            );
        }
        if self.enums.contains_key(n) {
            self.error(span, format!("enum `{n}` used as a value"));
        } else {
            self.error(span, format!("unknown name `{n}`"));
        }
        None
    }

    fn expr(&mut self, e: &Expr, scope: &mut Scope) -> Option<TExpr> {
        let span = e.span.clone();
        let (kind, ty) = match &e.kind {
            ExprKind::Int(v) => (TKind::Lit(Value::Int(*v)), Ty::Int),
            ExprKind::Real(v) => (TKind::Lit(Value::Real(*v)), Ty::Real),
            ExprKind::Bool(v) => (TKind::Lit(Value::Bool(*v)), Ty::Bool),
            ExprKind::Name(n) => return self.name(n, &span, scope),
            ExprKind::Index(base, idx) => {
                let tb = self.expr(base, scope);
                let ti: Vec<Option<TExpr>> = idx.iter().map(|i| self.expr(i, scope)).collect();
                let tb = tb?;
                let ti: Vec<TExpr> = ti.into_iter().collect::<Option<_>>()?;
                let Ty::Array { elem, dims } = &tb.ty else {
                    self.error(&span, format!("subscripted value of type `{}` is not an array", tb.ty));
                    return None;
                };
                if *dims != ti.len() {
                    self.error(&span, format!("array has {dims} dimension(s) but {} subscript(s) given", ti.len()));
                    return None;
                }
                if let Some(bad) = ti.iter().find(|i| !i.ty.is_intlike()) {
                    self.error(&bad.span, format!("subscripts must be integers, found `{}`", bad.ty));
                    return None;
                }
                let ty = (**elem).clone();
                (TKind::Index(Box::new(tb), ti), ty)
            }
            ExprKind::Field(base, f) => {
                let tb = self.expr(base, scope)?;
                let Ty::Object(cname) = &tb.ty else {
                    self.error(&span, format!("`.{f}` applied to a value of type `{}`", tb.ty));
                    return None;
                };
                let Some(ty) = self.attr_types.get(cname).and_then(|m| m.get(f)).cloned() else {
                    self.error(&span, format!("class `{cname}` has no attribute `{f}`"));
                    return None;
                };
                (TKind::Field(Box::new(tb), f.clone()), ty)
            }
            ExprKind::Unary(op, inner) => {
                let ti = self.expr(inner, scope)?;
                let ty = match (op, &ti.ty) {
                    (UnOp::Neg, Ty::Int | Ty::Enum(_)) => Ty::Int,
                    (UnOp::Neg, Ty::Real) => Ty::Real,
                    (UnOp::Not, Ty::Bool) => Ty::Bool,
                    (UnOp::Card, Ty::Set) => Ty::Int,
                    (op, t) => {
                        self.error(&span, format!("`{}` cannot be applied to `{t}`", op.symbol()));
                        return None;
                    }
                };
                (TKind::Unary(*op, Box::new(ti)), ty)
            }
            ExprKind::Binary(op, l, r) => {
                let tl = self.expr(l, scope);
                let tr = self.expr(r, scope);
                let (tl, tr) = (tl?, tr?);
                let Some(ty) = binary_ty(*op, &tl.ty, &tr.ty) else {
                    self.error(
                        &span,
                        format!("`{}` cannot be applied to `{}` and `{}`", op.symbol(), tl.ty, tr.ty),
                    );
                    return None;
                };
                (TKind::Binary(*op, Box::new(tl), Box::new(tr)), ty)
            }
            ExprKind::SetLit(es) => {
                let ts: Vec<TExpr> = es.iter().map(|x| self.expr(x, scope)).collect::<Option<_>>()?;
                if let Some(bad) = ts.iter().find(|t| !t.ty.is_intlike()) {
                    self.error(&bad.span, "set elements must be integers");
                    return None;
                }
                (TKind::SetLit(ts), Ty::Set)
            }
            ExprKind::ArrayLit(es) => {
                let ts: Vec<TExpr> = es.iter().map(|x| self.expr(x, scope)).collect::<Option<_>>()?;
                let elem = if ts.is_empty() {
                    None
                } else if ts.iter().all(|t| t.ty.is_intlike()) {
                    Some(Ty::Int)
                } else if ts.iter().all(|t| t.ty.is_numeric()) {
                    Some(Ty::Real)
                } else if ts.iter().all(|t| t.ty == Ty::Bool) {
                    Some(Ty::Bool)
                } else {
                    None
                };
                let Some(elem) = elem else {
                    self.error(&span, "array literal must hold values of one scalar type");
                    return None;
                };
                (TKind::ArrayLit(ts), Ty::array(elem, 1))
            }
            ExprKind::Call(name, _) => {
                if crate::ast::GLOBALS.contains(&name.as_str()) {
                    self.error(&span, format!("`{name}` is a constraint statement, not an expression"));
                } else {
                    self.error(&span, format!("unknown function `{name}`"));
                }
                return None;
            }
        };
        Some(TExpr { kind, ty, span })
    }

}

fn binary_ty(op: BinOp, l: &Ty, r: &Ty) -> Option<Ty> {
    use BinOp::*;
    let ty = match op {
        Add | Sub | Mul | Div if l.is_numeric() && r.is_numeric() => {
            if *l == Ty::Real || *r == Ty::Real {
                Ty::Real
            } else {
                Ty::Int
            }
        }
        Lt | Gt | Le | Ge if l.is_numeric() && r.is_numeric() => Ty::Bool,
        Eq | Ne if (l.is_numeric() && r.is_numeric()) || (l == r && matches!(l, Ty::Bool | Ty::Set)) => Ty::Bool,
        And | Or | Xor | Implies | RevImplies | Iff if *l == Ty::Bool && *r == Ty::Bool => Ty::Bool,
        In if l.is_intlike() && *r == Ty::Set => Ty::Bool,
        Subset | Superset if *l == Ty::Set && *r == Ty::Set => Ty::Bool,
        Union | Diff | SymDiff | Intersection if *l == Ty::Set && *r == Ty::Set => Ty::Set,
        _ => return None,
    };
    Some(ty)
}

/// How many objects of each class the main class instantiates.
fn instance_counts(classes: &[TClass], main: &str) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    fn walk(classes: &[TClass], name: &str, mult: usize, counts: &mut HashMap<String, usize>, depth: usize) {
        if depth > classes.len() {
            return;
        }
        *counts.entry(name.to_string()).or_insert(0) += mult;
        if let Some(c) = classes.iter().find(|c| c.name == name) {
            for a in &c.attributes {
                if let AttrTy::Object(o) = &a.ty {
                    walk(classes, o, mult.saturating_mul(a.len()), counts, depth + 1);
                }
            }
        }
    }
    walk(classes, main, 1, &mut counts, 0);
    counts
}
