//! Binds variable-assignments from the data file onto the object tree of the main class.

use std::collections::{BTreeSet, HashSet};

use super::{AttrTy, TAttr, TypedModel};
use crate::ast::TypeRef;
use crate::data::{DataFile, DataValue, DataValueKind};
use crate::flat::{unravel, Domain};
use crate::span::{Diagnostic, Diagnostics, SourceSpan};
use crate::value::Value;

/// One object of the composition tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub class: String,
    /// Path from the main object, e.g. `man`, `[3]`.
    pub path: Vec<Seg>,
    /// One slot per attribute, in declaration order.
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Seg {
    Name(String),
    Idx(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    /// Row-major cells; `None` is a decision variable.
    Values(Vec<Option<Value>>),
    Objects(Vec<Instance>),
}

impl Instance {
    pub fn slot(&self, tm: &TypedModel, attr: &str) -> Option<&Slot> {
        let i = tm.class(&self.class)?.attr_index(attr)?;
        self.slots.get(i)
    }

    /// Visits this object and every descendant, parents first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Instance)) {
        f(self);
        for s in &self.slots {
            if let Slot::Objects(objs) = s {
                for o in objs {
                    o.walk(f);
                }
            }
        }
    }
}

/// Creates the object tree with every cell unassigned.
pub fn instantiate(tm: &TypedModel, class: &str, path: Vec<Seg>) -> Instance {
    let c = tm.class(class).expect("class resolved by the analyzer");
    let slots = c
        .attributes
        .iter()
        .map(|a| match &a.ty {
            AttrTy::Object(oc) => Slot::Objects(
                (0..a.len())
                    .map(|k| {
                        let mut p = path.clone();
                        p.push(Seg::Name(a.name.clone()));
                        if !a.dims.is_empty() {
                            p.push(Seg::Idx(unravel(&a.shape(), k)));
                        }
                        instantiate(tm, oc, p)
                    })
                    .collect(),
            ),
            _ => Slot::Values(vec![None; a.len()]),
        })
        .collect();
    Instance {
        class: class.to_string(),
        path,
        slots,
    }
}

/// Applies every assignment of `d`. Returns the bound tree and its warnings.
pub fn bind_data(tm: &TypedModel, d: &DataFile) -> Result<(Instance, Vec<Diagnostic>), Diagnostics> {
    let mut b = Binder {
        tm,
        diags: Vec::new(),
    };
    let mut root = instantiate(tm, &tm.main_class, Vec::new());
    let mut seen = HashSet::new();
    for a in &d.assignments {
        if a.path.first() != Some(&tm.main_class) || a.path.len() < 2 {
            b.error(
                &a.span,
                format!("assignment path must start with the main class `{}`", tm.main_class),
            );
            continue;
        }
        if !seen.insert(a.path.clone()) {
            b.error(&a.span, format!("`{}` is assigned twice", a.path.join(".")));
            continue;
        }
        let mut obj = &mut root;
        let mut ok = true;
        for seg in &a.path[1..a.path.len() - 1] {
            let class = tm.class(&obj.class).unwrap();
            match class.attr_index(seg) {
                Some(i) if matches!(class.attributes[i].ty, AttrTy::Object(_)) && class.attributes[i].dims.is_empty() => {
                    let Slot::Objects(objs) = &mut obj.slots[i] else { unreachable!() };
                    obj = &mut objs[0];
                }
                _ => {
                    b.error(&a.span, format!("`{seg}` is not a scalar object attribute of class `{}`", class.name));
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let last = a.path.last().unwrap();
        let class = tm.class(&obj.class).unwrap();
        let Some(i) = class.attr_index(last) else {
            b.error(&a.span, format!("class `{}` has no attribute `{last}`", class.name));
            continue;
        };
        let attr = &class.attributes[i];
        if !type_matches(&a.ty, attr) {
            b.error(
                &a.span,
                format!(
                    "assignment declares type `{}` but `{}` has type `{}`",
                    crate::syntax::printer::type_name(&a.ty),
                    attr.name,
                    attr.ty.ty()
                ),
            );
            continue;
        }
        b.bind_slot(obj, i, &a.value);
    }
    b.check_missing_domains(&root);
    if b.diags.iter().any(Diagnostic::is_error) {
        return Err(Diagnostics(b.diags));
    }
    Ok((root, b.diags))
}

fn type_matches(t: &TypeRef, a: &TAttr) -> bool {
    match (t, &a.ty) {
        (TypeRef::Int, AttrTy::Int) | (TypeRef::Real, AttrTy::Real) | (TypeRef::Bool, AttrTy::Bool) => true,
        (TypeRef::SetOfInt, AttrTy::SetOfInt) => true,
        (TypeRef::SetOf(x), AttrTy::SetOf(y)) => x == y,
        (TypeRef::Named(x), AttrTy::Enum(y) | AttrTy::Object(y)) => x == y,
        // After enum substitution the attribute is an int tagged with its enum.
        (TypeRef::Named(x), AttrTy::Int) => a.enum_tag.as_deref() == Some(x),
        _ => false,
    }
}

struct Binder<'a> {
    tm: &'a TypedModel,
    diags: Vec<Diagnostic>,
}

impl Binder<'_> {
    fn error(&mut self, span: &SourceSpan, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span.clone(), msg));
    }

    fn bind_slot(&mut self, obj: &mut Instance, i: usize, v: &DataValue) {
        let tm = self.tm;
        let attr = &tm.class(&obj.class).unwrap().attributes[i];
        let Some(cells) = self.expand(v, attr, 0) else {
            return;
        };
        match &mut obj.slots[i] {
            Slot::Objects(objs) => {
                for (o, dv) in objs.iter_mut().zip(cells) {
                    self.bind_object(o, dv);
                }
            }
            Slot::Values(vals) => {
                for (slot, dv) in vals.iter_mut().zip(cells) {
                    if let Some(val) = self.scalar(attr, dv) {
                        *slot = Some(val);
                    }
                }
            }
        }
    }

    fn bind_object(&mut self, o: &mut Instance, v: &DataValue) {
        let fields = match &v.kind {
            DataValueKind::Omit => return,
            DataValueKind::Braced(fields) => fields,
            _ => {
                self.error(&v.span, format!("expected an object literal `{{...}}` of class `{}`", o.class));
                return;
            }
        };
        let class = self.tm.class(&o.class).unwrap();
        let n = class.attributes.len();
        if fields.len() > n {
            self.error(
                &v.span,
                format!(
                    "object literal has {} elements but class `{}` has {n} attributes",
                    fields.len(),
                    class.name
                ),
            );
            return;
        }
        if fields.len() < n {
            let rest: Vec<&str> = class.attributes[fields.len()..].iter().map(|a| a.name.as_str()).collect();
            self.diags.push(Diagnostic::warning(
                v.span.clone(),
                format!(
                    "object literal for class `{}` leaves {} unassigned; they stay decision variables",
                    class.name,
                    rest.iter().map(|r| format!("`{r}`")).collect::<Vec<_>>().join(", ")
                ),
            ));
        }
        for (i, f) in fields.iter().enumerate() {
            self.bind_slot(o, i, f);
        }
    }

    /// Flattens `v` into one data value per cell of `attr`, starting at dimension `k`.
    fn expand<'v>(&mut self, v: &'v DataValue, attr: &TAttr, k: usize) -> Option<Vec<&'v DataValue>> {
        let dims = &attr.dims[k..];
        if dims.is_empty() {
            return Some(vec![v]);
        }
        let cells: usize = dims.iter().map(|d| d.size).product();
        match &v.kind {
            DataValueKind::Omit => Some(vec![v; cells]),
            DataValueKind::Array(vs) => {
                if vs.len() != dims[0].size {
                    self.error(
                        &v.span,
                        format!("`{}` expects {} entries here, found {}", attr.name, dims[0].size, vs.len()),
                    );
                    return None;
                }
                let mut out = Vec::with_capacity(cells);
                for x in vs {
                    out.extend(self.expand(x, attr, k + 1)?);
                }
                Some(out)
            }
            DataValueKind::Keyed(kvs) => {
                let Some(e) = &dims[0].enum_name else {
                    self.error(&v.span, format!("dimension {} of `{}` is not indexed by an enum", k + 1, attr.name));
                    return None;
                };
                let labels = &self.tm.enums[e];
                let mut ordered: Vec<Option<&DataValue>> = vec![None; labels.len()];
                for (key, x) in kvs {
                    match labels.iter().position(|l| l == key) {
                        Some(i) if ordered[i].is_none() => ordered[i] = Some(x),
                        Some(_) => {
                            self.error(&x.span, format!("key `{key}` given twice"));
                            return None;
                        }
                        None => {
                            self.error(&x.span, format!("`{key}` is not a value of enum `{e}`"));
                            return None;
                        }
                    }
                }
                if let Some(i) = ordered.iter().position(Option::is_none) {
                    self.error(&v.span, format!("no entry for key `{}`", labels[i]));
                    return None;
                }
                let mut out = Vec::with_capacity(cells);
                for x in ordered.into_iter().flatten() {
                    out.extend(self.expand(x, attr, k + 1)?);
                }
                Some(out)
            }
            _ => {
                self.error(&v.span, format!("`{}` expects an array of {} entries", attr.name, dims[0].size));
                None
            }
        }
    }

    fn label(&self, e: &str, s: &str) -> Option<i64> {
        self.tm.enums.get(e)?.iter().position(|l| l == s).map(|i| i as i64 + 1)
    }

    fn constant(&self, s: &str) -> Option<Value> {
        let c = self.tm.constants.get(s)?;
        c.shape.is_empty().then(|| c.values[0].clone())
    }

    fn scalar(&mut self, attr: &TAttr, v: &DataValue) -> Option<Value> {
        let enum_name = match &attr.ty {
            AttrTy::Enum(e) => Some(e.as_str()),
            _ => attr.enum_tag.as_deref(),
        };
        let val = match (&v.kind, &attr.ty) {
            (DataValueKind::Omit, _) => return None,
            (DataValueKind::Int(i), AttrTy::Int | AttrTy::Enum(_)) => Some(Value::Int(*i)),
            (DataValueKind::Int(i), AttrTy::Real) => Some(Value::Real(*i as f64)),
            (DataValueKind::Real(r), AttrTy::Real) => Some(Value::Real(*r)),
            (DataValueKind::Bool(b), AttrTy::Bool) => Some(Value::Bool(*b)),
            (DataValueKind::Symbol(s), _) => enum_name
                .and_then(|e| self.label(e, s))
                .map(Value::Int)
                .or_else(|| self.constant(s)),
            (DataValueKind::Braced(items), AttrTy::SetOfInt | AttrTy::SetOf(_)) => {
                let set_enum = match &attr.ty {
                    AttrTy::SetOf(e) => Some(e.as_str()),
                    _ => None,
                };
                let mut set = BTreeSet::new();
                for it in items {
                    let x = match &it.kind {
                        DataValueKind::Int(i) => Some(*i),
                        DataValueKind::Symbol(s) => set_enum.and_then(|e| self.label(e, s)),
                        _ => None,
                    };
                    match x {
                        Some(x) => {
                            set.insert(x);
                        }
                        None => {
                            self.error(&it.span, format!("invalid element for set `{}`", attr.name));
                            return None;
                        }
                    }
                }
                Some(Value::Set(set))
            }
            _ => None,
        };
        let Some(val) = val else {
            self.error(&v.span, format!("value does not fit `{}` of type `{}`", attr.name, attr.ty.ty()));
            return None;
        };
        let domain = match (enum_name, &attr.domain) {
            (_, Some(d)) => Some(d.clone()),
            (Some(e), None) => Some(Domain::IntRange(1, self.tm.enums[e].len() as i64)),
            _ => None,
        };
        if let Some(d) = domain {
            if !in_domain(&val, &d) {
                self.error(&v.span, format!("value {val} lies outside the domain {d} of `{}`", attr.name));
                return None;
            }
        }
        Some(val)
    }

    /// A cell left as a decision variable needs a finite domain to be solvable.
    fn check_missing_domains(&mut self, root: &Instance) {
        let tm = self.tm;
        let mut reported = HashSet::new();
        let mut errs = Vec::new();
        root.walk(&mut |o| {
            let class = tm.class(&o.class).unwrap();
            for (a, s) in class.attributes.iter().zip(&o.slots) {
                let needs = matches!(a.ty, AttrTy::Int | AttrTy::Real | AttrTy::SetOfInt)
                    && a.domain.is_none()
                    && a.enum_tag.is_none();
                if let Slot::Values(cells) = s {
                    if needs && cells.iter().any(Option::is_none) && reported.insert((class.name.clone(), a.name.clone())) {
                        errs.push(Diagnostic::error(
                            a.span.clone(),
                            format!(
                                "`{}.{}` has no domain but is not fully given by the data",
                                class.name, a.name
                            ),
                        ));
                    }
                }
            }
        });
        self.diags.extend(errs);
    }
}

fn in_domain(v: &Value, d: &Domain) -> bool {
    match (v, d) {
        (Value::Int(i), _) => d.contains_int(*i),
        (Value::Real(r), Domain::RealRange(lo, hi)) => *r >= *lo - 1e-9 && *r <= *hi + 1e-9,
        (Value::Set(s), _) => s.iter().all(|x| d.contains_int(*x)),
        (Value::Bool(_), _) => true,
        _ => false,
    }
}
