//! Composition expansion: resolves attribute references through the object tree
//! and names every value group after the path that reaches it.
//!
//! Naming: an array attribute `b` of object `o[i]` is the group `o_i_b`; a scalar
//! attribute `a` shared by the objects of an array `o[n]` is the group `o_a[n]`;
//! a scalar attribute of a scalar object `o` is `o_a`; attributes of the main
//! object keep their own name.

use std::collections::HashMap;

use indexmap::IndexMap;

use super::fold::fold;
use super::{Expanded, FItem, FlattenError};
use crate::analyzer::{AttrTy, Instance, Seg, Slot, TExpr, TItem, TKind, Ty, TypedModel};
use crate::ast::BinOp;
use crate::flat::{linear_offset, unravel, BaseType, Domain, FlatExpr, FlatModel, FlatTable, FlatVar};
use crate::span::SourceSpan;
use crate::value::Value;

const PASS: &str = "expand_composition";

struct Group {
    ident: (Vec<Seg>, String),
    base: BaseType,
    shape: Vec<usize>,
    domain: Option<Domain>,
    enum_tag: Option<String>,
    cells: Vec<Option<Value>>,
    span: SourceSpan,
    as_table: bool,
}

impl Group {
    fn fully_given(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }
}

enum R<'a> {
    Val(FlatExpr),
    Obj(&'a Instance),
    /// An object-array attribute, not yet indexed.
    Objs { owner: &'a Instance, attr: usize },
    /// An element of an object array chosen by a decision variable.
    ObjSel {
        owner: &'a Instance,
        attr: usize,
        index: Vec<FlatExpr>,
    },
    /// A value-array attribute, not yet indexed.
    Cells { owner: &'a Instance, attr: usize },
    ConstArr(String),
}

fn render(path: &[Seg]) -> String {
    path.iter()
        .map(|s| match s {
            Seg::Name(n) => n.clone(),
            Seg::Idx(ix) => ix.iter().map(i64::to_string).collect::<Vec<_>>().join("_"),
        })
        .collect::<Vec<_>>()
        .join("_")
}

fn prefixed(path: &[Seg], attr: &str) -> String {
    if path.is_empty() {
        attr.to_string()
    } else {
        format!("{}_{attr}", render(path))
    }
}

fn base_of(ty: &AttrTy) -> BaseType {
    match ty {
        AttrTy::Real => BaseType::Real,
        AttrTy::Bool => BaseType::Bool,
        AttrTy::SetOfInt | AttrTy::SetOf(_) => BaseType::SetOfInt,
        _ => BaseType::Int,
    }
}

fn lits(ix: &[i64]) -> Vec<FlatExpr> {
    ix.iter().map(|&i| FlatExpr::int(i)).collect()
}

struct Expander<'a> {
    tm: &'a TypedModel,
    groups: IndexMap<String, Group>,
    /// Shapes of object arrays, keyed by the path ending in the array's name.
    array_shapes: HashMap<Vec<Seg>, Vec<usize>>,
    const_tables: Vec<String>,
}

impl<'a> Expander<'a> {
    fn attrs(&self, inst: &Instance) -> &'a [crate::analyzer::TAttr] {
        &self.tm.class(&inst.class).expect("instantiated class exists").attributes
    }

    /// Group name, group identity, group shape and offset of cell `k` of attribute `ai`.
    fn loc(&self, inst: &Instance, ai: usize, k: usize) -> (String, (Vec<Seg>, String), Vec<usize>, usize) {
        let attr = &self.attrs(inst)[ai];
        if !attr.dims.is_empty() {
            return (
                prefixed(&inst.path, &attr.name),
                (inst.path.clone(), attr.name.clone()),
                attr.shape(),
                k,
            );
        }
        if let Some(Seg::Idx(ix)) = inst.path.last() {
            let parent = &inst.path[..inst.path.len() - 1];
            let shape = self.array_shapes[parent].clone();
            let off = linear_offset(&shape, ix).expect("object index within its array");
            return (
                prefixed(parent, &attr.name),
                (parent.to_vec(), attr.name.clone()),
                shape,
                off,
            );
        }
        (
            prefixed(&inst.path, &attr.name),
            (inst.path.clone(), attr.name.clone()),
            Vec::new(),
            0,
        )
    }

    fn collect(&mut self, inst: &Instance) -> Result<(), FlattenError> {
        let attrs = self.attrs(inst);
        for (ai, attr) in attrs.iter().enumerate() {
            match &inst.slots[ai] {
                Slot::Objects(objs) => {
                    if !attr.dims.is_empty() {
                        let mut p = inst.path.clone();
                        p.push(Seg::Name(attr.name.clone()));
                        self.array_shapes.insert(p, attr.shape());
                    }
                    for o in objs {
                        self.collect(o)?;
                    }
                }
                Slot::Values(cells) => {
                    for (k, cell) in cells.iter().enumerate() {
                        let (name, ident, shape, off) = self.loc(inst, ai, k);
                        let g = self.groups.entry(name.clone()).or_insert_with(|| Group {
                            ident: ident.clone(),
                            base: base_of(&attr.ty),
                            cells: vec![None; shape.iter().product()],
                            shape,
                            domain: match attr.ty {
                                AttrTy::Bool => Some(Domain::IntRange(0, 1)),
                                _ => attr.domain.clone(),
                            },
                            enum_tag: attr.enum_tag.clone(),
                            span: attr.span.clone(),
                            as_table: false,
                        });
                        if g.ident != ident {
                            return Err(FlattenError::new(
                                PASS,
                                &attr.span,
                                format!("name `{name}` is produced by two different attributes"),
                            ));
                        }
                        g.cells[off] = cell.clone();
                    }
                }
            }
        }
        Ok(())
    }

    fn cell(&self, inst: &Instance, ai: usize, k: usize) -> FlatExpr {
        let (name, _, shape, off) = self.loc(inst, ai, k);
        match &self.groups[&name].cells[off] {
            Some(v) => FlatExpr::Lit(v.clone()),
            None => FlatExpr::elem(name, lits(&unravel(&shape, off))),
        }
    }

    fn use_group(&mut self, name: &str) {
        let g = self.groups.get_mut(name).expect("group collected");
        if g.fully_given() {
            g.as_table = true;
        }
    }

    fn attr_ref(&self, inst: &'a Instance, name: &str, span: &SourceSpan) -> Result<R<'a>, FlattenError> {
        let Some(ai) = self.attrs(inst).iter().position(|a| a.name == name) else {
            return Err(FlattenError::new(PASS, span, format!("class `{}` has no attribute `{name}`", inst.class)));
        };
        let scalar = self.attrs(inst)[ai].dims.is_empty();
        Ok(match (&inst.slots[ai], scalar) {
            (Slot::Objects(objs), true) => R::Obj(&objs[0]),
            (Slot::Objects(_), false) => R::Objs { owner: inst, attr: ai },
            (Slot::Values(_), true) => R::Val(self.cell(inst, ai, 0)),
            (Slot::Values(_), false) => R::Cells { owner: inst, attr: ai },
        })
    }

    fn resolve(&mut self, e: &TExpr, ctx: &'a Instance) -> Result<R<'a>, FlattenError> {
        let span = &e.span;
        Ok(match &e.kind {
            TKind::Lit(v) => R::Val(FlatExpr::Lit(v.clone())),
            TKind::EnumLit { ordinal, .. } => R::Val(FlatExpr::int(*ordinal)),
            TKind::Const(n) => {
                let c = &self.tm.constants[n];
                if c.shape.is_empty() {
                    R::Val(FlatExpr::Lit(c.values[0].clone()))
                } else {
                    R::ConstArr(n.clone())
                }
            }
            TKind::LoopVar(v) => {
                return Err(FlattenError::new(PASS, span, format!("loop variable `{v}` survived unrolling")))
            }
            TKind::Attr(n) => self.attr_ref(ctx, n, span)?,
            TKind::Field(base, f) => match self.resolve(base, ctx)? {
                R::Obj(inst) => self.attr_ref(inst, f, span)?,
                R::ObjSel { owner, attr, index } => self.selected_field(owner, attr, index, f, span)?,
                _ => return Err(FlattenError::new(PASS, span, format!("`.{f}` applied to a non-object"))),
            },
            TKind::Index(base, idx) => {
                let ix: Vec<FlatExpr> = idx
                    .iter()
                    .map(|i| self.value(i, ctx))
                    .collect::<Result<_, _>>()?;
                let consts: Option<Vec<i64>> = ix.iter().map(FlatExpr::as_const_int).collect();
                let oob = |name: &str, ix: &[i64]| {
                    FlattenError::new(PASS, span, format!("index {ix:?} out of bounds for `{name}`"))
                };
                match self.resolve(base, ctx)? {
                    R::Objs { owner, attr } => {
                        let a = &self.attrs(owner)[attr];
                        match consts {
                            Some(c) => {
                                let off = linear_offset(&a.shape(), &c).ok_or_else(|| oob(&a.name, &c))?;
                                let Slot::Objects(objs) = &owner.slots[attr] else { unreachable!() };
                                R::Obj(&objs[off])
                            }
                            None => R::ObjSel {
                                owner,
                                attr,
                                index: ix,
                            },
                        }
                    }
                    R::Cells { owner, attr } => {
                        let a = &self.attrs(owner)[attr];
                        match consts {
                            Some(c) => {
                                let off = linear_offset(&a.shape(), &c).ok_or_else(|| oob(&a.name, &c))?;
                                R::Val(self.cell(owner, attr, off))
                            }
                            None => {
                                let (name, ..) = self.loc(owner, attr, 0);
                                self.use_group(&name);
                                R::Val(FlatExpr::elem(name, ix))
                            }
                        }
                    }
                    R::ConstArr(n) => {
                        let c = &self.tm.constants[&n];
                        match consts {
                            Some(ci) => {
                                let off = linear_offset(&c.shape, &ci).ok_or_else(|| oob(&n, &ci))?;
                                R::Val(FlatExpr::Lit(c.values[off].clone()))
                            }
                            None => {
                                if !self.const_tables.contains(&n) {
                                    self.const_tables.push(n.clone());
                                }
                                R::Val(FlatExpr::elem(n, ix))
                            }
                        }
                    }
                    R::Val(FlatExpr::ArrayLit(es)) => match consts.as_deref() {
                        Some(&[k]) if k >= 1 && (k as usize) <= es.len() => R::Val(es[k as usize - 1].clone()),
                        Some(c) => return Err(oob("array literal", c)),
                        None => {
                            return Err(FlattenError::new(
                                PASS,
                                span,
                                "an array literal cannot be indexed by a decision variable",
                            ))
                        }
                    },
                    _ => return Err(FlattenError::new(PASS, span, "subscript applied to a non-array")),
                }
            }
            TKind::Unary(op, a) => R::Val(fold(FlatExpr::Unary(*op, Box::new(self.value(a, ctx)?)))),
            TKind::Binary(op, l, r) => {
                let l = self.value(l, ctx)?;
                let r = self.value(r, ctx)?;
                R::Val(fold(FlatExpr::bin(*op, l, r)))
            }
            TKind::SetLit(es) => R::Val(fold(FlatExpr::SetLit(
                es.iter().map(|x| self.value(x, ctx)).collect::<Result<_, _>>()?,
            ))),
            TKind::ArrayLit(es) => R::Val(FlatExpr::ArrayLit(
                es.iter().map(|x| self.value(x, ctx)).collect::<Result<_, _>>()?,
            )),
        })
    }

    /// `o[x].f` with `x` a decision variable: only a scalar value attribute shared
    /// by the whole array can be selected this way.
    fn selected_field(
        &mut self,
        owner: &'a Instance,
        attr: usize,
        index: Vec<FlatExpr>,
        f: &str,
        span: &SourceSpan,
    ) -> Result<R<'a>, FlattenError> {
        let arr = &self.attrs(owner)[attr];
        let AttrTy::Object(cname) = &arr.ty else { unreachable!() };
        let class = self.tm.class(cname).expect("component class exists");
        let Some(fa) = class.attr(f) else {
            return Err(FlattenError::new(PASS, span, format!("class `{cname}` has no attribute `{f}`")));
        };
        let mut p = owner.path.clone();
        p.push(Seg::Name(arr.name.clone()));
        let shown = format!(
            "{}[{}].{f}",
            render(&p),
            index.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        );
        if !fa.dims.is_empty() || matches!(fa.ty, AttrTy::Object(_)) {
            return Err(FlattenError::new(
                PASS,
                span,
                format!("`{shown}`: a decision variable selects an object whose `{f}` is expanded per object"),
            ));
        }
        let name = prefixed(&p, f);
        self.use_group(&name);
        Ok(R::Val(FlatExpr::elem(name, index)))
    }

    fn value(&mut self, e: &TExpr, ctx: &'a Instance) -> Result<FlatExpr, FlattenError> {
        match self.resolve(e, ctx)? {
            R::Val(v) => Ok(v),
            R::Cells { owner, attr } => {
                let (name, ..) = self.loc(owner, attr, 0);
                let g = &self.groups[&name];
                Ok(if g.fully_given() {
                    FlatExpr::ArrayLit(g.cells.iter().map(|c| FlatExpr::Lit(c.clone().unwrap())).collect())
                } else {
                    FlatExpr::var(name)
                })
            }
            R::ConstArr(n) => Ok(FlatExpr::ArrayLit(
                self.tm.constants[&n].values.iter().cloned().map(FlatExpr::Lit).collect(),
            )),
            R::Obj(_) | R::Objs { .. } | R::ObjSel { .. } => {
                Err(FlattenError::new(PASS, &e.span, "an object cannot be used as a value"))
            }
        }
    }

    fn items(&mut self, items: &[TItem], ctx: &'a Instance) -> Result<Vec<FItem>, FlattenError> {
        let mut out = Vec::new();
        for it in items {
            out.push(match it {
                TItem::Constraint(e) => FItem::Constraint(self.value(e, ctx)?),
                TItem::If {
                    cond,
                    then_items,
                    else_items,
                    ..
                } => FItem::If(
                    self.value(cond, ctx)?,
                    self.items(then_items, ctx)?,
                    else_items.as_ref().map(|e| self.items(e, ctx)).transpose()?,
                ),
                TItem::Objective { kind, expr, .. } => FItem::Objective(*kind, self.value(expr, ctx)?),
                TItem::Global { name, args, .. } => FItem::Constraint(FlatExpr::Call(
                    name.clone(),
                    args.iter().map(|a| self.value(a, ctx)).collect::<Result<_, _>>()?,
                )),
                TItem::Forall { span, .. } => {
                    return Err(FlattenError::new(PASS, span, "loop survived unrolling"))
                }
            });
        }
        Ok(out)
    }
}

/// Instantiates the zones of every object reachable from the main class and
/// turns attribute groups into variables or tables.
pub fn expand_composition(tm: &TypedModel, root: &Instance) -> Result<Expanded, FlattenError> {
    let mut ex = Expander {
        tm,
        groups: IndexMap::new(),
        array_shapes: HashMap::new(),
        const_tables: Vec::new(),
    };
    ex.collect(root)?;

    let mut instances = Vec::new();
    root.walk(&mut |i| instances.push(i));
    let mut body = Vec::new();
    for inst in instances {
        let class = tm.class(&inst.class).expect("instantiated class exists");
        for z in &class.zones {
            body.extend(ex.items(&z.items, inst)?);
        }
    }

    let mut model = FlatModel {
        name: tm.name.clone(),
        enum_types: tm.enum_tables.clone(),
        ..FlatModel::default()
    };
    let mut items = Vec::new();
    for (name, g) in &ex.groups {
        if g.fully_given() {
            if g.as_table {
                model.tables.push(FlatTable {
                    name: name.clone(),
                    base: g.base,
                    shape: g.shape.clone(),
                    values: g.cells.iter().map(|c| c.clone().unwrap()).collect(),
                });
            }
            continue;
        }
        let Some(domain) = g.domain.clone() else {
            return Err(FlattenError::new(PASS, &g.span, format!("variable `{name}` has no domain")));
        };
        model.variables.push(FlatVar {
            name: name.clone(),
            base: g.base,
            shape: g.shape.clone(),
            domain,
            enum_tag: g.enum_tag.clone(),
        });
        // Cells the data fixes inside a partly given group.
        for (off, c) in g.cells.iter().enumerate() {
            if let Some(v) = c {
                let target = if g.shape.is_empty() {
                    FlatExpr::var(name.clone())
                } else {
                    FlatExpr::elem(name.clone(), lits(&unravel(&g.shape, off)))
                };
                items.push(FItem::Constraint(FlatExpr::bin(BinOp::Eq, target, FlatExpr::Lit(v.clone()))));
            }
        }
    }
    for n in &ex.const_tables {
        if ex.groups.contains_key(n) {
            return Err(FlattenError::new(
                PASS,
                &SourceSpan::synthetic(),
                format!("constant `{n}` collides with a flattened attribute name"),
            ));
        }
        let c = &tm.constants[n];
        model.tables.push(FlatTable {
            name: n.clone(),
            base: match c.elem {
                Ty::Real => BaseType::Real,
                Ty::Bool => BaseType::Bool,
                Ty::Set => BaseType::SetOfInt,
                _ => BaseType::Int,
            },
            shape: c.shape.clone(),
            values: c.values.clone(),
        });
    }
    items.extend(body);
    Ok(Expanded { model, items })
}
