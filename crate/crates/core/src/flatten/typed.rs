//! Passes that still operate on the typed model.

use super::fold::fold_texpr;
use super::FlattenError;
use crate::analyzer::{bind_data, AttrTy, Instance, TExpr, TItem, TKind, TRange, Ty, TypedModel};
use crate::data::DataFile;
use crate::flat::Domain;
use crate::value::Value;

fn for_each_item(tm: &mut TypedModel, f: &mut dyn FnMut(&mut TItem)) {
    for c in &mut tm.classes {
        for z in &mut c.zones {
            z.items.iter_mut().for_each(&mut *f);
        }
    }
}

/// Enum literals become ordinals, enum ranges become `1..n`, enum-typed
/// attributes become integers over `[1, n]` tagged with their enum.
pub fn substitute_enums(tm: &TypedModel) -> TypedModel {
    let mut out = tm.clone();
    for c in &mut out.classes {
        for a in &mut c.attributes {
            match &a.ty {
                AttrTy::Enum(e) => {
                    let n = tm.enums[e].len() as i64;
                    a.enum_tag = Some(e.clone());
                    a.domain = Some(Domain::IntRange(1, n));
                    a.ty = AttrTy::Int;
                    a.decl = None;
                }
                AttrTy::SetOf(e) => {
                    a.enum_tag = Some(e.clone());
                    a.ty = AttrTy::SetOfInt;
                }
                _ => {}
            }
        }
    }
    let enums = tm.enums.clone();
    for_each_item(&mut out, &mut |it| enum_item(it, &enums));
    out.enum_tables = tm.enums.clone();
    out
}

fn enum_item(it: &mut TItem, enums: &indexmap::IndexMap<String, Vec<String>>) {
    match it {
        TItem::Forall { range, body, .. } => {
            if let TRange::Enum(e, span) = range {
                let n = enums[e.as_str()].len() as i64;
                *range = TRange::Interval(
                    TExpr::lit(Value::Int(1), span.clone()),
                    TExpr::lit(Value::Int(n), span.clone()),
                );
            }
            if let TRange::Interval(a, b) = range {
                enum_expr(a);
                enum_expr(b);
            }
            body.iter_mut().for_each(|b| enum_item(b, enums));
        }
        TItem::If {
            cond,
            then_items,
            else_items,
            ..
        } => {
            enum_expr(cond);
            then_items.iter_mut().for_each(|b| enum_item(b, enums));
            else_items.iter_mut().flatten().for_each(|b| enum_item(b, enums));
        }
        other => other.exprs_mut(&mut enum_expr),
    }
}

fn enum_expr(e: &mut TExpr) {
    e.rewrite(&mut |n| {
        if let TKind::EnumLit { ordinal, .. } = n.kind {
            n.kind = TKind::Lit(Value::Int(ordinal));
        }
        if let Ty::Enum(_) = n.ty {
            n.ty = Ty::Int;
        }
    });
}

/// Binds the data file onto the object tree and replaces constants by their values.
pub fn substitute_data(tm: &TypedModel, d: &DataFile) -> Result<(TypedModel, Instance), FlattenError> {
    let (root, _) = bind_data(tm, d).map_err(|diags| {
        let first = diags.0.into_iter().find(|x| x.is_error());
        let (span, msg) = first
            .map(|x| (x.span, x.message))
            .unwrap_or_else(|| (crate::span::SourceSpan::synthetic(), "data binding failed".into()));
        FlattenError::new("substitute_data", &span, msg)
    })?;
    let mut out = tm.clone();
    let consts = tm.constants.clone();
    for_each_item(&mut out, &mut |it| it.exprs_mut(&mut |e| fold_texpr(e, &consts)));
    Ok((out, root))
}

/// Replaces every `forall` by copies of its body, outer loops first.
pub fn unroll_loops(tm: &TypedModel) -> Result<TypedModel, FlattenError> {
    let mut out = tm.clone();
    for c in &mut out.classes {
        for z in &mut c.zones {
            let items = std::mem::take(&mut z.items);
            z.items = unroll_items(items, tm)?;
        }
    }
    Ok(out)
}

fn unroll_items(items: Vec<TItem>, tm: &TypedModel) -> Result<Vec<TItem>, FlattenError> {
    let mut out = Vec::new();
    for it in items {
        match it {
            TItem::Forall {
                var,
                range,
                body,
                span,
            } => {
                let (lo, hi) = match &range {
                    TRange::Interval(a, b) => (
                        a.as_lit().and_then(Value::as_int),
                        b.as_lit().and_then(Value::as_int),
                    ),
                    TRange::Enum(..) => (None, None),
                };
                let (Some(lo), Some(hi)) = (lo, hi) else {
                    return Err(FlattenError::new("unroll_loops", &span, format!("range of loop over `{var}` is not constant")));
                };
                for v in lo..=hi {
                    let mut copy = body.clone();
                    for b in &mut copy {
                        bind_loop_var(b, &var, v);
                        b.exprs_mut(&mut |e| fold_texpr(e, &tm.constants));
                    }
                    out.extend(unroll_items(copy, tm)?);
                }
            }
            TItem::If {
                cond,
                then_items,
                else_items,
                span,
            } => out.push(TItem::If {
                cond,
                then_items: unroll_items(then_items, tm)?,
                else_items: else_items.map(|e| unroll_items(e, tm)).transpose()?,
                span,
            }),
            other => out.push(other),
        }
    }
    Ok(out)
}

/// Substitutes `v` for the loop variable `var`, respecting inner loops that rebind it.
fn bind_loop_var(it: &mut TItem, var: &str, v: i64) {
    let mut subst = |e: &mut TExpr| {
        e.rewrite(&mut |n| {
            if matches!(&n.kind, TKind::LoopVar(x) if x == var) {
                n.kind = TKind::Lit(Value::Int(v));
                n.ty = Ty::Int;
            }
        })
    };
    match it {
        TItem::Forall {
            var: inner,
            range,
            body,
            ..
        } => {
            if let TRange::Interval(a, b) = range {
                subst(a);
                subst(b);
            }
            if inner != var {
                body.iter_mut().for_each(|b| bind_loop_var(b, var, v));
            }
        }
        TItem::If {
            cond,
            then_items,
            else_items,
            ..
        } => {
            subst(cond);
            then_items.iter_mut().for_each(|b| bind_loop_var(b, var, v));
            else_items.iter_mut().flatten().for_each(|b| bind_loop_var(b, var, v));
        }
        other => other.exprs_mut(&mut subst),
    }
}
