//! Constant folding. Subexpressions whose evaluation fails (division by zero,
//! inexact division, overflow) are left in place so the failure surfaces as a
//! violated constraint, never as a silently dropped one.

use std::collections::BTreeSet;

use indexmap::IndexMap;

use crate::analyzer::{ConstVal, TExpr, TKind, Ty};
use crate::eval::{apply_binary, apply_unary};
use crate::flat::{linear_offset, FlatExpr};
use crate::value::Value;

/// Folds literal-only subexpressions of a flat expression, bottom-up.
pub fn fold(e: FlatExpr) -> FlatExpr {
    e.map(&mut fold_node)
}

fn fold_node(e: FlatExpr) -> FlatExpr {
    match e {
        FlatExpr::Unary(op, inner) => match *inner {
            FlatExpr::Lit(v) => match apply_unary(op, v.clone()) {
                Ok(r) => FlatExpr::Lit(r),
                Err(_) => FlatExpr::Unary(op, Box::new(FlatExpr::Lit(v))),
            },
            other => FlatExpr::Unary(op, Box::new(other)),
        },
        FlatExpr::Binary(op, l, r) => match (*l, *r) {
            (FlatExpr::Lit(a), FlatExpr::Lit(b)) => match apply_binary(op, a.clone(), b.clone()) {
                Ok(v) => FlatExpr::Lit(v),
                Err(_) => FlatExpr::bin(op, FlatExpr::Lit(a), FlatExpr::Lit(b)),
            },
            (l, r) => FlatExpr::bin(op, l, r),
        },
        FlatExpr::SetLit(es) if es.iter().all(|x| matches!(x, FlatExpr::Lit(Value::Int(_)))) => {
            let set: BTreeSet<i64> = es.iter().filter_map(FlatExpr::as_const_int).collect();
            FlatExpr::Lit(Value::Set(set))
        }
        other => other,
    }
}

/// The same folding on typed expressions, used before composition expansion.
/// Scalar constants and constant-indexed elements of constant arrays are
/// replaced by their values on the way.
pub(crate) fn fold_texpr(e: &mut TExpr, consts: &IndexMap<String, ConstVal>) {
    e.rewrite(&mut |n| {
        let folded = match &n.kind {
            TKind::Const(name) => consts
                .get(name)
                .filter(|c| c.shape.is_empty())
                .map(|c| c.values[0].clone()),
            TKind::Index(base, idx) => match &base.kind {
                TKind::Const(name) => {
                    let ix: Option<Vec<i64>> = idx.iter().map(|i| i.as_lit().and_then(Value::as_int)).collect();
                    match (consts.get(name), ix) {
                        (Some(c), Some(ix)) => linear_offset(&c.shape, &ix).map(|o| c.values[o].clone()),
                        _ => None,
                    }
                }
                _ => None,
            },
            TKind::Unary(op, a) => a.as_lit().and_then(|v| apply_unary(*op, v.clone()).ok()),
            TKind::Binary(op, l, r) => match (l.as_lit(), r.as_lit()) {
                (Some(a), Some(b)) => apply_binary(*op, a.clone(), b.clone()).ok(),
                _ => None,
            },
            TKind::SetLit(es) => es
                .iter()
                .map(|x| x.as_lit().and_then(Value::as_int))
                .collect::<Option<BTreeSet<i64>>>()
                .map(Value::Set),
            _ => None,
        };
        if let Some(v) = folded {
            let ty = match (&v, &n.ty) {
                (Value::Int(_), Ty::Enum(e)) => Ty::Enum(e.clone()),
                _ => TExpr::lit(v.clone(), n.span.clone()).ty,
            };
            *n = TExpr {
                kind: TKind::Lit(v),
                ty,
                span: n.span.clone(),
            };
        }
    });
}
