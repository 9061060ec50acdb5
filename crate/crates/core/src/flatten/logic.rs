use super::{Expanded, FItem, FlattenOptions};
use crate::ast::BinOp;
use crate::flat::FlatExpr;
use crate::value::Value;

/// Conjunction of a branch; an empty branch is `true`.
fn conjunction(items: Vec<FItem>) -> FlatExpr {
    items
        .into_iter()
        .map(|it| match it {
            FItem::Constraint(e) => e,
            _ => unreachable!("branches hold only constraints once nested ifs are removed"),
        })
        .reduce(|a, b| FlatExpr::bin(BinOp::And, a, b))
        .unwrap_or(FlatExpr::Lit(Value::Bool(true)))
}

fn lower(items: Vec<FItem>, opts: &FlattenOptions) -> Vec<FItem> {
    let mut out = Vec::new();
    for it in items {
        match it {
            FItem::If(cond, then_items, else_items) => {
                let then_items = lower(then_items, opts);
                let else_items = else_items.map(|e| lower(e, opts));
                if opts.simplify_conditionals {
                    if let FlatExpr::Lit(Value::Bool(c)) = cond {
                        let chosen = if c { Some(then_items) } else { else_items };
                        out.extend(chosen.into_iter().flatten());
                        continue;
                    }
                }
                let b = conjunction(then_items);
                let e = match else_items {
                    None => FlatExpr::bin(BinOp::Implies, cond, b),
                    Some(els) => FlatExpr::bin(
                        BinOp::And,
                        FlatExpr::bin(BinOp::Implies, cond.clone(), b),
                        FlatExpr::bin(BinOp::Or, cond, conjunction(els)),
                    ),
                };
                out.push(FItem::Constraint(e));
            }
            other => out.push(other),
        }
    }
    out
}

/// `if a then B else C` becomes `(a -> B) and (a or C)`; without `else`, `a -> B`.
/// Nested conditionals are lowered innermost first.
pub fn remove_conditionals(mut ex: Expanded, opts: &FlattenOptions) -> Expanded {
    ex.items = lower(std::mem::take(&mut ex.items), opts);
    ex
}

/// Rewrites `a <-> b` as `(a -> b) and (b -> a)` and `a <- b` as `b -> a`.
pub fn normalize_expr(e: FlatExpr) -> FlatExpr {
    e.map(&mut |n| match n {
        FlatExpr::Binary(BinOp::Iff, a, b) => FlatExpr::bin(
            BinOp::And,
            FlatExpr::bin(BinOp::Implies, (*a).clone(), (*b).clone()),
            FlatExpr::bin(BinOp::Implies, *b, *a),
        ),
        FlatExpr::Binary(BinOp::RevImplies, a, b) => FlatExpr::Binary(BinOp::Implies, b, a),
        other => other,
    })
}

pub fn normalize_logic(mut ex: Expanded) -> Expanded {
    for it in &mut ex.items {
        if let FItem::Constraint(e) | FItem::Objective(_, e) = it {
            *e = normalize_expr(std::mem::replace(e, FlatExpr::int(0)));
        }
    }
    ex
}
