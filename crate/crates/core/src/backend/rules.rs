//! The rewrite-rule registry. Descriptors choose and order these rules.

use std::collections::{BTreeSet, HashMap};

use crate::ast::BinOp;
use crate::flat::{BaseType, Domain, FlatConstraint, FlatExpr, FlatModel, FlatVar};
use crate::value::Value;

use super::{BackendError, RuleSpec};

/// Rule names with the parameters each accepts.
pub const RULES: &[(&str, &[&str])] = &[
    ("decompose_set_matrix", &[]),
    ("split_matrix_to_arrays", &[]),
    ("rename_reserved_words", &["words", "prefix"]),
    ("int_bounds_widen", &[]),
];

pub fn rule_params(name: &str) -> Option<&'static [&'static str]> {
    RULES.iter().find(|(n, _)| *n == name).map(|(_, p)| *p)
}

fn fail(rule: &str, message: String) -> BackendError {
    BackendError::Rule {
        rule: rule.to_string(),
        message,
    }
}

/// Applies `rules` in order, checking the flat invariants after each one.
pub fn apply_rewrites(mut fm: FlatModel, rules: &[RuleSpec]) -> Result<FlatModel, BackendError> {
    for r in rules {
        fm = apply_rule(fm, r)?;
        let problems = fm.validate();
        if let Some(p) = problems.first() {
            return Err(fail(&r.name, format!("produced an invalid model: {p}")));
        }
    }
    Ok(fm)
}

pub fn apply_rule(fm: FlatModel, r: &RuleSpec) -> Result<FlatModel, BackendError> {
    let allowed = rule_params(&r.name).ok_or_else(|| BackendError::UnknownRule(r.name.clone()))?;
    if let Some(k) = r.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(fail(&r.name, format!("unknown parameter `{k}`")));
    }
    match r.name.as_str() {
        "decompose_set_matrix" => split_vars(
            fm,
            &r.name,
            |v| v.base == BaseType::SetOfInt && v.shape.len() == 2,
            Split::Cells,
        ),
        "split_matrix_to_arrays" => split_vars(fm, &r.name, |v| v.shape.len() == 2, Split::Rows),
        "rename_reserved_words" => {
            let words: BTreeSet<&str> = r
                .params
                .get("words")
                .map(|w| w.split(',').map(str::trim).filter(|w| !w.is_empty()).collect())
                .unwrap_or_default();
            let prefix = r.params.get("prefix").map(String::as_str).unwrap_or("v_");
            rename_reserved(fm, &r.name, &words, prefix)
        }
        "int_bounds_widen" => Ok(int_bounds_widen(fm)),
        _ => unreachable!("every registry rule is dispatched"),
    }
}

#[derive(Clone, Copy)]
enum Split {
    /// `s[i,j]` becomes the scalar `s{i}_{j}`.
    Cells,
    /// `m[i,j]` becomes `m_{i}[j]`.
    Rows,
}

fn split_vars(
    mut fm: FlatModel,
    rule: &str,
    pick: impl Fn(&FlatVar) -> bool,
    how: Split,
) -> Result<FlatModel, BackendError> {
    if !fm.variables.iter().any(&pick) {
        return Ok(fm);
    }
    let mut taken: BTreeSet<String> = fm
        .variables
        .iter()
        .filter(|v| !pick(v))
        .map(|v| v.name.clone())
        .chain(fm.tables.iter().map(|t| t.name.clone()))
        .collect();
    let mut split = HashMap::new();
    let mut vars = Vec::new();
    for v in std::mem::take(&mut fm.variables) {
        if !pick(&v) {
            vars.push(v);
            continue;
        }
        let (rows, cols) = (v.shape[0], v.shape[1]);
        let mut fresh = |name: String, shape: Vec<usize>| -> Result<(), BackendError> {
            if !taken.insert(name.clone()) {
                return Err(fail(rule, format!("new name `{name}` collides with an existing one")));
            }
            vars.push(FlatVar {
                name,
                shape,
                ..v.clone()
            });
            Ok(())
        };
        for i in 1..=rows {
            match how {
                Split::Cells => {
                    for j in 1..=cols {
                        fresh(format!("{}{i}_{j}", v.name), Vec::new())?;
                    }
                }
                Split::Rows => fresh(format!("{}_{i}", v.name), vec![cols])?,
            }
        }
        split.insert(v.name.clone(), ());
    }
    fm.variables = vars;
    let mut rewrite = |e: FlatExpr| -> Result<FlatExpr, BackendError> {
        let FlatExpr::Ref { name, index } = &e else {
            return Ok(e);
        };
        if !split.contains_key(name) {
            return Ok(e);
        }
        if index.is_empty() {
            return Err(fail(rule, format!("`{name}` is used as a whole matrix")));
        }
        let row = index[0].as_const_int();
        match (how, row, index[1].as_const_int()) {
            (Split::Cells, Some(i), Some(j)) => Ok(FlatExpr::var(format!("{name}{i}_{j}"))),
            (Split::Rows, Some(i), _) => Ok(FlatExpr::elem(format!("{name}_{i}"), vec![index[1].clone()])),
            _ => Err(fail(rule, format!("`{e}` has a non-constant index"))),
        }
    };
    for c in &mut fm.constraints {
        c.expr = std::mem::replace(&mut c.expr, FlatExpr::int(0)).try_map(&mut rewrite)?;
    }
    if let Some(o) = &mut fm.objective {
        o.expr = std::mem::replace(&mut o.expr, FlatExpr::int(0)).try_map(&mut rewrite)?;
    }
    Ok(fm)
}

fn rename_reserved(
    mut fm: FlatModel,
    rule: &str,
    words: &BTreeSet<&str>,
    prefix: &str,
) -> Result<FlatModel, BackendError> {
    let mut renames: HashMap<String, String> = HashMap::new();
    let names: BTreeSet<String> = fm
        .variables
        .iter()
        .map(|v| v.name.clone())
        .chain(fm.tables.iter().map(|t| t.name.clone()))
        .collect();
    for n in &names {
        if words.contains(n.as_str()) {
            let new = format!("{prefix}{n}");
            if names.contains(&new) {
                return Err(fail(rule, format!("renaming `{n}` collides with `{new}`")));
            }
            renames.insert(n.clone(), new);
        }
    }
    if renames.is_empty() {
        return Ok(fm);
    }
    for v in &mut fm.variables {
        if let Some(n) = renames.get(&v.name) {
            v.name = n.clone();
        }
    }
    for t in &mut fm.tables {
        if let Some(n) = renames.get(&t.name) {
            t.name = n.clone();
        }
    }
    let mut f = |e: FlatExpr| match e {
        FlatExpr::Ref { name, index } => FlatExpr::Ref {
            name: renames.get(&name).cloned().unwrap_or(name),
            index,
        },
        e => e,
    };
    for c in &mut fm.constraints {
        c.expr = std::mem::replace(&mut c.expr, FlatExpr::int(0)).map(&mut f);
    }
    if let Some(o) = &mut fm.objective {
        o.expr = std::mem::replace(&mut o.expr, FlatExpr::int(0)).map(&mut f);
    }
    Ok(fm)
}

/// Explicit domains become their bounds. Unless the domain was already an
/// interval, each cell also gets an `in` (or, for sets, `subset`) constraint.
fn int_bounds_widen(mut fm: FlatModel) -> FlatModel {
    let mut extra = Vec::new();
    for v in &mut fm.variables {
        let Domain::IntSet(vs) = &v.domain else {
            continue;
        };
        let (lo, hi) = (vs[0], *vs.last().unwrap());
        let contiguous = hi - lo + 1 == vs.len() as i64;
        let set = FlatExpr::Lit(Value::Set(vs.iter().copied().collect()));
        // a set variable's domain is its universe: members are kept inside it
        let op = if v.base == BaseType::SetOfInt { BinOp::Subset } else { BinOp::In };
        for k in (0..v.len()).filter(|_| !contiguous) {
            let r = if v.shape.is_empty() {
                FlatExpr::var(&v.name)
            } else {
                let idx = crate::flat::unravel(&v.shape, k);
                FlatExpr::elem(&v.name, idx.into_iter().map(FlatExpr::int).collect())
            };
            extra.push(FlatConstraint {
                expr: FlatExpr::bin(op, r, set.clone()),
            });
        }
        v.domain = Domain::IntRange(lo, hi);
    }
    fm.constraints.extend(extra);
    fm
}
