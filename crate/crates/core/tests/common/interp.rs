//! Direct interpreter for analyzed models: loops, conditionals and object
//! references are executed as written, with no flattening involved. Decision
//! cells are named the way the flat model names them, so the two solution
//! sets can be compared.

use std::collections::{BTreeSet, HashMap};

use scomma_core::analyzer::{bind_data, AttrTy, Instance, Seg, Slot, TExpr, TItem, TKind, TRange, TypedModel};
use scomma_core::data::DataFile;
use scomma_core::flat::{unravel, Domain, Solution};
use scomma_core::{BinOp, UnOp, Value};

use super::brute::subsets;

/// `(flat name, 1-based index)`
pub type CellName = (String, Vec<i64>);
pub type Assignment = Vec<(CellName, Value)>;

type Key = (Vec<Seg>, usize, usize);

struct Cell {
    name: CellName,
    values: Vec<Value>,
}

fn render(path: &[Seg]) -> String {
    path.iter()
        .map(|s| match s {
            Seg::Name(n) => n.clone(),
            Seg::Idx(ix) => ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("_"),
        })
        .collect::<Vec<_>>()
        .join("_")
}

fn join(path: &[Seg], attr: &str) -> String {
    if path.is_empty() {
        attr.to_string()
    } else {
        format!("{}_{attr}", render(path))
    }
}

fn cell_name(tm: &TypedModel, inst: &Instance, ai: usize, k: usize) -> CellName {
    let a = &tm.class(&inst.class).unwrap().attributes[ai];
    if !a.dims.is_empty() {
        return (join(&inst.path, &a.name), unravel(&a.shape(), k));
    }
    match inst.path.last() {
        Some(Seg::Idx(ix)) => (join(&inst.path[..inst.path.len() - 1], &a.name), ix.clone()),
        _ => (join(&inst.path, &a.name), Vec::new()),
    }
}

fn domain_values(tm: &TypedModel, ty: &AttrTy, domain: Option<&Domain>) -> Vec<Value> {
    match ty {
        AttrTy::Bool => vec![Value::Bool(false), Value::Bool(true)],
        AttrTy::Enum(e) => (1..=tm.enums[e].len() as i64).map(Value::Int).collect(),
        AttrTy::SetOf(e) => subsets(&(1..=tm.enums[e].len() as i64).collect::<Vec<_>>()),
        AttrTy::SetOfInt => subsets(&domain.expect("set universe").int_values().unwrap()),
        AttrTy::Int => domain.expect("int domain").int_values().unwrap().into_iter().map(Value::Int).collect(),
        AttrTy::Real => panic!("real attributes cannot be enumerated"),
        AttrTy::Object(_) => unreachable!(),
    }
}

pub struct Interpreter<'a> {
    tm: &'a TypedModel,
    root: Instance,
    cells: Vec<Cell>,
    index: HashMap<Key, usize>,
}

enum V<'a> {
    Val(Value),
    Obj(&'a Instance),
    Objs(&'a Instance, usize),
    Cells(&'a Instance, usize),
    Const(&'a scomma_core::analyzer::ConstVal),
    List(Vec<Value>),
}

type R<T> = Result<T, ()>;

struct Env<'e> {
    values: &'e [Value],
    loops: Vec<(String, i64)>,
}

impl<'a> Interpreter<'a> {
    pub fn new(tm: &'a TypedModel, d: &DataFile) -> Self {
        let (root, _) = bind_data(tm, d).expect("data binds");
        let mut it = Interpreter {
            tm,
            root: root.clone(),
            cells: Vec::new(),
            index: HashMap::new(),
        };
        let mut found = Vec::new();
        root.walk(&mut |inst| {
            let class = tm.class(&inst.class).unwrap();
            for (ai, slot) in inst.slots.iter().enumerate() {
                if let Slot::Values(cs) = slot {
                    for (k, c) in cs.iter().enumerate() {
                        if c.is_none() {
                            let a = &class.attributes[ai];
                            found.push((
                                (inst.path.clone(), ai, k),
                                Cell {
                                    name: cell_name(tm, inst, ai, k),
                                    values: domain_values(tm, &a.ty, a.domain.as_ref()),
                                },
                            ));
                        }
                    }
                }
            }
        });
        for (key, cell) in found {
            it.index.insert(key, it.cells.len());
            it.cells.push(cell);
        }
        it
    }

    pub fn candidates(&self) -> u128 {
        self.cells.iter().fold(1u128, |n, c| n.saturating_mul(c.values.len() as u128))
    }

    pub fn cell_names(&self) -> BTreeSet<CellName> {
        self.cells.iter().map(|c| c.name.clone()).collect()
    }

    /// Every assignment to the decision cells satisfying all constraint zones.
    pub fn solutions(&self) -> BTreeSet<Assignment> {
        let mut out = BTreeSet::new();
        if self.cells.iter().any(|c| c.values.is_empty()) {
            return out;
        }
        let mut pos = vec![0usize; self.cells.len()];
        loop {
            let values: Vec<Value> = self.cells.iter().zip(&pos).map(|(c, &p)| c.values[p].clone()).collect();
            if self.satisfied(&values) {
                let mut a: Assignment = self.cells.iter().map(|c| c.name.clone()).zip(values).collect();
                a.sort();
                out.insert(a);
            }
            let mut k = pos.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                pos[k] += 1;
                if pos[k] < self.cells[k].values.len() {
                    break;
                }
                pos[k] = 0;
            }
        }
    }

    fn satisfied(&self, values: &[Value]) -> bool {
        let mut ok = true;
        let mut env = Env {
            values,
            loops: Vec::new(),
        };
        self.root.walk(&mut |inst| {
            if !ok {
                return;
            }
            for z in &self.tm.class(&inst.class).unwrap().zones {
                if !self.items(&z.items, inst, &mut env) {
                    ok = false;
                    return;
                }
            }
        });
        ok
    }

    fn items(&self, items: &[TItem], inst: &Instance, env: &mut Env) -> bool {
        items.iter().all(|it| self.item(it, inst, env))
    }

    fn item(&self, it: &TItem, inst: &Instance, env: &mut Env) -> bool {
        match it {
            TItem::Constraint(e) => matches!(self.value(e, inst, env), Ok(Value::Bool(true))),
            TItem::Objective { .. } => true,
            TItem::If {
                cond,
                then_items,
                else_items,
                ..
            } => match self.value(cond, inst, env) {
                Ok(Value::Bool(true)) => self.items(then_items, inst, env),
                Ok(Value::Bool(false)) => else_items.as_ref().is_none_or(|e| self.items(e, inst, env)),
                _ => false,
            },
            TItem::Forall { var, range, body, .. } => {
                let (lo, hi) = match range {
                    TRange::Interval(a, b) => {
                        match (self.value(a, inst, env), self.value(b, inst, env)) {
                            (Ok(Value::Int(a)), Ok(Value::Int(b))) => (a, b),
                            _ => return false,
                        }
                    }
                    TRange::Enum(e, _) => (1, self.tm.enums[e].len() as i64),
                };
                for i in lo..=hi {
                    env.loops.push((var.clone(), i));
                    let ok = self.items(body, inst, env);
                    env.loops.pop();
                    if !ok {
                        return false;
                    }
                }
                true
            }
            TItem::Global { name, args, .. } => {
                assert_eq!(name, "alldifferent", "only alldifferent is interpreted");
                let mut seen = BTreeSet::new();
                for a in args {
                    let Ok(vs) = self.list(a, inst, env) else { return false };
                    for v in vs {
                        if !seen.insert(v) {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    fn list(&self, e: &TExpr, inst: &'a Instance, env: &Env) -> R<Vec<Value>> {
        match self.eval(e, inst, env)? {
            V::List(vs) => Ok(vs),
            V::Val(v) => Ok(vec![v]),
            V::Cells(owner, ai) => {
                let n = self.tm.class(&owner.class).unwrap().attributes[ai].len();
                (0..n).map(|k| self.cell(owner, ai, k, env)).collect()
            }
            V::Const(c) => Ok(c.values.clone()),
            _ => Err(()),
        }
    }

    fn cell(&self, inst: &Instance, ai: usize, k: usize, env: &Env) -> R<Value> {
        let Slot::Values(cs) = &inst.slots[ai] else { return Err(()) };
        match &cs[k] {
            Some(v) => Ok(v.clone()),
            None => Ok(env.values[self.index[&(inst.path.clone(), ai, k)]].clone()),
        }
    }

    fn attr(&self, inst: &'a Instance, name: &str, env: &Env) -> R<V<'a>> {
        let class = self.tm.class(&inst.class).unwrap();
        let ai = class.attr_index(name).ok_or(())?;
        let scalar = class.attributes[ai].dims.is_empty();
        Ok(match (&inst.slots[ai], scalar) {
            (Slot::Objects(os), true) => V::Obj(&os[0]),
            (Slot::Objects(_), false) => V::Objs(inst, ai),
            (Slot::Values(_), true) => V::Val(self.cell(inst, ai, 0, env)?),
            (Slot::Values(_), false) => V::Cells(inst, ai),
        })
    }

    fn value(&self, e: &TExpr, inst: &'a Instance, env: &Env) -> R<Value> {
        match self.eval(e, inst, env)? {
            V::Val(v) => Ok(v),
            _ => Err(()),
        }
    }

    fn int(&self, e: &TExpr, inst: &'a Instance, env: &Env) -> R<i64> {
        match self.value(e, inst, env)? {
            Value::Int(i) => Ok(i),
            _ => Err(()),
        }
    }

    fn eval(&self, e: &TExpr, inst: &'a Instance, env: &Env) -> R<V<'a>> {
        Ok(match &e.kind {
            TKind::Lit(v) => V::Val(v.clone()),
            TKind::EnumLit { ordinal, .. } => V::Val(Value::Int(*ordinal)),
            TKind::Const(n) => {
                let c = &self.tm.constants[n];
                if c.shape.is_empty() {
                    V::Val(c.values[0].clone())
                } else {
                    V::Const(c)
                }
            }
            TKind::LoopVar(n) => V::Val(Value::Int(
                env.loops.iter().rev().find(|(v, _)| v == n).ok_or(())?.1,
            )),
            TKind::Attr(n) => self.attr(inst, n, env)?,
            TKind::Field(b, f) => match self.eval(b, inst, env)? {
                V::Obj(o) => self.attr(o, f, env)?,
                _ => return Err(()),
            },
            TKind::Index(b, idx) => {
                let ix: Vec<i64> = idx.iter().map(|i| self.int(i, inst, env)).collect::<R<_>>()?;
                let offset = |shape: &[usize]| -> R<usize> {
                    if shape.len() != ix.len() {
                        return Err(());
                    }
                    let mut off = 0usize;
                    for (&i, &d) in ix.iter().zip(shape) {
                        if i < 1 || i as usize > d {
                            return Err(());
                        }
                        off = off * d + (i as usize - 1);
                    }
                    Ok(off)
                };
                match self.eval(b, inst, env)? {
                    V::Objs(owner, ai) => {
                        let shape = self.tm.class(&owner.class).unwrap().attributes[ai].shape();
                        let Slot::Objects(os) = &owner.slots[ai] else { return Err(()) };
                        V::Obj(&os[offset(&shape)?])
                    }
                    V::Cells(owner, ai) => {
                        let shape = self.tm.class(&owner.class).unwrap().attributes[ai].shape();
                        V::Val(self.cell(owner, ai, offset(&shape)?, env)?)
                    }
                    V::Const(c) => V::Val(c.values[offset(&c.shape)?].clone()),
                    V::List(vs) => V::Val(vs[offset(&[vs.len()])?].clone()),
                    _ => return Err(()),
                }
            }
            TKind::Unary(op, a) => V::Val(unary(*op, self.value(a, inst, env)?)?),
            TKind::Binary(op, l, r) => {
                V::Val(binary(*op, self.value(l, inst, env)?, self.value(r, inst, env)?)?)
            }
            TKind::SetLit(es) => {
                let mut s = BTreeSet::new();
                for x in es {
                    s.insert(self.int(x, inst, env)?);
                }
                V::Val(Value::Set(s))
            }
            TKind::ArrayLit(es) => V::List(es.iter().map(|x| self.value(x, inst, env)).collect::<R<_>>()?),
        })
    }
}

fn unary(op: UnOp, v: Value) -> R<Value> {
    Ok(match (op, v) {
        (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
        (UnOp::Neg, Value::Int(i)) => Value::Int(i.checked_neg().ok_or(())?),
        (UnOp::Card, Value::Set(s)) => Value::Int(s.len() as i64),
        _ => return Err(()),
    })
}

fn binary(op: BinOp, a: Value, b: Value) -> R<Value> {
    use BinOp::*;
    use Value::{Bool as B, Int as I, Set as S};
    Ok(match (op, a, b) {
        (Add, I(x), I(y)) => I(x.checked_add(y).ok_or(())?),
        (Sub, I(x), I(y)) => I(x.checked_sub(y).ok_or(())?),
        (Mul, I(x), I(y)) => I(x.checked_mul(y).ok_or(())?),
        (Div, I(x), I(y)) if y != 0 && x % y == 0 => I(x / y),
        (Lt, I(x), I(y)) => B(x < y),
        (Le, I(x), I(y)) => B(x <= y),
        (Gt, I(x), I(y)) => B(x > y),
        (Ge, I(x), I(y)) => B(x >= y),
        (Eq, x, y) if x.kind() == y.kind() => B(x == y),
        (Ne, x, y) if x.kind() == y.kind() => B(x != y),
        (And, B(x), B(y)) => B(x && y),
        (Or, B(x), B(y)) => B(x || y),
        (Xor, B(x), B(y)) => B(x != y),
        (Implies, B(x), B(y)) => B(!x || y),
        (RevImplies, B(x), B(y)) => B(x || !y),
        (Iff, B(x), B(y)) => B(x == y),
        (In, I(x), S(s)) => B(s.contains(&x)),
        (Subset, S(x), S(y)) => B(x.is_subset(&y)),
        (Superset, S(x), S(y)) => B(x.is_superset(&y)),
        (Union, S(x), S(y)) => S(&x | &y),
        (Intersection, S(x), S(y)) => S(&x & &y),
        (Diff, S(x), S(y)) => S(&x - &y),
        (SymDiff, S(x), S(y)) => S(&x ^ &y),
        _ => return Err(()),
    })
}

/// A flat solution restricted to `cells`, in the interpreter's format.
pub fn project(sol: &Solution, fm: &scomma_core::FlatModel, cells: &BTreeSet<CellName>) -> Assignment {
    let mut out = Vec::new();
    for v in &fm.variables {
        for (k, val) in sol.values[&v.name].iter().enumerate() {
            let name = (v.name.clone(), unravel(&v.shape, k));
            if cells.contains(&name) {
                // flat booleans and enum ordinals already match the interpreter
                out.push((name, val.clone()));
            }
        }
    }
    out.sort();
    out
}
