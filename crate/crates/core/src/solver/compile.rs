//! Lowers flat constraints to propagators over integer variables.
//! Booleans are 0/1 integers.

use std::collections::{BTreeSet, HashMap};

use crate::ast::{BinOp, UnOp};
use crate::flat::{linear_offset, BaseType, Domain, FlatExpr, FlatModel, Symbol};
use crate::value::Value;

use super::domain::{Dom, Store};
use super::props::{BoolFn, LinOp, Linear, Prop};
use super::Unsupported;

/// `sum(coef * var) + c`
#[derive(Debug, Clone, Default)]
struct Lin {
    terms: Vec<(i64, usize)>,
    c: i64,
}

impl Lin {
    fn constant(c: i64) -> Lin {
        Lin { terms: Vec::new(), c }
    }

    fn var(v: usize) -> Lin {
        Lin { terms: vec![(1, v)], c: 0 }
    }

    fn scale(mut self, k: i64) -> Lin {
        self.terms.iter_mut().for_each(|t| t.0 *= k);
        self.c *= k;
        self
    }

    fn add(mut self, other: Lin) -> Lin {
        self.terms.extend(other.terms);
        self.c += other.c;
        self
    }

    fn as_const(&self) -> Option<i64> {
        self.terms.is_empty().then_some(self.c)
    }

    /// Merges repeated variables and drops zero coefficients.
    fn normalize(mut self) -> Lin {
        let mut merged: Vec<(i64, usize)> = Vec::new();
        self.terms.sort_by_key(|t| t.1);
        for (a, v) in self.terms {
            match merged.last_mut() {
                Some(last) if last.1 == v => last.0 += a,
                _ => merged.push((a, v)),
            }
        }
        merged.retain(|t| t.0 != 0);
        Lin { terms: merged, c: self.c }
    }
}

pub(super) struct Compiler<'a> {
    fm: &'a FlatModel,
    pub store: Store,
    pub props: Vec<Prop>,
    /// Row-major variable ids per flat variable.
    pub var_ids: HashMap<String, Vec<usize>>,
    consts: HashMap<i64, usize>,
    unsupported: BTreeSet<String>,
    /// Set when a constraint is false regardless of the variables.
    pub infeasible: bool,
}

type R<T> = Result<T, ()>;

impl<'a> Compiler<'a> {
    pub fn new(fm: &'a FlatModel) -> Self {
        Compiler {
            fm,
            store: Store::new(),
            props: Vec::new(),
            var_ids: HashMap::new(),
            consts: HashMap::new(),
            unsupported: BTreeSet::new(),
            infeasible: false,
        }
    }

    fn unsupported(&mut self, what: impl Into<String>) {
        self.unsupported.insert(what.into());
    }

    pub fn finish(self) -> Result<Self, Unsupported> {
        if self.unsupported.is_empty() {
            Ok(self)
        } else {
            Err(Unsupported(self.unsupported.iter().cloned().collect()))
        }
    }

    /// Creates one solver variable per element of every flat variable.
    pub fn declare(&mut self) -> Vec<usize> {
        let mut decision = Vec::new();
        for v in &self.fm.variables {
            let dom = match (v.base, &v.domain) {
                (BaseType::Real, _) => {
                    self.unsupported("real decision variables");
                    continue;
                }
                (BaseType::SetOfInt, _) => {
                    self.unsupported("set-of-int decision variables");
                    continue;
                }
                (BaseType::Bool, d) => Dom::from_values(
                    &[0, 1].into_iter().filter(|x| d.contains_int(*x)).collect::<Vec<_>>(),
                ),
                (_, Domain::IntRange(lo, hi)) => Dom::range(*lo, *hi),
                (_, Domain::IntSet(vs)) => Dom::from_values(vs),
                (_, Domain::RealRange(..)) => {
                    self.unsupported("real domains");
                    continue;
                }
            };
            let ids: Vec<usize> = (0..v.len()).map(|_| self.store.add(dom.clone())).collect();
            decision.extend(&ids);
            self.var_ids.insert(v.name.clone(), ids);
        }
        decision
    }

    fn constant(&mut self, c: i64) -> usize {
        if let Some(&v) = self.consts.get(&c) {
            return v;
        }
        let v = self.store.add(Dom::range(c, c));
        self.consts.insert(c, v);
        v
    }

    fn bounds(&self, l: &Lin) -> (i128, i128) {
        let mut lo = l.c as i128;
        let mut hi = l.c as i128;
        for &(a, v) in &l.terms {
            let (x, y) = (a as i128 * self.store.lo(v) as i128, a as i128 * self.store.hi(v) as i128);
            lo += x.min(y);
            hi += x.max(y);
        }
        (lo, hi)
    }

    fn fresh(&mut self, lo: i128, hi: i128) -> R<usize> {
        if lo < i64::MIN as i128 / 2 || hi > i64::MAX as i128 / 2 {
            self.unsupported("arithmetic exceeding 62-bit bounds");
            return Err(());
        }
        Ok(self.store.add(Dom::range(lo as i64, hi as i64)))
    }

    /// A variable equal to `l`.
    fn var_of(&mut self, l: Lin) -> R<usize> {
        let l = l.normalize();
        if let Some(c) = l.as_const() {
            return Ok(self.constant(c));
        }
        if l.c == 0 && l.terms.len() == 1 && l.terms[0].0 == 1 {
            return Ok(l.terms[0].1);
        }
        let (lo, hi) = self.bounds(&l);
        let z = self.fresh(lo, hi)?;
        let mut terms = l.terms;
        terms.push((-1, z));
        self.props.push(Prop::Linear(Linear { terms, c: l.c, op: LinOp::Eq }));
        Ok(z)
    }

    fn bool_const(&mut self, b: bool) -> usize {
        self.constant(b as i64)
    }

    fn fresh_bool(&mut self) -> usize {
        self.store.add(Dom::range(0, 1))
    }

    fn symbol_elems(&mut self, name: &str) -> R<(Vec<usize>, Vec<usize>)> {
        match self.fm.symbol(name) {
            Some(Symbol::Var(v)) => match self.var_ids.get(name) {
                Some(ids) => Ok((v.shape.clone(), ids.clone())),
                None => Err(()),
            },
            Some(Symbol::Table(t)) => {
                let mut ids = Vec::new();
                for val in &t.values {
                    match val {
                        Value::Int(i) => ids.push(self.constant(*i)),
                        Value::Bool(b) => ids.push(self.bool_const(*b)),
                        _ => {
                            self.unsupported("non-integer tables");
                            return Err(());
                        }
                    }
                }
                Ok((t.shape.clone(), ids))
            }
            None => Err(()),
        }
    }

    /// The variable a reference denotes, creating an element constraint for
    /// a variable subscript.
    fn reference(&mut self, name: &str, index: &[FlatExpr]) -> R<usize> {
        let (shape, ids) = self.symbol_elems(name)?;
        if index.is_empty() {
            if shape.is_empty() {
                return Ok(ids[0]);
            }
            self.unsupported("whole arrays outside alldifferent");
            return Err(());
        }
        let consts: Option<Vec<i64>> = index.iter().map(FlatExpr::as_const_int).collect();
        if let Some(k) = consts {
            return match linear_offset(&shape, &k) {
                Some(off) => Ok(ids[off]),
                None => {
                    self.infeasible = true;
                    Ok(self.constant(0))
                }
            };
        }
        // 1-based row-major position: sum((i_k - 1) * stride_k) + 1
        let mut pos = Lin::constant(1);
        let mut stride = 1i64;
        for (k, ix) in index.iter().enumerate().rev() {
            let l = self.int(ix)?;
            let v = self.var_of(l)?;
            // each subscript must be within its own dimension
            self.store_bounds(v, 1, shape[k] as i64);
            pos = pos.add(Lin::var(v).add(Lin::constant(-1)).scale(stride));
            stride *= shape[k] as i64;
        }
        let idx = self.var_of(pos)?;
        let lo = ids.iter().map(|&v| self.store.lo(v)).min().unwrap_or(0);
        let hi = ids.iter().map(|&v| self.store.hi(v)).max().unwrap_or(0);
        let y = self.fresh(lo as i128, hi as i128)?;
        self.props.push(Prop::Element { idx, arr: ids, y });
        Ok(y)
    }

    fn store_bounds(&mut self, v: usize, lo: i64, hi: i64) {
        if self.store.set_lo(v, lo).is_err() || self.store.set_hi(v, hi).is_err() {
            self.infeasible = true;
        }
    }

    /// Integer-valued expression as a linear form.
    fn int(&mut self, e: &FlatExpr) -> R<Lin> {
        match e {
            FlatExpr::Lit(Value::Int(v)) => Ok(Lin::constant(*v)),
            FlatExpr::Lit(Value::Bool(b)) => Ok(Lin::constant(*b as i64)),
            FlatExpr::Lit(Value::Real(_)) => {
                self.unsupported("real arithmetic");
                Err(())
            }
            FlatExpr::Ref { name, index } => self.reference(name, index).map(Lin::var),
            FlatExpr::Unary(UnOp::Neg, x) => Ok(self.int(x)?.scale(-1)),
            FlatExpr::Binary(BinOp::Add, l, r) => Ok(self.int(l)?.add(self.int(r)?)),
            FlatExpr::Binary(BinOp::Sub, l, r) => Ok(self.int(l)?.add(self.int(r)?.scale(-1))),
            FlatExpr::Binary(BinOp::Mul, l, r) => {
                let (a, b) = (self.int(l)?, self.int(r)?);
                match (a.as_const(), b.as_const()) {
                    (Some(k), _) => Ok(b.scale(k)),
                    (_, Some(k)) => Ok(a.scale(k)),
                    _ => {
                        let (x, y) = (self.var_of(a)?, self.var_of(b)?);
                        let bx = (self.store.lo(x), self.store.hi(x));
                        let by = (self.store.lo(y), self.store.hi(y));
                        let ps = [bx.0 as i128 * by.0 as i128, bx.0 as i128 * by.1 as i128, bx.1 as i128 * by.0 as i128, bx.1 as i128 * by.1 as i128];
                        let z = self.fresh(*ps.iter().min().unwrap(), *ps.iter().max().unwrap())?;
                        self.props.push(Prop::Times { x, y, z });
                        Ok(Lin::var(z))
                    }
                }
            }
            FlatExpr::Binary(BinOp::Div, l, r) => {
                // exact division: l = r * q with r <> 0
                let (a, b) = (self.int(l)?, self.int(r)?);
                let (alo, ahi) = self.bounds(&a);
                let m = alo.abs().max(ahi.abs());
                let q = self.fresh(-m, m)?;
                let y = self.var_of(b)?;
                let x = self.var_of(a)?;
                self.props.push(Prop::Linear(Linear { terms: vec![(1, y)], c: 0, op: LinOp::Ne }));
                self.props.push(Prop::Times { x: y, y: q, z: x });
                Ok(Lin::var(q))
            }
            e if is_bool(self.fm, e) => {
                let b = self.boolean(e)?;
                Ok(Lin::var(b))
            }
            FlatExpr::Call(name, _) => {
                self.unsupported(format!("`{name}` in an arithmetic position"));
                Err(())
            }
            _ => {
                self.unsupported("set expressions");
                Err(())
            }
        }
    }

    /// A comparison as a linear constraint, or `None` if it is not one.
    fn comparison(&mut self, op: BinOp, l: &FlatExpr, r: &FlatExpr) -> R<Linear> {
        let (a, b) = (self.int(l)?, self.int(r)?);
        // d = a - b
        let d = a.add(b.scale(-1)).normalize();
        let (terms, c) = (d.terms, d.c);
        let neg = |t: &[(i64, usize)]| t.iter().map(|&(k, v)| (-k, v)).collect::<Vec<_>>();
        Ok(match op {
            BinOp::Eq => Linear { terms, c, op: LinOp::Eq },
            BinOp::Ne => Linear { terms, c, op: LinOp::Ne },
            BinOp::Le => Linear { terms, c, op: LinOp::Le },
            BinOp::Lt => Linear { terms, c: c + 1, op: LinOp::Le },
            BinOp::Ge => Linear { terms: neg(&terms), c: -c, op: LinOp::Le },
            BinOp::Gt => Linear { terms: neg(&terms), c: 1 - c, op: LinOp::Le },
            _ => unreachable!("not a comparison"),
        })
    }

    fn set_const(&mut self, e: &FlatExpr) -> Option<Vec<i64>> {
        match e {
            FlatExpr::Lit(Value::Set(s)) => Some(s.iter().copied().collect()),
            _ => None,
        }
    }

    /// The operands of alldifferent as variables.
    fn all_vars(&mut self, args: &[FlatExpr]) -> R<Vec<usize>> {
        let mut out = Vec::new();
        for a in args {
            match a {
                FlatExpr::Ref { name, index } if index.is_empty() => {
                    let (_, ids) = self.symbol_elems(name)?;
                    out.extend(ids);
                }
                FlatExpr::ArrayLit(es) => {
                    for e in es {
                        let l = self.int(e)?;
                        out.push(self.var_of(l)?);
                    }
                }
                e => {
                    let l = self.int(e)?;
                    out.push(self.var_of(l)?);
                }
            }
        }
        Ok(out)
    }

    /// A 0/1 variable equal to the truth of `e`.
    fn boolean(&mut self, e: &FlatExpr) -> R<usize> {
        match e {
            FlatExpr::Lit(Value::Bool(b)) => Ok(self.bool_const(*b)),
            FlatExpr::Ref { name, index } => self.reference(name, index),
            FlatExpr::Unary(UnOp::Not, x) => {
                let b = self.boolean(x)?;
                let z = self.fresh_bool();
                self.props.push(Prop::Linear(Linear { terms: vec![(1, b), (1, z)], c: -1, op: LinOp::Eq }));
                Ok(z)
            }
            FlatExpr::Binary(op, l, r) if op.is_logical() => {
                let (x, y) = (self.boolean(l)?, self.boolean(r)?);
                let (f, x, y) = match op {
                    BinOp::And => (BoolFn::And, x, y),
                    BinOp::Or => (BoolFn::Or, x, y),
                    BinOp::Xor => (BoolFn::Xor, x, y),
                    BinOp::Implies => (BoolFn::Implies, x, y),
                    BinOp::RevImplies => (BoolFn::Implies, y, x),
                    _ => (BoolFn::Iff, x, y),
                };
                let z = self.fresh_bool();
                self.props.push(Prop::Bool { f, x, y, z });
                Ok(z)
            }
            FlatExpr::Binary(op, l, r) if op.is_comparison() => {
                let lin = self.comparison(*op, l, r)?;
                let b = self.fresh_bool();
                self.props.push(Prop::ReifLinear { lin, b });
                Ok(b)
            }
            FlatExpr::Binary(BinOp::In, l, r) => {
                let Some(set) = self.set_const(r) else {
                    self.unsupported("set expressions");
                    return Err(());
                };
                let lin = self.int(l)?;
                let x = self.var_of(lin)?;
                let b = self.fresh_bool();
                self.props.push(Prop::Member { x, set, b });
                Ok(b)
            }
            FlatExpr::Call(name, args) if name == "alldifferent" => {
                let vs = self.all_vars(args)?;
                let mut acc = self.bool_const(true);
                for i in 0..vs.len() {
                    for j in i + 1..vs.len() {
                        let b = self.fresh_bool();
                        let lin = Linear { terms: vec![(1, vs[i]), (-1, vs[j])], c: 0, op: LinOp::Ne };
                        self.props.push(Prop::ReifLinear { lin, b });
                        let z = self.fresh_bool();
                        self.props.push(Prop::Bool { f: BoolFn::And, x: acc, y: b, z });
                        acc = z;
                    }
                }
                Ok(acc)
            }
            FlatExpr::Call(name, _) => {
                self.unsupported(format!("`{name}`"));
                Err(())
            }
            FlatExpr::Binary(..) => {
                self.unsupported("set expressions");
                Err(())
            }
            _ => {
                self.unsupported("non-boolean constraint");
                Err(())
            }
        }
    }

    /// Posts `e == value`.
    pub fn post(&mut self, e: &FlatExpr, value: bool) -> R<()> {
        match (e, value) {
            (FlatExpr::Lit(Value::Bool(b)), _) => {
                if *b != value {
                    self.infeasible = true;
                }
                Ok(())
            }
            (FlatExpr::Binary(BinOp::And, l, r), true) | (FlatExpr::Binary(BinOp::Or, l, r), false) => {
                self.post(l, value)?;
                self.post(r, value)
            }
            (FlatExpr::Binary(BinOp::Implies, l, r), false) => {
                self.post(l, true)?;
                self.post(r, false)
            }
            (FlatExpr::Unary(UnOp::Not, x), _) => self.post(x, !value),
            (FlatExpr::Binary(op, l, r), _) if op.is_comparison() => {
                let lin = self.comparison(*op, l, r)?;
                let lin = if value { lin } else { lin.negated() };
                self.props.push(Prop::Linear(lin));
                Ok(())
            }
            (FlatExpr::Binary(BinOp::In, l, r), _) if self.set_const(r).is_some() => {
                let set = self.set_const(r).unwrap();
                let lin = self.int(l)?;
                let x = self.var_of(lin)?;
                let b = self.bool_const(value);
                self.props.push(Prop::Member { x, set, b });
                Ok(())
            }
            (FlatExpr::Call(name, args), true) if name == "alldifferent" => {
                let vs = self.all_vars(args)?;
                self.props.push(Prop::AllDifferent(vs));
                Ok(())
            }
            (FlatExpr::Call(name, _), _) if name == "cumulatives" => {
                self.unsupported("`cumulatives`");
                Err(())
            }
            _ => {
                let b = self.boolean(e)?;
                if self.store.assign(b, value as i64).is_err() {
                    self.infeasible = true;
                }
                Ok(())
            }
        }
    }

    /// The objective as a single variable to minimize.
    pub fn objective(&mut self, e: &FlatExpr, maximize: bool) -> R<usize> {
        let l = self.int(e)?;
        self.var_of(if maximize { l.scale(-1) } else { l })
    }
}

/// Whether `e` is boolean-valued.
fn is_bool(fm: &FlatModel, e: &FlatExpr) -> bool {
    match e {
        FlatExpr::Lit(v) => matches!(v, Value::Bool(_)),
        FlatExpr::Ref { name, .. } => match fm.symbol(name) {
            Some(Symbol::Var(v)) => v.base == BaseType::Bool,
            Some(Symbol::Table(t)) => t.base == BaseType::Bool,
            None => false,
        },
        FlatExpr::Unary(op, _) => *op == UnOp::Not,
        FlatExpr::Binary(op, _, _) => {
            op.is_logical() || op.is_comparison() || matches!(op, BinOp::In | BinOp::Subset | BinOp::Superset)
        }
        FlatExpr::Call(name, _) => name == "alldifferent",
        _ => false,
    }
}
