//! Propagators. Each one prunes domains and is exact once its variables are fixed.

use super::domain::{Fail, Store};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinOp {
    /// `sum + c = 0`
    Eq,
    /// `sum + c <= 0`
    Le,
    /// `sum + c <> 0`
    Ne,
}

/// `sum(coef * var) + c  op  0`
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub terms: Vec<(i64, usize)>,
    pub c: i64,
    pub op: LinOp,
}

impl Linear {
    /// The constraint that holds exactly when `self` does not.
    pub fn negated(&self) -> Linear {
        match self.op {
            LinOp::Eq => Linear {
                op: LinOp::Ne,
                ..self.clone()
            },
            LinOp::Ne => Linear {
                op: LinOp::Eq,
                ..self.clone()
            },
            // not (s + c <= 0)  <=>  -s - c + 1 <= 0
            LinOp::Le => Linear {
                terms: self.terms.iter().map(|&(a, v)| (-a, v)).collect(),
                c: 1 - self.c,
                op: LinOp::Le,
            },
        }
    }

    fn bounds(&self, s: &Store) -> (i128, i128) {
        let mut lo = self.c as i128;
        let mut hi = self.c as i128;
        for &(a, v) in &self.terms {
            let (x, y) = (a as i128 * s.lo(v) as i128, a as i128 * s.hi(v) as i128);
            lo += x.min(y);
            hi += x.max(y);
        }
        (lo, hi)
    }

    /// `Some(true)` if entailed, `Some(false)` if disentailed.
    pub fn entailed(&self, s: &Store) -> Option<bool> {
        let (lo, hi) = self.bounds(s);
        match self.op {
            LinOp::Le if hi <= 0 => Some(true),
            LinOp::Le if lo > 0 => Some(false),
            LinOp::Eq | LinOp::Ne => {
                let holds = if lo == hi && lo == 0 {
                    Some(true)
                } else if lo > 0 || hi < 0 || self.single_value_excluded(s) {
                    Some(false)
                } else {
                    None
                };
                if self.op == LinOp::Ne {
                    holds.map(|h| !h)
                } else {
                    holds
                }
            }
            LinOp::Le => None,
        }
    }

    /// For `a*x + rest = 0` with everything but `x` fixed: the needed value is absent.
    fn single_value_excluded(&self, s: &Store) -> bool {
        let mut rest = self.c as i128;
        let mut free = None;
        for &(a, v) in &self.terms {
            match s.fixed(v) {
                Some(x) => rest += a as i128 * x as i128,
                None if free.is_none() => free = Some((a, v)),
                None => return false,
            }
        }
        match free {
            Some((a, v)) => {
                let a = a as i128;
                if rest % a != 0 {
                    return true;
                }
                let x = -rest / a;
                x < i64::MIN as i128 || x > i64::MAX as i128 || !s.doms[v].contains(x as i64)
            }
            None => false,
        }
    }

    fn le(terms: &[(i64, usize)], c: i64, s: &mut Store) -> Result<(), Fail> {
        let mut min = c as i128;
        for &(a, v) in terms {
            min += if a > 0 { a as i128 * s.lo(v) as i128 } else { a as i128 * s.hi(v) as i128 };
        }
        if min > 0 {
            return Err(Fail);
        }
        for &(a, v) in terms {
            let own = if a > 0 { a as i128 * s.lo(v) as i128 } else { a as i128 * s.hi(v) as i128 };
            let r = -(min - own);
            let a = a as i128;
            if a > 0 {
                s.set_hi_wide(v, r.div_euclid(a))?;
            } else {
                // a*x <= r  <=>  x >= r / a rounded up
                s.set_lo_wide(v, -(r.div_euclid(-a)))?;
            }
        }
        Ok(())
    }

    pub fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        match self.op {
            LinOp::Le => Self::le(&self.terms, self.c, s),
            LinOp::Eq => {
                Self::le(&self.terms, self.c, s)?;
                let neg: Vec<(i64, usize)> = self.terms.iter().map(|&(a, v)| (-a, v)).collect();
                Self::le(&neg, -self.c, s)?;
                if self.single_value_excluded(s) {
                    return Err(Fail);
                }
                Ok(())
            }
            LinOp::Ne => {
                let mut rest = self.c as i128;
                let mut free = None;
                for &(a, v) in &self.terms {
                    match s.fixed(v) {
                        Some(x) => rest += a as i128 * x as i128,
                        None if free.is_none() => free = Some((a, v)),
                        None => return Ok(()),
                    }
                }
                match free {
                    None if rest == 0 => Err(Fail),
                    None => Ok(()),
                    Some((a, v)) => {
                        let a = a as i128;
                        if rest % a == 0 {
                            let x = -rest / a;
                            if x >= i64::MIN as i128 && x <= i64::MAX as i128 {
                                s.remove(v, x as i64)?;
                            }
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolFn {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

impl BoolFn {
    fn eval(self, x: bool, y: bool) -> bool {
        match self {
            BoolFn::And => x && y,
            BoolFn::Or => x || y,
            BoolFn::Xor => x != y,
            BoolFn::Implies => !x || y,
            BoolFn::Iff => x == y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prop {
    Linear(Linear),
    /// `b <=> lin`
    ReifLinear { lin: Linear, b: usize },
    /// `z = x * y`
    Times { x: usize, y: usize, z: usize },
    /// `y = arr[idx]`, 1-based.
    Element { idx: usize, arr: Vec<usize>, y: usize },
    /// `z = f(x, y)` over 0/1 variables.
    Bool { f: BoolFn, x: usize, y: usize, z: usize },
    /// `b <=> x in set`, with `set` sorted.
    Member { x: usize, set: Vec<i64>, b: usize },
    AllDifferent(Vec<usize>),
}

impl Prop {
    pub fn vars(&self) -> Vec<usize> {
        match self {
            Prop::Linear(l) => l.terms.iter().map(|t| t.1).collect(),
            Prop::ReifLinear { lin, b } => lin.terms.iter().map(|t| t.1).chain([*b]).collect(),
            Prop::Times { x, y, z } | Prop::Bool { x, y, z, .. } => vec![*x, *y, *z],
            Prop::Element { idx, arr, y } => arr.iter().copied().chain([*idx, *y]).collect(),
            Prop::Member { x, b, .. } => vec![*x, *b],
            Prop::AllDifferent(vs) => vs.clone(),
        }
    }

    pub fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        match self {
            Prop::Linear(l) => l.propagate(s),
            Prop::ReifLinear { lin, b } => match s.fixed(*b) {
                Some(1) => lin.propagate(s),
                Some(_) => lin.negated().propagate(s),
                None => match lin.entailed(s) {
                    Some(t) => s.assign(*b, t as i64).map(|_| ()),
                    None => Ok(()),
                },
            },
            Prop::Times { x, y, z } => times(s, *x, *y, *z),
            Prop::Element { idx, arr, y } => element(s, *idx, arr, *y),
            Prop::Bool { f, x, y, z } => boolean(s, *f, *x, *y, *z),
            Prop::Member { x, set, b } => member(s, *x, set, *b),
            Prop::AllDifferent(vs) => alldifferent(s, vs),
        }
    }
}

fn corners(a: (i64, i64), b: (i64, i64)) -> (i128, i128) {
    let ps = [
        a.0 as i128 * b.0 as i128,
        a.0 as i128 * b.1 as i128,
        a.1 as i128 * b.0 as i128,
        a.1 as i128 * b.1 as i128,
    ];
    (*ps.iter().min().unwrap(), *ps.iter().max().unwrap())
}

fn floor_div(n: i128, d: i128) -> i128 {
    let q = n / d;
    if (n % d != 0) && ((n < 0) != (d < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -floor_div(-n, d)
}

fn times(s: &mut Store, x: usize, y: usize, z: usize) -> Result<(), Fail> {
    for _ in 0..4 {
        let before = (s.lo(x), s.hi(x), s.lo(y), s.hi(y), s.lo(z), s.hi(z));
        let (lo, hi) = corners((s.lo(x), s.hi(x)), (s.lo(y), s.hi(y)));
        s.set_lo_wide(z, lo)?;
        s.set_hi_wide(z, hi)?;
        for (a, b) in [(x, y), (y, x)] {
            // a = z / b when b excludes zero
            if s.lo(b) > 0 || s.hi(b) < 0 {
                let (zl, zh, bl, bh) = (s.lo(z) as i128, s.hi(z) as i128, s.lo(b) as i128, s.hi(b) as i128);
                let cands = [(zl, bl), (zl, bh), (zh, bl), (zh, bh)];
                let lo = cands.iter().map(|&(n, d)| ceil_div(n, d)).min().unwrap();
                let hi = cands.iter().map(|&(n, d)| floor_div(n, d)).max().unwrap();
                s.set_lo_wide(a, lo)?;
                s.set_hi_wide(a, hi)?;
            }
        }
        if before == (s.lo(x), s.hi(x), s.lo(y), s.hi(y), s.lo(z), s.hi(z)) {
            break;
        }
    }
    if let (Some(a), Some(b), Some(c)) = (s.fixed(x), s.fixed(y), s.fixed(z)) {
        if a as i128 * b as i128 != c as i128 {
            return Err(Fail);
        }
    }
    Ok(())
}

/// Whether two domains share a value.
fn intersects(s: &Store, a: usize, b: usize) -> bool {
    let (da, db) = (&s.doms[a], &s.doms[b]);
    let lo = da.lo().max(db.lo());
    let hi = da.hi().min(db.hi());
    if lo > hi {
        return false;
    }
    let (small, other) = if da.size() <= db.size() { (da, db) } else { (db, da) };
    if !small.is_exact() {
        return true;
    }
    small.values().any(|v| v >= lo && v <= hi && other.contains(v))
}

fn element(s: &mut Store, idx: usize, arr: &[usize], y: usize) -> Result<(), Fail> {
    s.set_lo(idx, 1)?;
    s.set_hi(idx, arr.len() as i64)?;
    let ks: Vec<i64> = s.doms[idx].values().collect();
    for k in ks {
        if !intersects(s, arr[k as usize - 1], y) {
            s.remove(idx, k)?;
        }
    }
    let ks: Vec<i64> = s.doms[idx].values().collect();
    let lo = ks.iter().map(|&k| s.lo(arr[k as usize - 1])).min().ok_or(Fail)?;
    let hi = ks.iter().map(|&k| s.hi(arr[k as usize - 1])).max().ok_or(Fail)?;
    s.set_lo(y, lo)?;
    s.set_hi(y, hi)?;
    if s.doms[y].is_exact() && s.doms[y].size() <= 4096 {
        let ys: Vec<i64> = s.doms[y].values().collect();
        for v in ys {
            if !ks.iter().any(|&k| s.doms[arr[k as usize - 1]].contains(v)) {
                s.remove(y, v)?;
            }
        }
    }
    if let Some(k) = s.fixed(idx) {
        equal(s, arr[k as usize - 1], y)?;
    }
    Ok(())
}

/// Makes the domains of `a` and `b` equal to their intersection.
fn equal(s: &mut Store, a: usize, b: usize) -> Result<(), Fail> {
    for (p, q) in [(a, b), (b, a)] {
        s.set_lo(p, s.lo(q))?;
        s.set_hi(p, s.hi(q))?;
    }
    for (p, q) in [(a, b), (b, a)] {
        if s.doms[p].is_exact() {
            let vs: Vec<i64> = s.doms[p].values().collect();
            for v in vs {
                if !s.doms[q].contains(v) {
                    s.remove(p, v)?;
                }
            }
        }
    }
    Ok(())
}

fn boolean(s: &mut Store, f: BoolFn, x: usize, y: usize, z: usize) -> Result<(), Fail> {
    let mut support = [[false; 2]; 3];
    for a in [false, true] {
        for b in [false, true] {
            let c = f.eval(a, b);
            if s.doms[x].contains(a as i64) && s.doms[y].contains(b as i64) && s.doms[z].contains(c as i64) {
                support[0][a as usize] = true;
                support[1][b as usize] = true;
                support[2][c as usize] = true;
            }
        }
    }
    for (i, v) in [x, y, z].into_iter().enumerate() {
        for val in 0..2 {
            if !support[i][val] {
                s.remove(v, val as i64)?;
            }
        }
    }
    Ok(())
}

fn member(s: &mut Store, x: usize, set: &[i64], b: usize) -> Result<(), Fail> {
    match s.fixed(b) {
        Some(1) => {
            let lo = *set.iter().find(|&&v| s.doms[x].contains(v)).ok_or(Fail)?;
            let hi = *set.iter().rev().find(|&&v| s.doms[x].contains(v)).unwrap();
            s.set_lo(x, lo)?;
            s.set_hi(x, hi)?;
            if s.doms[x].is_exact() {
                let vs: Vec<i64> = s.doms[x].values().collect();
                for v in vs {
                    if set.binary_search(&v).is_err() {
                        s.remove(x, v)?;
                    }
                }
            }
            Ok(())
        }
        Some(_) => {
            for &v in set {
                s.remove(x, v)?;
            }
            Ok(())
        }
        None => {
            let any_in = set.iter().any(|&v| s.doms[x].contains(v));
            if !any_in {
                s.assign(b, 0)?;
            } else if let Some(v) = s.fixed(x) {
                s.assign(b, set.binary_search(&v).is_ok() as i64)?;
            } else if s.doms[x].is_exact() && s.doms[x].values().all(|v| set.binary_search(&v).is_ok()) {
                s.assign(b, 1)?;
            }
            Ok(())
        }
    }
}

fn alldifferent(s: &mut Store, vs: &[usize]) -> Result<(), Fail> {
    let mut fixed_seen = std::collections::HashSet::new();
    let mut queue: Vec<usize> = vs.iter().copied().filter(|&v| s.doms[v].is_fixed()).collect();
    let mut done = vec![false; vs.len()];
    while let Some(v) = queue.pop() {
        let val = s.lo(v);
        let pos = vs.iter().position(|&w| w == v).unwrap();
        if done[pos] {
            continue;
        }
        done[pos] = true;
        if !fixed_seen.insert(val) {
            return Err(Fail);
        }
        for (k, &w) in vs.iter().enumerate() {
            if w != v && !done[k] && s.remove(w, val)? && s.doms[w].is_fixed() {
                queue.push(w);
            }
        }
    }
    // Pigeonhole: the free variables need as many distinct values.
    let free: Vec<usize> = vs.iter().copied().filter(|&v| !s.doms[v].is_fixed()).collect();
    if free.len() > 1 && free.iter().all(|&v| s.doms[v].is_exact()) {
        let mut union = std::collections::BTreeSet::new();
        for &v in &free {
            union.extend(s.doms[v].values());
            if union.len() >= free.len() {
                return Ok(());
            }
        }
        if union.len() < free.len() {
            return Err(Fail);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::domain::Dom;
    use super::*;

    fn store(doms: &[(i64, i64)]) -> Store {
        let mut s = Store::new();
        for &(lo, hi) in doms {
            s.add(Dom::range(lo, hi));
        }
        s
    }

    #[test]
    fn linear_bounds() {
        // x + y <= 5 with x in [3,9], y in [1,9]
        let mut s = store(&[(3, 9), (1, 9)]);
        let l = Linear { terms: vec![(1, 0), (1, 1)], c: -5, op: LinOp::Le };
        l.propagate(&mut s).unwrap();
        assert_eq!((s.lo(0), s.hi(0), s.lo(1), s.hi(1)), (3, 4, 1, 2));
        // 2x = y, y in [1,5] odd values only after pruning
        let mut s = store(&[(0, 9), (1, 5)]);
        let l = Linear { terms: vec![(2, 0), (-1, 1)], c: 0, op: LinOp::Eq };
        l.propagate(&mut s).unwrap();
        assert_eq!((s.lo(0), s.hi(0)), (1, 2));
    }

    #[test]
    fn negative_coefficients_round_correctly() {
        // -3x <= -7  =>  x >= 3
        let mut s = store(&[(0, 9)]);
        Linear { terms: vec![(-3, 0)], c: 7, op: LinOp::Le }.propagate(&mut s).unwrap();
        assert_eq!(s.lo(0), 3);
    }

    #[test]
    fn negation_is_complement() {
        let l = Linear { terms: vec![(1, 0)], c: -3, op: LinOp::Le };
        for v in 0..6 {
            let mut s = store(&[(v, v)]);
            let a = l.entailed(&s).unwrap();
            let b = l.negated().entailed(&s).unwrap();
            assert_ne!(a, b);
            assert_eq!(l.propagate(&mut s).is_ok(), a);
        }
    }

    #[test]
    fn times_and_exact_quotients() {
        let mut s = store(&[(2, 3), (4, 5), (0, 100)]);
        times(&mut s, 0, 1, 2).unwrap();
        assert_eq!((s.lo(2), s.hi(2)), (8, 15));
        // y * z = 7 with y = 2 has no integer z
        let mut s = store(&[(2, 2), (-10, 10), (7, 7)]);
        assert!(times(&mut s, 0, 1, 2).is_err());
        assert_eq!(floor_div(-7, 2), -4);
        assert_eq!(ceil_div(-7, 2), -3);
    }

    #[test]
    fn element_prunes_both_ways() {
        // y = [10, 20, 30][i], y <= 20
        let mut s = store(&[(0, 9), (10, 10), (20, 20), (30, 30), (0, 20)]);
        element(&mut s, 0, &[1, 2, 3], 4).unwrap();
        assert_eq!((s.lo(0), s.hi(0)), (1, 2));
        assert_eq!(s.doms[4].values().collect::<Vec<_>>(), [10, 20]);
    }

    #[test]
    fn alldifferent_pigeonhole() {
        let mut s = store(&[(1, 2), (1, 2), (1, 2)]);
        assert!(alldifferent(&mut s, &[0, 1, 2]).is_err());
        let mut s = store(&[(1, 1), (1, 2), (1, 3)]);
        alldifferent(&mut s, &[0, 1, 2]).unwrap();
        assert_eq!((s.fixed(1), s.fixed(2)), (Some(2), Some(3)));
    }

    #[test]
    fn boolean_tables() {
        let mut s = store(&[(0, 1), (0, 1), (1, 1)]);
        boolean(&mut s, BoolFn::And, 0, 1, 2).unwrap();
        assert_eq!((s.fixed(0), s.fixed(1)), (Some(1), Some(1)));
        let mut s = store(&[(1, 1), (0, 1), (1, 1)]);
        boolean(&mut s, BoolFn::Implies, 0, 1, 2).unwrap();
        assert_eq!(s.fixed(1), Some(1));
        let mut s = store(&[(0, 0), (0, 1), (0, 0)]);
        assert!(boolean(&mut s, BoolFn::Implies, 0, 1, 2).is_err());
    }
}
