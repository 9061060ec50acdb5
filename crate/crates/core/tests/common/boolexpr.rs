//! Random boolean expressions over six atoms and the if-then-else check.

use proptest::prelude::*;
use scomma_core::{BinOp, Value};

#[derive(Debug, Clone)]
pub enum B {
    Atom(usize),
    Const(bool),
    Not(Box<B>),
    Bin(BinOp, Box<B>, Box<B>),
}

impl B {
    pub fn eval(&self, v: u32) -> bool {
        match self {
            B::Atom(i) => v >> i & 1 == 1,
            B::Const(b) => *b,
            B::Not(x) => !x.eval(v),
            B::Bin(op, l, r) => {
                let (a, b) = (l.eval(v), r.eval(v));
                match op {
                    BinOp::And => a && b,
                    BinOp::Or => a || b,
                    BinOp::Xor => a != b,
                    BinOp::Implies => !a || b,
                    BinOp::RevImplies => a || !b,
                    BinOp::Iff => a == b,
                    _ => unreachable!(),
                }
            }
        }
    }

    pub fn source(&self) -> String {
        match self {
            B::Atom(i) => format!("b[{}]", i + 1),
            B::Const(b) => b.to_string(),
            B::Not(x) => format!("not ({})", x.source()),
            B::Bin(op, l, r) => format!("({}) {} ({})", l.source(), op.symbol(), r.source()),
        }
    }
}

pub fn bexpr() -> impl Strategy<Value = B> {
    let leaf = prop_oneof![8 => (0usize..6).prop_map(B::Atom), 1 => any::<bool>().prop_map(B::Const)];
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| B::Not(Box::new(x))),
            (
                prop::sample::select(vec![BinOp::And, BinOp::Or, BinOp::Xor, BinOp::Implies, BinOp::RevImplies, BinOp::Iff]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, l, r)| B::Bin(op, Box::new(l), Box::new(r))),
        ]
    })
}

fn valuation(v: u32) -> scomma_core::flat::Solution {
    let mut s = scomma_core::flat::Solution::default();
    s.values.insert("b".into(), (0..6).map(|i| Value::Bool(v >> i & 1 == 1)).collect());
    s
}

/// One `if` statement: condition, then-branch and optional else-branch.
#[derive(Debug, Clone)]
pub struct Conditional {
    pub cond: B,
    pub then: B,
    pub otherwise: Option<B>,
}

pub fn conditional_case() -> impl Strategy<Value = Conditional> {
    (bexpr(), bexpr(), prop::option::of(bexpr())).prop_map(|(cond, then, otherwise)| Conditional {
        cond,
        then,
        otherwise,
    })
}

impl Conditional {
    pub fn source(&self) -> String {
        let head = format!("if ({}) {{ {}; }}", self.cond.source(), self.then.source());
        match &self.otherwise {
            Some(c) => format!("{head} else {{ {}; }}", c.source()),
            None => head,
        }
    }

    /// Branch semantics against both the flattened model and the
    /// `(a -> b) and (a or c)` formula, under all 64 valuations.
    pub fn check(&self) -> Result<(), String> {
        let body = self.source();
        let fm = super::try_compile(&format!("class M {{ bool b[6]; constraint k {{ {body} }} }}"), "")?;
        for v in 0..64u32 {
            let (a, b) = (self.cond.eval(v), self.then.eval(v));
            let c = self.otherwise.as_ref().is_none_or(|c| c.eval(v));
            let expected = if a { b } else { c };
            let got = scomma_core::check_solution(&fm, &valuation(v))
                .map_err(|e| e.to_string())?
                .is_satisfied();
            let formula = (!a || b) && (a || c);
            if got != expected || formula != expected {
                return Err(format!("{body} at {v:06b}: flattened {got}, formula {formula}, expected {expected}"));
            }
        }
        Ok(())
    }
}
