//! Reference evaluation of flat expressions.
//!
//! This evaluator is deliberately independent of the solver: the solver checks
//! every solution it emits against [`check_solution`].
//!
//! Evaluation is strict. Every operand is evaluated, so an out-of-bounds
//! subscript anywhere inside a constraint makes that constraint fail, even
//! under a false antecedent.

use std::collections::BTreeSet;

use crate::ast::{BinOp, UnOp};
use crate::flat::{linear_offset, FlatExpr, FlatModel, Solution, Symbol};
use crate::value::Value;

/// Absolute tolerance for real comparisons.
pub const REAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("index {value} out of bounds for `{name}`")]
    IndexError { name: String, value: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("inexact integer division {0} / {1}")]
    InexactDivision(i64, i64),
    #[error("integer overflow")]
    Overflow,
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("type error: {0}")]
    Type(String),
}

/// Where evaluation finds variable and table contents.
pub trait Env {
    /// Shape and row-major values of a named variable or table.
    fn lookup(&self, name: &str) -> Option<(&[usize], &[Value])>;
}

/// Values of a solution, plus the constant tables of its model.
pub struct SolutionEnv<'a> {
    pub model: &'a FlatModel,
    pub solution: &'a Solution,
}

impl Env for SolutionEnv<'_> {
    fn lookup(&self, name: &str) -> Option<(&[usize], &[Value])> {
        match self.model.symbol(name)? {
            Symbol::Var(v) => self.solution.get(name).map(|vals| (v.shape.as_slice(), vals)),
            Symbol::Table(t) => Some((t.shape.as_slice(), t.values.as_slice())),
        }
    }
}

fn type_err(msg: impl Into<String>) -> EvalError {
    EvalError::Type(msg.into())
}

pub fn eval_expr(e: &FlatExpr, env: &dyn Env) -> Result<Value, EvalError> {
    match e {
        FlatExpr::Lit(v) => Ok(v.clone()),
        FlatExpr::Ref { name, index } => {
            let (shape, values) = env.lookup(name).ok_or_else(|| EvalError::Unbound(name.clone()))?;
            if index.is_empty() {
                if shape.is_empty() {
                    return Ok(values[0].clone());
                }
                return Err(type_err(format!("array `{name}` used as a scalar")));
            }
            let idx = index
                .iter()
                .map(|i| {
                    eval_expr(i, env)?
                        .as_int()
                        .ok_or_else(|| type_err(format!("non-integer subscript of `{name}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            match linear_offset(shape, &idx) {
                Some(off) => Ok(values[off].clone()),
                None => Err(EvalError::IndexError {
                    name: name.clone(),
                    value: idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
                }),
            }
        }
        FlatExpr::Unary(op, inner) => apply_unary(*op, eval_expr(inner, env)?),
        FlatExpr::Binary(op, l, r) => {
            let a = eval_expr(l, env)?;
            let b = eval_expr(r, env)?;
            apply_binary(*op, a, b)
        }
        FlatExpr::SetLit(es) => {
            let mut set = BTreeSet::new();
            for x in es {
                set.insert(
                    eval_expr(x, env)?
                        .as_int()
                        .ok_or_else(|| type_err("set literal element is not an integer"))?,
                );
            }
            Ok(Value::Set(set))
        }
        FlatExpr::ArrayLit(_) => Err(type_err("array literal used as a scalar")),
        FlatExpr::Call(name, args) => eval_call(name, args, env),
    }
}

/// Evaluates an array-valued argument: a whole variable or an array literal.
pub fn eval_list(e: &FlatExpr, env: &dyn Env) -> Result<Vec<Value>, EvalError> {
    match e {
        FlatExpr::ArrayLit(es) => es.iter().map(|x| eval_expr(x, env)).collect(),
        FlatExpr::Ref { name, index } if index.is_empty() => {
            let (_, values) = env.lookup(name).ok_or_else(|| EvalError::Unbound(name.clone()))?;
            Ok(values.to_vec())
        }
        other => Ok(vec![eval_expr(other, env)?]),
    }
}

fn eval_call(name: &str, args: &[FlatExpr], env: &dyn Env) -> Result<Value, EvalError> {
    match name {
        "alldifferent" => {
            let [arg] = args else {
                return Err(type_err("alldifferent takes one array"));
            };
            let vals = eval_list(arg, env)?;
            let mut seen = BTreeSet::new();
            Ok(Value::Bool(vals.into_iter().all(|v| seen.insert(v))))
        }
        "cumulatives" => {
            let [s, d, h, cap] = args else {
                return Err(type_err("cumulatives takes starts, durations, heights and a capacity"));
            };
            let ints = |e: &FlatExpr| -> Result<Vec<i64>, EvalError> {
                eval_list(e, env)?
                    .into_iter()
                    .map(|v| v.as_int().ok_or_else(|| type_err("cumulatives expects integers")))
                    .collect()
            };
            let (s, d, h) = (ints(s)?, ints(d)?, ints(h)?);
            let cap = eval_expr(cap, env)?
                .as_int()
                .ok_or_else(|| type_err("cumulatives capacity must be an integer"))?;
            if s.len() != d.len() || s.len() != h.len() {
                return Err(type_err("cumulatives arrays differ in length"));
            }
            let ok = s.iter().all(|&t| {
                let load: i64 = (0..s.len())
                    .filter(|&k| s[k] <= t && t < s[k] + d[k])
                    .map(|k| h[k])
                    .sum();
                load <= cap
            });
            Ok(Value::Bool(ok))
        }
        other => Err(type_err(format!("unknown function `{other}`"))),
    }
}

pub fn apply_unary(op: UnOp, v: Value) -> Result<Value, EvalError> {
    match (op, v) {
        (UnOp::Neg, Value::Int(i)) => i.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
        (UnOp::Neg, Value::Real(r)) => Ok(Value::Real(-r)),
        (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (UnOp::Card, Value::Set(s)) => Ok(Value::Int(s.len() as i64)),
        (op, v) => Err(type_err(format!("`{}` applied to {}", op.symbol(), v.kind()))),
    }
}

fn int_arith(op: BinOp, a: i64, b: i64) -> Result<i64, EvalError> {
    match op {
        BinOp::Add => a.checked_add(b).ok_or(EvalError::Overflow),
        BinOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow),
        BinOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow),
        BinOp::Div => {
            if b == 0 {
                Err(EvalError::DivisionByZero)
            } else if a % b != 0 {
                Err(EvalError::InexactDivision(a, b))
            } else {
                Ok(a / b)
            }
        }
        _ => unreachable!("not arithmetic"),
    }
}

fn real_cmp(op: BinOp, a: f64, b: f64) -> bool {
    match op {
        BinOp::Lt => a < b - REAL_TOLERANCE,
        BinOp::Gt => a > b + REAL_TOLERANCE,
        BinOp::Le => a <= b + REAL_TOLERANCE,
        BinOp::Ge => a >= b - REAL_TOLERANCE,
        BinOp::Eq => (a - b).abs() <= REAL_TOLERANCE,
        BinOp::Ne => (a - b).abs() > REAL_TOLERANCE,
        _ => unreachable!("not a comparison"),
    }
}

pub fn apply_binary(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    use Value::*;
    let mismatch = |a: &Value, b: &Value| {
        type_err(format!("`{}` applied to {} and {}", op.symbol(), a.kind(), b.kind()))
    };
    if op.is_arithmetic() {
        return match (&a, &b) {
            (Int(x), Int(y)) => int_arith(op, *x, *y).map(Int),
            (Int(_) | Real(_), Int(_) | Real(_)) => {
                let (x, y) = (a.as_real().unwrap(), b.as_real().unwrap());
                match op {
                    BinOp::Add => Ok(Real(x + y)),
                    BinOp::Sub => Ok(Real(x - y)),
                    BinOp::Mul => Ok(Real(x * y)),
                    _ if y == 0.0 => Err(EvalError::DivisionByZero),
                    _ => Ok(Real(x / y)),
                }
            }
            _ => Err(mismatch(&a, &b)),
        };
    }
    if op.is_comparison() {
        return match (&a, &b) {
            (Int(x), Int(y)) => Ok(Bool(match op {
                BinOp::Lt => x < y,
                BinOp::Gt => x > y,
                BinOp::Le => x <= y,
                BinOp::Ge => x >= y,
                BinOp::Eq => x == y,
                _ => x != y,
            })),
            (Int(_) | Real(_), Int(_) | Real(_)) => {
                Ok(Bool(real_cmp(op, a.as_real().unwrap(), b.as_real().unwrap())))
            }
            (Bool(x), Bool(y)) if matches!(op, BinOp::Eq | BinOp::Ne) => {
                Ok(Bool((x == y) == (op == BinOp::Eq)))
            }
            (Set(x), Set(y)) if matches!(op, BinOp::Eq | BinOp::Ne) => {
                Ok(Bool((x == y) == (op == BinOp::Eq)))
            }
            _ => Err(mismatch(&a, &b)),
        };
    }
    match (op, &a, &b) {
        (BinOp::And, Bool(x), Bool(y)) => Ok(Bool(*x && *y)),
        (BinOp::Or, Bool(x), Bool(y)) => Ok(Bool(*x || *y)),
        (BinOp::Xor, Bool(x), Bool(y)) => Ok(Bool(x != y)),
        (BinOp::Implies, Bool(x), Bool(y)) => Ok(Bool(!*x || *y)),
        (BinOp::RevImplies, Bool(x), Bool(y)) => Ok(Bool(*x || !*y)),
        (BinOp::Iff, Bool(x), Bool(y)) => Ok(Bool(x == y)),
        (BinOp::In, Int(x), Set(s)) => Ok(Bool(s.contains(x))),
        (BinOp::Subset, Set(x), Set(y)) => Ok(Bool(x.is_subset(y))),
        (BinOp::Superset, Set(x), Set(y)) => Ok(Bool(x.is_superset(y))),
        (BinOp::Union, Set(x), Set(y)) => Ok(Set(x.union(y).copied().collect())),
        (BinOp::Diff, Set(x), Set(y)) => Ok(Set(x.difference(y).copied().collect())),
        (BinOp::SymDiff, Set(x), Set(y)) => Ok(Set(x.symmetric_difference(y).copied().collect())),
        (BinOp::Intersection, Set(x), Set(y)) => Ok(Set(x.intersection(y).copied().collect())),
        _ => Err(mismatch(&a, &b)),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContractError {
    #[error("solution assigns no value to `{0}`")]
    Missing(String),
    #[error("solution gives `{name}` {got} values, expected {expected}")]
    WrongLength {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("solution names unknown variable `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Index into `FlatModel::constraints`.
    Constraint(usize),
    /// A value outside its variable's domain.
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

fn in_domain(v: &Value, domain: &crate::flat::Domain) -> bool {
    use crate::flat::Domain;
    match (v, domain) {
        (Value::Int(i), d) => d.contains_int(*i),
        (Value::Bool(b), d) => d.contains_int(*b as i64),
        (Value::Real(r), Domain::RealRange(lo, hi)) => {
            *lo - REAL_TOLERANCE <= *r && *r <= *hi + REAL_TOLERANCE
        }
        (Value::Set(s), d) => s.iter().all(|x| d.contains_int(*x)),
        _ => false,
    }
}

/// Checks a total assignment against every constraint of `m`.
pub fn check_solution(m: &FlatModel, s: &Solution) -> Result<CheckReport, ContractError> {
    for name in s.values.keys() {
        if m.var(name).is_none() {
            return Err(ContractError::Unknown(name.clone()));
        }
    }
    let mut violations = Vec::new();
    for var in &m.variables {
        let vals = s.get(&var.name).ok_or_else(|| ContractError::Missing(var.name.clone()))?;
        if vals.len() != var.len() {
            return Err(ContractError::WrongLength {
                name: var.name.clone(),
                expected: var.len(),
                got: vals.len(),
            });
        }
        for (k, v) in vals.iter().enumerate() {
            if !in_domain(v, &var.domain) {
                let at = if var.shape.is_empty() {
                    var.name.clone()
                } else {
                    let idx = crate::flat::unravel(&var.shape, k);
                    let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                    format!("{}[{}]", var.name, idx.join(","))
                };
                violations.push(Violation {
                    kind: ViolationKind::Domain(var.name.clone()),
                    text: format!("{at} = {v} outside domain {}", var.domain),
                });
            }
        }
    }
    let env = SolutionEnv { model: m, solution: s };
    for (i, c) in m.constraints.iter().enumerate() {
        let text = match eval_expr(&c.expr, &env) {
            Ok(Value::Bool(true)) => continue,
            Ok(Value::Bool(false)) => c.expr.to_string(),
            Ok(other) => format!("{} (evaluates to non-boolean {other})", c.expr),
            Err(e) => format!("{} ({e})", c.expr),
        };
        violations.push(Violation {
            kind: ViolationKind::Constraint(i),
            text,
        });
    }
    Ok(CheckReport { violations })
}

/// Value of the model's objective under `s`, if it has one.
pub fn objective_value(m: &FlatModel, s: &Solution) -> Option<Result<Value, EvalError>> {
    let obj = m.objective.as_ref()?;
    Some(eval_expr(&obj.expr, &SolutionEnv { model: m, solution: s }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::{BaseType, Domain, FlatConstraint, FlatVar};

    struct MapEnv(Vec<(String, Vec<usize>, Vec<Value>)>);

    impl Env for MapEnv {
        fn lookup(&self, name: &str) -> Option<(&[usize], &[Value])> {
            self.0
                .iter()
                .find(|(n, _, _)| n == name)
                .map(|(_, s, v)| (s.as_slice(), v.as_slice()))
        }
    }

    fn b(v: bool) -> FlatExpr {
        FlatExpr::Lit(Value::Bool(v))
    }

    #[test]
    fn true_implies_false_is_false() {
        // 3 < 5 -> 1 = 2
        let e = FlatExpr::bin(
            BinOp::Implies,
            FlatExpr::bin(BinOp::Lt, FlatExpr::int(3), FlatExpr::int(5)),
            FlatExpr::bin(BinOp::Eq, FlatExpr::int(1), FlatExpr::int(2)),
        );
        assert_eq!(eval_expr(&e, &MapEnv(vec![])), Ok(Value::Bool(false)));
    }

    #[test]
    fn nested_subscript_lookup() {
        let mut wife = vec![Value::Int(0); 5];
        wife[0] = Value::Int(2);
        let mut husband = vec![Value::Int(0); 5];
        husband[1] = Value::Int(1);
        let env = MapEnv(vec![
            ("man_wife".into(), vec![5], wife),
            ("woman_husband".into(), vec![5], husband),
        ]);
        let e = FlatExpr::elem("man_wife", vec![FlatExpr::int(1)]);
        assert_eq!(eval_expr(&e, &env), Ok(Value::Int(2)));
        let e = FlatExpr::bin(
            BinOp::Eq,
            FlatExpr::elem("woman_husband", vec![FlatExpr::elem("man_wife", vec![FlatExpr::int(1)])]),
            FlatExpr::int(1),
        );
        assert_eq!(eval_expr(&e, &env), Ok(Value::Bool(true)));
    }

    #[test]
    fn iff_matches_double_implication() {
        for x in [false, true] {
            for y in [false, true] {
                let iff = FlatExpr::bin(BinOp::Iff, b(x), b(y));
                let both = FlatExpr::bin(
                    BinOp::And,
                    FlatExpr::bin(BinOp::Implies, b(x), b(y)),
                    FlatExpr::bin(BinOp::Implies, b(y), b(x)),
                );
                let env = MapEnv(vec![]);
                assert_eq!(eval_expr(&iff, &env), eval_expr(&both, &env));
            }
        }
    }

    #[test]
    fn out_of_bounds_and_division_errors() {
        let env = MapEnv(vec![("a".into(), vec![3], vec![Value::Int(1); 3])]);
        let e = FlatExpr::elem("a", vec![FlatExpr::int(4)]);
        assert_eq!(
            eval_expr(&e, &env),
            Err(EvalError::IndexError {
                name: "a".into(),
                value: "4".into()
            })
        );
        let d = FlatExpr::bin(BinOp::Div, FlatExpr::int(1), FlatExpr::int(0));
        assert_eq!(eval_expr(&d, &env), Err(EvalError::DivisionByZero));
        let d = FlatExpr::bin(BinOp::Div, FlatExpr::int(7), FlatExpr::int(2));
        assert_eq!(eval_expr(&d, &env), Err(EvalError::InexactDivision(7, 2)));
        let d = FlatExpr::bin(BinOp::Div, FlatExpr::int(-8), FlatExpr::int(2));
        assert_eq!(eval_expr(&d, &env), Ok(Value::Int(-4)));
    }

    #[test]
    fn real_comparison_uses_tolerance() {
        let e = FlatExpr::bin(
            BinOp::Eq,
            FlatExpr::Lit(Value::Real(0.1 + 0.2)),
            FlatExpr::Lit(Value::Real(0.3)),
        );
        assert_eq!(eval_expr(&e, &MapEnv(vec![])), Ok(Value::Bool(true)));
    }

    fn xy_model() -> FlatModel {
        let var = |n: &str| FlatVar {
            name: n.into(),
            base: BaseType::Int,
            shape: vec![],
            domain: Domain::IntRange(1, 3),
            enum_tag: None,
        };
        FlatModel {
            name: "xy".into(),
            variables: vec![var("x"), var("y")],
            constraints: vec![FlatConstraint {
                expr: FlatExpr::bin(BinOp::Lt, FlatExpr::var("x"), FlatExpr::var("y")),
            }],
            ..Default::default()
        }
    }

    fn sol(pairs: &[(&str, i64)]) -> Solution {
        Solution {
            values: pairs.iter().map(|(n, v)| (n.to_string(), vec![Value::Int(*v)])).collect(),
            objective: None,
        }
    }

    #[test]
    fn check_reports_violated_constraint() {
        let m = xy_model();
        let report = check_solution(&m, &sol(&[("x", 2), ("y", 1)])).unwrap();
        assert_eq!(
            report.violations,
            vec![Violation {
                kind: ViolationKind::Constraint(0),
                text: "x<y".into()
            }]
        );
        assert!(check_solution(&m, &sol(&[("x", 1), ("y", 2)])).unwrap().is_satisfied());
    }

    #[test]
    fn check_rejects_partial_assignment() {
        let m = xy_model();
        assert_eq!(
            check_solution(&m, &sol(&[("x", 1)])),
            Err(ContractError::Missing("y".into()))
        );
    }

    #[test]
    fn trivial_model_is_satisfied() {
        let m = FlatModel {
            constraints: vec![FlatConstraint { expr: b(true) }],
            ..Default::default()
        };
        let r = check_solution(&m, &Solution::default()).unwrap();
        assert!(r.is_satisfied());
        // Pure: same answer twice.
        assert_eq!(r, check_solution(&m, &Solution::default()).unwrap());
    }

    #[test]
    fn domain_violations_are_reported() {
        let m = xy_model();
        let r = check_solution(&m, &sol(&[("x", 0), ("y", 2)])).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::Domain("x".into()));
    }
}
