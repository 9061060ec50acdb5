mod common;

use std::collections::BTreeSet;

use common::boolexpr::conditional_case;
use proptest::prelude::*;
use scomma_core::ast::{EraseSpans, ExprKind, Item};
use scomma_core::backend::flat_text;
use scomma_core::flat::{BaseType, Domain, FlatConstraint, FlatExpr, FlatModel, FlatTable, FlatVar, Objective};
use scomma_core::solver::{build_space, optimize, solve_all, SearchConfig};
use scomma_core::syntax::{parse_data, parse_descriptor, parse_flat, parse_model, parse_solution, print_expr, render_solution};
use scomma_core::{BinOp, UnOp, Value};

// ---------------------------------------------------------------- totality

const PIECES: &[&str] = &[
    "class", "A", "{", "}", "int", "x", "in", "[", "]", "1", "..", ",", ";", "constraint", "c", "forall",
    "(", ")", "if", "else", "->", "<->", "=", "<>", "-", "*", "/", ":=", "_", "enum", "\"", "import",
    "template", "?", ":", "foreach", "backend", "%", "//", "/*", "\n", " ", "é", "9999999999999999999999",
    "1.5e", "set of", "real", "bool", ".",
];

fn soup() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::collection::vec(prop::sample::select(PIECES), 0..40).prop_map(|v| v.join(" ")),
        prop::collection::vec(prop::sample::select(PIECES), 0..40).prop_map(|v| v.concat()),
        ".{0,80}",
    ]
}

proptest! {
    #[test]
    fn parsers_never_panic(text in soup()) {
        let fm = FlatModel::default();
        for d in [
            parse_model(&text, "p.scm").err(),
            parse_data(&text, "p.dat").err(),
            parse_flat(&text, "p.flat").err(),
            parse_descriptor(&text, "p.bd").err(),
            parse_solution(&text, "p.sol", &fm).err(),
        ].into_iter().flatten() {
            prop_assert!(!d.0.is_empty());
            prop_assert!(d.0.iter().all(|x| x.span.line >= 1 && x.span.column >= 1));
        }
    }
}

// ------------------------------------------------------ source expressions

fn src_expr() -> impl Strategy<Value = ExprKind> {
    let leaf = prop_oneof![
        (0i64..50).prop_map(ExprKind::Int),
        prop::sample::select(vec!["x", "y", "n"]).prop_map(|s| ExprKind::Name(s.into())),
        any::<bool>().prop_map(ExprKind::Bool),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let e = inner.clone().prop_map(|k| scomma_core::ast::Expr::new(k, scomma_core::SourceSpan::synthetic()));
        prop_oneof![
            (prop::sample::select(BinOp::ALL.to_vec()), e.clone(), e.clone())
                .prop_map(|(op, l, r)| ExprKind::Binary(op, Box::new(l), Box::new(r))),
            (prop::sample::select(vec![UnOp::Not, UnOp::Neg, UnOp::Card]), e.clone())
                .prop_filter("negated literal folds", |(op, x)| {
                    !(*op == UnOp::Neg && matches!(x.kind, ExprKind::Int(_) | ExprKind::Real(_)))
                })
                .prop_map(|(op, x)| ExprKind::Unary(op, Box::new(x))),
            (e.clone(), prop::collection::vec(e.clone(), 1..3))
                .prop_map(|(b, ix)| ExprKind::Index(Box::new(b), ix)),
            prop::collection::vec(e.clone(), 0..3).prop_map(ExprKind::SetLit),
            prop::collection::vec(e, 1..3).prop_map(|a| ExprKind::Call("f".into(), a)),
        ]
    })
}

proptest! {
    #[test]
    fn printed_expressions_parse_back(kind in src_expr()) {
        let mut e = scomma_core::ast::Expr::new(kind, scomma_core::SourceSpan::synthetic());
        let text = print_expr(&e);
        let m = parse_model(&format!("class A {{ constraint c {{ {text}; }} }}"), "p.scm")
            .map_err(|d| TestCaseError::fail(format!("{text}: {d}")))?;
        let Item::Constraint(mut back) = m.classes[0].zones[0].items[0].clone() else {
            return Err(TestCaseError::fail(format!("{text}: not a constraint")));
        };
        back.erase_spans();
        e.erase_spans();
        prop_assert_eq!(back, e, "{}", text);
    }
}

// ------------------------------------------------------- conditional removal

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// `if a { b } else { c }` flattens to `(a -> b) and (a or c)`; both must
    /// agree with the branch semantics under all 64 valuations.
    #[test]
    fn conditional_removal_preserves_meaning(case in conditional_case()) {
        case.check().map_err(TestCaseError::fail)?;
    }
}

// ----------------------------------------------- flat models, solver, text

/// Constant subscripts must be in bounds in a flat model.
fn in_bounds(i: FlatExpr, n: i64) -> FlatExpr {
    match i {
        FlatExpr::Lit(Value::Int(v)) => FlatExpr::int(v.rem_euclid(n) + 1),
        i => i,
    }
}

fn int_expr() -> impl Strategy<Value = FlatExpr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(FlatExpr::int),
        (1i64..=3).prop_map(|k| FlatExpr::elem("x", vec![FlatExpr::int(k)])),
        Just(FlatExpr::var("y")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| FlatExpr::bin(op, l, r)),
            inner.clone().prop_map(|x| match x {
                FlatExpr::Lit(Value::Int(v)) => FlatExpr::int(-v),
                x => FlatExpr::Unary(UnOp::Neg, Box::new(x)),
            }),
            inner.clone().prop_map(|i| FlatExpr::elem("x", vec![in_bounds(i, 3)])),
            inner.prop_map(|i| FlatExpr::elem("t", vec![in_bounds(i, 4)])),
        ]
    })
}

fn bool_expr() -> impl Strategy<Value = FlatExpr> {
    let cmp = (
        prop::sample::select(vec![BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne]),
        int_expr(),
        int_expr(),
    )
        .prop_map(|(op, l, r)| FlatExpr::bin(op, l, r));
    let member = (int_expr(), prop::collection::btree_set(-2i64..=3, 0..4))
        .prop_map(|(x, s)| FlatExpr::bin(BinOp::In, x, FlatExpr::Lit(Value::Set(s))));
    let leaf = prop_oneof![
        4 => cmp,
        1 => member,
        1 => Just(FlatExpr::var("b")),
        1 => Just(FlatExpr::Call("alldifferent".into(), vec![FlatExpr::var("x")])),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(FlatExpr::not),
            (prop::sample::select(vec![BinOp::And, BinOp::Or, BinOp::Xor, BinOp::Implies]), inner.clone(), inner)
                .prop_map(|(op, l, r)| FlatExpr::bin(op, l, r)),
        ]
    })
}

fn random_model() -> impl Strategy<Value = FlatModel> {
    (prop::collection::vec(bool_expr(), 1..4), prop::option::of(int_expr()), any::<bool>()).prop_map(
        |(cs, obj, maximize)| FlatModel {
            name: "R".into(),
            variables: vec![
                FlatVar {
                    name: "x".into(),
                    base: BaseType::Int,
                    shape: vec![3],
                    domain: Domain::IntRange(-2, 3),
                    enum_tag: None,
                },
                FlatVar {
                    name: "y".into(),
                    base: BaseType::Int,
                    shape: vec![],
                    domain: Domain::IntSet(vec![0, 2, 5]),
                    enum_tag: None,
                },
                FlatVar {
                    name: "b".into(),
                    base: BaseType::Bool,
                    shape: vec![],
                    domain: Domain::IntRange(0, 1),
                    enum_tag: None,
                },
            ],
            tables: vec![FlatTable {
                name: "t".into(),
                base: BaseType::Int,
                shape: vec![4],
                values: [3, -1, 0, 2].into_iter().map(Value::Int).collect(),
            }],
            constraints: cs.into_iter().map(|expr| FlatConstraint { expr }).collect(),
            enum_types: Default::default(),
            objective: obj.map(|expr| Objective {
                kind: if maximize {
                    scomma_core::ast::ObjectiveKind::Maximize
                } else {
                    scomma_core::ast::ObjectiveKind::Minimize
                },
                expr,
            }),
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_finds_exactly_the_brute_force_solutions(fm in random_model()) {
        let expected = common::brute::enumerate(&fm);
        let space = build_space(&fm).unwrap();
        let (got, truncated, stats) = solve_all(&space, &SearchConfig::default()).unwrap();
        prop_assert!(!truncated);
        prop_assert!(stats.failures <= stats.nodes);
        let got_keys = common::brute::keys(&got);
        prop_assert_eq!(got_keys.len(), got.len(), "duplicate solutions");
        let want = common::brute::keys(&expected);
        let missing: Vec<_> = want.difference(&got_keys).take(2).collect();
        let extra: Vec<_> = got_keys.difference(&want).take(2).collect();
        prop_assert!(
            missing.is_empty() && extra.is_empty(),
            "{}missing {:?}\nextra {:?}",
            flat_text(&fm),
            missing,
            extra
        );
        if fm.objective.is_some() {
            let o = optimize(&space, &SearchConfig::default()).unwrap();
            prop_assert!(o.proven);
            let values: BTreeSet<Value> = expected
                .iter()
                .filter_map(|s| scomma_core::eval::objective_value(&fm, s).unwrap().ok())
                .collect();
            let maximize = fm.objective.as_ref().unwrap().kind == scomma_core::ast::ObjectiveKind::Maximize;
            let best = if maximize { values.last() } else { values.first() };
            prop_assert_eq!(o.best.and_then(|s| s.objective), best.cloned(), "{}", flat_text(&fm));
        }
    }

    #[test]
    fn flat_text_round_trips(fm in random_model()) {
        let text = flat_text(&fm);
        let back = parse_flat(&text, "R.flat").map_err(|d| TestCaseError::fail(format!("{text}\n{d}")))?;
        prop_assert_eq!(back.variables, fm.variables.clone());
        prop_assert_eq!(back.objective, fm.objective.clone());
        prop_assert_eq!(&back.constraints, &fm.constraints, "{}", text);
    }
}

#[test]
fn rendered_solutions_parse_back_and_check() {
    let fm = common::stable();
    let space = build_space(&fm).unwrap();
    let (sols, ..) = solve_all(&space, &SearchConfig::default()).unwrap();
    for s in sols {
        let text = render_solution(&fm, &s);
        assert!(text.contains("man_wife = ["), "{text}");
        let back = parse_solution(&text, "s.sol", &fm).unwrap();
        assert_eq!(back.values, s.values);
        assert!(scomma_core::check_solution(&fm, &back).unwrap().is_satisfied());
    }
}
