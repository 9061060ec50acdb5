use scomma_core::analyzer::{analyze, bind_data, AttrTy, Slot, Ty};
use scomma_core::syntax::{parse_data, parse_model};
use scomma_core::value::Value;
use scomma_core::{DataFile, Diagnostics};

fn corpus(rel: &str) -> String {
    let path = format!("{}/../../corpus/{rel}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn run(model: &str, data: &str) -> Result<scomma_core::analyzer::TypedModel, Diagnostics> {
    let m = parse_model(model, "m.scm").expect("model parses");
    let d = parse_data(data, "m.dat").expect("data parses");
    analyze(&m, &d)
}

fn first_error(r: Result<scomma_core::analyzer::TypedModel, Diagnostics>) -> String {
    match r {
        Ok(_) => panic!("expected a rejection"),
        Err(d) => d.errors().next().expect("at least one error").message.clone(),
    }
}

#[test]
fn stable_marriage_types() {
    let tm = run(
        &corpus("stable/StableMarriage.scm"),
        &corpus("stable/StableMarriage.dat"),
    )
    .unwrap();
    let man = tm.class("Man").unwrap();
    let wife = man.attr("wife").unwrap();
    assert_eq!(wife.ty, AttrTy::Enum("womenList".into()));
    assert!(wife.dims.is_empty());
    let rank = man.attr("rank").unwrap();
    assert_eq!(rank.ty, AttrTy::Int);
    assert_eq!(rank.shape(), vec![5]);
    assert_eq!(rank.full_ty(), Ty::array(Ty::Int, 1));
    assert_eq!(tm.enums["menList"].len(), 5);
    assert!(tm.warnings.is_empty(), "{:?}", tm.warnings);
}

#[test]
fn stable_marriage_binding_follows_keys() {
    let m = parse_model(&corpus("stable/StableMarriage.scm"), "s.scm").unwrap();
    let d = parse_data(&corpus("stable/StableMarriage.dat"), "s.dat").unwrap();
    let tm = analyze(&m, &d).unwrap();
    let (root, _) = bind_data(&tm, &d).unwrap();
    let Some(Slot::Objects(men)) = root.slot(&tm, "man") else { panic!() };
    // John ranks Wanda first.
    let Some(Slot::Values(rank)) = men[2].slot(&tm, "rank") else { panic!() };
    let got: Vec<i64> = rank.iter().map(|v| v.clone().unwrap().as_int().unwrap()).collect();
    assert_eq!(got, vec![5, 3, 2, 4, 1]);
    let Some(Slot::Values(wife)) = men[2].slot(&tm, "wife") else { panic!() };
    assert_eq!(wife, &vec![None]);
}

#[test]
fn analysis_is_idempotent() {
    let m = parse_model(&corpus("stable/StableMarriage.scm"), "s.scm").unwrap();
    let d = parse_data(&corpus("stable/StableMarriage.dat"), "s.dat").unwrap();
    let tm = analyze(&m, &d).unwrap();
    let again = analyze(&tm.to_model(), &d).unwrap();
    assert_eq!(tm, again);
}

#[test]
fn object_literal_arity() {
    let model = "class P { Q q; } class Q { int a in [1,3]; int b in [1,3]; }";
    let msg = first_error(run(model, "Q P.q := {1, 2, 3};"));
    assert!(msg.contains("3 elements") && msg.contains("2 attributes"), "{msg}");
    let tm = run(model, "Q P.q := {1};").unwrap();
    assert_eq!(tm.warnings.len(), 1);
    assert!(tm.warnings[0].message.contains("`b`"));
}

#[test]
fn unknown_type_and_enum_as_value() {
    let msg = first_error(run("class A { Foo x; }", ""));
    assert!(msg.contains("unknown type `Foo`"), "{msg}");
    let msg = first_error(run(
        "class A { int x in [1,3]; constraint c { x = E; } }",
        "enum E := {a, b};",
    ));
    assert!(msg.contains("enum `E` used as a value"), "{msg}");
}

#[test]
fn enum_literals_and_ints_mix() {
    let tm = run(
        "class A { E x; int y in [0,9]; constraint c { y = x + 1; x <> b; } }",
        "enum E := {a, b, c};",
    );
    assert!(tm.is_ok(), "{:?}", tm.err());
}

#[test]
fn constraint_must_be_boolean() {
    let msg = first_error(run("class A { int x in [1,3]; constraint c { x + 1; } }", ""));
    assert!(msg.contains("must be boolean"), "{msg}");
}

#[test]
fn objectives() {
    let msg = first_error(run(
        "class A { int x in [1,3]; constraint c { [minimize] x; [maximize] x; } }",
        "",
    ));
    assert!(msg.contains("more than one objective"), "{msg}");
    // One objective per instance of an arrayed component is still several.
    let msg = first_error(run(
        "class A { B b[2]; } class B { int x in [1,3]; constraint c { [minimize] x; } }",
        "",
    ));
    assert!(msg.contains("more than one objective"), "{msg}");
    let msg = first_error(run(
        "class A { int x[2] in [1,3]; constraint c { forall(i in 1..2) { [minimize] x[i]; } } }",
        "",
    ));
    assert!(msg.contains("inside a loop"), "{msg}");
}

#[test]
fn globals_check_arguments() {
    let msg = first_error(run(
        "class A { int x in [1,3]; constraint c { alldifferent(x); } }",
        "",
    ));
    assert!(msg.contains("alldifferent"), "{msg}");
    assert!(run("class A { int x[3] in [1,3]; constraint c { alldifferent(x); } }", "").is_ok());
}

#[test]
fn loop_range_must_be_constant() {
    let msg = first_error(run(
        "class A { int n in [1,3]; int x[3] in [1,3]; constraint c { forall(i in 1..n) x[i] > 1; } }",
        "",
    ));
    assert!(msg.contains("must not depend on attributes"), "{msg}");
    let tm = run(
        "class A { int x[3] in [1,3]; constraint c { forall(i in 3..1) x[i] > 1; } }",
        "",
    )
    .unwrap();
    assert!(tm.warnings[0].message.contains("empty loop range"));
}

#[test]
fn domains() {
    let msg = first_error(run("class A { int x in [3,1]; }", ""));
    assert!(msg.contains("empty domain"), "{msg}");
    let msg = first_error(run("class A { int x; }", ""));
    assert!(msg.contains("has no domain"), "{msg}");
    // Fully given, so no domain needed.
    assert!(run("class A { int x; }", "int A.x := 4;").is_ok());
    let msg = first_error(run("class A { int x in [1,3]; }", "int A.x := 7;"));
    assert!(msg.contains("outside the domain"), "{msg}");
    let tm = run("class A { int x in [1, n]; }", "int n := 4;").unwrap();
    assert_eq!(tm.main().attributes[0].domain, Some(scomma_core::Domain::IntRange(1, 4)));
}

#[test]
fn composition_cycle() {
    let msg = first_error(run("class A { B b; } class B { A a; }", ""));
    assert!(msg.contains("composition cycle: A -> B -> A"), "{msg}");
}

#[test]
fn data_paths() {
    let model = "class A { B b; int x in [1,3]; } class B { int y in [1,3]; }";
    assert!(run(model, "int A.b.y := 2;").is_ok());
    let msg = first_error(run(model, "int A.b.z := 2;"));
    assert!(msg.contains("no attribute `z`"), "{msg}");
    let msg = first_error(run(model, "int A.x := 1; int A.x := 2;"));
    assert!(msg.contains("assigned twice"), "{msg}");
    let msg = first_error(run(model, "real A.x := 1.5;"));
    assert!(msg.contains("declares type `real`"), "{msg}");
    let msg = first_error(run(model, "int Z.x := 1;"));
    assert!(msg.contains("main class"), "{msg}");
}

#[test]
fn constants_resolve() {
    let tm = run(
        "class A { int x[n] in [0, 9]; constraint c { forall(i in 1..n) x[i] = w[i]; } }",
        "int n := 3; int w := [4, 5, 6];",
    )
    .unwrap();
    assert_eq!(tm.constants["w"].values[2], Value::Int(6));
    assert_eq!(tm.main().attributes[0].shape(), vec![3]);
}

#[test]
fn rejection_order_is_stable() {
    let model = "class A { Foo f; int x in [1,3]; constraint c { x + 1; y = 2; } }";
    let a = run(model, "").unwrap_err();
    let b = run(model, "").unwrap_err();
    let msgs = |d: &Diagnostics| d.iter().map(|x| x.message.clone()).collect::<Vec<_>>();
    assert_eq!(msgs(&a), msgs(&b));
    assert_eq!(a.errors().count(), 3);
}

#[test]
fn empty_data_file_is_fine() {
    let m = parse_model("class A { int x in [1,3]; }", "a.scm").unwrap();
    assert!(analyze(&m, &DataFile::default()).is_ok());
}
