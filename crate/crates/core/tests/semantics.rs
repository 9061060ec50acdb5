mod common;

use common::brute::{enumerate, keys};
use common::{corpus_compiled, same_solutions, try_compile, CORPUS, SET_GRID};
use scomma_core::backend::RuleSpec;
use scomma_core::{compile_source, Source};

const LIMIT: u128 = 1_000_000;

fn compiled(model: &str, data: &str) -> scomma_core::Compiled {
    compile_source(&Source::new("M.scm", model), &[Source::new("M.dat", data)]).unwrap_or_else(|d| panic!("{d}"))
}

#[test]
fn corpus_models_flatten_without_changing_solutions() {
    let mut checked = Vec::new();
    for (dir, name) in CORPUS {
        let c = corpus_compiled(dir, name);
        if let Some(n) = same_solutions(&c, LIMIT) {
            checked.push((*dir, n));
        }
    }
    let dirs: Vec<&str> = checked.iter().map(|c| c.0).collect();
    assert_eq!(dirs, ["production", "ineq20", "golfers"]);
    assert!(checked.iter().all(|c| c.1 > 0), "{checked:?}");
}

#[test]
fn reduced_queens_and_stable_marriage_agree() {
    let c = compiled(&common::corpus("queens-10/Queens.scm").replace("import Queens.dat;", ""), "int n := 6;");
    assert_eq!(same_solutions(&c, LIMIT), Some(4));
    let model = common::corpus("stable/StableMarriage.scm").replace("import StableMarriage.dat;", "");
    let data = "enum menList := {A, B, C};\nenum womenList := {X, Y, Z};\n\
        Man StableMarriage.man := [A: {[X:1, Y:2, Z:3], _}, B: {[X:2, Y:1, Z:3], _}, C: {[X:1, Y:3, Z:2], _}];\n\
        Woman StableMarriage.woman := [X: {[A:2, B:1, C:3], _}, Y: {[A:1, B:3, C:2], _}, Z: {[A:3, B:2, C:1], _}];";
    let c = compile_source(&Source::new("StableMarriage.scm", model), &[Source::new("S.dat", data)]).unwrap();
    assert!(same_solutions(&c, LIMIT).unwrap() >= 1);
}

#[test]
fn composition_enums_and_conditionals_agree() {
    let cases = [
        (
            "class M { P p[2]; int k in [1,2]; constraint c { p[k].v > 1; forall(i in 1..2) if (p[i].v = 2) { p[i].w[1] < p[i].w[2]; } else { p[i].w[1] = p[i].v; } } }
             class P { int v in [1,3]; int w[2] in [0,2]; }",
            "",
        ),
        (
            "class M { Color c[3]; bool b; constraint k { c[1] <> c[2]; b -> c[3] = red; b xor c[2] = green; } }",
            "enum Color := {red, green, blue};",
        ),
        (
            "class M { int x[3] in [0,4]; constraint k { alldifferent(x); x[1] / 2 = x[2] - 1; x[t[x[3] + 1]] <> 0; } }",
            "int t := [3, 1, 2, 1, 2];",
        ),
        (
            "class M { Q q; int y in [0,3]; constraint k { q.a + y = 4 <-> q.a < y; } } class Q { int a in [0,3]; constraint z { a <> 1; } }",
            "",
        ),
    ];
    for (model, data) in cases {
        let c = compiled(model, data);
        assert!(same_solutions(&c, LIMIT).unwrap() > 0, "{model}");
    }
}

#[test]
fn partially_given_arrays_agree() {
    let c = compiled(
        "class M { int g[2,2] in [1,3]; constraint c { forall(i in 1..2) g[i,1] <> g[i,2]; g[1,1] + g[2,2] = 4; } }",
        "int M.g := [[_, 2], [_, _]];",
    );
    assert!(same_solutions(&c, LIMIT).unwrap() > 0);
}

#[test]
fn decompose_set_matrix_preserves_solutions() {
    let fm = try_compile(SET_GRID, "").unwrap();
    assert!(common::brute::candidates(&fm) <= 10_000);
    let n = common::rule_preserves(&fm, RuleSpec::new("decompose_set_matrix"), &common::set_matrix_cell).unwrap();
    assert!(n > 0);
}

#[test]
fn split_matrix_preserves_solutions() {
    let fm = try_compile(
        "class A { int m[2,3] in [0,2]; int k in [1,3]; constraint c { m[1,k] = 2; m[2,1] + m[2,3] < m[1,2]; } }",
        "",
    )
    .unwrap();
    common::rule_preserves(&fm, RuleSpec::new("split_matrix_to_arrays"), &|n, ix| match ix {
        [i, j] => (format!("{n}_{i}"), vec![*j]),
        _ => (n.to_string(), ix.to_vec()),
    })
    .unwrap();
}

#[test]
fn int_bounds_widen_preserves_solutions() {
    let fm = try_compile("class A { int x[2] in {1,3,4}; constraint c { x[1] < x[2]; } }", "").unwrap();
    let n = common::rule_preserves(&fm, RuleSpec::new("int_bounds_widen"), &|n, ix| (n.to_string(), ix.to_vec()));
    assert_eq!(n, Ok(3));
}

#[test]
fn int_bounds_widen_keeps_set_universes() {
    let fm = try_compile(
        "class A { set of int s[2] in {1,3,4}; set of int t in {2,3}; constraint c { cardinality(s[1]) = 2; s[2] subset s[1]; 3 in t; } }",
        "",
    )
    .unwrap();
    let n = common::rule_preserves(&fm, RuleSpec::new("int_bounds_widen"), &|n, ix| (n.to_string(), ix.to_vec()));
    // s[1] has 3 two-element subsets, each with 4 subsets for s[2]; t is {3} or {2,3}
    assert_eq!(n, Ok(24));
}

#[test]
fn rename_reserved_words_preserves_solutions() {
    let fm = try_compile("class A { int var in [0,2]; int y in [0,2]; constraint c { var < y; } }", "").unwrap();
    let mut rule = RuleSpec::new("rename_reserved_words");
    rule.params.insert("words".into(), "var".into());
    let n = common::rule_preserves(&fm, rule, &|n, ix| {
        (if n == "var" { "v_var".into() } else { n.to_string() }, ix.to_vec())
    });
    assert_eq!(n, Ok(3));
}

#[test]
fn set_grid_is_enumerable_but_not_solvable() {
    let fm = try_compile(SET_GRID, "").unwrap();
    let sols = enumerate(&fm);
    assert!(keys(&sols).len() == sols.len());
    assert!(scomma_core::solver::build_space(&fm).is_err());
}
