mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use common::oracles::{queens_oracle, send_oracle, stable_oracle};
use common::{compile, corpus_file, stable};
use scomma_core::flat::Solution;
use scomma_core::solver::{
    build_space, optimize, solve, solve_all, Event, SearchConfig, ValueOrder, VarOrder,
};
use scomma_core::{check_solution, Value};

fn ints(s: &Solution, name: &str) -> Vec<i64> {
    s.values[name].iter().map(|v| v.as_int().unwrap()).collect()
}

fn all(fm: &scomma_core::FlatModel) -> Vec<Solution> {
    let space = build_space(fm).unwrap();
    let (sols, truncated, _) = solve_all(&space, &SearchConfig::default()).unwrap();
    assert!(!truncated);
    for s in &sols {
        assert!(check_solution(fm, s).unwrap().is_satisfied());
    }
    sols
}

#[test]
fn send_more_money_has_one_solution() {
    let oracle = send_oracle();
    assert_eq!(oracle, vec![[9, 5, 6, 7, 1, 0, 8, 2]]);
    let sols = all(&corpus_file("send", "Send"));
    assert_eq!(sols.len(), 1);
    let got: Vec<i64> = ["S", "E", "N", "D", "M", "O", "R", "Y"]
        .iter()
        .map(|n| ints(&sols[0], n)[0])
        .collect();
    assert_eq!(got, oracle[0]);
}

#[test]
fn ten_queens_has_724_solutions() {
    let oracle = queens_oracle(10);
    assert_eq!(oracle.len(), 724);
    let sols = all(&corpus_file("queens-10", "Queens"));
    let got: BTreeSet<Vec<i64>> = sols.iter().map(|s| ints(s, "q")).collect();
    assert_eq!(got.len(), sols.len(), "duplicate solutions");
    assert_eq!(got, oracle);
}

#[test]
fn stable_marriage_solutions_are_exactly_the_stable_matchings() {
    let fm = stable();
    let oracle = stable_oracle(&fm);
    assert!(!oracle.is_empty());
    let sols = all(&fm);
    let got: BTreeSet<Vec<i64>> = sols.iter().map(|s| ints(s, "man_wife")).collect();
    assert_eq!(got, oracle);
    for s in &sols {
        let wife = ints(s, "man_wife");
        let husband = ints(s, "woman_husband");
        for (m, &w) in wife.iter().enumerate() {
            assert_eq!(husband[w as usize - 1], m as i64 + 1);
        }
    }
}

#[test]
fn stable_marriage_space_shape() {
    let space = build_space(&stable()).unwrap();
    assert_eq!(space.var_count(), 10);
    assert_eq!(space.group_count(), 60);
}

#[test]
fn single_variable_space_keeps_its_domain() {
    let space = build_space(&compile("class A { int x in [1,3]; }", "")).unwrap();
    assert_eq!(space.domain_values("x"), Some(vec![vec![1, 2, 3]]));
    assert_eq!(all(&compile("class A { int x in [1,3]; }", "")).len(), 3);
}

#[test]
fn golfers_is_unsupported() {
    let err = build_space(&corpus_file("golfers", "Golfers")).unwrap_err();
    assert!(err.0.iter().any(|c| c == "set-of-int decision variables"), "{err}");
}

#[test]
fn real_variables_and_cumulatives_are_unsupported() {
    let err = build_space(&compile("class A { real x in [0.0, 1.0]; }", "")).unwrap_err();
    assert!(err.to_string().contains("real decision variables"), "{err}");
    let fm = compile(
        "class A { int s[2] in [0,5]; constraint c { cumulatives(s, d, h, 2); } }",
        "int d := [2, 3]; int h := [1, 2];",
    );
    let err = build_space(&fm).unwrap_err();
    assert_eq!(err.0, ["`cumulatives`"]);
}

#[test]
fn minimize_single_variable() {
    let fm = compile("class A { int x in [3,7]; constraint c { [minimize] x; } }", "");
    let o = optimize(&build_space(&fm).unwrap(), &SearchConfig::default()).unwrap();
    assert!(o.proven);
    assert_eq!(ints(o.best.as_ref().unwrap(), "x"), [3]);
    assert_eq!(o.best.unwrap().objective, Some(Value::Int(3)));
}

#[test]
fn minimize_forced_sum() {
    let fm = compile(
        "class A { int x in [1,3]; int y in [1,3]; constraint c { x + y > 3; [minimize] x + y; } }",
        "",
    );
    let o = optimize(&build_space(&fm).unwrap(), &SearchConfig::default()).unwrap();
    assert_eq!(o.best.unwrap().objective, Some(Value::Int(4)));
}

#[test]
fn maximize_matches_exhaustive_search() {
    let fm = compile(
        "class A { int x in [0,9]; int y in [0,9]; constraint c { 3*x + 5*y <= 31; x - y <> 2; [maximize] 2*x + 3*y; } }",
        "",
    );
    let best = common::brute::enumerate(&fm)
        .iter()
        .map(|s| scomma_core::eval::objective_value(&fm, s).unwrap().unwrap().as_int().unwrap())
        .max()
        .unwrap();
    let o = optimize(&build_space(&fm).unwrap(), &SearchConfig::default()).unwrap();
    assert_eq!(o.best.unwrap().objective, Some(Value::Int(best)));
}

#[test]
fn production_optimum_matches_exhaustive_search() {
    let fm = corpus_file("production", "Production");
    let best = common::brute::enumerate(&fm)
        .iter()
        .map(|s| scomma_core::eval::objective_value(&fm, s).unwrap().unwrap())
        .max()
        .unwrap();
    let o = optimize(&build_space(&fm).unwrap(), &SearchConfig::default()).unwrap();
    assert!(o.proven);
    assert_eq!(o.best.unwrap().objective, Some(best));
}

#[test]
fn infeasible_model_has_no_solution() {
    let fm = compile("class A { int x in [1,1]; constraint c { x > 1; } }", "");
    assert!(all(&fm).is_empty());
    let fm = compile("class A { int x in [1,1]; constraint c { x > 1; [minimize] x; } }", "");
    let o = optimize(&build_space(&fm).unwrap(), &SearchConfig::default()).unwrap();
    assert!(o.best.is_none() && o.proven);
}

#[test]
fn solution_limit_truncates() {
    let space = build_space(&corpus_file("queens-10", "Queens")).unwrap();
    let cfg = SearchConfig {
        solution_limit: Some(5),
        ..Default::default()
    };
    let events: Vec<Event> = solve(&space, &cfg).map(Result::unwrap).collect();
    assert_eq!(events.len(), 6);
    assert!(matches!(events.last(), Some(Event::Truncated(_))));
    // exactly as many solutions as the limit: no marker
    let fm = compile("class A { int x in [1,3]; }", "");
    let cfg = SearchConfig {
        solution_limit: Some(3),
        ..Default::default()
    };
    let (sols, truncated, _) = solve_all(&build_space(&fm).unwrap(), &cfg).unwrap();
    assert_eq!((sols.len(), truncated), (3, false));
}

#[test]
fn time_limit_truncates() {
    let space = build_space(&corpus_file("queens-10", "Queens")).unwrap();
    let cfg = SearchConfig {
        time_limit: Some(Duration::ZERO),
        ..Default::default()
    };
    let (sols, truncated, _) = solve_all(&space, &cfg).unwrap();
    assert!(sols.is_empty() && truncated);
}

#[test]
fn search_is_deterministic() {
    let space = build_space(&stable()).unwrap();
    let run = || {
        let (sols, _, st) = solve_all(&space, &SearchConfig::default()).unwrap();
        (sols, st.nodes, st.failures, st.propagations)
    };
    assert_eq!(run(), run());
}

#[test]
fn strategies_agree_on_the_solution_set() {
    let fm = compile(
        "class A { int q[6] in [1,6]; constraint c { forall(i in 1..6) forall(j in i+1..6) { q[i] <> q[j]; q[i] + i <> q[j] + j; q[i] - i <> q[j] - j; } } }",
        "",
    );
    let space = build_space(&fm).unwrap();
    let mut sets = Vec::new();
    for var_order in [VarOrder::FirstFail, VarOrder::InputOrder] {
        for value_order in [ValueOrder::Min, ValueOrder::Max] {
            let cfg = SearchConfig {
                var_order,
                value_order,
                ..Default::default()
            };
            let (sols, _, st) = solve_all(&space, &cfg).unwrap();
            assert!(st.failures <= st.nodes);
            sets.push(common::brute::keys(&sols));
        }
    }
    assert_eq!(sets[0].len(), 4);
    assert!(sets.iter().all(|s| *s == sets[0]));
}

#[test]
fn sudoku_and_packing_solve() {
    let sols = all(&corpus_file("sudoku", "Sudoku"));
    assert_eq!(sols.len(), 1);
    assert_eq!(&ints(&sols[0], "cell")[..9], [5, 3, 4, 6, 7, 8, 9, 1, 2]);
    let fm = corpus_file("packing", "Packing");
    let space = build_space(&fm).unwrap();
    let cfg = SearchConfig {
        solution_limit: Some(1),
        ..Default::default()
    };
    let (sols, ..) = solve_all(&space, &cfg).unwrap();
    assert_eq!(sols.len(), 1);
}

#[test]
fn element_with_variable_index_and_division() {
    let fm = compile(
        "class A { int i in [0,4]; int y in [-5,20]; int z in [-3,3]; constraint c { y = cost[i] / z; } }",
        "int cost := [4, 9, 12];",
    );
    let expected = common::brute::keys(&common::brute::enumerate(&fm));
    assert_eq!(common::brute::keys(&all(&fm)), expected);
    assert!(!expected.is_empty());
}

#[test]
fn objective_does_not_restrict_satisfaction() {
    // x[x[1]] is undefined for x[1] > 3; that only matters when optimizing.
    let fm = compile("class A { int x[3] in [1,5]; constraint c { [minimize] x[x[1]]; } }", "");
    assert_eq!(all(&fm).len(), 125);
    let o = optimize(&build_space(&fm).unwrap(), &SearchConfig::default()).unwrap();
    let best = o.best.unwrap();
    assert!(ints(&best, "x")[0] <= 3);
    assert_eq!(best.objective, Some(Value::Int(1)));
}
