//! Exhaustive enumeration of a FlatModel through the evaluator.

use std::collections::BTreeSet;

use scomma_core::flat::{BaseType, Domain, FlatModel, Solution};
use scomma_core::{check_solution, Value};

/// Candidate values of one scalar element of `base` over `domain`.
pub fn cell_values(base: BaseType, domain: &Domain) -> Vec<Value> {
    match base {
        BaseType::Bool => [false, true]
            .into_iter()
            .filter(|b| domain.contains_int(*b as i64))
            .map(Value::Bool)
            .collect(),
        BaseType::SetOfInt => subsets(&domain.int_values().expect("finite universe")),
        BaseType::Int => domain.int_values().expect("integer domain").into_iter().map(Value::Int).collect(),
        BaseType::Real => panic!("real variables cannot be enumerated"),
    }
}

pub fn subsets(universe: &[i64]) -> Vec<Value> {
    (0u64..1 << universe.len())
        .map(|mask| {
            Value::Set(
                universe
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| *v)
                    .collect::<BTreeSet<i64>>(),
            )
        })
        .collect()
}

/// Size of the assignment space, saturating.
pub fn candidates(fm: &FlatModel) -> u128 {
    let mut n: u128 = 1;
    for v in &fm.variables {
        if v.base == BaseType::Real {
            return u128::MAX;
        }
        let per: u128 = match v.base {
            BaseType::SetOfInt => 1u128.checked_shl(v.domain.int_width().unwrap_or(0) as u32).unwrap_or(u128::MAX),
            BaseType::Bool => 2,
            _ => v.domain.int_width().unwrap_or(0),
        };
        for _ in 0..v.len() {
            n = n.saturating_mul(per);
        }
    }
    n
}

/// Every satisfying assignment, in odometer order (last element fastest).
pub fn enumerate(fm: &FlatModel) -> Vec<Solution> {
    let cells: Vec<(usize, Vec<Value>)> = fm
        .variables
        .iter()
        .enumerate()
        .flat_map(|(i, v)| {
            let vals = cell_values(v.base, &v.domain);
            (0..v.len()).map(move |_| (i, vals.clone()))
        })
        .collect();
    if cells.iter().any(|(_, vs)| vs.is_empty()) {
        return Vec::new();
    }
    let mut pos = vec![0usize; cells.len()];
    let mut out = Vec::new();
    loop {
        let mut sol = Solution::default();
        for v in &fm.variables {
            sol.values.insert(v.name.clone(), Vec::with_capacity(v.len()));
        }
        for ((vi, vals), &p) in cells.iter().zip(&pos) {
            sol.values[*vi].push(vals[p].clone());
        }
        if check_solution(fm, &sol).expect("well-formed candidate").is_satisfied() {
            out.push(sol);
        }
        let mut k = cells.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < cells[k].1.len() {
                break;
            }
            pos[k] = 0;
        }
    }
}

/// Solutions as sorted `(name, values)` lists, for set comparison.
pub fn keys(sols: &[Solution]) -> BTreeSet<Vec<(String, Vec<Value>)>> {
    sols.iter().map(Solution::key).collect()
}
