//! Embedded finite-domain solver: propagation, depth-first search and
//! branch-and-bound over a [`FlatModel`].

mod compile;
mod domain;
mod props;
mod search;

use std::time::Duration;

use thiserror::Error;

use crate::ast::ObjectiveKind;
use crate::flat::{FlatModel, Solution};

pub use search::{optimize, solve, solve_all, Event, Limit, Optimum, Search};

use domain::Store;
use props::Prop;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarOrder {
    InputOrder,
    #[default]
    FirstFail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueOrder {
    #[default]
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchConfig {
    pub var_order: VarOrder,
    pub value_order: ValueOrder,
    pub solution_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Reserved; the built-in strategies are deterministic.
    pub seed: Option<u64>,
}

impl SearchConfig {
    /// Parses `first_fail`, `input_order`, optionally followed by `,min` or `,max`.
    pub fn with_strategy(mut self, s: &str) -> Option<Self> {
        for part in s.split(',').map(str::trim) {
            match part {
                "first_fail" => self.var_order = VarOrder::FirstFail,
                "input_order" => self.var_order = VarOrder::InputOrder,
                "min" => self.value_order = ValueOrder::Min,
                "max" => self.value_order = ValueOrder::Max,
                _ => return None,
            }
        }
        Some(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: u64,
    pub failures: u64,
    pub propagations: u64,
    pub wall_time: Duration,
}

/// Constructs the embedded solver cannot handle.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported by the embedded solver: {}", .0.join(", "))]
pub struct Unsupported(pub Vec<String>);

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Unsupported(#[from] Unsupported),
    #[error("model has no objective")]
    NoObjective,
    /// A solution failed the independent check. Always a solver bug.
    #[error("internal error: solver produced an invalid solution ({0})")]
    Unsound(String),
}

/// A compiled model ready for search.
#[derive(Debug, Clone)]
pub struct Space {
    fm: FlatModel,
    store: Store,
    props: Vec<Prop>,
    watch: Vec<Vec<usize>>,
    /// Solver variables of the flat variables, in declaration order.
    decision: Vec<usize>,
    objective: Option<usize>,
    infeasible: bool,
    /// The space before the objective was compiled. Plain search uses this,
    /// so an objective never restricts which solutions exist.
    sat_store: Store,
    sat_props: usize,
    sat_infeasible: bool,
}

pub fn build_space(fm: &FlatModel) -> Result<Space, Unsupported> {
    let mut c = compile::Compiler::new(fm);
    let decision = c.declare();
    for con in &fm.constraints {
        let _ = c.post(&con.expr, true);
    }
    let (sat_store, sat_props, sat_infeasible) = (c.store.clone(), c.props.len(), c.infeasible);
    let objective = match &fm.objective {
        Some(o) => c.objective(&o.expr, o.kind == ObjectiveKind::Maximize).ok(),
        None => None,
    };
    let c = c.finish()?;
    let mut watch = vec![Vec::new(); c.store.doms.len()];
    for (i, p) in c.props.iter().enumerate() {
        let mut vs = p.vars();
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            watch[v].push(i);
        }
    }
    Ok(Space {
        fm: fm.clone(),
        store: c.store,
        props: c.props,
        watch,
        decision,
        objective,
        infeasible: c.infeasible,
        sat_store,
        sat_props,
        sat_infeasible,
    })
}

impl Space {
    pub fn model(&self) -> &FlatModel {
        &self.fm
    }

    /// Number of scalar decision variables.
    pub fn var_count(&self) -> usize {
        self.decision.len()
    }

    /// One group per flat constraint.
    pub fn group_count(&self) -> usize {
        self.fm.constraints.len()
    }

    pub fn propagator_count(&self) -> usize {
        self.props.len()
    }

    /// Current values of a decision variable element, as `(lo, hi)` bounds.
    pub fn bounds(&self, name: &str) -> Option<Vec<(i64, i64)>> {
        let mut at = 0;
        for v in &self.fm.variables {
            if v.name == name {
                return Some(
                    self.decision[at..at + v.len()]
                        .iter()
                        .map(|&x| (self.store.lo(x), self.store.hi(x)))
                        .collect(),
                );
            }
            at += v.len();
        }
        None
    }

    pub fn domain_values(&self, name: &str) -> Option<Vec<Vec<i64>>> {
        let mut at = 0;
        for v in &self.fm.variables {
            if v.name == name {
                return Some(
                    self.decision[at..at + v.len()]
                        .iter()
                        .map(|&x| self.store.doms[x].values().collect())
                        .collect(),
                );
            }
            at += v.len();
        }
        None
    }

    pub fn has_objective(&self) -> bool {
        self.objective.is_some()
    }

    fn solution(&self, s: &Store) -> Solution {
        use crate::flat::BaseType;
        use crate::value::Value;
        let mut sol = Solution::default();
        let mut at = 0;
        for v in &self.fm.variables {
            let vals = self.decision[at..at + v.len()]
                .iter()
                .map(|&x| {
                    let k = s.lo(x);
                    if v.base == BaseType::Bool {
                        Value::Bool(k != 0)
                    } else {
                        Value::Int(k)
                    }
                })
                .collect();
            sol.values.insert(v.name.clone(), vals);
            at += v.len();
        }
        sol.objective = crate::eval::objective_value(&self.fm, &sol).and_then(Result::ok);
        sol
    }
}
