//! Depth-first search with binary branching `x = v` / `x <> v`.

use std::collections::VecDeque;
use std::time::Instant;

use crate::eval::check_solution;
use crate::flat::Solution;

use super::domain::{Fail, Store};
use super::{SearchConfig, SolveError, SolveStats, Space, ValueOrder, VarOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Solutions,
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Solution(Solution),
    /// The search stopped before exhausting the space.
    Truncated(Limit),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Start,
    Running,
    Done,
}

/// A running search; iterate it for solutions.
pub struct Search<'a> {
    space: &'a Space,
    store: Store,
    cfg: SearchConfig,
    stats: SolveStats,
    /// `(var, value, on the second branch)`
    stack: Vec<(usize, i64, bool)>,
    state: State,
    start: Instant,
    found: usize,
    last: Option<Vec<i64>>,
    /// Best objective value so far, for branch-and-bound.
    bound: Option<i64>,
    optimizing: bool,
    /// Propagators `0..active` take part; the rest belong to the objective.
    active: usize,
    infeasible: bool,
    /// Decision variables first, then auxiliaries.
    order: Vec<usize>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

pub fn solve<'a>(space: &'a Space, cfg: &SearchConfig) -> Search<'a> {
    Search::new(space, cfg, false)
}

/// Every solution, or as many as the limits allow.
pub fn solve_all(space: &Space, cfg: &SearchConfig) -> Result<(Vec<Solution>, bool, SolveStats), SolveError> {
    let mut search = solve(space, cfg);
    let mut out = Vec::new();
    let mut truncated = false;
    for ev in search.by_ref() {
        match ev? {
            Event::Solution(s) => out.push(s),
            Event::Truncated(_) => truncated = true,
        }
    }
    Ok((out, truncated, search.stats()))
}

#[derive(Debug, Clone)]
pub struct Optimum {
    /// `None` when the model has no solution.
    pub best: Option<Solution>,
    /// The search ran to exhaustion, so `best` is optimal.
    pub proven: bool,
    pub stats: SolveStats,
}

/// Branch-and-bound: each incumbent tightens the objective for the rest of the search.
pub fn optimize(space: &Space, cfg: &SearchConfig) -> Result<Optimum, SolveError> {
    if space.objective.is_none() {
        return Err(SolveError::NoObjective);
    }
    let mut search = Search::new(space, cfg, true);
    let mut best = None;
    let mut proven = true;
    for ev in search.by_ref() {
        match ev? {
            Event::Solution(s) => best = Some(s),
            Event::Truncated(_) => proven = false,
        }
    }
    Ok(Optimum { best, proven, stats: search.stats() })
}

impl<'a> Search<'a> {
    fn new(space: &'a Space, cfg: &SearchConfig, optimizing: bool) -> Self {
        let (store, active, infeasible) = if optimizing {
            (space.store.clone(), space.props.len(), space.infeasible)
        } else {
            (space.sat_store.clone(), space.sat_props, space.sat_infeasible)
        };
        let n = store.doms.len();
        let mut is_decision = vec![false; n];
        space.decision.iter().for_each(|&v| is_decision[v] = true);
        let order = space
            .decision
            .iter()
            .copied()
            .chain((0..n).filter(|&v| !is_decision[v]))
            .collect();
        Search {
            space,
            store,
            active,
            infeasible,
            cfg: cfg.clone(),
            stats: SolveStats::default(),
            stack: Vec::new(),
            state: State::Start,
            start: Instant::now(),
            found: 0,
            last: None,
            bound: None,
            optimizing,
            order,
            queue: VecDeque::new(),
            queued: vec![false; space.props.len()],
        }
    }

    pub fn stats(&self) -> SolveStats {
        let mut s = self.stats.clone();
        s.wall_time = self.start.elapsed();
        s
    }

    fn enqueue_changed(&mut self) {
        for v in std::mem::take(&mut self.store.changed) {
            for &p in &self.space.watch[v] {
                if p < self.active && !self.queued[p] {
                    self.queued[p] = true;
                    self.queue.push_back(p);
                }
            }
        }
    }

    fn clear_queue(&mut self) {
        for p in self.queue.drain(..) {
            self.queued[p] = false;
        }
        self.store.changed.clear();
    }

    /// Runs propagators until nothing changes.
    fn propagate(&mut self) -> Result<(), Fail> {
        if let (true, Some(o), Some(b)) = (self.optimizing, self.space.objective, self.bound) {
            if let Err(f) = self.store.set_hi(o, b - 1) {
                self.clear_queue();
                return Err(f);
            }
        }
        self.enqueue_changed();
        while let Some(p) = self.queue.pop_front() {
            self.queued[p] = false;
            self.stats.propagations += 1;
            if let Err(f) = self.space.props[p].propagate(&mut self.store) {
                self.clear_queue();
                return Err(f);
            }
            self.enqueue_changed();
        }
        Ok(())
    }

    fn root(&mut self) -> Result<(), Fail> {
        if self.infeasible {
            return Err(Fail);
        }
        for p in 0..self.active {
            self.queued[p] = true;
            self.queue.push_back(p);
        }
        self.propagate()
    }

    fn select(&self) -> Option<usize> {
        let unfixed = |v: &&usize| !self.store.doms[**v].is_fixed();
        let nd = self.space.decision.len();
        let pick = |vars: &[usize]| match self.cfg.var_order {
            VarOrder::InputOrder => vars.iter().find(unfixed).copied(),
            VarOrder::FirstFail => vars
                .iter()
                .filter(unfixed)
                .min_by_key(|&&v| self.store.doms[v].size())
                .copied(),
        };
        pick(&self.order[..nd]).or_else(|| pick(&self.order[nd..]))
    }

    /// Moves to the next open branch. `false` once the tree is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some((var, val, second)) = self.stack.pop() {
            self.store.pop_level();
            if !second {
                self.store.push_level();
                self.stack.push((var, val, true));
                self.stats.nodes += 1;
                if self.store.remove(var, val).is_ok() && self.propagate().is_ok() {
                    return true;
                }
                self.stats.failures += 1;
            }
        }
        false
    }

    fn timed_out(&self) -> bool {
        self.cfg.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn finish(&mut self, ev: Option<Event>) -> Option<Result<Event, SolveError>> {
        self.state = State::Done;
        ev.map(Ok)
    }

    fn emit(&mut self) -> Result<Solution, SolveError> {
        let sol = self.space.solution(&self.store);
        match check_solution(&self.space.fm, &sol) {
            Ok(r) if r.is_satisfied() => Ok(sol),
            Ok(r) => Err(SolveError::Unsound(
                r.violations.into_iter().map(|v| v.text).collect::<Vec<_>>().join("; "),
            )),
            Err(e) => Err(SolveError::Unsound(e.to_string())),
        }
    }
}

impl Iterator for Search<'_> {
    type Item = Result<Event, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.state {
            State::Done => return None,
            State::Start => {
                self.state = State::Running;
                self.stats.nodes += 1;
                if self.root().is_err() {
                    self.stats.failures += 1;
                    return self.finish(None);
                }
            }
            State::Running => {
                if !self.backtrack() {
                    return self.finish(None);
                }
            }
        }
        loop {
            if self.timed_out() {
                return self.finish(Some(Event::Truncated(Limit::Time)));
            }
            let Some(var) = self.select() else {
                let key: Vec<i64> = self.space.decision.iter().map(|&v| self.store.lo(v)).collect();
                if self.last.as_ref() == Some(&key) {
                    if !self.backtrack() {
                        return self.finish(None);
                    }
                    continue;
                }
                if self.cfg.solution_limit.is_some_and(|n| self.found >= n) {
                    return self.finish(Some(Event::Truncated(Limit::Solutions)));
                }
                self.last = Some(key);
                let sol = match self.emit() {
                    Ok(s) => s,
                    Err(e) => {
                        self.state = State::Done;
                        return Some(Err(e));
                    }
                };
                self.found += 1;
                if let (true, Some(o)) = (self.optimizing, self.space.objective) {
                    self.bound = Some(self.store.lo(o));
                }
                return Some(Ok(Event::Solution(sol)));
            };
            let d = &self.store.doms[var];
            let val = match self.cfg.value_order {
                ValueOrder::Min => d.lo(),
                ValueOrder::Max => d.hi(),
            };
            self.store.push_level();
            self.stack.push((var, val, false));
            self.stats.nodes += 1;
            let ok = self.store.assign(var, val).is_ok() && self.propagate().is_ok();
            if !ok {
                self.stats.failures += 1;
                if !self.backtrack() {
                    return self.finish(None);
                }
            }
        }
    }
}
