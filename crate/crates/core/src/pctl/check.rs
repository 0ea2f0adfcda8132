//! Model checking of state formulas and numeric path-probability solvers.

use std::cell::Cell;
use std::collections::VecDeque;

use num_traits::Float;

use super::ast::{PathFormula, StateFormula};
use super::{Labeling, PctlError, StateSet};
use crate::dtmc::Dtmc;
use crate::scalar::Scalar;

/// Stop iterating once no value changes by this much in a sweep.
pub const REACH_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;

thread_local! {
    static SOLVES: Cell<u64> = const { Cell::new(0) };
}

/// Path-probability solves performed on the current thread.
pub fn solver_invocations() -> u64 {
    SOLVES.with(Cell::get)
}

fn note_solve() {
    SOLVES.with(|c| c.set(c.get() + 1));
}

fn mask(n: usize, set: &StateSet) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in set {
        if i < n {
            m[i] = true;
        }
    }
    m
}

/// Probability of eventually reaching `target` from each state.
///
/// Target states and states that reach the target almost surely get exactly
/// 1; states with no path to the target get exactly 0. The rest are solved by Gauss–Seidel sweeps until the largest
/// change drops below [`REACH_TOLERANCE`].
pub fn reach_probability<T: Scalar + Float>(
    dtmc: &Dtmc<T>,
    target: &StateSet,
) -> Result<Vec<T>, PctlError> {
    let n = dtmc.len();
    let all = vec![true; n];
    until_unbounded(dtmc, &all, &mask(n, target))
}

fn until_unbounded<T: Scalar + Float>(
    dtmc: &Dtmc<T>,
    left: &[bool],
    right: &[bool],
) -> Result<Vec<T>, PctlError> {
    note_solve();
    let n = dtmc.len();
    // backward search from `right` through `left` states
    let pre = dtmc.predecessors();
    let mut can_reach = right.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| right[i]).collect();
    while let Some(q) = queue.pop_front() {
        for &p in &pre[q] {
            if !can_reach[p] && left[p] {
                can_reach[p] = true;
                queue.push_back(p);
            }
        }
    }

    // states that can slip into the zero region before hitting `right`;
    // every other state reaches `right` almost surely
    let mut can_fail: Vec<bool> = can_reach.iter().map(|c| !c).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| can_fail[i]).collect();
    while let Some(q) = queue.pop_front() {
        for &p in &pre[q] {
            if !can_fail[p] && left[p] && !right[p] {
                can_fail[p] = true;
                queue.push_back(p);
            }
        }
    }

    let mut x: Vec<T> = (0..n)
        .map(|i| {
            if can_reach[i] && !can_fail[i] {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    let unknown: Vec<usize> = (0..n).filter(|&i| can_reach[i] && can_fail[i]).collect();
    if unknown.is_empty() {
        return Ok(x);
    }
    let tol = T::from(REACH_TOLERANCE).unwrap();
    let mut residual = T::infinity();
    let mut previous = T::infinity();
    for _ in 0..MAX_ITERATIONS {
        residual = T::zero();
        for &s in &unknown {
            let mut self_loop = T::zero();
            let mut acc = T::zero();
            for (q, p) in dtmc.row(s) {
                if *q == s {
                    self_loop = *p;
                } else {
                    acc = acc + *p * x[*q];
                }
            }
            // a self-loop on a state that can reach the target has mass < 1
            let v = (acc / (T::one() - self_loop)).min(T::one()).max(T::zero());
            residual = residual.max((v - x[s]).abs());
            x[s] = v;
        }
        // on slowly contracting chains a small step can still be far from
        // the fixpoint, so also bound the remaining geometric tail
        let rate = residual / previous;
        if residual < tol && (rate >= T::one() || residual * rate / (T::one() - rate) < tol) {
            return Ok(x);
        }
        previous = residual;
    }
    Err(PctlError::ConvergenceFailure {
        iterations: MAX_ITERATIONS,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// Probability of reaching `right` within `k` steps through `left` states.
pub fn bounded_until_probability<T: Scalar>(
    dtmc: &Dtmc<T>,
    left: &StateSet,
    right: &StateSet,
    k: u64,
) -> Vec<T> {
    note_solve();
    let n = dtmc.len();
    bounded(dtmc, &mask(n, left), &mask(n, right), k)
}

fn bounded<T: Scalar>(dtmc: &Dtmc<T>, left: &[bool], right: &[bool], k: u64) -> Vec<T> {
    let n = dtmc.len();
    let mut x: Vec<T> = (0..n)
        .map(|i| if right[i] { T::one() } else { T::zero() })
        .collect();
    for _ in 0..k {
        let next: Vec<T> = (0..n)
            .map(|s| {
                if right[s] {
                    T::one()
                } else if !left[s] {
                    T::zero()
                } else {
                    dtmc.row(s)
                        .iter()
                        .fold(T::zero(), |acc, (q, p)| acc + p.clone() * x[*q].clone())
                }
            })
            .collect();
        x = next;
    }
    x
}

/// One-step probability of landing in `target`.
pub fn next_probability<T: Scalar>(dtmc: &Dtmc<T>, target: &StateSet) -> Vec<T> {
    note_solve();
    let m = mask(dtmc.len(), target);
    (0..dtmc.len())
        .map(|s| {
            dtmc.row(s)
                .iter()
                .filter(|(q, _)| m[*q])
                .fold(T::zero(), |acc, (_, p)| acc + p.clone())
        })
        .collect()
}

/// Probability of `path` holding from every state.
pub fn path_probability<T: Scalar + Float>(
    dtmc: &Dtmc<T>,
    labeling: &Labeling,
    path: &PathFormula,
) -> Result<Vec<T>, PctlError> {
    let n = dtmc.len();
    match path {
        PathFormula::Next(f) => {
            let target = sat_states(dtmc, labeling, f)?;
            Ok(next_probability(dtmc, &target))
        }
        PathFormula::Eventually(f) => {
            let target = sat_states(dtmc, labeling, f)?;
            reach_probability(dtmc, &target)
        }
        PathFormula::Globally(f) => {
            // G f holds with probability 1 - P(F !f)
            let sat = sat_states(dtmc, labeling, f)?;
            let bad: StateSet = (0..n).filter(|i| !sat.contains(i)).collect();
            Ok(reach_probability(dtmc, &bad)?
                .into_iter()
                .map(|p| T::one() - p)
                .collect())
        }
        PathFormula::Until { left, right, bound } => {
            let l = sat_states(dtmc, labeling, left)?;
            let r = sat_states(dtmc, labeling, right)?;
            match bound {
                Some(k) => Ok(bounded_until_probability(dtmc, &l, &r, *k)),
                None => until_unbounded(dtmc, &mask(n, &l), &mask(n, &r)),
            }
        }
    }
}

/// States satisfying `formula`. Probability thresholds are compared exactly.
pub fn sat_states<T: Scalar + Float>(
    dtmc: &Dtmc<T>,
    labeling: &Labeling,
    formula: &StateFormula,
) -> Result<StateSet, PctlError> {
    let n = dtmc.len();
    Ok(match formula {
        StateFormula::True => (0..n).collect(),
        StateFormula::Atom(a) => labeling
            .get(a)
            .ok_or_else(|| PctlError::UnknownAtom(a.clone()))?
            .iter()
            .copied()
            .filter(|&i| i < n)
            .collect(),
        StateFormula::Not(f) => {
            let inner = sat_states(dtmc, labeling, f)?;
            (0..n).filter(|i| !inner.contains(i)).collect()
        }
        StateFormula::And(a, b) => {
            let l = sat_states(dtmc, labeling, a)?;
            let r = sat_states(dtmc, labeling, b)?;
            l.intersection(&r).copied().collect()
        }
        StateFormula::Prob { bound, theta, path } => {
            let theta = T::from(*theta).unwrap();
            path_probability(dtmc, labeling, path)?
                .into_iter()
                .enumerate()
                .filter(|(_, p)| bound.holds(p, &theta))
                .map(|(i, _)| i)
                .collect()
        }
    })
}
