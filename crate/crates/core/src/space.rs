//! Constrained bases: enumeration of 2-SAT solution sets and recovery of a
//! clause set from a given set of states.

use std::collections::HashMap;

use crate::bits::Bits;
use crate::constraint::{Clause, ConstraintSet, Pattern};
use crate::error::{Error, Result};

/// Caps for exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_vars: usize,
    /// Stop with a capacity error once this many solutions have been found.
    pub max_states: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_vars: 30,
            max_states: 1 << 26,
        }
    }
}

/// Lexicographically ordered basis of product states plus the reverse map.
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    num_vars: usize,
    states: Vec<Bits>,
    index_of: HashMap<Bits, usize>,
}

impl SolutionSpace {
    /// Builds a space from arbitrary states; sorts and removes duplicates.
    pub fn from_states(num_vars: usize, states: impl IntoIterator<Item = Bits>) -> Result<Self> {
        let mut states: Vec<Bits> = states.into_iter().collect();
        if let Some(bad) = states.iter().find(|s| s.len() != num_vars) {
            return Err(Error::invalid(format!(
                "state {bad} has length {} but the space has {num_vars} variables",
                bad.len()
            )));
        }
        if states.is_empty() {
            return Err(Error::invalid("a solution space needs at least one state"));
        }
        states.sort_unstable();
        states.dedup();
        Ok(Self::from_sorted(num_vars, states))
    }

    fn from_sorted(num_vars: usize, states: Vec<Bits>) -> Self {
        let index_of = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        SolutionSpace {
            num_vars,
            states,
            index_of,
        }
    }

    /// The `n + 1` clock states; index `k` is `0^(n-k) 1^k`.
    pub fn clock(n: usize) -> Self {
        Self::from_sorted(n, (0..=n).map(|k| Bits::clock(n, k)).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Bits] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &Bits {
        &self.states[index]
    }

    pub fn index_of(&self, state: &Bits) -> Option<usize> {
        self.index_of.get(state).copied()
    }

    pub fn contains(&self, state: &Bits) -> bool {
        self.index_of.contains_key(state)
    }
}

impl PartialEq for SolutionSpace {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.states == other.states
    }
}

impl Eq for SolutionSpace {}

/// Literal index `2 * var + value`.
#[inline]
fn lit(var: usize, value: bool) -> usize {
    2 * var + value as usize
}

/// Implication graph: assigning literal `l` forces every literal in `imp[l]`.
fn implications(constraints: &ConstraintSet) -> Vec<Vec<usize>> {
    let mut imp = vec![Vec::new(); 2 * constraints.num_vars()];
    for c in constraints.clauses() {
        let Pattern { first, second } = c.forbidden;
        imp[lit(c.var_i, first)].push(lit(c.var_j, !second));
        imp[lit(c.var_j, second)].push(lit(c.var_i, !first));
    }
    imp
}

struct Search<'a> {
    imp: &'a [Vec<usize>],
    assign: Vec<Option<bool>>,
    trail: Vec<usize>,
}

impl Search<'_> {
    /// Assigns `var = value` and propagates. On conflict the partial
    /// propagation is left on the trail for the caller to undo.
    fn assign_and_propagate(&mut self, var: usize, value: bool) -> bool {
        let start = self.trail.len();
        self.assign[var] = Some(value);
        self.trail.push(var);
        let mut head = start;
        while head < self.trail.len() {
            let v = self.trail[head];
            head += 1;
            let val = self.assign[v].expect("trail holds assigned variables");
            for &forced in &self.imp[lit(v, val)] {
                let (fv, fval) = (forced / 2, forced % 2 == 1);
                match self.assign[fv] {
                    Some(existing) if existing != fval => return false,
                    Some(_) => {}
                    None => {
                        self.assign[fv] = Some(fval);
                        self.trail.push(fv);
                    }
                }
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.assign[v] = None;
        }
    }

    /// Depth-first search in variable order, `0` before `1`, so solutions
    /// arrive in lexicographic order. Returns `false` if the visitor stopped
    /// the search.
    fn run(&mut self, var: usize, visit: &mut dyn FnMut(&[Option<bool>]) -> bool) -> bool {
        let n = self.assign.len();
        let mut var = var;
        while var < n && self.assign[var].is_some() {
            var += 1;
        }
        if var == n {
            return visit(&self.assign);
        }
        for value in [false, true] {
            let mark = self.trail.len();
            if self.assign_and_propagate(var, value) && !self.run(var + 1, visit) {
                self.undo_to(mark);
                return false;
            }
            self.undo_to(mark);
        }
        true
    }
}

/// Streams satisfying assignments in lexicographic order to `visit` until it
/// returns `false`.
///
/// For a satisfiable 2-SAT instance, a conflict-free unit propagation leaves a
/// sub-instance whose clauses are a subset of the original ones on the
/// unassigned variables, so the search never dead-ends below a consistent
/// prefix; the cost is proportional to the number of solutions.
pub fn for_each_solution(constraints: &ConstraintSet, mut visit: impl FnMut(Bits) -> bool) {
    let n = constraints.num_vars();
    let imp = implications(constraints);
    let mut search = Search {
        imp: &imp,
        assign: vec![None; n],
        trail: Vec::with_capacity(n),
    };
    let mut adapter = |assign: &[Option<bool>]| {
        let mut b = Bits::zeros(n);
        for (i, v) in assign.iter().enumerate() {
            b.set(i, v.expect("complete assignment"));
        }
        visit(b)
    };
    search.run(0, &mut adapter);
}

pub fn enumerate_solutions(constraints: &ConstraintSet) -> Result<SolutionSpace> {
    enumerate_solutions_with(constraints, EnumerationLimits::default())
}

pub fn enumerate_solutions_with(constraints: &ConstraintSet, limits: EnumerationLimits) -> Result<SolutionSpace> {
    let n = constraints.num_vars();
    if n > limits.max_vars {
        return Err(Error::Capacity {
            what: "number of variables",
            got: n,
            limit: limits.max_vars,
        });
    }
    let mut states = Vec::new();
    let mut overflow = false;
    for_each_solution(constraints, |s| {
        if states.len() == limits.max_states {
            overflow = true;
            return false;
        }
        states.push(s);
        true
    });
    if overflow {
        return Err(Error::Capacity {
            what: "number of solutions",
            got: limits.max_states + 1,
            limit: limits.max_states,
        });
    }
    if states.is_empty() {
        return Err(Error::Unsatisfiable {
            num_vars: n,
            clauses: constraints.len(),
        });
    }
    debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
    Ok(SolutionSpace::from_sorted(n, states))
}

/// Canonical maximal clause set of a state set: every pair pattern that no
/// state exhibits becomes a forbidding clause.
pub fn absent_pattern_clauses(space: &SolutionSpace) -> ConstraintSet {
    let n = space.num_vars();
    let mut set = ConstraintSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            let mut seen = [false; 4];
            for s in space.states() {
                seen[2 * s.get(i) as usize + s.get(j) as usize] = true;
                if seen.iter().all(|&x| x) {
                    break;
                }
            }
            for (p, pattern) in Pattern::ALL.iter().enumerate() {
                if !seen[p] {
                    set.add(Clause {
                        var_i: i,
                        var_j: j,
                        forbidden: *pattern,
                    })
                    .expect("indices are in range");
                }
            }
        }
    }
    set
}

/// Recovers a 2-SAT instance whose solution set is exactly `space`.
///
/// The maximal absent-pattern clause set is the strongest 2-SAT instance the
/// space satisfies, so the space is 2-SAT definable iff this instance has no
/// further solutions. The check stops at the first extra solution, which is
/// returned in the error.
pub fn recover_2sat(space: &SolutionSpace) -> Result<ConstraintSet> {
    let clauses = absent_pattern_clauses(space);
    let mut spurious = None;
    let mut found = 0usize;
    for_each_solution(&clauses, |s| {
        if space.contains(&s) {
            found += 1;
            true
        } else {
            spurious = Some(s);
            false
        }
    });
    if let Some(spurious) = spurious {
        return Err(Error::NotTwoSat { spurious });
    }
    debug_assert_eq!(found, space.len());
    Ok(clauses)
}
