//! Two-variable clauses and their conjunctions.
//!
//! Each clause forbids exactly one of the four joint assignments of its two
//! variables, which is the same as a blockade term penalizing that local
//! pattern. The four clause types map to penalties as
//!
//! | clause          | forbidden `(x_i, x_j)` | penalty            |
//! |-----------------|------------------------|--------------------|
//! | `¬x_i ∨ ¬x_j`   | `11`                   | `n_i n_j`          |
//! | `¬x_i ∨ x_j`    | `10`                   | `n_i (1 - n_j)`    |
//! | `x_i ∨ ¬x_j`    | `01`                   | `(1 - n_i) n_j`    |
//! | `x_i ∨ x_j`     | `00`                   | `(1-n_i)(1-n_j)`   |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// The joint assignment `(x_i, x_j)` a clause excludes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    pub first: bool,
    pub second: bool,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [
        Pattern::new(false, false),
        Pattern::new(false, true),
        Pattern::new(true, false),
        Pattern::new(true, true),
    ];

    pub const fn new(first: bool, second: bool) -> Self {
        Pattern { first, second }
    }

    fn swapped(self) -> Self {
        Pattern::new(self.second, self.first)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.first as u8, self.second as u8)
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(Pattern::new(false, false)),
            "01" => Ok(Pattern::new(false, true)),
            "10" => Ok(Pattern::new(true, false)),
            "11" => Ok(Pattern::new(true, true)),
            _ => Err(Error::invalid(format!("pattern must be one of 00/01/10/11, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause {
    pub var_i: usize,
    pub var_j: usize,
    pub forbidden: Pattern,
}

impl Clause {
    /// Builds a clause, reordering the variables so that `var_i < var_j`.
    pub fn new(a: usize, b: usize, forbidden: Pattern) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Clause {
                var_i: a,
                var_j: b,
                forbidden,
            }),
            std::cmp::Ordering::Greater => Ok(Clause {
                var_i: b,
                var_j: a,
                forbidden: forbidden.swapped(),
            }),
            std::cmp::Ordering::Equal => Err(Error::invalid(format!("clause on a single variable {a}"))),
        }
    }

    pub fn is_satisfied_by(&self, state: &Bits) -> bool {
        !(state.get(self.var_i) == self.forbidden.first && state.get(self.var_j) == self.forbidden.second)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.var_i, self.var_j, self.forbidden)
    }
}

/// A conjunction of clauses over `num_vars` variables. Duplicates collapse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    num_vars: usize,
    clauses: BTreeSet<Clause>,
}

impl ConstraintSet {
    pub fn new(num_vars: usize) -> Self {
        ConstraintSet {
            num_vars,
            clauses: BTreeSet::new(),
        }
    }

    pub fn with_clauses(num_vars: usize, clauses: impl IntoIterator<Item = Clause>) -> Result<Self> {
        let mut set = ConstraintSet::new(num_vars);
        for c in clauses {
            set.add(c)?;
        }
        Ok(set)
    }

    /// Adds a clause; returns `false` if it was already present.
    pub fn add(&mut self, clause: Clause) -> Result<bool> {
        if clause.var_j >= self.num_vars {
            return Err(Error::invalid(format!(
                "clause {clause} references variable {} but there are only {} variables",
                clause.var_j, self.num_vars
            )));
        }
        Ok(self.clauses.insert(clause))
    }

    /// Nearest-neighbour clauses forbidding `10`; solutions are the clock
    /// states `0^(n-k) 1^k`.
    pub fn clock_chain(num_vars: usize) -> Self {
        Self::chain(num_vars, Pattern::new(true, false))
    }

    /// Nearest-neighbour clauses forbidding `11` (Rydberg blockade); solutions
    /// form the Fibonacci cube.
    pub fn pxp_chain(num_vars: usize) -> Self {
        Self::chain(num_vars, Pattern::new(true, true))
    }

    fn chain(num_vars: usize, forbidden: Pattern) -> Self {
        let clauses = (1..num_vars).map(|i| Clause {
            var_i: i - 1,
            var_j: i,
            forbidden,
        });
        ConstraintSet {
            num_vars,
            clauses: clauses.collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> + '_ {
        self.clauses.iter()
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.clauses.contains(clause)
    }

    pub fn is_satisfied_by(&self, state: &Bits) -> bool {
        state.len() == self.num_vars && self.clauses.iter().all(|c| c.is_satisfied_by(state))
    }

    /// Parses the line format `vars N` followed by `i j PATTERN` lines.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut set: Option<ConstraintSet> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: lineno + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (&mut set, fields.as_slice()) {
                (None, ["vars", n]) => {
                    let n = n.parse().map_err(|_| parse_err(format!("bad variable count {n:?}")))?;
                    set = Some(ConstraintSet::new(n));
                }
                (None, _) => return Err(parse_err("expected header `vars N`".into())),
                (Some(set), [i, j, pat]) => {
                    let i: usize = i.parse().map_err(|_| parse_err(format!("bad index {i:?}")))?;
                    let j: usize = j.parse().map_err(|_| parse_err(format!("bad index {j:?}")))?;
                    let pat: Pattern = pat.parse().map_err(|e: Error| parse_err(e.to_string()))?;
                    let clause = Clause::new(i, j, pat).map_err(|e| parse_err(e.to_string()))?;
                    set.add(clause).map_err(|e| parse_err(e.to_string()))?;
                }
                (Some(_), _) => return Err(parse_err(format!("expected `i j PATTERN`, got {line:?}"))),
            }
        }
        set.ok_or(Error::Parse {
            line: 0,
            msg: "missing `vars N` header".into(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vars {}\n", self.num_vars);
        for c in &self.clauses {
            out.push_str(&format!("{c}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_normalizes_variable_order() {
        let c = Clause::new(3, 1, Pattern::new(true, false)).unwrap();
        assert_eq!((c.var_i, c.var_j), (1, 3));
        assert_eq!(c.forbidden, Pattern::new(false, true));
        assert!(Clause::new(2, 2, Pattern::new(true, true)).is_err());
    }

    #[test]
    fn duplicates_collapse() {
        let mut set = ConstraintSet::new(3);
        let c = Clause::new(0, 1, Pattern::new(true, true)).unwrap();
        assert!(set.add(c).unwrap());
        assert!(!set.add(Clause::new(1, 0, Pattern::new(true, true)).unwrap()).unwrap());
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn out_of_range_variable_rejected() {
        let mut set = ConstraintSet::new(2);
        assert!(set.add(Clause::new(0, 2, Pattern::new(true, true)).unwrap()).is_err());
    }

    #[test]
    fn text_round_trip() {
        let set = ConstraintSet::clock_chain(4);
        let text = set.to_text();
        assert!(text.starts_with("vars 4\n0 1 10\n"));
        assert_eq!(ConstraintSet::parse(&text).unwrap(), set);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ConstraintSet::parse("vars 3\n# c\n0 1 10\n0 1 12\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(ConstraintSet::parse("0 1 10\n").is_err());
        assert!(ConstraintSet::parse("").is_err());
    }

    #[test]
    fn satisfaction() {
        let set = ConstraintSet::pxp_chain(3);
        assert!(set.is_satisfied_by(&"101".parse().unwrap()));
        assert!(!set.is_satisfied_by(&"110".parse().unwrap()));
        assert!(!set.is_satisfied_by(&"10".parse().unwrap()));
    }
}
