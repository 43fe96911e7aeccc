//! Designing constrained chains with bounded half-cut entanglement.
//!
//! A design starts from the cells of an `(h+1) × (h+1)` coefficient matrix
//! allowed to be nonzero, with rows and columns labelled by the clock states
//! of the two halves. Every state of the induced space has its coefficient
//! matrix supported on those cells, so the Schmidt rank of any state is at
//! most the term rank of the pattern. A pattern is accepted when its label
//! set forms a median graph, in which case it is the solution set of the
//! recovered 2-SAT instance.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::constraint::{Clause, ConstraintSet, Pattern};
use crate::entanglement::{coefficient_matrix, entropy_svd, Bipartition};
use crate::error::{Error, Result};
use crate::graph::{build_hamming_graph, is_median_graph_with, MedianTestOptions};
use crate::hamiltonian::{build_walk_hamiltonian, DetuningSign, WalkMatrix};
use crate::space::{enumerate_solutions, recover_2sat, SolutionSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    rows: usize,
    cols: usize,
    cells: BTreeSet<(usize, usize)>,
}

impl SparsityPattern {
    pub fn new(rows: usize, cols: usize, cells: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let cells: BTreeSet<_> = cells.into_iter().collect();
        if cells.is_empty() {
            return Err(Error::invalid("sparsity pattern has no allowed cells"));
        }
        if let Some(&(m, n)) = cells.iter().find(|(m, n)| *m >= rows || *n >= cols) {
            return Err(Error::invalid(format!(
                "cell ({m}, {n}) outside a {rows}x{cols} pattern"
            )));
        }
        Ok(SparsityPattern { rows, cols, cells })
    }

    /// Row 0 and column `h`: the clock chain.
    pub fn cross(h: usize) -> Self {
        let cells = (0..=h).map(|n| (0, n)).chain((0..=h).map(|m| (m, h)));
        SparsityPattern::new(h + 1, h + 1, cells).expect("nonempty")
    }

    /// Rows 0 and 1 and column `h`; term rank 3 for `h >= 2`.
    pub fn c3(h: usize) -> Self {
        let cells = (0..=h)
            .flat_map(|n| [(0, n), (1.min(h), n)])
            .chain((0..=h).map(|m| (m, h)));
        SparsityPattern::new(h + 1, h + 1, cells).expect("nonempty")
    }

    pub fn full(h: usize) -> Self {
        SparsityPattern::new(h + 1, h + 1, (0..=h).flat_map(|m| (0..=h).map(move |n| (m, n)))).expect("nonempty")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> impl Iterator<Item = &(usize, usize)> + '_ {
        self.cells.iter()
    }

    pub fn contains(&self, m: usize, n: usize) -> bool {
        self.cells.contains(&(m, n))
    }

    /// Largest rank of a matrix supported on the cells: the size of a
    /// maximum matching between rows and columns.
    pub fn rank_bound(&self) -> usize {
        let mut adj = vec![Vec::new(); self.rows];
        for &(m, n) in &self.cells {
            adj[m].push(n);
        }
        let mut owner: Vec<Option<usize>> = vec![None; self.cols];
        let mut size = 0;
        for row in 0..self.rows {
            let mut seen = vec![false; self.cols];
            if augment(row, &adj, &mut owner, &mut seen) {
                size += 1;
            }
        }
        size
    }

    /// Parses `dims R C` followed by `m n` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dims: Option<(usize, usize)> = None;
        let mut cells = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad integer {s:?}")));
            match (dims, fields.as_slice()) {
                (None, ["dims", r, c]) => dims = Some((num(r)?, num(c)?)),
                (None, _) => return Err(err("expected header `dims R C`".into())),
                (Some((r, c)), [m, n]) => {
                    let (m, n) = (num(m)?, num(n)?);
                    if m >= r || n >= c {
                        return Err(err(format!("cell ({m}, {n}) outside {r}x{c}")));
                    }
                    cells.push((m, n));
                }
                (Some(_), _) => return Err(err(format!("expected `m n`, got {line:?}"))),
            }
        }
        let (r, c) = dims.ok_or(Error::Parse {
            line: 0,
            msg: "missing `dims R C` header".into(),
        })?;
        SparsityPattern::new(r, c, cells)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dims {} {}\n", self.rows, self.cols);
        for (m, n) in &self.cells {
            out.push_str(&format!("{m} {n}\n"));
        }
        out
    }
}

impl fmt::Display for SparsityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in 0..self.rows {
            let row: String = (0..self.cols)
                .map(|n| if self.contains(m, n) { '*' } else { '.' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

fn augment(row: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &col in &adj[row] {
        if std::mem::replace(&mut seen[col], true) {
            continue;
        }
        if owner[col].is_none_or(|other| augment(other, adj, owner, seen)) {
            owner[col] = Some(row);
            return true;
        }
    }
    false
}

fn check_even(n: usize) -> Result<usize> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "need an even number of sites of at least 2, got {n}"
        )));
    }
    Ok(n / 2)
}

/// States `clock_h(m) ∥ clock_h(n)` for every allowed cell `(m, n)`.
pub fn pattern_to_space(pattern: &SparsityPattern, n: usize) -> Result<SolutionSpace> {
    let h = check_even(n)?;
    if pattern.rows != h + 1 || pattern.cols != h + 1 {
        return Err(Error::invalid(format!(
            "pattern is {}x{} but {n} sites need {}x{}",
            pattern.rows,
            pattern.cols,
            h + 1,
            h + 1
        )));
    }
    SolutionSpace::from_states(
        n,
        pattern
            .cells
            .iter()
            .map(|&(m, c)| Bits::clock(h, m).concat(&Bits::clock(h, c))),
    )
}

#[derive(Clone, Debug)]
pub struct Ln3Family {
    pub constraints: ConstraintSet,
    pub space: SolutionSpace,
    /// Walk Hamiltonian at `Ω = 1`, `Δ = 0`.
    pub walk: WalkMatrix,
}

impl Ln3Family {
    pub fn walk_with(&self, omega: f64, delta: f64) -> WalkMatrix {
        build_walk_hamiltonian(&self.space, omega, delta, DetuningSign::Positive)
    }
}

/// Clock chain with the bond between the two halves removed and replaced by
/// a next-nearest-neighbour clause across the cut. With 0-based variables and
/// `h = N/2`: forbid `10` on `(i, i+1)` for `i != h-1`, and on `(h-2, h)`.
pub fn build_ln3_family(n: usize) -> Result<Ln3Family> {
    let h = check_even(n)?;
    if n < 4 {
        return Err(Error::invalid(format!(
            "the ln 3 family needs at least 4 sites, got {n}"
        )));
    }
    let ten = Pattern::new(true, false);
    let clauses = (0..n - 1)
        .filter(|&i| i != h - 1)
        .map(|i| Clause::new(i, i + 1, ten))
        .chain(std::iter::once(Clause::new(h - 2, h, ten)))
        .collect::<Result<Vec<_>>>()?;
    let constraints = ConstraintSet::with_clauses(n, clauses)?;
    let space = enumerate_solutions(&constraints)?;
    let walk = build_walk_hamiltonian(&space, 1.0, 0.0, DetuningSign::Positive);
    Ok(Ln3Family {
        constraints,
        space,
        walk,
    })
}

#[derive(Clone, Debug)]
pub struct DesignOptions {
    /// `(Ω, Δ)` pairs at which eigenstate entropies are measured.
    pub draws: Vec<(f64, f64)>,
    pub median: MedianTestOptions,
}

impl Default for DesignOptions {
    /// Ten well-spread draws with `Ω ∈ [0.5, 2)` and `Δ ∈ [-1, 1)`.
    fn default() -> Self {
        let frac = |x: f64| x - x.floor();
        let golden = 0.618_033_988_749_894_9;
        let silver = std::f64::consts::SQRT_2 - 1.0;
        let draws = (1..=10)
            .map(|i| {
                let i = i as f64;
                (0.5 + 1.5 * frac(i * golden), -1.0 + 2.0 * frac(i * silver))
            })
            .collect();
        DesignOptions {
            draws,
            median: MedianTestOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawEntropy {
    pub omega: f64,
    pub delta: f64,
    pub max_entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub num_vars: usize,
    pub state_count: usize,
    /// Recovered clauses in `i j PATTERN` form.
    pub clauses: Vec<String>,
    /// Recovered clauses enumerate exactly the pattern's states.
    pub round_trip: bool,
    pub rank_bound: usize,
    /// `ln(rank_bound)`.
    pub entropy_bound: f64,
    /// Largest half-cut eigenstate entropy over all draws.
    pub max_entropy: f64,
    pub draws: Vec<DrawEntropy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    Disconnected { unreachable: usize },
    NotMedian { triple: [String; 3], median_count: usize },
    NotTwoSat { spurious: String },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Disconnected { unreachable } => {
                write!(f, "Hamming graph is disconnected ({unreachable} unreachable vertices)")
            }
            Rejection::NotMedian { triple, median_count } => {
                write!(
                    f,
                    "triple {} {} {} has {median_count} medians",
                    triple[0], triple[1], triple[2]
                )
            }
            Rejection::NotTwoSat { spurious } => write!(f, "recovered clauses also admit {spurious}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DesignOutcome {
    Accepted {
        constraints: String,
        certificate: DesignCertificate,
    },
    Rejected {
        rejection: Rejection,
    },
}

impl DesignOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, DesignOutcome::Accepted { .. })
    }

    pub fn certificate(&self) -> Option<&DesignCertificate> {
        match self {
            DesignOutcome::Accepted { certificate, .. } => Some(certificate),
            DesignOutcome::Rejected { .. } => None,
        }
    }
}

/// Largest half-cut entropy over the eigenstates of the static walk.
pub fn max_eigenstate_entropy(space: &SolutionSpace, omega: f64, delta: f64) -> Result<f64> {
    let walk = build_walk_hamiltonian(space, omega, delta, DetuningSign::Positive);
    let (_, vectors) = walk.eigen()?;
    let cut = Bipartition::half(space.num_vars());
    let mut worst: f64 = 0.0;
    for col in vectors.column_iter() {
        let psi = col.into_owned();
        worst = worst.max(entropy_svd(&coefficient_matrix(&psi, space, &cut)?).entropy);
    }
    Ok(worst)
}

/// Pattern → label set → median test → clause recovery → entropy
/// certificate.
pub fn design_pipeline(pattern: &SparsityPattern, n: usize, options: &DesignOptions) -> Result<DesignOutcome> {
    let space = pattern_to_space(pattern, n)?;
    let graph = build_hamming_graph(&space);
    let verdict = match is_median_graph_with(&graph, options.median) {
        Ok(v) => v,
        Err(Error::Disconnected { unreachable }) => {
            return Ok(DesignOutcome::Rejected {
                rejection: Rejection::Disconnected { unreachable },
            })
        }
        Err(e) => return Err(e),
    };
    if let Some(w) = verdict.witness.filter(|_| !verdict.is_median) {
        let (a, b, c) = w.triple;
        let label = |i: usize| space.state(i).to_string();
        return Ok(DesignOutcome::Rejected {
            rejection: Rejection::NotMedian {
                triple: [label(a), label(b), label(c)],
                median_count: w.median_count,
            },
        });
    }
    let constraints = match recover_2sat(&space) {
        Ok(c) => c,
        Err(Error::NotTwoSat { spurious }) => {
            return Ok(DesignOutcome::Rejected {
                rejection: Rejection::NotTwoSat {
                    spurious: spurious.to_string(),
                },
            })
        }
        Err(e) => return Err(e),
    };
    let round_trip = enumerate_solutions(&constraints)? == space;
    let draws = options
        .draws
        .iter()
        .map(|&(omega, delta)| {
            Ok(DrawEntropy {
                omega,
                delta,
                max_entropy: max_eigenstate_entropy(&space, omega, delta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rank_bound = pattern.rank_bound();
    Ok(DesignOutcome::Accepted {
        constraints: constraints.to_text(),
        certificate: DesignCertificate {
            num_vars: n,
            state_count: space.len(),
            clauses: constraints.clauses().map(|c| c.to_string()).collect(),
            round_trip,
            rank_bound,
            entropy_bound: (rank_bound as f64).ln(),
            max_entropy: draws.iter().map(|d| d.max_entropy).fold(0.0, f64::max),
            draws,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_median_graph;
    use crate::space::SolutionSpace;
    use std::f64::consts::LN_2;

    fn ln3() -> f64 {
        3f64.ln()
    }

    #[test]
    fn ln3_family_at_four_sites() {
        let fam = build_ln3_family(4).unwrap();
        let labels: Vec<String> = fam.space.states().iter().map(|s| s.to_string()).collect();
        assert_eq!(labels, ["0000", "0001", "0011", "0100", "0101", "0111", "1111"]);
        let g = build_hamming_graph(&fam.space);
        assert_eq!((g.vertex_count(), g.edges().len()), (7, 8));
        assert!(is_median_graph(&g).unwrap().is_median);
        assert_eq!(fam.walk.dim(), 7);
        assert!(build_ln3_family(5).is_err());
        assert!(build_ln3_family(2).is_err());
    }

    #[test]
    fn ln3_family_has_c3_coefficient_shape() {
        for n in [4usize, 8, 12] {
            let fam = build_ln3_family(n).unwrap();
            let h = n / 2;
            let from_pattern = pattern_to_space(&SparsityPattern::c3(h), n).unwrap();
            assert_eq!(fam.space, from_pattern, "n = {n}");
        }
    }

    #[test]
    fn term_rank_of_standard_patterns() {
        assert_eq!(SparsityPattern::cross(4).rank_bound(), 2);
        assert_eq!(SparsityPattern::c3(4).rank_bound(), 3);
        assert_eq!(SparsityPattern::c3(10).rank_bound(), 3);
        assert_eq!(SparsityPattern::full(4).rank_bound(), 5);
        assert_eq!(SparsityPattern::cross(0).rank_bound(), 1);
        let diag = SparsityPattern::new(3, 3, [(0, 0), (1, 1), (2, 2), (0, 2)]).unwrap();
        assert_eq!(diag.rank_bound(), 3);
    }

    #[test]
    fn cross_pattern_is_the_clock_chain() {
        for n in [2usize, 6, 10] {
            assert_eq!(
                pattern_to_space(&SparsityPattern::cross(n / 2), n).unwrap(),
                SolutionSpace::clock(n)
            );
        }
    }

    #[test]
    fn full_pattern_is_a_grid() {
        let space = pattern_to_space(&SparsityPattern::full(4), 8).unwrap();
        assert_eq!(space.len(), 25);
        let g = build_hamming_graph(&space);
        // 5x5 grid: 2 * 5 * 4 edges
        assert_eq!(g.edges().len(), 40);
        assert!(is_median_graph(&g).unwrap().is_median);
    }

    #[test]
    fn pipeline_accepts_c3_with_ln3_bound() {
        let opts = DesignOptions::default();
        for n in [4usize, 8] {
            let out = design_pipeline(&SparsityPattern::c3(n / 2), n, &opts).unwrap();
            let cert = out.certificate().expect("accepted");
            assert!(cert.round_trip);
            assert_eq!(cert.rank_bound, 3);
            assert!(cert.max_entropy <= ln3() + 1e-9);
            assert!(
                cert.max_entropy > LN_2,
                "bound should be approached: {}",
                cert.max_entropy
            );
            assert_eq!(cert.draws.len(), 10);
        }
    }

    #[test]
    fn pipeline_accepts_cross_with_ln2_bound() {
        let out = design_pipeline(&SparsityPattern::cross(4), 8, &DesignOptions::default()).unwrap();
        let cert = out.certificate().unwrap();
        assert_eq!(cert.rank_bound, 2);
        assert!((cert.entropy_bound - LN_2).abs() < 1e-15);
        assert!(cert.max_entropy <= LN_2 + 1e-9);
        assert_eq!(cert.clauses.len(), 28);
    }

    #[test]
    fn pipeline_rejects_disconnected_pattern() {
        let p = SparsityPattern::new(5, 5, [(0, 0), (4, 4)]).unwrap();
        let out = design_pipeline(&p, 8, &DesignOptions::default()).unwrap();
        assert_eq!(
            out,
            DesignOutcome::Rejected {
                rejection: Rejection::Disconnected { unreachable: 1 }
            }
        );
    }

    #[test]
    fn pipeline_rejects_non_median_pattern() {
        // the 3x3 grid without its centre is an 8-cycle
        let ring = (0..3)
            .flat_map(|m| (0..3).map(move |n| (m, n)))
            .filter(|&c| c != (1, 1));
        let p = SparsityPattern::new(3, 3, ring).unwrap();
        let out = design_pipeline(&p, 4, &DesignOptions::default()).unwrap();
        match out {
            DesignOutcome::Rejected {
                rejection: Rejection::NotMedian { triple, median_count },
            } => {
                assert_ne!(median_count, 1);
                assert!(triple.iter().all(|t| t.len() == 4));
            }
            other => panic!("expected a median rejection, got {other:?}"),
        }
    }

    #[test]
    fn pattern_text_round_trip() {
        let p = SparsityPattern::c3(3);
        let text = p.to_text();
        assert!(text.starts_with("dims 4 4\n0 0\n"));
        assert_eq!(SparsityPattern::parse(&text).unwrap(), p);
        assert!(matches!(
            SparsityPattern::parse("dims 2 2\n0 5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(SparsityPattern::parse("0 0\n").is_err());
        assert!(SparsityPattern::parse("dims 2 2\n").is_err());
        assert_eq!(p.to_string().lines().next().unwrap(), "****");
        assert!(pattern_to_space(&p, 8).is_err());
    }

    #[test]
    fn certificate_serializes() {
        let out = design_pipeline(&SparsityPattern::cross(2), 4, &DesignOptions::default()).unwrap();
        let json = serde_json::to_value(&out).unwrap();
        assert_eq!(json["outcome"], "accepted");
        assert_eq!(json["certificate"]["rank_bound"], 2);
        let rej = serde_json::to_value(DesignOutcome::Rejected {
            rejection: Rejection::NotTwoSat { spurious: "000".into() },
        })
        .unwrap();
        assert_eq!(rej["rejection"]["reason"], "not_two_sat");
    }
}
