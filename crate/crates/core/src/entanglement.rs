//! Bipartite entanglement of states in a constrained basis.
//!
//! A state `ψ = Σ_s ψ_s |s⟩` on a solution space is rearranged into the
//! coefficient matrix `C[m][n]` indexed by the distinct left and right
//! sub-patterns that occur; its singular values are the Schmidt
//! coefficients. Entropies are in nats with `0 ln 0 = 0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::floquet::QuasiSpectrum;
use crate::space::SolutionSpace;

/// Singular values at or below this count as structural zeros.
pub const RANK_THRESHOLD: f64 = 1e-12;
const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(num_vars: usize, left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; num_vars];
        for &v in left.iter().chain(&right) {
            if v >= num_vars {
                return Err(Error::invalid(format!(
                    "variable {v} out of range for {num_vars} variables"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::invalid(format!("variable {v} appears twice in the cut")));
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("variable {v} is on neither side of the cut")));
        }
        Ok(Bipartition { left, right })
    }

    /// First `num_vars / 2` variables on the left, the rest on the right.
    pub fn half(num_vars: usize) -> Self {
        let h = num_vars / 2;
        Bipartition {
            left: (0..h).collect(),
            right: (h..num_vars).collect(),
        }
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    fn num_vars(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    /// Distinct left patterns, lexicographic.
    pub left_labels: Vec<Bits>,
    /// Distinct right patterns, lexicographic.
    pub right_labels: Vec<Bits>,
    pub entries: DMatrix<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub entropy: f64,
    pub schmidt_rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
}

impl EntanglementReport {
    fn from_singular_values(mut sv: Vec<f64>) -> Self {
        sv.sort_by(|a, b| b.total_cmp(a));
        let entropy = entropy_of_probabilities(sv.iter().map(|s| s * s));
        let schmidt_rank = sv.iter().filter(|s| **s > RANK_THRESHOLD).count();
        EntanglementReport {
            entropy,
            schmidt_rank,
            singular_values: sv,
        }
    }
}

/// `-Σ p ln p` over positive `p`.
pub fn entropy_of_probabilities(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|p| *p > 0.0).map(|p| -p * p.ln()).sum()
}

fn check_normalized(norm_sqr: f64) -> Result<()> {
    if (norm_sqr.sqrt() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::invalid(format!(
            "state has norm {}, expected 1",
            norm_sqr.sqrt()
        )));
    }
    Ok(())
}

pub fn coefficient_matrix(
    psi: &DVector<Complex64>,
    space: &SolutionSpace,
    cut: &Bipartition,
) -> Result<CoefficientMatrix> {
    if cut.num_vars() != space.num_vars() {
        return Err(Error::invalid(format!(
            "cut covers {} variables but the space has {}",
            cut.num_vars(),
            space.num_vars()
        )));
    }
    if psi.len() != space.len() {
        return Err(Error::invalid(format!(
            "state has {} amplitudes for a space of {} states",
            psi.len(),
            space.len()
        )));
    }
    check_normalized(psi.norm_squared())?;
    let halves: Vec<(Bits, Bits)> = space
        .states()
        .iter()
        .map(|s| (s.select(&cut.left), s.select(&cut.right)))
        .collect();
    let index = |labels: BTreeMap<Bits, usize>| -> (Vec<Bits>, BTreeMap<Bits, usize>) {
        let list: Vec<Bits> = labels.into_keys().collect();
        let map = list.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        (list, map)
    };
    let (left_labels, left_index) = index(halves.iter().map(|(l, _)| (l.clone(), 0)).collect());
    let (right_labels, right_index) = index(halves.iter().map(|(_, r)| (r.clone(), 0)).collect());
    let mut entries = DMatrix::zeros(left_labels.len(), right_labels.len());
    for ((l, r), amp) in halves.iter().zip(psi.iter()) {
        entries[(left_index[l], right_index[r])] = *amp;
    }
    Ok(CoefficientMatrix {
        left_labels,
        right_labels,
        entries,
    })
}

pub fn entropy_svd(cmat: &CoefficientMatrix) -> EntanglementReport {
    let sv = cmat.entries.clone().singular_values();
    EntanglementReport::from_singular_values(sv.iter().copied().collect())
}

/// Half-cut entanglement of a clock-chain state `c_0..c_N`, `N` even.
///
/// With `h = N/2` the coefficient matrix is `e_0 a^T + b e_h^T` where
/// `a = (c_0..c_{h-1}, 0)` and `b = (c_h, .., c_N)`; the column supports are
/// disjoint, so `C C^† = |a|² e_0 e_0^† + b b^†` and its two eigenvalues
/// follow from trace 1 and determinant `|a|² Σ_{k>h} |c_k|²`.
pub fn clock_entropy_rank2(c: &[Complex64]) -> Result<EntanglementReport> {
    if c.is_empty() || !(c.len() - 1).is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "half-cut clock entropy needs an even number of sites, got {}",
            c.len().saturating_sub(1)
        )));
    }
    let h = (c.len() - 1) / 2;
    let row: f64 = c[..h].iter().map(|z| z.norm_sqr()).sum();
    let tail: f64 = c[h + 1..].iter().map(|z| z.norm_sqr()).sum();
    let overlap = c[h].norm_sqr();
    let total = row + overlap + tail;
    check_normalized(total)?;
    let (row, tail, overlap) = (row / total, tail / total, overlap / total);
    let det = row * tail;
    let trace = row + overlap + tail;
    let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
    let p_plus = 0.5 * (trace + disc);
    let p_minus = if p_plus > 0.0 { det / p_plus } else { 0.0 };
    Ok(EntanglementReport::from_singular_values(vec![
        p_plus.sqrt(),
        p_minus.sqrt(),
    ]))
}

/// `⟨X_j⟩` for a clock-chain state, sites numbered `1..=N`. Only
/// `|N-j⟩ ↔ |N-j+1⟩` survives projection.
pub fn local_x_expectation(c: &[Complex64], site: usize) -> Result<f64> {
    let n = c.len().saturating_sub(1);
    if site == 0 || site > n {
        return Err(Error::invalid(format!("site {site} outside 1..={n}")));
    }
    Ok(2.0 * (c[n - site].conj() * c[n - site + 1]).re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub quasi_phase: f64,
    pub entropy: f64,
    pub schmidt_rank: usize,
    pub x_expectation: f64,
}

/// Half-cut entropy and `⟨X_site⟩` of every Floquet eigenstate of a clock
/// chain.
pub fn entropy_sweep(spec: &QuasiSpectrum, site: usize) -> Result<Vec<SweepRow>> {
    let dim = spec.eigenvectors.nrows();
    if site == 0 || site >= dim {
        return Err(Error::invalid(format!(
            "site {site} outside 1..={}",
            dim.saturating_sub(1)
        )));
    }
    (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let col: Vec<Complex64> = spec.eigenvectors.column(i).iter().copied().collect();
            let report = clock_entropy_rank2(&col)?;
            Ok(SweepRow {
                index: i,
                quasi_phase: spec.phases[i],
                entropy: report.entropy,
                schmidt_rank: report.schmidt_rank,
                x_expectation: local_x_expectation(&col, site)?,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("index,quasi_phase,entropy,schmidt_rank,x_expectation\n");
    for r in rows {
        writeln!(
            out,
            "{},{:.17e},{:.17e},{},{:.17e}",
            r.index, r.quasi_phase, r.entropy, r.schmidt_rank, r.x_expectation
        )
        .unwrap();
    }
    out
}

/// Median of the sweep entropies.
pub fn median_entropy(rows: &[SweepRow]) -> Option<f64> {
    let mut e: Vec<f64> = rows.iter().map(|r| r.entropy).collect();
    if e.is_empty() {
        return None;
    }
    e.sort_by(f64::total_cmp);
    let m = e.len() / 2;
    Some(if e.len() % 2 == 1 {
        e[m]
    } else {
        0.5 * (e[m - 1] + e[m])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ConstraintSet;
    use crate::linalg;
    use crate::space::enumerate_solutions;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(dim: usize, rng: &mut impl Rng) -> DVector<Complex64> {
        let v = DVector::from_fn(dim, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let n = v.norm();
        v / c(n, 0.0)
    }

    /// Entropy of the left reduced density matrix after embedding `psi` in
    /// the full `2^N` space.
    fn partial_trace_entropy(psi: &DVector<Complex64>, space: &SolutionSpace) -> f64 {
        let n = space.num_vars();
        let h = n / 2;
        let mut m = DMatrix::<Complex64>::zeros(1 << h, 1 << (n - h));
        for (s, amp) in space.states().iter().zip(psi.iter()) {
            let idx = s.to_index().unwrap() as usize;
            m[(idx >> (n - h), idx & ((1 << (n - h)) - 1))] = *amp;
        }
        let rho = &m * m.adjoint();
        entropy_of_probabilities(linalg::hermitian_eigen(&rho).0)
    }

    #[test]
    fn basis_and_cat_states() {
        let space = SolutionSpace::clock(6);
        let cut = Bipartition::half(6);
        let mut psi = DVector::zeros(7);
        psi[0] = c(1.0, 0.0);
        let cm = coefficient_matrix(&psi, &space, &cut).unwrap();
        assert_eq!(cm.entries.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert_eq!(cm.entries[(0, 0)], c(1.0, 0.0));
        let r = entropy_svd(&cm);
        assert_eq!((r.schmidt_rank, r.entropy), (1, 0.0));

        let mut cat = DVector::zeros(7);
        cat[0] = c(0.5f64.sqrt(), 0.0);
        cat[6] = c(0.5f64.sqrt(), 0.0);
        let cm = coefficient_matrix(&cat, &space, &cut).unwrap();
        assert!((cm.entries[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((cm.entries[(3, 3)].re - 0.5f64.sqrt()).abs() < 1e-15);
        let r = entropy_svd(&cm);
        assert_eq!(r.schmidt_rank, 2);
        assert!((r.entropy - LN_2).abs() < 1e-14);
    }

    #[test]
    fn clock_coefficients_form_a_cross() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10;
        let psi = random_state(n + 1, &mut rng);
        let cm = coefficient_matrix(&psi, &SolutionSpace::clock(n), &Bipartition::half(n)).unwrap();
        let h = n / 2;
        assert_eq!(cm.entries.shape(), (h + 1, h + 1));
        for m in 0..=h {
            for col in 0..=h {
                if m != 0 && col != h {
                    assert_eq!(cm.entries[(m, col)], c(0.0, 0.0));
                }
            }
        }
        assert!(entropy_svd(&cm).schmidt_rank <= 2);
    }

    #[test]
    fn uniform_clock_state_at_four_sites() {
        let psi = DVector::from_element(5, c(0.2f64.sqrt(), 0.0));
        let r = entropy_svd(&coefficient_matrix(&psi, &SolutionSpace::clock(4), &Bipartition::half(4)).unwrap());
        let expect = -(0.8f64 * 0.8f64.ln()) - 0.2 * 0.2f64.ln();
        assert!((r.entropy - expect).abs() < 1e-14);
        let p: Vec<f64> = r.singular_values.iter().map(|s| s * s).collect();
        assert!((p[0] - 0.8).abs() < 1e-14 && (p[1] - 0.2).abs() < 1e-14);
        let fast = clock_entropy_rank2(psi.as_slice()).unwrap();
        assert!((fast.entropy - expect).abs() < 1e-14);
    }

    #[test]
    fn rank2_matches_svd_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100;
        let space = SolutionSpace::clock(n);
        let cut = Bipartition::half(n);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let psi = random_state(n + 1, &mut rng);
            let slow = entropy_svd(&coefficient_matrix(&psi, &space, &cut).unwrap());
            let fast = clock_entropy_rank2(psi.as_slice()).unwrap();
            assert_eq!(slow.schmidt_rank, fast.schmidt_rank);
            worst = worst.max((slow.entropy - fast.entropy).abs());
        }
        assert!(worst <= 1e-12, "max |ΔS| = {worst}");
    }

    #[test]
    fn left_pure_states_have_zero_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut psi = random_state(11, &mut rng);
        for k in 6..11 {
            psi[k] = c(0.0, 0.0);
        }
        let norm = psi.norm();
        psi /= c(norm, 0.0);
        let r = clock_entropy_rank2(psi.as_slice()).unwrap();
        assert_eq!(r.schmidt_rank, 1);
        assert!(r.entropy.abs() < 1e-15);
        assert!(clock_entropy_rank2(&psi.as_slice()[..10]).is_err());
        assert!(clock_entropy_rank2(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn reduced_density_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let spaces = [
            SolutionSpace::clock(10),
            enumerate_solutions(&ConstraintSet::pxp_chain(10)).unwrap(),
            enumerate_solutions(&ConstraintSet::pxp_chain(7)).unwrap(),
            enumerate_solutions(&ConstraintSet::new(6)).unwrap(),
        ];
        for space in &spaces {
            for _ in 0..5 {
                let psi = random_state(space.len(), &mut rng);
                let cm = coefficient_matrix(&psi, space, &Bipartition::half(space.num_vars())).unwrap();
                let r = entropy_svd(&cm);
                assert!((r.entropy - partial_trace_entropy(&psi, space)).abs() < 1e-10);
                let norm: f64 = r.singular_values.iter().map(|s| s * s).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn left_and_right_reduced_states_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let space = enumerate_solutions(&ConstraintSet::pxp_chain(9)).unwrap();
        let psi = random_state(space.len(), &mut rng);
        let cm = coefficient_matrix(&psi, &space, &Bipartition::half(9)).unwrap();
        let rho_l = &cm.entries * cm.entries.adjoint();
        let rho_r = cm.entries.adjoint() * &cm.entries;
        let sl = entropy_of_probabilities(linalg::hermitian_eigen(&rho_l).0);
        let sr = entropy_of_probabilities(linalg::hermitian_eigen(&rho_r).0);
        assert!((sl - sr).abs() < 1e-12);
    }

    #[test]
    fn scattered_cut() {
        let space = enumerate_solutions(&ConstraintSet::pxp_chain(4)).unwrap();
        let cut = Bipartition::new(4, vec![0, 2], vec![1, 3]).unwrap();
        let psi = DVector::from_element(space.len(), c(1.0 / (space.len() as f64).sqrt(), 0.0));
        let cm = coefficient_matrix(&psi, &space, &cut).unwrap();
        assert_eq!(cm.left_labels.len(), 4);
        assert!(Bipartition::new(4, vec![0, 1], vec![1, 3]).is_err());
        assert!(Bipartition::new(4, vec![0], vec![1, 3]).is_err());
        assert!(Bipartition::new(4, vec![0, 1], vec![2, 4]).is_err());
        let bad = coefficient_matrix(&(psi * c(2.0, 0.0)), &space, &cut);
        assert!(bad.is_err());
    }

    /// Applies `X_j` on the full `2^N` space and returns `⟨ψ|X_j|ψ⟩`.
    fn full_space_x(c_amp: &[Complex64], site: usize) -> f64 {
        let n = c_amp.len() - 1;
        let dim = 1usize << n;
        let mut full = vec![c(0.0, 0.0); dim];
        for (k, a) in c_amp.iter().enumerate() {
            full[Bits::clock(n, k).to_index().unwrap() as usize] = *a;
        }
        let mask = 1usize << (n - site);
        (0..dim).map(|s| (full[s].conj() * full[s ^ mask]).re).sum()
    }

    #[test]
    fn local_x_matches_full_space() {
        let n = 8;
        for k in 0..n {
            let mut amp = vec![c(0.0, 0.0); n + 1];
            amp[k] = c(0.5f64.sqrt(), 0.0);
            amp[k + 1] = c(0.5f64.sqrt(), 0.0);
            let j = n - k;
            assert!((local_x_expectation(&amp, j).unwrap() - 1.0).abs() < 1e-15);
            assert!((full_space_x(&amp, j) - 1.0).abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = random_state(n + 1, &mut rng);
        for j in 1..=n {
            let a = local_x_expectation(psi.as_slice(), j).unwrap();
            assert!((a - full_space_x(psi.as_slice(), j)).abs() < 1e-14);
        }
        let mut basis = vec![c(0.0, 0.0); n + 1];
        basis[3] = c(1.0, 0.0);
        assert!((1..=n).all(|j| local_x_expectation(&basis, j).unwrap() == 0.0));
        assert!(local_x_expectation(&basis, 0).is_err());
        assert!(local_x_expectation(&basis, n + 1).is_err());
    }

    #[test]
    fn sweep_rows_and_csv() {
        use crate::floquet::{floquet_operator, quasi_spectrum};
        use crate::hamiltonian::DriveProtocol;
        let spec = quasi_spectrum(&floquet_operator(12, &DriveProtocol::standard(0.9071), 128).unwrap()).unwrap();
        let rows = entropy_sweep(&spec, 3).unwrap();
        assert_eq!(rows.len(), 13);
        assert!(rows.iter().all(|r| r.entropy <= LN_2 + 1e-9 && r.schmidt_rank <= 2));
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("index,quasi_phase,entropy,schmidt_rank,x_expectation\n0,"));
        assert!(entropy_sweep(&spec, 13).is_err());
        assert!(median_entropy(&rows).unwrap() <= LN_2);
        assert_eq!(median_entropy(&[]), None);
    }

    proptest! {
        #[test]
        fn clock_entropy_never_exceeds_ln2(seed in any::<u64>(), half in 1usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(2 * half + 1, &mut rng);
            let r = clock_entropy_rank2(psi.as_slice()).unwrap();
            prop_assert!(r.entropy <= LN_2 + 1e-9);
            prop_assert!(r.entropy >= 0.0);
            let norm: f64 = r.singular_values.iter().map(|s| s * s).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
