//! Hermitian generators: quantum walks on solution spaces, the driven clock
//! chain, and the full `2^N` blockade chain used to validate projections.
//!
//! Units have ħ = 1 and time is dimensionless.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::space::SolutionSpace;

type Control = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Instantaneous controls of the clock chain: hopping amplitude `j`,
/// Zeeman-like field `a` and laser phase `phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveValues {
    pub j: f64,
    pub a: f64,
    pub phi: f64,
}

impl DriveValues {
    pub fn is_finite(&self) -> bool {
        self.j.is_finite() && self.a.is_finite() && self.phi.is_finite()
    }
}

/// Time dependence of `J(t)`, `A(t)` and `φ(t)`.
///
/// `J = Ω/2` and `A = Δ/2` in terms of the Rabi frequency and detuning.
#[derive(Clone)]
pub enum DriveProtocol {
    /// `J = sqrt(1 + cos²ωt)`, `A = cos ωt`, `φ = ωt`.
    Standard { omega: f64 },
    /// Time-independent controls; `omega` only fixes the period.
    Constant { omega: f64, values: DriveValues },
    Custom {
        omega: f64,
        j: Control,
        a: Control,
        phi: Control,
    },
}

impl DriveProtocol {
    pub fn standard(omega: f64) -> Self {
        DriveProtocol::Standard { omega }
    }

    pub fn constant(omega: f64, j: f64, a: f64, phi: f64) -> Self {
        DriveProtocol::Constant {
            omega,
            values: DriveValues { j, a, phi },
        }
    }

    pub fn custom(
        omega: f64,
        j: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DriveProtocol::Custom {
            omega,
            j: Arc::new(j),
            a: Arc::new(a),
            phi: Arc::new(phi),
        }
    }

    pub fn omega(&self) -> f64 {
        match self {
            DriveProtocol::Standard { omega }
            | DriveProtocol::Constant { omega, .. }
            | DriveProtocol::Custom { omega, .. } => *omega,
        }
    }

    /// `T = 2π / ω`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega()
    }

    pub fn at(&self, t: f64) -> DriveValues {
        match self {
            DriveProtocol::Standard { omega } => {
                let c = (omega * t).cos();
                DriveValues {
                    j: (1.0 + c * c).sqrt(),
                    a: c,
                    phi: omega * t,
                }
            }
            DriveProtocol::Constant { values, .. } => *values,
            DriveProtocol::Custom { j, a, phi, .. } => DriveValues {
                j: j(t),
                a: a(t),
                phi: phi(t),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DriveProtocol::Standard { .. } => "standard",
            DriveProtocol::Constant { .. } => "constant",
            DriveProtocol::Custom { .. } => "custom",
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let omega = self.omega();
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(format!("drive frequency must be positive, got {omega}")));
        }
        Ok(())
    }
}

impl fmt::Debug for DriveProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriveProtocol::Standard { omega } => write!(f, "Standard {{ omega: {omega} }}"),
            DriveProtocol::Constant { omega, values } => {
                write!(f, "Constant {{ omega: {omega}, values: {values:?} }}")
            }
            DriveProtocol::Custom { omega, .. } => write!(f, "Custom {{ omega: {omega} }}"),
        }
    }
}

/// Hermitian tridiagonal matrix: real diagonal and complex super-diagonal
/// `off[k] = H[k][k+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<Complex64>,
}

impl HermitianTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<Complex64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(HermitianTridiagonal { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        if r == c {
            Complex64::new(self.diag[r], 0.0)
        } else if r + 1 == c {
            self.off[r]
        } else if c + 1 == r {
            self.off[c].conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| self.get(r, c))
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.dim();
        DVector::from_fn(n, |k, _| {
            let mut acc = v[k] * self.diag[k];
            if k + 1 < n {
                acc += self.off[k] * v[k + 1];
            }
            if k > 0 {
                acc += self.off[k - 1].conj() * v[k - 1];
            }
            acc
        })
    }

    /// Diagonal phase gauge `H = D R D^†` with `R` real symmetric; returns
    /// the real off-diagonal of `R` and the diagonal of `D`.
    pub fn real_gauge(&self) -> (Vec<f64>, Vec<Complex64>) {
        let mut phases = Vec::with_capacity(self.dim());
        let mut theta = 0.0;
        phases.push(Complex64::new(1.0, 0.0));
        let mut real_off = Vec::with_capacity(self.off.len());
        for z in &self.off {
            real_off.push(z.norm());
            if z.norm() > 0.0 {
                theta -= z.arg();
            }
            phases.push(Complex64::from_polar(1.0, theta));
        }
        (real_off, phases)
    }

    /// Eigenvalues ascending and eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let (real_off, phases) = self.real_gauge();
        let eig = linalg::sym_tridiagonal_eigen(&self.diag, &real_off, true)?;
        let v = eig.vectors.expect("vectors requested");
        let n = self.dim();
        let vectors = DMatrix::from_fn(n, n, |r, c| phases[r] * v[(r, c)]);
        Ok((eig.values, vectors))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (real_off, _) = self.real_gauge();
        Ok(linalg::sym_tridiagonal_eigen(&self.diag, &real_off, false)?.values)
    }

    /// `Σ w_i H_i` for matrices of equal dimension.
    pub fn combine(terms: &[(f64, &HermitianTridiagonal)]) -> HermitianTridiagonal {
        let n = terms[0].1.dim();
        let mut diag = vec![0.0; n];
        let mut off = vec![Complex64::new(0.0, 0.0); n - 1];
        for (w, h) in terms {
            assert_eq!(h.dim(), n, "combining tridiagonals of different size");
            for (d, x) in diag.iter_mut().zip(&h.diag) {
                *d += w * x;
            }
            for (o, x) in off.iter_mut().zip(&h.off) {
                *o += x * *w;
            }
        }
        HermitianTridiagonal { diag, off }
    }
}

/// A Hermitian generator in the basis of a solution space (index `i` is the
/// space's `i`-th state).
#[derive(Clone, Debug, PartialEq)]
pub enum WalkMatrix {
    Tridiagonal(HermitianTridiagonal),
    Dense(DMatrix<Complex64>),
}

impl WalkMatrix {
    pub fn dim(&self) -> usize {
        match self {
            WalkMatrix::Tridiagonal(t) => t.dim(),
            WalkMatrix::Dense(m) => m.nrows(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        match self {
            WalkMatrix::Tridiagonal(t) => t.get(r, c),
            WalkMatrix::Dense(m) => m[(r, c)],
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            WalkMatrix::Tridiagonal(t) => t.to_dense(),
            WalkMatrix::Dense(m) => m.clone(),
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        match self {
            WalkMatrix::Tridiagonal(_) => 0.0,
            WalkMatrix::Dense(m) => linalg::hermiticity_residual(m),
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        match self {
            WalkMatrix::Tridiagonal(t) => t.eigenvalues(),
            WalkMatrix::Dense(m) => Ok(linalg::hermitian_eigen(m).0),
        }
    }

    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        match self {
            WalkMatrix::Tridiagonal(t) => t.eigen(),
            WalkMatrix::Dense(m) => Ok(linalg::hermitian_eigen(m)),
        }
    }

    /// Non-zero entries as `row,col,re,im` lines with a header.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::from("row,col,re,im\n");
        let mut emit = |r: usize, c: usize, z: Complex64| {
            if z.re != 0.0 || z.im != 0.0 {
                writeln!(out, "{r},{c},{:.17e},{:.17e}", z.re, z.im).unwrap();
            }
        };
        match self {
            WalkMatrix::Tridiagonal(t) => {
                for r in 0..n {
                    for c in r.saturating_sub(1)..(r + 2).min(n) {
                        emit(r, c, t.get(r, c));
                    }
                }
            }
            WalkMatrix::Dense(m) => {
                for r in 0..n {
                    for c in 0..n {
                        emit(r, c, m[(r, c)]);
                    }
                }
            }
        }
        out
    }
}

/// Sign in front of the detuning term of the generic walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DetuningSign {
    /// `H = +Δ D + (Ω/2) O`.
    #[default]
    Positive,
    /// `H = -Δ D + (Ω/2) O`, the sign carried by `-Δ Σ n_i` in the full
    /// blockade Hamiltonian, so that projection reproduces this walk.
    Negative,
}

impl DetuningSign {
    fn factor(self) -> f64 {
        match self {
            DetuningSign::Positive => 1.0,
            DetuningSign::Negative => -1.0,
        }
    }
}

/// Quantum walk `H = ±Δ D + (Ω/2) O` on a solution space, where
/// `D_ii` counts the ones of state `i` and `O` is the Hamming-graph
/// adjacency matrix.
pub fn build_walk_hamiltonian(space: &SolutionSpace, omega: f64, delta: f64, sign: DetuningSign) -> WalkMatrix {
    let n = space.len();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (i, s) in space.states().iter().enumerate() {
        h[(i, i)] = Complex64::new(sign.factor() * delta * s.count_ones() as f64, 0.0);
        for var in 0..space.num_vars() {
            if let Some(j) = space.index_of(&s.flipped(var)) {
                h[(i, j)] = Complex64::new(0.5 * omega, 0.0);
            }
        }
    }
    WalkMatrix::Dense(h)
}

/// Driven walk on an arbitrary solution space: diagonal `A(t)(2|s| - N)` and
/// hopping `J(t) e^{iφ(t)}` from each state to the neighbour with one more
/// excitation (Hermitian conjugate in the other direction). On the clock
/// space this coincides with [`build_clock_hamiltonian`].
pub fn build_driven_walk_hamiltonian(space: &SolutionSpace, t: f64, drive: &DriveProtocol) -> WalkMatrix {
    let DriveValues { j, a, phi } = drive.at(t);
    let n = space.len();
    let nv = space.num_vars() as f64;
    let up = Complex64::from_polar(j, phi);
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (i, s) in space.states().iter().enumerate() {
        h[(i, i)] = Complex64::new(a * (2.0 * s.count_ones() as f64 - nv), 0.0);
        for var in 0..space.num_vars() {
            if s.get(var) {
                continue;
            }
            if let Some(k) = space.index_of(&s.flipped(var)) {
                h[(i, k)] = up;
                h[(k, i)] = up.conj();
            }
        }
    }
    WalkMatrix::Dense(h)
}

/// The driven clock chain in the basis `|k⟩ = |0^(N-k) 1^k⟩`, `k = 0..N`.
///
/// The diagonal is `A(t)(2k - N)` (the eigenvalue of `A Σ Z_j`), and
/// `H[k][k+1] = J(t) e^{iφ(t)}` because `cos φ X + sin φ Y` has
/// `⟨0|·|1⟩ = e^{iφ}` and `|k+1⟩` differs from `|k⟩` by raising site `N - k`.
pub fn build_clock_hamiltonian(n: usize, t: f64, drive: &DriveProtocol) -> Result<HermitianTridiagonal> {
    if n == 0 {
        return Err(Error::invalid("clock chain needs at least one site"));
    }
    let v = drive.at(t);
    Ok(clock_hamiltonian_from_values(n, v))
}

pub(crate) fn clock_hamiltonian_from_values(n: usize, v: DriveValues) -> HermitianTridiagonal {
    let nf = n as f64;
    HermitianTridiagonal {
        diag: (0..=n).map(|k| v.a * (2.0 * k as f64 - nf)).collect(),
        off: vec![Complex64::from_polar(v.j, v.phi); n],
    }
}

/// Static parameters of the full blockade chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullChainParams {
    pub n: usize,
    /// Penalty on each nearest-neighbour `10` pattern.
    pub v: f64,
    pub omega: f64,
    pub delta: f64,
    pub phi: f64,
}

/// Largest chain accepted by [`build_full_hamiltonian`].
pub const FULL_CHAIN_MAX_SITES: usize = 14;

/// Dense `2^N` Hamiltonian
/// `Σ_j (Ω/2)(e^{iφ}|0⟩⟨1|_j + h.c.) - Δ Σ_j n_j + V Σ_j n_j (1 - n_{j+1})`.
///
/// Basis index `b` is the bitstring with site 1 as its most significant bit,
/// so index order is lexicographic order of the strings `n_1 n_2 … n_N`.
pub fn build_full_hamiltonian(p: &FullChainParams) -> Result<DMatrix<Complex64>> {
    if p.n == 0 {
        return Err(Error::invalid("chain needs at least one site"));
    }
    if p.n > FULL_CHAIN_MAX_SITES {
        return Err(Error::Capacity {
            what: "sites in the full 2^N Hamiltonian",
            got: p.n,
            limit: FULL_CHAIN_MAX_SITES,
        });
    }
    let n = p.n;
    let dim = 1usize << n;
    let bit = |s: usize, site: usize| (s >> (n - 1 - site)) & 1;
    let lower = Complex64::from_polar(0.5 * p.omega, p.phi);
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for s in 0..dim {
        let ones = s.count_ones() as f64;
        let penalties = (0..n - 1).filter(|&j| bit(s, j) == 1 && bit(s, j + 1) == 0).count() as f64;
        h[(s, s)] = Complex64::new(-p.delta * ones + p.v * penalties, 0.0);
        for site in 0..n {
            if bit(s, site) == 0 {
                let raised = s | (1 << (n - 1 - site));
                h[(s, raised)] = lower;
                h[(raised, s)] = lower.conj();
            }
        }
    }
    Ok(h)
}

/// `P H P` restricted to the states of `space`, in the space's order.
pub fn project_to_subspace(h_full: &DMatrix<Complex64>, space: &SolutionSpace) -> Result<WalkMatrix> {
    let nv = space.num_vars();
    let expected = 1usize.checked_shl(nv as u32).filter(|_| nv < 64);
    if h_full.nrows() != h_full.ncols() || Some(h_full.nrows()) != expected {
        return Err(Error::invalid(format!(
            "matrix of shape {}x{} cannot act on {nv} two-level sites",
            h_full.nrows(),
            h_full.ncols()
        )));
    }
    let idx: Vec<usize> = space
        .states()
        .iter()
        .map(|s| s.to_index().expect("fewer than 64 variables") as usize)
        .collect();
    let m = idx.len();
    Ok(WalkMatrix::Dense(DMatrix::from_fn(m, m, |r, c| {
        h_full[(idx[r], idx[c])]
    })))
}

/// Parses a drive from `key = value` lines (`drive`, `omega`, `j`, `a`, `phi`).
///
/// `drive = standard` uses the built-in cosine protocol;
/// `drive = constant` reads `j`, `a`, `phi` (default 0).
pub fn parse_drive_config(text: &str) -> Result<DriveProtocol> {
    let mut name = String::from("standard");
    let mut omega = None;
    let (mut j, mut a, mut phi) = (0.0, 0.0, 0.0);
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("{key}: not a number: {value:?}")))
        };
        match key {
            "drive" => name = value.to_string(),
            "omega" => omega = Some(num()?),
            "j" => j = num()?,
            "a" => a = num()?,
            "phi" => phi = num()?,
            _ => {}
        }
    }
    let omega = omega.unwrap_or(0.9071);
    let drive = match name.as_str() {
        "standard" => DriveProtocol::standard(omega),
        "constant" => DriveProtocol::constant(omega, j, a, phi),
        other => return Err(Error::invalid(format!("unknown drive protocol {other:?}"))),
    };
    drive.validate()?;
    Ok(drive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::constraint::ConstraintSet;
    use crate::graph::build_hamming_graph;
    use crate::space::enumerate_solutions;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn pure_hopping_walk_is_path_adjacency() {
        let h = build_walk_hamiltonian(&SolutionSpace::clock(3), 2.0, 0.0, DetuningSign::Positive).to_dense();
        for r in 0..4usize {
            for col in 0..4 {
                let expect = if r.abs_diff(col) == 1 { 1.0 } else { 0.0 };
                assert_eq!(h[(r, col)], c(expect, 0.0));
            }
        }
    }

    #[test]
    fn detuning_counts_excitations() {
        let h = build_walk_hamiltonian(&SolutionSpace::clock(3), 0.0, 1.0, DetuningSign::Positive).to_dense();
        assert_eq!(
            h,
            DMatrix::from_diagonal(&DVector::from_vec(vec![c(0., 0.), c(1., 0.), c(2., 0.), c(3., 0.)]))
        );
        let neg = build_walk_hamiltonian(&SolutionSpace::clock(3), 0.0, 1.0, DetuningSign::Negative).to_dense();
        assert_eq!(neg, -h);
    }

    #[test]
    fn pxp_two_walk_is_star() {
        let space = enumerate_solutions(&ConstraintSet::pxp_chain(2)).unwrap();
        let h = build_walk_hamiltonian(&space, 2.0, 0.0, DetuningSign::Positive).to_dense();
        // brute-force Hamming scan over the basis 00, 01, 10
        for r in 0..3 {
            for col in 0..3 {
                let d = space.state(r).hamming(space.state(col));
                assert_eq!(h[(r, col)], c(if d == 1 { 1.0 } else { 0.0 }, 0.0));
            }
        }
        assert_eq!(h[(0, 1)], c(1.0, 0.0));
        assert_eq!(h[(1, 2)], c(0.0, 0.0));
    }

    #[test]
    fn walk_sparsity_matches_hamming_graph() {
        let space = enumerate_solutions(&ConstraintSet::pxp_chain(6)).unwrap();
        let g = build_hamming_graph(&space);
        let h = build_walk_hamiltonian(&space, 0.7, -0.4, DetuningSign::Positive);
        assert!(h.hermiticity_residual() <= 1e-12);
        for r in 0..space.len() {
            for col in 0..space.len() {
                if r != col {
                    assert_eq!(h.get(r, col).norm() > 0.0, g.has_edge(r, col));
                }
            }
        }
    }

    #[test]
    fn standard_drive_at_origin() {
        let h = build_clock_hamiltonian(4, 0.0, &DriveProtocol::standard(0.9071)).unwrap();
        assert_eq!(h.diag, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        for z in &h.off {
            assert!(close(*z, c(SQRT_2, 0.0), 1e-15));
        }
    }

    #[test]
    fn quarter_phase_gives_imaginary_hopping() {
        let h = build_clock_hamiltonian(2, 0.0, &DriveProtocol::constant(1.0, 1.0, 0.0, FRAC_PI_2)).unwrap();
        for z in &h.off {
            assert!(z.re.abs() < 1e-15 && (z.norm() - 1.0).abs() < 1e-15);
        }
        // the conjugate sits below the diagonal
        assert!(close(h.get(1, 0), c(0.0, -1.0), 1e-15));
        assert!(close(h.get(0, 1), c(0.0, 1.0), 1e-15));
    }

    /// Explicit `2^N` construction of the projected clock-chain operator from
    /// site projectors and Pauli matrices.
    fn explicit_chain_operator(n: usize, v: DriveValues) -> DMatrix<Complex64> {
        let dim = 1usize << n;
        let bit = |s: usize, site: usize| (s >> (n - 1 - site)) & 1;
        // cos φ X + sin φ Y = [[0, e^{iφ}], [e^{-iφ}, 0]] in the {|0⟩,|1⟩} basis
        let flip = |from: usize| {
            if from == 1 {
                Complex64::from_polar(1.0, v.phi)
            } else {
                Complex64::from_polar(1.0, -v.phi)
            }
        };
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for s in 0..dim {
            let z: f64 = (0..n).map(|j| 2.0 * bit(s, j) as f64 - 1.0).sum();
            h[(s, s)] += c(v.a * z, 0.0);
            for j in 0..n {
                let left_ok = j == 0 || bit(s, j - 1) == 0;
                let right_ok = j == n - 1 || bit(s, j + 1) == 1;
                if left_ok && right_ok {
                    let target = s ^ (1 << (n - 1 - j));
                    // ⟨target| op |s⟩ where site j goes from bit(s,j) to its flip
                    h[(target, s)] += flip(bit(s, j)) * v.j;
                }
            }
        }
        h
    }

    #[test]
    fn clock_hamiltonian_matches_explicit_projection() {
        let n = 6;
        let drive = DriveProtocol::standard(0.9071);
        for t in [0.0, 0.37, 2.9, 5.123] {
            let full = explicit_chain_operator(n, drive.at(t));
            assert!(linalg::hermiticity_residual(&full) < 1e-14);
            let projected = project_to_subspace(&full, &SolutionSpace::clock(n)).unwrap().to_dense();
            let direct = build_clock_hamiltonian(n, t, &drive).unwrap().to_dense();
            assert!(linalg::max_abs_diff(&projected, &direct) < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn driven_walk_on_clock_space_matches_clock_builder() {
        let drive = DriveProtocol::standard(0.9071);
        let space = SolutionSpace::clock(7);
        for t in [0.1, 1.7] {
            let a = build_driven_walk_hamiltonian(&space, t, &drive).to_dense();
            let b = build_clock_hamiltonian(7, t, &drive).unwrap().to_dense();
            assert!(linalg::max_abs_diff(&a, &b) < 1e-15);
        }
    }

    #[test]
    fn phase_gauge_preserves_spectrum() {
        let n = 9;
        let base = build_clock_hamiltonian(n, 0.0, &DriveProtocol::constant(1.0, 0.8, 0.3, 0.0)).unwrap();
        let twisted = build_clock_hamiltonian(n, 0.0, &DriveProtocol::constant(1.0, 0.8, 0.3, 1.1)).unwrap();
        let (e0, e1) = (base.eigenvalues().unwrap(), twisted.eigenvalues().unwrap());
        let dense = linalg::hermitian_eigen(&twisted.to_dense()).0;
        for ((a, b), d) in e0.iter().zip(&e1).zip(&dense) {
            assert!((a - b).abs() < 1e-12 && (b - d).abs() < 1e-12);
        }
        let (vals, vecs) = twisted.eigen().unwrap();
        let h = twisted.to_dense();
        for (k, e) in vals.iter().enumerate() {
            let v = vecs.column(k).into_owned();
            assert!((&h * &v - v.clone() * c(*e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_atom_full_hamiltonian() {
        let p = FullChainParams {
            n: 1,
            v: 3.0,
            omega: 1.4,
            delta: 0.6,
            phi: 0.5,
        };
        let h = build_full_hamiltonian(&p).unwrap();
        assert_eq!(h[(0, 0)], c(0.0, 0.0));
        assert!(close(h[(0, 1)], Complex64::from_polar(0.7, 0.5), 1e-15));
        assert!(close(h[(1, 0)], Complex64::from_polar(0.7, -0.5), 1e-15));
        assert_eq!(h[(1, 1)], c(-0.6, 0.0));
    }

    #[test]
    fn interaction_penalizes_only_one_zero() {
        let p = FullChainParams {
            n: 2,
            v: 5.0,
            omega: 0.0,
            delta: 0.0,
            phi: 0.0,
        };
        let h = build_full_hamiltonian(&p).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| h[(i, i)].re).collect();
        assert_eq!(diag, vec![0.0, 0.0, 5.0, 0.0]);
        assert!(h.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn clock_states_have_no_interaction_energy() {
        let p = FullChainParams {
            n: 6,
            v: 7.0,
            omega: 0.0,
            delta: 0.0,
            phi: 0.0,
        };
        let h = build_full_hamiltonian(&p).unwrap();
        for k in 0..=6 {
            let idx = Bits::clock(6, k).to_index().unwrap() as usize;
            assert_eq!(h[(idx, idx)], c(0.0, 0.0));
        }
        let too_big = FullChainParams { n: 15, ..p };
        assert!(matches!(build_full_hamiltonian(&too_big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn projection_onto_clock_space() {
        let p = FullChainParams {
            n: 4,
            v: 13.0,
            omega: 1.0,
            delta: 0.0,
            phi: 0.0,
        };
        let h = build_full_hamiltonian(&p).unwrap();
        let proj = project_to_subspace(&h, &SolutionSpace::clock(4)).unwrap().to_dense();
        for r in 0..5usize {
            for col in 0..5 {
                let expect = if r.abs_diff(col) == 1 { 0.5 } else { 0.0 };
                assert_eq!(proj[(r, col)], c(expect, 0.0));
            }
        }
    }

    #[test]
    fn projection_of_diagonal_and_identity() {
        let space = enumerate_solutions(&ConstraintSet::pxp_chain(3)).unwrap();
        let diag = DMatrix::from_fn(8, 8, |r, col| if r == col { c(r as f64, 0.0) } else { c(0.0, 0.0) });
        let proj = project_to_subspace(&diag, &space).unwrap().to_dense();
        for (i, s) in space.states().iter().enumerate() {
            assert_eq!(proj[(i, i)], c(s.to_index().unwrap() as f64, 0.0));
        }
        let id = project_to_subspace(&DMatrix::identity(8, 8), &space)
            .unwrap()
            .to_dense();
        assert_eq!(id, DMatrix::identity(space.len(), space.len()));
        assert!(project_to_subspace(&DMatrix::identity(4, 4), &space).is_err());
    }

    #[test]
    fn projected_full_chain_is_the_negative_detuning_walk() {
        for n in 2..=8 {
            let p = FullChainParams {
                n,
                v: 50.0,
                omega: 0.8,
                delta: 0.3,
                phi: 0.0,
            };
            let space = SolutionSpace::clock(n);
            let proj = project_to_subspace(&build_full_hamiltonian(&p).unwrap(), &space).unwrap();
            let walk = build_walk_hamiltonian(&space, p.omega, p.delta, DetuningSign::Negative);
            assert!(linalg::max_abs_diff(&proj.to_dense(), &walk.to_dense()) < 1e-15);
        }
    }

    #[test]
    fn low_energy_spectrum_follows_effective_walk() {
        // Lowest N+1 levels of the full chain against the clock walk, up to a
        // constant shift, within 10 Ω²/V.
        for n in [3usize, 5, 8] {
            let p = FullChainParams {
                n,
                v: 60.0,
                omega: 1.2,
                delta: 0.4,
                phi: 0.0,
            };
            let full = linalg::hermitian_eigen(&build_full_hamiltonian(&p).unwrap()).0;
            let walk = build_walk_hamiltonian(&SolutionSpace::clock(n), p.omega, p.delta, DetuningSign::Negative)
                .eigenvalues()
                .unwrap();
            let shift: f64 = full[..=n].iter().zip(&walk).map(|(a, b)| a - b).sum::<f64>() / (n + 1) as f64;
            let tol = 10.0 * p.omega * p.omega / p.v;
            for (a, b) in full[..=n].iter().zip(&walk) {
                assert!((a - b - shift).abs() < tol, "n={n}: {a} vs {b} (+{shift})");
            }
        }
    }

    #[test]
    fn csv_dump_lists_nonzeros() {
        let h = build_clock_hamiltonian(2, 0.0, &DriveProtocol::constant(1.0, 1.0, 0.5, 0.0)).unwrap();
        let csv = WalkMatrix::Tridiagonal(h).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "row,col,re,im");
        // diag (-1, 0, 1): the middle zero is skipped; four hoppings
        assert_eq!(lines.len(), 1 + 2 + 4);
        assert!(lines[1].starts_with("0,0,-1.0"));
    }

    #[test]
    fn drive_config_parsing() {
        let d = parse_drive_config("drive = constant\nomega = 2.0\nj = 0.5\na = 0.25 # field\n").unwrap();
        assert_eq!(
            d.at(3.0),
            DriveValues {
                j: 0.5,
                a: 0.25,
                phi: 0.0
            }
        );
        assert!((d.period() - std::f64::consts::PI).abs() < 1e-15);
        let d = parse_drive_config("drive = \"standard\"\n").unwrap();
        assert_eq!(d.name(), "standard");
        assert!((d.omega() - 0.9071).abs() < 1e-15);
        assert!(parse_drive_config("drive = sawtooth").is_err());
        assert!(parse_drive_config("omega = -1").is_err());
        assert!(matches!(
            parse_drive_config("omega 3"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
