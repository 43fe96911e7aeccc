//! One-period propagators of driven chains, their quasi-energy spectra, and
//! state evolution.
//!
//! The step exponential `exp(-i H dt)` of a tridiagonal `H` is banded up to
//! a truncation far below rounding: amplitude reaching distance `w` is
//! bounded by `(2 h dt)^w / w!` with `h = max |H[k][k+1]|`. Each column is
//! computed by a Chebyshev series on a window of half-width `w`, shifted by
//! its own diagonal entry so the series length tracks the local bandwidth of
//! the spectrum, not its full range. Propagators keep per-column supports, so
//! one period of an `N = 1000` clock chain stays cheap.

use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_clock_hamiltonian, build_driven_walk_hamiltonian, DriveProtocol, HermitianTridiagonal};
use crate::linalg;
use crate::space::SolutionSpace;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Column entries below this modulus are dropped from the support edges.
const TRIM: f64 = 1e-20;
/// Target bound on window leakage and Chebyshev tail per column.
const SERIES_TOL: f64 = 1e-20;
/// Required `max |U^† U - I|` of a propagator.
pub const UNITARITY_TOLERANCE: f64 = 1e-9;
/// Eigenvalues of the rotated Hermitian part closer than this are refined
/// together.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;
/// Rotation `e^{-iθ}` applied before splitting `U` into Hermitian parts. It
/// breaks the `ε ↔ -ε` degeneracy of `cos ε`.
const SPLIT_ROTATION: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Integrator {
    /// `exp(-i H(t_m + dt/2) dt)` per step; second order.
    Midpoint,
    /// Two exponentials of Gauss-point combinations per step; fourth order.
    #[default]
    CommutatorFree4,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Midpoint => "midpoint",
            Integrator::CommutatorFree4 => "cf4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Integrator::Midpoint),
            "cf4" | "commutator-free4" => Ok(Integrator::CommutatorFree4),
            _ => Err(Error::invalid(format!("unknown integrator {s:?}"))),
        }
    }
}

/// Step doubling until successive propagators agree entrywise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convergence {
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Convergence {
            tolerance: 1e-6,
            max_steps: 1 << 14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorConfig {
    pub steps: usize,
    pub integrator: Integrator,
    /// Start of the propagated period.
    pub time_origin: f64,
    pub converge: Option<Convergence>,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            steps: 256,
            integrator: Integrator::default(),
            time_origin: 0.0,
            converge: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FloquetOperator {
    pub dimension: usize,
    pub unitary: DMatrix<Complex64>,
    pub omega: f64,
    pub steps_used: usize,
    pub integrator: Integrator,
    pub unitarity_residual: f64,
}

#[derive(Clone, Debug)]
pub struct QuasiSpectrum {
    /// `ε_n = -arg λ_n ∈ (-π, π]`, ascending.
    pub phases: Vec<f64>,
    /// Column `n` belongs to `phases[n]`.
    pub eigenvectors: DMatrix<Complex64>,
    /// `‖U v_n - e^{-iε_n} v_n‖₂`.
    pub residuals: Vec<f64>,
}

/// Banded `exp(-i H dt)`: entry `(r, c)` for `|r - c| <= w` at
/// `(2c + 1) w + r`.
struct BandedStep {
    n: usize,
    w: usize,
    entries: Vec<Complex64>,
}

impl BandedStep {
    fn new(h: &HermitianTridiagonal, dt: f64) -> Self {
        let n = h.dim();
        let hmax = h.off.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let w = leakage_width(2.0 * hmax * dt.abs()).min(n - 1);
        let stride = 2 * w + 1;
        let mut entries = vec![ZERO; n * stride];
        entries.par_chunks_mut(stride).enumerate().for_each(|(c, out)| {
            let lo = c.saturating_sub(w);
            let hi = (c + w).min(n - 1);
            let col = window_exponential(h, lo, hi, c, dt);
            // row r lands at offset r + w - c within this column's chunk
            out[lo + w - c..=hi + w - c].copy_from_slice(&col);
        });
        BandedStep { n, w, entries }
    }

    #[cfg(test)]
    fn dense(&self) -> DMatrix<Complex64> {
        let (n, w) = (self.n, self.w);
        DMatrix::from_fn(n, n, |r, c| {
            if r.abs_diff(c) <= w {
                self.entries[(2 * c + 1) * w + r]
            } else {
                ZERO
            }
        })
    }

    /// Applies the step to a column whose nonzeros lie in `support`.
    fn apply(&self, col: &mut [Complex64], support: &mut (usize, usize)) {
        let (n, w) = (self.n, self.w);
        let (lo, hi) = *support;
        let nlo = lo.saturating_sub(w);
        let nhi = (hi + w).min(n - 1);
        let mut out = vec![ZERO; nhi - nlo + 1];
        for (k, &z) in col.iter().enumerate().take(hi + 1).skip(lo) {
            if z == ZERO {
                continue;
            }
            let rlo = k.saturating_sub(w);
            let rhi = (k + w).min(n - 1);
            let base = (2 * k + 1) * w;
            for (o, e) in out[rlo - nlo..=rhi - nlo]
                .iter_mut()
                .zip(&self.entries[base + rlo..=base + rhi])
            {
                *o += e * z;
            }
        }
        col[lo..=hi].fill(ZERO);
        let first = out.iter().position(|z| z.norm() >= TRIM).unwrap_or(0);
        let last = out.iter().rposition(|z| z.norm() >= TRIM).unwrap_or(0).max(first);
        col[nlo + first..=nlo + last].copy_from_slice(&out[first..=last]);
        *support = (nlo + first, nlo + last);
    }
}

/// Smallest `w` with `x^w / w! < SERIES_TOL`.
fn leakage_width(x: f64) -> usize {
    let mut term = 1.0;
    let mut w = 0usize;
    while term >= SERIES_TOL || w == 0 {
        w += 1;
        term *= x / w as f64;
    }
    w
}

/// Column `c` of `exp(-i H_W dt)` where `H_W` is `H` restricted to rows and
/// columns `lo..=hi`; returned over that window.
fn window_exponential(h: &HermitianTridiagonal, lo: usize, hi: usize, c: usize, dt: f64) -> Vec<Complex64> {
    let len = hi - lo + 1;
    let diag = &h.diag[lo..=hi];
    let off = &h.off[lo..hi];
    let center = h.diag[c];
    let mut radius: f64 = 0.0;
    for k in 0..len {
        let left = if k > 0 { off[k - 1].norm() } else { 0.0 };
        let right = if k + 1 < len { off[k].norm() } else { 0.0 };
        radius = radius.max((diag[k] - center).abs() + left + right);
    }
    let global = Complex64::from_polar(1.0, -center * dt);
    let mut out = vec![ZERO; len];
    if radius == 0.0 {
        out[c - lo] = global;
        return out;
    }
    let x = radius * dt.abs();
    let kmax = (x + 30.0 + 6.0 * x.cbrt()).ceil() as usize;
    let bessel = linalg::bessel_j_sequence(x, kmax);
    let last = bessel.iter().rposition(|b| b.abs() >= SERIES_TOL).unwrap_or(0);
    // (H - center) / radius
    let scaled = |v: &[Complex64], out: &mut [Complex64]| {
        for k in 0..len {
            let mut acc = v[k] * (diag[k] - center);
            if k + 1 < len {
                acc += off[k] * v[k + 1];
            }
            if k > 0 {
                acc += off[k - 1].conj() * v[k - 1];
            }
            out[k] = acc / radius;
        }
    };
    // exp(-i y s) = J_0(y) + 2 Σ_k (-i)^k J_k(y) T_k(s), with y = x sign(dt)
    let step_phase = if dt >= 0.0 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let mut prev = vec![ZERO; len];
    prev[c - lo] = Complex64::new(1.0, 0.0);
    out[c - lo] = Complex64::new(bessel[0], 0.0);
    if last >= 1 {
        let mut cur = vec![ZERO; len];
        scaled(&prev, &mut cur);
        let mut coeff = step_phase * 2.0;
        for (o, v) in out.iter_mut().zip(&cur) {
            *o += v * coeff * bessel[1];
        }
        let mut next = vec![ZERO; len];
        for b in &bessel[2..=last.max(1)] {
            scaled(&cur, &mut next);
            coeff *= step_phase;
            for k in 0..len {
                next[k] = next[k] * 2.0 - prev[k];
                out[k] += next[k] * coeff * *b;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    for o in out.iter_mut() {
        *o *= global;
    }
    out
}

/// Gauss nodes and weights of the fourth-order commutator-free scheme.
const CF4_NODES: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];
const CF4_WEIGHTS: [f64; 2] = [0.25 + 0.288_675_134_594_812_9, 0.25 - 0.288_675_134_594_812_9];

/// Generators of one step starting at `t`, applied left to right.
fn step_generators<H>(
    t: f64,
    dt: f64,
    integrator: Integrator,
    at: &impl Fn(f64) -> Result<H>,
    combine: impl Fn(f64, &H, f64, &H) -> H,
) -> Result<Vec<H>> {
    match integrator {
        Integrator::Midpoint => Ok(vec![at(t + 0.5 * dt)?]),
        Integrator::CommutatorFree4 => {
            let h1 = at(t + CF4_NODES[0] * dt)?;
            let h2 = at(t + CF4_NODES[1] * dt)?;
            let [a1, a2] = CF4_WEIGHTS;
            Ok(vec![combine(a1, &h1, a2, &h2), combine(a2, &h1, a1, &h2)])
        }
    }
}

fn clock_at(n: usize, drive: &DriveProtocol) -> impl Fn(f64) -> Result<HermitianTridiagonal> + '_ {
    move |t| {
        let v = drive.at(t);
        if !v.is_finite() {
            return Err(Error::invalid(format!("drive is not finite at t = {t}: {v:?}")));
        }
        build_clock_hamiltonian(n, t, drive)
    }
}

fn combine_tridiagonal(a: f64, h1: &HermitianTridiagonal, b: f64, h2: &HermitianTridiagonal) -> HermitianTridiagonal {
    HermitianTridiagonal::combine(&[(a, h1), (b, h2)])
}

#[derive(Clone, Copy)]
struct Stepping {
    integrator: Integrator,
    t0: f64,
    dt: f64,
    steps: usize,
}

/// Propagates the columns of `u`, each nonzero only within its support.
fn propagate_clock(
    n: usize,
    drive: &DriveProtocol,
    s: Stepping,
    u: &mut [Complex64],
    supports: &mut [(usize, usize)],
) -> Result<()> {
    let dim = n + 1;
    let at = clock_at(n, drive);
    let dt = s.dt;
    for m in 0..s.steps {
        let t = s.t0 + m as f64 * dt;
        for h in step_generators(t, dt, s.integrator, &at, combine_tridiagonal)? {
            let e = BandedStep::new(&h, dt);
            u.par_chunks_mut(dim)
                .zip(supports.par_iter_mut())
                .for_each(|(col, s)| e.apply(col, s));
        }
    }
    Ok(())
}

fn validate_common(drive: &DriveProtocol, steps: usize) -> Result<()> {
    drive.validate()?;
    if steps < 2 {
        return Err(Error::invalid(format!("need at least 2 steps per period, got {steps}")));
    }
    Ok(())
}

/// One-period propagator of the `N`-site clock chain with the default
/// integrator.
pub fn floquet_operator(n: usize, drive: &DriveProtocol, steps: usize) -> Result<FloquetOperator> {
    floquet_operator_with(
        n,
        drive,
        &PropagatorConfig {
            steps,
            ..PropagatorConfig::default()
        },
    )
}

pub fn floquet_operator_with(n: usize, drive: &DriveProtocol, config: &PropagatorConfig) -> Result<FloquetOperator> {
    validate_common(drive, config.steps)?;
    if n == 0 {
        return Err(Error::invalid("clock chain needs at least one site"));
    }
    let once = |steps: usize| -> Result<DMatrix<Complex64>> {
        let dim = n + 1;
        let mut u = DMatrix::<Complex64>::identity(dim, dim);
        let mut supports: Vec<(usize, usize)> = (0..dim).map(|c| (c, c)).collect();
        let dt = drive.period() / steps as f64;
        let stepping = Stepping {
            integrator: config.integrator,
            t0: config.time_origin,
            dt,
            steps,
        };
        propagate_clock(n, drive, stepping, u.as_mut_slice(), &mut supports)?;
        Ok(u)
    };
    let (unitary, steps_used) = converge(config, once)?;
    finish(unitary, drive.omega(), steps_used, config.integrator)
}

/// One-period propagator of the driven walk on an arbitrary solution space
/// (dense exponentials; intended for small spaces).
pub fn floquet_operator_on_space(
    space: &SolutionSpace,
    drive: &DriveProtocol,
    config: &PropagatorConfig,
) -> Result<FloquetOperator> {
    validate_common(drive, config.steps)?;
    let at = |t: f64| -> Result<DMatrix<Complex64>> {
        if !drive.at(t).is_finite() {
            return Err(Error::invalid(format!("drive is not finite at t = {t}")));
        }
        Ok(build_driven_walk_hamiltonian(space, t, drive).to_dense())
    };
    let combine = |a: f64, h1: &DMatrix<Complex64>, b: f64, h2: &DMatrix<Complex64>| {
        h1 * Complex64::new(a, 0.0) + h2 * Complex64::new(b, 0.0)
    };
    let once = |steps: usize| -> Result<DMatrix<Complex64>> {
        let dim = space.len();
        let dt = drive.period() / steps as f64;
        let mut u = DMatrix::<Complex64>::identity(dim, dim);
        for m in 0..steps {
            let t = config.time_origin + m as f64 * dt;
            for h in step_generators(t, dt, config.integrator, &at, combine)? {
                u = linalg::hermitian_expm(&h, dt) * u;
            }
        }
        Ok(u)
    };
    let (unitary, steps_used) = converge(config, once)?;
    finish(unitary, drive.omega(), steps_used, config.integrator)
}

fn converge(
    config: &PropagatorConfig,
    once: impl Fn(usize) -> Result<DMatrix<Complex64>>,
) -> Result<(DMatrix<Complex64>, usize)> {
    let mut steps = config.steps;
    let mut u = once(steps)?;
    let Some(target) = config.converge else {
        return Ok((u, steps));
    };
    let mut change = f64::INFINITY;
    while steps * 2 <= target.max_steps {
        steps *= 2;
        let finer = once(steps)?;
        change = linalg::max_abs_diff(&u, &finer);
        u = finer;
        if change <= target.tolerance {
            return Ok((u, steps));
        }
    }
    Err(Error::Numerical {
        what: "propagator change under step doubling",
        residual: change,
        tolerance: target.tolerance,
    })
}

fn finish(
    unitary: DMatrix<Complex64>,
    omega: f64,
    steps_used: usize,
    integrator: Integrator,
) -> Result<FloquetOperator> {
    let unitarity_residual = banded_unitarity_residual(&unitary);
    if unitarity_residual.is_nan() || unitarity_residual > UNITARITY_TOLERANCE {
        return Err(Error::Numerical {
            what: "propagator unitarity",
            residual: unitarity_residual,
            tolerance: UNITARITY_TOLERANCE,
        });
    }
    Ok(FloquetOperator {
        dimension: unitary.nrows(),
        unitary,
        omega,
        steps_used,
        integrator,
        unitarity_residual,
    })
}

/// First and last nonzero row of every column (`(c, c)` for empty columns).
fn column_supports(u: &DMatrix<Complex64>) -> Vec<(usize, usize)> {
    u.column_iter()
        .enumerate()
        .map(|(c, col)| {
            let first = col.iter().position(|z| *z != ZERO);
            let last = col.iter().rposition(|z| *z != ZERO);
            match (first, last) {
                (Some(a), Some(b)) => (a, b),
                _ => (c, c),
            }
        })
        .collect()
}

/// `max |U^† U - I|` using column supports.
fn banded_unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    let n = u.ncols();
    let supports = column_supports(u);
    (0..n)
        .into_par_iter()
        .map(|a| {
            let (alo, ahi) = supports[a];
            let ca = u.column(a);
            let mut worst: f64 = 0.0;
            for (b, &(blo, bhi)) in supports.iter().enumerate().skip(a) {
                let (lo, hi) = (alo.max(blo), ahi.min(bhi));
                let mut dot = ZERO;
                if lo <= hi {
                    let cb = u.column(b);
                    for k in lo..=hi {
                        dot += ca[k].conj() * cb[k];
                    }
                }
                if a == b {
                    dot -= 1.0;
                }
                worst = worst.max(dot.norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// `U V` using the column supports of `U`.
fn supported_product(
    u: &DMatrix<Complex64>,
    supports: &[(usize, usize)],
    v: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let n = u.nrows();
    let mut out = DMatrix::<Complex64>::zeros(n, v.ncols());
    out.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(m, col)| {
        for (k, &(lo, hi)) in supports.iter().enumerate() {
            let z = v[(k, m)];
            if z == ZERO {
                continue;
            }
            let uk = &u.as_slice()[k * n..(k + 1) * n];
            for r in lo..=hi {
                col[r] += uk[r] * z;
            }
        }
    });
    out
}

fn fold_phase(x: f64) -> f64 {
    let e = x.rem_euclid(TAU);
    if e > PI {
        e - TAU
    } else {
        e
    }
}

pub fn quasi_spectrum(fop: &FloquetOperator) -> Result<QuasiSpectrum> {
    if fop.unitarity_residual.is_nan() || fop.unitarity_residual > UNITARITY_TOLERANCE {
        return Err(Error::Numerical {
            what: "propagator unitarity",
            residual: fop.unitarity_residual,
            tolerance: UNITARITY_TOLERANCE,
        });
    }
    quasi_spectrum_of(&fop.unitary)
}

/// Eigenphases and eigenvectors of a unitary via commuting Hermitian parts.
pub fn quasi_spectrum_of(u: &DMatrix<Complex64>) -> Result<QuasiSpectrum> {
    if !u.is_square() || u.nrows() == 0 {
        return Err(Error::invalid(format!(
            "expected a nonempty square matrix, got {:?}",
            u.shape()
        )));
    }
    let residual = banded_unitarity_residual(u);
    if residual.is_nan() || residual > UNITARITY_TOLERANCE {
        return Err(Error::Numerical {
            what: "unitarity of diagonalized matrix",
            residual,
            tolerance: UNITARITY_TOLERANCE,
        });
    }
    let n = u.nrows();
    let supports = column_supports(u);
    let z = Complex64::from_polar(1.0, -SPLIT_ROTATION);
    let zu = u * z;
    let herm = (&zu + zu.adjoint()) * Complex64::new(0.5, 0.0);
    let (values, mut vectors) = linalg::hermitian_eigen(&herm);

    // refine clusters of the rotated real part with the imaginary part
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= CLUSTER_TOLERANCE {
            end += 1;
        }
        if end - start > 1 {
            let vc = vectors.columns(start, end - start).into_owned();
            let uc = vc.ad_mul(&supported_product(u, &supports, &vc)) * z;
            let imag = (&uc - uc.adjoint()) * Complex64::new(0.0, -0.5);
            let (_, w) = linalg::hermitian_eigen(&imag);
            vectors.columns_mut(start, end - start).copy_from(&(vc * w));
        }
        start = end;
    }

    let uv = supported_product(u, &supports, &vectors);
    let mut items: Vec<(f64, usize, f64)> = (0..n)
        .map(|m| {
            let v = vectors.column(m);
            let lambda = v.dotc(&uv.column(m));
            let phase = fold_phase(-lambda.arg());
            let target = Complex64::from_polar(1.0, -phase);
            let res = uv
                .column(m)
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b * target).norm_sqr())
                .sum::<f64>()
                .sqrt();
            (phase, m, res)
        })
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let phases = items.iter().map(|x| x.0).collect();
    let residuals = items.iter().map(|x| x.2).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, items[c].1)]);
    Ok(QuasiSpectrum {
        phases,
        eigenvectors,
        residuals,
    })
}

impl QuasiSpectrum {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `max |V^† V - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        linalg::unitarity_residual(&self.eigenvectors)
    }

    /// `index,phase,residual` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,phase,residual\n");
        for (i, (p, r)) in self.phases.iter().zip(&self.residuals).enumerate() {
            out.push_str(&format!("{i},{p:.17e},{r:.6e}\n"));
        }
        out
    }

    /// Writes the eigenvectors as: `u64` rows, `u64` columns, then
    /// column-major `(re, im)` pairs of `f64`, all little-endian.
    pub fn write_eigenvectors(&self, w: &mut impl Write) -> std::io::Result<()> {
        write_matrix(&self.eigenvectors, w)
    }
}

pub fn write_matrix(m: &DMatrix<Complex64>, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * m.len());
    for z in m.iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_matrix(r: &mut impl Read) -> Result<DMatrix<Complex64>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let count = rows
        .checked_mul(cols)
        .filter(|c| *c <= 1 << 28)
        .ok_or_else(|| Error::invalid(format!("matrix header {rows}x{cols} too large")))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        data.push(Complex64::new(re, f64::from_le_bytes(word)));
    }
    Ok(DMatrix::from_vec(rows, cols, data))
}

/// Evolves a normalized clock-chain state from `config.time_origin` to
/// `config.time_origin + t_final`. The step length is the period divided by
/// `config.steps`, shortened so that a whole number of steps fits.
pub fn evolve_state(
    psi0: &DVector<Complex64>,
    drive: &DriveProtocol,
    t_final: f64,
    config: &PropagatorConfig,
) -> Result<DVector<Complex64>> {
    validate_common(drive, config.steps)?;
    let dim = psi0.len();
    if dim < 2 {
        return Err(Error::invalid("clock-chain state needs at least two amplitudes"));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("initial state has norm {norm}, expected 1")));
    }
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::invalid(format!(
            "final time must be finite and non-negative, got {t_final}"
        )));
    }
    if t_final == 0.0 {
        return Ok(psi0.clone());
    }
    let nominal = drive.period() / config.steps as f64;
    let ratio = t_final / nominal;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    }
    .max(1);
    let dt = t_final / steps as f64;
    let mut psi = psi0.clone();
    let mut support = (0, dim - 1);
    if let (Some(a), Some(b)) = (
        psi.iter().position(|z| *z != ZERO),
        psi.iter().rposition(|z| *z != ZERO),
    ) {
        support = (a, b);
    }
    let stepping = Stepping {
        integrator: config.integrator,
        t0: config.time_origin,
        dt,
        steps,
    };
    propagate_clock(
        dim - 1,
        drive,
        stepping,
        psi.as_mut_slice(),
        std::slice::from_mut(&mut support),
    )?;
    Ok(psi)
}
