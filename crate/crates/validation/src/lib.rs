//! End-to-end acceptance checks. Each check runs at its stated tolerance
//! and reports the measured quantities alongside the verdict, so a failure
//! shows how far off it was.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockade::entanglement::{entropy_sweep, median_entropy, SweepRow};
use blockade::floquet::floquet_operator_with;
use blockade::linalg::{hermitian_eigen, hermitian_expm};
use blockade::stats::spectral_report;
use blockade::{
    bloch_oscillation_probe, build_clock_hamiltonian, build_full_hamiltonian, build_hamming_graph,
    build_walk_hamiltonian, clock_entropy_rank2, design_pipeline, enumerate_solutions, exact_spectrum, is_median_graph,
    oracle_half_chain_entropy, quasi_spectrum, recover_2sat, Clause, ConstraintSet, DesignOptions, DetuningSign,
    DriveProtocol, Error, FullChainParams, Pattern, PropagatorConfig, Result, SolutionSpace, SparsityPattern,
};

/// Driving frequency of the chaotic regime.
pub const CHAOS_OMEGA: f64 = 0.9071;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(id: u8, title: &'static str, check: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn hopping_chain(n: usize) -> Result<blockade::HermitianTridiagonal> {
    build_clock_hamiltonian(n, 0.0, &DriveProtocol::constant(1.0, 1.0, 0.0, 0.0))
}

fn column(m: &DMatrix<Complex64>, i: usize) -> Vec<Complex64> {
    m.column(i).iter().copied().collect()
}

/// Undriven clock spectrum against `2 cos(mπ/(N+2))` at 1e-10, each size
/// under 10 s.
pub fn exact_spectrum_check() -> Outcome {
    timed(1, "exact-oracle spectrum", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for n in [100usize, 1000] {
            let start = Instant::now();
            let numeric = hopping_chain(n)?.eigenvalues()?;
            let secs = start.elapsed().as_secs_f64();
            let mut exact: Vec<f64> = exact_spectrum(n)?.iter().map(|p| p.energy).collect();
            exact.sort_by(f64::total_cmp);
            let err = numeric
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ok &= numeric.len() == n + 1 && err <= 1e-10 && secs < 10.0;
            parts.push(format!("N={n} max|dE|={err:.1e} in {secs:.2} s"));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// Worst odd-m entropy deviation from ln 2, from numerical eigenvectors.
fn odd_mode_deviation(n: usize, vectors: &DMatrix<Complex64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        // Ascending energy index i holds mode m = N + 1 - i.
        let m = n + 1 - i;
        if m % 2 == 1 {
            let s = clock_entropy_rank2(&column(vectors, i))?.entropy;
            worst = worst.max((s - LN_2).abs());
        }
    }
    Ok(worst)
}

/// Even modes sit at ln 2; odd-mode deviation shrinks with N.
pub fn entropy_dichotomy_check() -> Outcome {
    timed(2, "exact entropy dichotomy", || {
        let (_, vectors) = hopping_chain(100)?.eigen()?;
        let mut even_err: f64 = 0.0;
        for i in 0..=100usize {
            let m = 101 - i;
            if m % 2 == 0 {
                let s = clock_entropy_rank2(&column(&vectors, i))?.entropy;
                even_err = even_err.max((s - LN_2).abs());
            }
        }
        let sizes = [100usize, 200, 400, 800];
        let mut numeric = Vec::new();
        let mut closed = Vec::new();
        for &n in &sizes {
            let (_, v) = hopping_chain(n)?.eigen()?;
            numeric.push(odd_mode_deviation(n, &v)?);
            let mut worst: f64 = 0.0;
            for m in (1..=n + 1).step_by(2) {
                worst = worst.max((oracle_half_chain_entropy(n, m)? - LN_2).abs());
            }
            closed.push(worst);
        }
        let decreasing = |d: &[f64]| d.windows(2).all(|w| w[1] < w[0]);
        let ok = even_err <= 1e-10 && decreasing(&numeric) && decreasing(&closed);
        let fmt = |d: &[f64]| d.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
        Ok((
            ok,
            format!(
                "N=100 even-m max|S-ln2|={even_err:.1e}; odd-m max|S-ln2| over N={sizes:?}: numeric [{}], closed form [{}]",
                fmt(&numeric),
                fmt(&closed)
            ),
        ))
    })
}

/// Measurements of the blockaded chain against its projected walk.
#[derive(Clone, Debug)]
pub struct ProjectionReport {
    /// `max_t max_k (1 - ‖P e^{-iHt}|k⟩‖²)` over all clock states `k`.
    pub max_leakage: f64,
    /// `max_t max |P e^{-iHt} P - e^{-iH_eff t}|` entrywise.
    pub max_entry_diff: f64,
    /// Same after removing the best global phase at each time.
    pub max_entry_diff_phase_aligned: f64,
    pub leakage_bound: f64,
}

/// Full `2^N` evolution of the static chain on `samples` equally spaced times
/// in `(0, periods · 2π/ω_drive]`.
pub fn projection_report(p: &FullChainParams, periods: f64, samples: usize) -> Result<ProjectionReport> {
    let space = SolutionSpace::clock(p.n);
    let h_full = build_full_hamiltonian(p)?;
    let (energies, vectors) = hermitian_eigen(&h_full);
    let h_eff = build_walk_hamiltonian(&space, p.omega, p.delta, DetuningSign::Negative).to_dense();
    let rows: Vec<usize> = space
        .states()
        .iter()
        .map(|s| s.to_index().map(|i| i as usize))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::invalid("chain too long for a dense index"))?;
    // Rows of the eigenvector matrix restricted to the clock states.
    let vk = DMatrix::from_fn(rows.len(), energies.len(), |r, c| vectors[(rows[r], c)]);
    let t_end = periods * 2.0 * PI / CHAOS_OMEGA;
    let mut report = ProjectionReport {
        max_leakage: 0.0,
        max_entry_diff: 0.0,
        max_entry_diff_phase_aligned: 0.0,
        leakage_bound: 5.0 * (p.omega / p.v).powi(2),
    };
    for step in 1..=samples {
        let t = t_end * step as f64 / samples as f64;
        let phases = DVector::from_iterator(
            energies.len(),
            energies.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
        );
        let mut scaled = vk.clone();
        for (mut col, ph) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *ph;
        }
        // P e^{-iHt} P in the clock basis.
        let projected = &scaled * vk.adjoint();
        let effective = hermitian_expm(&h_eff, t);
        for k in 0..rows.len() {
            let kept = projected.column(k).norm_squared();
            report.max_leakage = report.max_leakage.max(1.0 - kept);
        }
        let diff = (&projected - &effective).iter().map(|z| z.norm()).fold(0.0, f64::max);
        report.max_entry_diff = report.max_entry_diff.max(diff);
        let overlap: Complex64 = effective.iter().zip(projected.iter()).map(|(e, q)| e.conj() * q).sum();
        let align = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let aligned = (&projected - &effective * align)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        report.max_entry_diff_phase_aligned = report.max_entry_diff_phase_aligned.max(aligned);
    }
    Ok(report)
}

/// N=8, V=50, Ω=1, Δ=0.3 over five drive periods.
pub fn projection_check() -> Outcome {
    timed(3, "projection validity", || {
        let p = FullChainParams {
            n: 8,
            v: 50.0,
            omega: 1.0,
            delta: 0.3,
            phi: 0.0,
        };
        let r = projection_report(&p, 5.0, 1000)?;
        let ok = r.max_leakage < r.leakage_bound && r.max_entry_diff <= 1e-2;
        Ok((
            ok,
            format!(
                "max leakage {:.4e} vs bound {:.4e}; max propagator entry diff {:.4e} (phase-aligned {:.4e}) vs 1e-2",
                r.max_leakage, r.leakage_bound, r.max_entry_diff, r.max_entry_diff_phase_aligned
            ),
        ))
    })
}

/// Floquet spectrum and eigenstate sweep of the driven clock chain.
#[derive(Clone, Debug)]
pub struct ChaosRun {
    pub n: usize,
    pub ks: f64,
    pub mean_r: f64,
    pub rows: Vec<SweepRow>,
    pub max_quasi_residual: f64,
    pub elapsed: Duration,
}

pub fn chaos_run(n: usize) -> Result<ChaosRun> {
    let start = Instant::now();
    let fop = floquet_operator_with(n, &DriveProtocol::standard(CHAOS_OMEGA), &PropagatorConfig::default())?;
    let spec = quasi_spectrum(&fop)?;
    let report = spectral_report(&spec.phases)?;
    let rows = entropy_sweep(&spec, n / 4)?;
    Ok(ChaosRun {
        n,
        ks: report.ks,
        mean_r: report.mean_r,
        rows,
        max_quasi_residual: spec.max_residual(),
        elapsed: start.elapsed(),
    })
}

pub fn chaos_statistics_check(runs: &[ChaosRun]) -> Outcome {
    timed(4, "chaos statistics", || {
        let mut ok = runs.len() == 2;
        let mut parts = Vec::new();
        for r in runs {
            ok &= r.ks <= 0.05 && (0.50..=0.56).contains(&r.mean_r) && r.elapsed.as_secs_f64() < 1800.0;
            parts.push(format!(
                "N={} KS={:.4} mean-r={:.4} ({:.1} s)",
                r.n,
                r.ks,
                r.mean_r,
                r.elapsed.as_secs_f64()
            ));
        }
        Ok((
            ok,
            format!("{}; need KS <= 0.05 and mean-r in [0.50, 0.56]", parts.join("; ")),
        ))
    })
}

pub fn entanglement_bound_check(runs: &[ChaosRun]) -> Outcome {
    timed(5, "entanglement bound under chaos", || {
        let mut ok = runs.len() == 2;
        let mut parts = Vec::new();
        for r in runs {
            let max = r.rows.iter().map(|row| row.entropy).fold(0.0, f64::max);
            let median = median_entropy(&r.rows).unwrap_or(f64::NAN);
            ok &= max <= LN_2 + 1e-9;
            parts.push(format!("N={} max S={max:.12} median S={median:.4}", r.n));
        }
        Ok((ok, format!("{} (ln 2 = {LN_2:.12})", parts.join("; "))))
    })
}

pub fn locality_check(runs: &[ChaosRun]) -> Outcome {
    timed(6, "infinite-temperature locality", || {
        let run = runs
            .iter()
            .find(|r| r.n == 1000)
            .ok_or_else(|| Error::invalid("no N=1000 run"))?;
        let mean_abs = run.rows.iter().map(|r| r.x_expectation.abs()).sum::<f64>() / run.rows.len() as f64;
        let max_abs = run.rows.iter().map(|r| r.x_expectation.abs()).fold(0.0, f64::max);
        Ok((
            mean_abs <= 0.05,
            format!(
                "N=1000 site {}: mean |<X>|={mean_abs:.4e}, max |<X>|={max_abs:.4e}",
                run.n / 4
            ),
        ))
    })
}

/// Random clause set over `n` variables with at most `2n` clauses.
pub fn random_clause_set(rng: &mut impl Rng, n: usize) -> ConstraintSet {
    let mut set = ConstraintSet::new(n);
    let count = rng.gen_range(1..=2 * n);
    for _ in 0..count {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let forbidden = Pattern::ALL[rng.gen_range(0..4)];
        set.add(Clause::new(a, b, forbidden).expect("distinct indices"))
            .expect("indices in range");
    }
    set
}

pub fn duality_check() -> Outcome {
    timed(7, "duality round trip", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut tried, mut round_trips) = (0usize, 0usize);
        while round_trips < 100 {
            tried += 1;
            let n = rng.gen_range(2..=12);
            let set = random_clause_set(&mut rng, n);
            let space = match enumerate_solutions(&set) {
                Ok(s) => s,
                Err(Error::Unsatisfiable { .. }) => continue,
                Err(e) => return Err(e),
            };
            let again = enumerate_solutions(&recover_2sat(&space)?)?;
            if again.states() != space.states() {
                return Ok((
                    false,
                    format!("round trip changed the solution set at N={n}: {}", set.to_text()),
                ));
            }
            round_trips += 1;
        }
        let pxp = enumerate_solutions(&ConstraintSet::pxp_chain(10))?;
        let pxp_median = is_median_graph(&build_hamming_graph(&pxp))?.is_median;
        let mut clocks_median = true;
        for n in 1..=16 {
            clocks_median &= is_median_graph(&build_hamming_graph(&SolutionSpace::clock(n)))?.is_median;
        }
        let ok = pxp.len() == 144 && pxp_median && clocks_median;
        Ok((
            ok,
            format!(
                "{round_trips} satisfiable random sets round-tripped ({} unsatisfiable skipped); PXP N=10 has {} states, median={pxp_median}; clock N<=16 median={clocks_median}",
                tried - round_trips,
                pxp.len()
            ),
        ))
    })
}

pub fn ln3_construction_check() -> Outcome {
    timed(8, "ln 3 construction", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let draws = (0..10)
            .map(|_| (rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let options = DesignOptions {
            draws,
            ..DesignOptions::default()
        };
        let ln3 = 3f64.ln();
        let mut ok = true;
        let mut parts = Vec::new();
        for n in [4usize, 8, 12] {
            let outcome = design_pipeline(&SparsityPattern::c3(n / 2), n, &options)?;
            match outcome.certificate() {
                Some(c) => {
                    ok &= c.rank_bound == 3 && c.round_trip && c.max_entropy <= ln3 + 1e-9;
                    parts.push(format!(
                        "C3 N={n}: {} states, max S={:.10}",
                        c.state_count, c.max_entropy
                    ));
                }
                None => {
                    ok = false;
                    parts.push(format!("C3 N={n} rejected: {outcome:?}"));
                }
            }
        }
        let cross = design_pipeline(&SparsityPattern::cross(4), 8, &options)?;
        match cross.certificate() {
            Some(c) => {
                ok &= c.rank_bound == 2 && (c.entropy_bound - LN_2).abs() < 1e-15 && c.max_entropy <= LN_2 + 1e-9;
                parts.push(format!(
                    "cross N=8: bound {:.10}, max S={:.10}",
                    c.entropy_bound, c.max_entropy
                ));
            }
            None => {
                ok = false;
                parts.push(format!("cross rejected: {cross:?}"));
            }
        }
        Ok((ok, format!("{} (ln 3 = {ln3:.10})", parts.join("; "))))
    })
}

pub fn bloch_check() -> Outcome {
    timed(9, "Bloch oscillations", || {
        let (n, a) = (200usize, 0.5);
        let period = PI / a;
        let tilted = bloch_oscillation_probe(n, a, 2.0 * period, 4000)?;
        let flat = bloch_oscillation_probe(n, 0.0, 2.0 * period, 4000)?;
        let at = tilted.at(period);
        let start = &tilted.samples[0];
        let mean_shift = (at.mean_k - start.mean_k).abs();
        let fitted = tilted.fitted_revival_time();
        let fit_err = fitted.map_or(f64::INFINITY, |t| (t - period).abs() / period);
        let flat_fid = flat.at(period).fidelity;
        // A revival is a return to the initial state after the packet has left it.
        let flat_revival = flat
            .samples
            .iter()
            .skip_while(|s| s.fidelity >= 0.5)
            .any(|s| s.fidelity >= 0.999);
        let ok = at.fidelity >= 0.999 && mean_shift <= 1e-3 && fit_err <= 1e-2 && !flat_revival && !tilted.edge_contact;
        Ok((
            ok,
            format!(
                "A=0.5: fidelity at pi/A {:.6}, |mean_k shift| {mean_shift:.1e}, fitted period {} (rel err {fit_err:.1e}); A=0: fidelity at pi/A {flat_fid:.3e}, revival={flat_revival}",
                at.fidelity,
                fitted.map_or("none".to_string(), |t| format!("{t:.5}")),
            ),
        ))
    })
}

/// Every check, in order.
pub fn run_all(mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let mut out = Vec::new();
    let mut push = |o: Outcome| {
        report(&o);
        out.push(o);
    };
    push(exact_spectrum_check());
    push(entropy_dichotomy_check());
    push(projection_check());
    let mut runs = Vec::new();
    for n in [500usize, 1000] {
        match chaos_run(n) {
            Ok(r) => runs.push(r),
            Err(e) => eprintln!("Floquet run at N={n} failed: {e}"),
        }
    }
    push(chaos_statistics_check(&runs));
    push(entanglement_bound_check(&runs));
    push(locality_check(&runs));
    push(duality_check());
    push(ln3_construction_check());
    push(bloch_check());
    out
}
