//! Closed forms for the undriven clock chain and the tilted-chain Bloch
//! oscillation probe.
//!
//! With `J = 1`, `A = 0` the clock chain is the open hopping chain on
//! `N + 1` sites, with modes `E_m = 2 cos(mπ/(N+2))` and amplitudes
//! `c_j = sqrt(2/(N+2)) sin((j+1) mπ/(N+2))`, `m = 1..=N+1`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entanglement::{entropy_of_probabilities, EntanglementReport};
use crate::error::{Error, Result};
use crate::floquet::{evolve_state, PropagatorConfig};
use crate::hamiltonian::DriveProtocol;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactEigenpair {
    pub m: usize,
    pub energy: f64,
    pub amplitudes: Vec<f64>,
}

pub fn exact_eigenpair(n: usize, m: usize) -> Result<ExactEigenpair> {
    if n == 0 || m == 0 || m > n + 1 {
        return Err(Error::invalid(format!("mode {m} outside 1..={} for {n} sites", n + 1)));
    }
    let theta = m as f64 * PI / (n + 2) as f64;
    let scale = (2.0 / (n + 2) as f64).sqrt();
    Ok(ExactEigenpair {
        m,
        energy: 2.0 * theta.cos(),
        amplitudes: (0..=n).map(|j| scale * ((j + 1) as f64 * theta).sin()).collect(),
    })
}

/// All `N + 1` modes, energies descending in `m`.
pub fn exact_spectrum(n: usize) -> Result<Vec<ExactEigenpair>> {
    (1..=n + 1).map(|m| exact_eigenpair(n, m)).collect()
}

/// Half-cut entanglement of mode `m` from closed-form sums.
///
/// The reduced matrix lives on `{e_0, b}` with
/// `ρ_00 = Σ_{j<=N/2} c_j² = 1/2 - sin(mπ/2) cos((N+4)mπ/(2(N+2))) / ((N+2) sin(mπ/(N+2)))`,
/// tail weight `β = 1 - ρ_00`, and `Tr ρ² = ρ_00² + β² + 2 c_{N/2}² β` with
/// `c_{N/2}² = (2/(N+2)) sin²(mπ/2)`.
pub fn oracle_half_chain_report(n: usize, m: usize) -> Result<EntanglementReport> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "half-chain oracle needs an even number of sites, got {n}"
        )));
    }
    if m == 0 || m > n + 1 {
        return Err(Error::invalid(format!("mode {m} outside 1..={}", n + 1)));
    }
    let np2 = (n + 2) as f64;
    let theta = m as f64 * PI / np2;
    let half_turn = (m as f64 * PI / 2.0).sin();
    let alpha = 0.5 - half_turn * ((n + 4) as f64 * m as f64 * PI / (2.0 * np2)).cos() / (np2 * theta.sin());
    let overlap = 2.0 / np2 * half_turn * half_turn;
    let beta = 1.0 - alpha;
    let purity = alpha * alpha + beta * beta + 2.0 * overlap * beta;
    let det = 0.5 * (1.0 - purity);
    let p_plus = 0.5 * (1.0 + (2.0 * purity - 1.0).max(0.0).sqrt());
    let p_minus = det / p_plus;
    Ok(EntanglementReport {
        entropy: entropy_of_probabilities([p_plus, p_minus]),
        schmidt_rank: [p_plus, p_minus]
            .iter()
            .filter(|p| p.sqrt() > crate::entanglement::RANK_THRESHOLD)
            .count(),
        singular_values: vec![p_plus.sqrt(), p_minus.sqrt()],
    })
}

pub fn oracle_half_chain_entropy(n: usize, m: usize) -> Result<f64> {
    Ok(oracle_half_chain_report(n, m)?.entropy)
}

/// `m,energy,entropy` table; the entropy column is empty for odd `N`.
pub fn oracle_table_csv(n: usize) -> Result<String> {
    let mut out = String::from("m,energy,entropy\n");
    for pair in exact_spectrum(n)? {
        let entropy = if n.is_multiple_of(2) {
            format!("{:.17e}", oracle_half_chain_entropy(n, pair.m)?)
        } else {
            String::new()
        };
        writeln!(out, "{},{:.17e},{}", pair.m, pair.energy, entropy).unwrap();
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochSample {
    pub t: f64,
    pub mean_k: f64,
    /// `|⟨ψ(0)|ψ(t)⟩|`.
    pub fidelity: f64,
    /// Standard deviation of `k`.
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochSeries {
    pub n: usize,
    pub a: f64,
    /// `π / A`, from the `2A` spacing of the tilted diagonal; infinite at `A = 0`.
    pub predicted_period: f64,
    pub samples: Vec<BlochSample>,
    /// Probability above `EDGE_PROBABILITY` came within 2 sites of an end.
    pub edge_contact: bool,
}

pub const EDGE_PROBABILITY: f64 = 1e-8;

/// Evolves `|N/2⟩` under `H = Σ_k A(2k - N)|k⟩⟨k| + (|k⟩⟨k+1| + h.c.)`
/// and samples `samples + 1` equally spaced times in `[0, t_max]`.
pub fn bloch_oscillation_probe(n: usize, a: f64, t_max: f64, samples: usize) -> Result<BlochSeries> {
    if n < 2 {
        return Err(Error::invalid("Bloch probe needs at least two sites"));
    }
    if !(a.is_finite() && t_max.is_finite() && t_max > 0.0) || samples == 0 {
        return Err(Error::invalid(
            "Bloch probe needs finite A, positive t_max and at least one sample",
        ));
    }
    let dt = t_max / samples as f64;
    // constant drive: each sample interval is one exact exponential pair
    let drive = DriveProtocol::constant(2.0 * PI / dt, 1.0, a, 0.0);
    let config = PropagatorConfig {
        steps: 2,
        ..PropagatorConfig::default()
    };
    let mut psi0 = DVector::<Complex64>::zeros(n + 1);
    psi0[n / 2] = Complex64::new(1.0, 0.0);
    let mut psi = psi0.clone();
    let mut out = Vec::with_capacity(samples + 1);
    let mut edge_contact = false;
    for i in 0..=samples {
        if i > 0 {
            psi = evolve_state(&psi, &drive, dt, &config)?;
        }
        let probs: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let mean_k: f64 = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let var: f64 = probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean_k).powi(2) * p)
            .sum();
        edge_contact |= probs[..2].iter().chain(&probs[n - 1..]).any(|p| *p > EDGE_PROBABILITY);
        out.push(BlochSample {
            t: i as f64 * dt,
            mean_k,
            fidelity: psi0.dotc(&psi).norm(),
            width: var.max(0.0).sqrt(),
        });
    }
    Ok(BlochSeries {
        n,
        a,
        predicted_period: if a == 0.0 { f64::INFINITY } else { PI / a.abs() },
        samples: out,
        edge_contact,
    })
}

impl BlochSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mean_k,fidelity\n");
        for s in &self.samples {
            writeln!(out, "{:.10e},{:.17e},{:.17e}", s.t, s.mean_k, s.fidelity).unwrap();
        }
        out
    }

    /// Time of the first fidelity maximum after the fidelity has fallen
    /// below one half, refined by a parabola through the three samples.
    pub fn fitted_revival_time(&self) -> Option<f64> {
        let f: Vec<f64> = self.samples.iter().map(|s| s.fidelity).collect();
        let start = f.iter().position(|x| *x < 0.5)?;
        let i = (start + 1..f.len().saturating_sub(1)).find(|&i| f[i] >= f[i - 1] && f[i] >= f[i + 1] && f[i] > 0.5)?;
        let (y0, y1, y2) = (f[i - 1], f[i], f[i + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        let shift = if denom.abs() > 0.0 {
            0.5 * (y0 - y2) / denom
        } else {
            0.0
        };
        let dt = self.samples[1].t - self.samples[0].t;
        Some(self.samples[i].t + shift * dt)
    }

    /// Sample nearest to `t`.
    pub fn at(&self, t: f64) -> &BlochSample {
        self.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("series has at least one sample")
    }
}
