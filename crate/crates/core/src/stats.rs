//! Nearest-neighbour spacing statistics of eigenphases on the unit circle.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spacings normalized to unit mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacingSample {
    spacings: Vec<f64>,
}

impl SpacingSample {
    /// Normalizes non-negative raw spacings by their mean.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("empty spacing sample"));
        }
        if raw.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("spacings must be finite and non-negative"));
        }
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        if mean <= 0.0 {
            return Err(Error::invalid("all spacings are zero"));
        }
        Ok(SpacingSample {
            spacings: raw.iter().map(|s| s / mean).collect(),
        })
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn len(&self) -> usize {
        self.spacings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spacings.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.len() as f64
    }
}

/// Gaps between consecutive sorted phases, closing with
/// `phases[0] + 2π - phases[n-1]`.
fn raw_circle_gaps(phases: &[f64]) -> Result<Vec<f64>> {
    if phases
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
    {
        return Err(Error::invalid("phases must be sorted ascending"));
    }
    if phases.iter().any(|p| !(*p > -PI - 1e-12 && *p <= PI + 1e-12)) {
        return Err(Error::invalid("phases must lie in (-π, π]"));
    }
    let n = phases.len();
    let mut gaps: Vec<f64> = phases.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(phases[0] + TAU - phases[n - 1]);
    Ok(gaps)
}

/// Circle spacings of sorted phases, normalized by their mean `2π / n`.
pub fn circle_spacings(phases: &[f64]) -> Result<SpacingSample> {
    if phases.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 phases, got {}", phases.len())));
    }
    SpacingSample::from_raw(&raw_circle_gaps(phases)?)
}

/// Wigner surmise density `(π/2) s exp(-π s² / 4)`.
pub fn coe_density(s: f64) -> f64 {
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

/// Wigner surmise distribution `1 - exp(-π s² / 4)`.
pub fn coe_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -(-0.25 * PI * s * s).exp_m1()
    }
}

/// `sup_s |F_n(s) - F(s)|` against the Wigner surmise.
pub fn ks_distance_coe(sample: &SpacingSample) -> f64 {
    let mut s = sample.spacings.clone();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = coe_cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Mean of `min(s_n, s_{n+1}) / max(s_n, s_{n+1})` over consecutive circle
/// spacings, cyclically. A pair of zero spacings contributes 0.
pub fn mean_r_statistic(phases: &[f64]) -> Result<f64> {
    if phases.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 phases, got {}", phases.len())));
    }
    let gaps = raw_circle_gaps(phases)?;
    let n = gaps.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (a, b) = (gaps[i], gaps[(i + 1) % n]);
            let hi = a.max(b);
            if hi > 0.0 {
                a.min(b) / hi
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / n as f64)
}

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.1;
pub const HISTOGRAM_MAX: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramBin {
    pub center: f64,
    /// Fraction of the whole sample in this bin divided by the bin width.
    pub empirical: f64,
    pub coe: f64,
}

/// Density histogram on `[0, 4)` with bins of width 0.1. Spacings beyond
/// the range count toward normalization but fall in no bin.
pub fn spacing_histogram(sample: &SpacingSample) -> Vec<HistogramBin> {
    let bins = (HISTOGRAM_MAX / HISTOGRAM_BIN_WIDTH).round() as usize;
    let mut counts = vec![0usize; bins];
    for &s in &sample.spacings {
        let b = (s / HISTOGRAM_BIN_WIDTH).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        }
    }
    let norm = sample.len() as f64 * HISTOGRAM_BIN_WIDTH;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let center = (i as f64 + 0.5) * HISTOGRAM_BIN_WIDTH;
            HistogramBin {
                center,
                empirical: c as f64 / norm,
                coe: coe_density(center),
            }
        })
        .collect()
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("s,P_empirical,P_coe\n");
    for b in bins {
        writeln!(out, "{:.2},{:.8},{:.8}", b.center, b.empirical, b.coe).unwrap();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub ks: f64,
    pub mean_r: f64,
    pub count: usize,
}

pub fn spectral_report(phases: &[f64]) -> Result<SpectralReport> {
    let sample = circle_spacings(phases)?;
    Ok(SpectralReport {
        ks: ks_distance_coe(&sample),
        mean_r: mean_r_statistic(phases)?,
        count: sample.len(),
    })
}

/// Inverse-CDF draw from the Wigner surmise for `u ∈ [0, 1)`.
pub fn coe_quantile(u: f64) -> f64 {
    (-4.0 * (-u).ln_1p() / PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted_uniform_phases(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        let mut p: Vec<f64> = (0..n).map(|_| PI - TAU * rng.gen::<f64>()).collect();
        p.sort_by(f64::total_cmp);
        p
    }

    #[test]
    fn equally_spaced_phases() {
        let s = circle_spacings(&[-PI / 2.0, 0.0, PI / 2.0, PI]).unwrap();
        assert!(s.spacings().iter().all(|x| (x - 1.0).abs() < 1e-15));
        assert!((mean_r_statistic(&[-PI / 2.0, 0.0, PI / 2.0, PI]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spacing_count_and_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phases = sorted_uniform_phases(37, &mut rng);
        let gaps = raw_circle_gaps(&phases).unwrap();
        assert_eq!(gaps.len(), 37);
        assert!((gaps.iter().sum::<f64>() - TAU).abs() < 1e-12);
        assert!(circle_spacings(&phases[..2]).is_err());
        assert!(circle_spacings(&[0.2, 0.1, 0.3]).is_err());
    }

    #[test]
    fn degenerate_sample_ks() {
        let s = SpacingSample::from_raw(&[1.0; 50]).unwrap();
        let f = (-PI / 4.0).exp();
        assert!((ks_distance_coe(&s) - f.max(1.0 - f)).abs() < 1e-12);
        assert!((ks_distance_coe(&s) - 0.544).abs() < 1e-3);
    }

    #[test]
    fn cdf_limits() {
        assert_eq!(coe_cdf(0.0), 0.0);
        assert!((coe_cdf(1e3) - 1.0).abs() < 1e-15);
        assert!((coe_quantile(coe_cdf(1.3)) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn alternating_spacings_ratio() {
        let mut phases = vec![0.0];
        for i in 0..19 {
            let step = if i % 2 == 0 { 1.0 } else { 2.0 };
            phases.push(phases.last().unwrap() + step);
        }
        // 20 gaps alternating 1,2 with the closing gap of 2
        let total = phases.last().unwrap() + 2.0;
        let phases: Vec<f64> = phases.iter().map(|p| p * TAU / total - PI + 1e-9).collect();
        assert!((mean_r_statistic(&phases).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_spacing_pairs_count_as_zero() {
        let phases = [0.0, 0.0, 0.0, 1.0];
        // gaps 0, 0, 1, 2π-1: ratios 0 (0/0), 0, 1/(2π-1), 0
        let expect = (1.0 / (TAU - 1.0)) / 4.0;
        assert!((mean_r_statistic(&phases).unwrap() - expect).abs() < 1e-12);
        assert!(mean_r_statistic(&phases[..3]).is_err());
    }

    #[test]
    fn poisson_phases_are_far_from_coe() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phases = sorted_uniform_phases(4000, &mut rng);
        let report = spectral_report(&phases).unwrap();
        assert!(report.ks > 0.15, "{report:?}");
        assert!((report.mean_r - 0.386).abs() < 0.02, "{report:?}");
        // exponential spacings put the histogram peak at s = 0
        let hist = spacing_histogram(&circle_spacings(&phases).unwrap());
        assert!(hist[0].empirical > 0.8 && hist[0].coe < 0.1);
    }

    #[test]
    fn calibration_of_ks_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut ks: Vec<f64> = (0..200)
            .map(|_| {
                let raw: Vec<f64> = (0..1000).map(|_| coe_quantile(rng.gen())).collect();
                ks_distance_coe(&SpacingSample::from_raw(&raw).unwrap())
            })
            .collect();
        ks.sort_by(f64::total_cmp);
        let p95 = ks[189];
        assert!(p95 < 0.05, "95th percentile {p95}");
        // a single typical draw sits near the median
        assert!(ks[100] < 0.043);
    }

    #[test]
    fn histogram_layout() {
        let s = SpacingSample::from_raw(&[0.05, 0.15, 0.15, 5.0]).unwrap();
        let hist = spacing_histogram(&s);
        assert_eq!(hist.len(), 40);
        assert!((hist[0].center - 0.05).abs() < 1e-12);
        let csv = histogram_csv(&hist);
        assert!(csv.starts_with("s,P_empirical,P_coe\n0.05,"));
        assert_eq!(csv.lines().count(), 41);
    }

    #[test]
    fn report_serializes_with_expected_keys() {
        let r = SpectralReport {
            ks: 0.1,
            mean_r: 0.5,
            count: 3,
        };
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["count"], 3);
        assert!(json.get("ks").is_some() && json.get("mean_r").is_some());
    }

    proptest! {
        #[test]
        fn normalized_mean_is_one(raw in prop::collection::vec(0.0f64..10.0, 3..200)) {
            prop_assume!(raw.iter().any(|x| *x > 0.0));
            let s = SpacingSample::from_raw(&raw).unwrap();
            prop_assert!((s.mean() - 1.0).abs() < 1e-12);
            prop_assert!(s.spacings().iter().all(|x| *x >= 0.0));
        }

        #[test]
        fn ks_is_rotation_invariant(seed in 0u64..1000, shift in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phases = sorted_uniform_phases(50, &mut rng);
            let mut rotated: Vec<f64> = phases.iter().map(|p| {
                let x = (p + shift + PI).rem_euclid(TAU) - PI;
                if x == -PI { PI } else { x }
            }).collect();
            rotated.sort_by(f64::total_cmp);
            let a = ks_distance_coe(&circle_spacings(&phases).unwrap());
            let b = ks_distance_coe(&circle_spacings(&rotated).unwrap());
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
