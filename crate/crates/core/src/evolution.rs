//! Survival amplitude `f00(t)`, the survival probability `|f00(t)|^2`, the
//! weak/strong closed-form series and their analytic lower bounds.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::{CouplingRegime, PhysicalConfig};
use crate::error::{Error, Result};
use crate::spectrum::{approximate_spectrum, solve_spectrum, SecularConvention, Spectrum};
use crate::weights::{tail_bound, weights_exact, weights_strong, weights_weak, CouplingWeights};

/// `sum_{k>=1} 1/k^2`.
pub const ZETA2: f64 = PI * PI / 6.0;

/// Vertex of the weak-coupling bound, `15 / (28 pi)`.
pub fn weak_vertex() -> f64 {
    15.0 / (28.0 * PI)
}

/// Non-zero root of the weak-coupling bound, `15 / (14 pi)`.
pub fn weak_upper_root() -> f64 {
    15.0 / (14.0 * PI)
}

fn check_lengths(frequencies: &[f64], weights: &[f64]) -> Result<()> {
    if frequencies.len() != weights.len() {
        return Err(Error::LengthMismatch {
            frequencies: frequencies.len(),
            weights: weights.len(),
        });
    }
    if frequencies.is_empty() {
        return Err(Error::InvalidArgument("no modes".into()));
    }
    Ok(())
}

/// `sum_r w_r exp(-i Omega_r t)`.
pub fn amplitude_from_parts(t: f64, frequencies: &[f64], weights: &[f64]) -> Result<Complex64> {
    check_lengths(frequencies, weights)?;
    Ok(frequencies
        .iter()
        .zip(weights)
        .rev()
        .map(|(&om, &w)| Complex64::from_polar(w, -om * t))
        .sum())
}

/// `|sum_r w_r exp(-i Omega_r t)|^2`.
///
/// Phases are taken relative to the first frequency so that large `Omega t`
/// does not cost precision; the modulus is unchanged.
pub fn survival_from_parts(t: f64, frequencies: &[f64], weights: &[f64]) -> Result<f64> {
    check_lengths(frequencies, weights)?;
    let base = frequencies[0];
    let z: Complex64 = frequencies
        .iter()
        .zip(weights)
        .rev()
        .map(|(&om, &w)| Complex64::from_polar(w, -(om - base) * t))
        .sum();
    Ok(z.norm_sqr())
}

/// The expanded cosine double series, `O(K^2)`.
pub fn survival_expanded_from_parts(t: f64, frequencies: &[f64], weights: &[f64]) -> Result<f64> {
    check_lengths(frequencies, weights)?;
    let (w0, wk) = (weights[0], &weights[1..]);
    let (om0, omk) = (frequencies[0], &frequencies[1..]);
    let mut cross = 0.0;
    for (&w, &om) in wk.iter().zip(omk) {
        cross += w * ((om - om0) * t).cos();
    }
    let mut double = 0.0;
    for (i, (&wi, &oi)) in wk.iter().zip(omk).enumerate() {
        double += wi * wi;
        for (&wj, &oj) in wk[i + 1..].iter().zip(&omk[i + 1..]) {
            double += 2.0 * wi * wj * ((oi - oj) * t).cos();
        }
    }
    Ok(w0 * w0 + 2.0 * w0 * cross + double)
}

pub fn amplitude_f00(t: f64, spectrum: &Spectrum, weights: &CouplingWeights) -> Result<Complex64> {
    amplitude_from_parts(t, spectrum.roots(), &weights.all())
}

pub fn survival_probability(t: f64, spectrum: &Spectrum, weights: &CouplingWeights) -> Result<f64> {
    survival_from_parts(t, spectrum.roots(), &weights.all())
}

pub fn survival_probability_expanded(
    t: f64,
    spectrum: &Spectrum,
    weights: &CouplingWeights,
) -> Result<f64> {
    survival_expanded_from_parts(t, spectrum.roots(), &weights.all())
}

/// Weak series in terms of its two sums:
/// `s1 = sum_k cos((Omega_k - Omega_0) t) / k^2`,
/// `s2 = sum_{k,l} cos((Omega_k - Omega_l) t) / (k^2 l^2)`.
pub fn weak_series_from_sums(delta: f64, s1: f64, s2: f64) -> f64 {
    1.0 - PI * delta
        + 4.0 * (delta / PI - delta * delta) * s1
        + PI * PI * delta * delta
        + 4.0 / (PI * PI) * delta * delta * s2
}

/// Strong series in terms of the same two sums.
pub fn strong_series_from_sums(delta: f64, s1: f64, s2: f64) -> f64 {
    let w0 = strong_w0(delta);
    w0 * w0 + w0 * (2.0 * delta / PI) * s1 + 4.0 / (PI * PI) * delta * delta * s2
}

fn strong_w0(delta: f64) -> f64 {
    2.0 / (2.0 + PI * delta)
}

/// Small-L frequencies prepared for repeated evaluation of the weak or strong series.
#[derive(Debug, Clone)]
pub struct SeriesModel {
    delta: f64,
    regime: CouplingRegime,
    /// `Omega_k - Omega_0` for `k = 1..=K`.
    gaps: Vec<f64>,
}

impl SeriesModel {
    pub fn new(config: &PhysicalConfig, regime: CouplingRegime, modes: usize) -> Result<Self> {
        let delta = config.delta();
        if regime == CouplingRegime::Weak && 1.0 - PI * delta < 0.0 {
            return Err(Error::DeltaTooLarge { delta });
        }
        let spectrum = approximate_spectrum(config, regime, modes)?;
        let roots = spectrum.roots();
        let gaps = roots[1..].iter().map(|&om| om - roots[0]).collect();
        Ok(SeriesModel {
            delta,
            regime,
            gaps,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn regime(&self) -> CouplingRegime {
        self.regime
    }

    pub fn modes(&self) -> usize {
        self.gaps.len()
    }

    /// `(s1, s2)` at time `t`, with `s2 = |sum_k exp(-i (Omega_k - Omega_0) t) / k^2|^2`.
    pub fn sums(&self, t: f64) -> (f64, f64) {
        let z: Complex64 = self
            .gaps
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &gap)| {
                let k = (i + 1) as f64;
                Complex64::from_polar(1.0 / (k * k), -gap * t)
            })
            .sum();
        (z.re, z.norm_sqr())
    }

    /// [`SeriesModel::sums`] with `s2` as the explicit `O(K^2)` cosine double sum.
    pub fn sums_expanded(&self, t: f64) -> (f64, f64) {
        let inv_sq = |i: usize| {
            let k = (i + 1) as f64;
            1.0 / (k * k)
        };
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for (i, &gi) in self.gaps.iter().enumerate().rev() {
            s1 += inv_sq(i) * (gi * t).cos();
            s2 += inv_sq(i) * inv_sq(i);
            for (j, &gj) in self.gaps.iter().enumerate().skip(i + 1).rev() {
                s2 += 2.0 * inv_sq(i) * inv_sq(j) * ((gi - gj) * t).cos();
            }
        }
        (s1, s2)
    }

    pub fn evaluate_with_sums(&self, (s1, s2): (f64, f64)) -> f64 {
        match self.regime {
            CouplingRegime::Weak => weak_series_from_sums(self.delta, s1, s2),
            CouplingRegime::Strong => strong_series_from_sums(self.delta, s1, s2),
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let (s1, s2) = self.sums(t);
        match self.regime {
            CouplingRegime::Weak => weak_series_from_sums(self.delta, s1, s2),
            CouplingRegime::Strong => strong_series_from_sums(self.delta, s1, s2),
        }
    }

    /// `2 tail(K)`.
    pub fn series_slack(&self) -> f64 {
        2.0 * tail_bound(self.delta, self.modes())
    }
}

pub fn survival_weak_series(t: f64, config: &PhysicalConfig, modes: usize) -> Result<f64> {
    Ok(SeriesModel::new(config, CouplingRegime::Weak, modes)?.evaluate(t))
}

pub fn survival_strong_series(t: f64, config: &PhysicalConfig, modes: usize) -> Result<f64> {
    Ok(SeriesModel::new(config, CouplingRegime::Strong, modes)?.evaluate(t))
}

/// Removes the leading `1/K` truncation error from values at `K` and `2K`.
pub fn richardson_1_over_k(at_k: f64, at_2k: f64) -> f64 {
    2.0 * at_2k - at_k
}

/// An analytic lower bound on the survival probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    /// False outside the range where the bound has a probabilistic reading.
    pub physical: bool,
}

/// `1 - (5 pi / 3) delta + (14 pi^2 / 9) delta^2`, physical for `delta <= 15 / (28 pi)`.
pub fn min_weak(delta: f64) -> Result<LowerBound> {
    if !(delta >= 0.0) {
        return Err(Error::NegativeDelta(delta));
    }
    let value = 1.0 - 5.0 * PI / 3.0 * delta + 14.0 * PI * PI / 9.0 * delta * delta;
    Ok(LowerBound {
        value,
        physical: delta <= weak_vertex(),
    })
}

/// `w0^2 - w0 pi delta / 3 - pi^2 delta^2 / 9` with `w0 = 2 / (2 + pi delta)`.
/// Returned unclamped; negative values are flagged unphysical.
pub fn min_strong(delta: f64) -> Result<LowerBound> {
    if !(delta >= 0.0) {
        return Err(Error::NegativeDelta(delta));
    }
    let w0 = strong_w0(delta);
    let value = w0 * w0 - w0 * PI * delta / 3.0 - PI * PI * delta * delta / 9.0;
    Ok(LowerBound {
        value,
        physical: value >= 0.0,
    })
}

pub fn min_bound(regime: CouplingRegime, delta: f64) -> Result<LowerBound> {
    match regime {
        CouplingRegime::Weak => min_weak(delta),
        CouplingRegime::Strong => min_strong(delta),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaMax {
    /// `(-1 + sqrt(-2 + 3 sqrt 5)) / pi`.
    pub closed_form: f64,
    /// Root of `min_strong` on `[0, 1]` by bisection.
    pub bisection: f64,
}

pub fn delta_max_strong() -> DeltaMax {
    let closed_form = (-1.0 + (-2.0 + 3.0 * 5f64.sqrt()).sqrt()) / PI;
    let f = |d: f64| min_strong(d).map(|b| b.value).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    DeltaMax {
        closed_form,
        bisection: 0.5 * (lo + hi),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub delta: f64,
    pub bound: LowerBound,
    /// `2 c delta / g`, when a config supplies `c` and `g`.
    pub l_equivalent: Option<f64>,
}

/// Uniform grid of `steps` points over `[lo, hi]`, both ends included.
pub fn scan_min(
    regime: CouplingRegime,
    lo: f64,
    hi: f64,
    steps: usize,
    config: Option<&PhysicalConfig>,
) -> Result<Vec<ScanRow>> {
    if !(lo >= 0.0) {
        return Err(Error::NegativeDelta(lo));
    }
    if !(hi > lo) || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty delta range [{lo}, {hi}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "scan needs at least 2 steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let delta = if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / last)
            };
            Ok(ScanRow {
                delta,
                bound: min_bound(regime, delta)?,
                l_equivalent: config.map(|c| 2.0 * c.light_speed() * delta / c.g()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Exact(SecularConvention),
    WeakApprox,
    StrongApprox,
}

/// Survival probability sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeries {
    pub times: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub lower_bound: LowerBound,
    pub kind: SeriesKind,
    pub series_slack: f64,
}

impl SurvivalSeries {
    pub fn sampled_min(&self) -> f64 {
        self.probabilities
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `steps` uniform instants over `[0, t_max]`.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 time samples, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|i| t_max * (i as f64 / last)).collect())
}

/// Samples the survival probability for `config` using `modes` bath modes.
///
/// The lower bound is the one for the regime of `config`.
pub fn evolve(
    config: &PhysicalConfig,
    kind: SeriesKind,
    modes: usize,
    times: &[f64],
) -> Result<SurvivalSeries> {
    let delta = config.delta();
    let probabilities = match kind {
        SeriesKind::Exact(convention) => {
            let spectrum = solve_spectrum(config, convention, modes)?;
            let weights = weights_exact(&spectrum, config)?;
            let freqs = spectrum.roots();
            let w = weights.all();
            times
                .iter()
                .map(|&t| survival_from_parts(t, freqs, &w))
                .collect::<Result<Vec<_>>>()?
        }
        SeriesKind::WeakApprox | SeriesKind::StrongApprox => {
            let regime = if kind == SeriesKind::WeakApprox {
                CouplingRegime::Weak
            } else {
                CouplingRegime::Strong
            };
            let model = SeriesModel::new(config, regime, modes)?;
            times.iter().map(|&t| model.evaluate(t)).collect()
        }
    };
    let regime = match kind {
        SeriesKind::WeakApprox => CouplingRegime::Weak,
        SeriesKind::StrongApprox => CouplingRegime::Strong,
        SeriesKind::Exact(_) => config.regime(),
    };
    Ok(SurvivalSeries {
        times: times.to_vec(),
        probabilities,
        lower_bound: min_bound(regime, delta)?,
        kind,
        series_slack: 2.0 * tail_bound(delta, modes),
    })
}

/// Approximate weights matching a series regime.
pub fn approximate_weights(
    regime: CouplingRegime,
    delta: f64,
    modes: usize,
) -> Result<CouplingWeights> {
    match regime {
        CouplingRegime::Weak => weights_weak(delta, modes),
        CouplingRegime::Strong => weights_strong(delta, modes),
    }
}
