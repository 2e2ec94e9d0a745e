//! Principal-axis matrix elements `t_0^r`, `t_k^r` and the squared weights
//! `(t_0^r)^2` that drive the survival probability.

use std::f64::consts::PI;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Relative guard on `omega_k^2 - Omega_r^2`.
pub const TKR_RESONANCE_GUARD: f64 = 1e-12;
/// Allowed deviation of exact weights from the unit sum rule, beyond the truncation tail.
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    Exact,
    WeakApprox,
    StrongApprox,
}

/// `w0 = (t_0^0)^2` and `wk = (t_0^k)^2` for `k = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingWeights {
    pub w0: f64,
    pub wk: Vec<f64>,
    pub source: WeightSource,
    /// Bound on the weight omitted by truncating at `K`: `(2 delta / pi) / K`.
    pub tail_bound: f64,
}

impl CouplingWeights {
    pub fn len(&self) -> usize {
        self.wk.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All weights, `w0` first.
    pub fn all(&self) -> Vec<f64> {
        std::iter::once(self.w0)
            .chain(self.wk.iter().copied())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.w0 + self.wk.iter().rev().sum::<f64>()
    }
}

/// `(2 delta / pi) / K`, the zeta(2) remainder bound for `sum_{k > K} 2 delta / (pi k^2)`.
pub fn tail_bound(delta: f64, modes: usize) -> f64 {
    2.0 * delta / PI / modes.max(1) as f64
}

/// `t_0^r = eta Omega / sqrt((Omega^2 - w^2)^2 + (eta^2/2)(3 Omega^2 - w^2) + pi^2 g^2 Omega^2)`.
pub fn t0r_exact(omega_r: f64, config: &PhysicalConfig) -> Result<f64> {
    if !(omega_r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Omega_r must be positive, got {omega_r}"
        )));
    }
    let eta = config.eta();
    let w2 = config.omega_bar().powi(2);
    let o2 = omega_r * omega_r;
    let g = config.g();
    let radicand = (o2 - w2).powi(2) + 0.5 * eta * eta * (3.0 * o2 - w2) + PI * PI * g * g * o2;
    if !(radicand > 0.0) {
        return Err(Error::NegativeDiscriminant {
            omega: omega_r,
            radicand,
        });
    }
    Ok(eta * omega_r / radicand.sqrt())
}

/// `t_k^r = eta omega_k t_0^r / (omega_k^2 - Omega_r^2)` for explicit `eta` and `omega_k`.
pub fn tkr_from_parts(eta: f64, omega_k: f64, omega_r: f64, t0r: f64) -> Result<f64> {
    let denom = omega_k * omega_k - omega_r * omega_r;
    if denom.abs() <= TKR_RESONANCE_GUARD * omega_k * omega_k {
        return Err(Error::ResonantDenominator { value: denom });
    }
    Ok(eta * omega_k * t0r / denom)
}

/// `t_k^r` on the cavity grid of `config`.
pub fn tkr_exact(omega_r: f64, k: usize, config: &PhysicalConfig, t0r: f64) -> Result<f64> {
    let omega_k = crate::config::mode_frequency(k, config)?;
    tkr_from_parts(config.eta(), omega_k, omega_r, t0r)
}

/// Squares of [`t0r_exact`] over a solved spectrum.
pub fn weights_exact(spectrum: &Spectrum, config: &PhysicalConfig) -> Result<CouplingWeights> {
    let mut all = spectrum
        .roots()
        .iter()
        .map(|&om| t0r_exact(om, config).map(|t| t * t));
    let w0 = all
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty spectrum".into()))??;
    let wk = all.collect::<Result<Vec<_>>>()?;
    let modes = wk.len();
    Ok(CouplingWeights {
        w0,
        wk,
        source: WeightSource::Exact,
        tail_bound: tail_bound(config.delta(), modes),
    })
}

fn small_l_wk(delta: f64, modes: usize) -> Vec<f64> {
    (1..=modes)
        .map(|k| 2.0 * delta / (PI * (k * k) as f64))
        .collect()
}

/// Weak coupling: `w0 = 1 - pi delta`, `wk = 2 delta / (pi k^2)`.
pub fn weights_weak(delta: f64, modes: usize) -> Result<CouplingWeights> {
    if delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    let w0 = 1.0 - PI * delta;
    if w0 < 0.0 {
        return Err(Error::DeltaTooLarge { delta });
    }
    Ok(CouplingWeights {
        w0,
        wk: small_l_wk(delta, modes),
        source: WeightSource::WeakApprox,
        tail_bound: tail_bound(delta, modes),
    })
}

/// Strong coupling: `w0 = 1 / (1 + pi delta / 2)`, `wk = 2 delta / (pi k^2)`.
pub fn weights_strong(delta: f64, modes: usize) -> Result<CouplingWeights> {
    if delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    Ok(CouplingWeights {
        w0: 1.0 / (1.0 + 0.5 * PI * delta),
        wk: small_l_wk(delta, modes),
        source: WeightSource::StrongApprox,
        tail_bound: tail_bound(delta, modes),
    })
}
