//! Finite-N brute-force check of the closed-form pipeline.
//!
//! The particle and `N` bath modes form the potential matrix
//! `V00 = omega_bar^2 + eta^2 N`, `Vkk = omega_k^2`, `V0k = -eta omega_k`.
//! The counterterm `eta^2 N` is what makes the finite-N condition reduce to
//! `omega_bar^2 - Omega^2 = eta^2 Omega^2 sum_k 1/(omega_k^2 - Omega^2)`.

use num_complex::Complex64;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::evolution::survival_from_parts;
use crate::jacobi::{jacobi_eigen, Eigen, SymMatrix};
use crate::spectrum::{solve_spectrum, SecularConvention};
use crate::weights::weights_exact;

/// Relative distance `|omega_k^2 - Omega^2| / omega_k^2` below which a term is skipped.
pub const RESONANCE_GUARD: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct OracleSystem {
    omega0_sq: f64,
    bath: Vec<f64>,
    couplings: Vec<f64>,
    counterterm: f64,
    eta: Option<f64>,
    potential: SymMatrix,
}

impl OracleSystem {
    /// Arbitrary bare `omega_0^2`, bath frequencies and couplings `c_k`.
    pub fn from_parts(omega0_sq: f64, bath: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if bath.is_empty() {
            return Err(Error::InvalidArgument(
                "oracle needs N >= 1 bath modes".into(),
            ));
        }
        if bath.len() != couplings.len() {
            return Err(Error::LengthMismatch {
                frequencies: bath.len(),
                weights: couplings.len(),
            });
        }
        if !(omega0_sq > 0.0) || bath.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "frequencies must be finite and positive".into(),
            ));
        }
        let mut sorted = bath.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(i) = sorted.windows(2).position(|w| w[0] == w[1]) {
            let k = bath.iter().position(|&w| w == sorted[i]).unwrap_or(i);
            return Err(Error::DegenerateBath(k + 1));
        }
        let n = bath.len();
        let mut potential = SymMatrix::zeros(n + 1);
        potential.set(0, 0, omega0_sq);
        for (k, (&w, &c)) in bath.iter().zip(&couplings).enumerate() {
            potential.set(k + 1, k + 1, w * w);
            potential.set(0, k + 1, -c);
        }
        Ok(OracleSystem {
            omega0_sq,
            bath,
            couplings,
            counterterm: 0.0,
            eta: None,
            potential,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.bath.len()
    }

    pub fn omega0_sq(&self) -> f64 {
        self.omega0_sq
    }

    pub fn bath(&self) -> &[f64] {
        &self.bath
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn counterterm(&self) -> f64 {
        self.counterterm
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn potential(&self) -> &SymMatrix {
        &self.potential
    }
}

/// Ohmic cavity system with `N` modes on the grid of `config`.
pub fn build_system(config: &PhysicalConfig, n: usize) -> Result<OracleSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "oracle needs N >= 1 bath modes".into(),
        ));
    }
    let eta = config.eta();
    let spacing = config.mode_spacing();
    let bath: Vec<f64> = (1..=n).map(|k| k as f64 * spacing).collect();
    let couplings = bath.iter().map(|w| eta * w).collect();
    let counterterm = eta * eta * n as f64;
    let mut system =
        OracleSystem::from_parts(config.omega_bar().powi(2) + counterterm, bath, couplings)?;
    system.counterterm = counterterm;
    system.eta = Some(eta);
    Ok(system)
}

/// Normal modes of an [`OracleSystem`].
///
/// `vectors[r][mu]` is `t_mu^r`, with `t_0^r >= 0`.
#[derive(Debug, Clone)]
pub struct OracleEigen {
    pub omega_sq: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl OracleEigen {
    pub fn frequencies(&self) -> Vec<f64> {
        self.omega_sq.iter().map(|x| x.sqrt()).collect()
    }

    /// `(t_0^r)^2` for every `r`.
    pub fn t0_squared(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| v[0] * v[0]).collect()
    }

    /// `|sum_r (t_0^r)^2 - 1|`.
    pub fn t0_sum_defect(&self) -> f64 {
        let s: f64 = self.t0_squared().iter().rev().sum();
        (s - 1.0).abs()
    }

    /// `max |T^T T - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        self.as_eigen().orthonormality_defect()
    }

    /// `max |T T^T - I|`.
    pub fn completeness_defect(&self) -> f64 {
        self.as_eigen().completeness_defect()
    }

    fn as_eigen(&self) -> Eigen {
        Eigen {
            values: self.omega_sq.clone(),
            vectors: self.vectors.clone(),
            sweeps: self.sweeps,
        }
    }

    /// `Omega_0^2 < omega_1^2 < Omega_1^2 < ... < omega_N^2 < Omega_N^2`.
    pub fn interlaces(&self, system: &OracleSystem) -> bool {
        let mut bath_sq: Vec<f64> = system.bath.iter().map(|w| w * w).collect();
        bath_sq.sort_by(f64::total_cmp);
        bath_sq.len() + 1 == self.omega_sq.len()
            && bath_sq
                .iter()
                .enumerate()
                .all(|(k, &b)| self.omega_sq[k] < b && b < self.omega_sq[k + 1])
    }
}

pub fn diagonalize(system: &OracleSystem) -> Result<OracleEigen> {
    let e = jacobi_eigen(&system.potential)?;
    if let Some(&bad) = e.values.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::UnstableMode(bad));
    }
    let vectors = e
        .vectors
        .into_iter()
        .map(|mut v| {
            if v[0] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    Ok(OracleEigen {
        omega_sq: e.values,
        vectors,
        sweeps: e.sweeps,
    })
}

/// Result of substituting the oracle eigenvalues into the secular condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularCheck {
    /// `max_r |F| / (omega_0^2 + sum_k |c_k^2 / (omega_k^2 - x)| + x |F'|)` at `x = Omega_r^2`:
    /// the relative perturbation of the data that makes `x` an exact root.
    pub max_residual: f64,
    /// `max_r |F| / (|F'| x)`: the relative change in `x` one Newton step would make.
    pub max_newton: f64,
    /// `max_r |F| / x`.
    pub max_raw: f64,
    /// Modes with `t_0^r = 0`, which the condition does not constrain.
    pub uncoupled: usize,
}

/// Checks `F(x) = omega_0^2 - x - sum_k c_k^2 / (omega_k^2 - x) = 0` at each `x = Omega_r^2`.
///
/// `F` is badly conditioned at both ends of the spectrum: near a bath
/// frequency it is steep, and for the lowest mode `omega_0^2` nearly cancels
/// the sum. The backward error in `max_residual` accounts for both.
pub fn verify_secular(eigen: &OracleEigen, system: &OracleSystem) -> Result<SecularCheck> {
    let mut check = SecularCheck {
        max_residual: 0.0,
        max_newton: 0.0,
        max_raw: 0.0,
        uncoupled: 0,
    };
    let mut skipped = 0;
    for (x, v) in eigen.omega_sq.iter().zip(&eigen.vectors) {
        if v[0] == 0.0 {
            check.uncoupled += 1;
            continue;
        }
        let mut sum = 0.0;
        let mut magnitude = 0.0;
        let mut slope = 1.0;
        for (&w, &c) in system.bath.iter().zip(&system.couplings) {
            if c == 0.0 {
                continue;
            }
            let den = w * w - x;
            if den.abs() <= RESONANCE_GUARD * w * w {
                skipped += 1;
                continue;
            }
            let term = c * c / den;
            sum += term;
            magnitude += term.abs();
            slope += term / den;
        }
        let f = (system.omega0_sq - x - sum).abs();
        let scale = system.omega0_sq + magnitude + x * slope;
        check.max_residual = check.max_residual.max(f / scale);
        check.max_newton = check.max_newton.max(f / (slope * x));
        check.max_raw = check.max_raw.max(f / x);
    }
    if skipped > 0 {
        return Err(Error::ResonanceSkip {
            skipped,
            max_residual: check.max_residual,
        });
    }
    Ok(check)
}

/// Rebuilds every eigenvector from `t_0^r = [1 + sum_k c_k^2/(omega_k^2 - Omega_r^2)^2]^{-1/2}`
/// and `t_k^r = c_k t_0^r / (omega_k^2 - Omega_r^2)`; returns the largest entrywise difference.
pub fn verify_tkr(eigen: &OracleEigen, system: &OracleSystem) -> Result<f64> {
    let n = system.n_modes();
    let mut worst = 0.0_f64;
    let mut expected = vec![0.0; n + 1];
    for (&x, v) in eigen.omega_sq.iter().zip(&eigen.vectors) {
        let uncoupled = system
            .bath
            .iter()
            .zip(&system.couplings)
            .position(|(&w, &c)| c == 0.0 && w * w == x);
        if let Some(k) = uncoupled {
            expected.iter_mut().for_each(|e| *e = 0.0);
            expected[k + 1] = 1.0;
        } else {
            let mut norm = 1.0;
            for (k, (&w, &c)) in system.bath.iter().zip(&system.couplings).enumerate() {
                let den = w * w - x;
                if c != 0.0 && den.abs() <= RESONANCE_GUARD * w * w {
                    return Err(Error::ResonantDenominator { value: den });
                }
                let ratio = if c == 0.0 { 0.0 } else { c / den };
                expected[k + 1] = ratio;
                norm += ratio * ratio;
            }
            let t0 = 1.0 / norm.sqrt();
            expected[0] = 1.0;
            expected.iter_mut().for_each(|e| *e *= t0);
        }
        for (a, b) in expected.iter().zip(v) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSurvival {
    /// `|f00(t)|^2`.
    pub probability: f64,
    /// `sum_nu |f0nu(t)|^2`, which orthonormality pins to 1.
    pub unitarity: f64,
}

/// `f0nu(t) = sum_s t_0^s t_nu^s exp(-i Omega_s t)`.
pub fn survival_oracle(t: f64, eigen: &OracleEigen) -> OracleSurvival {
    let freqs = eigen.frequencies();
    let base = freqs[0];
    let dim = eigen.vectors[0].len();
    let mut f = vec![Complex64::new(0.0, 0.0); dim];
    for (v, &om) in eigen.vectors.iter().zip(&freqs) {
        let phase = Complex64::from_polar(v[0], -(om - base) * t);
        for (acc, &x) in f.iter_mut().zip(v) {
            *acc += phase * x;
        }
    }
    OracleSurvival {
        probability: f[0].norm_sqr(),
        unitarity: f.iter().map(|z| z.norm_sqr()).sum(),
    }
}

/// One row of the per-mode comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRow {
    pub r: usize,
    pub omega_oracle: f64,
    pub omega_paper: f64,
    pub omega_derived: f64,
    pub t0_sq_oracle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConventionDeviation {
    pub convention: SecularConvention,
    pub max_abs_omega: f64,
    pub max_rel_omega: f64,
    /// Relative deviation of the lowest mode alone.
    pub rel_omega0: f64,
    pub max_weight: f64,
    pub max_survival: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub n_modes: usize,
    pub shared_modes: usize,
    pub counterterm: f64,
    pub rows: Vec<ModeRow>,
    pub deviations: Vec<ConventionDeviation>,
    /// Convention with the smaller `max_rel_omega`.
    pub better: SecularConvention,
    /// `(2 delta / pi) / N`, the weight the finite bath leaves out.
    pub tail: f64,
}

impl ComparisonReport {
    pub fn deviation(&self, convention: SecularConvention) -> &ConventionDeviation {
        self.deviations
            .iter()
            .find(|d| d.convention == convention)
            .expect("report holds both conventions")
    }
}

/// Builds and diagonalizes the `N`-mode system, then compares it with the
/// closed-form pipeline under both secular conventions.
pub fn compare_pipelines(
    config: &PhysicalConfig,
    n: usize,
    t_grid: &[f64],
) -> Result<ComparisonReport> {
    let system = build_system(config, n)?;
    let eigen = diagonalize(&system)?;
    compare_with_eigen(config, &system, &eigen, t_grid)
}

/// As [`compare_pipelines`] with an already diagonalized system.
///
/// The closed form uses `min(mode_count, N)` modes.
pub fn compare_with_eigen(
    config: &PhysicalConfig,
    system: &OracleSystem,
    eigen: &OracleEigen,
    t_grid: &[f64],
) -> Result<ComparisonReport> {
    let n = system.n_modes();
    let shared = config.mode_count().min(n);
    let oracle_freqs = eigen.frequencies();
    let oracle_w = eigen.t0_squared();
    let oracle_p: Vec<f64> = t_grid
        .iter()
        .map(|&t| survival_from_parts(t, &oracle_freqs, &oracle_w))
        .collect::<Result<_>>()?;

    let mut deviations = Vec::new();
    let mut closed = Vec::new();
    for convention in SecularConvention::ALL {
        let spectrum = solve_spectrum(config, convention, shared)?;
        let weights = weights_exact(&spectrum, config)?.all();
        let roots = spectrum.roots();
        let mut dev = ConventionDeviation {
            convention,
            max_abs_omega: 0.0,
            max_rel_omega: 0.0,
            rel_omega0: (roots[0] - oracle_freqs[0]).abs() / oracle_freqs[0],
            max_weight: 0.0,
            max_survival: 0.0,
        };
        for r in 0..=shared {
            let d = (roots[r] - oracle_freqs[r]).abs();
            dev.max_abs_omega = dev.max_abs_omega.max(d);
            dev.max_rel_omega = dev.max_rel_omega.max(d / oracle_freqs[r]);
            dev.max_weight = dev.max_weight.max((weights[r] - oracle_w[r]).abs());
        }
        for (&t, &p) in t_grid.iter().zip(&oracle_p) {
            let q = survival_from_parts(t, roots, &weights)?;
            dev.max_survival = dev.max_survival.max((q - p).abs());
        }
        deviations.push(dev);
        closed.push(roots.to_vec());
    }

    let rows = (0..=shared)
        .map(|r| ModeRow {
            r,
            omega_oracle: oracle_freqs[r],
            omega_paper: closed[0][r],
            omega_derived: closed[1][r],
            t0_sq_oracle: oracle_w[r],
        })
        .collect();
    let better = if deviations[1].max_rel_omega < deviations[0].max_rel_omega {
        deviations[1].convention
    } else {
        deviations[0].convention
    };
    Ok(ComparisonReport {
        n_modes: n,
        shared_modes: shared,
        counterterm: system.counterterm,
        rows,
        deviations,
        better,
        tail: crate::weights::tail_bound(config.delta(), n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> OracleSystem {
        OracleSystem::from_parts(1.0, vec![1.0], vec![0.5]).unwrap()
    }

    #[test]
    fn toy_matrix_and_spectrum() {
        let s = toy();
        assert_eq!(s.potential().get(0, 0), 1.0);
        assert_eq!(s.potential().get(0, 1), -0.5);
        let e = diagonalize(&s).unwrap();
        assert!((e.omega_sq[0] - 0.5).abs() < 1e-15);
        assert!((e.omega_sq[1] - 1.5).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for v in &e.vectors {
            assert!((v[0] - h).abs() < 1e-15);
        }
        let check = verify_secular(&e, &s).unwrap();
        assert!(check.max_residual < 1e-15 && check.max_newton < 1e-15);
        assert!(verify_tkr(&e, &s).unwrap() < 1e-15);
    }

    #[test]
    fn decoupled_system() {
        let s = OracleSystem::from_parts(2.0, vec![1.0, 3.0], vec![0.0, 0.0]).unwrap();
        let e = diagonalize(&s).unwrap();
        assert_eq!(e.omega_sq, vec![1.0, 2.0, 9.0]);
        assert_eq!(e.vectors[1][0], 1.0);
        assert_eq!(e.vectors[0][0], 0.0);
        let check = verify_secular(&e, &s).unwrap();
        assert_eq!(check.max_residual, 0.0);
        assert_eq!(check.uncoupled, 2);
        assert_eq!(verify_tkr(&e, &s).unwrap(), 0.0);
        assert_eq!(survival_oracle(5.0, &e).probability, 1.0);
    }

    #[test]
    fn counterterm_scaling() {
        let c = PhysicalConfig::new(1e10, 1e9, 1e-3).unwrap();
        let a = build_system(&c, 10).unwrap();
        let b = build_system(&c, 20).unwrap();
        assert!((b.counterterm() / a.counterterm() - 2.0).abs() < 1e-14);
        let eta = c.eta();
        assert!((a.couplings()[3] - eta * a.bath()[3]).abs() < 1e-6);
        let weak = PhysicalConfig::new(1e10, 1e-20, 1e-3).unwrap();
        assert!(build_system(&weak, 10).unwrap().counterterm() < 1e-6);
    }

    #[test]
    fn build_validation() {
        let c = PhysicalConfig::new(1e10, 1e9, 1e-3).unwrap();
        assert!(build_system(&c, 0).is_err());
        assert!(matches!(
            OracleSystem::from_parts(1.0, vec![1.0, 2.0, 1.0], vec![0.1; 3]),
            Err(Error::DegenerateBath(1))
        ));
        assert!(OracleSystem::from_parts(1.0, vec![1.0], vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn unstable_system_is_reported() {
        let s = OracleSystem::from_parts(0.1, vec![1.0], vec![2.0]).unwrap();
        assert!(matches!(diagonalize(&s), Err(Error::UnstableMode(_))));
    }

    #[test]
    fn ohmic_system_checks() {
        let g = 1e10;
        let delta = 1e-2;
        let c = PhysicalConfig::new(g, g, 2.0 * crate::config::SPEED_OF_LIGHT * delta / g).unwrap();
        let s = build_system(&c, 100).unwrap();
        let e = diagonalize(&s).unwrap();
        assert!(e.interlaces(&s));
        assert!(e.orthonormality_defect() < 1e-12);
        assert!(e.completeness_defect() < 1e-12);
        assert!(e.t0_sum_defect() < 1e-13);
        let check = verify_secular(&e, &s).unwrap();
        assert!(check.max_residual < 1e-8);
        assert!(check.max_newton < 1e-6);
        assert!(verify_tkr(&e, &s).unwrap() < 1e-8);
        let at0 = survival_oracle(0.0, &e);
        assert!((at0.probability - 1.0).abs() < 1e-12);
        let later = survival_oracle(3e-10, &e);
        assert!((later.unitarity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn comparison_report_shape() {
        let g = 1e10;
        let delta = 1e-2;
        let c = PhysicalConfig::new(g, g, 2.0 * crate::config::SPEED_OF_LIGHT * delta / g)
            .unwrap()
            .with_mode_count(50)
            .unwrap();
        let t = crate::evolution::time_grid(1e-12, 4).unwrap();
        let report = compare_pipelines(&c, 100, &t).unwrap();
        assert_eq!(report.shared_modes, 50);
        assert_eq!(report.rows.len(), 51);
        assert_eq!(report.deviations.len(), 2);
        assert!(report.deviation(SecularConvention::Paper).max_rel_omega >= 0.0);
    }
}
