//! Collective eigenfrequencies of the particle + cavity-bath system.
//!
//! The exact spectrum solves the closed-form cotangent secular equation, one
//! root per interval between consecutive poles of `cot(L Omega / 2c)`. Roots
//! are located in the pole-offset variable `eps`, `Omega = spacing * (k + eps)`,
//! where `cot(L Omega / 2c) = cot(pi eps)`. The small-L approximations
//! linearize the same equation around the poles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::config::{CouplingRegime, PhysicalConfig};
use crate::ddouble::{DoubleDouble, PI as DD_PI};
use crate::error::{Error, Result};

/// Relative distance from a pole at which brackets start, and below which
/// `|sin|` is treated as a pole by [`secular_residual`].
pub const POLE_GUARD: f64 = 1e-9;
/// Bisection budget per root.
pub const MAX_BISECTIONS: usize = 200;
/// Guard on the small-L denominator `4 pi^2 c^2 k^2 - omega_bar^2 L^2`, relative to its first term.
pub const RESONANCE_GUARD: f64 = 1e-9;

const SECANT_POLISH_STEPS: usize = 3;

/// Which closed form of the secular equation to solve.
///
/// Both read `cot(L Omega / 2c) = Omega / (pi g) + (c / (L Omega)) (a - omega_bar^2 L / (pi g c))`:
/// `Paper` uses `a = 1`; `Derived` uses `a = 2`, which is what the
/// renormalized finite-bath condition gives in the infinite-bath limit with the
/// exact partial-fraction expansion of the cotangent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SecularConvention {
    #[default]
    Paper,
    Derived,
}

impl SecularConvention {
    pub const ALL: [SecularConvention; 2] = [SecularConvention::Paper, SecularConvention::Derived];

    fn constant(self) -> f64 {
        match self {
            SecularConvention::Paper => 1.0,
            SecularConvention::Derived => 2.0,
        }
    }
}

impl fmt::Display for SecularConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SecularConvention::Paper => f.write_str("paper"),
            SecularConvention::Derived => f.write_str("derived"),
        }
    }
}

impl FromStr for SecularConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(SecularConvention::Paper),
            "derived" => Ok(SecularConvention::Derived),
            other => Err(Error::InvalidArgument(format!(
                "unknown secular convention `{other}` (expected paper|derived)"
            ))),
        }
    }
}

/// How a [`Spectrum`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Exact(SecularConvention),
    SmallLApprox(CouplingRegime),
}

/// Ordered normal frequencies `Omega_0 < Omega_1 < ... < Omega_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    roots: Vec<f64>,
    offsets: Vec<DoubleDouble>,
    residuals: Vec<f64>,
    brackets: Vec<(f64, f64)>,
    spacing: f64,
    method: SpectrumMethod,
}

impl Spectrum {
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Pole offsets `eps_r = Omega_r / spacing - r`, kept in double-double precision.
    pub fn offsets(&self) -> &[DoubleDouble] {
        &self.offsets
    }

    /// `|secular residual|` per root; NaN for approximate spectra.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Interval `(lo, hi)` in rad/s in which each root was isolated.
    pub fn brackets(&self) -> &[(f64, f64)] {
        &self.brackets
    }

    pub fn method(&self) -> SpectrumMethod {
        self.method
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Drops every root above `Omega_modes`.
    pub fn truncated(&self, modes: usize) -> Spectrum {
        let n = (modes + 1).min(self.len());
        Spectrum {
            roots: self.roots[..n].to_vec(),
            offsets: self.offsets[..n].to_vec(),
            residuals: self.residuals[..n].to_vec(),
            brackets: self.brackets[..n].to_vec(),
            spacing: self.spacing,
            method: self.method,
        }
    }
}

/// The secular equation in offset form: `cot(pi eps) - (k + eps)/delta - b/(k + eps)`.
#[derive(Debug, Clone, Copy)]
struct SecularForm {
    delta: f64,
    b: f64,
    /// `2 - a + X`; the `1/eps` coefficient at `k = 0` is this over `2 pi`.
    /// Kept separate so that `X` survives when it is below one ulp of `a`.
    pole0: f64,
}

impl SecularForm {
    fn new(config: &PhysicalConfig, convention: SecularConvention) -> Self {
        let x = config.omega_bar().powi(2) * config.cavity_l()
            / (PI * config.g() * config.light_speed());
        let a = convention.constant();
        SecularForm {
            delta: config.delta(),
            b: (a - x) / (2.0 * PI),
            pole0: (2.0 - a) + x,
        }
    }

    fn residual(&self, k: usize, eps: DoubleDouble) -> DoubleDouble {
        if k == 0 {
            let pole =
                DoubleDouble::from_f64(self.pole0) / (DoubleDouble::from_f64(2.0) * DD_PI * eps);
            return eps.cot_pi_minus_pole() + pole - eps / self.delta;
        }
        let x = DoubleDouble::from(k) + eps;
        eps.cot_pi() - x / self.delta - DoubleDouble::from_f64(self.b) / x
    }
}

/// Residual of the secular equation at `omega`, evaluated directly in `f64`.
///
/// Loses accuracy close to a pole; use [`secular_residual_at_offset`] there.
pub fn secular_residual(
    omega: f64,
    config: &PhysicalConfig,
    convention: SecularConvention,
) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Omega must be positive, got {omega}"
        )));
    }
    let (l, c, g) = (config.cavity_l(), config.light_speed(), config.g());
    let arg = l * omega / (2.0 * c);
    let (sin, cos) = arg.sin_cos();
    if sin.abs() < POLE_GUARD {
        return Err(Error::PoleProximity { sin_abs: sin.abs() });
    }
    let x = config.omega_bar().powi(2) * l / (PI * g * c);
    Ok(cos / sin - omega / (PI * g) - c / (l * omega) * (convention.constant() - x))
}

/// Residual at `Omega = spacing * (k + offset)`, evaluated in double-double.
pub fn secular_residual_at_offset(
    config: &PhysicalConfig,
    convention: SecularConvention,
    k: usize,
    offset: DoubleDouble,
) -> Result<f64> {
    let eps = offset.to_f64();
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "pole offset must lie in (0, 1), got {eps}"
        )));
    }
    Ok(SecularForm::new(config, convention)
        .residual(k, offset)
        .to_f64())
}

struct Root {
    offset: DoubleDouble,
    residual: f64,
    lo: DoubleDouble,
    hi: DoubleDouble,
}

fn solve_bracket(form: &SecularForm, k: usize, tol: f64, spacing: f64) -> Result<Root> {
    let f = |e: DoubleDouble| form.residual(k, e);
    let one = DoubleDouble::ONE;

    // The residual runs from +inf just above the pole at k to -inf just below
    // the pole at k+1. Start inside by POLE_GUARD and move closer if needed.
    let mut guard = POLE_GUARD;
    let mut lo = DoubleDouble::from_f64(guard);
    let mut f_lo = f(lo);
    while !(f_lo.hi() > 0.0) && guard > 1e-280 {
        guard *= 1e-3;
        lo = DoubleDouble::from_f64(guard);
        f_lo = f(lo);
    }
    let mut guard = POLE_GUARD;
    let mut hi = one - DoubleDouble::from_f64(guard);
    let mut f_hi = f(hi);
    while !(f_hi.hi() < 0.0) && guard > 1e-30 {
        guard *= 1e-3;
        hi = one - DoubleDouble::from_f64(guard);
        f_hi = f(hi);
    }
    if !(f_lo.hi() > 0.0 && f_hi.hi() < 0.0) {
        return Err(Error::BracketFailure {
            k,
            lo: spacing * (k as f64 + lo.to_f64()),
            hi: spacing * (k as f64 + hi.to_f64()),
            f_lo: f_lo.to_f64(),
            f_hi: f_hi.to_f64(),
        });
    }
    let (bracket_lo, bracket_hi) = (lo, hi);

    let mut best = (lo, f_lo);
    if f_hi.abs() < f_lo.abs() {
        best = (hi, f_hi);
    }
    let mut converged = false;
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo + hi).half();
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs().to_f64() <= tol {
            converged = true;
            break;
        }
        if fm.hi() > 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
        if (hi - lo).to_f64() <= 1e-31 * hi.to_f64() {
            break;
        }
    }

    // Secant polish on the final bracket.
    for _ in 0..SECANT_POLISH_STEPS {
        let denom = f_hi - f_lo;
        if denom.to_f64() == 0.0 {
            break;
        }
        let x = lo - f_lo * (hi - lo) / denom;
        if !(x > lo && x < hi) {
            break;
        }
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        } else {
            break;
        }
        if fx.hi() > 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }

    let residual = best.1.abs().to_f64();
    if !converged && residual > tol {
        return Err(Error::ConvergenceFailure {
            k,
            iterations: MAX_BISECTIONS,
            residual,
        });
    }
    Ok(Root {
        offset: best.0,
        residual,
        lo: bracket_lo,
        hi: bracket_hi,
    })
}

/// Solves the secular equation for `Omega_0 ... Omega_modes`.
///
/// Every root is bracketed between consecutive cotangent poles, bisected
/// until `|residual| <= root_tol`, then polished with secant steps.
pub fn solve_spectrum(
    config: &PhysicalConfig,
    convention: SecularConvention,
    modes: usize,
) -> Result<Spectrum> {
    let form = SecularForm::new(config, convention);
    let spacing = config.mode_spacing();
    let mut spectrum = Spectrum {
        roots: Vec::with_capacity(modes + 1),
        offsets: Vec::with_capacity(modes + 1),
        residuals: Vec::with_capacity(modes + 1),
        brackets: Vec::with_capacity(modes + 1),
        spacing,
        method: SpectrumMethod::Exact(convention),
    };
    for k in 0..=modes {
        let root = solve_bracket(&form, k, config.root_tol(), spacing)?;
        let kf = k as f64;
        spectrum
            .roots
            .push(spacing * (DoubleDouble::from(k) + root.offset).to_f64());
        spectrum.offsets.push(root.offset);
        spectrum.residuals.push(root.residual);
        spectrum.brackets.push((
            spacing * (kf + root.lo.to_f64()),
            spacing * (kf + root.hi.to_f64()),
        ));
    }
    Ok(spectrum)
}

/// Linearized pole offset
/// `eps_k = 4 pi g c L k / (2 (4 pi^2 c^2 k^2 - omega_bar^2 L^2))`.
pub fn epsilon_k(config: &PhysicalConfig, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidModeIndex(0));
    }
    let (g, c, l) = (config.g(), config.light_speed(), config.cavity_l());
    let kf = k as f64;
    let lead = 4.0 * PI * PI * c * c * kf * kf;
    let denom = lead - (config.omega_bar() * l).powi(2);
    if denom.abs() < RESONANCE_GUARD * lead {
        return Err(Error::ResonantDenominator { value: denom });
    }
    Ok(4.0 * PI * g * c * l * kf / (2.0 * denom))
}

/// Small-L lowest eigenfrequency `omega_bar / sqrt(1 + pi delta)`.
pub fn lowest_mode_small_l(config: &PhysicalConfig) -> f64 {
    config.omega_bar() / (1.0 + PI * config.delta()).sqrt()
}

/// Small-L approximate spectrum.
///
/// `Omega_k = spacing (k + eps_k)` for `k >= 1`. The lowest mode is
/// [`lowest_mode_small_l`] for weak coupling and `omega_bar` for strong coupling.
pub fn approximate_spectrum(
    config: &PhysicalConfig,
    regime: CouplingRegime,
    modes: usize,
) -> Result<Spectrum> {
    let spacing = config.mode_spacing();
    let omega0 = match regime {
        CouplingRegime::Weak => lowest_mode_small_l(config),
        CouplingRegime::Strong => config.omega_bar(),
    };
    let mut roots = Vec::with_capacity(modes + 1);
    let mut offsets = Vec::with_capacity(modes + 1);
    let mut brackets = Vec::with_capacity(modes + 1);
    roots.push(omega0);
    offsets.push(DoubleDouble::from_f64(omega0 / spacing));
    brackets.push((0.0, spacing));
    for k in 1..=modes {
        let eps = epsilon_k(config, k)?;
        let kf = k as f64;
        roots.push(spacing * (kf + eps));
        offsets.push(DoubleDouble::from_f64(eps));
        brackets.push((spacing * kf, spacing * (kf + 1.0)));
    }
    Ok(Spectrum {
        residuals: vec![f64::NAN; roots.len()],
        roots,
        offsets,
        brackets,
        spacing,
        method: SpectrumMethod::SmallLApprox(regime),
    })
}

/// Largest relative gap `|Omega_exact - Omega_approx| / Omega_exact` over `k >= 1`.
///
/// Computed from the pole offsets so that the small differences are not
/// swamped by rounding of `k`.
pub fn max_relative_gap(exact: &Spectrum, approx: &Spectrum) -> f64 {
    exact
        .offsets
        .iter()
        .zip(&approx.offsets)
        .enumerate()
        .skip(1)
        .map(|(k, (e, a))| (*e - *a).abs().to_f64() / (k as f64 + e.to_f64()))
        .fold(0.0, f64::max)
}

/// Small-L validity diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallLBound {
    /// Dimensionless factor multiplying the coherence length.
    pub factor: f64,
    /// `factor * 2c / g` (m).
    pub l_bound: f64,
    /// `2c / g` (m).
    pub coherence_length: f64,
}

impl SmallLBound {
    pub fn admits(&self, cavity_l: f64) -> bool {
        cavity_l < self.l_bound
    }
}

/// `L << (2c/g) f` with `f = (pi/2)(g/w)^2 (1 + sqrt(1 + (4/pi^2)(w/g)^2))`.
pub fn small_l_validity_bound(config: &PhysicalConfig) -> SmallLBound {
    let r = config.g() / config.omega_bar();
    let factor = 0.5 * PI * r * r * (1.0 + (1.0 + 4.0 / (PI * PI * r * r)).sqrt());
    let coherence_length = config.coherence_length();
    SmallLBound {
        factor,
        l_bound: factor * coherence_length,
        coherence_length,
    }
}

/// Both sides of the partial-fraction identity for `sum 1/(k^2 - u^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotSum {
    pub partial_sum: f64,
    pub closed_form: f64,
}

/// `sum_{k=1}^{terms} 1/(k^2 - u^2)` and its infinite-sum closed form
/// `1/(2u^2) - (pi/(2u)) cot(pi u)`.
pub fn cot_sum_identity(u: f64, terms: usize) -> Result<CotSum> {
    if !u.is_finite() || u.fract() == 0.0 {
        return Err(Error::IntegerU(u));
    }
    let u2 = u * u;
    // smallest terms first
    let partial_sum = (1..=terms).rev().map(|k| 1.0 / ((k * k) as f64 - u2)).sum();
    let closed_form = 1.0 / (2.0 * u2) - PI / (2.0 * u) / (PI * u).tan();
    Ok(CotSum {
        partial_sum,
        closed_form,
    })
}
