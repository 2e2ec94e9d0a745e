//! Physical configuration, bath mode grid and derived couplings.
//!
//! All quantities are SI. Bath frequencies follow `omega_k = 2 pi k c / L`,
//! so the light speed is carried explicitly; set it to 1 for natural units.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result, Violation};
use crate::spectrum::small_l_validity_bound;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Default bath truncation.
pub const DEFAULT_MODE_COUNT: usize = 10_000;
/// Default absolute tolerance on the secular residual.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

/// Coupling ratio `g / omega_bar` outside of which a regime is considered clear-cut.
const BORDERLINE_RATIO: f64 = 10.0;

/// Validated physical and numerical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    omega_bar: f64,
    g: f64,
    cavity_l: f64,
    light_speed_c: f64,
    mode_count: usize,
    root_tol: f64,
}

/// Unvalidated parameter bundle as read from flags or a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub omega_bar: Option<f64>,
    pub g: Option<f64>,
    pub cavity_l: Option<f64>,
    pub light_speed_c: Option<f64>,
    pub mode_count: Option<usize>,
    pub root_tol: Option<f64>,
}

/// Non-fatal diagnostics raised during validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigWarning {
    /// The cavity is larger than the small-L bound the approximations rely on.
    BeyondSmallL { cavity_l: f64, bound: f64 },
    /// `g / omega_bar` is within a decade of 1, so neither asymptotic regime is clean.
    BorderlineRegime { ratio: f64 },
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::BeyondSmallL { cavity_l, bound } => write!(
                f,
                "cavity_L = {cavity_l:e} m exceeds the small-L bound {bound:e} m; \
                 the approximate spectrum and weights are unreliable"
            ),
            ConfigWarning::BorderlineRegime { ratio } => write!(
                f,
                "g/omega_bar = {ratio:.4} is neither weak nor strong coupling; \
                 classified at the g = omega_bar threshold"
            ),
        }
    }
}

/// A validated configuration plus any warnings produced on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub config: PhysicalConfig,
    pub warnings: Vec<ConfigWarning>,
}

/// Weak (`g <= omega_bar`) or strong (`g > omega_bar`) coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingRegime {
    Weak,
    Strong,
}

impl CouplingRegime {
    pub fn classify(g: f64, omega_bar: f64) -> Self {
        if g <= omega_bar {
            CouplingRegime::Weak
        } else {
            CouplingRegime::Strong
        }
    }
}

impl fmt::Display for CouplingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingRegime::Weak => f.write_str("weak"),
            CouplingRegime::Strong => f.write_str("strong"),
        }
    }
}

/// Uniform cavity mode grid `omega_k = k * spacing`, `k = 1..=count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGrid {
    spacing: f64,
    count: usize,
}

impl ModeGrid {
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Frequency of mode `k`. Panics for `k == 0`; use [`mode_frequency`] for a checked version.
    pub fn frequency(&self, k: usize) -> f64 {
        assert!(k >= 1, "bath modes start at k = 1");
        k as f64 * self.spacing
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.count).map(move |k| k as f64 * self.spacing)
    }
}

fn positive(value: f64) -> bool {
    value.is_finite() && value > 0.0
}

impl PhysicalConfig {
    /// Builds a config with default `c`, mode count and tolerance.
    pub fn new(omega_bar: f64, g: f64, cavity_l: f64) -> Result<Self> {
        Ok(validate_config(&RawConfig {
            omega_bar: Some(omega_bar),
            g: Some(g),
            cavity_l: Some(cavity_l),
            ..RawConfig::default()
        })?
        .config)
    }

    pub fn with_light_speed(self, c: f64) -> Result<Self> {
        self.rebuild(|raw| raw.light_speed_c = Some(c))
    }

    pub fn with_mode_count(self, k: usize) -> Result<Self> {
        self.rebuild(|raw| raw.mode_count = Some(k))
    }

    pub fn with_root_tol(self, tol: f64) -> Result<Self> {
        self.rebuild(|raw| raw.root_tol = Some(tol))
    }

    fn rebuild(self, edit: impl FnOnce(&mut RawConfig)) -> Result<Self> {
        let mut raw = RawConfig::from(self);
        edit(&mut raw);
        Ok(validate_config(&raw)?.config)
    }

    pub fn omega_bar(&self) -> f64 {
        self.omega_bar
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn cavity_l(&self) -> f64 {
        self.cavity_l
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed_c
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    /// Dimensionless cavity parameter `L g / (2 c)`.
    pub fn delta(&self) -> f64 {
        self.cavity_l * self.g / (2.0 * self.light_speed_c)
    }

    /// Bath mode spacing `2 pi c / L`.
    pub fn mode_spacing(&self) -> f64 {
        2.0 * PI * self.light_speed_c / self.cavity_l
    }

    pub fn mode_grid(&self) -> ModeGrid {
        ModeGrid {
            spacing: self.mode_spacing(),
            count: self.mode_count,
        }
    }

    /// Ohmic coupling prefactor `sqrt(2 g spacing)`, so that `c_k = eta * omega_k`.
    pub fn eta(&self) -> f64 {
        (2.0 * self.g * self.mode_spacing()).sqrt()
    }

    pub fn regime(&self) -> CouplingRegime {
        CouplingRegime::classify(self.g, self.omega_bar)
    }

    /// Coherence length `2 c / g`.
    pub fn coherence_length(&self) -> f64 {
        2.0 * self.light_speed_c / self.g
    }
}

impl From<PhysicalConfig> for RawConfig {
    fn from(c: PhysicalConfig) -> Self {
        RawConfig {
            omega_bar: Some(c.omega_bar),
            g: Some(c.g),
            cavity_l: Some(c.cavity_l),
            light_speed_c: Some(c.light_speed_c),
            mode_count: Some(c.mode_count),
            root_tol: Some(c.root_tol),
        }
    }
}

impl RawConfig {
    /// Parses `key = value` lines. Blank lines and `#` comments are ignored.
    ///
    /// Recognised keys: `omega_bar`, `g`, `L`, `c`, `modes`, `root_tol`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line: line_no,
                reason: "expected key=value".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let float = || {
                value.parse::<f64>().map_err(|e| Error::ConfigSyntax {
                    line: line_no,
                    reason: format!("{key}: {e}"),
                })
            };
            match key {
                "omega_bar" => raw.omega_bar = Some(float()?),
                "g" => raw.g = Some(float()?),
                "L" => raw.cavity_l = Some(float()?),
                "c" => raw.light_speed_c = Some(float()?),
                "root_tol" => raw.root_tol = Some(float()?),
                "modes" => {
                    raw.mode_count =
                        Some(value.parse::<usize>().map_err(|e| Error::ConfigSyntax {
                            line: line_no,
                            reason: format!("modes: {e}"),
                        })?)
                }
                other => {
                    return Err(Error::ConfigSyntax {
                        line: line_no,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Ok(raw)
    }

    /// Fields set in `overrides` win.
    pub fn merged_with(self, overrides: &RawConfig) -> RawConfig {
        RawConfig {
            omega_bar: overrides.omega_bar.or(self.omega_bar),
            g: overrides.g.or(self.g),
            cavity_l: overrides.cavity_l.or(self.cavity_l),
            light_speed_c: overrides.light_speed_c.or(self.light_speed_c),
            mode_count: overrides.mode_count.or(self.mode_count),
            root_tol: overrides.root_tol.or(self.root_tol),
        }
    }
}

/// Checks every constraint and reports all violations at once.
pub fn validate_config(raw: &RawConfig) -> Result<Validated> {
    let mut violations = Vec::new();
    let mut required = |value: Option<f64>, name: &'static str| match value {
        None => {
            violations.push(Violation::Missing(name));
            f64::NAN
        }
        Some(v) if !positive(v) => {
            violations.push(Violation::NonPositiveParameter(name));
            v
        }
        Some(v) => v,
    };
    let omega_bar = required(raw.omega_bar, "omega_bar");
    let g = required(raw.g, "g");
    let cavity_l = required(raw.cavity_l, "cavity_L");
    let light_speed_c = required(
        Some(raw.light_speed_c.unwrap_or(SPEED_OF_LIGHT)),
        "light_speed_c",
    );
    let root_tol = required(Some(raw.root_tol.unwrap_or(DEFAULT_ROOT_TOL)), "root_tol");
    let mode_count = raw.mode_count.unwrap_or(DEFAULT_MODE_COUNT);
    if mode_count == 0 {
        violations.push(Violation::ZeroModeCount);
    }
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }

    let config = PhysicalConfig {
        omega_bar,
        g,
        cavity_l,
        light_speed_c,
        mode_count,
        root_tol,
    };
    if !positive(config.delta()) {
        return Err(Error::InvalidConfig(vec![Violation::NonPositiveParameter(
            "delta",
        )]));
    }

    let mut warnings = Vec::new();
    let bound = small_l_validity_bound(&config);
    if cavity_l > bound.l_bound {
        warnings.push(ConfigWarning::BeyondSmallL {
            cavity_l,
            bound: bound.l_bound,
        });
    }
    let ratio = g / omega_bar;
    if ratio > 1.0 / BORDERLINE_RATIO && ratio < BORDERLINE_RATIO {
        warnings.push(ConfigWarning::BorderlineRegime { ratio });
    }
    Ok(Validated { config, warnings })
}

/// `L g / (2 c)`.
pub fn delta_of(config: &PhysicalConfig) -> f64 {
    config.delta()
}

/// `omega_k = 2 pi k c / L`; `k = 0` is rejected.
pub fn mode_frequency(k: usize, config: &PhysicalConfig) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidModeIndex(k));
    }
    Ok(config.mode_grid().frequency(k))
}

/// `eta = sqrt(2 g spacing)`.
pub fn eta_of(config: &PhysicalConfig) -> f64 {
    config.eta()
}
