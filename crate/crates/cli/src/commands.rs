use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cavdecay::evolution::approximate_weights;
use cavdecay::evolution::{
    evolve, scan_min, survival_expanded_from_parts, survival_from_parts, time_grid, SeriesKind,
    SeriesModel,
};
use cavdecay::oracle::{
    build_system, compare_with_eigen, diagonalize, survival_oracle, verify_secular, verify_tkr,
};
use cavdecay::spectrum::{
    approximate_spectrum, epsilon_k, max_relative_gap, small_l_validity_bound, solve_spectrum,
};
use cavdecay::weights::weights_exact;
use cavdecay::{
    validate_config, CouplingRegime, Error, PhysicalConfig, RawConfig, SecularConvention,
};

use crate::table::{plot_script, Cell, Table};
use crate::{
    ApproxRegimeArg, ConventionArg, EvolveArgs, EvolveRegimeArg, OracleArgs, OutputArgs, PhysArgs,
    ScanArgs, SpectrumArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl From<ConventionArg> for SecularConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Paper => SecularConvention::Paper,
            ConventionArg::Derived => SecularConvention::Derived,
        }
    }
}

impl From<ApproxRegimeArg> for CouplingRegime {
    fn from(r: ApproxRegimeArg) -> Self {
        match r {
            ApproxRegimeArg::Weak => CouplingRegime::Weak,
            ApproxRegimeArg::Strong => CouplingRegime::Strong,
        }
    }
}

fn raw_config(phys: &PhysArgs) -> CliResult<RawConfig> {
    let base = match &phys.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    Ok(base.merged_with(&RawConfig {
        omega_bar: phys.omega_bar,
        g: phys.g,
        cavity_l: phys.cavity_l,
        light_speed_c: phys.c,
        mode_count: phys.modes,
        root_tol: None,
    }))
}

fn resolve(phys: &PhysArgs) -> CliResult<PhysicalConfig> {
    let validated = validate_config(&raw_config(phys)?)?;
    for w in &validated.warnings {
        eprintln!("warning: {w}");
    }
    Ok(validated.config)
}

fn check_output(out: &OutputArgs) -> CliResult<()> {
    if out.plot_script && out.output.is_none() {
        return Err(CliError::Usage("--plot-script needs --output".into()));
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Writes the CSV (and script) only once everything has been computed.
fn emit(out: &OutputArgs, table: Table, ys: &[usize], logscale_y: bool) -> CliResult<()> {
    let columns: Vec<&str> = table.columns().to_vec();
    let csv = table.into_string();
    match &out.output {
        Some(path) => {
            write_file(path, &csv)?;
            if out.plot_script {
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                write_file(
                    &path.with_extension("gp"),
                    &plot_script(&name, &columns, ys, logscale_y),
                )?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(csv.as_bytes())
                .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))?;
        }
    }
    Ok(())
}

pub fn run_spectrum(args: &SpectrumArgs) -> CliResult<()> {
    check_output(&args.out)?;
    let config = resolve(&args.phys)?;
    let convention = SecularConvention::from(args.secular_convention);
    let modes = config.mode_count();
    let regime = args
        .regime
        .map(CouplingRegime::from)
        .unwrap_or(config.regime());

    let exact = solve_spectrum(&config, convention, modes)?;
    let approx = match approximate_spectrum(&config, regime, modes) {
        Ok(s) => Some(s),
        Err(e) => {
            eprintln!("warning: small-L spectrum unavailable: {e}");
            None
        }
    };

    let mut table = Table::new(&[
        "k",
        "omega_asymptote",
        "Omega_exact",
        "Omega_approx",
        "epsilon_k",
        "residual",
    ]);
    let spacing = config.mode_spacing();
    for k in 0..=modes {
        let asymptote = if k == 0 { f64::NAN } else { k as f64 * spacing };
        let om_approx = approx.as_ref().map_or(f64::NAN, |s| s.roots()[k]);
        let eps = if k == 0 {
            f64::NAN
        } else {
            epsilon_k(&config, k).unwrap_or(f64::NAN)
        };
        table.row(vec![
            Cell::from(k),
            asymptote.into(),
            exact.roots()[k].into(),
            om_approx.into(),
            eps.into(),
            exact.residuals()[k].into(),
        ]);
    }

    if let Some(path) = &args.weights_output {
        let w_exact = weights_exact(&exact, &config)?.all();
        let w_approx = approximate_weights(regime, config.delta(), modes)
            .map(|w| w.all())
            .unwrap_or_else(|_| vec![f64::NAN; modes + 1]);
        let mut wt = Table::new(&["r", "Omega_r", "t0r_sq_exact", "t0r_sq_approx"]);
        for r in 0..=modes {
            wt.row(vec![
                Cell::from(r),
                exact.roots()[r].into(),
                w_exact[r].into(),
                w_approx[r].into(),
            ]);
        }
        write_file(path, &wt.into_string())?;
    }

    let bound = small_l_validity_bound(&config);
    eprintln!(
        "{} roots ({} convention), max residual {:.3e}, delta {:.6e}",
        exact.len(),
        convention,
        exact.max_residual(),
        config.delta()
    );
    eprintln!(
        "small-L bound {:.6e} m: L = {:.6e} m is {}",
        bound.l_bound,
        config.cavity_l(),
        if bound.admits(config.cavity_l()) {
            "inside"
        } else {
            "outside"
        }
    );
    if let Some(a) = &approx {
        eprintln!(
            "max relative gap exact vs small-L (k >= 1): {:.3e}",
            max_relative_gap(&exact, a)
        );
    }
    emit(&args.out, table, &[2, 3], true)
}

const CROSS_CHECK_SAMPLES: usize = 16;
const CROSS_CHECK_TOL: f64 = 1e-10;

pub fn run_evolve(args: &EvolveArgs) -> CliResult<()> {
    check_output(&args.out)?;
    if args.steps < 2 {
        return Err(CliError::Usage(format!(
            "--steps must be at least 2, got {}",
            args.steps
        )));
    }
    let config = resolve(&args.phys)?;
    let t_max = args
        .t_max
        .unwrap_or(50.0 * config.cavity_l() / config.light_speed());
    let times = time_grid(t_max, args.steps)?;
    let modes = config.mode_count();
    let kind = match args.regime {
        EvolveRegimeArg::Exact => SeriesKind::Exact(args.secular_convention.into()),
        EvolveRegimeArg::Weak => SeriesKind::WeakApprox,
        EvolveRegimeArg::Strong => SeriesKind::StrongApprox,
    };
    let series = evolve(&config, kind, modes, &times)?;

    let cross = if args.cross_check {
        Some(cross_check(&config, kind, modes, &times)?)
    } else {
        None
    };

    let mut table = Table::new(&["t", "probability", "lower_bound"]);
    for (&t, &p) in series.times.iter().zip(&series.probabilities) {
        table.row(vec![t.into(), p.into(), series.lower_bound.value.into()]);
    }

    let min = series.sampled_min();
    let bound = series.lower_bound;
    eprintln!(
        "delta {:.6e}, {} samples over [0, {:.6e}] s, K = {}",
        config.delta(),
        times.len(),
        t_max,
        modes
    );
    eprintln!(
        "sampled_min {:.4} {} lower bound {:.4}{} (series_slack {:.2e})",
        min,
        if min >= bound.value - series.series_slack {
            ">="
        } else {
            "<"
        },
        bound.value,
        if bound.physical { "" } else { " [unphysical]" },
        series.series_slack
    );
    if let Some(diff) = cross {
        eprintln!("cross-check: max |compact - expanded| = {diff:.3e}");
        if diff > CROSS_CHECK_TOL {
            return Err(CliError::Numerical(format!(
                "cross-check mismatch {diff:e} exceeds {CROSS_CHECK_TOL:e}"
            )));
        }
    }
    emit(&args.out, table, &[1, 2], false)
}

/// Largest difference between the `O(K)` and `O(K^2)` forms at a few instants.
fn cross_check(
    config: &PhysicalConfig,
    kind: SeriesKind,
    modes: usize,
    times: &[f64],
) -> CliResult<f64> {
    let stride = (times.len() / CROSS_CHECK_SAMPLES).max(1);
    let picks = times.iter().step_by(stride);
    let mut worst = 0.0_f64;
    match kind {
        SeriesKind::Exact(convention) => {
            let spectrum = solve_spectrum(config, convention, modes)?;
            let w = weights_exact(&spectrum, config)?.all();
            for &t in picks {
                let a = survival_from_parts(t, spectrum.roots(), &w)?;
                let b = survival_expanded_from_parts(t, spectrum.roots(), &w)?;
                worst = worst.max((a - b).abs());
            }
        }
        SeriesKind::WeakApprox | SeriesKind::StrongApprox => {
            let regime = if kind == SeriesKind::WeakApprox {
                CouplingRegime::Weak
            } else {
                CouplingRegime::Strong
            };
            let model = SeriesModel::new(config, regime, modes)?;
            for &t in picks {
                let a = model.evaluate(t);
                let b = model.evaluate_with_sums(model.sums_expanded(t));
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

pub fn run_scan(args: &ScanArgs) -> CliResult<()> {
    check_output(&args.out)?;
    let raw = raw_config(&args.phys)?;
    // only g and c enter L_equiv; the rest of the config is optional here
    let l_scale = raw.g.map(|g| {
        let c = raw
            .light_speed_c
            .unwrap_or(cavdecay::config::SPEED_OF_LIGHT);
        2.0 * c / g
    });
    if let Some(s) = l_scale {
        if !(s.is_finite() && s > 0.0) {
            return Err(CliError::Core(Error::InvalidConfig(vec![
                cavdecay::Violation::NonPositiveParameter("g"),
            ])));
        }
    }
    let regime = CouplingRegime::from(args.regime);
    let rows = scan_min(regime, args.delta_lo, args.delta_hi, args.steps, None)?;

    let mut table = Table::new(&["delta", "min_bound", "L_equiv_m"]);
    for row in &rows {
        let l = l_scale.map_or(f64::NAN, |s| s * row.delta);
        table.row(vec![row.delta.into(), row.bound.value.into(), l.into()]);
    }
    let (arg_min, min) =
        rows.iter()
            .map(|r| (r.delta, r.bound.value))
            .fold(
                (f64::NAN, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
    eprintln!(
        "{} scan, {} points: smallest bound {:.6} at delta {:.6e}",
        regime,
        rows.len(),
        min,
        arg_min
    );
    if let Some(w) = rows
        .windows(2)
        .find(|w| w[0].bound.value >= 0.0 && w[1].bound.value < 0.0)
    {
        eprintln!(
            "bound changes sign in [{:.6e}, {:.6e}]",
            w[0].delta, w[1].delta
        );
    }
    emit(&args.out, table, &[1], false)
}

pub fn run_oracle(args: &OracleArgs) -> CliResult<()> {
    check_output(&args.out)?;
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let config = resolve(&args.phys)?;
    let t_max = args
        .t_max
        .unwrap_or(50.0 * config.cavity_l() / config.light_speed());
    let times = time_grid(t_max, args.steps)?;

    let system = build_system(&config, args.n)?;
    let eigen = diagonalize(&system)?;
    let report = compare_with_eigen(&config, &system, &eigen, &times)?;
    let secular = verify_secular(&eigen, &system)?;
    let tkr = verify_tkr(&eigen, &system)?;
    let unitarity = times
        .iter()
        .map(|&t| (survival_oracle(t, &eigen).unitarity - 1.0).abs())
        .fold(0.0, f64::max);

    let mut table = Table::new(&[
        "r",
        "Omega_oracle",
        "Omega_closed_paper",
        "Omega_closed_derived",
        "t0r_sq_oracle",
    ]);
    for row in &report.rows {
        table.row(vec![
            Cell::from(row.r),
            row.omega_oracle.into(),
            row.omega_paper.into(),
            row.omega_derived.into(),
            row.t0_sq_oracle.into(),
        ]);
    }

    let mut text = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(
        text,
        "oracle N = {}, closed-form modes = {}",
        report.n_modes, report.shared_modes
    );
    let _ = writeln!(
        text,
        "delta = {:.6e}, counterterm = {:.6e} rad^2/s^2",
        config.delta(),
        report.counterterm
    );
    let _ = writeln!(text, "Jacobi sweeps = {}", eigen.sweeps);
    let _ = writeln!(
        text,
        "max |T^T T - I| = {:.3e}",
        eigen.orthonormality_defect()
    );
    let _ = writeln!(text, "|sum_r (t0r)^2 - 1| = {:.3e}", eigen.t0_sum_defect());
    let _ = writeln!(
        text,
        "secular backward error = {:.3e} (Newton step {:.3e}, raw {:.3e})",
        secular.max_residual, secular.max_newton, secular.max_raw
    );
    let _ = writeln!(text, "eigenvector deviation = {:.3e}", tkr);
    let _ = writeln!(text, "interlacing = {}", eigen.interlaces(&system));
    let _ = writeln!(text, "max |unitarity - 1| = {:.3e}", unitarity);
    let _ = writeln!(text, "truncation tail (2 delta/pi)/N = {:.3e}", report.tail);
    for d in &report.deviations {
        let _ = writeln!(
            text,
            "{:>8}: max |dOmega| = {:.3e} rad/s, max rel = {:.3e}, Omega_0 rel = {:.3e}, max |dw| = {:.3e}, max |dP| = {:.3e}",
            d.convention.to_string(),
            d.max_abs_omega,
            d.max_rel_omega,
            d.rel_omega0,
            d.max_weight,
            d.max_survival
        );
    }
    let _ = writeln!(text, "better match: {}", report.better);
    eprint!("{text}");
    if let Some(path) = &args.out.output {
        write_file(&path.with_extension("report.txt"), &text)?;
    }
    emit(&args.out, table, &[1, 2, 3], true)
}
