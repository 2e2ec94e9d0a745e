//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each, and exits non-zero if any failed.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cavdecay::config::SPEED_OF_LIGHT;
use cavdecay::evolution::{
    richardson_1_over_k, strong_series_from_sums, time_grid, weak_series_from_sums,
    weak_upper_root, weak_vertex, SeriesModel, ZETA2,
};
use cavdecay::oracle::{
    build_system, compare_pipelines, diagonalize, survival_oracle, verify_secular, verify_tkr,
    OracleSystem,
};
use cavdecay::spectrum::{
    approximate_spectrum, max_relative_gap, secular_residual_at_offset, solve_spectrum,
};
use cavdecay::weights::tail_bound;
use cavdecay::{
    delta_max_strong, min_strong, min_weak, scan_min, CouplingRegime, PhysicalConfig,
    SecularConvention,
};

type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `omega_bar = g = 1e10 rad/s`, `L` chosen to give `delta`.
fn config_with_delta(delta: f64) -> PhysicalConfig {
    let g = 1e10;
    PhysicalConfig::new(g, g, 2.0 * SPEED_OF_LIGHT * delta / g).unwrap()
}

fn weak_stability() -> Outcome {
    let omega_bar = 4.0e14;
    let config = PhysicalConfig::new(omega_bar, omega_bar / 137.0, 1.0e-6).unwrap();
    let delta = config.delta();
    let bound = min_weak(delta).unwrap().value;
    let k = 10_000;
    let start = Instant::now();
    let model = SeriesModel::new(&config, CouplingRegime::Weak, k).unwrap();
    let times = time_grid(50.0 * config.cavity_l() / config.light_speed(), 2000).unwrap();
    let sampled_min = times
        .iter()
        .map(|&t| model.evaluate(t))
        .fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed().as_secs_f64();
    let slack = model.series_slack();
    let pass = (bound - 0.9749).abs() <= 0.005 && sampled_min >= bound - slack && elapsed < 5.0;
    outcome(
        pass,
        format!(
            "delta={delta:.5e} min_weak={bound:.5} sampled_min={sampled_min:.5} \
             slack={slack:.2e} runtime={elapsed:.2}s"
        ),
    )
}

fn weak_parabola() -> Outcome {
    let at0 = min_weak(0.0).unwrap().value;
    let at_root = min_weak(weak_upper_root()).unwrap().value;
    let vertex = min_weak(weak_vertex()).unwrap().value;
    let closed_ok = (at0 - 1.0).abs() < 1e-12
        && (at_root - 1.0).abs() < 1e-12
        && (vertex - 0.554).abs() <= 0.01;

    let steps = 10_000;
    let rows = scan_min(CouplingRegime::Weak, 0.0, weak_upper_root(), steps, None).unwrap();
    let h = weak_upper_root() / (steps - 1) as f64;
    let best = rows
        .iter()
        .min_by(|a, b| a.bound.value.total_cmp(&b.bound.value))
        .unwrap();
    let first = rows.first().unwrap().bound.value;
    let last = rows.last().unwrap().bound.value;
    let scan_ok = (best.delta - weak_vertex()).abs() <= h
        && (best.bound.value - 0.554).abs() <= 0.01
        && (first - 1.0).abs() < 1e-12
        && (last - 1.0).abs() < 1e-12;
    outcome(
        closed_ok && scan_ok,
        format!(
            "roots 0, {:.6}: Min = {at0:.3e}, {at_root:.15}; vertex {:.6} -> {vertex:.6}; \
             scan argmin {:.6} (grid {h:.1e}) -> {:.6}",
            weak_upper_root(),
            weak_vertex(),
            best.delta,
            best.bound.value
        ),
    )
}

fn strong_threshold() -> Outcome {
    let d = delta_max_strong();
    let at = min_strong(d.closed_form).unwrap().value;
    let pass = (d.closed_form - 0.3724).abs() <= 0.0005
        && (d.closed_form - d.bisection).abs() <= 1e-10
        && at.abs() <= 1e-10;
    outcome(
        pass,
        format!(
            "closed={:.10} bisection={:.10} |diff|={:.1e} min_strong(closed)={at:.1e}",
            d.closed_form,
            d.bisection,
            (d.closed_form - d.bisection).abs()
        ),
    )
}

fn spectrum_correctness() -> Outcome {
    let k = 200;
    let deltas = [1e-4, 1e-3, 1e-2, 0.1, 0.3];
    let mut pass = true;
    let mut notes = Vec::new();
    for convention in SecularConvention::ALL {
        let mut gaps = Vec::new();
        for &delta in &deltas {
            let config = config_with_delta(delta);
            let s = solve_spectrum(&config, convention, k).unwrap();
            let spacing = config.mode_spacing();
            let mut worst: f64 = 0.0;
            for (r, off) in s.offsets().iter().enumerate() {
                let res = secular_residual_at_offset(&config, convention, r, *off).unwrap();
                worst = worst.max(res.abs());
                let om = s.roots()[r];
                let eps = off.to_f64();
                if r >= 1 && !(eps > 0.0 && eps < 1.0) {
                    pass = false;
                }
                if r >= 1 && !(om > r as f64 * spacing && om < (r + 1) as f64 * spacing) {
                    pass = false;
                }
            }
            if s.len() != k + 1 || worst > 1e-10 {
                pass = false;
            }
            let approx = approximate_spectrum(&config, config.regime(), k).unwrap();
            gaps.push(max_relative_gap(&s, &approx));
            notes.push(format!("{convention} d={delta:e}: max|res|={worst:.1e}"));
        }
        // deltas ascend, so gaps must ascend too
        let monotone = gaps.windows(2).all(|w| w[0] < w[1]);
        pass &= monotone;
        notes.push(format!(
            "{convention} gaps {:?} monotone={monotone}",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn oracle_equivalence(system: &OracleSystem) -> Outcome {
    let start = Instant::now();
    let eigen = diagonalize(system).unwrap();
    let orth = eigen.orthonormality_defect();
    let t0_sum = eigen.t0_sum_defect();
    let secular = verify_secular(&eigen, system).unwrap();
    let tkr = verify_tkr(&eigen, system).unwrap();
    let p0 = survival_oracle(0.0, &eigen).probability;
    let spacing = system.bath()[0];
    let times = time_grid(100.0 * 2.0 * PI / spacing, 20).unwrap();
    let unitarity = times
        .iter()
        .map(|&t| (survival_oracle(t, &eigen).unitarity - 1.0).abs())
        .fold(0.0, f64::max);
    let interlaced = eigen.interlaces(system);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = orth <= 1e-10
        && t0_sum <= 1e-12
        && secular.max_residual <= 1e-8
        && tkr <= 1e-8
        && (p0 - 1.0).abs() <= 1e-12
        && unitarity <= 1e-10
        && interlaced
        && elapsed < 60.0;
    outcome(
        pass,
        format!(
            "N={} |TtT-I|={orth:.1e} |sum t0^2-1|={t0_sum:.1e} secular={:.1e} \
             (Newton {:.1e}) tkr={tkr:.1e} |P(0)-1|={:.1e} unitarity={unitarity:.1e} \
             interlacing={interlaced} sweeps={} runtime={elapsed:.1}s",
            system.n_modes(),
            secular.max_residual,
            secular.max_newton,
            (p0 - 1.0).abs(),
            eigen.sweeps
        ),
    )
}

fn two_mode() -> Outcome {
    let system = OracleSystem::from_parts(1.0, vec![1.0], vec![0.5]).unwrap();
    let eigen = diagonalize(&system).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut pass = (eigen.omega_sq[0] - 0.5).abs() <= 1e-12
        && (eigen.omega_sq[1] - 1.5).abs() <= 1e-12
        && eigen.vectors.iter().all(|v| (v[0] - h).abs() <= 1e-12);
    let beat = 1.5f64.sqrt() - 0.5f64.sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let t = i as f64 * 0.25;
        let p = survival_oracle(t, &eigen).probability;
        worst = worst.max((p - 0.5 * (1.0 + (beat * t).cos())).abs());
    }
    pass &= worst <= 1e-12;
    outcome(
        pass,
        format!(
            "Omega^2 = {:?}, t0 = [{:.15}, {:.15}], max survival error {worst:.1e}",
            eigen.omega_sq, eigen.vectors[0][0], eigen.vectors[1][0]
        ),
    )
}

fn series_identities() -> Outcome {
    let k = 10_000;
    let mut pass = true;
    let mut notes = Vec::new();
    for &delta in &[1e-3, 1e-2, 0.05] {
        let config = config_with_delta(delta);
        let at_k = SeriesModel::new(&config, CouplingRegime::Weak, k)
            .unwrap()
            .evaluate(0.0);
        let at_2k = SeriesModel::new(&config, CouplingRegime::Weak, 2 * k)
            .unwrap()
            .evaluate(0.0);
        let extrapolated = richardson_1_over_k(at_k, at_2k);
        let expected = 1.0 - PI / 3.0 * delta + 4.0 * PI * PI / 9.0 * delta * delta;
        let err = (extrapolated - expected).abs();
        let tail = tail_bound(delta, k);
        pass &= err <= tail;
        notes.push(format!("t=0 d={delta:e}: err={err:.1e} tail={tail:.1e}"));
    }
    let (s1, s2) = (-ZETA2, -ZETA2 * ZETA2);
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        let delta = 0.01 * i as f64;
        worst = worst
            .max((weak_series_from_sums(delta, s1, s2) - min_weak(delta).unwrap().value).abs());
        worst = worst
            .max((strong_series_from_sums(delta, s1, s2) - min_strong(delta).unwrap().value).abs());
    }
    pass &= worst <= 1e-12;
    notes.push(format!("cos=-1 substitution max error {worst:.1e}"));
    outcome(pass, notes.join("; "))
}

fn convention_diagnostic() -> Outcome {
    let n = 2000;
    let config = config_with_delta(1e-3).with_mode_count(n).unwrap();
    let times = time_grid(50.0 * config.cavity_l() / config.light_speed(), 200).unwrap();
    match compare_pipelines(&config, n, &times) {
        Ok(report) => {
            let both = report.deviations.len() == 2 && report.rows.len() == report.shared_modes + 1;
            let per = report
                .deviations
                .iter()
                .map(|d| {
                    format!(
                        "{}: max rel dOmega={:.2e} Omega_0 rel={:.2e} max dw={:.2e} max dP={:.2e}",
                        d.convention, d.max_rel_omega, d.rel_omega0, d.max_weight, d.max_survival
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            outcome(
                both,
                format!(
                    "{per}; tail={:.2e}; better match: {}",
                    report.tail, report.better
                ),
            )
        }
        Err(e) => outcome(false, format!("compare_pipelines failed: {e}")),
    }
}

fn run_cli(args: &[&str], out: &Path) -> Option<(Vec<u8>, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_cavdecay"))
        .args(args)
        .arg("--output")
        .arg(out)
        .output()
        .ok()?;
    if !status.status.success() {
        return None;
    }
    Some((std::fs::read(out).ok()?, status.stdout))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let phys = ["--omega-bar", "4e14", "--g", "2.9197e12", "--L", "1e-6"];
    let commands: Vec<(&str, Vec<&str>)> = vec![
        (
            "spectrum",
            [&["spectrum", "--modes", "300"][..], &phys].concat(),
        ),
        (
            "evolve",
            [&["evolve", "--modes", "300", "--steps", "500"][..], &phys].concat(),
        ),
        (
            "evolve-weak",
            [
                &["evolve", "--regime", "weak", "--modes", "2000"][..],
                &phys,
            ]
            .concat(),
        ),
        (
            "scan-min",
            vec![
                "scan-min",
                "--regime",
                "strong",
                "--delta-lo",
                "0",
                "--delta-hi",
                "0.5",
                "--g",
                "1e10",
            ],
        ),
        (
            "oracle",
            [&["oracle", "--n", "60", "--modes", "60"][..], &phys].concat(),
        ),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, args) in &commands {
        let a = run_cli(args, &dir.path().join(format!("{name}-a.csv")));
        let b = run_cli(args, &dir.path().join(format!("{name}-b.csv")));
        let same = matches!((&a, &b), (Some(x), Some(y)) if x == y && !x.0.is_empty());
        pass &= same;
        notes.push(format!(
            "{name}={}",
            if same { "identical" } else { "DIFFERENT" }
        ));
    }
    outcome(pass, notes.join(" "))
}

fn main() {
    let oracle_config = config_with_delta(1e-3);
    let oracle_system = build_system(&oracle_config, 2000).unwrap();

    let criteria: Vec<Criterion> = vec![
        ("weak-coupling stability number", Box::new(weak_stability)),
        ("weak-coupling parabola", Box::new(weak_parabola)),
        ("strong-coupling threshold", Box::new(strong_threshold)),
        ("spectrum correctness", Box::new(spectrum_correctness)),
        (
            "oracle equivalence",
            Box::new(move || oracle_equivalence(&oracle_system)),
        ),
        ("two-mode analytic check", Box::new(two_mode)),
        ("series identities", Box::new(series_identities)),
        ("convention diagnostic", Box::new(convention_diagnostic)),
        ("determinism", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| outcome(false, "panicked".into()));
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
