//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bcw_core::bounds::{bound_curve, linear_grid, shannon_additive_bounds, ChannelParams, Method};
use bcw_core::channels::{
    apply_attenuator, apply_classical_noise, holevo_coherent_rate, ChannelSpec, MixtureComponent, NoiseDensity,
    QuadratureSpec, StateSpec,
};
use bcw_core::exec::Execution;
use bcw_core::fock::random_density_matrix;
use bcw_core::verify::{run_suite, Grade, SuiteConfig};
use bcw_core::Complex64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Independent `g`, written out from the definition.
fn g(n: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        (n + 1.0) * (n + 1.0).ln() - n * n.ln()
    }
}

/// Bisection inverse of [`g`].
fn g_inv(s: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi) < s {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn gaussian_collapse_attenuator() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in [0.1, 0.5, 0.9] {
        for n_e in [0.5, 2.0, 5.0] {
            let params = ChannelParams::attenuator(lambda, n_e, g(n_e));
            for n in [0.0, 1.0, 5.0, 20.0] {
                let r = params.bounds(n, Method::Epni).map_err(err)?;
                let exact = g(lambda * n + (1.0 - lambda) * n_e) - g((1.0 - lambda) * n_e);
                worst = worst.max((r.upper - exact).abs()).max((r.lower - exact).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("36 cases, max deviation {worst:.1e}, {elapsed:?}"))
}

fn gaussian_collapse_classical_noise() -> Outcome {
    let stats = NoiseDensity::standard_gaussian().stats().map_err(err)?;
    let mut worst: f64 = 0.0;
    for t in [0.3, 1.0, 3.0] {
        let params = ChannelParams::classical_noise(t, stats.energy, stats.entropy);
        for n in [0.0, 1.0, 5.0, 20.0] {
            let r = params.bounds(n, Method::Epni).map_err(err)?;
            let exact = g(n + 2.0 * PI * t) - g(2.0 * PI * t);
            worst = worst.max((r.upper - exact).abs()).max((r.lower - exact).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    Ok(format!("12 cases, max deviation {worst:.1e}"))
}

fn pure_loss() -> Outcome {
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for lambda in [0.25, 0.5, 0.9] {
        let params = ChannelParams::attenuator(lambda, 0.0, 0.0);
        for method in [Method::Epi, Method::Epni] {
            let r = params.bounds(1.0, method).map_err(err)?;
            ensure(r.gap_bound == 0.0, || {
                format!("{method:?} gap_bound {} at lambda={lambda}", r.gap_bound)
            })?;
        }
        let spec = ChannelSpec::Attenuator {
            lambda,
            env: StateSpec::Number { n: 0 },
        };
        for n in [0.5, 1.0, 2.0, 3.0] {
            let h = holevo_coherent_rate(&spec, n, 40, &quad, Execution::Parallel).map_err(err)?;
            worst = worst.max((h.rate - g(lambda * n)).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 5e-3, || format!("Holevo deviation {worst:e} > 5e-3"))?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "gap_bound 0, Holevo max deviation {worst:.1e} nats, {elapsed:?}"
    ))
}

fn figure_one() -> Outcome {
    let g2 = bcw_core::gauss::g(2.0).map_err(err)?;
    ensure((g2 - 1.9095).abs() <= 5e-4, || format!("g(2) = {g2}"))?;
    let params = ChannelParams::attenuator(0.75, 2.0, 0.91);
    params.validate().map_err(err)?;
    ensure(0.91 < g2, || "S_E >= g(N_E)".into())?;

    let (lambda, n_e, s_e) = (0.75, 2.0, 0.91);
    let mu = 1.0 - lambda;
    let upper = g(mu * n_e) - (lambda + mu * f64::exp(s_e)).ln();
    let lower = g(mu * g_inv(s_e)) - g(mu * n_e);
    let r = params.bounds(0.0, Method::Epi).map_err(err)?;
    ensure((r.upper - upper).abs() <= 1e-12, || {
        format!("upper {} vs {upper}", r.upper)
    })?;
    ensure((r.lower - lower).abs() <= 1e-12, || {
        format!("lower {} vs {lower}", r.lower)
    })?;
    ensure((upper - 0.639).abs() <= 5e-4 && (lower + 0.585).abs() <= 5e-4, || {
        format!("endpoints {upper} / {lower} do not round to 0.639 / -0.585")
    })?;
    Ok(format!(
        "g(2) = {g2:.6}, N=0 upper {:.6}, lower {:.6}",
        r.upper, r.lower
    ))
}

fn figure_two() -> Outcome {
    let (t, e_f, h_f) = (1.0, 2.0, 15.1f64.ln());
    ensure(h_f.exp() < 2.0 * PI * E, || "e^H >= 2 pi e".into())?;
    let params = ChannelParams::classical_noise(t, e_f, h_f);
    params.validate().map_err(err)?;

    let added = PI * t * e_f;
    let upper = g(added) - (1.0 + t * h_f.exp()).ln();
    let lower = (1.0 + t * h_f.exp()).ln() - g(added);
    let r = params.bounds(0.0, Method::Epi).map_err(err)?;
    ensure((r.upper - upper).abs() <= 1e-12, || {
        format!("upper {} vs {upper}", r.upper)
    })?;
    ensure((r.lower - lower).abs() <= 1e-12, || {
        format!("lower {} vs {lower}", r.lower)
    })?;
    ensure((upper + lower).abs() <= 1e-12, || "endpoints are not symmetric".into())?;
    Ok(format!(
        "e^H = 15.1 < 2 pi e = {:.3}, N=0 endpoints +/-{:.6}",
        2.0 * PI * E,
        r.upper
    ))
}

fn gap_property() -> Outcome {
    let mut specs = Vec::new();
    for (n, lambda) in [(1, 0.5), (2, 0.75), (3, 0.3), (5, 0.9), (8, 0.6)] {
        let s = StateSpec::Number { n }.stats().map_err(err)?;
        specs.push((
            format!("number:{n} lambda={lambda}"),
            ChannelParams::attenuator(lambda, s.mean_photon, s.entropy),
        ));
    }
    let sup = StateSpec::Superposition {
        coefficients: vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ],
    }
    .stats()
    .map_err(err)?;
    specs.push((
        "superposition lambda=0.5".into(),
        ChannelParams::attenuator(0.5, sup.mean_photon, sup.entropy),
    ));
    let mixture = NoiseDensity::GaussianMixture {
        components: vec![
            MixtureComponent {
                weight: 0.5,
                mean: [1.0, 0.0],
                cov: [[0.3, 0.0], [0.0, 0.3]],
            },
            MixtureComponent {
                weight: 0.5,
                mean: [-1.0, 0.0],
                cov: [[0.3, 0.0], [0.0, 0.3]],
            },
        ],
    };
    for (name, f) in [
        ("disc:1", NoiseDensity::UniformDisc { radius: 1.0 }),
        ("disc:2.5", NoiseDensity::UniformDisc { radius: 2.5 }),
        ("mixture", mixture),
    ] {
        let s = f.stats().map_err(err)?;
        for t in [0.2, 1.0] {
            specs.push((
                format!("{name} t={t}"),
                ChannelParams::classical_noise(t, s.energy, s.entropy),
            ));
        }
    }

    let mut grid = linear_grid(0.0, 10.0, 0.01).map_err(err)?;
    grid.extend(linear_grid(11.0, 1000.0, 1.0).map_err(err)?);
    for (name, params) in &specs {
        for method in [Method::Epi, Method::Epni] {
            let curve = bound_curve(params, &grid, method, Execution::Parallel).map_err(err)?;
            let mut prev = f64::INFINITY;
            for r in &curve {
                let gap = r.gap();
                ensure(gap <= prev + 1e-9, || {
                    format!("{name} {method:?}: gap grows at N={}", r.n)
                })?;
                ensure(gap <= r.gap_bound + 1e-9, || {
                    format!("{name} {method:?}: gap {gap} > bound {} at N={}", r.gap_bound, r.n)
                })?;
                prev = gap;
            }
        }
    }
    Ok(format!(
        "{} specs x 2 methods on {} grid points up to N=1000",
        specs.len(),
        grid.len()
    ))
}

fn verify_sweep() -> Outcome {
    let start = Instant::now();
    let report = run_suite(&SuiteConfig::default(), Execution::Parallel).map_err(err)?;
    let elapsed = start.elapsed();
    let counts: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{} {}", c.name, c.summary.trials))
        .collect();
    ensure(report.violations() == 0, || {
        format!("{} violations", report.violations())
    })?;
    ensure(report.theorem_errors() == 0, || {
        format!("{} errors", report.theorem_errors())
    })?;
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("zero violations ({}), {elapsed:.1?}", counts.join(", ")))
}

fn moment_propagation() -> Outcome {
    let mut worst_att: f64 = 0.0;
    let envs = [
        StateSpec::Thermal { mean_photon: 0.7 },
        StateSpec::Number { n: 2 },
        StateSpec::Number { n: 0 },
    ];
    for (k, env) in envs.iter().enumerate() {
        let n_e = env.mean_photon_number();
        for lambda in [0.1, 0.5, 0.9] {
            for seed in 0..4u64 {
                let rho = random_density_matrix(12, 1.5, 100 * k as u64 + seed).map_err(err)?;
                let out = apply_attenuator(&rho, lambda, env, 40, Execution::Sequential).map_err(err)?;
                let expect = lambda * rho.mean_photon_number() + (1.0 - lambda) * n_e;
                worst_att = worst_att.max((out.mean_photon_number() - expect).abs());
            }
        }
    }
    ensure(worst_att <= 1e-5, || format!("attenuator deviation {worst_att:e}"))?;

    let mut worst_noise: f64 = 0.0;
    let quad = QuadratureSpec::default();
    let densities = [
        NoiseDensity::standard_gaussian(),
        NoiseDensity::UniformDisc { radius: 1.2 },
        NoiseDensity::GaussianMixture {
            components: vec![
                MixtureComponent {
                    weight: 0.3,
                    mean: [0.7, 0.0],
                    cov: [[0.4, 0.1], [0.1, 0.5]],
                },
                MixtureComponent {
                    weight: 0.7,
                    mean: [-0.3, 0.0],
                    cov: [[0.6, 0.0], [0.0, 0.2]],
                },
            ],
        },
    ];
    for (k, f) in densities.iter().enumerate() {
        for t in [0.05, 0.2] {
            let rho = random_density_matrix(6, 1.0, 17 + k as u64).map_err(err)?;
            let rho_mean = bcw_core::gauss::extract_moments(&rho).map_err(err)?.mean;
            let mu = f.mean();
            let cross = (2.0 * PI * t).sqrt() * (rho_mean[0] * mu[0] + rho_mean[1] * mu[1]);
            let out = apply_classical_noise(&rho, t, f, &quad, Execution::Parallel).map_err(err)?;
            let added = out.mean_photon_number() - rho.mean_photon_number() - cross;
            worst_noise = worst_noise.max((added - PI * t * f.energy()).abs());
        }
    }
    ensure(worst_noise <= 1e-3, || {
        format!("classical-noise deviation {worst_noise:e}")
    })?;
    Ok(format!(
        "attenuator max deviation {worst_att:.1e}, classical noise {worst_noise:.1e}"
    ))
}

fn shannon() -> Outcome {
    let mut worst: f64 = 0.0;
    for (p, noise) in [(1.0, 1.0), (10.0, 0.5), (0.3, 4.0)] {
        let h = 0.5 * (2.0 * PI * E * noise).ln();
        let (lo, hi) = shannon_additive_bounds(p, h, noise).map_err(err)?;
        worst = worst.max((hi - lo).abs());
        // uniform on [-a, a] with variance a²/3 = noise
        let a = (3.0 * noise).sqrt();
        let (lo, hi) = shannon_additive_bounds(p, (2.0 * a).ln(), noise).map_err(err)?;
        ensure(hi - lo > 0.0, || format!("uniform gap {} at P={p}", hi - lo))?;
    }
    ensure(worst <= 1e-12, || format!("gaussian gap {worst:e}"))?;
    Ok(format!("gaussian gap {worst:.1e}, uniform gaps positive"))
}

fn probes_flag_only() -> Outcome {
    let cfg = SuiteConfig {
        qepi_trials: 0,
        cqepi_trials: 0,
        maxent_trials: 0,
        minout_trials: 0,
        epni_probes: 20,
        cqepni_probes: 4,
        ..SuiteConfig::default()
    };
    let mut report = run_suite(&cfg, Execution::Parallel).map_err(err)?;
    let probes: Vec<_> = report.checks.iter().filter(|c| c.grade == Grade::Probe).collect();
    let count = probes.len();
    ensure(count > 0, || "no probe checks ran".into())?;
    for c in &probes {
        ensure(c.records.iter().all(|r| !r.violated), || {
            format!("{} produced a violation", c.name)
        })?;
    }
    // a flagged probe leaves the verdict unchanged
    let check = report.checks.iter_mut().find(|c| c.grade == Grade::Probe).unwrap();
    let rec = &mut check.records[0];
    rec.margin = -1.0;
    rec.flagged = true;
    check.summary.flagged += 1;
    ensure(report.passed() && report.flagged() >= 1, || {
        "a flagged probe failed the suite".into()
    })?;
    Ok(format!("{} probe checks, never graded as violations", count))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("gaussian collapse, attenuator", gaussian_collapse_attenuator),
        ("gaussian collapse, classical noise", gaussian_collapse_classical_noise),
        ("pure loss", pure_loss),
        ("figure 1 anchors", figure_one),
        ("figure 2 anchors", figure_two),
        ("gap property", gap_property),
        ("inequality sweep", verify_sweep),
        ("moment propagation", moment_propagation),
        ("shannon bounds", shannon),
        ("probes are flag-only", probes_flag_only),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
