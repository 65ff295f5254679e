//! Randomized checks of the entropy inequalities behind the bounds.
//!
//! Theorem-grade checks (quantum EPI, cq-EPI, maximum entropy, thermal minimum
//! output entropy) count as violations when their margin drops below
//! `−(bias + 1e-6)`. Probe-grade checks (the EPNI conjectures) only flag
//! candidates and never fail a suite.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{
    apply_attenuator_to, apply_classical_noise, MixtureComponent, NoiseDensity, QuadratureSpec, TabulatedDensity,
};
use crate::exec::{self, Execution};
use crate::fock::{make_thermal_state, random_density_matrix, thermal_dim_for_tail, DensityMatrix, TAIL_WARN};
use crate::gauss::{extract_moments, g, g_inverse, gaussified_entropy};
use crate::{Error, Result};

/// Slack added to the truncation-bias estimate of theorem checks.
pub const BASE_TOLERANCE: f64 = 1e-6;
/// Tolerance of the maximum-entropy check, which involves no truncation.
pub const MAXENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grade {
    Theorem,
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// `e^S` with `S` in nats.
    EntropyPower,
    Nats,
    Photons,
}

/// One evaluated inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityMargin {
    pub check: String,
    pub grade: Grade,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub units: Units,
    pub spec: String,
    pub dim: usize,
    /// Drift of the margin between the working truncation and a larger one.
    pub bias: f64,
    pub tolerance: f64,
    /// Theorem check below `−tolerance`.
    pub violated: bool,
    /// Probe below `−tolerance`: a counterexample candidate.
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InequalityMargin {
    #[allow(clippy::too_many_arguments)]
    fn new(
        check: &str,
        grade: Grade,
        lhs: f64,
        rhs: f64,
        units: Units,
        spec: String,
        dim: usize,
        bias: f64,
        tolerance: f64,
    ) -> Self {
        let margin = lhs - rhs;
        let below = margin < -tolerance;
        InequalityMargin {
            check: check.into(),
            grade,
            lhs,
            rhs,
            margin,
            units,
            spec,
            dim,
            bias,
            tolerance,
            violated: below && grade == Grade::Theorem,
            flagged: below && grade == Grade::Probe,
            seed: None,
        }
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn check_single(state: &DensityMatrix) -> Result<()> {
    if state.modes() != 1 {
        return Err(Error::ModeCount {
            expected: 1,
            got: state.modes(),
        });
    }
    Ok(())
}

fn pad_to(state: &DensityMatrix, dim: usize) -> Result<DensityMatrix> {
    check_single(state)?;
    if state.dim() > dim {
        return Err(Error::TruncationInadequate(format!(
            "state has {} levels but the check runs at dim {dim}",
            state.dim()
        )));
    }
    Ok(state.padded(dim))
}

/// `S(E_{λ,σ}(ρ))` with both inputs padded to `dim`.
fn attenuated_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, lambda: f64, dim: usize) -> Result<f64> {
    let out = apply_attenuator_to(&pad_to(rho, dim)?, lambda, &pad_to(sigma, dim)?, Execution::Sequential)?;
    out.von_neumann_entropy()
}

/// Quantum EPI: `e^{S(E_{λ,σ}(ρ))} ≥ λe^{S(ρ)} + (1−λ)e^{S(σ)}`.
pub fn check_qepi(rho: &DensityMatrix, sigma: &DensityMatrix, lambda: f64, dim: usize) -> Result<InequalityMargin> {
    let s_out = attenuated_entropy(rho, sigma, lambda, dim)?;
    let s_out_wide = attenuated_entropy(rho, sigma, lambda, dim + 8)?;
    let lhs = s_out.exp();
    let rhs = lambda * rho.von_neumann_entropy()?.exp() + (1.0 - lambda) * sigma.von_neumann_entropy()?.exp();
    let bias = (s_out_wide.exp() - lhs).abs();
    Ok(InequalityMargin::new(
        "qepi",
        Grade::Theorem,
        lhs,
        rhs,
        Units::EntropyPower,
        format!("lambda={lambda}"),
        dim,
        bias,
        bias + BASE_TOLERANCE,
    ))
}

/// Output entropy of `F_{t,f}(ρ)` with automatic truncation, and the drift when
/// the output is cut 8 levels higher.
fn noisy_entropy(rho: &DensityMatrix, t: f64, f: &NoiseDensity, quad: &QuadratureSpec) -> Result<(f64, f64, usize)> {
    let auto = QuadratureSpec {
        output_dim: None,
        ..*quad
    };
    let out = apply_classical_noise(rho, t, f, &auto, Execution::Sequential)?;
    let wide = QuadratureSpec {
        output_dim: Some(out.dim() + 8),
        ..auto
    };
    let out_wide = apply_classical_noise(rho, t, f, &wide, Execution::Sequential)?;
    Ok((out.von_neumann_entropy()?, out_wide.von_neumann_entropy()?, out.dim()))
}

/// cq-EPI: `e^{S(F_{t,f}(ρ))} ≥ e^{S(ρ)} + t·e^{H(f)}`.
pub fn check_cqepi(
    rho: &DensityMatrix,
    t: f64,
    f: &NoiseDensity,
    dim: usize,
    quad: &QuadratureSpec,
) -> Result<InequalityMargin> {
    let rho = pad_to(rho, dim)?;
    let (s, s_wide, out_dim) = noisy_entropy(&rho, t, f, quad)?;
    let lhs = s.exp();
    let rhs = rho.von_neumann_entropy()?.exp() + t * f.entropy()?.exp();
    let bias = (s_wide.exp() - lhs).abs();
    Ok(InequalityMargin::new(
        "cqepi",
        Grade::Theorem,
        lhs,
        rhs,
        Units::EntropyPower,
        format!("t={t} f={} out_dim={out_dim}", f.describe()),
        dim,
        bias,
        bias + BASE_TOLERANCE,
    ))
}

/// Maximum entropy: `S([ρ]) ≥ S(ρ)`.
pub fn check_maxent(rho: &DensityMatrix) -> Result<InequalityMargin> {
    check_single(rho)?;
    let lhs = gaussified_entropy(&extract_moments(rho)?)?;
    let rhs = rho.von_neumann_entropy()?;
    Ok(InequalityMargin::new(
        "maxent",
        Grade::Theorem,
        lhs,
        rhs,
        Units::Nats,
        format!("N={}", rho.mean_photon_number()),
        rho.dim(),
        0.0,
        MAXENT_TOLERANCE,
    ))
}

fn thermal_env_dim(n_thermal: f64, dim: usize) -> usize {
    dim.max(thermal_dim_for_tail(n_thermal, TAIL_WARN))
}

/// Thermal minimum output entropy: `S(E_{λ,ρ_th,N}(σ)) ≥ g(λ·g⁻¹[S(σ)] + (1−λ)N)`.
///
/// The thermal environment is cut at `dim` or where its tail falls below
/// `1e-10`, whichever is larger.
pub fn check_minout_thermal(
    sigma: &DensityMatrix,
    lambda: f64,
    n_thermal: f64,
    dim: usize,
) -> Result<InequalityMargin> {
    check_single(sigma)?;
    let env_dim = thermal_env_dim(n_thermal, dim);
    let entropy_at = |d: usize| -> Result<f64> {
        let env = make_thermal_state(n_thermal, d)?;
        apply_attenuator_to(sigma, lambda, &env, Execution::Sequential)?.von_neumann_entropy()
    };
    let lhs = entropy_at(env_dim)?;
    let bias = (entropy_at(env_dim + 8)? - lhs).abs();
    let rhs = g(lambda * g_inverse(sigma.von_neumann_entropy()?)? + (1.0 - lambda) * n_thermal)?;
    Ok(InequalityMargin::new(
        "minout",
        Grade::Theorem,
        lhs,
        rhs,
        Units::Nats,
        format!("lambda={lambda} N_thermal={n_thermal}"),
        env_dim,
        bias,
        bias + BASE_TOLERANCE,
    ))
}

/// EPNI probe (single mode): `g⁻¹(S(E_{λ,σ}(ρ))) ≥ λg⁻¹(S(ρ)) + (1−λ)g⁻¹(S(σ))`.
pub fn probe_epni(rho: &DensityMatrix, sigma: &DensityMatrix, lambda: f64, dim: usize) -> Result<InequalityMargin> {
    let lhs = g_inverse(attenuated_entropy(rho, sigma, lambda, dim)?)?;
    let wide = g_inverse(attenuated_entropy(rho, sigma, lambda, dim + 8)?)?;
    let rhs =
        lambda * g_inverse(rho.von_neumann_entropy()?)? + (1.0 - lambda) * g_inverse(sigma.von_neumann_entropy()?)?;
    let bias = (wide - lhs).abs();
    Ok(InequalityMargin::new(
        "epni",
        Grade::Probe,
        lhs,
        rhs,
        Units::Photons,
        format!("lambda={lambda}"),
        dim,
        bias,
        bias + BASE_TOLERANCE,
    ))
}

/// cq-EPNI probe: `g⁻¹(S(F_{t,f}(ρ))) ≥ g⁻¹(S(ρ)) + (t/e)·e^{H(f)}`.
pub fn probe_cqepni(
    rho: &DensityMatrix,
    t: f64,
    f: &NoiseDensity,
    dim: usize,
    quad: &QuadratureSpec,
) -> Result<InequalityMargin> {
    let rho = pad_to(rho, dim)?;
    cqepni_margin("cqepni", &rho, t, f, dim, quad)
}

/// cq-EPNI probe with a thermal input of mean photon `n`:
/// `g⁻¹(S(F_{t,f}(ρ_th,N))) ≥ N + (t/e)·e^{H(f)}`.
pub fn probe_cqepni_thermal(n: f64, t: f64, f: &NoiseDensity, quad: &QuadratureSpec) -> Result<InequalityMargin> {
    let dim = thermal_dim_for_tail(n, TAIL_WARN);
    let rho = make_thermal_state(n, dim)?;
    cqepni_margin("cqepni-thermal", &rho, t, f, dim, quad)
}

fn cqepni_margin(
    name: &str,
    rho: &DensityMatrix,
    t: f64,
    f: &NoiseDensity,
    dim: usize,
    quad: &QuadratureSpec,
) -> Result<InequalityMargin> {
    let (s, s_wide, out_dim) = noisy_entropy(rho, t, f, quad)?;
    let lhs = g_inverse(s)?;
    let rhs = g_inverse(rho.von_neumann_entropy()?)? + t / E * f.entropy()?.exp();
    let bias = (g_inverse(s_wide)? - lhs).abs();
    Ok(InequalityMargin::new(
        name,
        Grade::Probe,
        lhs,
        rhs,
        Units::Photons,
        format!("t={t} f={} out_dim={out_dim}", f.describe()),
        dim,
        bias,
        bias + BASE_TOLERANCE,
    ))
}

/// Suite configuration; every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides every per-check truncation when set.
    pub dim: Option<usize>,
    /// Mean-photon cap of the random states.
    pub photon_cap: f64,
    pub qepi_trials: usize,
    pub qepi_dim: usize,
    pub cqepi_trials: usize,
    pub cqepi_dim: usize,
    pub nodes_per_axis: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub maxent_trials: usize,
    pub maxent_dim: usize,
    pub minout_trials: usize,
    pub minout_dim: usize,
    pub max_thermal: f64,
    pub epni_probes: usize,
    pub cqepni_probes: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 2015,
            dim: None,
            photon_cap: 1.0,
            qepi_trials: 200,
            qepi_dim: 16,
            cqepi_trials: 100,
            cqepi_dim: 24,
            nodes_per_axis: 41,
            t_min: 0.05,
            t_max: 0.25,
            maxent_trials: 100,
            maxent_dim: 16,
            minout_trials: 100,
            minout_dim: 16,
            max_thermal: 3.0,
            epni_probes: 50,
            cqepni_probes: 10,
        }
    }
}

impl SuiteConfig {
    /// Parses `key = value` lines (TOML syntax).
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.photon_cap >= 0.0) || !(self.max_thermal >= 0.0) {
            return Err(Error::Config("photon_cap and max_thermal must be >= 0".into()));
        }
        if !(self.t_min > 0.0) || !(self.t_max >= self.t_min) {
            return Err(Error::Config("need 0 < t_min <= t_max".into()));
        }
        if self.nodes_per_axis == 0 {
            return Err(Error::Config("nodes_per_axis must be positive".into()));
        }
        Ok(())
    }

    fn dim_for(&self, own: usize) -> usize {
        self.dim.unwrap_or(own)
    }

    /// Every check whose truncation is too small for the photon cap.
    fn guard(&self, dim: usize) -> Result<()> {
        if dim == 0 || 4.0 * self.photon_cap > dim as f64 {
            return Err(Error::TruncationInadequate(format!(
                "photon cap {} needs dim >= {}, got {dim}",
                self.photon_cap,
                (4.0 * self.photon_cap).ceil()
            )));
        }
        Ok(())
    }

    fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            nodes_per_axis: self.nodes_per_axis,
            ..QuadratureSpec::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub trials: usize,
    pub violations: usize,
    pub flagged: usize,
    pub errors: usize,
    pub min_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub grade: Grade,
    pub summary: CheckSummary,
    pub records: Vec<InequalityMargin>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.summary.violations).sum()
    }

    /// Errors in theorem checks; probe errors are reported but do not fail.
    pub fn theorem_errors(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.grade == Grade::Theorem)
            .map(|c| c.summary.errors)
            .sum()
    }

    pub fn flagged(&self) -> usize {
        self.checks.iter().map(|c| c.summary.flagged).sum()
    }

    /// True when no theorem check was violated or failed to run.
    pub fn passed(&self) -> bool {
        self.violations() == 0 && self.theorem_errors() == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per record: `check,grade,seed,dim,lhs,rhs,margin,bias,tolerance,violated,flagged`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,grade,seed,dim,lhs,rhs,margin,bias,tolerance,violated,flagged\n");
        for c in &self.checks {
            for r in &c.records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.check,
                    if r.grade == Grade::Theorem { "theorem" } else { "probe" },
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    r.dim,
                    r.lhs,
                    r.rhs,
                    r.margin,
                    r.bias,
                    r.tolerance,
                    r.violated,
                    r.flagged
                ));
            }
        }
        out
    }
}

/// Per-trial seeds from the master seed; `stream` separates the checks.
fn trial_seeds(master: u64, stream: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    (0..n).map(|_| rng.random()).collect()
}

/// A random noise density from one of four families, chosen by `kind`.
pub fn random_noise(rng: &mut impl Rng, kind: usize) -> NoiseDensity {
    let random_cov = |rng: &mut dyn rand::RngCore| {
        let (a, b) = (rng.random_range(0.3..2.0), rng.random_range(0.3..2.0));
        let phi: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (c, s) = (phi.cos(), phi.sin());
        let off = (a - b) * c * s;
        [[a * c * c + b * s * s, off], [off, a * s * s + b * c * c]]
    };
    match kind % 4 {
        0 => NoiseDensity::Gaussian {
            mean: [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)],
            cov: random_cov(rng),
        },
        1 => {
            let w: f64 = rng.random_range(0.2..0.8);
            let d: f64 = rng.random_range(0.5..1.5);
            NoiseDensity::GaussianMixture {
                components: vec![
                    MixtureComponent {
                        weight: w,
                        mean: [d, 0.0],
                        cov: random_cov(rng),
                    },
                    MixtureComponent {
                        weight: 1.0 - w,
                        mean: [-d, 0.0],
                        cov: random_cov(rng),
                    },
                ],
            }
        }
        2 => NoiseDensity::UniformDisc {
            radius: rng.random_range(0.5..2.0),
        },
        _ => NoiseDensity::Tabulated(TabulatedDensity {
            xmin: -2.0,
            xmax: 2.0,
            ymin: -2.0,
            ymax: 2.0,
            nx: 4,
            ny: 4,
            values: (0..16).map(|_| rng.random_range(0.0..1.0)).collect(),
        }),
    }
}

fn collect(name: &str, grade: Grade, outcomes: Vec<Result<InequalityMargin>>) -> CheckResult {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let summary = CheckSummary {
        trials: records.len() + errors.len(),
        violations: records.iter().filter(|r| r.violated).count(),
        flagged: records.iter().filter(|r| r.flagged).count(),
        errors: errors.len(),
        min_margin: records.iter().map(|r| r.margin).reduce(f64::min),
    };
    CheckResult {
        name: name.into(),
        grade,
        summary,
        records,
        errors,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_check<F>(
    name: &str,
    grade: Grade,
    stream: u64,
    trials: usize,
    dim: usize,
    cfg: &SuiteConfig,
    exec: Execution,
    trial: F,
) -> CheckResult
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<InequalityMargin> + Sync + Send,
{
    if trials > 0 {
        if let Err(e) = cfg.guard(dim) {
            return collect(name, grade, vec![Err(e)]);
        }
    }
    let seeds = trial_seeds(cfg.seed, stream, trials);
    let outcomes = exec::map_range(exec, trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds[i]);
        trial(&mut rng, i).map(|m| m.with_seed(seeds[i]))
    });
    collect(name, grade, outcomes)
}

/// Runs every check of the configuration. Identical configurations give
/// identical reports, with or without threads.
pub fn run_suite(cfg: &SuiteConfig, exec: Execution) -> Result<SuiteReport> {
    cfg.validate()?;
    let cap = cfg.photon_cap;
    let quad = cfg.quadrature();
    let mut checks = Vec::new();

    let d = cfg.dim_for(cfg.qepi_dim);
    checks.push(run_check(
        "qepi",
        Grade::Theorem,
        1,
        cfg.qepi_trials,
        d,
        cfg,
        exec,
        |rng, _| {
            let rho = random_density_matrix(d, cap, rng.random())?;
            let sigma = random_density_matrix(d, cap, rng.random())?;
            check_qepi(&rho, &sigma, rng.random_range(0.0..=1.0), d)
        },
    ));

    let d = cfg.dim_for(cfg.cqepi_dim);
    checks.push(run_check(
        "cqepi",
        Grade::Theorem,
        2,
        cfg.cqepi_trials,
        d,
        cfg,
        exec,
        |rng, i| {
            let rho = random_density_matrix(d, cap, rng.random())?;
            let t = rng.random_range(cfg.t_min..=cfg.t_max);
            let f = random_noise(rng, i);
            check_cqepi(&rho, t, &f, d, &quad)
        },
    ));

    let d = cfg.dim_for(cfg.maxent_dim);
    checks.push(run_check(
        "maxent",
        Grade::Theorem,
        3,
        cfg.maxent_trials,
        d,
        cfg,
        exec,
        |rng, _| check_maxent(&random_density_matrix(d, cap, rng.random())?),
    ));

    let d = cfg.dim_for(cfg.minout_dim);
    checks.push(run_check(
        "minout",
        Grade::Theorem,
        4,
        cfg.minout_trials,
        d,
        cfg,
        exec,
        |rng, _| {
            let sigma = random_density_matrix(d, cap, rng.random())?;
            let lambda = rng.random_range(0.0..=1.0);
            let n = rng.random_range(0.0..=cfg.max_thermal);
            check_minout_thermal(&sigma, lambda, n, d)
        },
    ));

    let d = cfg.dim_for(cfg.qepi_dim);
    checks.push(run_check(
        "epni",
        Grade::Probe,
        5,
        cfg.epni_probes,
        d,
        cfg,
        exec,
        |rng, _| {
            let rho = random_density_matrix(d, cap, rng.random())?;
            let sigma = random_density_matrix(d, cap, rng.random())?;
            probe_epni(&rho, &sigma, rng.random_range(0.0..=1.0), d)
        },
    ));

    let d = cfg.dim_for(cfg.cqepi_dim);
    checks.push(run_check(
        "cqepni",
        Grade::Probe,
        6,
        cfg.cqepni_probes,
        d,
        cfg,
        exec,
        |rng, i| {
            let t = rng.random_range(cfg.t_min..=cfg.t_max);
            let f = random_noise(rng, i);
            if i % 2 == 0 {
                probe_cqepni_thermal(rng.random_range(0.0..=cap), t, &f, &quad)
            } else {
                let rho = random_density_matrix(d, cap, rng.random())?;
                probe_cqepni(&rho, t, &f, d, &quad)
            }
        },
    ));

    Ok(SuiteReport {
        config: cfg.clone(),
        checks,
    })
}
