//! Attenuator and classical-noise channels on truncated Fock spaces.

mod environment;
pub mod noise;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use environment::{EnvironmentSpec, EnvironmentStats, StateSpec};
pub use noise::{MixtureComponent, NoiseDensity, NoiseStats, TabulatedDensity};

use crate::bounds::ChannelParams;
use crate::exec::{self, Execution};
use crate::fock::{
    attenuate, displacement_block, make_number_state, make_thermal_state, thermal_dim_for_tail, DensityMatrix,
    TAIL_WARN,
};
use crate::gauss::GaussianMoments;
use crate::{Error, Result};

/// Largest tail mass an input may have dropped before a channel refuses it.
pub const TAIL_LIMIT: f64 = 1e-6;

const MAX_OUTPUT_DIM: usize = 1200;
const NOISE_CHUNKS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelSpec {
    Attenuator { lambda: f64, env: StateSpec },
    ClassicalNoise { t: f64, noise: NoiseDensity },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelSpec::Attenuator { lambda, env } => {
                check_lambda(*lambda)?;
                env.validate()
            }
            ChannelSpec::ClassicalNoise { t, noise } => {
                check_t(*t)?;
                noise.validate()
            }
        }
    }

    /// The scalars the closed-form bounds depend on.
    pub fn bound_params(&self) -> Result<ChannelParams> {
        self.validate()?;
        Ok(match self {
            ChannelSpec::Attenuator { lambda, env } => ChannelParams::Attenuator {
                lambda: *lambda,
                env: env.stats()?,
            },
            ChannelSpec::ClassicalNoise { t, noise } => ChannelParams::ClassicalNoise {
                t: *t,
                noise: noise.stats()?,
            },
        })
    }

    pub fn describe(&self) -> String {
        match self {
            ChannelSpec::Attenuator { lambda, env } => format!("attenuator(lambda={lambda}, env={})", env.describe()),
            ChannelSpec::ClassicalNoise { t, noise } => format!("classical-noise(t={t}, f={})", noise.describe()),
        }
    }
}

/// Phase-space quadrature settings for the classical-noise channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    /// Largest density mass the rule may leave out, and largest output mass lost to truncation.
    pub coverage: f64,
    /// Fixed output truncation; chosen automatically when absent.
    pub output_dim: Option<usize>,
    /// Largest output population an automatic truncation may discard.
    pub output_tail: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes_per_axis: 41,
            coverage: 1e-6,
            output_dim: None,
            output_tail: 1e-10,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!(
            "transmissivity must lie in [0, 1], got {lambda}"
        )));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("noise parameter t must be > 0, got {t}")));
    }
    Ok(())
}

/// Fails when `state` was cut with more than [`TAIL_LIMIT`] of its mass missing.
pub fn check_tail(state: &DensityMatrix, what: &str) -> Result<()> {
    if state.tail_mass() > TAIL_LIMIT {
        return Err(Error::TruncationInadequate(format!(
            "{what} loses mass {:e} at dim {}",
            state.tail_mass(),
            state.dim()
        )));
    }
    Ok(())
}

/// `E_{λ,σ}(ρ) = tr_E[U_λ(ρ⊗σ)U_λ†]` with `σ` the environment materialized at `dim`.
///
/// The output has `ρ.dim + dim − 1` levels.
pub fn apply_attenuator(
    rho: &DensityMatrix,
    lambda: f64,
    env: &StateSpec,
    dim: usize,
    exec: Execution,
) -> Result<DensityMatrix> {
    check_lambda(lambda)?;
    let sigma = env.materialize(dim)?;
    apply_attenuator_to(rho, lambda, &sigma, exec)
}

/// [`apply_attenuator`] with an explicit environment state.
pub fn apply_attenuator_to(
    rho: &DensityMatrix,
    lambda: f64,
    sigma: &DensityMatrix,
    exec: Execution,
) -> Result<DensityMatrix> {
    check_lambda(lambda)?;
    check_tail(rho, "input state")?;
    check_tail(sigma, "environment state")?;
    attenuate(rho, lambda, sigma, exec)
}

/// Displacement amplitude for the phase-space point `ξ`: `α = √(πt)(ξ_q + iξ_p)`,
/// so a point mass at `ξ` adds `πt|ξ|²` photons.
pub fn weyl_amplitude(xi: [f64; 2], t: f64) -> Complex64 {
    (PI * t).sqrt() * Complex64::new(xi[0], xi[1])
}

/// `F_{t,f}(ρ) = ∫ f(ξ) D(α(ξ)) ρ D(α(ξ))† d²ξ` by quadrature.
///
/// Each node contributes an exact rectangular block of the displacement, so
/// the only truncation is the output cut: by default the smallest one losing at
/// most `quad.output_tail` of the mass; a fixed `quad.output_dim` may lose up to
/// `quad.coverage`. The result is renormalized by the captured mass.
pub fn apply_classical_noise(
    rho: &DensityMatrix,
    t: f64,
    f: &NoiseDensity,
    quad: &QuadratureSpec,
    exec: Execution,
) -> Result<DensityMatrix> {
    check_t(t)?;
    if rho.modes() != 1 {
        return Err(Error::ModeCount {
            expected: 1,
            got: rho.modes(),
        });
    }
    check_tail(rho, "input state")?;
    let full = f.rule(quad.nodes_per_axis)?;
    let rule = full.pruned(0.5 * quad.coverage);
    let captured = rule.total_mass();
    if captured < 1.0 - quad.coverage {
        return Err(Error::Coverage {
            captured,
            required: 1.0 - quad.coverage,
        });
    }
    let alphas: Vec<Complex64> = rule.nodes.iter().map(|x| weyl_amplitude(*x, t)).collect();
    let in_dim = rho.dim();

    let out_dim = match quad.output_dim {
        Some(d) => d.max(in_dim),
        None => {
            let added: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * PI * t * (x[0] * x[0] + x[1] * x[1]))
                .sum::<f64>()
                / captured;
            let predicted = rho.mean_photon_number() + added;
            let mut probe = in_dim.max(thermal_dim_for_tail(predicted, 0.01 * quad.output_tail) + 1);
            loop {
                let pops = output_populations(rho, &alphas, &rule.weights, probe, exec);
                // smallest cut whose discarded population is within the budget
                let budget = quad.output_tail * captured;
                let mut tail = captured - pops.iter().sum::<f64>();
                let mut cut = probe;
                while cut > in_dim && tail + pops[cut - 1] <= budget {
                    cut -= 1;
                    tail += pops[cut];
                }
                if tail <= budget {
                    break cut;
                }
                if probe >= MAX_OUTPUT_DIM {
                    return Err(Error::TruncationInadequate(format!(
                        "classical-noise output loses mass {:e} at dim {probe}",
                        tail / captured
                    )));
                }
                probe = (probe + probe / 2 + 8).min(MAX_OUTPUT_DIM);
            }
        }
    };
    let out = noise_sum(rho, &alphas, &rule.weights, out_dim, exec);
    let lost = 1.0 - out.trace().re / captured;
    if lost > quad.output_tail.max(quad.coverage) {
        return Err(Error::TruncationInadequate(format!(
            "classical-noise output loses mass {lost:e} at dim {out_dim}"
        )));
    }
    let tail = rho.tail_mass() + lost.max(0.0) + (1.0 - captured);
    if tail > TAIL_WARN {
        log::debug!("classical-noise output at dim {out_dim} drops mass {tail:e}");
    }
    Ok(DensityMatrix::from_numerical(out_dim, 1, out).with_tail_mass(tail))
}

/// Weighted diagonal `Σᵢ wᵢ ⟨m|D(αᵢ)ρD(αᵢ)†|m⟩` for `m < dim`.
fn output_populations(
    rho: &DensityMatrix,
    alphas: &[Complex64],
    weights: &[f64],
    dim: usize,
    exec: Execution,
) -> Vec<f64> {
    let in_dim = rho.dim();
    let chunk = alphas.len().div_ceil(NOISE_CHUNKS).max(1);
    let chunks = alphas.len().div_ceil(chunk);
    let partials = exec::map_range(exec, chunks, |c| {
        let mut acc = vec![0.0; dim];
        for i in c * chunk..((c + 1) * chunk).min(alphas.len()) {
            let b = displacement_block(alphas[i], dim, in_dim);
            let br = &b * rho.matrix();
            for (m, a) in acc.iter_mut().enumerate() {
                let mut d = 0.0;
                for k in 0..in_dim {
                    d += (br[(m, k)] * b[(m, k)].conj()).re;
                }
                *a += weights[i] * d;
            }
        }
        acc
    });
    let mut out = vec![0.0; dim];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

fn noise_sum(
    rho: &DensityMatrix,
    alphas: &[Complex64],
    weights: &[f64],
    out_dim: usize,
    exec: Execution,
) -> DMatrix<Complex64> {
    let in_dim = rho.dim();
    let chunk = alphas.len().div_ceil(NOISE_CHUNKS).max(1);
    let chunks = alphas.len().div_ceil(chunk);
    let partials = exec::map_range(exec, chunks, |c| {
        let mut acc = DMatrix::from_element(out_dim, out_dim, Complex64::new(0.0, 0.0));
        for i in c * chunk..((c + 1) * chunk).min(alphas.len()) {
            let b = displacement_block(alphas[i], out_dim, in_dim);
            let br = &b * rho.matrix();
            acc.gemm(
                Complex64::new(weights[i], 0.0),
                &br,
                &b.adjoint(),
                Complex64::new(1.0, 0.0),
            );
        }
        acc
    });
    let mut out = DMatrix::from_element(out_dim, out_dim, Complex64::new(0.0, 0.0));
    for p in partials {
        out += p;
    }
    out
}

/// Channel action on first and second moments.
///
/// Attenuator: `m ↦ √λ·m + √(1−λ)·m_E`, `V ↦ λV + (1−λ)V_E`.
/// Classical noise: `m ↦ m + √(2πt)·μ_f`, `V ↦ V + 2πt·Cov(f)`.
pub fn output_moments(spec: &ChannelSpec, input: &GaussianMoments) -> Result<GaussianMoments> {
    spec.validate()?;
    let mut out = *input;
    match spec {
        ChannelSpec::Attenuator { lambda, env } => {
            let e = env.moments()?;
            let (a, b) = (lambda.sqrt(), (1.0 - lambda).sqrt());
            for i in 0..2 {
                out.mean[i] = a * input.mean[i] + b * e.mean[i];
                for j in 0..2 {
                    out.cov[i][j] = lambda * input.cov[i][j] + (1.0 - lambda) * e.cov[i][j];
                }
            }
        }
        ChannelSpec::ClassicalNoise { t, noise } => {
            let mu = noise.mean();
            let c = noise.covariance();
            let s = (2.0 * PI * t).sqrt();
            for i in 0..2 {
                out.mean[i] += s * mu[i];
                for j in 0..2 {
                    out.cov[i][j] += 2.0 * PI * t * c[i][j];
                }
            }
        }
    }
    Ok(out)
}

/// Simulated one-shot rate of the Gaussian coherent-state ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolevoEstimate {
    /// `χ = S(Φ(ρ_th,N)) − S(Φ(|0⟩⟨0|))` in nats.
    pub rate: f64,
    pub average_output_entropy: f64,
    pub seed_output_entropy: f64,
    /// Truncation used for the thermal ensemble average.
    pub input_dim: usize,
}

/// Holevo quantity of the coherent ensemble whose average is `ρ_th,N`.
///
/// Both channel families are displacement covariant, so every ensemble member
/// has the entropy of the vacuum's output and `χ` reduces to two simulations.
/// The thermal input is extended past `dim` until its tail is below `1e-10`.
pub fn holevo_coherent_rate(
    spec: &ChannelSpec,
    n: f64,
    dim: usize,
    quad: &QuadratureSpec,
    exec: Execution,
) -> Result<HolevoEstimate> {
    spec.validate()?;
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Domain(format!("photon budget must be >= 0, got {n}")));
    }
    let input_dim = dim.max(thermal_dim_for_tail(n, TAIL_WARN));
    let thermal = make_thermal_state(n, input_dim)?;
    let vacuum = make_number_state(0, 1)?;
    let (avg, seed) = match spec {
        ChannelSpec::Attenuator { lambda, env } => {
            let sigma = env.materialize(dim)?;
            (
                apply_attenuator_to(&thermal, *lambda, &sigma, exec)?,
                apply_attenuator_to(&vacuum, *lambda, &sigma, exec)?,
            )
        }
        ChannelSpec::ClassicalNoise { t, noise } => (
            apply_classical_noise(&thermal, *t, noise, quad, exec)?,
            apply_classical_noise(&vacuum, *t, noise, quad, exec)?,
        ),
    };
    let average_output_entropy = avg.von_neumann_entropy()?;
    let seed_output_entropy = seed.von_neumann_entropy()?;
    Ok(HolevoEstimate {
        rate: average_output_entropy - seed_output_entropy,
        average_output_entropy,
        seed_output_entropy,
        input_dim,
    })
}
