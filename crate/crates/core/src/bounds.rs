//! Closed-form capacity bounds and their gap bounds.
//!
//! All quantities are in nats. Lower bounds are reported raw (they can be
//! negative for small `N`) together with a copy clamped at zero.

use std::f64::consts::{E, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channels::{EnvironmentStats, NoiseStats};
use crate::exec::{self, Execution};
use crate::gauss::{g, g_inverse, g_unchecked};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Epi,
    Epni,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Epi => "epi",
            Method::Epni => "epni",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epi" => Ok(Method::Epi),
            "epni" => Ok(Method::Epni),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected epi or epni)"
            ))),
        }
    }
}

/// Channel scalars the bounds depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelParams {
    Attenuator { lambda: f64, env: EnvironmentStats },
    ClassicalNoise { t: f64, noise: NoiseStats },
}

impl ChannelParams {
    pub fn attenuator(lambda: f64, mean_photon: f64, entropy: f64) -> Self {
        ChannelParams::Attenuator {
            lambda,
            env: EnvironmentStats { mean_photon, entropy },
        }
    }

    pub fn classical_noise(t: f64, energy: f64, entropy: f64) -> Self {
        ChannelParams::ClassicalNoise {
            t,
            noise: NoiseStats { energy, entropy },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelParams::Attenuator { lambda, env } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::Domain(format!(
                        "transmissivity must lie in [0, 1], got {lambda}"
                    )));
                }
                env.validate()
            }
            ChannelParams::ClassicalNoise { t, noise } => {
                if !(*t > 0.0) || !t.is_finite() {
                    return Err(Error::Domain(format!("noise parameter t must be > 0, got {t}")));
                }
                noise.validate()
            }
        }
    }

    pub fn summary(&self) -> Result<SpecSummary> {
        self.validate()?;
        Ok(match *self {
            ChannelParams::Attenuator { lambda, env } => SpecSummary::Attenuator {
                lambda,
                mean_photon: env.mean_photon,
                entropy: env.entropy,
                entropy_photon: env.entropy_photon_number()?,
            },
            ChannelParams::ClassicalNoise { t, noise } => SpecSummary::ClassicalNoise {
                t,
                energy: noise.energy,
                entropy: noise.entropy,
            },
        })
    }

    /// Bounds at photon budget `n` with the given method.
    pub fn bounds(&self, n: f64, method: Method) -> Result<BoundReport> {
        match (*self, method) {
            (ChannelParams::Attenuator { lambda, env }, Method::Epi) => {
                attenuator_bounds_epi(n, lambda, env.mean_photon, env.entropy)
            }
            (ChannelParams::Attenuator { lambda, env }, Method::Epni) => {
                attenuator_bounds_epni(n, lambda, env.mean_photon, env.entropy)
            }
            (ChannelParams::ClassicalNoise { t, noise }, Method::Epi) => {
                classical_noise_bounds_epi(n, t, noise.energy, noise.entropy)
            }
            (ChannelParams::ClassicalNoise { t, noise }, Method::Epni) => {
                classical_noise_bounds_epni(n, t, noise.energy, noise.entropy)
            }
        }
    }
}

/// Parameters echoed in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpecSummary {
    Attenuator {
        lambda: f64,
        mean_photon: f64,
        entropy: f64,
        entropy_photon: f64,
    },
    ClassicalNoise {
        t: f64,
        energy: f64,
        entropy: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "N")]
    pub n: f64,
    pub lower: f64,
    pub lower_clamped: f64,
    pub upper: f64,
    /// `N`-independent bound on `upper − lower`.
    pub gap_bound: f64,
    pub method: Method,
    pub spec: SpecSummary,
}

impl BoundReport {
    fn new(n: f64, lower: f64, upper: f64, gap_bound: f64, method: Method, spec: SpecSummary) -> Self {
        BoundReport {
            n,
            lower,
            lower_clamped: lower.max(0.0),
            upper,
            gap_bound,
            method,
            spec,
        }
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_budget(n: f64) -> Result<()> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Domain(format!("photon budget must be >= 0, got {n}")));
    }
    Ok(())
}

fn attenuator_common(n: f64, lambda: f64, n_e: f64, s_e: f64) -> Result<(SpecSummary, f64)> {
    check_budget(n)?;
    let params = ChannelParams::attenuator(lambda, n_e, s_e);
    let spec = params.summary()?;
    let n_ep = match spec {
        SpecSummary::Attenuator { entropy_photon, .. } => entropy_photon,
        _ => unreachable!(),
    };
    Ok((spec, n_ep))
}

/// EPI bounds for the attenuator with environment mean photon `n_e` and entropy `s_e`.
///
/// lower = g(λN + (1−λ)N_E^ep) − g((1−λ)N_E)
/// upper = g(λN + (1−λ)N_E) − ln(λ + (1−λ)e^{S_E})
/// Δ     = 2g((1−λ)N_E) − g((1−λ)N_E^ep) − ln(λ + (1−λ)e^{S_E})
pub fn attenuator_bounds_epi(n: f64, lambda: f64, n_e: f64, s_e: f64) -> Result<BoundReport> {
    let (spec, n_ep) = attenuator_common(n, lambda, n_e, s_e)?;
    let mu = 1.0 - lambda;
    let floor = (lambda + mu * s_e.exp()).ln();
    let lower = g_unchecked(lambda * n + mu * n_ep) - g_unchecked(mu * n_e);
    let upper = g_unchecked(lambda * n + mu * n_e) - floor;
    let gap = 2.0 * g_unchecked(mu * n_e) - g_unchecked(mu * n_ep) - floor;
    Ok(BoundReport::new(n, lower, upper, gap, Method::Epi, spec))
}

/// Bounds for the attenuator conditional on the EPNI; the lower bound is the EPI one.
///
/// upper = g(λN + (1−λ)N_E) − g((1−λ)N_E^ep)
/// Δ     = 2[g((1−λ)N_E) − g((1−λ)N_E^ep)]
pub fn attenuator_bounds_epni(n: f64, lambda: f64, n_e: f64, s_e: f64) -> Result<BoundReport> {
    let (spec, n_ep) = attenuator_common(n, lambda, n_e, s_e)?;
    let mu = 1.0 - lambda;
    let lower = g_unchecked(lambda * n + mu * n_ep) - g_unchecked(mu * n_e);
    let upper = g_unchecked(lambda * n + mu * n_e) - g_unchecked(mu * n_ep);
    let gap = 2.0 * (g_unchecked(mu * n_e) - g_unchecked(mu * n_ep));
    Ok(BoundReport::new(n, lower, upper, gap, Method::Epni, spec))
}

fn noise_common(n: f64, t: f64, e_f: f64, h_f: f64) -> Result<SpecSummary> {
    check_budget(n)?;
    ChannelParams::classical_noise(t, e_f, h_f).summary()
}

/// EPI bounds for the classical-noise channel with `E(f) = e_f`, `H(f) = h_f`.
///
/// lower = ln(e^{g(N)} + t·e^{H}) − g(πtE)
/// upper = g(N + πtE) − ln(1 + t·e^{H})
/// Δ     = 2g(πtE) − ln(1 + t·e^{H})
pub fn classical_noise_bounds_epi(n: f64, t: f64, e_f: f64, h_f: f64) -> Result<BoundReport> {
    let spec = noise_common(n, t, e_f, h_f)?;
    let added = PI * t * e_f;
    let te_h = t * h_f.exp();
    let lower = ln_add_exp(g_unchecked(n), te_h.ln()) - g_unchecked(added);
    let upper = g_unchecked(n + added) - te_h.ln_1p();
    let gap = 2.0 * g_unchecked(added) - te_h.ln_1p();
    Ok(BoundReport::new(n, lower, upper, gap, Method::Epi, spec))
}

/// `ln(eᵃ + eᵇ)` without overflow.
fn ln_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Bounds for the classical-noise channel conditional on the cq-EPNI.
///
/// lower = g(N + (t/e)e^{H}) − g(πtE)
/// upper = g(N + πtE) − g((t/e)e^{H})
/// Δ     = 2[g(πtE) − g((t/e)e^{H})]
pub fn classical_noise_bounds_epni(n: f64, t: f64, e_f: f64, h_f: f64) -> Result<BoundReport> {
    let spec = noise_common(n, t, e_f, h_f)?;
    let added = PI * t * e_f;
    let ep = t / E * h_f.exp();
    let lower = g_unchecked(n + ep) - g_unchecked(added);
    let upper = g_unchecked(n + added) - g_unchecked(ep);
    let gap = 2.0 * (g_unchecked(added) - g_unchecked(ep));
    Ok(BoundReport::new(n, lower, upper, gap, Method::Epni, spec))
}

/// Shannon's bounds for a real additive-noise channel with power `p`, noise
/// entropy `h_z` and noise power `noise`:
/// `ln((P + N₁)/N₁) ≤ C ≤ ln((P + N)/N₁)`, `N₁ = e^{2H_Z}/(2πe)`.
///
/// Implemented without a ½ prefactor.
pub fn shannon_additive_bounds(p: f64, h_z: f64, noise: f64) -> Result<(f64, f64)> {
    if !(p >= 0.0) || !(noise > 0.0) || !h_z.is_finite() {
        return Err(Error::Domain(format!(
            "need P >= 0, N > 0 and finite H_Z, got P={p} N={noise} H_Z={h_z}"
        )));
    }
    let n1 = (2.0 * h_z).exp() / (2.0 * PI * E);
    if n1 > noise + 1e-9 {
        return Err(Error::InconsistentDistribution(format!(
            "entropy power {n1} exceeds noise power {noise}"
        )));
    }
    Ok((((p + n1) / n1).ln(), ((p + noise) / n1).ln()))
}

/// Reports along a sorted grid of photon budgets.
pub fn bound_curve(params: &ChannelParams, grid: &[f64], method: Method, exec: Execution) -> Result<Vec<BoundReport>> {
    params.validate()?;
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Domain("photon grid must be sorted ascending".into()));
    }
    exec::map_slice(exec, grid, |&n| params.bounds(n, method))
        .into_iter()
        .collect()
}

/// `start, start+step, …` up to and including `stop` (within rounding).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain(format!("bad grid {start}:{stop}:{step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    // snap to 12 decimals so that 0.1-steps print as 0.3, not 0.30000000000000004
    Ok((0..=count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub const CSV_COLUMNS: &str = "N,lower,lower_clamped,upper,gap_bound,method";

/// CSV with the fixed column set; `header` lines are written first, each prefixed with `# `.
pub fn to_csv(reports: &[BoundReport], header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    let _ = writeln!(out, "{CSV_COLUMNS}");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            r.lower,
            r.lower_clamped,
            r.upper,
            r.gap_bound,
            r.method.as_str()
        );
    }
    out
}

/// Row of a bounds CSV as read back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub n: f64,
    pub lower: f64,
    pub lower_clamped: f64,
    pub upper: f64,
    pub gap_bound: f64,
    pub method: Method,
}

/// Parses [`to_csv`] output, skipping `#` lines.
pub fn from_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_COLUMNS => {}
        other => return Err(Error::Config(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Config(format!("bad CSV row {l:?}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Config(format!("{s:?}: {e}")));
            Ok(CsvRow {
                n: num(f[0])?,
                lower: num(f[1])?,
                lower_clamped: num(f[2])?,
                upper: num(f[3])?,
                gap_bound: num(f[4])?,
                method: f[5].parse()?,
            })
        })
        .collect()
}

/// Gaussian-channel capacity of the thermal attenuator: `g(λN + (1−λ)N_E) − g((1−λ)N_E)`.
pub fn thermal_attenuator_capacity(n: f64, lambda: f64, n_e: f64) -> Result<f64> {
    check_budget(n)?;
    Ok(g(lambda * n + (1.0 - lambda) * n_e)? - g((1.0 - lambda) * n_e)?)
}

/// Capacity of the classical-noise channel with standard Gaussian `f`: `g(N + 2πt) − g(2πt)`.
pub fn gaussian_noise_capacity(n: f64, t: f64) -> Result<f64> {
    check_budget(n)?;
    Ok(g(n + 2.0 * PI * t)? - g(2.0 * PI * t)?)
}

/// `N_E^ep` for a scalar entropy, exposed for reports.
pub fn entropy_photon(s: f64) -> Result<f64> {
    g_inverse(s)
}
