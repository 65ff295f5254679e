use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::quadrature::{gauss_hermite, gauss_legendre, PhaseSpaceRule};
use crate::{Error, Result};

const MASS_TOL: f64 = 1e-8;

/// One weighted Gaussian in a [`NoiseDensity::GaussianMixture`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    #[serde(default)]
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

/// Piecewise-constant density on an `nx × ny` grid of cells over
/// `[xmin, xmax] × [ymin, ymax]`; `values[iy * nx + ix]` (row-major, rows along y).
/// Values are normalized to unit mass on use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

/// Scalar summary of a noise density: `E(f)` and `H(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseStats {
    pub energy: f64,
    pub entropy: f64,
}

impl NoiseStats {
    /// Rejects `H(f) > ln(πe·E(f))`, the planar maximum-entropy bound.
    pub fn validate(&self) -> Result<()> {
        if !(self.energy > 0.0) || !self.energy.is_finite() || !self.entropy.is_finite() {
            return Err(Error::InconsistentDistribution(format!(
                "need finite E(f) > 0 and finite H(f), got E={} H={}",
                self.energy, self.entropy
            )));
        }
        let max = (PI * E * self.energy).ln();
        if self.entropy > max + 1e-9 {
            return Err(Error::InconsistentDistribution(format!(
                "H(f) = {} exceeds ln(pi e E(f)) = {max}",
                self.entropy
            )));
        }
        Ok(())
    }
}

/// Probability density of the phase-space displacement `ξ` of a classical-noise channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum NoiseDensity {
    Gaussian {
        #[serde(default)]
        mean: [f64; 2],
        cov: [[f64; 2]; 2],
    },
    GaussianMixture {
        components: Vec<MixtureComponent>,
    },
    UniformDisc {
        radius: f64,
    },
    Tabulated(TabulatedDensity),
}

fn check_cov(cov: &[[f64; 2]; 2]) -> Result<()> {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    if (cov[0][1] - cov[1][0]).abs() > 1e-12 || !(cov[0][0] > 0.0) || !(det > 0.0) {
        return Err(Error::InconsistentDistribution(format!(
            "covariance {cov:?} is not symmetric positive definite"
        )));
    }
    Ok(())
}

fn gaussian_pdf(x: [f64; 2], mean: [f64; 2], cov: &[[f64; 2]; 2]) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let (dx, dy) = (x[0] - mean[0], x[1] - mean[1]);
    let q = (cov[1][1] * dx * dx - 2.0 * cov[0][1] * dx * dy + cov[0][0] * dy * dy) / det;
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

/// Gauss–Hermite product rule for `N(mean, cov)` using the Cholesky factor of `cov`.
fn gaussian_rule(mean: [f64; 2], cov: &[[f64; 2]; 2], n: usize, scale: f64, out: &mut PhaseSpaceRule) {
    let l11 = cov[0][0].sqrt();
    let l21 = cov[1][0] / l11;
    let l22 = (cov[1][1] - l21 * l21).max(0.0).sqrt();
    let h = gauss_hermite(n);
    for (z1, w1) in h.nodes.iter().zip(&h.weights) {
        for (z2, w2) in h.nodes.iter().zip(&h.weights) {
            out.push([mean[0] + l11 * z1, mean[1] + l21 * z1 + l22 * z2], scale * w1 * w2);
        }
    }
}

impl NoiseDensity {
    /// Centered Gaussian with identity covariance (unit variance per quadrature).
    pub fn standard_gaussian() -> Self {
        NoiseDensity::Gaussian {
            mean: [0.0, 0.0],
            cov: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Isotropic centered Gaussian with variance `var` per coordinate.
    pub fn isotropic_gaussian(var: f64) -> Self {
        NoiseDensity::Gaussian {
            mean: [0.0, 0.0],
            cov: [[var, 0.0], [0.0, var]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseDensity::Gaussian { cov, mean } => {
                check_cov(cov)?;
                if !mean.iter().all(|m| m.is_finite()) {
                    return Err(Error::InconsistentDistribution("non-finite mean".into()));
                }
            }
            NoiseDensity::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InconsistentDistribution("mixture has no components".into()));
                }
                let mut total = 0.0;
                for c in components {
                    if !(c.weight >= 0.0) {
                        return Err(Error::InconsistentDistribution(format!(
                            "negative mixture weight {}",
                            c.weight
                        )));
                    }
                    check_cov(&c.cov)?;
                    total += c.weight;
                }
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::InconsistentDistribution(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
            }
            NoiseDensity::UniformDisc { radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InconsistentDistribution(format!(
                        "disc radius {radius} must be > 0"
                    )));
                }
            }
            NoiseDensity::Tabulated(t) => {
                if t.nx == 0 || t.ny == 0 || t.values.len() != t.nx * t.ny {
                    return Err(Error::InconsistentDistribution(format!(
                        "tabulated grid {}x{} does not match {} values",
                        t.nx,
                        t.ny,
                        t.values.len()
                    )));
                }
                if !(t.xmax > t.xmin) || !(t.ymax > t.ymin) {
                    return Err(Error::InconsistentDistribution("empty tabulation box".into()));
                }
                if t.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::InconsistentDistribution(
                        "tabulated values must be finite and >= 0".into(),
                    ));
                }
                if !(t.values.iter().sum::<f64>() > 0.0) {
                    return Err(Error::InconsistentDistribution(
                        "tabulated values have zero mass".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Mean vector `E[ξ]`.
    pub fn mean(&self) -> [f64; 2] {
        match self {
            NoiseDensity::Gaussian { mean, .. } => *mean,
            NoiseDensity::GaussianMixture { components } => {
                let mut m = [0.0; 2];
                for c in components {
                    m[0] += c.weight * c.mean[0];
                    m[1] += c.weight * c.mean[1];
                }
                m
            }
            NoiseDensity::UniformDisc { .. } => [0.0, 0.0],
            NoiseDensity::Tabulated(t) => {
                let cells = t.cells();
                let mut m = [0.0; 2];
                for c in &cells {
                    m[0] += c.mass * 0.5 * (c.x0 + c.x1);
                    m[1] += c.mass * 0.5 * (c.y0 + c.y1);
                }
                m
            }
        }
    }

    /// Covariance `Cov(ξ)`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let mu = self.mean();
        let second = self.second_moments();
        [
            [second[0][0] - mu[0] * mu[0], second[0][1] - mu[0] * mu[1]],
            [second[1][0] - mu[1] * mu[0], second[1][1] - mu[1] * mu[1]],
        ]
    }

    /// Raw second moments `E[ξᵢξⱼ]`.
    fn second_moments(&self) -> [[f64; 2]; 2] {
        let raw = |mean: [f64; 2], cov: &[[f64; 2]; 2]| {
            [
                [cov[0][0] + mean[0] * mean[0], cov[0][1] + mean[0] * mean[1]],
                [cov[1][0] + mean[1] * mean[0], cov[1][1] + mean[1] * mean[1]],
            ]
        };
        match self {
            NoiseDensity::Gaussian { mean, cov } => raw(*mean, cov),
            NoiseDensity::GaussianMixture { components } => {
                let mut s = [[0.0; 2]; 2];
                for c in components {
                    let r = raw(c.mean, &c.cov);
                    for i in 0..2 {
                        for j in 0..2 {
                            s[i][j] += c.weight * r[i][j];
                        }
                    }
                }
                s
            }
            NoiseDensity::UniformDisc { radius } => {
                let v = radius * radius / 4.0;
                [[v, 0.0], [0.0, v]]
            }
            NoiseDensity::Tabulated(t) => {
                let mut s = [[0.0; 2]; 2];
                for c in t.cells() {
                    let sq = |a: f64, b: f64| (b.powi(3) - a.powi(3)) / (3.0 * (b - a));
                    let xy = 0.25 * (c.x0 + c.x1) * (c.y0 + c.y1);
                    s[0][0] += c.mass * sq(c.x0, c.x1);
                    s[1][1] += c.mass * sq(c.y0, c.y1);
                    s[0][1] += c.mass * xy;
                    s[1][0] += c.mass * xy;
                }
                s
            }
        }
    }

    /// `E(f) = Σᵢ ∫ ξᵢ² f(ξ) d²ξ`.
    pub fn energy(&self) -> f64 {
        let s = self.second_moments();
        s[0][0] + s[1][1]
    }

    /// Shannon differential entropy `H(f)` in nats.
    pub fn entropy(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            NoiseDensity::Gaussian { cov, .. } => {
                let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
                (2.0 * PI * E).ln() + 0.5 * det.ln()
            }
            NoiseDensity::GaussianMixture { components } => {
                // H = −Σₖ wₖ E_{N_k}[ln f], each expectation by Gauss–Hermite
                let density = |x: [f64; 2]| {
                    components
                        .iter()
                        .map(|c| c.weight * gaussian_pdf(x, c.mean, &c.cov))
                        .sum::<f64>()
                };
                let mut h = 0.0;
                for c in components.iter().filter(|c| c.weight > 0.0) {
                    let mut rule = PhaseSpaceRule::default();
                    gaussian_rule(c.mean, &c.cov, 41, 1.0, &mut rule);
                    h -= c.weight
                        * rule.integrate(|x| {
                            let p = density(x);
                            if p > 0.0 {
                                p.ln()
                            } else {
                                // far tail of this component where the sum underflows
                                let own = gaussian_pdf(x, c.mean, &c.cov);
                                if own > 0.0 {
                                    (c.weight * own).ln()
                                } else {
                                    0.0
                                }
                            }
                        });
                }
                h
            }
            NoiseDensity::UniformDisc { radius } => (PI * radius * radius).ln(),
            NoiseDensity::Tabulated(t) => t
                .cells()
                .iter()
                .filter(|c| c.mass > 0.0)
                .map(|c| -c.mass * c.density.ln())
                .sum(),
        })
    }

    /// Quadrature rule approximating the density with `n` nodes per axis.
    ///
    /// Gaussian components use Gauss–Hermite; the disc uses a polar rule
    /// (Gauss–Legendre in `r²` times equally spaced angles), which is exact for the
    /// disc's polynomial moments; tabulated densities use Gauss–Legendre points
    /// inside every occupied cell.
    pub fn rule(&self, n: usize) -> Result<PhaseSpaceRule> {
        self.validate()?;
        let n = n.max(1);
        let mut rule = PhaseSpaceRule::default();
        match self {
            NoiseDensity::Gaussian { mean, cov } => gaussian_rule(*mean, cov, n, 1.0, &mut rule),
            NoiseDensity::GaussianMixture { components } => {
                for c in components.iter().filter(|c| c.weight > 0.0) {
                    gaussian_rule(c.mean, &c.cov, n, c.weight, &mut rule);
                }
            }
            NoiseDensity::UniformDisc { radius } => {
                let r2 = radius * radius;
                let radial = gauss_legendre(n, 0.0, r2);
                for (u, wu) in radial.nodes.iter().zip(&radial.weights) {
                    let r = u.sqrt();
                    for k in 0..n {
                        let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                        rule.push([r * phi.cos(), r * phi.sin()], wu / r2 / n as f64);
                    }
                }
            }
            NoiseDensity::Tabulated(t) => {
                let q = (n / t.nx.max(t.ny)).clamp(1, 8);
                let gx = gauss_legendre(q, 0.0, 1.0);
                for c in t.cells().iter().filter(|c| c.mass > 0.0) {
                    for (u, wu) in gx.nodes.iter().zip(&gx.weights) {
                        for (v, wv) in gx.nodes.iter().zip(&gx.weights) {
                            rule.push([c.x0 + u * (c.x1 - c.x0), c.y0 + v * (c.y1 - c.y0)], c.mass * wu * wv);
                        }
                    }
                }
            }
        }
        Ok(rule)
    }

    pub fn stats(&self) -> Result<NoiseStats> {
        Ok(NoiseStats {
            energy: self.energy(),
            entropy: self.entropy()?,
        })
    }

    /// Short human-readable tag used in reports.
    pub fn describe(&self) -> String {
        match self {
            NoiseDensity::Gaussian { mean, cov } => format!("gaussian(mean={mean:?},cov={cov:?})"),
            NoiseDensity::GaussianMixture { components } => format!("mixture({} components)", components.len()),
            NoiseDensity::UniformDisc { radius } => format!("uniform-disc(r={radius})"),
            NoiseDensity::Tabulated(t) => format!("tabulated({}x{})", t.nx, t.ny),
        }
    }
}

struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    mass: f64,
    density: f64,
}

impl TabulatedDensity {
    fn cells(&self) -> Vec<Cell> {
        let dx = (self.xmax - self.xmin) / self.nx as f64;
        let dy = (self.ymax - self.ymin) / self.ny as f64;
        let total: f64 = self.values.iter().sum();
        let mut out = Vec::with_capacity(self.values.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let v = self.values[iy * self.nx + ix];
                out.push(Cell {
                    x0: self.xmin + ix as f64 * dx,
                    x1: self.xmin + (ix + 1) as f64 * dx,
                    y0: self.ymin + iy as f64 * dy,
                    y1: self.ymin + (iy + 1) as f64 * dy,
                    mass: v / total,
                    density: v / (total * dx * dy),
                });
            }
        }
        out
    }
}
