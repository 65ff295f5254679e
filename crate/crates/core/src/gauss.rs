//! Thermal entropy function, its inverse, and single-mode Gaussian moments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::DensityMatrix;
use crate::{Error, Result};

const NU_TOL: f64 = 1e-10;

/// `g(N) = (N+1) ln(N+1) − N ln N`, the entropy of a thermal state with mean photon number `N`.
pub fn g(n: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return Err(Error::Domain(format!("g is defined for N >= 0, got {n}")));
    }
    Ok(g_unchecked(n))
}

/// [`g`] without the domain check; callers guarantee `n >= 0`.
pub(crate) fn g_unchecked(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if n.is_infinite() {
        return f64::INFINITY;
    }
    // (N+1)ln(N+1) − N ln N = ln(N+1) + N ln(1 + 1/N)
    (n + 1.0).ln() + n * (1.0 / n).ln_1p()
}

/// `g'(N) = ln(1 + 1/N)`.
pub(crate) fn g_prime(n: f64) -> f64 {
    (1.0 / n).ln_1p()
}

/// The unique `N >= 0` with `g(N) = s`.
///
/// Bracket `[0, e^s]` (valid because `g(N) >= ln(N+1)`), then safeguarded Newton
/// steps on the bracket; at most 200 iterations.
pub fn g_inverse(s: f64) -> Result<f64> {
    if !(s >= 0.0) || s.is_infinite() {
        return Err(Error::Domain(format!("g_inverse needs a finite s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, s.exp());
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = g_unchecked(x) - s;
        if f.abs() <= 1e-15 * s.max(1.0) {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / g_prime(x);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    Ok(x)
}

/// First and second moments of a single mode: `mean = (⟨Q⟩, ⟨P⟩)`,
/// `cov[i][j] = ½⟨{ΔRᵢ, ΔRⱼ}⟩`; the vacuum has `cov = ½·I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl GaussianMoments {
    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    /// Centered moments of a thermal state: `cov = (N + ½)·I`.
    pub fn thermal(n: f64) -> Self {
        GaussianMoments {
            mean: [0.0, 0.0],
            cov: [[n + 0.5, 0.0], [0.0, n + 0.5]],
        }
    }

    /// Symplectic eigenvalue `ν = √det(cov)`.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        let c = &self.cov;
        (c[0][0] * c[1][1] - c[0][1] * c[1][0]).max(0.0).sqrt()
    }

    /// `⟨a†a⟩ = (⟨Q²⟩ + ⟨P²⟩ − 1)/2`.
    pub fn mean_photon_number(&self) -> f64 {
        let second = self.cov[0][0] + self.cov[1][1] + self.mean[0].powi(2) + self.mean[1].powi(2);
        0.5 * (second - 1.0)
    }

    /// Checks symmetry and the uncertainty relation `ν >= ½`.
    pub fn validate(&self) -> Result<()> {
        if (self.cov[0][1] - self.cov[1][0]).abs() > 1e-12 {
            return Err(Error::Domain("covariance matrix is not symmetric".into()));
        }
        let nu = self.symplectic_eigenvalue();
        if nu < 0.5 - NU_TOL || self.cov[0][0] <= 0.0 {
            return Err(Error::UnphysicalMoments(nu));
        }
        Ok(())
    }
}

/// Moments of a single-mode state from exact number-basis matrix elements of
/// `a`, `a²` and `a†a` (exact for any state supported on the truncation).
pub fn extract_moments(rho: &DensityMatrix) -> Result<GaussianMoments> {
    if rho.modes() != 1 {
        return Err(Error::ModeCount {
            expected: 1,
            got: rho.modes(),
        });
    }
    let d = rho.dim();
    let mut a = Complex64::new(0.0, 0.0);
    let mut a2 = Complex64::new(0.0, 0.0);
    let mut n = 0.0;
    for m in 0..d {
        n += m as f64 * rho.get(m, m).re;
        if m + 1 < d {
            // tr(aρ) = Σ √(m+1) ρ[m+1, m]
            a += rho.get(m + 1, m) * ((m + 1) as f64).sqrt();
        }
        if m + 2 < d {
            a2 += rho.get(m + 2, m) * (((m + 1) * (m + 2)) as f64).sqrt();
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let mean = [sqrt2 * a.re, sqrt2 * a.im];
    let qq = a2.re + n + 0.5;
    let pp = -a2.re + n + 0.5;
    let qp = a2.im;
    Ok(GaussianMoments {
        mean,
        cov: [
            [qq - mean[0] * mean[0], qp - mean[0] * mean[1]],
            [qp - mean[0] * mean[1], pp - mean[1] * mean[1]],
        ],
    })
}

/// Entropy of the Gaussian state with these moments: `g(ν − ½)`.
pub fn gaussified_entropy(m: &GaussianMoments) -> Result<f64> {
    m.validate()?;
    Ok(g_unchecked((m.symplectic_eigenvalue() - 0.5).max(0.0)))
}

/// `g⁻¹(S(ρ))`: mean photon number of the thermal state with the same entropy.
pub fn entropy_photon_number(rho: &DensityMatrix) -> Result<f64> {
    g_inverse(rho.von_neumann_entropy()?)
}
