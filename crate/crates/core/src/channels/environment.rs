use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{
    make_coherent_state, make_number_state, make_pure_state, make_thermal_state, thermal_dim_for_tail, DensityMatrix,
};
use crate::gauss::{extract_moments, g, g_inverse, GaussianMoments};
use crate::{Error, Result};

/// A single-mode state given by family and parameters, or explicitly.
///
/// Used both as the attenuator environment `σ_E` and as a channel input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum StateSpec {
    Thermal {
        mean_photon: f64,
    },
    Number {
        n: usize,
    },
    Coherent {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// Finite superposition `Σ cₙ|n⟩`, coefficients as `[re, im]` pairs (normalized on use).
    Superposition {
        coefficients: Vec<Complex64>,
    },
    Explicit {
        state: DensityMatrix,
    },
}

pub type EnvironmentSpec = StateSpec;

/// Scalar summary of an environment: `N_E`, `S_E` and `N_E^ep = g⁻¹(S_E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentStats {
    pub mean_photon: f64,
    pub entropy: f64,
}

impl EnvironmentStats {
    pub fn entropy_photon_number(&self) -> Result<f64> {
        g_inverse(self.entropy)
    }

    /// Rejects `S_E > g(N_E)`, which no state can satisfy.
    pub fn validate(&self) -> Result<()> {
        let max = g(self.mean_photon)?;
        if !(self.entropy >= 0.0) || self.entropy > max + 1e-9 {
            return Err(Error::InconsistentEnvironment {
                mean_photon: self.mean_photon,
                entropy: self.entropy,
                max,
            });
        }
        Ok(())
    }
}

impl StateSpec {
    pub fn vacuum() -> Self {
        StateSpec::Number { n: 0 }
    }

    fn alpha(&self) -> Option<Complex64> {
        match self {
            StateSpec::Coherent { re, im } => Some(Complex64::new(*re, *im)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Thermal { mean_photon } => {
                if !(*mean_photon >= 0.0) || !mean_photon.is_finite() {
                    return Err(Error::Domain(format!(
                        "thermal mean photon must be >= 0, got {mean_photon}"
                    )));
                }
            }
            StateSpec::Number { .. } => {}
            StateSpec::Coherent { re, im } => {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Domain("coherent amplitude must be finite".into()));
                }
            }
            StateSpec::Superposition { coefficients } => {
                let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
                if !(norm > 0.0) || !norm.is_finite() {
                    return Err(Error::InvalidState(
                        "superposition needs a nonzero finite coefficient vector".into(),
                    ));
                }
            }
            StateSpec::Explicit { state } => {
                state.validate()?;
                if state.modes() != 1 {
                    return Err(Error::ModeCount {
                        expected: 1,
                        got: state.modes(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Smallest truncation holding the state with tail mass at most `tol`.
    pub fn natural_dim(&self, tol: f64) -> usize {
        match self {
            StateSpec::Thermal { mean_photon } => thermal_dim_for_tail(*mean_photon, tol),
            StateSpec::Number { n } => n + 1,
            StateSpec::Coherent { re, im } => {
                let a2 = re * re + im * im;
                // Poisson(|α|²) tail, plus the dim/4 guard
                let mut p = (-a2).exp();
                let mut cdf = p;
                let mut k = 0usize;
                while 1.0 - cdf > tol && k < 100_000 {
                    k += 1;
                    p *= a2 / k as f64;
                    cdf += p;
                }
                (k + 1).max((4.0 * a2).ceil() as usize).max(1)
            }
            StateSpec::Superposition { coefficients } => coefficients.len().max(1),
            StateSpec::Explicit { state } => state.dim(),
        }
    }

    /// The density matrix on `dim` levels (explicit states keep their own size if larger).
    pub fn materialize(&self, dim: usize) -> Result<DensityMatrix> {
        self.validate()?;
        match self {
            StateSpec::Thermal { mean_photon } => make_thermal_state(*mean_photon, dim),
            StateSpec::Number { n } => make_number_state(*n, dim),
            StateSpec::Coherent { .. } => make_coherent_state(self.alpha().unwrap(), dim),
            StateSpec::Superposition { coefficients } => make_pure_state(coefficients, dim),
            StateSpec::Explicit { state } => Ok(state.padded(dim.max(state.dim()))),
        }
    }

    /// `N_E`, exact for the named families.
    pub fn mean_photon_number(&self) -> f64 {
        match self {
            StateSpec::Thermal { mean_photon } => *mean_photon,
            StateSpec::Number { n } => *n as f64,
            StateSpec::Coherent { re, im } => re * re + im * im,
            StateSpec::Superposition { coefficients } => {
                let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(n, c)| n as f64 * c.norm_sqr())
                    .sum::<f64>()
                    / norm
            }
            StateSpec::Explicit { state } => state.mean_photon_number(),
        }
    }

    /// `S_E` in nats.
    pub fn entropy(&self) -> Result<f64> {
        self.validate()?;
        match self {
            StateSpec::Thermal { mean_photon } => g(*mean_photon),
            StateSpec::Number { .. } | StateSpec::Coherent { .. } | StateSpec::Superposition { .. } => Ok(0.0),
            StateSpec::Explicit { state } => state.von_neumann_entropy(),
        }
    }

    pub fn entropy_photon_number(&self) -> Result<f64> {
        g_inverse(self.entropy()?)
    }

    pub fn stats(&self) -> Result<EnvironmentStats> {
        Ok(EnvironmentStats {
            mean_photon: self.mean_photon_number(),
            entropy: self.entropy()?,
        })
    }

    /// First and second moments.
    pub fn moments(&self) -> Result<GaussianMoments> {
        self.validate()?;
        match self {
            StateSpec::Thermal { mean_photon } => Ok(GaussianMoments::thermal(*mean_photon)),
            StateSpec::Number { n } => Ok(GaussianMoments::thermal(*n as f64)),
            StateSpec::Coherent { re, im } => Ok(GaussianMoments {
                mean: [SQRT_2 * re, SQRT_2 * im],
                cov: [[0.5, 0.0], [0.0, 0.5]],
            }),
            // two spare levels make a, a² exact on the support
            StateSpec::Superposition { coefficients } => {
                extract_moments(&make_pure_state(coefficients, coefficients.len() + 2)?)
            }
            StateSpec::Explicit { state } => extract_moments(state),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StateSpec::Thermal { mean_photon } => format!("thermal:{mean_photon}"),
            StateSpec::Number { n } => format!("number:{n}"),
            StateSpec::Coherent { re, im } => format!("coherent:{re},{im}"),
            StateSpec::Superposition { coefficients } => format!("superposition({} terms)", coefficients.len()),
            StateSpec::Explicit { state } => format!("explicit(dim={})", state.dim()),
        }
    }
}
