use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::UnitaryMatrix;
use crate::{Error, Result};

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const TRACE_TOL: f64 = 1e-10;
pub(crate) const NEG_EIG_TOL: f64 = 1e-10;
/// Eigenvalues at or below this fraction of the trace count as zero in entropies.
pub(crate) const EIG_CLIP: f64 = 1e-14;
/// Tail mass above which a truncated named state carries a warning.
pub const TAIL_WARN: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which factor of a two-mode state to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// A truncated bosonic state on one or two modes in the number basis.
///
/// Two-mode states are indexed as `|m1, m2⟩ → m1 * dim + m2`, with `dim`
/// the per-mode truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    dim: usize,
    modes: usize,
    data: DMatrix<Complex64>,
    /// Probability mass discarded when a state with infinite support was cut at `dim`.
    tail_mass: f64,
}

/// Wire format: `{dim, modes, re, im}` with row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dim: usize,
    pub modes: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(rho: DensityMatrix) -> Self {
        let n = rho.total_dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = rho.data[(i, j)];
                re.push(z.re);
                im.push(z.im);
            }
        }
        DensityMatrixJson {
            dim: rho.dim,
            modes: rho.modes,
            re,
            im,
        }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(js: DensityMatrixJson) -> Result<Self> {
        if js.modes != 1 && js.modes != 2 {
            return Err(Error::InvalidState(format!("modes must be 1 or 2, got {}", js.modes)));
        }
        let n = js.dim.pow(js.modes as u32);
        if js.re.len() != n * n || js.im.len() != n * n {
            return Err(Error::InvalidState(format!(
                "expected {} entries for dim {} with {} modes, got re={} im={}",
                n * n,
                js.dim,
                js.modes,
                js.re.len(),
                js.im.len()
            )));
        }
        let data = DMatrix::from_fn(n, n, |i, j| Complex64::new(js.re[i * n + j], js.im[i * n + j]));
        DensityMatrix::new(js.dim, js.modes, data)
    }
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(dim: usize, modes: usize, data: DMatrix<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidState("dimension must be positive".into()));
        }
        if modes != 1 && modes != 2 {
            return Err(Error::InvalidState(format!("modes must be 1 or 2, got {modes}")));
        }
        let n = dim.pow(modes as u32);
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::DimensionMismatch(n, data.nrows()));
        }
        let rho = DensityMatrix {
            dim,
            modes,
            data,
            tail_mass: 0.0,
        };
        rho.validate()?;
        Ok(rho)
    }

    /// Builds a state from a matrix produced by a trusted numerical routine: the
    /// matrix is symmetrized and renormalized but positivity is not re-checked.
    pub(crate) fn from_numerical(dim: usize, modes: usize, mut data: DMatrix<Complex64>) -> Self {
        hermitize(&mut data);
        let tr: f64 = (0..data.nrows()).map(|i| data[(i, i)].re).sum();
        if tr > 0.0 {
            data /= Complex64::new(tr, 0.0);
        }
        DensityMatrix {
            dim,
            modes,
            data,
            tail_mass: 0.0,
        }
    }

    pub(crate) fn with_tail_mass(mut self, tail: f64) -> Self {
        self.tail_mass = tail.max(0.0);
        self
    }

    /// Checks the three state invariants.
    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.data);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (max deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -NEG_EIG_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Side length of the underlying matrix (`dim` or `dim²`).
    pub fn total_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// True when construction discarded more than [`TAIL_WARN`] of the probability mass.
    pub fn has_tail_warning(&self) -> bool {
        self.tail_mass > TAIL_WARN
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.total_dim()).map(|i| self.data[(i, i)].re).sum()
    }

    /// Diagonal of a single-mode state: the photon-number distribution.
    pub fn photon_distribution(&self) -> Vec<f64> {
        (0..self.total_dim()).map(|i| self.data[(i, i)].re).collect()
    }

    /// `tr(a†a ρ)`, summed over modes for two-mode states.
    pub fn mean_photon_number(&self) -> f64 {
        let n = self.total_dim();
        (0..n)
            .map(|i| {
                let photons = if self.modes == 1 {
                    i
                } else {
                    i / self.dim + i % self.dim
                };
                photons as f64 * self.data[(i, i)].re
            })
            .sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_spectrum(&self.data)
    }

    /// `−tr ρ ln ρ` in nats.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        entropy_of_spectrum(&self.eigenvalues(), self.trace())
    }

    /// Embeds a single-mode state into a larger truncation with zero padding.
    /// Returns a clone when `dim` does not exceed the current truncation.
    pub fn padded(&self, dim: usize) -> DensityMatrix {
        if dim <= self.dim || self.modes != 1 {
            return self.clone();
        }
        let mut data = DMatrix::from_element(dim, dim, ZERO);
        data.view_mut((0, 0), (self.dim, self.dim)).copy_from(&self.data);
        DensityMatrix {
            dim,
            modes: 1,
            data,
            tail_mass: self.tail_mass,
        }
    }

    /// `self ⊗ other` as a two-mode state; the smaller factor is padded to a common truncation.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        for s in [self, other] {
            if s.modes != 1 {
                return Err(Error::ModeCount {
                    expected: 1,
                    got: s.modes,
                });
            }
        }
        let d = self.dim.max(other.dim);
        let a = self.padded(d);
        let b = other.padded(d);
        let data = a.data.kronecker(&b.data);
        Ok(DensityMatrix {
            dim: d,
            modes: 2,
            data,
            tail_mass: a.tail_mass + b.tail_mass,
        })
    }

    /// Reduced state of one mode of a two-mode state.
    pub fn partial_trace(&self, keep: Subsystem) -> Result<DensityMatrix> {
        if self.modes != 2 {
            return Err(Error::ModeCount {
                expected: 2,
                got: self.modes,
            });
        }
        let d = self.dim;
        let mut out = DMatrix::from_element(d, d, ZERO);
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += match keep {
                        Subsystem::First => self.data[(i * d + k, j * d + k)],
                        Subsystem::Second => self.data[(k * d + i, k * d + j)],
                    };
                }
                out[(i, j)] = acc;
            }
        }
        hermitize(&mut out);
        Ok(DensityMatrix {
            dim: d,
            modes: 1,
            data: out,
            tail_mass: self.tail_mass,
        })
    }

    /// `U ρ U†`.
    pub fn conjugated(&self, u: &UnitaryMatrix) -> Result<DensityMatrix> {
        if u.dim() != self.total_dim() {
            return Err(Error::DimensionMismatch(u.dim(), self.total_dim()));
        }
        let m = u.matrix();
        let mut data = m * &self.data * m.adjoint();
        hermitize(&mut data);
        Ok(DensityMatrix {
            dim: self.dim,
            modes: self.modes,
            data,
            tail_mass: self.tail_mass,
        })
    }

    /// `½‖ρ − σ‖₁`; single-mode states of different truncation are compared after padding.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.modes != other.modes {
            return Err(Error::ModeCount {
                expected: self.modes,
                got: other.modes,
            });
        }
        let (a, b) = if self.modes == 1 {
            let d = self.dim.max(other.dim);
            (self.padded(d), other.padded(d))
        } else if self.dim == other.dim {
            (self.clone(), other.clone())
        } else {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        };
        let diff = &a.data - &b.data;
        Ok(0.5 * hermitian_spectrum(&diff).iter().map(|x| x.abs()).sum::<f64>())
    }
}

/// Entries below this fraction of the largest one are zeroed before an eigen-solve.
const FLUSH: f64 = 1e-40;

/// Eigenvalues of a Hermitian matrix.
///
/// The QR iteration can return infinities on matrices holding entries deep in the
/// subnormal range, so those are flushed to zero first. A solve that still fails
/// is retried with a coarser flush; non-finite values survive only if every attempt fails.
pub(crate) fn hermitian_spectrum(m: &DMatrix<Complex64>) -> Vec<f64> {
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return vec![0.0; m.nrows()];
    }
    let trace: f64 = m.diagonal().iter().map(|z| z.re).sum();
    let mut eigs = Vec::new();
    for flush in [FLUSH, 1e-20, 1e-14] {
        let cut = flush * scale;
        let a = m.map(|z| if z.norm() < cut { ZERO } else { z });
        eigs = a.symmetric_eigenvalues().iter().copied().collect();
        let sum: f64 = eigs.iter().sum();
        if eigs.iter().all(|x| x.is_finite()) && (sum - trace).abs() <= 1e-8 * scale.max(trace.abs()) {
            break;
        }
        log::debug!("eigen-solve failed at flush {flush:e}; retrying");
    }
    eigs
}

/// Entropy of a spectrum with the clipping rule used throughout the crate.
pub(crate) fn entropy_of_spectrum(eigs: &[f64], trace: f64) -> Result<f64> {
    let clip = EIG_CLIP * trace.abs().max(f64::MIN_POSITIVE);
    let mut s = 0.0;
    for &l in eigs {
        if !l.is_finite() {
            return Err(Error::Numerical(format!("non-finite eigenvalue {l}")));
        }
        if l < -NEG_EIG_TOL {
            return Err(Error::Numerical(format!("eigenvalue {l:e} below -1e-10")));
        }
        if l > clip {
            s -= l * l.ln();
        }
    }
    Ok(s.max(0.0))
}

pub(crate) fn hermiticity_error(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Projector onto the number state `|n⟩`.
pub fn make_number_state(n: usize, dim: usize) -> Result<DensityMatrix> {
    if n >= dim {
        return Err(Error::OutOfRange { n, dim });
    }
    let mut data = DMatrix::from_element(dim, dim, ZERO);
    data[(n, n)] = Complex64::new(1.0, 0.0);
    Ok(DensityMatrix {
        dim,
        modes: 1,
        data,
        tail_mass: 0.0,
    })
}

/// Pure state `|ψ⟩⟨ψ|` from number-basis amplitudes (normalized here).
pub fn make_pure_state(amplitudes: &[Complex64], dim: usize) -> Result<DensityMatrix> {
    if amplitudes.len() > dim {
        return Err(Error::OutOfRange {
            n: amplitudes.len() - 1,
            dim,
        });
    }
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidState(
            "amplitude vector has zero or non-finite norm".into(),
        ));
    }
    let psi: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
    let data = DMatrix::from_fn(dim, dim, |i, j| {
        if i < psi.len() && j < psi.len() {
            psi[i] * psi[j].conj()
        } else {
            ZERO
        }
    });
    Ok(DensityMatrix {
        dim,
        modes: 1,
        data,
        tail_mass: 0.0,
    })
}

/// Number-basis amplitudes `e^{−|α|²/2} αⁿ/√n!` for `n < len`.
pub(crate) fn coherent_amplitudes(alpha: Complex64, len: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(len);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..len {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    amps
}

pub(crate) fn check_amplitude_guard(alpha: Complex64, dim: usize) -> Result<()> {
    let a2 = alpha.norm_sqr();
    if a2 > dim as f64 / 4.0 {
        return Err(Error::TruncationInadequate(format!(
            "|alpha|^2 = {a2} exceeds dim/4 = {} (dim {dim})",
            dim as f64 / 4.0
        )));
    }
    Ok(())
}

/// Coherent state `|α⟩`, renormalized after truncation.
pub fn make_coherent_state(alpha: Complex64, dim: usize) -> Result<DensityMatrix> {
    check_amplitude_guard(alpha, dim)?;
    let amps = coherent_amplitudes(alpha, dim);
    let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    Ok(make_pure_state(&amps, dim)?.with_tail_mass(1.0 - kept))
}

/// Geometric thermal state with mean photon number `n_mean`, renormalized after truncation.
/// The discarded mass `(N/(N+1))^dim` is attached as the state's tail mass.
pub fn make_thermal_state(n_mean: f64, dim: usize) -> Result<DensityMatrix> {
    if !(n_mean >= 0.0) || !n_mean.is_finite() {
        return Err(Error::Domain(format!("mean photon number must be >= 0, got {n_mean}")));
    }
    if dim == 0 {
        return Err(Error::InvalidState("dimension must be positive".into()));
    }
    let q = n_mean / (n_mean + 1.0);
    let tail = thermal_tail_mass(n_mean, dim);
    let mut data = DMatrix::from_element(dim, dim, ZERO);
    let mut p = 1.0 / (n_mean + 1.0);
    let mut total = 0.0;
    for n in 0..dim {
        data[(n, n)] = Complex64::new(p, 0.0);
        total += p;
        p *= q;
    }
    data /= Complex64::new(total, 0.0);
    if tail > TAIL_WARN {
        log::warn!("thermal state N={n_mean} truncated at dim {dim} drops mass {tail:e}");
    }
    Ok(DensityMatrix {
        dim,
        modes: 1,
        data,
        tail_mass: tail,
    })
}

/// Mass of a thermal distribution at or beyond photon number `dim`.
pub fn thermal_tail_mass(n_mean: f64, dim: usize) -> f64 {
    if n_mean == 0.0 {
        return 0.0;
    }
    (n_mean / (n_mean + 1.0)).powi(dim as i32)
}

/// Smallest truncation at which a thermal state loses at most `tol` of its mass.
pub fn thermal_dim_for_tail(n_mean: f64, tol: f64) -> usize {
    if n_mean <= 0.0 {
        return 1;
    }
    let q = n_mean / (n_mean + 1.0);
    ((tol.ln() / q.ln()).ceil() as usize).max(1)
}

/// Seeded random state with mean photon number at most `cap`.
///
/// Recipe: `G` with i.i.d. complex standard-normal entries, `ρ₀ = GG†/tr`, then
/// `ρ = WρW/tr` with `W = diag(q^{n/2})`, where `q ∈ [0, 1]` is the largest
/// value (found by bisection) keeping the mean photon number at or below `cap`.
pub fn random_density_matrix(dim: usize, cap: f64, seed: u64) -> Result<DensityMatrix> {
    if !(cap >= 0.0) {
        return Err(Error::Domain(format!("photon cap must be >= 0, got {cap}")));
    }
    if dim == 0 {
        return Err(Error::InvalidState("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let mut rho = &g * g.adjoint();
    hermitize(&mut rho);
    let diag: Vec<f64> = (0..dim).map(|i| rho[(i, i)].re).collect();
    let damped_mean = |q: f64| {
        let (mut num, mut den, mut w) = (0.0, 0.0, 1.0);
        for (n, &p) in diag.iter().enumerate() {
            num += n as f64 * w * p;
            den += w * p;
            w *= q;
        }
        num / den
    };
    let q = if damped_mean(1.0) <= cap {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if damped_mean(mid) <= cap {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if q < 1.0 {
        let w: Vec<f64> = (0..dim).map(|n| q.powf(0.5 * n as f64)).collect();
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] *= w[i] * w[j];
            }
        }
    }
    Ok(DensityMatrix::from_numerical(dim, 1, rho))
}
