use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{check_amplitude_guard, coherent_amplitudes, hermitize};
use super::{DensityMatrix, Subsystem};
use crate::exec::{self, Execution};
use crate::{Error, Result};

const UNITARITY_TOL: f64 = 1e-10;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A unitary on a truncated one- or two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    data: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch(data.nrows(), data.ncols()));
        }
        let drift = unitarity_error(&data);
        if drift > UNITARITY_TOL {
            return Err(Error::Numerical(format!("matrix is not unitary (drift {drift:e})")));
        }
        Ok(UnitaryMatrix { data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Max-entry deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.data)
    }
}

fn unitarity_error(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `exp(−iH)` for Hermitian `H` via its eigendecomposition.
fn expm_neg_i_hermitian(h: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| {
        if i == j {
            Complex64::new(0.0, -eig.eigenvalues[i]).exp()
        } else {
            ZERO
        }
    });
    v * phases * v.adjoint()
}

/// Newton–Schulz polar iteration; pulls an almost-unitary matrix back onto the group.
fn reunitarize(mut m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    for _ in 0..8 {
        if unitarity_error(&m) <= UNITARITY_TOL * 1e-2 {
            break;
        }
        let three = DMatrix::<Complex64>::identity(n, n) * Complex64::new(3.0, 0.0);
        m = &m * (three - m.adjoint() * &m) * Complex64::new(0.5, 0.0);
    }
    m
}

/// `D(α) = exp(α a† − α* a)` restricted to the truncated space (the generator is
/// truncated, so the result is exactly unitary).
pub fn displacement_operator(alpha: Complex64, dim: usize) -> Result<UnitaryMatrix> {
    check_amplitude_guard(alpha, dim)?;
    // H = i(α a† − α* a) is Hermitian and D = exp(−iH).
    let mut h = DMatrix::from_element(dim, dim, ZERO);
    let i = Complex64::new(0.0, 1.0);
    for n in 0..dim.saturating_sub(1) {
        let s = ((n + 1) as f64).sqrt();
        // ⟨n+1|a†|n⟩ = √(n+1), ⟨n|a|n+1⟩ = √(n+1)
        h[(n + 1, n)] = i * alpha * s;
        h[(n, n + 1)] = -i * alpha.conj() * s;
    }
    let mut u = expm_neg_i_hermitian(h);
    if unitarity_error(&u) > UNITARITY_TOL {
        u = reunitarize(u);
    }
    UnitaryMatrix::new(u)
}

/// Exact matrix elements `⟨m|D(α)|n⟩` of the untruncated displacement for
/// `m < rows`, `n < cols`.
///
/// Columns follow `D|n⟩ = (a† − α*) D|n−1⟩ / √n` starting from the coherent
/// amplitudes; rows `< rows` of each column only depend on rows `< rows` of the
/// previous one, so no padding is needed.
pub fn displacement_block(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(rows, cols, ZERO);
    if rows == 0 || cols == 0 {
        return out;
    }
    let mut col = coherent_amplitudes(alpha, rows);
    let ac = alpha.conj();
    for n in 0..cols {
        if n > 0 {
            let inv = 1.0 / (n as f64).sqrt();
            let mut next = vec![ZERO; rows];
            for m in 0..rows {
                let raised = if m > 0 { col[m - 1] * (m as f64).sqrt() } else { ZERO };
                next[m] = (raised - ac * col[m]) * inv;
            }
            col = next;
        }
        for m in 0..rows {
            out[(m, n)] = col[m];
        }
    }
    out
}

/// `cos θ = √λ` for the beamsplitter angle.
fn beamsplitter_angle(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("transmissivity must lie in [0,1], got {lambda}")));
    }
    Ok(lambda.sqrt().clamp(0.0, 1.0).acos())
}

/// Two-mode beamsplitter `exp(θ(a†b − ab†))`, `cos θ = √λ`, on `dim²` states.
///
/// Built block by block in fixed-total-photon sectors, so photon number is
/// conserved exactly. Sectors with total photon number `< dim` are complete and
/// therefore exact; higher sectors use the truncated generator. The Heisenberg
/// action on the first mode is `a ↦ √λ a + √(1−λ) b`; the `−√λ` entry of the
/// symplectic matrix only concerns the discarded mode and is not reproduced.
pub fn beamsplitter_unitary(lambda: f64, dim: usize) -> Result<UnitaryMatrix> {
    let theta = beamsplitter_angle(lambda)?;
    let n = dim * dim;
    let mut u = DMatrix::from_element(n, n, ZERO);
    for k in 0..=(2 * dim).saturating_sub(2) {
        let lo = k.saturating_sub(dim - 1);
        let hi = k.min(dim - 1);
        let size = hi - lo + 1;
        // H = iG with G[j+1, j] = θ√(j+1)√(k−j), G[j, j+1] = −G[j+1, j]
        let mut h = DMatrix::from_element(size, size, ZERO);
        for r in 0..size - 1 {
            let j = lo + r;
            let g = theta * (((j + 1) * (k - j)) as f64).sqrt();
            h[(r + 1, r)] = Complex64::new(0.0, g);
            h[(r, r + 1)] = Complex64::new(0.0, -g);
        }
        let block = expm_neg_i_hermitian(h);
        for r in 0..size {
            for c in 0..size {
                let (ja, jc) = (lo + r, lo + c);
                let row = ja * dim + (k - ja);
                let col = jc * dim + (k - jc);
                // the sector block is real up to rounding
                u[(row, col)] = Complex64::new(block[(r, c)].re, 0.0);
            }
        }
    }
    UnitaryMatrix::new(u)
}

/// Exact beamsplitter images `U|m, p⟩` for `m < d1`, `p < d2`, as vectors over the
/// total-photon sector `k = m + p` (entry `j` is the amplitude of `|j, k − j⟩`).
///
/// Uses `U a† U† = √λ a† − √(1−λ) b†` and `U b† U† = √(1−λ) a† + √λ b†`, so no
/// sector is truncated.
#[derive(Debug, Clone)]
pub struct BeamsplitterColumns {
    d2: usize,
    columns: Vec<Vec<f64>>,
}

impl BeamsplitterColumns {
    pub fn new(lambda: f64, d1: usize, d2: usize) -> Result<Self> {
        beamsplitter_angle(lambda)?;
        let c = lambda.sqrt();
        let s = (1.0 - lambda).max(0.0).sqrt();
        // apply (x a† + y b†)/√norm to a sector-(k−1) vector
        let raise = |v: &[f64], x: f64, y: f64, norm: f64| -> Vec<f64> {
            let k = v.len();
            let inv = 1.0 / norm.sqrt();
            (0..=k)
                .map(|j| {
                    let from_a = if j > 0 { x * (j as f64).sqrt() * v[j - 1] } else { 0.0 };
                    let from_b = if j < k { y * ((k - j) as f64).sqrt() * v[j] } else { 0.0 };
                    (from_a + from_b) * inv
                })
                .collect()
        };
        let mut columns = Vec::with_capacity(d1 * d2);
        let mut first: Vec<f64> = vec![1.0];
        for m in 0..d1 {
            if m > 0 {
                first = raise(&first, c, -s, m as f64);
            }
            let mut col = first.clone();
            columns.push(col.clone());
            for p in 1..d2 {
                col = raise(&col, s, c, p as f64);
                columns.push(col.clone());
            }
        }
        Ok(BeamsplitterColumns { d2, columns })
    }

    /// Amplitudes of `U|m, p⟩` over `|j, m + p − j⟩`, `j = 0..=m+p`.
    pub fn column(&self, m: usize, p: usize) -> &[f64] {
        &self.columns[m * self.d2 + p]
    }
}

/// Reduced first-mode output `tr₂[U(ρ⊗σ)U†]` of a transmissivity-`λ` beamsplitter.
///
/// Exact: every output sector is complete, so the result lives on
/// `ρ.dim + σ.dim − 1` levels and carries no truncation error beyond that of the
/// inputs themselves.
pub fn attenuate(rho: &DensityMatrix, lambda: f64, sigma: &DensityMatrix, exec: Execution) -> Result<DensityMatrix> {
    for s in [rho, sigma] {
        if s.modes() != 1 {
            return Err(Error::ModeCount {
                expected: 1,
                got: s.modes(),
            });
        }
    }
    let (d1, d2) = (rho.dim(), sigma.dim());
    let cols = BeamsplitterColumns::new(lambda, d1, d2)?;
    let out_dim = d1 + d2 - 1;
    let sig: Vec<(usize, usize, Complex64)> = nonzeros(sigma.matrix());

    let partials = exec::map_range(exec, d1, |m| {
        let mut acc = DMatrix::from_element(out_dim, out_dim, ZERO);
        for n in 0..d1 {
            let r = rho.get(m, n);
            if r == ZERO {
                continue;
            }
            for &(p, q, sv) in &sig {
                let coef = r * sv;
                let a = cols.column(m, p);
                let b = cols.column(n, q);
                let (k1, k2) = (m + p, n + q);
                for e in 0..=k1.min(k2) {
                    let w = a[k1 - e] * b[k2 - e];
                    if w != 0.0 {
                        acc[(k1 - e, k2 - e)] += coef * w;
                    }
                }
            }
        }
        acc
    });
    let mut out = DMatrix::from_element(out_dim, out_dim, ZERO);
    for p in partials {
        out += p;
    }
    hermitize(&mut out);
    Ok(DensityMatrix::from_numerical(out_dim, 1, out).with_tail_mass(rho.tail_mass() + sigma.tail_mass()))
}

/// Same channel through the dense two-mode route: `ρ⊗σ`, conjugation by
/// [`beamsplitter_unitary`], partial trace. Agrees with [`attenuate`] whenever
/// both inputs live in sectors below the common truncation.
pub fn attenuate_dense(rho: &DensityMatrix, lambda: f64, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    let joint = rho.tensor(sigma)?;
    let u = beamsplitter_unitary(lambda, joint.dim())?;
    joint.conjugated(&u)?.partial_trace(Subsystem::First)
}

fn nonzeros(m: &DMatrix<Complex64>) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z != ZERO {
                out.push((i, j, z));
            }
        }
    }
    out
}
