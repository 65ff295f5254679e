//! One-dimensional Gauss rules (Golub–Welsch) and the phase-space rules built from them.

use nalgebra::DMatrix;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(off_diag: impl Fn(usize) -> f64, n: usize, total_weight: f64) -> Rule1d {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = off_diag(k);
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], total_weight * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetric rules: enforce exact node/weight symmetry
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let norm: f64 = pairs.iter().map(|p| p.1).sum();
    Rule1d {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 * total_weight / norm).collect(),
    }
}

/// Gauss–Hermite rule for the standard normal density: `Σ wᵢ f(xᵢ) ≈ E[f(X)]`, `X ~ N(0, 1)`.
pub fn gauss_hermite(n: usize) -> Rule1d {
    assert!(n > 0, "rule needs at least one node");
    golub_welsch(|k| (k as f64).sqrt(), n, 1.0)
}

/// Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule1d {
    assert!(n > 0, "rule needs at least one node");
    let base = golub_welsch(
        |k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        },
        n,
        2.0,
    );
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Rule1d {
        nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
        weights: base.weights.iter().map(|w| w * half).collect(),
    }
}

/// Weighted point set approximating a probability density on the plane.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseSpaceRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl PhaseSpaceRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn push(&mut self, node: [f64; 2], weight: f64) {
        self.nodes.push(node);
        self.weights.push(weight);
    }

    /// `Σ wᵢ h(xᵢ)`.
    pub fn integrate(&self, h: impl Fn([f64; 2]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * h(*x)).sum()
    }

    /// Drops the lightest nodes while the discarded mass stays at or below `budget`.
    pub fn pruned(&self, budget: f64) -> PhaseSpaceRule {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.weights[a].total_cmp(&self.weights[b]));
        let mut dropped = 0.0;
        let mut keep = vec![true; self.len()];
        for &i in &order {
            if dropped + self.weights[i] > budget {
                break;
            }
            dropped += self.weights[i];
            keep[i] = false;
        }
        let mut out = PhaseSpaceRule::default();
        for i in 0..self.len() {
            if keep[i] {
                out.push(self.nodes[i], self.weights[i]);
            }
        }
        out
    }
}
