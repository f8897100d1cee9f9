//! One-dimensional quadrature rules on `[-S, S]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    Midpoint,
    GaussLegendre,
}

/// Rule, node count and truncation half-width for line integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub n_nodes: usize,
    pub s_halfwidth: f64,
}

impl QuadratureSpec {
    pub fn new(rule: QuadratureRule, n_nodes: usize, s_halfwidth: f64) -> Result<Self> {
        let q = QuadratureSpec {
            rule,
            n_nodes,
            s_halfwidth,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 16 {
            return Err(Error::invalid(format!(
                "quadrature needs at least 16 nodes, got {}",
                self.n_nodes
            )));
        }
        if !(self.s_halfwidth > 0.0 && self.s_halfwidth.is_finite()) {
            return Err(Error::invalid("quadrature half-width must be positive"));
        }
        Ok(())
    }

    /// Nodes and weights on `[-S, S]`.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let s = self.s_halfwidth;
        match self.rule {
            QuadratureRule::Midpoint => {
                let h = 2.0 * s / self.n_nodes as f64;
                let nodes = (0..self.n_nodes)
                    .map(|i| -s + (i as f64 + 0.5) * h)
                    .collect();
                (nodes, vec![h; self.n_nodes])
            }
            QuadratureRule::GaussLegendre => {
                let (x, w) = gauss_legendre(self.n_nodes);
                (
                    x.iter().map(|xi| xi * s).collect(),
                    w.iter().map(|wi| wi * s).collect(),
                )
            }
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rule: QuadratureRule::GaussLegendre,
            n_nodes: 64,
            s_halfwidth: 10.0,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Newton iteration on `P_n` from the Chebyshev-like initial guesses; the
/// three-term recurrence gives `P_n` and `P_{n-1}` together.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
