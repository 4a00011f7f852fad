//! Gaussian-measure quadrature, Hermite eigenfunctions of
//! `L = ∂²_y − (y/2)∂_y + 1` and the mode decomposition of the residual.
//!
//! `dμ = e^{−y²/4}/√(4π) dy`; `∫ h_m h_n dμ = 2ⁿ n! δ_{nm}`; `L h_m = (1 − m/2) h_m`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::chi_c;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HermiteError {
    #[error("quadrature with {nodes} nodes is under-resolved: coefficient {mode} moved by {change:e}")]
    Underresolved { nodes: usize, mode: usize, change: f64 },
    #[error("at least 5 uniform nodes are required, got {0}")]
    TooFewNodes(usize),
    #[error("quadrature order must be at least 2, got {0}")]
    BadOrder(usize),
    #[error("Newton iteration for quadrature node {0} did not converge")]
    NoConvergence(usize),
}

/// `h_m(y)` via `h_{m+1} = y h_m − 2m h_{m−1}`.
pub fn hermite_h<S: Scalar>(m: usize, y: S) -> S {
    let mut prev = S::one();
    if m == 0 {
        return prev;
    }
    let mut cur = y;
    for k in 1..m {
        let next = y * cur - S::lit(2.0) * <S as Scalar>::from_usize(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `‖h_m‖² = ∫ h_m² dμ = 2^m m!`.
pub fn hermite_norm_sq<S: Scalar>(m: usize) -> S {
    (1..=m).fold(S::one(), |acc, k| acc * S::lit(2.0) * <S as Scalar>::from_usize(k))
}

/// Gauss rule for `dμ`: nodes `y = 2x` of the physicists' Gauss–Hermite rule,
/// weights divided by `√π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussMeasureQuad {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_QUAD_ORDER: usize = 64;

impl GaussMeasureQuad {
    pub fn new(n: usize) -> Result<Self, HermiteError> {
        if n < 2 {
            return Err(HermiteError::BadOrder(n));
        }
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            let mut polish = 2;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    // a couple of extra iterations settle the last bits
                    if polish == 0 {
                        break;
                    }
                    polish -= 1;
                }
            }
            if !converged {
                return Err(HermiteError::NoConvergence(i));
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = x.iter().zip(&w).map(|(x, w)| (2.0 * x, w / sqrt_pi)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f dμ`.
    pub fn integral(&self, f: impl Fn(f64) -> f64) -> f64 {
        neumaier_sum(self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)))
    }

    /// `∫ f dμ` for `f` already sampled at the quadrature nodes.
    pub fn integral_sampled(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `P_m(f) = ∫ f h_m dμ / 2^m m!`.
    pub fn project(&self, f: impl Fn(f64) -> f64, m: usize) -> f64 {
        self.integral(|y| f(y) * hermite_h(m, y)) / hermite_norm_sq::<f64>(m)
    }

    /// `(P₀, P₁, P₂)` of values sampled at the quadrature nodes.
    pub fn project_sampled(&self, values: &[f64]) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for ((&y, &w), &v) in self.nodes.iter().zip(&self.weights).zip(values) {
            acc[0] += w * v;
            acc[1] += w * v * y;
            acc[2] += w * v * (y * y - 2.0);
        }
        [acc[0], acc[1] / 2.0, acc[2] / 8.0]
    }
}

/// Compensated summation.
fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for t in terms {
        let s = sum + t;
        c += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + c
}

/// `q = q₀h₀ + q₁h₁ + q₂h₂ + q₋`, with `q₋` and `q_e = (1−χ_c)q` sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDecomposition {
    pub s: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub y: Vec<f64>,
    pub q: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub q_e: Vec<f64>,
    pub qe_sup: f64,
    pub qminus_wnorm: f64,
}

impl ModeDecomposition {
    /// Assembles the decomposition from known coefficients and samples.
    pub fn from_parts(coeffs: [f64; 3], y: Vec<f64>, q: Vec<f64>, s: f64, k: f64) -> Self {
        let [q0, q1, q2] = coeffs;
        let q_minus: Vec<f64> = y
            .iter()
            .zip(&q)
            .map(|(&y, &v)| v - q0 - q1 * y - q2 * (y * y - 2.0))
            .collect();
        let q_e: Vec<f64> = y.iter().zip(&q).map(|(&y, &v)| (1.0 - chi_c(y, s, k)) * v).collect();
        let mut d = Self { s, q0, q1, q2, y, q, q_minus, q_e, qe_sup: 0.0, qminus_wnorm: 0.0 };
        let (e, m) = weighted_norms(&d);
        d.qe_sup = e;
        d.qminus_wnorm = m;
        d
    }

    pub fn coeffs(&self) -> [f64; 3] {
        [self.q0, self.q1, self.q2]
    }

    /// `Σ_{m≤2} q_m h_m(y)`.
    pub fn low_modes(&self, y: f64) -> f64 {
        self.q0 + self.q1 * y + self.q2 * (y * y - 2.0)
    }
}

/// Projects the callable residual `q`; samples `q₋` and `q_e` at `sample_y`.
pub fn project_modes(
    quad: &GaussMeasureQuad,
    q: impl Fn(f64) -> f64,
    sample_y: &[f64],
    s: f64,
    k: f64,
) -> ModeDecomposition {
    let coeffs = [quad.project(&q, 0), quad.project(&q, 1), quad.project(&q, 2)];
    let samples = sample_y.iter().map(|&y| q(y)).collect();
    ModeDecomposition::from_parts(coeffs, sample_y.to_vec(), samples, s, k)
}

/// As [`project_modes`], rejecting the result when doubling the quadrature
/// order moves a coefficient by more than `1e-8`.
pub fn project_modes_checked(
    quad: &GaussMeasureQuad,
    q: impl Fn(f64) -> f64,
    sample_y: &[f64],
    s: f64,
    k: f64,
) -> Result<ModeDecomposition, HermiteError> {
    let fine = GaussMeasureQuad::new(2 * quad.len())?;
    let d = project_modes(quad, &q, sample_y, s, k);
    for (m, c) in d.coeffs().iter().enumerate() {
        let change = (fine.project(&q, m) - c).abs();
        if change > 1e-8 {
            return Err(HermiteError::Underresolved { nodes: quad.len(), mode: m, change });
        }
    }
    Ok(d)
}

/// `(sup|q_e|, sup|q₋(y)|/(1+|y|³))` over the sample nodes.
pub fn weighted_norms(d: &ModeDecomposition) -> (f64, f64) {
    let qe = d.q_e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let qm = d
        .y
        .iter()
        .zip(&d.q_minus)
        .fold(0.0f64, |m, (y, v)| m.max(v.abs() / (1.0 + y.abs().powi(3))));
    (qe, qm)
}

/// `Lq` on the uniform grid `y_i = y0 + i·dy`, second order everywhere
/// (one-sided stencils at the two ends).
pub fn apply_l(y0: f64, dy: f64, q: &[f64]) -> Result<Vec<f64>, HermiteError> {
    let n = q.len();
    if n < 5 {
        return Err(HermiteError::TooFewNodes(n));
    }
    let h2 = dy * dy;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let y = y0 + dy * i as f64;
        let (d2, d1) = if i == 0 {
            ((2.0 * q[0] - 5.0 * q[1] + 4.0 * q[2] - q[3]) / h2, (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dy))
        } else if i == n - 1 {
            (
                (2.0 * q[i] - 5.0 * q[i - 1] + 4.0 * q[i - 2] - q[i - 3]) / h2,
                (3.0 * q[i] - 4.0 * q[i - 1] + q[i - 2]) / (2.0 * dy),
            )
        } else {
            ((q[i + 1] - 2.0 * q[i] + q[i - 1]) / h2, (q[i + 1] - q[i - 1]) / (2.0 * dy))
        };
        out[i] = d2 - 0.5 * y * d1 + q[i];
    }
    Ok(out)
}

/// `‖L h_m − (1−m/2) h_m‖_{L²(μ)} / ‖h_m‖` for the discrete `L` on a uniform
/// grid of spacing `dy` spanning `[−y_max, y_max]`.
///
/// The projection of this error onto `h_m` itself vanishes identically for
/// polynomial `h_m` (the error has degree `m − 2`), so the full weighted norm
/// is what measures the discretisation.
pub fn eigen_residual(m: usize, dy: f64, y_max: f64) -> Result<f64, HermiteError> {
    let n = (2.0 * y_max / dy).round() as usize + 1;
    let y0 = -y_max;
    let h: Vec<f64> = (0..n).map(|i| hermite_h(m, y0 + dy * i as f64)).collect();
    let lh = apply_l(y0, dy, &h)?;
    let lambda = 1.0 - m as f64 / 2.0;
    let norm = (4.0 * std::f64::consts::PI).sqrt();
    let mut acc = 0.0;
    for i in 0..n {
        let y = y0 + dy * i as f64;
        let trap = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let e = lh[i] - lambda * h[i];
        acc += trap * dy * (-y * y / 4.0).exp() / norm * e * e;
    }
    Ok((acc / hermite_norm_sq::<f64>(m)).sqrt())
}
