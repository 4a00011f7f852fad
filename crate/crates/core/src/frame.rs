//! Self-similar frame around the ring, smooth cut-offs and the residual `q`.
//!
//! `y = (r−1)/√(T−t)`, `s = −log(T−t)`, `W = (T−t)^{1/(p−1)} u`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::RadialGrid;
use crate::model::{ModelParams, Profile};
use crate::scalar::Scalar;
use crate::solver::RadialField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("field time {t} is not before the blow-up time {t_blow}")]
    PastBlowup { t: f64, t_blow: f64 },
    #[error("remaining time must be positive, got {0}")]
    NonPositiveRemaining(f64),
    #[error("frame has {w} values for {nodes} nodes")]
    Inconsistent { w: usize, nodes: usize },
    #[error("invalid cut-off parameter {name} = {value}")]
    Cutoff { name: &'static str, value: f64 },
}

#[inline]
fn psi<S: Scalar>(x: S) -> S {
    if x > S::zero() {
        (-x.recip()).exp()
    } else {
        S::zero()
    }
}

/// C^∞ ramp: 0 for `t ≤ 0`, 1 for `t ≥ 1`, strictly increasing between.
#[inline]
pub fn smooth_step<S: Scalar>(t: S) -> S {
    if t <= S::zero() {
        return S::zero();
    }
    if t >= S::one() {
        return S::one();
    }
    let a = psi(t);
    a / (a + psi(S::one() - t))
}

/// `χ`: 0 on `ξ ≤ 1/8`, 1 on `ξ ≥ 1/4`.
pub fn chi<S: Scalar>(xi: S) -> S {
    let e = S::lit(0.125);
    smooth_step((xi - e) / e)
}

/// `χ̄`: 1 on `ξ ≤ 3/8`, 0 on `ξ ≥ 3/4`.
pub fn chi_bar<S: Scalar>(xi: S) -> S {
    let e = S::lit(0.375);
    S::one() - smooth_step((xi - e) / e)
}

/// `χ₀`: 1 on `ξ ≤ 1`, 0 on `ξ ≥ 2`.
pub fn chi0<S: Scalar>(xi: S) -> S {
    S::one() - smooth_step(xi - S::one())
}

/// `χ_c(y, s) = χ₀(|y|/(2K√s))`.
pub fn chi_c<S: Scalar>(y: S, s: S, k: S) -> S {
    chi0(y.abs() / (S::lit(2.0) * k * s.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    Chi,
    ChiBar,
    ChiC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffParams<S = f64> {
    pub eps0: S,
    pub k: S,
}

impl<S: Scalar> CutoffParams<S> {
    pub fn new(eps0: S, k: S) -> Result<Self, FrameError> {
        let c = Self { eps0, k };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if !(self.eps0 > S::zero() && self.eps0 < S::one()) {
            return Err(FrameError::Cutoff { name: "eps0", value: self.eps0.to_f64().unwrap_or(f64::NAN) });
        }
        if !(self.k >= S::one()) || !self.k.is_finite() {
            return Err(FrameError::Cutoff { name: "K", value: self.k.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(())
    }
}

/// Evaluates one of the cut-offs. `x` is `ξ` for `χ`, `χ̄` and `y` for `χ_c`.
pub fn cutoffs<S: Scalar>(x: S, s: S, which: Cutoff, cutp: &CutoffParams<S>) -> S {
    match which {
        Cutoff::Chi => chi(x),
        Cutoff::ChiBar => chi_bar(x),
        Cutoff::ChiC => chi_c(x, s, cutp.k),
    }
}

/// Samples of `W` on the radial nodes, viewed in self-similar variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarFrame {
    pub grid: Arc<RadialGrid>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub s: f64,
    /// Remaining time `T − t = e^{−s}`, kept exactly.
    pub tau: f64,
    pub t_blow: f64,
    pub model: ModelParams<f64>,
}

/// Transforms `field` with blow-up time `t_blow`.
pub fn to_selfsimilar(field: &RadialField, t_blow: f64) -> Result<SelfSimilarFrame, FrameError> {
    if !(field.t < t_blow) {
        return Err(FrameError::PastBlowup { t: field.t, t_blow });
    }
    to_selfsimilar_tau(field, t_blow, t_blow - field.t)
}

/// As [`to_selfsimilar`] with the remaining time supplied directly, which
/// avoids cancellation in `T − t` close to blow-up.
pub fn to_selfsimilar_tau(field: &RadialField, t_blow: f64, tau: f64) -> Result<SelfSimilarFrame, FrameError> {
    if !(tau > 0.0) {
        return Err(FrameError::NonPositiveRemaining(tau));
    }
    let sq = tau.sqrt();
    let amp = tau.powf(1.0 / (field.model.p - 1.0));
    Ok(SelfSimilarFrame {
        grid: field.grid.clone(),
        y: field.grid.offsets().iter().map(|rho| rho / sq).collect(),
        w: field.values.iter().map(|u| u * amp).collect(),
        s: -tau.ln(),
        tau,
        t_blow,
        model: field.model,
    })
}

/// Inverse of [`to_selfsimilar`] on the shared nodes.
pub fn from_selfsimilar(frame: &SelfSimilarFrame) -> Result<RadialField, FrameError> {
    if frame.w.len() != frame.grid.len() || frame.y.len() != frame.grid.len() {
        return Err(FrameError::Inconsistent { w: frame.w.len(), nodes: frame.grid.len() });
    }
    if !(frame.tau > 0.0) {
        return Err(FrameError::NonPositiveRemaining(frame.tau));
    }
    let amp = frame.tau.powf(-1.0 / (frame.model.p - 1.0));
    Ok(RadialField {
        grid: frame.grid.clone(),
        values: frame.w.iter().map(|w| w * amp).collect(),
        t: frame.t_blow - frame.tau,
        model: frame.model,
    })
}

impl SelfSimilarFrame {
    /// Builds a frame directly from `W` samples on the grid.
    pub fn from_w(
        grid: Arc<RadialGrid>,
        w: Vec<f64>,
        s: f64,
        t_blow: f64,
        model: ModelParams<f64>,
    ) -> Result<Self, FrameError> {
        if w.len() != grid.len() {
            return Err(FrameError::Inconsistent { w: w.len(), nodes: grid.len() });
        }
        let tau = (-s).exp();
        let sq = tau.sqrt();
        let y = grid.offsets().iter().map(|rho| rho / sq).collect();
        Ok(Self { grid, y, w, s, tau, t_blow, model })
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y[0], self.y[self.y.len() - 1])
    }

    /// `W(y)` by 4-point Lagrange interpolation; `None` outside the nodes.
    pub fn w_at(&self, y: f64) -> Option<f64> {
        cubic_interp(&self.y, &self.w, y)
    }

    /// `W` on `n` uniform nodes spanning `[lo, hi]`.
    pub fn resample_uniform(&self, lo: f64, hi: f64, n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        if n < 2 {
            return None;
        }
        let dy = (hi - lo) / (n - 1) as f64;
        let ys: Vec<f64> = (0..n).map(|i| lo + dy * i as f64).collect();
        let ws = ys.iter().map(|&y| self.w_at(y)).collect::<Option<Vec<_>>>()?;
        Some((ys, ws))
    }

    /// `(1 + y e^{−s/2})/ε₀`, the argument of the regular-region cut-off.
    #[inline]
    pub fn regular_arg(&self, y: f64, eps0: f64) -> f64 {
        (1.0 + y * self.tau.sqrt()) / eps0
    }

    /// `q(y) = W(y)χ((1+ye^{−s/2})/ε₀) − φ(y, s)` at an arbitrary `y`.
    pub fn q_at(&self, y: f64, cutp: &CutoffParams<f64>, profile: &Profile<f64>) -> Option<f64> {
        let w = self.w_at(y)?;
        Some(w * chi(self.regular_arg(y, cutp.eps0)) - profile.phi_unchecked(y, self.s))
    }

    pub fn sup_w(&self) -> f64 {
        self.w.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}

/// Residual `q` on the frame nodes.
pub fn residual_q(frame: &SelfSimilarFrame, cutp: &CutoffParams<f64>) -> Vec<f64> {
    let profile = Profile::new(frame.model);
    (0..frame.w.len())
        .map(|i| {
            let xi = frame.grid.r(i) / cutp.eps0;
            frame.w[i] * chi(xi) - profile.phi_unchecked(frame.y[i], frame.s)
        })
        .collect()
}

/// 4-point Lagrange interpolation on strictly increasing nodes.
pub fn cubic_interp(xs: &[f64], vs: &[f64], x: f64) -> Option<f64> {
    let n = xs.len();
    if n < 4 || !(x >= xs[0] && x <= xs[n - 1]) {
        return None;
    }
    let j = xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    let start = j.saturating_sub(1).min(n - 4);
    let idx = start..start + 4;
    let mut acc = 0.0;
    for i in idx.clone() {
        if xs[i] == x {
            return Some(vs[i]);
        }
        let mut l = 1.0;
        for k in idx.clone() {
            if k != i {
                l *= (x - xs[k]) / (xs[i] - xs[k]);
            }
        }
        acc += l * vs[i];
    }
    Some(acc)
}
