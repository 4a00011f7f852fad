//! Method-of-lines integration of `∂ₜu = ∂²ᵣu + ((d−1)/r)∂ᵣu + |u|^{p−1}u`.
//!
//! Space: second-order central differences on a [`RadialGrid`]. At `r = 0`
//! the symmetry condition `∂ᵣu = 0` holds and the singular coefficient is
//! replaced by its limit, giving `d·∂²ᵣu` there.
//!
//! Time: the two-stage L-stable Rosenbrock method ROS2 with the exact
//! (tridiagonal) Jacobian. Its first stage is the linearly implicit Euler
//! step, which doubles as an embedded first-order solution for error control.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::RadialGrid;
use crate::model::{ModelParams, ProfileConstants};

const GAMMA: f64 = 1.0 + std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("integration diverged at t = {t}")]
    Diverged { t: f64, last_good: Box<RadialField> },
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("initial data is not finite")]
    NonFiniteInitialData,
    #[error("field and grid sizes differ ({values} values, {nodes} nodes)")]
    SizeMismatch { values: usize, nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("blow-up time fit unreliable: {0}")]
    Unreliable(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterBoundary {
    Dirichlet,
    Neumann,
}

/// Solution samples `u(rᵢ, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
    pub t: f64,
    pub model: ModelParams<f64>,
}

impl RadialField {
    pub fn new(
        grid: Arc<RadialGrid>,
        values: Vec<f64>,
        t: f64,
        model: ModelParams<f64>,
    ) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::SizeMismatch { values: values.len(), nodes: grid.len() });
        }
        Ok(Self { grid, values, t, model })
    }

    pub fn from_fn(
        grid: Arc<RadialGrid>,
        model: ModelParams<f64>,
        t: f64,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.r(i))).collect();
        Self { grid, values, t, model }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Node index of `max |u|`.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > val {
                val = v.abs();
                best = i;
            }
        }
        best
    }

    /// Radius of the maximum of `|u|` refined by a 3-point parabola.
    pub fn refined_argmax(&self) -> f64 {
        let i = self.argmax();
        let n = self.values.len();
        if i == 0 || i + 1 >= n {
            return self.grid.r(i);
        }
        let off = self.grid.offsets();
        let hm = off[i] - off[i - 1];
        let hp = off[i + 1] - off[i];
        let (u0, u1, u2) = (self.values[i - 1].abs(), self.values[i].abs(), self.values[i + 1].abs());
        let denom = hm * hp * (hm + hp);
        let a = ((u2 - u1) * hm + (u0 - u1) * hp) / denom;
        let b = ((u2 - u1) * hm * hm - (u0 - u1) * hp * hp) / denom;
        if !(a < 0.0) {
            return self.grid.r(i);
        }
        let x = (-b / (2.0 * a)).clamp(-hm, hp);
        1.0 + (off[i] + x)
    }

    /// `max |u|` over nodes with `r ≤ radius`.
    pub fn sup_within(&self, radius: f64) -> f64 {
        (0..self.values.len())
            .take_while(|&i| self.grid.r(i) <= radius)
            .fold(0.0, |m, i| m.max(self.values[i].abs()))
    }

    /// Number of local maxima of `|u|` exceeding half the supremum.
    pub fn ring_count(&self) -> usize {
        let sup = self.sup_abs();
        if sup == 0.0 {
            return 0;
        }
        let v: Vec<f64> = self.values.iter().map(|x| x.abs()).collect();
        let n = v.len();
        let mut count = 0;
        let mut i = 0;
        while i < n {
            if v[i] > 0.5 * sup {
                // one plateau above half the maximum counts once per peak
                let start = i;
                while i + 1 < n && v[i + 1] > 0.5 * sup {
                    i += 1;
                }
                let seg = &v[start..=i];
                let mut peaks = 0;
                for j in 0..seg.len() {
                    let left = if j == 0 { f64::NEG_INFINITY } else { seg[j - 1] };
                    let right = if j + 1 == seg.len() { f64::NEG_INFINITY } else { seg[j + 1] };
                    if seg[j] >= left && seg[j] > right {
                        peaks += 1;
                    }
                }
                count += peaks.max(1);
            }
            i += 1;
        }
        count
    }
}

/// Tridiagonal discretisation of `∂²ᵣ + ((d−1)/r)∂ᵣ`.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    dirichlet_outer: bool,
}

impl RadialOperator {
    pub fn new(grid: &RadialGrid, d: u32, outer: OuterBoundary) -> Self {
        let n = grid.len();
        let h = grid.spacing();
        let dm1 = d as f64 - 1.0;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let h0 = h[0];
        diag[0] = -2.0 * d as f64 / (h0 * h0);
        upper[0] = 2.0 * d as f64 / (h0 * h0);
        for i in 1..n - 1 {
            let (hm, hp) = (h[i - 1], h[i]);
            let sum = hm + hp;
            let coef = dm1 / grid.r(i);
            lower[i] = 2.0 / (hm * sum) - coef * hp / (hm * sum);
            upper[i] = 2.0 / (hp * sum) + coef * hm / (hp * sum);
            diag[i] = -2.0 / (hm * hp) + coef * (hp - hm) / (hm * hp);
        }
        let last = n - 1;
        let dirichlet_outer = outer == OuterBoundary::Dirichlet;
        if !dirichlet_outer {
            let hl = h[last - 1];
            lower[last] = 2.0 / (hl * hl);
            diag[last] = -2.0 / (hl * hl);
        }
        Self { lower, diag, upper, dirichlet_outer }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = A u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.len();
        out[0] = self.diag[0] * u[0] + self.upper[0] * u[1];
        for i in 1..n - 1 {
            out[i] = self.lower[i] * u[i - 1] + self.diag[i] * u[i] + self.upper[i] * u[i + 1];
        }
        out[n - 1] = if self.dirichlet_outer {
            0.0
        } else {
            self.lower[n - 1] * u[n - 2] + self.diag[n - 1] * u[n - 1]
        };
    }
}

/// Reusable ROS2 integrator state for one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    op: RadialOperator,
    p: f64,
    k1: Vec<f64>,
    k2: Vec<f64>,
    tmp: Vec<f64>,
    jac: Vec<f64>,
    cprime: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &RadialGrid, model: &ModelParams<f64>, outer: OuterBoundary) -> Self {
        let n = grid.len();
        Self {
            op: RadialOperator::new(grid, model.d, outer),
            p: model.p,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            tmp: vec![0.0; n],
            jac: vec![0.0; n],
            cprime: vec![0.0; n],
        }
    }

    fn rhs(op: &RadialOperator, p: f64, u: &[f64], out: &mut [f64]) {
        op.apply(u, out);
        let last = u.len() - 1;
        for (i, (o, &v)) in out.iter_mut().zip(u).enumerate() {
            if i == last && op.dirichlet_outer {
                continue;
            }
            *o += v.abs().powf(p - 1.0) * v;
        }
    }

    /// Solves `(I − g J) x = b` in place, `J = A + diag(jac)`.
    fn solve(op: &RadialOperator, jac: &[f64], g: f64, b: &mut [f64], cprime: &mut [f64]) {
        let n = b.len();
        let last = n - 1;
        let diag = |i: usize| -> f64 {
            if i == last && op.dirichlet_outer {
                1.0
            } else {
                1.0 - g * (op.diag[i] + jac[i])
            }
        };
        let lower = |i: usize| -> f64 {
            if i == last && op.dirichlet_outer {
                0.0
            } else {
                -g * op.lower[i]
            }
        };
        let upper = |i: usize| -> f64 { -g * op.upper[i] };
        let mut denom = diag(0);
        cprime[0] = upper(0) / denom;
        b[0] /= denom;
        for i in 1..n {
            let l = lower(i);
            denom = diag(i) - l * cprime[i - 1];
            cprime[i] = if i < last { upper(i) / denom } else { 0.0 };
            b[i] = (b[i] - l * b[i - 1]) / denom;
        }
        for i in (0..last).rev() {
            b[i] -= cprime[i] * b[i + 1];
        }
    }

    /// Advances `u` by `dt` in place and returns the scaled error-estimate
    /// vector norm `max |e|/(atol + rtol |u|)`.
    pub fn advance(&mut self, u: &mut [f64], dt: f64, atol: f64, rtol: f64) -> f64 {
        let p = self.p;
        let g = GAMMA * dt;
        for (j, &v) in self.jac.iter_mut().zip(u.iter()) {
            *j = p * v.abs().powf(p - 1.0);
        }
        Self::rhs(&self.op, p, u, &mut self.k1);
        Self::solve(&self.op, &self.jac, g, &mut self.k1, &mut self.cprime);
        for ((t, &v), &k) in self.tmp.iter_mut().zip(u.iter()).zip(&self.k1) {
            *t = v + dt * k;
        }
        Self::rhs(&self.op, p, &self.tmp, &mut self.k2);
        for (k2, &k1) in self.k2.iter_mut().zip(&self.k1) {
            *k2 -= 2.0 * k1;
        }
        Self::solve(&self.op, &self.jac, g, &mut self.k2, &mut self.cprime);
        let mut err: f64 = 0.0;
        for ((v, &k1), &k2) in u.iter_mut().zip(&self.k1).zip(&self.k2) {
            let new = *v + dt * (1.5 * k1 + 0.5 * k2);
            let e = 0.5 * dt * (k1 + k2);
            let scale = atol + rtol * v.abs().max(new.abs());
            err = err.max(e.abs() / scale);
            *v = new;
        }
        err
    }
}

/// One ROS2 step of length `dt`.
pub fn step(field: &RadialField, dt: f64, outer: OuterBoundary) -> Result<RadialField, SolverError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SolverError::BadTimeStep(dt));
    }
    let mut stepper = Stepper::new(&field.grid, &field.model, outer);
    let mut next = field.clone();
    stepper.advance(&mut next.values, dt, 1.0, 0.0);
    next.t = field.t + dt;
    if !next.is_finite() {
        return Err(SolverError::Diverged { t: next.t, last_good: Box::new(field.clone()) });
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeStepping {
    /// `dt = fraction / ((p−1) sup|u|^{p−1})`, i.e. a fixed fraction of the
    /// remaining time of the flat blow-up ODE; capped by `dt_max`.
    NonlinearScale { fraction: f64, dt_max: f64 },
    /// Error-controlled steps from the embedded first-order estimate, with
    /// the nonlinear-scale cap as an upper bound.
    Embedded { rtol: f64, atol: f64, fraction: f64, dt_max: f64 },
}

impl Default for TimeStepping {
    fn default() -> Self {
        TimeStepping::NonlinearScale { fraction: 0.025, dt_max: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub outer_bc: OuterBoundary,
    pub m_stop: f64,
    pub max_steps: usize,
    pub t_max: f64,
    pub stepping: TimeStepping,
    /// Stop once `√(T−t)` (estimated from `sup|u|`) drops below four ring
    /// cells; the solution is no longer resolved past that point.
    pub resolution_guard: bool,
    /// Snapshot whenever `log sup|u|` grew by this much.
    pub snapshot_dlog: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_bc: OuterBoundary::Dirichlet,
            m_stop: 1e8,
            max_steps: 2_000_000,
            t_max: 1.0,
            stepping: TimeStepping::default(),
            resolution_guard: true,
            snapshot_dlog: 0.0625,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ThresholdHit,
    MaxSteps,
    NoBlowup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub t: f64,
    pub sup_u: f64,
    pub r_argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub t_est: Option<f64>,
    pub r_blow: Option<f64>,
    pub stop_reason: StopReason,
    pub step_count: usize,
    /// Threshold actually used; lowered by the resolution guard or when the
    /// step falls below the time resolution of `t`.
    pub m_effective: f64,
    pub series: Vec<SeriesSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BlowupRun {
    pub report: BlowupReport,
    pub snapshots: Vec<Snapshot>,
    pub final_field: RadialField,
}

/// `sup|u|` at which `√(T−t) = 4 h_ring` for the flat blow-up law.
pub fn resolution_threshold(grid: &RadialGrid, model: &ModelParams<f64>) -> f64 {
    let h = grid.ring_spacing();
    let kappa = ProfileConstants::new(model.p).kappa;
    kappa * (16.0 * h * h).powf(-1.0 / (model.p - 1.0))
}

/// Integrates until `sup|u| ≥ M` or the budget runs out.
pub fn run_until_blowup(u0: &RadialField, cfg: &SolverConfig) -> Result<BlowupRun, SolverError> {
    run_until_blowup_observed(u0, cfg, |_| {})
}

/// As [`run_until_blowup`], calling `observe` after every accepted step.
pub fn run_until_blowup_observed(
    u0: &RadialField,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&RadialField),
) -> Result<BlowupRun, SolverError> {
    if !u0.is_finite() {
        return Err(SolverError::NonFiniteInitialData);
    }
    let p = u0.model.p;
    let mut m_eff = cfg.m_stop;
    if cfg.resolution_guard {
        m_eff = m_eff.min(resolution_threshold(&u0.grid, &u0.model));
    }
    let mut stepper = Stepper::new(&u0.grid, &u0.model, cfg.outer_bc);
    let mut field = u0.clone();
    let mut series = vec![SeriesSample { t: field.t, sup_u: field.sup_abs(), r_argmax: field.refined_argmax() }];
    let mut snapshots = vec![Snapshot { t: field.t, values: field.values.clone() }];
    let mut last_snap_log = series[0].sup_u.ln();
    let mut steps = 0usize;
    let mut dt_embedded: Option<f64> = None;
    let mut backup = field.values.clone();

    let stop_reason = loop {
        let sup = field.sup_abs();
        if sup >= m_eff {
            break StopReason::ThresholdHit;
        }
        if sup == 0.0 || field.t >= u0.t + cfg.t_max {
            break StopReason::NoBlowup;
        }
        if steps >= cfg.max_steps {
            break StopReason::MaxSteps;
        }
        let nl_dt = |fraction: f64, dt_max: f64| (fraction / ((p - 1.0) * sup.powf(p - 1.0))).min(dt_max);
        // Past this point t can no longer resolve the remaining time.
        let dt_floor = 1e3 * f64::EPSILON * field.t.abs();
        let nominal = match cfg.stepping {
            TimeStepping::NonlinearScale { fraction, dt_max } | TimeStepping::Embedded { fraction, dt_max, .. } => {
                nl_dt(fraction, dt_max)
            }
        };
        if nominal < dt_floor {
            m_eff = sup;
            break StopReason::ThresholdHit;
        }
        let dt = match cfg.stepping {
            TimeStepping::NonlinearScale { fraction, dt_max } => {
                let dt = nl_dt(fraction, dt_max);
                stepper.advance(&mut field.values, dt, 1.0, 0.0);
                dt
            }
            TimeStepping::Embedded { rtol, atol, fraction, dt_max } => {
                let cap = nl_dt(fraction, dt_max);
                let mut dt = dt_embedded.unwrap_or(cap * 0.1).min(cap);
                backup.copy_from_slice(&field.values);
                loop {
                    let err = stepper.advance(&mut field.values, dt, atol, rtol);
                    let factor = if err > 0.0 { 0.9 * err.powf(-0.5) } else { 2.0 };
                    if err <= 1.0 && field.values.iter().all(|v| v.is_finite()) {
                        dt_embedded = Some(dt * factor.clamp(0.2, 2.0));
                        break;
                    }
                    field.values.copy_from_slice(&backup);
                    dt *= factor.clamp(0.1, 0.5);
                    if dt < 1e-300 {
                        return Err(SolverError::BadTimeStep(dt));
                    }
                }
                dt
            }
        };
        steps += 1;
        let prev_t = field.t;
        field.t += dt;
        if !field.is_finite() {
            let mut last_good = field.clone();
            last_good.t = prev_t;
            last_good.values = backup.clone();
            return Err(SolverError::Diverged { t: field.t, last_good: Box::new(last_good) });
        }
        let sup = field.sup_abs();
        series.push(SeriesSample { t: field.t, sup_u: sup, r_argmax: field.refined_argmax() });
        if sup.ln() >= last_snap_log + cfg.snapshot_dlog {
            snapshots.push(Snapshot { t: field.t, values: field.values.clone() });
            last_snap_log = sup.ln();
        }
        observe(&field);
    };

    if snapshots.last().map(|s| s.t) != Some(field.t) {
        snapshots.push(Snapshot { t: field.t, values: field.values.clone() });
    }
    let (t_est, r_blow) = if stop_reason == StopReason::ThresholdHit {
        let last = series[series.len() - 1];
        let t_est = estimate_t(&series, p)
            .unwrap_or_else(|_| last.t + 1.0 / ((p - 1.0) * last.sup_u.powf(p - 1.0)));
        (Some(t_est), Some(threshold_argmax(&series, m_eff)))
    } else {
        (None, None)
    };
    Ok(BlowupRun {
        report: BlowupReport { t_est, r_blow, stop_reason, step_count: steps, m_effective: m_eff, series },
        snapshots,
        final_field: field,
    })
}

/// Argmax radius interpolated (in `log sup`) to the instant the threshold was hit.
fn threshold_argmax(series: &[SeriesSample], m: f64) -> f64 {
    let n = series.len();
    if n < 2 {
        return series[n - 1].r_argmax;
    }
    let (a, b) = (series[n - 2], series[n - 1]);
    if !(b.sup_u > a.sup_u) || a.sup_u <= 0.0 {
        return b.r_argmax;
    }
    let w = ((m.ln() - a.sup_u.ln()) / (b.sup_u.ln() - a.sup_u.ln())).clamp(0.0, 1.0);
    a.r_argmax + w * (b.r_argmax - a.r_argmax)
}

/// Least-squares fit of `sup|u|^{−(p−1)}` against `t` over the last decade
/// of growth; returns the zero crossing.
pub fn estimate_t(series: &[SeriesSample], p: f64) -> Result<f64, FitError> {
    if series.len() < 5 {
        return Err(FitError::Unreliable("fewer than five samples"));
    }
    let last = series[series.len() - 1];
    let first_sup = series.iter().map(|s| s.sup_u).fold(f64::INFINITY, f64::min);
    if !(last.sup_u >= 10.0 * first_sup) || first_sup <= 0.0 {
        return Err(FitError::Unreliable("less than one decade of growth"));
    }
    let start = series
        .iter()
        .rposition(|s| s.sup_u < last.sup_u / 10.0)
        .map(|i| i + 1)
        .unwrap_or(0);
    let tail = &series[start..];
    if tail.len() < 5 {
        return Err(FitError::Unreliable("fewer than five samples in the last decade"));
    }
    if tail.windows(2).any(|w| !(w[1].sup_u > w[0].sup_u) || !(w[1].t > w[0].t)) {
        return Err(FitError::Unreliable("non-monotone tail"));
    }
    let t0 = tail[0].t;
    let n = tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|s| s.t - t0).collect();
    let ys: Vec<f64> = tail.iter().map(|s| s.sup_u.powf(-(p - 1.0))).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(FitError::Unreliable("degenerate time samples"));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(FitError::Unreliable("non-decreasing inverse power"));
    }
    let intercept = my - slope * mx;
    let t_est = t0 + (-intercept / slope);
    if !(t_est > last.t) {
        return Err(FitError::Unreliable("intercept before the last sample"));
    }
    Ok(t_est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> ModelParams<f64> {
        ModelParams::new(3.0, 2).unwrap()
    }

    fn flat_exact(t: f64) -> f64 {
        (2.0 * (0.5 - t)).powf(-0.5)
    }

    #[test]
    fn constant_field_follows_ode() {
        let grid = Arc::new(RadialGrid::uniform(4.0, 80).unwrap());
        let f = RadialField::from_fn(grid, model(), 0.0, |_| 1.0);
        let mut errs = Vec::new();
        for dt in [1e-2, 5e-3] {
            let next = step(&f, dt, OuterBoundary::Neumann).unwrap();
            let spread = next.values.iter().fold(0.0f64, |m, v| m.max((v - next.values[0]).abs()));
            assert!(spread < 1e-13, "constant data must stay flat");
            errs.push((next.values[0] - flat_exact(dt)).abs());
        }
        // local error of a second-order method: O(dt³)
        let ratio = errs[0] / errs[1];
        assert!(ratio > 6.0 && ratio < 10.0, "ratio {ratio}");
    }

    #[test]
    fn zero_is_fixed_point() {
        let grid = Arc::new(RadialGrid::uniform(4.0, 40).unwrap());
        let f = RadialField::from_fn(grid, model(), 0.0, |_| 0.0);
        let next = step(&f, 0.1, OuterBoundary::Dirichlet).unwrap();
        assert!(next.values.iter().all(|v| *v == 0.0));
        assert!(step(&f, 0.0, OuterBoundary::Dirichlet).is_err());
        assert!(step(&f, f64::NAN, OuterBoundary::Dirichlet).is_err());
    }

    #[test]
    fn diverging_step_reports_last_good_state() {
        let grid = Arc::new(RadialGrid::uniform(4.0, 40).unwrap());
        let f = RadialField::from_fn(grid, model(), 0.0, |_| 1e200);
        match step(&f, 1.0, OuterBoundary::Neumann) {
            Err(SolverError::Diverged { last_good, .. }) => assert_eq!(last_good.values, f.values),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn laplacian_of_radial_quadratic() {
        // Δ r² = 2d in any dimension, including the origin row.
        let grid = RadialGrid::graded(crate::grid::GridSpec {
            core_spacing: 1e-3,
            core_halfwidth: 0.01,
            growth: 1.05,
            max_spacing: 0.05,
            r_out: 3.0,
        })
        .unwrap();
        for d in [2u32, 3] {
            let op = RadialOperator::new(&grid, d, OuterBoundary::Neumann);
            let u: Vec<f64> = (0..grid.len()).map(|i| grid.r(i).powi(2)).collect();
            let mut out = vec![0.0; u.len()];
            op.apply(&u, &mut out);
            for (i, v) in out.iter().enumerate().take(grid.len() - 1) {
                assert_relative_eq!(*v, 2.0 * d as f64, epsilon = 1e-8, max_relative = 1e-8);
                let _ = i;
            }
        }
    }

    #[test]
    fn heat_kernel_decay_one_dimensional_check() {
        // Linear heat equation, d = 2 radial: a Gaussian exp(-r²/(4τ))/τ
        // evolves to the same form with τ + t. Compare against the exact
        // solution with the nonlinearity switched off (p → large odd power
        // on tiny data keeps the reaction term negligible).
        let grid = Arc::new(RadialGrid::uniform(4.0, 2000).unwrap());
        let m = ModelParams::new(3.0, 2).unwrap();
        let tau0 = 0.05;
        let amp = 1e-6;
        let exact = |r: f64, t: f64| amp * tau0 / (tau0 + t) * (-r * r / (4.0 * (tau0 + t))).exp();
        let mut f = RadialField::from_fn(grid.clone(), m, 0.0, |r| exact(r, 0.0));
        let mut stepper = Stepper::new(&grid, &m, OuterBoundary::Dirichlet);
        let dt = 1e-4;
        for _ in 0..500 {
            stepper.advance(&mut f.values, dt, 1.0, 0.0);
            f.t += dt;
        }
        let err = (0..grid.len()).fold(0.0f64, |e, i| e.max((f.values[i] - exact(grid.r(i), f.t)).abs()));
        assert!(err / amp < 1e-4, "relative error {}", err / amp);
        assert!(f.sup_abs() < amp * 0.55);
    }

    #[test]
    fn estimate_t_on_exact_samples() {
        let series: Vec<SeriesSample> = (0..400)
            .map(|k| {
                let t = 0.5 - 0.5 * (-(k as f64) * 0.05).exp();
                SeriesSample { t, sup_u: flat_exact(t), r_argmax: 1.0 }
            })
            .collect();
        let t = estimate_t(&series, 3.0).unwrap();
        assert_relative_eq!(t, 0.5, epsilon = 1e-12);
        assert!(estimate_t(&series[..2], 3.0).is_err());
    }

    #[test]
    fn estimate_t_with_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let series: Vec<SeriesSample> = (0..400)
            .map(|k| {
                let t = 0.5 - 0.5 * (-(k as f64) * 0.05).exp();
                let noise = 1.0 + 1e-6 * (2.0 * rng.gen::<f64>() - 1.0);
                SeriesSample { t, sup_u: flat_exact(t) * noise, r_argmax: 1.0 }
            })
            .collect();
        let t = estimate_t(&series, 3.0).unwrap();
        assert!((t - 0.5).abs() < 1e-4, "t_est {t}");
    }

    #[test]
    fn estimate_t_rejects_non_monotone_tail() {
        let mut series: Vec<SeriesSample> = (0..50)
            .map(|k| {
                let t = 0.5 - 0.5 * (-(k as f64) * 0.1).exp();
                SeriesSample { t, sup_u: flat_exact(t), r_argmax: 1.0 }
            })
            .collect();
        let n = series.len();
        series[n - 3].sup_u *= 1.5;
        assert!(matches!(estimate_t(&series, 3.0), Err(FitError::Unreliable(_))));
    }

    #[test]
    fn zero_data_does_not_blow_up() {
        let grid = Arc::new(RadialGrid::uniform(4.0, 40).unwrap());
        let f = RadialField::from_fn(grid, model(), 0.0, |_| 0.0);
        let run = run_until_blowup(&f, &SolverConfig::default()).unwrap();
        assert_eq!(run.report.stop_reason, StopReason::NoBlowup);
        assert!(run.report.t_est.is_none());
    }

    #[test]
    fn ring_count_and_argmax() {
        let grid = Arc::new(RadialGrid::uniform(4.0, 4000).unwrap());
        let one = RadialField::from_fn(grid.clone(), model(), 0.0, |r| (-(r - 1.2345).powi(2) / 0.01).exp());
        assert_eq!(one.ring_count(), 1);
        assert!((one.refined_argmax() - 1.2345).abs() < 1e-5);
        let two = RadialField::from_fn(grid, model(), 0.0, |r| {
            (-(r - 1.0).powi(2) / 0.01).exp() + 0.9 * (-(r - 2.0).powi(2) / 0.01).exp()
        });
        assert_eq!(two.ring_count(), 2);
    }
}
