//! Two-parameter shooting on the initial data `(d₀, d₁)`.
//!
//! Each shot integrates in the physical frame with steps of fixed length in
//! `s = −log(T−t)` for the prescribed `T`, decomposes the residual at a fixed
//! cadence and stops at the first exit from `V_A(s)`. The exit map `Φ` is
//! then searched for a trapped trajectory by degree-guided bisection.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{chi, chi0, to_selfsimilar_tau, CutoffParams, SelfSimilarFrame};
use crate::grid::RadialGrid;
use crate::hermite::{GaussMeasureQuad, HermiteError, ModeDecomposition};
use crate::model::{ModelParams, Profile};
use crate::shrink::{detect_exit, Bound, ExitEvent, ModeSample, ShrinkError, ShrinkSetParams};
use crate::solver::{
    estimate_t, OuterBoundary, RadialField, SeriesSample, SolverConfig, SolverError, Stepper,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootError {
    #[error("shooting parameters ({d0}, {d1}) outside [-2, 2]^2")]
    OutOfRange { d0: f64, d1: f64 },
    #[error("epsilon0 = {eps0} and T = {t_blow} are inconsistent: {reason}")]
    Inconsistent { eps0: f64, t_blow: f64, reason: &'static str },
    #[error("shrinking-set parameters: {0}")]
    Shrink(#[from] ShrinkError),
    #[error("quadrature: {0}")]
    Hermite(#[from] HermiteError),
    #[error("initial-data map (d0, d1) -> (q0, q1) is singular")]
    SingularMap,
    #[error("exit map vanishes at boundary sample {0}; resample")]
    Degenerate(usize),
    #[error("a boundary shot survived; the degree is undefined on this loop")]
    BoundarySurvivor,
    #[error("at least 8 boundary samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("invalid shooting option {name} = {value}")]
    Option { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataParams {
    pub d0: f64,
    pub d1: f64,
    /// Prescribed blow-up time `T`.
    pub t_blow: f64,
    pub shrink: ShrinkSetParams,
}

impl InitialDataParams {
    /// Sets `shrink.s0 = −log T`.
    pub fn new(d0: f64, d1: f64, t_blow: f64, shrink: ShrinkSetParams) -> Result<Self, ShootError> {
        let p = Self { d0, d1, t_blow, shrink: ShrinkSetParams { s0: -t_blow.ln(), ..shrink } };
        p.validate()?;
        Ok(p)
    }

    pub fn s0(&self) -> f64 {
        self.shrink.s0
    }

    pub fn validate(&self) -> Result<(), ShootError> {
        if !(self.d0.abs() <= 2.0 && self.d1.abs() <= 2.0) {
            return Err(ShootError::OutOfRange { d0: self.d0, d1: self.d1 });
        }
        self.shrink.validate()?;
        check_consistency(&self.shrink, self.t_blow)
    }
}

/// The sampled window `|y| ≤ 6K√s₀` must stay where the initial data equals
/// `φ` exactly, i.e. beyond `r = 3ε₀/2`.
pub fn check_consistency(shrink: &ShrinkSetParams, t_blow: f64) -> Result<(), ShootError> {
    let err = |reason| ShootError::Inconsistent { eps0: shrink.eps0, t_blow, reason };
    if !(t_blow > 0.0 && t_blow < 1.0) {
        return Err(err("T must lie in (0, 1)"));
    }
    let s0 = -t_blow.ln();
    if s0 < std::f64::consts::E {
        return Err(err("s0 = -log T is below e"));
    }
    let inner = 1.0 - 6.0 * shrink.k * s0.sqrt() * (-s0 / 2.0).exp();
    if inner < 1.5 * shrink.eps0 {
        return Err(err("the sampled window |y| <= 6K sqrt(s0) reaches the regular region"));
    }
    Ok(())
}

/// `u₀(r) = T^{−1/(p−1)} [φ(y,s₀)χ(r/(6ε₀)) + (A/s₀²)(d₀ + d₁y)χ₀(|y|/(K√s₀))]`.
///
/// The first cut-off vanishes for `r ≤ 3ε₀/4`, so the data is zero on the
/// whole regular region; the second keeps the perturbation inside the
/// plateau of `χ_c`, so that `q_e(·, s₀) = 0`.
pub fn build_initial_data(
    p: &InitialDataParams,
    grid: &Arc<RadialGrid>,
    model: &ModelParams<f64>,
) -> Result<RadialField, ShootError> {
    p.validate()?;
    let profile = Profile::new(*model);
    let s0 = p.s0();
    let sh = &p.shrink;
    let amp = p.t_blow.powf(-1.0 / (model.p - 1.0));
    let inv_sqrt_t = (s0 / 2.0).exp();
    let pert = sh.a / (s0 * s0);
    let field = RadialField::from_fn(grid.clone(), *model, 0.0, |r| {
        let y = (r - 1.0) * inv_sqrt_t;
        let base = profile.phi_unchecked(y, s0) * chi(r / (6.0 * sh.eps0));
        let bump = pert * (p.d0 + p.d1 * y) * chi0(y.abs() / (sh.k * s0.sqrt()));
        amp * (base + bump)
    });
    let plateau = sh.eps0 / 8.0;
    if (0..grid.len()).take_while(|&i| grid.r(i) <= plateau).any(|i| field.values[i] != 0.0) {
        return Err(ShootError::Inconsistent {
            eps0: sh.eps0,
            t_blow: p.t_blow,
            reason: "initial data nonzero on |x| <= eps0/8",
        });
    }
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootConfig {
    /// Integration step in `s`.
    pub ds_step: f64,
    /// Membership sampling cadence in `s` (a multiple of `ds_step`).
    pub ds_sample: f64,
    /// `s_max = s₀ + horizon`, lowered by the resolution guard.
    pub horizon: f64,
    pub quad_order: usize,
    pub outer_bc: OuterBoundary,
    /// Snapshot cadence in `s` for recorded shots.
    pub snapshot_ds: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            ds_step: 0.025,
            ds_sample: 0.05,
            horizon: 25.0,
            quad_order: crate::hermite::DEFAULT_QUAD_ORDER,
            outer_bc: OuterBoundary::Dirichlet,
            snapshot_ds: 0.25,
        }
    }
}

impl ShootConfig {
    pub fn validate(&self) -> Result<(), ShootError> {
        let ratio = self.ds_sample / self.ds_step;
        let checks = [
            ("ds_step", self.ds_step, self.ds_step > 0.0 && self.ds_step <= 0.5),
            ("ds_sample", self.ds_sample, ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9),
            ("horizon", self.horizon, self.horizon > 0.0),
            ("quad_order", self.quad_order as f64, self.quad_order >= 8),
            ("snapshot_ds", self.snapshot_ds, self.snapshot_ds > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(ShootError::Option { name, value });
            }
        }
        Ok(())
    }

    fn steps_per_sample(&self) -> usize {
        (self.ds_sample / self.ds_step).round() as usize
    }
}

/// Affine map `d ↦ (q₀, q₁)(s₀) = c + M d` and its inverse on `[−1,1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtMap {
    pub offset: [f64; 2],
    pub matrix: [[f64; 2]; 2],
    /// `A/s₀²`.
    pub scale: f64,
}

impl DtMap {
    pub fn forward(&self, d: [f64; 2]) -> [f64; 2] {
        let m = &self.matrix;
        [
            self.offset[0] + m[0][0] * d[0] + m[0][1] * d[1],
            self.offset[1] + m[1][0] * d[0] + m[1][1] * d[1],
        ]
    }

    /// `(α, β) ∈ [−1,1]² ↦ d` with `(q₀, q₁)(s₀) = (A/s₀²)(α, β)`.
    pub fn to_d(&self, ab: [f64; 2]) -> [f64; 2] {
        let m = &self.matrix;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let t = [self.scale * ab[0] - self.offset[0], self.scale * ab[1] - self.offset[1]];
        [(m[1][1] * t[0] - m[0][1] * t[1]) / det, (-m[1][0] * t[0] + m[0][0] * t[1]) / det]
    }
}

/// Everything a shot needs besides `(d₀, d₁)`; shared read-only by workers.
#[derive(Debug, Clone)]
pub struct ShootContext {
    pub model: ModelParams<f64>,
    pub profile: Profile<f64>,
    pub shrink: ShrinkSetParams,
    pub t_blow: f64,
    pub grid: Arc<RadialGrid>,
    pub quad: GaussMeasureQuad,
    pub cfg: ShootConfig,
    pub cutp: CutoffParams<f64>,
    pub dmap: DtMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShotResult {
    Survived { s_max: f64 },
    Exited(ExitEvent),
    /// First violated bound was not `q₀`/`q₁`.
    BootstrapViolation { s: f64, bound: Bound, q01: [f64; 2] },
    /// `sup|W| < κ/4`: the solution is not blowing up at `T`.
    NoBlowup { s: f64, q01: [f64; 2] },
    Diverged { s: f64 },
}

impl ShotResult {
    pub fn label(&self) -> &'static str {
        match self {
            ShotResult::Survived { .. } => "survived",
            ShotResult::Exited(_) => "exited",
            ShotResult::BootstrapViolation { .. } => "bootstrap_violation",
            ShotResult::NoBlowup { .. } => "no_blowup",
            ShotResult::Diverged { .. } => "diverged",
        }
    }

    /// Self-similar time at which the shot ended.
    pub fn s_end(&self) -> f64 {
        match *self {
            ShotResult::Survived { s_max } => s_max,
            ShotResult::Exited(e) => e.s_exit,
            ShotResult::BootstrapViolation { s, .. } | ShotResult::NoBlowup { s, .. } | ShotResult::Diverged { s } => s,
        }
    }

    /// `Φ = (s²/A)(q₀, q₁)` at the end of the shot; `None` for survivors.
    pub fn exit_map(&self, a: f64) -> Option<[f64; 2]> {
        match *self {
            ShotResult::Exited(e) => Some(e.exit_map(a)),
            ShotResult::BootstrapViolation { s, q01, .. } | ShotResult::NoBlowup { s, q01 } => {
                Some([s * s / a * q01[0], s * s / a * q01[1]])
            }
            ShotResult::Survived { .. } | ShotResult::Diverged { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub s: f64,
    pub tau: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ShootOutcome {
    pub params: InitialDataParams,
    pub result: ShotResult,
    pub t_est: Option<f64>,
    pub r_blow: Option<f64>,
    /// Mode samples at every membership check (recorded shots only).
    pub modes: Vec<ModeSample>,
    /// `(t, sup|u|, argmax)` after every step (recorded shots only).
    pub sup_series: Vec<SeriesSample>,
    pub snapshots: Vec<RunSnapshot>,
    /// `(s, sup|W|)` after every step (recorded shots only).
    pub w_sup: Vec<[f64; 2]>,
    /// Smallest value of `u` seen, for the positivity check.
    pub min_u: f64,
}

/// One line of the shooting JSONL output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub alpha: f64,
    pub beta: f64,
    pub d0: f64,
    pub d1: f64,
    pub result: String,
    pub s_exit: f64,
    pub mode: Option<u8>,
    pub omega: Option<i8>,
    pub phi: Option<[f64; 2]>,
    #[serde(rename = "T_est")]
    pub t_est: Option<f64>,
    pub r_blow: Option<f64>,
}

impl ShootContext {
    pub fn new(
        model: ModelParams<f64>,
        shrink: ShrinkSetParams,
        t_blow: f64,
        grid: Arc<RadialGrid>,
        cfg: ShootConfig,
    ) -> Result<Self, ShootError> {
        cfg.validate()?;
        let shrink = ShrinkSetParams { s0: -t_blow.ln(), ..shrink };
        shrink.validate()?;
        check_consistency(&shrink, t_blow)?;
        let cutp = CutoffParams { eps0: shrink.eps0, k: shrink.k };
        let mut ctx = Self {
            model,
            profile: Profile::new(model),
            shrink,
            t_blow,
            grid,
            quad: GaussMeasureQuad::new(cfg.quad_order)?,
            cfg,
            cutp,
            dmap: DtMap { offset: [0.0; 2], matrix: [[1.0, 0.0], [0.0, 1.0]], scale: shrink.a / (shrink.s0 * shrink.s0) },
        };
        let c = ctx.initial_modes(0.0, 0.0)?;
        let e0 = ctx.initial_modes(1.0, 0.0)?;
        let e1 = ctx.initial_modes(0.0, 1.0)?;
        let matrix = [[e0[0] - c[0], e1[0] - c[0]], [e0[1] - c[1], e1[1] - c[1]]];
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if !(det.abs() > 1e-300) {
            return Err(ShootError::SingularMap);
        }
        ctx.dmap = DtMap { offset: c, matrix, scale: ctx.dmap.scale };
        Ok(ctx)
    }

    pub fn s0(&self) -> f64 {
        self.shrink.s0
    }

    /// `sup|u|` threshold of the resolution guard expressed in `s`.
    pub fn s_guard(&self) -> f64 {
        let h = self.grid.ring_spacing();
        -(16.0 * h * h).ln()
    }

    pub fn s_max(&self) -> f64 {
        (self.s0() + self.cfg.horizon).min(self.s_guard())
    }

    pub fn params(&self, d0: f64, d1: f64) -> InitialDataParams {
        InitialDataParams { d0, d1, t_blow: self.t_blow, shrink: self.shrink }
    }

    /// `(q₀, q₁)(s₀)` of the initial data built from `(d₀, d₁)`.
    pub fn initial_modes(&self, d0: f64, d1: f64) -> Result<[f64; 2], ShootError> {
        let u0 = build_initial_data(&self.params(d0, d1), &self.grid, &self.model)?;
        let d = self.decompose(&u0, self.t_blow)?;
        Ok([d.q0, d.q1])
    }

    /// Residual decomposition of `field` with remaining time `tau`.
    pub fn decompose(&self, field: &RadialField, tau: f64) -> Result<ModeDecomposition, ShootError> {
        let frame = to_selfsimilar_tau(field, self.t_blow, tau).map_err(|_| ShootError::Option { name: "tau", value: tau })?;
        Ok(self.decompose_frame(&frame))
    }

    pub fn decompose_frame(&self, frame: &SelfSimilarFrame) -> ModeDecomposition {
        let s = frame.s;
        let profile = &self.profile;
        let q_at = |y: f64| frame.q_at(y, &self.cutp, profile).unwrap_or(0.0);
        let values: Vec<f64> = self.quad.nodes().iter().map(|&y| q_at(y)).collect();
        let coeffs = self.quad.project_sampled(&values);
        let ymax = 6.0 * self.shrink.k * s.sqrt();
        let mut ys = Vec::new();
        let mut qs = Vec::new();
        for i in 0..frame.y.len() {
            let y = frame.y[i];
            if y.abs() <= ymax {
                ys.push(y);
                qs.push(frame.w[i] * chi(frame.grid.r(i) / self.cutp.eps0) - profile.phi_unchecked(y, s));
            }
        }
        ModeDecomposition::from_parts(coeffs, ys, qs, s, self.shrink.k)
    }

    pub fn shoot(&self, d0: f64, d1: f64) -> Result<ShootOutcome, ShootError> {
        self.shoot_with(self.params(d0, d1), false)
    }

    /// Runs one shot; `record` keeps mode series, the sup series and snapshots.
    pub fn shoot_with(&self, params: InitialDataParams, record: bool) -> Result<ShootOutcome, ShootError> {
        let mut field = build_initial_data(&params, &self.grid, &self.model)?;
        let s0 = self.s0();
        let s_max = self.s_max();
        let kappa = self.profile.kappa();
        let mut stepper = Stepper::new(&self.grid, &self.model, self.cfg.outer_bc);
        let per_sample = self.cfg.steps_per_sample();
        let regular_radius = self.shrink.regular_radius();
        let mut min_u = field.values.iter().copied().fold(f64::INFINITY, f64::min);

        let mut modes = Vec::new();
        let mut sup_series = Vec::new();
        let mut snapshots = Vec::new();
        let mut w_sup = Vec::new();
        let inv_pm1 = 1.0 / (self.model.p - 1.0);
        let mut next_snapshot = s0;
        let mut tau = self.t_blow;
        let mut s = s0;

        let sample = |field: &RadialField, tau: f64| -> Result<(ModeSample, f64), ShootError> {
            let frame = to_selfsimilar_tau(field, self.t_blow, tau)
                .map_err(|_| ShootError::Option { name: "tau", value: tau })?;
            let d = self.decompose_frame(&frame);
            Ok((ModeSample::new(&d, field.sup_within(regular_radius)), frame.sup_w()))
        };

        let (first, _) = sample(&field, tau)?;
        let mut prev = first;
        if record {
            modes.push(first);
            sup_series.push(SeriesSample { t: field.t, sup_u: field.sup_abs(), r_argmax: field.refined_argmax() });
            snapshots.push(RunSnapshot { s, tau, t: field.t, values: field.values.clone() });
            w_sup.push([s, field.sup_abs() * tau.powf(inv_pm1)]);
            next_snapshot += self.cfg.snapshot_ds;
        }
        let classify = |prev: &ModeSample, cur: &ModeSample, sup_w: f64| -> Option<ShotResult> {
            let report = cur.membership(&self.shrink);
            if report.in_set {
                return None;
            }
            if sup_w < 0.25 * kappa {
                return Some(ShotResult::NoBlowup { s: cur.s, q01: [cur.q0, cur.q1] });
            }
            let pair = if prev.s < cur.s { vec![*prev, *cur] } else { vec![*cur] };
            Some(match detect_exit(&pair, &self.shrink) {
                Ok(Some(e)) => ShotResult::Exited(e),
                Ok(None) => return None,
                Err(ShrinkError::BootstrapViolation { s, bound }) => {
                    ShotResult::BootstrapViolation { s, bound, q01: [cur.q0, cur.q1] }
                }
                Err(_) => ShotResult::Diverged { s: cur.s },
            })
        };
        let mut result = classify(&prev, &prev, first.q0.abs().max(kappa));

        let mut n = 0usize;
        while result.is_none() {
            let s_next = s0 + self.cfg.ds_step * (n + 1) as f64;
            let tau_next = (-s_next).exp();
            let dt = tau - tau_next;
            stepper.advance(&mut field.values, dt, 1.0, 0.0);
            field.t += dt;
            tau = tau_next;
            s = s_next;
            n += 1;
            if !field.is_finite() {
                result = Some(ShotResult::Diverged { s });
                break;
            }
            min_u = field.values.iter().copied().fold(min_u, f64::min);
            if record {
                sup_series.push(SeriesSample { t: field.t, sup_u: field.sup_abs(), r_argmax: field.refined_argmax() });
                w_sup.push([s, field.sup_abs() * tau.powf(inv_pm1)]);
                if s >= next_snapshot - 1e-9 {
                    snapshots.push(RunSnapshot { s, tau, t: field.t, values: field.values.clone() });
                    next_snapshot += self.cfg.snapshot_ds;
                }
            }
            let at_end = s >= s_max - 1e-9;
            if n.is_multiple_of(per_sample) || at_end {
                let (cur, sup_w) = sample(&field, tau)?;
                if record {
                    modes.push(cur);
                }
                result = classify(&prev, &cur, sup_w);
                prev = cur;
            }
            if result.is_none() && at_end {
                result = Some(ShotResult::Survived { s_max: s });
            }
        }
        let result = result.unwrap_or(ShotResult::Diverged { s });
        let (t_est, r_blow) = if matches!(result, ShotResult::Survived { .. }) {
            let t_est = if record { estimate_t(&sup_series, self.model.p).ok() } else { None };
            (t_est.or(Some(self.t_blow)), Some(field.refined_argmax()))
        } else {
            (None, None)
        };
        if record && snapshots.last().map(|x| x.s) != Some(s) {
            snapshots.push(RunSnapshot { s, tau, t: field.t, values: field.values.clone() });
        }
        Ok(ShootOutcome { params, result, t_est, r_blow, modes, sup_series, snapshots, w_sup, min_u })
    }

    pub fn record(&self, alpha: f64, beta: f64, outcome: &ShootOutcome) -> ShotRecord {
        let (mode, omega) = match outcome.result {
            ShotResult::Exited(e) => (Some(e.mode), Some(e.omega)),
            _ => (None, None),
        };
        ShotRecord {
            alpha,
            beta,
            d0: outcome.params.d0,
            d1: outcome.params.d1,
            result: outcome.result.label().to_string(),
            s_exit: outcome.result.s_end(),
            mode,
            omega,
            phi: outcome.result.exit_map(self.shrink.a),
            t_est: outcome.t_est,
            r_blow: outcome.r_blow,
        }
    }
}

/// Summary of a shot as seen by the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotSummary {
    pub phi: Option<[f64; 2]>,
    pub s_end: f64,
    pub survived: bool,
}

/// Evaluates the exit map at `(α, β) ∈ [−1,1]²`.
pub trait ShotOracle: Sync {
    fn eval(&self, alpha: f64, beta: f64) -> ShotSummary;
}

/// The real oracle: `(α, β)` mapped through `D_T` and shot.
pub struct SimulationOracle<'a> {
    pub ctx: &'a ShootContext,
    pub records: std::sync::Mutex<BTreeMap<[u64; 2], ShotRecord>>,
}

impl<'a> SimulationOracle<'a> {
    pub fn new(ctx: &'a ShootContext) -> Self {
        Self { ctx, records: std::sync::Mutex::new(BTreeMap::new()) }
    }

    /// Shot records sorted by `(d₀, d₁)`.
    pub fn frontier(&self) -> Vec<ShotRecord> {
        let mut v: Vec<ShotRecord> = self.records.lock().map(|m| m.values().cloned().collect()).unwrap_or_default();
        v.sort_by(|a, b| a.d0.total_cmp(&b.d0).then(a.d1.total_cmp(&b.d1)));
        v
    }
}

impl ShotOracle for SimulationOracle<'_> {
    fn eval(&self, alpha: f64, beta: f64) -> ShotSummary {
        let [d0, d1] = self.ctx.dmap.to_d([alpha, beta]);
        match self.ctx.shoot(d0, d1) {
            Ok(out) => {
                let rec = self.ctx.record(alpha, beta, &out);
                if let Ok(mut m) = self.records.lock() {
                    m.insert(key(alpha, beta), rec);
                }
                ShotSummary {
                    phi: out.result.exit_map(self.ctx.shrink.a),
                    s_end: out.result.s_end(),
                    survived: matches!(out.result, ShotResult::Survived { .. }),
                }
            }
            Err(_) => ShotSummary { phi: None, s_end: f64::NEG_INFINITY, survived: false },
        }
    }
}

fn key(a: f64, b: f64) -> [u64; 2] {
    [a.to_bits(), b.to_bits()]
}

/// Winding number of a closed polygon around the origin.
pub fn winding_number(points: &[[f64; 2]]) -> Option<i32> {
    if points.len() < 3 || points.iter().any(|p| p[0] == 0.0 && p[1] == 0.0) {
        return None;
    }
    let mut total = 0.0;
    for i in 0..points.len() {
        let a = points[i];
        let b = points[(i + 1) % points.len()];
        total += wrapped_angle(a, b);
    }
    Some((total / std::f64::consts::TAU).round() as i32)
}

fn wrapped_angle(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = b[1].atan2(b[0]) - a[1].atan2(a[0]);
    let tau = std::f64::consts::TAU;
    let mut d = d % tau;
    if d > std::f64::consts::PI {
        d -= tau;
    } else if d <= -std::f64::consts::PI {
        d += tau;
    }
    d
}

/// `n` points evenly spaced (by arc length) on the boundary of `[lo, hi]`,
/// counter-clockwise from the corner `lo`.
pub fn square_loop(lo: [f64; 2], hi: [f64; 2], n: usize) -> Vec<[f64; 2]> {
    let w = hi[0] - lo[0];
    let h = hi[1] - lo[1];
    let per = 2.0 * (w + h);
    (0..n)
        .map(|k| {
            let mut t = per * k as f64 / n as f64;
            if t < w {
                return [lo[0] + t, lo[1]];
            }
            t -= w;
            if t < h {
                return [hi[0], lo[1] + t];
            }
            t -= h;
            if t < w {
                return [hi[0] - t, hi[1]];
            }
            t -= w;
            [lo[0], hi[1] - t]
        })
        .collect()
}

/// Evaluates `points` in parallel, reusing and extending `cache`.
fn eval_batch(
    oracle: &dyn ShotOracle,
    cache: &mut BTreeMap<[u64; 2], ShotSummary>,
    order: &mut Vec<[u64; 2]>,
    points: &[[f64; 2]],
) -> usize {
    let mut todo: Vec<[f64; 2]> = Vec::new();
    for p in points {
        let k = key(p[0], p[1]);
        if !cache.contains_key(&k) && !todo.iter().any(|q| key(q[0], q[1]) == k) {
            todo.push(*p);
        }
    }
    let results: Vec<ShotSummary> = todo.par_iter().map(|p| oracle.eval(p[0], p[1])).collect();
    for (p, r) in todo.iter().zip(results) {
        let k = key(p[0], p[1]);
        cache.insert(k, r);
        order.push(k);
    }
    todo.len()
}

/// Winding number of `Φ` over `n_samples` points on `∂D_T`.
pub fn boundary_degree_check(oracle: &dyn ShotOracle, n_samples: usize) -> Result<i32, ShootError> {
    if n_samples < 8 {
        return Err(ShootError::TooFewSamples(n_samples));
    }
    let pts = square_loop([-1.0, -1.0], [1.0, 1.0], n_samples);
    let vals: Vec<ShotSummary> = pts.par_iter().map(|p| oracle.eval(p[0], p[1])).collect();
    let mut phis = Vec::with_capacity(vals.len());
    for (i, v) in vals.iter().enumerate() {
        match v.phi {
            Some(p) if p[0] != 0.0 || p[1] != 0.0 => phis.push(p),
            Some(_) => return Err(ShootError::Degenerate(i)),
            None if v.survived => return Err(ShootError::BoundarySurvivor),
            None => return Err(ShootError::Degenerate(i)),
        }
    }
    winding_number(&phis).ok_or(ShootError::Degenerate(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Maximum number of shots.
    pub budget: usize,
    /// Maximum adaptive refinement passes per cell boundary.
    pub max_refine: usize,
    /// Smallest cell width in `(α, β)` units.
    pub min_width: f64,
    /// Boundary samples of the initial degree check.
    pub n_boundary: usize,
    /// Shots between checkpoints.
    pub checkpoint_every: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { budget: 1500, max_refine: 6, min_width: 1e-13, n_boundary: 16, checkpoint_every: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub winding: Option<i32>,
    /// Chosen by the maximal-exit-time fallback rather than the degree.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: [f64; 2],
    pub best_s: f64,
    pub survived: bool,
    /// `false` when the budget or the width limit ended the search first.
    pub complete: bool,
    pub initial_winding: Option<i32>,
    pub cells: Vec<CellRecord>,
    pub shots: usize,
}

/// Shot cache that can be persisted and restored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchCheckpoint {
    pub entries: Vec<([f64; 2], ShotSummary)>,
}

#[derive(Debug, Clone)]
struct Cell {
    lo: [f64; 2],
    hi: [f64; 2],
    /// Interior parameters of bottom, right, top and left edges (ascending).
    edges: [Vec<f64>; 4],
}

impl Cell {
    fn boundary(&self) -> Vec<([f64; 2], usize)> {
        let (lo, hi) = (self.lo, self.hi);
        let mut pts = vec![([lo[0], lo[1]], 0)];
        pts.extend(self.edges[0].iter().map(|&a| ([a, lo[1]], 0)));
        pts.push(([hi[0], lo[1]], 1));
        pts.extend(self.edges[1].iter().map(|&b| ([hi[0], b], 1)));
        pts.push(([hi[0], hi[1]], 2));
        pts.extend(self.edges[2].iter().rev().map(|&a| ([a, hi[1]], 2)));
        pts.push(([lo[0], hi[1]], 3));
        pts.extend(self.edges[3].iter().rev().map(|&b| ([lo[0], b], 3)));
        pts
    }

    fn insert(&mut self, edge: usize, v: f64) {
        let e = &mut self.edges[edge];
        let pos = e.partition_point(|&x| x < v);
        if pos < e.len() && e[pos] == v {
            return;
        }
        e.insert(pos, v);
    }

    fn width(&self) -> f64 {
        (self.hi[0] - self.lo[0]).max(self.hi[1] - self.lo[1])
    }

    fn split(&self, axis: usize) -> (Cell, Cell) {
        let m = 0.5 * (self.lo[axis] + self.hi[axis]);
        let other = 1 - axis;
        let q = |k: f64| self.lo[other] + k * (self.hi[other] - self.lo[other]) / 4.0;
        let mid: Vec<f64> = (1..4).map(|k| q(k as f64)).collect();
        let below = |v: &Vec<f64>| v.iter().copied().filter(|&x| x < m).collect::<Vec<_>>();
        let above = |v: &Vec<f64>| v.iter().copied().filter(|&x| x > m).collect::<Vec<_>>();
        let e = &self.edges;
        if axis == 0 {
            let lower = Cell {
                lo: self.lo,
                hi: [m, self.hi[1]],
                edges: [below(&e[0]), mid.clone(), below(&e[2]), e[3].clone()],
            };
            let upper = Cell { lo: [m, self.lo[1]], hi: self.hi, edges: [above(&e[0]), e[1].clone(), above(&e[2]), mid] };
            (lower, upper)
        } else {
            let lower = Cell {
                lo: self.lo,
                hi: [self.hi[0], m],
                edges: [e[0].clone(), below(&e[1]), mid.clone(), below(&e[3])],
            };
            let upper = Cell { lo: [self.lo[0], m], hi: self.hi, edges: [mid, above(&e[1]), e[2].clone(), above(&e[3])] };
            (lower, upper)
        }
    }
}

enum LoopOutcome {
    Winding(Option<i32>, f64),
    Survivor([f64; 2]),
}

struct Search<'a> {
    oracle: &'a dyn ShotOracle,
    cfg: SearchConfig,
    cache: BTreeMap<[u64; 2], ShotSummary>,
    order: Vec<[u64; 2]>,
    /// Points the search has asked for, restored or simulated; their count is
    /// the shot budget used, so a resumed search retraces the original.
    touched: BTreeSet<[u64; 2]>,
    shots: usize,
    since_checkpoint: usize,
    checkpoint: &'a mut dyn FnMut(&SearchCheckpoint),
}

impl Search<'_> {
    fn snapshot(&self) -> SearchCheckpoint {
        SearchCheckpoint {
            entries: self
                .order
                .iter()
                .map(|k| ([f64::from_bits(k[0]), f64::from_bits(k[1])], self.cache[k]))
                .collect(),
        }
    }

    fn eval(&mut self, pts: &[[f64; 2]]) {
        let n = eval_batch(self.oracle, &mut self.cache, &mut self.order, pts);
        self.touched.extend(pts.iter().map(|p| key(p[0], p[1])));
        self.shots = self.touched.len();
        self.since_checkpoint += n;
        if self.since_checkpoint >= self.cfg.checkpoint_every {
            self.since_checkpoint = 0;
            let snap = self.snapshot();
            (self.checkpoint)(&snap);
        }
    }

    fn get(&self, p: [f64; 2]) -> ShotSummary {
        self.cache[&key(p[0], p[1])]
    }

    /// Refines the cell boundary where `Φ` turns by more than π/2 between
    /// neighbours and returns its winding number and best exit time.
    fn loop_winding(&mut self, cell: &mut Cell) -> LoopOutcome {
        let min_seg = 1e-3 * cell.width();
        for pass in 0..=self.cfg.max_refine {
            let pts = cell.boundary();
            let coords: Vec<[f64; 2]> = pts.iter().map(|p| p.0).collect();
            self.eval(&coords);
            if let Some(p) = coords.iter().find(|p| self.get(**p).survived) {
                return LoopOutcome::Survivor(*p);
            }
            let best = coords.iter().map(|p| self.get(*p).s_end).fold(f64::NEG_INFINITY, f64::max);
            let phis: Vec<Option<[f64; 2]>> = coords.iter().map(|p| self.get(*p).phi).collect();
            if phis.iter().any(|p| p.is_none()) {
                return LoopOutcome::Winding(None, best);
            }
            let phis: Vec<[f64; 2]> = phis.into_iter().flatten().collect();
            let n = coords.len();
            let mut inserted = false;
            if pass < self.cfg.max_refine && self.shots < self.cfg.budget {
                for i in 0..n {
                    let j = (i + 1) % n;
                    if wrapped_angle(phis[i], phis[j]).abs() > std::f64::consts::FRAC_PI_2 {
                        let (a, b) = (coords[i], coords[j]);
                        let len = (a[0] - b[0]).abs() + (a[1] - b[1]).abs();
                        if len > min_seg {
                            let edge = pts[i].1;
                            let axis = edge % 2;
                            cell.insert(edge, 0.5 * (a[axis] + b[axis]));
                            inserted = true;
                        }
                    }
                }
            }
            if !inserted {
                return LoopOutcome::Winding(winding_number(&phis), best);
            }
        }
        LoopOutcome::Winding(None, f64::NEG_INFINITY)
    }
}

/// Degree-guided bisection over `D_T` in `(α, β)` coordinates.
///
/// Each step halves the current cell (the `α` direction twice as often as
/// `β`, matching the growth rates 1 and 1/2 of the two expanding modes) and
/// keeps the half whose boundary still carries nonzero winding; when the
/// windings do not single out one half, the half containing the longest
/// surviving shot is kept.
pub fn bisection_search(
    oracle: &dyn ShotOracle,
    cfg: SearchConfig,
    resume: Option<&SearchCheckpoint>,
    checkpoint: &mut dyn FnMut(&SearchCheckpoint),
) -> SearchResult {
    let mut search = Search {
        oracle,
        cfg,
        cache: BTreeMap::new(),
        order: Vec::new(),
        touched: BTreeSet::new(),
        shots: 0,
        since_checkpoint: 0,
        checkpoint,
    };
    if let Some(cp) = resume {
        for (p, s) in &cp.entries {
            let k = key(p[0], p[1]);
            if search.cache.insert(k, *s).is_none() {
                search.order.push(k);
            }
        }
    }
    let per_edge = cfg.n_boundary.max(4) / 4;
    let interior: Vec<f64> = (1..per_edge).map(|k| -1.0 + 2.0 * k as f64 / per_edge as f64).collect();
    let mut cell = Cell { lo: [-1.0, -1.0], hi: [1.0, 1.0], edges: [interior.clone(), interior.clone(), interior.clone(), interior] };
    let mut cells = Vec::new();
    let mut n_split = [0usize; 2];
    let mut complete = false;
    let mut survivor = None;

    let initial = match search.loop_winding(&mut cell) {
        LoopOutcome::Survivor(p) => {
            survivor = Some(p);
            None
        }
        LoopOutcome::Winding(w, _) => w,
    };
    cells.push(CellRecord { lo: cell.lo, hi: cell.hi, winding: initial, fallback: false });

    while survivor.is_none() {
        if search.shots >= cfg.budget || cell.width() < cfg.min_width {
            break;
        }
        let axis = if n_split[0] < 2 * n_split[1] + 2 { 0 } else { 1 };
        n_split[axis] += 1;
        let (mut a, mut b) = cell.split(axis);
        let wa = search.loop_winding(&mut a);
        let wb = search.loop_winding(&mut b);
        let (wa, ba, wb, bb) = match (wa, wb) {
            (LoopOutcome::Survivor(p), _) | (_, LoopOutcome::Survivor(p)) => {
                survivor = Some(p);
                break;
            }
            (LoopOutcome::Winding(wa, ba), LoopOutcome::Winding(wb, bb)) => (wa, ba, wb, bb),
        };
        let nz = |w: Option<i32>| matches!(w, Some(x) if x != 0);
        let (pick_a, fallback) = match (nz(wa), nz(wb)) {
            (true, false) => (true, false),
            (false, true) => (false, false),
            _ => (ba >= bb, true),
        };
        cell = if pick_a { a } else { b };
        cells.push(CellRecord { lo: cell.lo, hi: cell.hi, winding: if pick_a { wa } else { wb }, fallback });
    }
    if survivor.is_some() {
        complete = true;
    }
    let (best, best_s) = match survivor {
        Some(p) => (p, search.get(p).s_end),
        None => search
            .order
            .iter()
            .map(|k| ([f64::from_bits(k[0]), f64::from_bits(k[1])], search.cache[k].s_end))
            .fold(([0.0, 0.0], f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc }),
    };
    let snap = search.snapshot();
    (search.checkpoint)(&snap);
    SearchResult {
        best,
        best_s,
        survived: survivor.is_some(),
        complete,
        initial_winding: initial,
        cells,
        shots: search.shots,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub center: f64,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_est: Option<f64>,
    pub r_blow: Option<f64>,
    #[serde(rename = "dT")]
    pub dt: Option<f64>,
    pub dr: Option<f64>,
    pub ring_count: usize,
    pub status: String,
    pub min_u: f64,
}

/// `C^∞` bump of half-width `width` and height one centred at `c`.
pub fn bump(r: f64, c: f64, width: f64) -> f64 {
    let x = (r - c) / width;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Bump centres for `n_dirs` shapes: the three fixed radii first, then
/// seeded random centres in `[0.5, 1.5]`.
pub fn bump_centers(n_dirs: usize, seed: u64) -> Vec<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = [0.6, 1.0, 1.4].into_iter().take(n_dirs).collect();
    while v.len() < n_dirs {
        v.push(rng.gen_range(0.5..1.5));
    }
    v
}

/// Blow-up time and radius of `u₀ + δ T^{−1/(p−1)} bump_c` (half-width `width`) for each centre
/// and `δ`, against the unperturbed run.
pub fn stability_experiment(
    ctx: &ShootContext,
    base: &InitialDataParams,
    deltas: &[f64],
    centers: &[f64],
    width: f64,
    solver: &SolverConfig,
) -> Result<Vec<StabilityRow>, ShootError> {
    let u0 = build_initial_data(base, &ctx.grid, &ctx.model)?;
    let scale = base.t_blow.powf(-1.0 / (ctx.model.p - 1.0));
    let run = |field: &RadialField| -> (Option<f64>, Option<f64>, usize, String, f64) {
        let min0 = field.values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut min_u = min0;
        match crate::solver::run_until_blowup_observed(field, solver, |f| {
            min_u = f.values.iter().copied().fold(min_u, f64::min);
        }) {
            Ok(out) => {
                let status = match out.report.stop_reason {
                    crate::solver::StopReason::ThresholdHit => "blowup",
                    crate::solver::StopReason::MaxSteps => "max_steps",
                    crate::solver::StopReason::NoBlowup => "no_blowup",
                };
                (out.report.t_est, out.report.r_blow, out.final_field.ring_count(), status.to_string(), min_u)
            }
            Err(e) => (None, None, 0, format!("error: {e}"), min_u),
        }
    };
    let (t_ref, r_ref, rings_ref, status_ref, min_ref) = run(&u0);
    let mut jobs: Vec<(f64, f64)> = Vec::new();
    for &c in centers {
        for &d in deltas {
            if d != 0.0 {
                jobs.push((c, d));
            }
        }
    }
    let rows: Vec<StabilityRow> = jobs
        .par_iter()
        .map(|&(c, d)| {
            let mut f = u0.clone();
            for i in 0..f.values.len() {
                f.values[i] += d * scale * bump(f.grid.r(i), c, width);
            }
            let (t, r, rings, status, min_u) = run(&f);
            StabilityRow {
                center: c,
                delta: d,
                t_est: t,
                r_blow: r,
                dt: t.zip(t_ref).map(|(a, b)| (a - b).abs()),
                dr: r.zip(r_ref).map(|(a, b)| (a - b).abs()),
                ring_count: rings,
                status,
                min_u,
            }
        })
        .collect();
    let mut out: Vec<StabilityRow> = centers
        .iter()
        .map(|&c| StabilityRow {
            center: c,
            delta: 0.0,
            t_est: t_ref,
            r_blow: r_ref,
            dt: t_ref.map(|_| 0.0),
            dr: r_ref.map(|_| 0.0),
            ring_count: rings_ref,
            status: status_ref.clone(),
            min_u: min_ref,
        })
        .collect();
    out.extend(rows);
    out.sort_by(|a, b| a.center.total_cmp(&b.center).then(b.delta.total_cmp(&a.delta)));
    Ok(out)
}

impl From<SolverError> for ShootError {
    fn from(e: SolverError) -> Self {
        ShootError::Option { name: "solver", value: match e {
            SolverError::Diverged { t, .. } => t,
            _ => f64::NAN,
        } }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn small_ctx() -> ShootContext {
        let grid = Arc::new(
            RadialGrid::graded(GridSpec { core_spacing: 2e-7, core_halfwidth: 2e-6, growth: 1.03, ..Default::default() })
                .unwrap(),
        );
        ShootContext::new(
            ModelParams::new(3.0, 2).unwrap(),
            ShrinkSetParams::default(),
            (-10.0f64).exp(),
            grid,
            ShootConfig { horizon: 2.0, ..Default::default() },
        )
        .unwrap()
    }

    #[test]
    fn initial_data_plateau_and_ring_value() {
        let ctx = small_ctx();
        let p = ctx.params(0.0, 0.0);
        let u0 = build_initial_data(&p, &ctx.grid, &ctx.model).unwrap();
        let s0 = p.s0();
        let kappa = ctx.profile.kappa();
        let ring = ctx.grid.nearest(1.0);
        let expected = p.t_blow.powf(-0.5) * (kappa + kappa / (6.0 * s0));
        assert!((u0.values[ring] - expected).abs() < 1e-12 * expected);
        for i in 0..ctx.grid.len() {
            if ctx.grid.r(i) <= p.shrink.eps0 * 0.75 {
                assert_eq!(u0.values[i], 0.0);
            }
        }
        let idx = ctx.grid.nearest(p.shrink.eps0 / 16.0);
        assert_eq!(u0.values[idx], 0.0);
    }

    #[test]
    fn parameter_to_mode_map_is_linear() {
        let ctx = small_ctx();
        let c = ctx.dmap.offset;
        // cubic interpolation of φ at the quadrature nodes leaves a tiny offset
        assert!(c[0].abs() < 1e-8 * ctx.dmap.scale && c[1].abs() < 1e-8 * ctx.dmap.scale, "{c:?}");
        for (d0, d1) in [(0.3, -0.7), (-1.2, 0.4), (1.9, 1.9)] {
            let q = ctx.initial_modes(d0, d1).unwrap();
            let pred = ctx.dmap.forward([d0, d1]);
            assert!((q[0] - pred[0]).abs() < 1e-8 && (q[1] - pred[1]).abs() < 1e-8);
        }
        // round trip through D_T coordinates
        let d = ctx.dmap.to_d([0.5, -0.25]);
        let q = ctx.dmap.forward(d);
        assert!((q[0] - 0.5 * ctx.dmap.scale).abs() < 1e-15);
        assert!((q[1] + 0.25 * ctx.dmap.scale).abs() < 1e-15);
    }

    #[test]
    fn initial_outer_part_vanishes() {
        let ctx = small_ctx();
        let u0 = build_initial_data(&ctx.params(0.7, -0.9), &ctx.grid, &ctx.model).unwrap();
        let d = ctx.decompose(&u0, ctx.t_blow).unwrap();
        let m = d.q_e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        // zero up to the rounding of T^{-1/(p-1)} (T-t)^{1/(p-1)}
        assert!(m < 1e-14, "{m}");
        assert!(!d.y.is_empty());
    }

    #[test]
    fn inconsistent_parameters_rejected() {
        let sh = ShrinkSetParams { eps0: 0.5, ..Default::default() };
        assert!(InitialDataParams::new(0.0, 0.0, 0.2, sh).is_err());
        assert!(InitialDataParams::new(3.0, 0.0, (-10.0f64).exp(), ShrinkSetParams::default()).is_err());
        assert!(InitialDataParams::new(0.0, 0.0, (-10.0f64).exp(), sh).is_err());
        assert!(InitialDataParams::new(0.0, 0.0, (-10.0f64).exp(), ShrinkSetParams::default()).is_ok());
    }

    #[test]
    fn boundary_shot_exits_immediately() {
        let ctx = small_ctx();
        let [d0, d1] = ctx.dmap.to_d([1.0, 0.3]);
        let out = ctx.shoot(d0, d1).unwrap();
        match out.result {
            ShotResult::Exited(e) => {
                assert_eq!((e.mode, e.omega), (0, 1));
                assert!(e.s_exit - ctx.s0() < 0.1, "{}", e.s_exit);
                let phi = e.exit_map(ctx.shrink.a);
                assert!((phi[0] - 1.0).abs() < 0.05, "{phi:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_data_is_no_blowup() {
        let ctx = small_ctx();
        let zero = RadialField::from_fn(ctx.grid.clone(), ctx.model, 0.0, |_| 0.0);
        let d = ctx.decompose(&zero, ctx.t_blow).unwrap();
        let sample = ModeSample::new(&d, 0.0);
        assert!(!sample.membership(&ctx.shrink).in_set);
        let kappa = ctx.profile.kappa();
        let frame = to_selfsimilar_tau(&zero, ctx.t_blow, ctx.t_blow).unwrap();
        assert!(frame.sup_w() < 0.25 * kappa);
    }

    #[test]
    fn winding_examples() {
        let pts = square_loop([-1.0, -1.0], [1.0, 1.0], 16);
        assert_eq!(pts.len(), 16);
        let affine: Vec<[f64; 2]> = pts.iter().map(|p| [2.0 * p[0] + 0.5 * p[1], -0.3 * p[0] + p[1]]).collect();
        assert_eq!(winding_number(&affine), Some(1));
        let swapped: Vec<[f64; 2]> = pts.iter().map(|p| [p[1], p[0]]).collect();
        assert_eq!(winding_number(&swapped), Some(-1));
        let shifted: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + 5.0, p[1]]).collect();
        assert_eq!(winding_number(&shifted), Some(0));
        assert_eq!(winding_number(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), None);
    }

    struct Synthetic {
        target: [f64; 2],
        horizon: f64,
    }

    impl ShotOracle for Synthetic {
        fn eval(&self, a: f64, b: f64) -> ShotSummary {
            // exit time grows like −log distance, q0 twice as unstable as q1
            let da = a - self.target[0];
            let db = b - self.target[1];
            let t0 = -da.abs().ln();
            let t1 = -2.0 * db.abs().ln();
            let s = t0.min(t1);
            if s >= self.horizon {
                return ShotSummary { phi: None, s_end: self.horizon, survived: true };
            }
            let phi = if t0 <= t1 { [da.signum(), db * (t0 / 2.0).exp()] } else { [da * t1.exp(), db.signum()] };
            ShotSummary { phi: Some(phi), s_end: s, survived: false }
        }
    }

    #[test]
    fn bisection_finds_synthetic_optimum() {
        let oracle = Synthetic { target: [0.3, -0.2], horizon: 12.0 };
        assert_eq!(boundary_degree_check(&oracle, 16).unwrap(), 1);
        let mut checkpoints = 0;
        let res = bisection_search(&oracle, SearchConfig::default(), None, &mut |_| checkpoints += 1);
        assert_eq!(res.initial_winding, Some(1));
        assert!(res.survived, "{res:?}");
        assert!((res.best[0] - 0.3).abs() < 1e-2 && (res.best[1] + 0.2).abs() < 1e-2, "{:?}", res.best);
        assert!(checkpoints >= 1);
    }

    #[test]
    fn centre_survivor_found_on_first_split() {
        let oracle = Synthetic { target: [0.0, 0.0], horizon: 5.0 };
        let res = bisection_search(&oracle, SearchConfig::default(), None, &mut |_| {});
        assert!(res.survived);
        assert_eq!(res.cells.len(), 1, "survivor on the first midline");
    }

    #[test]
    fn resume_reproduces_frontier() {
        let oracle = Synthetic { target: [0.37, 0.11], horizon: 14.0 };
        let cfg = SearchConfig { checkpoint_every: 10, ..Default::default() };
        let mut saved = Vec::new();
        let full = bisection_search(&oracle, cfg, None, &mut |c| saved.push(c.clone()));
        let mid = &saved[saved.len() / 2];
        let resumed = bisection_search(&oracle, cfg, Some(mid), &mut |_| {});
        assert_eq!(full.best, resumed.best);
        assert_eq!(full.cells, resumed.cells);
    }

    #[test]
    fn bump_and_centers() {
        assert_eq!(bump(1.0, 1.0, 0.1), 1.0);
        assert_eq!(bump(1.2, 1.0, 0.1), 0.0);
        assert_eq!(bump_centers(3, 1), vec![0.6, 1.0, 1.4]);
        let a = bump_centers(5, 42);
        assert_eq!(a, bump_centers(5, 42));
        assert!(a[3] >= 0.5 && a[3] < 1.5);
    }
}
