//! Post-run diagnostics on recorded snapshots: profile convergence, the
//! final-time asymptote, global and local size bounds, and flatness in the
//! intermediate region.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::RadialGrid;
use crate::model::{ModelParams, Profile};
use crate::shooting::{RunSnapshot, ShootContext, ShootOutcome};
use crate::shrink::{ModeSample, ShrinkSetParams};
use crate::solver::{BlowupRun, RadialField, SeriesSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("insufficient data: {have} usable snapshots, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("empty sampling window: {0}")]
    EmptyWindow(&'static str),
    #[error("window [{lo}, {hi}] exceeds the recorded data")]
    WindowOutsideData { lo: f64, hi: f64 },
    #[error("run has no blow-up time estimate")]
    NoBlowupTime,
    #[error("invalid diagnostic parameter {name} = {value}")]
    Param { name: &'static str, value: f64 },
}

/// Everything the diagnostics need from a run; persisted as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: ModelParams<f64>,
    pub shrink: ShrinkSetParams,
    /// Blow-up time used for `T − t` in the snapshots.
    #[serde(rename = "T")]
    pub t_blow: f64,
    #[serde(rename = "T_est")]
    pub t_est: Option<f64>,
    pub r_blow: f64,
    pub offsets: Vec<f64>,
    pub snapshots: Vec<RunSnapshot>,
    pub sup_series: Vec<SeriesSample>,
    pub modes: Vec<ModeSample>,
    /// `(s, sup|W|)`.
    pub w_sup: Vec<[f64; 2]>,
    pub min_u: f64,
}

impl RunRecord {
    /// Record of a shot run with `record = true`.
    pub fn from_shot(ctx: &ShootContext, out: &ShootOutcome) -> Self {
        Self {
            model: ctx.model,
            shrink: ctx.shrink,
            t_blow: ctx.t_blow,
            t_est: out.t_est,
            r_blow: out.r_blow.unwrap_or(1.0),
            offsets: ctx.grid.offsets().to_vec(),
            snapshots: out.snapshots.clone(),
            sup_series: out.sup_series.clone(),
            modes: out.modes.clone(),
            w_sup: out.w_sup.clone(),
            min_u: out.min_u,
        }
    }

    /// Record of a physical-time run; `T − t` is taken against `T_est`.
    pub fn from_blowup(run: &BlowupRun, shrink: ShrinkSetParams) -> Result<Self, VerifyError> {
        let t_est = run.report.t_est.ok_or(VerifyError::NoBlowupTime)?;
        let model = run.final_field.model;
        let inv = 1.0 / (model.p - 1.0);
        let snapshots: Vec<RunSnapshot> = run
            .snapshots
            .iter()
            .filter(|s| s.t < t_est)
            .map(|s| {
                let tau = t_est - s.t;
                RunSnapshot { s: -tau.ln(), tau, t: s.t, values: s.values.clone() }
            })
            .collect();
        let w_sup = run
            .report
            .series
            .iter()
            .filter(|x| x.t < t_est)
            .map(|x| {
                let tau = t_est - x.t;
                [-tau.ln(), x.sup_u * tau.powf(inv)]
            })
            .collect();
        let min_u = snapshots.iter().flat_map(|s| s.values.iter().copied()).fold(f64::INFINITY, f64::min);
        Ok(Self {
            model,
            shrink,
            t_blow: t_est,
            t_est: Some(t_est),
            r_blow: run.report.r_blow.unwrap_or(1.0),
            offsets: run.final_field.grid.offsets().to_vec(),
            snapshots,
            sup_series: run.report.series.clone(),
            modes: Vec::new(),
            w_sup,
            min_u,
        })
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>, VerifyError> {
        RadialGrid::from_offsets(self.offsets.clone())
            .map(Arc::new)
            .map_err(|_| VerifyError::Param { name: "offsets", value: self.offsets.len() as f64 })
    }

    pub fn radii(&self) -> Vec<f64> {
        self.offsets.iter().map(|o| 1.0 + o).collect()
    }

    pub fn final_field(&self) -> Result<RadialField, VerifyError> {
        let snap = self.snapshots.last().ok_or(VerifyError::InsufficientData { have: 0, need: 1 })?;
        RadialField::new(self.grid()?, snap.values.clone(), snap.t, self.model)
            .map_err(|_| VerifyError::Param { name: "snapshot length", value: snap.values.len() as f64 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFitReport {
    pub s_values: Vec<f64>,
    /// `D(s) = sup_{|z| ≤ R} |(T−t)^{1/(p−1)} u − f(z)|`.
    pub deviation: Vec<f64>,
    /// Fitted `α` in `D(s) ≈ c s^{−α}` over the last `fit_window` units of `s`.
    pub alpha: f64,
    pub fit_window: f64,
    /// `D` nonincreasing (to relative 1e-9) over the fit window.
    pub decreasing: bool,
    pub w_sup: Vec<f64>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `D(s)` over `Λ_R = {|r − r_blow| ≤ R√((T−t)s)}` and its decay exponent.
pub fn profile_deviation(run: &RunRecord, window_r: f64, fit_window: f64) -> Result<ProfileFitReport, VerifyError> {
    if !(window_r > 0.0) {
        return Err(VerifyError::Param { name: "R", value: window_r });
    }
    let profile = Profile::new(run.model);
    let inv = profile.inv_pm1();
    let radii = run.radii();
    let mut s_values = Vec::new();
    let mut deviation = Vec::new();
    let mut w_sup = Vec::new();
    for snap in &run.snapshots {
        if !(snap.tau > 0.0 && snap.tau < 1.0) {
            continue;
        }
        let width = (snap.tau * snap.s).sqrt();
        let scale = snap.tau.powf(inv);
        let mut d = None::<f64>;
        for (r, u) in radii.iter().zip(&snap.values) {
            let z = (r - run.r_blow) / width;
            if z.abs() <= window_r {
                let dev = (scale * u - profile.f(z)).abs();
                d = Some(d.map_or(dev, |x| x.max(dev)));
            }
        }
        if let Some(d) = d {
            s_values.push(snap.s);
            deviation.push(d);
            w_sup.push(scale * snap.values.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        }
    }
    if s_values.len() < 5 {
        return Err(VerifyError::InsufficientData { have: s_values.len(), need: 5 });
    }
    let s_last = *s_values.last().unwrap_or(&0.0);
    let idx: Vec<usize> = (0..s_values.len()).filter(|&i| s_values[i] >= s_last - fit_window).collect();
    if idx.len() < 5 {
        return Err(VerifyError::InsufficientData { have: idx.len(), need: 5 });
    }
    let xs: Vec<f64> = idx.iter().map(|&i| s_values[i].ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| deviation[i].max(f64::MIN_POSITIVE).ln()).collect();
    let alpha = -linear_slope(&xs, &ys);
    let decreasing = idx.windows(2).all(|w| deviation[w[1]] <= deviation[w[0]] * (1.0 + 1e-9));
    Ok(ProfileFitReport { s_values, deviation, alpha, fit_window, decreasing, w_sup })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UstarReport {
    /// Remaining time `T − t` of the snapshot used.
    pub tau: f64,
    pub r: Vec<f64>,
    pub ratio: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_dev: f64,
}

/// `u(r, T−ε)/u*(|r − r_blow|)` for `|r − r_blow| ∈ [5√(T−t), 0.2]`, using the
/// last snapshot with `T − t ≥ ε`.
pub fn ustar_check(run: &RunRecord, epsilon_t: f64) -> Result<UstarReport, VerifyError> {
    let snap = run
        .snapshots
        .iter()
        .rev()
        .find(|s| s.tau >= epsilon_t && s.tau > 0.0)
        .ok_or(VerifyError::InsufficientData { have: 0, need: 1 })?;
    let profile = Profile::new(run.model);
    let lo = 5.0 * snap.tau.sqrt();
    let hi = 0.2;
    let mut r = Vec::new();
    let mut ratio = Vec::new();
    for (x, u) in run.radii().iter().zip(&snap.values) {
        let rho = (x - run.r_blow).abs();
        if rho >= lo && rho <= hi {
            if let Ok(us) = profile.ustar(rho) {
                r.push(*x);
                ratio.push(u / us);
            }
        }
    }
    if r.is_empty() {
        return Err(VerifyError::EmptyWindow("5 sqrt(T-t) <= |r - r_blow| <= 0.2"));
    }
    let min_ratio = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_dev = ratio.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    Ok(UstarReport { tau: snap.tau, r, ratio, min_ratio, max_ratio, max_dev })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalBoundReport {
    pub max_sup_w: f64,
    pub bound: f64,
    /// Values of `s` with `sup|W| > κ + 2`.
    pub violations: Vec<f64>,
}

/// Running maximum of `sup|W|` over `(s, sup|W|)` samples against `κ + 2`.
pub fn global_bound_check(samples: &[[f64; 2]], kappa: f64) -> GlobalBoundReport {
    let bound = kappa + 2.0;
    let max_sup_w = samples.iter().map(|x| x[1]).fold(0.0, f64::max);
    let violations = samples.iter().filter(|x| x[1] > bound).map(|x| x[0]).collect();
    GlobalBoundReport { max_sup_w, bound, violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonBlowupReport {
    pub a: f64,
    pub radius: f64,
    pub eta: f64,
    /// `max (T−t)^{1/(p−1)} |u|` over `|r − a| ≤ R` and `T − t ≤ R²`.
    pub max_scaled: f64,
    pub below_threshold: bool,
    pub regular_max: f64,
    pub regular_final: f64,
    pub regular_ok: bool,
    pub regular_improved: bool,
}

/// Giga–Kohn-type witness that `a` is not a blow-up point:
/// `|u| ≤ η(T−t)^{−1/(p−1)}` on `{|r − a| ≤ R} × [T − R², T_last]`, plus the
/// regular-region bounds `|u| ≤ η₀` throughout and `≤ η₀/2` at the end.
pub fn nonblowup_threshold_check(run: &RunRecord, a: f64, radius: f64, eta: f64) -> Result<NonBlowupReport, VerifyError> {
    let radii = run.radii();
    let r_out = *radii.last().unwrap_or(&0.0);
    if !(radius > 0.0) || a + radius > r_out || a < 0.0 {
        return Err(VerifyError::WindowOutsideData { lo: a - radius, hi: a + radius });
    }
    let inv = 1.0 / (run.model.p - 1.0);
    let snaps: Vec<&RunSnapshot> = run.snapshots.iter().filter(|s| s.tau <= radius * radius && s.tau > 0.0).collect();
    if snaps.is_empty() {
        return Err(VerifyError::WindowOutsideData { lo: run.t_blow - radius * radius, hi: run.t_blow });
    }
    let mut max_scaled = 0.0f64;
    for snap in &snaps {
        let scale = snap.tau.powf(inv);
        for (r, u) in radii.iter().zip(&snap.values) {
            if (r - a).abs() <= radius {
                max_scaled = max_scaled.max(scale * u.abs());
            }
        }
    }
    let reg = run.shrink.regular_radius();
    let reg_sup = |v: &[f64]| radii.iter().zip(v).filter(|(r, _)| **r <= reg).fold(0.0f64, |m, (_, u)| m.max(u.abs()));
    let mut regular_max = run.snapshots.iter().map(|s| reg_sup(&s.values)).fold(0.0, f64::max);
    regular_max = run.modes.iter().map(|m| m.regular_sup).fold(regular_max, f64::max);
    let regular_final = run.snapshots.last().map(|s| reg_sup(&s.values)).unwrap_or(0.0);
    let eta0 = run.shrink.eta0;
    Ok(NonBlowupReport {
        a,
        radius,
        eta,
        max_scaled,
        below_threshold: max_scaled <= eta,
        regular_max,
        regular_final,
        regular_ok: regular_max <= eta0,
        regular_improved: regular_final <= eta0 / 2.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub k: f64,
    pub max_deviation: f64,
    /// `max |u|/u*` over the window.
    pub max_ratio: f64,
    pub calibrated_bound: f64,
    pub within_bound: bool,
    /// Lower bin edges in `|log|r − r_blow||` and the max deviation per bin.
    pub log_bins: Vec<f64>,
    pub bin_deviation: Vec<f64>,
    pub samples: usize,
}

/// `τ₀` with `ρ = K√(τ₀|log τ₀|)` on the branch `τ₀ < 1/e`.
pub fn flatness_start(rho: f64, k: f64) -> Option<f64> {
    let g = |lt: f64| k * (lt.exp() * lt.abs()).sqrt();
    let (mut lo, mut hi) = (-745.0f64, -1.0f64);
    if !(rho > g(lo) && rho < g(hi)) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

/// Deviation of `u/u*` from `U_K(θ)/U_K(1)` with `θ = 1 − (T−t)/(T−t₀(x))` in the
/// intermediate window `K√((T−t)|log(T−t)|) ≤ |r − r_blow| ≤ ε₀/8`.
pub fn intermediate_flatness_check(run: &RunRecord, k: f64, calibrated_bound: f64) -> Result<FlatnessReport, VerifyError> {
    if !(k > 0.0) {
        return Err(VerifyError::Param { name: "K", value: k });
    }
    let profile = Profile::new(run.model);
    let uk1 = profile.uk(1.0, k).map_err(|_| VerifyError::Param { name: "K", value: k })?;
    let outer = run.shrink.eps0 / 8.0;
    let radii = run.radii();
    let bin_width = 1.0;
    let mut bins: Vec<f64> = Vec::new();
    let mut max_deviation = 0.0f64;
    let mut max_ratio = 0.0f64;
    let mut samples = 0;
    for snap in &run.snapshots {
        let tau = snap.tau;
        if !(tau > 0.0 && tau < (-1.0f64).exp()) {
            continue;
        }
        let inner = k * (tau * tau.ln().abs()).sqrt();
        for (r, u) in radii.iter().zip(&snap.values) {
            let rho = (r - run.r_blow).abs();
            if rho < inner || rho > outer {
                continue;
            }
            let (Some(tau0), Ok(us)) = (flatness_start(rho, k), profile.ustar(rho)) else { continue };
            let theta = (1.0 - tau / tau0).clamp(0.0, 1.0);
            let Ok(ukt) = profile.uk(theta, k) else { continue };
            let dev = (u / us - ukt / uk1).abs();
            max_deviation = max_deviation.max(dev);
            max_ratio = max_ratio.max(u.abs() / us);
            let bin = (rho.ln().abs() / bin_width).floor() as usize;
            if bins.len() <= bin {
                bins.resize(bin + 1, f64::NAN);
            }
            bins[bin] = if bins[bin].is_nan() { dev } else { bins[bin].max(dev) };
            samples += 1;
        }
    }
    if samples == 0 {
        return Err(VerifyError::EmptyWindow("K sqrt((T-t)|log(T-t)|) <= |r - r_blow| <= eps0/8"));
    }
    let mut log_bins = Vec::new();
    let mut bin_deviation = Vec::new();
    for (i, b) in bins.iter().enumerate() {
        if !b.is_nan() {
            log_bins.push(i as f64 * bin_width);
            bin_deviation.push(*b);
        }
    }
    Ok(FlatnessReport {
        k,
        max_deviation,
        max_ratio,
        calibrated_bound,
        within_bound: max_ratio <= calibrated_bound,
        log_bins,
        bin_deviation,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Ratio at the last sample.
    pub last_ratio: f64,
    pub samples: usize,
}

/// `sup|u|(T_est − t)^{1/(p−1)}` over the last decade of growth of `sup|u|`.
pub fn blowup_rate_check(series: &[SeriesSample], t_est: f64, p: f64) -> Result<RateReport, VerifyError> {
    let last = series.last().ok_or(VerifyError::InsufficientData { have: 0, need: 5 })?;
    let tail: Vec<&SeriesSample> =
        series.iter().filter(|x| x.sup_u >= last.sup_u / 10.0 && x.t < t_est).collect();
    if tail.len() < 5 {
        return Err(VerifyError::InsufficientData { have: tail.len(), need: 5 });
    }
    let inv = 1.0 / (p - 1.0);
    let ratios: Vec<f64> = tail.iter().map(|x| x.sup_u * (t_est - x.t).powf(inv)).collect();
    Ok(RateReport {
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        last_ratio: *ratios.last().unwrap_or(&f64::NAN),
        samples: ratios.len(),
    })
}

/// Per-run summary written as `profile_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub alpha: f64,
    #[serde(rename = "D_series_ref")]
    pub d_series_ref: String,
    pub ustar_max_dev: f64,
    #[serde(rename = "W_sup_max")]
    pub w_sup_max: f64,
    pub single_ring: bool,
    pub regular_region_ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ModelParams<f64> {
        ModelParams::new(3.0, 2).unwrap()
    }

    /// Run record with `u(r, T−τ) = g(r, τ, s)` sampled at `s = 10, 10.5, …`.
    fn manufactured(g: impl Fn(f64, f64, f64) -> f64, s_end: f64) -> RunRecord {
        let grid = RadialGrid::uniform(2.0, 4000).unwrap();
        let mut snapshots = Vec::new();
        let mut s = 10.0;
        while s <= s_end + 1e-9 {
            let tau = (-s).exp();
            let values = grid.radii().iter().map(|&r| g(r, tau, s)).collect();
            snapshots.push(RunSnapshot { s, tau, t: 1.0 - tau, values });
            s += 0.5;
        }
        RunRecord {
            model: model(),
            shrink: ShrinkSetParams::default(),
            t_blow: 1.0,
            t_est: Some(1.0),
            r_blow: 1.0,
            offsets: grid.offsets().to_vec(),
            snapshots,
            sup_series: Vec::new(),
            modes: Vec::new(),
            w_sup: Vec::new(),
            min_u: 0.0,
        }
    }

    #[test]
    fn exact_profile_has_zero_deviation() {
        let pr = Profile::new(model());
        let run = manufactured(|r, tau, s| tau.powf(-0.5) * pr.f((r - 1.0) / (tau * s).sqrt()), 30.0);
        let rep = profile_deviation(&run, 1.0, 10.0).unwrap();
        assert!(rep.deviation.iter().all(|d| *d < 1e-12), "{:?}", rep.deviation);
    }

    #[test]
    fn inverse_sqrt_perturbation_gives_half_exponent() {
        let pr = Profile::new(model());
        let run = manufactured(|r, tau, s| tau.powf(-0.5) * (pr.f((r - 1.0) / (tau * s).sqrt()) + s.powf(-0.5)), 30.0);
        let rep = profile_deviation(&run, 1.0, 10.0).unwrap();
        assert!((rep.alpha - 0.5).abs() < 0.05, "{}", rep.alpha);
        assert!(rep.decreasing);
        assert_eq!(rep.s_values.len(), rep.deviation.len());
        assert!(rep.deviation.iter().all(|d| *d >= 0.0));
    }

    #[test]
    fn too_few_snapshots() {
        let pr = Profile::new(model());
        let run = manufactured(|r, tau, s| tau.powf(-0.5) * pr.f((r - 1.0) / (tau * s).sqrt()), 11.0);
        assert!(matches!(profile_deviation(&run, 1.0, 10.0), Err(VerifyError::InsufficientData { .. })));
    }

    #[test]
    fn ustar_manufactured_ratio_is_one() {
        let pr = Profile::new(model());
        let run = manufactured(|r, _, _| pr.ustar((r - 1.0).abs()).unwrap_or(0.0), 12.0);
        let rep = ustar_check(&run, 0.0).unwrap();
        assert!(rep.max_dev < 1e-14);
        assert!(rep.r.iter().all(|r| (r - 1.0).abs() <= 0.2 && (r - 1.0).abs() < 1.0));
    }

    #[test]
    fn global_bound_examples() {
        let k = Profile::new(model()).kappa();
        let ok = global_bound_check(&[[10.0, k], [11.0, k]], k);
        assert_eq!(ok.max_sup_w, k);
        assert!(ok.violations.is_empty());
        let bad = global_bound_check(&[[10.0, k], [11.0, k + 3.0]], k);
        assert_eq!(bad.violations, vec![11.0]);
    }

    #[test]
    fn nonblowup_on_zero_and_profile_runs() {
        let zero = manufactured(|_, _, _| 0.0, 14.0);
        let rep = nonblowup_threshold_check(&zero, 0.3, 0.1, 0.5).unwrap();
        assert!(rep.below_threshold && rep.regular_ok && rep.regular_improved);
        let pr = Profile::new(model());
        let run = manufactured(|r, tau, s| tau.powf(-0.5) * pr.f((r - 1.0) / (tau * s).sqrt()), 14.0);
        let kappa = pr.kappa();
        assert!(!nonblowup_threshold_check(&run, 1.0, 0.05, 0.5 * kappa).unwrap().below_threshold);
        assert!(nonblowup_threshold_check(&run, 0.5, 0.05, 0.5 * kappa).unwrap().below_threshold);
        assert!(nonblowup_threshold_check(&run, 1.9, 0.5, 0.5).is_err());
    }

    #[test]
    fn flatness_manufactured_is_exact() {
        let pr = Profile::new(model());
        let k = 5.0;
        let uk1 = pr.uk(1.0, k).unwrap();
        let run = manufactured(
            |r, tau, _| {
                let rho = (r - 1.0).abs();
                match (flatness_start(rho, k), pr.ustar(rho)) {
                    (Some(t0), Ok(us)) if tau <= t0 => us * pr.uk(1.0 - tau / t0, k).unwrap() / uk1,
                    _ => 0.0,
                }
            },
            20.0,
        );
        let rep = intermediate_flatness_check(&run, k, 10.0).unwrap();
        assert!(rep.max_deviation < 1e-12, "{}", rep.max_deviation);
        assert!(rep.samples > 0 && rep.within_bound);
    }

    #[test]
    fn flatness_start_inverts() {
        for rho in [1e-4, 1e-3, 0.05] {
            let t0 = flatness_start(rho, 5.0).unwrap();
            assert!((5.0 * (t0 * t0.ln().abs()).sqrt() - rho).abs() < 1e-12 * rho.max(1.0));
        }
        assert!(flatness_start(10.0, 5.0).is_none());
    }

    #[test]
    fn rate_of_ode_blowup_is_kappa() {
        let series: Vec<SeriesSample> = (0..60)
            .map(|i| {
                let tau = 0.5 * (0.9f64).powi(i);
                SeriesSample { t: 0.5 - tau, sup_u: (2.0 * tau).powf(-0.5), r_argmax: 0.0 }
            })
            .collect();
        let rep = blowup_rate_check(&series, 0.5, 3.0).unwrap();
        let kappa = 0.5f64.sqrt();
        assert!((rep.min_ratio - kappa).abs() < 1e-9 && (rep.max_ratio - kappa).abs() < 1e-9);
    }

    #[test]
    fn slope_of_line() {
        assert!((linear_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
