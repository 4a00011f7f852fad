//! Membership in the shrinking set `V_A(s)` and first-exit classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermite::ModeDecomposition;
use crate::solver::RadialField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShrinkError {
    #[error("invalid shrinking-set parameter {name} = {value}")]
    Param { name: &'static str, value: f64 },
    #[error("exit at s = {s} through {bound:?} instead of q0/q1")]
    BootstrapViolation { s: f64, bound: Bound },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShrinkSetParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub eps0: f64,
    pub eta0: f64,
    pub s0: f64,
}

impl Default for ShrinkSetParams {
    fn default() -> Self {
        Self { a: 10.0, k: 5.0, eps0: 0.2, eta0: 1.0, s0: 10.0 }
    }
}

impl ShrinkSetParams {
    pub fn validate(&self) -> Result<(), ShrinkError> {
        let checks = [
            ("A", self.a, self.a >= 1.0),
            ("K", self.k, self.k >= 1.0),
            ("eps0", self.eps0, self.eps0 > 0.0 && self.eps0 < 1.0),
            ("eta0", self.eta0, self.eta0 > 0.0 && self.eta0 <= 1.0),
            ("s0", self.s0, self.s0 >= std::f64::consts::E),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(ShrinkError::Param { name, value });
            }
        }
        Ok(())
    }

    /// `A/s²`, the bound on `q₀`, `q₁` and on the cubic-weighted `q₋`.
    pub fn bound_q01(&self, s: f64) -> f64 {
        self.a / (s * s)
    }

    /// `A² log s/s²`.
    pub fn bound_q2(&self, s: f64) -> f64 {
        self.a * self.a * s.ln() / (s * s)
    }

    pub fn bound_qminus(&self, s: f64) -> f64 {
        self.bound_q01(s)
    }

    /// `A/√s`.
    pub fn bound_qe(&self, s: f64) -> f64 {
        self.a / s.sqrt()
    }

    /// Radius of the regular region `|x| ≤ 3ε₀/4`.
    pub fn regular_radius(&self) -> f64 {
        0.75 * self.eps0
    }

    /// Constant of the a-priori bound `sup|q| ≤ C₁ A²/√s` over `|y| ≤ 6K√s`.
    ///
    /// Sum of the worst cases of each saturated term for `s ≥ e`, `A ≥ 1`:
    /// `1+6K` (modes 0, 1), `36K²·2/e + 4/(3e)` (mode 2), `1+216K³` (`q₋`)
    /// and `1` (`q_e`).
    pub fn c1(&self) -> f64 {
        let k = self.k;
        4.0 + 6.0 * k + 216.0 * k.powi(3) + 27.0 * k * k
    }

    /// Constant of `|q(y)| ≤ C₂ A (log s/s²)(1+|y|³)`: `1.5` (modes 0, 1),
    /// `2.1 A` (mode 2), `1` (`q₋`), rounded up.
    pub fn c2(&self) -> f64 {
        3.0 * (1.0 + self.a) + 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Q0,
    Q1,
    Q2,
    Qminus,
    Qe,
    Regular,
}

impl Bound {
    pub const ALL: [Bound; 6] = [Bound::Q0, Bound::Q1, Bound::Q2, Bound::Qminus, Bound::Qe, Bound::Regular];

    pub fn name(self) -> &'static str {
        match self {
            Bound::Q0 => "q0",
            Bound::Q1 => "q1",
            Bound::Q2 => "q2",
            Bound::Qminus => "qminus",
            Bound::Qe => "qe",
            Bound::Regular => "regular",
        }
    }
}

/// Signed slack `bound − |value|` of every constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub qminus: f64,
    pub qe: f64,
    pub regular: f64,
}

impl Margins {
    pub fn get(&self, b: Bound) -> f64 {
        match b {
            Bound::Q0 => self.q0,
            Bound::Q1 => self.q1,
            Bound::Q2 => self.q2,
            Bound::Qminus => self.qminus,
            Bound::Qe => self.qe,
            Bound::Regular => self.regular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub s: f64,
    pub in_set: bool,
    pub margins: Margins,
    /// Constraint with the smallest slack relative to its bound.
    pub tightest: Bound,
}

/// Scalar summary of one decomposition, enough to re-evaluate membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSample {
    pub s: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub qminus_wnorm: f64,
    pub qe_sup: f64,
    /// `sup|u|` over the regular region.
    pub regular_sup: f64,
}

impl ModeSample {
    pub fn new(d: &ModeDecomposition, regular_sup: f64) -> Self {
        Self { s: d.s, q0: d.q0, q1: d.q1, q2: d.q2, qminus_wnorm: d.qminus_wnorm, qe_sup: d.qe_sup, regular_sup }
    }

    pub fn membership(&self, params: &ShrinkSetParams) -> MembershipReport {
        let s = self.s;
        let margins = Margins {
            q0: params.bound_q01(s) - self.q0.abs(),
            q1: params.bound_q01(s) - self.q1.abs(),
            q2: params.bound_q2(s) - self.q2.abs(),
            qminus: params.bound_qminus(s) - self.qminus_wnorm,
            qe: params.bound_qe(s) - self.qe_sup,
            regular: params.eta0 - self.regular_sup,
        };
        let scale = |b: Bound| match b {
            Bound::Q0 | Bound::Q1 | Bound::Qminus => params.bound_q01(s),
            Bound::Q2 => params.bound_q2(s),
            Bound::Qe => params.bound_qe(s),
            Bound::Regular => params.eta0,
        };
        let tightest = Bound::ALL
            .into_iter()
            .min_by(|a, b| (margins.get(*a) / scale(*a)).total_cmp(&(margins.get(*b) / scale(*b))))
            .unwrap_or(Bound::Q0);
        let in_set = Bound::ALL.iter().all(|b| margins.get(*b) >= 0.0);
        MembershipReport { s, in_set, margins, tightest }
    }
}

pub fn check_membership(
    decomp: &ModeDecomposition,
    s: f64,
    field: &RadialField,
    params: &ShrinkSetParams,
) -> MembershipReport {
    let regular_sup = field.sup_within(params.regular_radius());
    let mut sample = ModeSample::new(decomp, regular_sup);
    sample.s = s;
    sample.membership(params)
}

/// Ratios of the residual to the two a-priori bounds; both `≤ 1` when the
/// bounds hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriRatios {
    pub sup_ratio: f64,
    pub cubic_ratio: f64,
}

pub fn apriori_bounds(decomp: &ModeDecomposition, s: f64, params: &ShrinkSetParams) -> AprioriRatios {
    let sup_bound = params.c1() * params.a * params.a / s.sqrt();
    let cubic_bound = params.c2() * params.a * s.ln() / (s * s);
    let mut sup_q: f64 = 0.0;
    let mut cubic: f64 = 0.0;
    for (&y, &q) in decomp.y.iter().zip(&decomp.q) {
        if y.abs() > 6.0 * params.k * s.sqrt() {
            continue;
        }
        sup_q = sup_q.max(q.abs());
        cubic = cubic.max(q.abs() / (1.0 + y.abs().powi(3)));
    }
    AprioriRatios { sup_ratio: sup_q / sup_bound, cubic_ratio: cubic / cubic_bound }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitEvent {
    pub s_exit: f64,
    /// 0 or 1.
    pub mode: u8,
    /// Sign `ω` of the violating mode.
    pub omega: i8,
    /// `d/ds (ω q_mode)` at the exit, from the bracketing samples.
    pub crossing_derivative: f64,
    /// `q₀`, `q₁` interpolated to `s_exit`.
    pub q01: [f64; 2],
}

impl ExitEvent {
    /// `Φ = (s*²/A)(q₀, q₁)(s*)`.
    pub fn exit_map(&self, a: f64) -> [f64; 2] {
        let f = self.s_exit * self.s_exit / a;
        [f * self.q01[0], f * self.q01[1]]
    }
}

/// First bound violation along `series`. `Ok(None)` when every sample is in
/// the set; a violation of anything but `q₀`/`q₁` is a bootstrap violation.
pub fn detect_exit(series: &[ModeSample], params: &ShrinkSetParams) -> Result<Option<ExitEvent>, ShrinkError> {
    for (i, sample) in series.iter().enumerate() {
        let report = sample.membership(params);
        if report.in_set {
            continue;
        }
        let violated = |b: Bound| report.margins.get(b) < 0.0;
        let q01 = [Bound::Q0, Bound::Q1].into_iter().filter(|b| violated(*b));
        // of the violated expanding modes take the one furthest out
        let mode = q01.min_by(|a, b| {
            (report.margins.get(*a)).total_cmp(&report.margins.get(*b))
        });
        let Some(mode) = mode else {
            let bound = Bound::ALL.into_iter().find(|b| violated(*b)).unwrap_or(Bound::Q2);
            return Err(ShrinkError::BootstrapViolation { s: sample.s, bound });
        };
        let m = if mode == Bound::Q0 { 0 } else { 1 };
        let value = |x: &ModeSample| if m == 0 { x.q0 } else { x.q1 };
        let omega: i8 = if value(sample) >= 0.0 { 1 } else { -1 };
        let w = omega as f64;
        let event = if i == 0 {
            ExitEvent { s_exit: sample.s, mode: m, omega, crossing_derivative: f64::NAN, q01: [sample.q0, sample.q1] }
        } else {
            let prev = &series[i - 1];
            let ds = sample.s - prev.s;
            // slack g(s) = ω q_m − A/s² changes sign between the samples
            let g0 = w * value(prev) - params.bound_q01(prev.s);
            let g1 = w * value(sample) - params.bound_q01(sample.s);
            let theta = if g1 != g0 { (-g0 / (g1 - g0)).clamp(0.0, 1.0) } else { 1.0 };
            let lerp = |a: f64, b: f64| a + theta * (b - a);
            ExitEvent {
                s_exit: lerp(prev.s, sample.s),
                mode: m,
                omega,
                crossing_derivative: w * (value(sample) - value(prev)) / ds,
                q01: [lerp(prev.q0, sample.q0), lerp(prev.q1, sample.q1)],
            }
        };
        return Ok(Some(event));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::hermite::hermite_h;
    use crate::model::ModelParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn params() -> ShrinkSetParams {
        ShrinkSetParams::default()
    }

    fn zero_sample(s: f64) -> ModeSample {
        ModeSample { s, q0: 0.0, q1: 0.0, q2: 0.0, qminus_wnorm: 0.0, qe_sup: 0.0, regular_sup: 0.0 }
    }

    #[test]
    fn zero_state_margins_equal_bounds() {
        let p = params();
        let s = 12.0;
        let grid = Arc::new(RadialGrid::uniform(4.0, 100).unwrap());
        let field = RadialField::from_fn(grid, ModelParams::new(3.0, 2).unwrap(), 0.0, |_| 0.0);
        let ys: Vec<f64> = (-20..=20).map(|i| i as f64).collect();
        let d = ModeDecomposition::from_parts([0.0; 3], ys.clone(), vec![0.0; ys.len()], s, p.k);
        let r = check_membership(&d, s, &field, &p);
        assert!(r.in_set);
        let a = p.a;
        assert_relative_eq!(r.margins.q0, a / (s * s));
        assert_relative_eq!(r.margins.q1, a / (s * s));
        assert_relative_eq!(r.margins.q2, a * a * s.ln() / (s * s));
        assert_relative_eq!(r.margins.qminus, a / (s * s));
        assert_relative_eq!(r.margins.qe, a / s.sqrt());
        assert_relative_eq!(r.margins.regular, p.eta0);
    }

    #[test]
    fn q2_violation_is_tightest() {
        let p = params();
        let s = 15.0;
        let mut x = zero_sample(s);
        x.q2 = 2.0 * p.a * p.a * s.ln() / (s * s);
        let r = x.membership(&p);
        assert!(!r.in_set);
        assert_eq!(r.tightest, Bound::Q2);
        assert_eq!(detect_exit(&[zero_sample(14.0), x], &p), Err(ShrinkError::BootstrapViolation { s, bound: Bound::Q2 }));
    }

    #[test]
    fn validation() {
        assert!(params().validate().is_ok());
        assert!(ShrinkSetParams { s0: 2.0, ..params() }.validate().is_err());
        assert!(ShrinkSetParams { eta0: 1.5, ..params() }.validate().is_err());
        assert!(ShrinkSetParams { a: 0.5, ..params() }.validate().is_err());
    }

    #[test]
    fn constructed_crossing() {
        let p = params();
        let s_star = 14.0;
        let series: Vec<ModeSample> = (0..200)
            .map(|i| {
                let s = 10.0 + 0.05 * i as f64;
                ModeSample { q1: p.bound_q01(s) * ((s - s_star) / 2.0).exp(), ..zero_sample(s) }
            })
            .collect();
        let e = detect_exit(&series, &p).unwrap().unwrap();
        assert_eq!(e.mode, 1);
        assert_eq!(e.omega, 1);
        assert!(e.crossing_derivative > 0.0);
        assert!((e.s_exit - s_star).abs() < 1e-3, "{}", e.s_exit);
        let phi = e.exit_map(p.a);
        assert!((phi[1] - 1.0).abs() < 1e-3);

        let neg: Vec<ModeSample> = series.iter().map(|x| ModeSample { q0: -x.q1 * 1.0001, q1: 0.0, ..*x }).collect();
        let e = detect_exit(&neg, &p).unwrap().unwrap();
        assert_eq!((e.mode, e.omega), (0, -1));
        assert!(e.crossing_derivative > 0.0);

        let calm: Vec<ModeSample> = (0..50).map(|i| zero_sample(10.0 + i as f64)).collect();
        assert_eq!(detect_exit(&calm, &p), Ok(None));
    }

    #[test]
    fn bounds_decrease() {
        let p = params();
        let mut s = 3.0;
        while s < 200.0 {
            let t = s + 0.1;
            assert!(p.bound_q01(t) < p.bound_q01(s));
            assert!(p.bound_q2(t) < p.bound_q2(s));
            assert!(p.bound_qe(t) < p.bound_qe(s));
            s = t;
        }
    }

    #[test]
    fn apriori_ratios_for_saturated_residual() {
        let p = params();
        for s in [p.s0, 20.0, 35.0] {
            let ymax = 6.0 * p.k * s.sqrt();
            let ys: Vec<f64> = (0..=4000).map(|i| -ymax + 2.0 * ymax * i as f64 / 4000.0).collect();
            let c = [p.bound_q01(s), p.bound_q01(s), p.bound_q2(s)];
            let q: Vec<f64> = ys
                .iter()
                .map(|&y| {
                    c[0] + c[1] * y.abs() + c[2] * hermite_h(2, y).abs() + p.bound_qminus(s) * (1.0 + y.abs().powi(3))
                })
                .collect();
            let d = ModeDecomposition::from_parts(c, ys, q, s, p.k);
            let r = apriori_bounds(&d, s, &p);
            assert!(r.sup_ratio <= 1.0 && r.cubic_ratio <= 1.0, "s={s}: {r:?}");
            assert!(r.cubic_ratio > 0.1);
        }
        let d = ModeDecomposition::from_parts([0.0; 3], vec![0.0, 1.0], vec![0.0, 0.0], 20.0, p.k);
        assert_eq!(apriori_bounds(&d, 20.0, &p), AprioriRatios { sup_ratio: 0.0, cubic_ratio: 0.0 });
    }

    proptest! {
        #[test]
        fn in_set_iff_margins_nonnegative(
            q0 in -0.2f64..0.2, q1 in -0.2f64..0.2, q2 in -3.0f64..3.0,
            qm in 0.0f64..0.2, qe in 0.0f64..4.0, reg in 0.0f64..1.5, s in 3.0f64..40.0,
        ) {
            let x = ModeSample { s, q0, q1, q2, qminus_wnorm: qm, qe_sup: qe, regular_sup: reg };
            let r = x.membership(&params());
            let all = Bound::ALL.iter().all(|b| r.margins.get(*b) >= 0.0);
            prop_assert_eq!(r.in_set, all);
        }
    }
}
