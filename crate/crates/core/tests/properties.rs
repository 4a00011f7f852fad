//! Property tests for invariants that cut across modules.

use proptest::prelude::*;

use ringblow::config::{parse_config, RunConfig};
use ringblow::hermite::{hermite_h, project_modes, GaussMeasureQuad};
use ringblow::shooting::{
    bisection_search, square_loop, winding_number, DtMap, SearchConfig, ShotOracle, ShotSummary,
};

/// `Φ(α, β) = M((α, β) − c)` with survival in a small box around `c`.
struct Affine {
    m: [[f64; 2]; 2],
    c: [f64; 2],
}

impl ShotOracle for Affine {
    fn eval(&self, a: f64, b: f64) -> ShotSummary {
        let x = [a - self.c[0], b - self.c[1]];
        let phi = [self.m[0][0] * x[0] + self.m[0][1] * x[1], self.m[1][0] * x[0] + self.m[1][1] * x[1]];
        let dist = x[0].abs().max(x[1].abs());
        ShotSummary { phi: Some(phi), s_end: 20.0 - dist, survived: dist < 1e-3 }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_reconstructs(c in prop::array::uniform6(-1.0f64..1.0), s in 5.0f64..50.0) {
        let quad = GaussMeasureQuad::new(64).unwrap();
        let q = |y: f64| c[0] + c[1] * y + c[2] * y * y + c[3] * y.powi(3) + c[4] * y.powi(4) + c[5] * (-y * y).exp();
        let ys: Vec<f64> = (0..201).map(|i| -20.0 + 0.2 * i as f64).collect();
        let d = project_modes(&quad, q, &ys, s, 5.0);
        for (i, &y) in ys.iter().enumerate() {
            let back = d.low_modes(y) + d.q_minus[i];
            prop_assert!((back - d.q[i]).abs() <= 1e-10 * (1.0 + d.q[i].abs()));
        }
        // P_m(q₋) = 0 for m ≤ 2
        for m in 0..3 {
            let pm = quad.project(|y| q(y) - d.low_modes(y), m);
            let scale = 1.0 + quad.integral(|y| q(y).abs() * hermite_h::<f64>(m, y).abs());
            prop_assert!(pm.abs() <= 1e-8 * scale, "P_{}(q-) = {:e}", m, pm);
        }
    }

    #[test]
    fn winding_is_sign_of_determinant(theta in 0.0f64..std::f64::consts::TAU, a in 0.2f64..5.0, b in 0.2f64..5.0, flip in any::<bool>()) {
        let (sn, cs) = theta.sin_cos();
        let f = if flip { -1.0 } else { 1.0 };
        let m = [[cs * a, -sn * b * f], [sn * a, cs * b * f]];
        let pts: Vec<[f64; 2]> = square_loop([-1.0, -1.0], [1.0, 1.0], 16)
            .into_iter()
            .map(|p| [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]])
            .collect();
        prop_assert_eq!(winding_number(&pts), Some(if flip { -1 } else { 1 }));
    }

    #[test]
    fn dt_map_round_trips(
        m in prop::array::uniform4(-1.0f64..1.0),
        off in prop::array::uniform2(-1e-3f64..1e-3),
        ab in prop::array::uniform2(-1.0f64..1.0),
    ) {
        let matrix = [[m[0] + 2.0, m[1]], [m[2], m[3] + 2.0]];
        let map = DtMap { offset: off, matrix, scale: 0.1 };
        let q = map.forward(map.to_d(ab));
        prop_assert!((q[0] - 0.1 * ab[0]).abs() <= 1e-14);
        prop_assert!((q[1] - 0.1 * ab[1]).abs() <= 1e-14);
    }

    #[test]
    fn bisection_locates_affine_zero(
        c in prop::array::uniform2(-0.9f64..0.9),
        theta in 0.0f64..std::f64::consts::TAU,
        flip in any::<bool>(),
    ) {
        let (sn, cs) = theta.sin_cos();
        let f = if flip { -1.0 } else { 1.0 };
        let oracle = Affine { m: [[cs, -sn * f], [sn, cs * f]], c };
        let res = bisection_search(&oracle, SearchConfig::default(), None, &mut |_| {});
        prop_assert!(res.survived);
        prop_assert!((res.best[0] - c[0]).abs() < 1e-3 && (res.best[1] - c[1]).abs() < 1e-3);
        prop_assert!(res.cells.iter().all(|cell| !cell.fallback));
    }

    #[test]
    fn config_round_trips_through_toml(p in 1.5f64..7.0, a in 1.0f64..50.0, seed in 0u64..(i64::MAX as u64), budget in 10usize..5000) {
        let mut cfg = RunConfig::default();
        cfg.model.p = p;
        cfg.shrink.a = a;
        cfg.seed = seed;
        cfg.search.budget = budget;
        let text = toml::to_string(&cfg).unwrap();
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
