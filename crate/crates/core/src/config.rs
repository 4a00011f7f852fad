//! TOML run configuration. Every section rejects unknown keys and every
//! range error names the offending key as `section.key`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridSpec;
use crate::model::ModelParams;
use crate::shooting::{check_consistency, SearchConfig, ShootConfig};
use crate::shrink::ShrinkSetParams;
use crate::solver::{SolverConfig, TimeStepping};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error at `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub p: f64,
    pub d: u32,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { p: 3.0, d: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShrinkSection {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub eps0: f64,
    pub eta0: f64,
}

impl Default for ShrinkSection {
    fn default() -> Self {
        let d = ShrinkSetParams::default();
        Self { a: d.a, k: d.k, eps0: d.eps0, eta0: d.eta0 }
    }
}

/// Graded grid, or a uniform one when `uniform_cells` is set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(flatten)]
    pub spec: GridSpec,
    pub uniform_cells: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    /// `u₀ ≡ value`.
    Constant { value: f64 },
    /// The two-parameter ring family at the configured `T`.
    Ring { d0: f64, d1: f64 },
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection::Ring { d0: 0.0, d1: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    pub deltas: Vec<f64>,
    pub n_dirs: usize,
    /// Explicit base parameters; otherwise the bisection search supplies them.
    pub d0: Option<f64>,
    pub d1: Option<f64>,
    /// Directory of an earlier `shoot` run whose `search.json` supplies the base.
    pub search_dir: Option<PathBuf>,
    pub bump_width: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self { deltas: vec![1e-2, 1e-3, 1e-4], n_dirs: 3, d0: None, d1: None, search_dir: None, bump_width: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    /// Window `|z| ≤ R` of the profile deviation.
    pub window_r: f64,
    /// Exponent-fit window in `s`.
    pub fit_window: f64,
    /// Final-time offset of the `u*` comparison.
    pub epsilon_t: f64,
    /// Point and radius of the non-blow-up witness.
    pub witness_a: f64,
    pub witness_radius: f64,
    /// Threshold `η` of the witness; `None` means `κ/2`.
    pub witness_eta: Option<f64>,
    /// Calibrated bound on `|u|/u*` in the intermediate region.
    pub flatness_bound: f64,
    /// Diagnostics cover `[s₀, s₀ + analysis_span]` of a shooting run.
    pub analysis_span: f64,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            window_r: 1.0,
            fit_window: 10.0,
            epsilon_t: 0.0,
            witness_a: 0.3,
            witness_radius: 0.05,
            witness_eta: None,
            flatness_bound: 2.0,
            analysis_span: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    pub n_max: usize,
    pub quad_order: usize,
    pub m_eigen: usize,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self { n_max: 8, quad_order: crate::hermite::DEFAULT_QUAD_ORDER, m_eigen: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Prescribed blow-up time of the ring family.
    #[serde(rename = "T")]
    pub t_blow: f64,
    pub seed: u64,
    pub model: ModelSection,
    pub grid: GridSection,
    pub solver: SolverConfig,
    pub shrink: ShrinkSection,
    pub shooting: ShootConfig,
    pub search: SearchConfig,
    pub initial: InitialSection,
    pub stability: StabilitySection,
    pub profile: ProfileSection,
    pub modes: ModesSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_blow: (-10.0f64).exp(),
            seed: 0,
            model: ModelSection::default(),
            grid: GridSection::default(),
            solver: SolverConfig::default(),
            shrink: ShrinkSection::default(),
            shooting: ShootConfig::default(),
            search: SearchConfig::default(),
            initial: InitialSection::default(),
            stability: StabilitySection::default(),
            profile: ProfileSection::default(),
            modes: ModesSection::default(),
        }
    }
}

impl RunConfig {
    pub fn model(&self) -> ModelParams<f64> {
        ModelParams { p: self.model.p, d: self.model.d, r_max: 1.0 }
    }

    pub fn shrink(&self) -> ShrinkSetParams {
        let s = &self.shrink;
        ShrinkSetParams { a: s.a, k: s.k, eps0: s.eps0, eta0: s.eta0, s0: -self.t_blow.ln() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pos = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(key, format!("must be positive and finite, got {v}")))
            }
        };
        if !(self.model.p > 1.0 && self.model.p.is_finite()) {
            return Err(ConfigError::new("model.p", format!("p > 1 required, got {}", self.model.p)));
        }
        if self.model.d < 2 {
            return Err(ConfigError::new("model.d", format!("d >= 2 required, got {}", self.model.d)));
        }
        if !(self.t_blow > 0.0 && self.t_blow < 1.0) {
            return Err(ConfigError::new("T", format!("T must lie in (0, 1), got {}", self.t_blow)));
        }
        let s0 = -self.t_blow.ln();
        if s0 < std::f64::consts::E {
            return Err(ConfigError::new("T", format!("s0 = -log T = {s0:.4} is below the minimum e")));
        }
        let sh = &self.shrink;
        if !(sh.a >= 1.0) {
            return Err(ConfigError::new("shrink.A", format!("A >= 1 required, got {}", sh.a)));
        }
        if !(sh.k >= 1.0) {
            return Err(ConfigError::new("shrink.K", format!("K >= 1 required, got {}", sh.k)));
        }
        if !(sh.eps0 > 0.0 && sh.eps0 < 1.0) {
            return Err(ConfigError::new("shrink.eps0", format!("0 < eps0 < 1 required, got {}", sh.eps0)));
        }
        pos("shrink.eta0", sh.eta0)?;
        check_consistency(&self.shrink(), self.t_blow).map_err(|e| ConfigError::new("shrink.eps0", e.to_string()))?;

        let g = &self.grid.spec;
        if !(g.r_out >= 2.0 && g.r_out.is_finite()) {
            return Err(ConfigError::new("grid.r_out", format!("r_out >= 2 required, got {}", g.r_out)));
        }
        match self.grid.uniform_cells {
            Some(n) if n < 8 => return Err(ConfigError::new("grid.uniform_cells", format!("at least 8 cells, got {n}"))),
            Some(_) => {}
            None => {
                g.validate().map_err(|e| {
                    let key = match e {
                        crate::grid::GridError::Spacing { name, .. } => format!("grid.{name}"),
                        _ => "grid".to_string(),
                    };
                    ConfigError::new(key, e.to_string())
                })?;
            }
        }

        let sv = &self.solver;
        pos("solver.m_stop", sv.m_stop)?;
        pos("solver.t_max", sv.t_max)?;
        if sv.max_steps == 0 {
            return Err(ConfigError::new("solver.max_steps", "must be positive"));
        }
        if !(sv.snapshot_dlog >= 0.0) {
            return Err(ConfigError::new("solver.snapshot_dlog", "must be nonnegative"));
        }
        match sv.stepping {
            TimeStepping::NonlinearScale { fraction, dt_max } => {
                pos("solver.stepping.fraction", fraction)?;
                pos("solver.stepping.dt_max", dt_max)?;
            }
            TimeStepping::Embedded { rtol, atol, fraction, dt_max } => {
                pos("solver.stepping.rtol", rtol)?;
                if !(atol >= 0.0) {
                    return Err(ConfigError::new("solver.stepping.atol", "must be nonnegative"));
                }
                pos("solver.stepping.fraction", fraction)?;
                pos("solver.stepping.dt_max", dt_max)?;
            }
        }
        self.shooting.validate().map_err(|e| match e {
            crate::shooting::ShootError::Option { name, .. } => ConfigError::new(format!("shooting.{name}"), e.to_string()),
            other => ConfigError::new("shooting", other.to_string()),
        })?;
        let se = &self.search;
        if se.budget == 0 {
            return Err(ConfigError::new("search.budget", "must be positive"));
        }
        if se.n_boundary < 8 {
            return Err(ConfigError::new("search.n_boundary", format!("at least 8 samples, got {}", se.n_boundary)));
        }
        pos("search.min_width", se.min_width)?;
        if se.checkpoint_every == 0 {
            return Err(ConfigError::new("search.checkpoint_every", "must be positive"));
        }
        match self.initial {
            InitialSection::Constant { value } if !value.is_finite() => {
                return Err(ConfigError::new("initial.value", "must be finite"));
            }
            InitialSection::Ring { d0, d1 } => {
                if !(d0.abs() <= 2.0) {
                    return Err(ConfigError::new("initial.d0", format!("|d0| <= 2 required, got {d0}")));
                }
                if !(d1.abs() <= 2.0) {
                    return Err(ConfigError::new("initial.d1", format!("|d1| <= 2 required, got {d1}")));
                }
            }
            _ => {}
        }
        let st = &self.stability;
        if st.deltas.iter().any(|d| !d.is_finite()) {
            return Err(ConfigError::new("stability.deltas", "must be finite"));
        }
        if st.n_dirs == 0 {
            return Err(ConfigError::new("stability.n_dirs", "must be positive"));
        }
        pos("stability.bump_width", st.bump_width)?;
        for (key, v) in [("stability.d0", st.d0), ("stability.d1", st.d1)] {
            if let Some(v) = v {
                if !(v.abs() <= 2.0) {
                    return Err(ConfigError::new(key, format!("|{key}| <= 2 required, got {v}")));
                }
            }
        }
        let pr = &self.profile;
        pos("profile.window_r", pr.window_r)?;
        pos("profile.fit_window", pr.fit_window)?;
        if !(pr.epsilon_t >= 0.0) {
            return Err(ConfigError::new("profile.epsilon_t", "must be nonnegative"));
        }
        pos("profile.witness_radius", pr.witness_radius)?;
        if let Some(e) = pr.witness_eta {
            pos("profile.witness_eta", e)?;
        }
        pos("profile.flatness_bound", pr.flatness_bound)?;
        pos("profile.analysis_span", pr.analysis_span)?;
        let m = &self.modes;
        if m.n_max > 20 {
            return Err(ConfigError::new("modes.n_max", format!("at most 20, got {}", m.n_max)));
        }
        if m.quad_order < 8 {
            return Err(ConfigError::new("modes.quad_order", format!("at least 8, got {}", m.quad_order)));
        }
        if m.m_eigen > 10 {
            return Err(ConfigError::new("modes.m_eigen", format!("at most 10, got {}", m.m_eigen)));
        }
        Ok(())
    }
}

/// Parses and validates a TOML document; an empty document gives the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let key = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field"))
            .map(str::to_string)
            .unwrap_or_else(|| "document".to_string());
        ConfigError::new(key, msg)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.model.p, 3.0);
        assert_eq!(cfg.model.d, 2);
        assert_eq!(cfg.solver.m_stop, 1e8);
        assert_eq!(cfg.grid.spec.r_out, 4.0);
        assert!((cfg.shrink().s0 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_with_key_names() {
        assert_eq!(parse_config("[model]\np = 0.5").unwrap_err().key, "model.p");
        assert_eq!(parse_config("T = 0.2\n[shrink]\neps0 = 0.5").unwrap_err().key, "T");
        assert_eq!(parse_config("[model]\nbogus = 1").unwrap_err().key, "bogus");
        assert_eq!(parse_config("[shrink]\neps0 = 0.5").unwrap_err().key, "shrink.eps0");
        assert_eq!(parse_config("[grid]\ngrowth = 3.0").unwrap_err().key, "grid.growth");
        assert_eq!(parse_config("[initial]\nkind = \"ring\"\nd0 = 3.0\nd1 = 0.0").unwrap_err().key, "initial.d0");
        assert_eq!(parse_config("[shooting]\nds_sample = 0.03").unwrap_err().key, "shooting.ds_sample");
    }

    #[test]
    fn sections_parse() {
        let cfg = parse_config(
            "T = 1e-5\nseed = 7\n[initial]\nkind = \"constant\"\nvalue = 1.0\n[solver]\nouter_bc = \"neumann\"\n\
             [solver.stepping]\nkind = \"nonlinear_scale\"\nfraction = 0.01\ndt_max = 1e-3\n[grid]\nuniform_cells = 64\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.initial, InitialSection::Constant { value: 1.0 });
        assert_eq!(cfg.grid.uniform_cells, Some(64));
        let back = parse_config(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
