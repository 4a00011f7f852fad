//! Experiment orchestration and on-disk artifacts.
//!
//! Every subcommand writes into one output directory and finishes with a
//! `manifest.json` listing each artifact and its SHA-256. Failures leave an
//! `error.json` and map to distinct exit codes.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, InitialSection, RunConfig};
use crate::frame::{to_selfsimilar_tau, CutoffParams};
use crate::grid::RadialGrid;
use crate::hermite::{eigen_residual, hermite_h, hermite_norm_sq, GaussMeasureQuad};
use crate::model::Profile;
use crate::shooting::{
    bisection_search, boundary_degree_check, build_initial_data, bump_centers, stability_experiment, SearchCheckpoint,
    SearchResult, ShootContext, ShotRecord, SimulationOracle,
};
use crate::solver::{run_until_blowup, RadialField};
use crate::verify::{
    blowup_rate_check, global_bound_check, intermediate_flatness_check, nonblowup_threshold_check, profile_deviation,
    ustar_check, ProfileSummary, RunRecord,
};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "RINGBLOW_OUT";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Shoot { resume: bool },
    Stability,
    Modes,
    ProfileCheck { input: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Shoot { .. } => "shoot",
            Command::Stability => "stability",
            Command::Modes => "modes",
            Command::ProfileCheck { .. } => "profile-check",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("input not found: {0}")]
    InputNotFound(PathBuf),
    #[error("malformed input {path}: {message}")]
    BadInput { path: PathBuf, message: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate boundary loop: {0}")]
    Degenerate(String),
}

impl RunError {
    pub fn status(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config-invalid",
            RunError::InputNotFound(_) => "input-not-found",
            RunError::BadInput { .. } => "input-malformed",
            RunError::Io { .. } => "io-error",
            RunError::Numerical(_) => "numerical-failure",
            RunError::Degenerate(_) => "degenerate-boundary",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::InputNotFound(_) => 3,
            RunError::BadInput { .. } => 4,
            RunError::Io { .. } => 5,
            RunError::Numerical(_) => 6,
            RunError::Degenerate(_) => 7,
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        RunError::Io { path: path.to_path_buf(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub status: String,
    pub code: i32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub artifacts: Vec<ManifestEntry>,
}

/// Collects artifacts written below one directory.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&mut self, name: &str) -> Result<PathBuf, RunError> {
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| RunError::io(parent, e))?;
        }
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(p)
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), RunError> {
        let p = self.path(name)?;
        fs::write(&p, data).map_err(|e| RunError::io(&p, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::io(Path::new(name), e))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), RunError> {
        let mut out = Vec::new();
        for r in rows {
            serde_json::to_writer(&mut out, r).map_err(|e| RunError::io(Path::new(name), e))?;
            out.push(b'\n');
        }
        self.bytes(name, &out)
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| RunError::io(Path::new(name), e))?;
        }
        let data = w.into_inner().map_err(|e| RunError::io(Path::new(name), e))?;
        self.bytes(name, &data)
    }

    /// CSV with an explicit header, for tables whose rows are plain numbers.
    pub fn csv_rows(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| RunError::io(Path::new(name), e);
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.serialize(r).map_err(io)?;
        }
        let data = w.into_inner().map_err(|e| RunError::io(Path::new(name), e))?;
        self.bytes(name, &data)
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(mut self, command: &str, cfg: &RunConfig) -> Result<Manifest, RunError> {
        let mut artifacts = Vec::new();
        let mut files = self.files.clone();
        files.sort();
        for f in files {
            let p = self.dir.join(&f);
            let data = fs::read(&p).map_err(|e| RunError::io(&p, e))?;
            artifacts.push(ManifestEntry { path: f, sha256: hex::encode(Sha256::digest(&data)), bytes: data.len() as u64 });
        }
        let manifest = Manifest { command: command.to_string(), config: cfg.clone(), artifacts };
        self.files.clear();
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::io(&self.dir, e))?;
        text.push('\n');
        let p = self.dir.join("manifest.json");
        fs::write(&p, text).map_err(|e| RunError::io(&p, e))?;
        Ok(manifest)
    }
}

/// Writes `error.json` into `dir` (best effort).
pub fn write_error(dir: &Path, err: &RunError) {
    let rec = ErrorRecord { status: err.status().to_string(), code: err.exit_code(), message: err.to_string() };
    if fs::create_dir_all(dir).is_ok() {
        if let Ok(mut f) = fs::File::create(dir.join("error.json")) {
            let _ = serde_json::to_writer_pretty(&mut f, &rec);
            let _ = f.write_all(b"\n");
        }
    }
}

/// `--out`, else `$RINGBLOW_OUT/<command>`, else `ringblow-out/<command>`.
pub fn resolve_out_dir(out: Option<&Path>, env_root: Option<&str>, command: &Command) -> PathBuf {
    match (out, env_root) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(root)) if !root.is_empty() => Path::new(root).join(command.name()),
        _ => Path::new("ringblow-out").join(command.name()),
    }
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig, RunError> {
    match path {
        None => Ok(crate::config::parse_config("")?),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|_| RunError::InputNotFound(p.to_path_buf()))?;
            Ok(crate::config::parse_config(&text)?)
        }
    }
}

pub fn build_grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>, RunError> {
    let g = match cfg.grid.uniform_cells {
        Some(n) => RadialGrid::uniform(cfg.grid.spec.r_out, n),
        None => RadialGrid::graded(cfg.grid.spec),
    };
    g.map(Arc::new).map_err(|e| ConfigError { key: "grid".into(), message: e.to_string() }.into())
}

fn shoot_context(cfg: &RunConfig) -> Result<ShootContext, RunError> {
    let grid = build_grid(cfg)?;
    ShootContext::new(cfg.model(), cfg.shrink(), cfg.t_blow, grid, cfg.shooting)
        .map_err(|e| ConfigError { key: "shooting".into(), message: e.to_string() }.into())
}

/// Runs one subcommand; returns the manifest it wrote.
pub fn run_experiment(cmd: &Command, cfg: &RunConfig, out_dir: &Path) -> Result<Manifest, RunError> {
    cfg.validate()?;
    let mut art = Artifacts::new(out_dir)?;
    match cmd {
        Command::Simulate => simulate(cfg, &mut art)?,
        Command::Shoot { resume } => shoot(cfg, &mut art, *resume)?,
        Command::Stability => stability(cfg, &mut art)?,
        Command::Modes => modes(cfg, &mut art)?,
        Command::ProfileCheck { input } => profile_check(cfg, &mut art, input)?,
    }
    art.finish(cmd.name(), cfg)
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    s: Option<f64>,
    sup_u: f64,
    r_argmax: f64,
}

#[derive(Serialize)]
struct RunSummary {
    #[serde(rename = "T_est")]
    t_est: Option<f64>,
    r_blow: Option<f64>,
    stop_reason: String,
    step_count: usize,
    m_effective: f64,
}

fn simulate(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let grid = build_grid(cfg)?;
    let model = cfg.model();
    let u0 = match cfg.initial {
        InitialSection::Constant { value } => RadialField::from_fn(grid.clone(), model, 0.0, |_| value),
        InitialSection::Ring { d0, d1 } => {
            let p = crate::shooting::InitialDataParams { d0, d1, t_blow: cfg.t_blow, shrink: cfg.shrink() };
            build_initial_data(&p, &grid, &model).map_err(|e| ConfigError { key: "initial".into(), message: e.to_string() })?
        }
    };
    let run = run_until_blowup(&u0, &cfg.solver).map_err(|e| RunError::Numerical(e.to_string()))?;
    let rep = &run.report;
    let rows: Vec<SeriesRow> = rep
        .series
        .iter()
        .map(|x| SeriesRow {
            t: x.t,
            s: rep.t_est.filter(|t| x.t < *t).map(|t| -(t - x.t).ln()),
            sup_u: x.sup_u,
            r_argmax: x.r_argmax,
        })
        .collect();
    art.csv("series.csv", &rows)?;
    let stop = serde_json::to_value(rep.stop_reason).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    art.json(
        "summary.json",
        &RunSummary { t_est: rep.t_est, r_blow: rep.r_blow, stop_reason: stop, step_count: rep.step_count, m_effective: rep.m_effective },
    )?;
    if matches!(cfg.initial, InitialSection::Ring { .. }) {
        if let Ok(record) = RunRecord::from_blowup(&run, cfg.shrink()) {
            art.json("run.json", &record)?;
            diagnostics(cfg, &record, &record, art)?;
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CliCheckpoint {
    search: SearchCheckpoint,
    records: Vec<ShotRecord>,
}

#[derive(Serialize)]
struct DegreeReport {
    winding: Option<i32>,
    n_samples: usize,
    error: Option<String>,
}

#[derive(Serialize)]
struct SearchReport<'a> {
    #[serde(flatten)]
    result: &'a SearchResult,
    d0: f64,
    d1: f64,
    dmap: crate::shooting::DtMap,
}

#[derive(Serialize)]
struct MembershipRow {
    s: f64,
    in_set: bool,
    tightest: &'static str,
    margin_q0: f64,
    margin_q1: f64,
    margin_q2: f64,
    margin_qminus: f64,
    margin_qe: f64,
    margin_regular: f64,
}

fn shoot(cfg: &RunConfig, art: &mut Artifacts, resume: bool) -> Result<(), RunError> {
    let ctx = shoot_context(cfg)?;
    let oracle = SimulationOracle::new(&ctx);
    let degree = boundary_degree_check(&oracle, cfg.search.n_boundary);
    art.json(
        "degree.json",
        &DegreeReport {
            winding: degree.as_ref().ok().copied(),
            n_samples: cfg.search.n_boundary,
            error: degree.as_ref().err().map(|e| e.to_string()),
        },
    )?;
    if let Err(e) = degree {
        return Err(RunError::Degenerate(e.to_string()));
    }

    let cp_path = art.dir().join("checkpoint.json");
    let resume_from: Option<CliCheckpoint> = if resume && cp_path.exists() {
        let text = fs::read_to_string(&cp_path).map_err(|e| RunError::io(&cp_path, e))?;
        Some(serde_json::from_str(&text).map_err(|e| RunError::BadInput { path: cp_path.clone(), message: e.to_string() })?)
    } else {
        None
    };
    if let Some(cp) = &resume_from {
        if let Ok(mut m) = oracle.records.lock() {
            for r in &cp.records {
                m.insert([r.alpha.to_bits(), r.beta.to_bits()], r.clone());
            }
        }
    }
    let mut cp_err = None;
    let result = bisection_search(&oracle, cfg.search, resume_from.as_ref().map(|c| &c.search), &mut |c| {
        let snap = CliCheckpoint { search: c.clone(), records: oracle.frontier() };
        let res = serde_json::to_vec(&snap).map_err(|e| e.to_string()).and_then(|v| fs::write(&cp_path, v).map_err(|e| e.to_string()));
        if let Err(e) = res {
            cp_err = Some(e);
        }
    });
    if let Some(e) = cp_err {
        return Err(RunError::io(&cp_path, e));
    }
    let [d0, d1] = ctx.dmap.to_d(result.best);
    art.jsonl("shots.jsonl", &oracle.frontier())?;
    art.json("search.json", &SearchReport { result: &result, d0, d1, dmap: ctx.dmap })?;

    let out = ctx.shoot_with(ctx.params(d0, d1), true).map_err(|e| RunError::Numerical(e.to_string()))?;
    art.json("summary.json", &ctx.record(result.best[0], result.best[1], &out))?;
    let mode_rows: Vec<Vec<f64>> =
        out.modes.iter().map(|m| vec![m.s, m.q0, m.q1, m.q2, m.qminus_wnorm, m.qe_sup]).collect();
    art.csv_rows("modes.csv", &["s", "q0", "q1", "q2", "qminus_wnorm", "qe_sup"], &mode_rows)?;
    let membership: Vec<MembershipRow> = out
        .modes
        .iter()
        .map(|m| {
            let r = m.membership(&ctx.shrink);
            MembershipRow {
                s: r.s,
                in_set: r.in_set,
                tightest: r.tightest.name(),
                margin_q0: r.margins.q0,
                margin_q1: r.margins.q1,
                margin_q2: r.margins.q2,
                margin_qminus: r.margins.qminus,
                margin_qe: r.margins.qe,
                margin_regular: r.margins.regular,
            }
        })
        .collect();
    art.csv("membership.csv", &membership)?;
    let series: Vec<SeriesRow> = out
        .sup_series
        .iter()
        .zip(out.w_sup.iter())
        .map(|(x, w)| SeriesRow { t: x.t, s: Some(w[0]), sup_u: x.sup_u, r_argmax: x.r_argmax })
        .collect();
    art.csv("series.csv", &series)?;

    // self-similar frames at integer s
    let profile = Profile::new(ctx.model);
    let cutp = CutoffParams { eps0: ctx.shrink.eps0, k: ctx.shrink.k };
    for snap in out.snapshots.iter().filter(|s| (s.s - s.s.round()).abs() < 1e-9) {
        let field = RadialField::new(ctx.grid.clone(), snap.values.clone(), snap.t, ctx.model)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let frame = to_selfsimilar_tau(&field, ctx.t_blow, snap.tau).map_err(|e| RunError::Numerical(e.to_string()))?;
        let q = crate::frame::residual_q(&frame, &cutp);
        let ymax = 6.0 * ctx.shrink.k * snap.s.sqrt();
        let rows: Vec<Vec<f64>> = (0..frame.y.len())
            .filter(|&i| frame.y[i].abs() <= ymax)
            .map(|i| vec![frame.y[i], frame.w[i], profile.phi_unchecked(frame.y[i], snap.s), q[i]])
            .collect();
        art.csv_rows(&format!("frames/s_{:05.2}.csv", snap.s), &["y", "W", "phi", "q"], &rows)?;
    }

    let record = RunRecord::from_shot(&ctx, &out);
    art.json("run.json", &record)?;
    let window = truncate_record(&record, ctx.s0() + cfg.profile.analysis_span);
    diagnostics(cfg, &record, &window, art)
}

/// Copy of `run` restricted to `s ≤ s_end`.
pub fn truncate_record(run: &RunRecord, s_end: f64) -> RunRecord {
    let mut r = run.clone();
    let keep = |s: f64| s <= s_end + 1e-9;
    r.snapshots.retain(|x| keep(x.s));
    r.modes.retain(|x| keep(x.s));
    r.w_sup.retain(|x| keep(x[0]));
    let t_end = r.snapshots.last().map(|x| x.t).unwrap_or(f64::INFINITY);
    r.sup_series.retain(|x| x.t <= t_end);
    r
}

#[derive(Serialize)]
struct DiagnosticsDetail {
    profile: Result<crate::verify::ProfileFitReport, String>,
    ustar: Result<crate::verify::UstarReport, String>,
    global: crate::verify::GlobalBoundReport,
    witness_regular: Result<crate::verify::NonBlowupReport, String>,
    witness_ring: Result<crate::verify::NonBlowupReport, String>,
    flatness: Result<crate::verify::FlatnessReport, String>,
    rate: Result<crate::verify::RateReport, String>,
    ring_count: usize,
    min_u: f64,
}

/// Profile diagnostics: `window` feeds the deviation fit, `full` everything else.
fn diagnostics(cfg: &RunConfig, full: &RunRecord, window: &RunRecord, art: &mut Artifacts) -> Result<(), RunError> {
    let pc = &cfg.profile;
    let kappa = Profile::new(full.model).kappa();
    let eta = pc.witness_eta.unwrap_or(0.5 * kappa);
    let profile = profile_deviation(window, pc.window_r, pc.fit_window).map_err(|e| e.to_string());
    let ustar = ustar_check(full, pc.epsilon_t).map_err(|e| e.to_string());
    let global = global_bound_check(&full.w_sup, kappa);
    let witness_regular = nonblowup_threshold_check(full, pc.witness_a, pc.witness_radius, eta).map_err(|e| e.to_string());
    let witness_ring = nonblowup_threshold_check(full, full.r_blow, pc.witness_radius, eta).map_err(|e| e.to_string());
    let flatness = intermediate_flatness_check(full, full.shrink.k, pc.flatness_bound).map_err(|e| e.to_string());
    let rate = full
        .t_est
        .ok_or_else(|| "no blow-up time".to_string())
        .and_then(|t| blowup_rate_check(&full.sup_series, t, full.model.p).map_err(|e| e.to_string()));
    let ring_count = full.final_field().map(|f| f.ring_count()).unwrap_or(0);

    if let Ok(p) = &profile {
        let rows: Vec<Vec<f64>> =
            (0..p.s_values.len()).map(|i| vec![p.s_values[i], p.deviation[i], p.w_sup[i]]).collect();
        art.csv_rows("D_series.csv", &["s", "D", "W_sup"], &rows)?;
    }
    if let Ok(u) = &ustar {
        let rows: Vec<Vec<f64>> = u.r.iter().zip(&u.ratio).map(|(r, q)| vec![*r, *q]).collect();
        art.csv_rows("ustar.csv", &["r", "ratio"], &rows)?;
    }
    let summary = ProfileSummary {
        alpha: profile.as_ref().map(|p| p.alpha).unwrap_or(f64::NAN),
        d_series_ref: "D_series.csv".to_string(),
        ustar_max_dev: ustar.as_ref().map(|u| u.max_dev).unwrap_or(f64::NAN),
        w_sup_max: global.max_sup_w,
        single_ring: ring_count == 1,
        regular_region_ok: witness_regular.as_ref().map(|w| w.regular_ok).unwrap_or(false),
    };
    art.json("profile_report.json", &summary)?;
    let detail = DiagnosticsDetail {
        profile: profile.map(|mut p| {
            // the series already lives in D_series.csv
            p.s_values.clear();
            p.deviation.clear();
            p.w_sup.clear();
            p
        }),
        ustar: ustar.map(|mut u| {
            u.r.clear();
            u.ratio.clear();
            u
        }),
        global,
        witness_regular,
        witness_ring,
        flatness,
        rate,
        ring_count,
        min_u: full.min_u,
    };
    art.json("diagnostics.json", &detail)
}

#[derive(Deserialize)]
struct StoredSearch {
    d0: f64,
    d1: f64,
}

fn stability(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let ctx = shoot_context(cfg)?;
    let st = &cfg.stability;
    let (d0, d1) = match (st.d0, st.d1, &st.search_dir) {
        (Some(a), Some(b), _) => (a, b),
        (_, _, Some(dir)) => {
            let p = dir.join("search.json");
            let text = fs::read_to_string(&p).map_err(|_| RunError::InputNotFound(p.clone()))?;
            let s: StoredSearch =
                serde_json::from_str(&text).map_err(|e| RunError::BadInput { path: p.clone(), message: e.to_string() })?;
            (s.d0, s.d1)
        }
        _ => {
            let oracle = SimulationOracle::new(&ctx);
            let res = bisection_search(&oracle, cfg.search, None, &mut |_| {});
            let d = ctx.dmap.to_d(res.best);
            (d[0], d[1])
        }
    };
    let centers = bump_centers(st.n_dirs, cfg.seed);
    let base = ctx.params(d0, d1);
    let rows = stability_experiment(&ctx, &base, &st.deltas, &centers, st.bump_width, &cfg.solver)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    art.csv("stability.csv", &rows)?;
    #[derive(Serialize)]
    struct StabilityReport<'a> {
        d0: f64,
        d1: f64,
        centers: &'a [f64],
        rows: &'a [crate::shooting::StabilityRow],
    }
    art.json("stability.json", &StabilityReport { d0, d1, centers: &centers, rows: &rows })
}

fn modes(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let quad = GaussMeasureQuad::new(cfg.modes.quad_order).map_err(|e| RunError::Numerical(e.to_string()))?;
    let n_max = cfg.modes.n_max;
    let mut rows = Vec::new();
    let mut max_err = 0.0f64;
    for m in 0..=n_max {
        for n in 0..=n_max {
            let v = quad.integral(|y| hermite_h::<f64>(m, y) * hermite_h::<f64>(n, y));
            let exact = if m == n { hermite_norm_sq::<f64>(n) } else { 0.0 };
            let err = (v - exact).abs();
            max_err = max_err.max(err);
            rows.push(vec![m as f64, n as f64, v, exact, err]);
        }
    }
    art.csv_rows("orthogonality.csv", &["m", "n", "integral", "exact", "error"], &rows)?;
    let mut eig = Vec::new();
    for m in 0..=cfg.modes.m_eigen {
        let mut prev: Option<f64> = None;
        for dy in [0.1, 0.05, 0.025] {
            let e = eigen_residual(m, dy, 20.0).map_err(|e| RunError::Numerical(e.to_string()))?;
            eig.push(vec![m as f64, dy, e, prev.map(|p| p / e).unwrap_or(f64::NAN)]);
            prev = Some(e);
        }
    }
    art.csv_rows("eigen.csv", &["m", "dy", "error", "ratio"], &eig)?;
    #[derive(Serialize)]
    struct ModesSummary {
        n_max: usize,
        quad_order: usize,
        max_orthogonality_error: f64,
    }
    art.json(
        "modes_summary.json",
        &ModesSummary { n_max, quad_order: cfg.modes.quad_order, max_orthogonality_error: max_err },
    )
}

fn profile_check(cfg: &RunConfig, art: &mut Artifacts, input: &Path) -> Result<(), RunError> {
    let p = input.join("run.json");
    if !p.is_file() {
        return Err(RunError::InputNotFound(p));
    }
    let text = fs::read_to_string(&p).map_err(|e| RunError::io(&p, e))?;
    let record: RunRecord =
        serde_json::from_str(&text).map_err(|e| RunError::BadInput { path: p.clone(), message: e.to_string() })?;
    let window = if record.modes.is_empty() {
        record.clone()
    } else {
        truncate_record(&record, record.shrink.s0 + cfg.profile.analysis_span)
    };
    diagnostics(cfg, &record, &window, art)
}
