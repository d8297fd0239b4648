//! Configuration-driven experiments over the `holocorr` library.
//!
//! Every artifact written by [`run`] carries the tool version, the config hash
//! and the seed; numeric content depends only on the config.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use holocorr::correspondence::{builtin, periodic_points, IterateBudget, PeriodicPointRecord, TreeMode};
use holocorr::measure::{equilibrium_measure, generic_seed, Direction};
use holocorr::pairing::fourier::{fourier_coefficients, normalized_c5_bump, shell_count};
use holocorr::pairing::{
    convergence_experiment, truncation_error_bound, ExperimentGrids, GlobalForm, LimitCurrent, LimitOptions,
    SharedForm, Strategy,
};
use holocorr::poly::read_polynomial;
use holocorr::quadrature::SphereGrid;
use holocorr::spectral::{contraction_estimate, ContractionOptions};
use holocorr::{Correspondence, Error, Point};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MAX_N: usize = 16;
pub const GRID_RANGE: (usize, usize) = (8, 512);
pub const MAX_PATHS: usize = 1_000_000;
pub const MAX_LIMIT_DEPTH: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config field '{field}': {msg}")]
    Validation { field: &'static str, msg: String },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 ok, 1 i/o, 2 validation, 3 budget, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Budget(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    fn invalid(field: &'static str, msg: impl Into<String>) -> Self {
        CliError::Validation { field, msg: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegreeCap { .. } => CliError::Budget(e.to_string()),
            Error::InvalidInput(m) => CliError::Validation { field: "input", msg: m },
            Error::Parse { .. } | Error::SupportViolation(_) => CliError::Validation { field: "input", msg: e.to_string() },
            Error::Io(io) => CliError::Io(io),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Pair,
    Equilibrium,
    Periodic,
    Contraction,
    Fourier,
    Bench,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Symbolic,
    Tree,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin name or path to a polynomial file.
    pub correspondence: String,
    pub kind: ExperimentKind,
    /// Iterate count for pair/periodic, cloud depth for equilibrium, truncation for fourier.
    pub n_max: usize,
    pub strategy: StrategyName,
    /// Branch paths per node for the sampled strategy.
    pub paths: usize,
    /// Nodes per side of the fine grid; the coarse grid has half as many.
    pub grid: usize,
    pub seed: u64,
    /// Backward/forward depth of the limit-current clouds.
    pub limit_depth: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            correspondence: "square".into(),
            kind: ExperimentKind::Pair,
            n_max: 8,
            strategy: StrategyName::Tree,
            paths: 1024,
            grid: 96,
            seed: 7,
            limit_depth: 12,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::invalid("config", e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.correspondence.trim().is_empty() {
            return Err(CliError::invalid("correspondence", "must name a builtin or a file"));
        }
        if self.n_max == 0 || self.n_max > MAX_N {
            return Err(CliError::invalid("n_max", format!("must lie in 1..={MAX_N}, got {}", self.n_max)));
        }
        let (lo, hi) = GRID_RANGE;
        if self.grid < lo || self.grid > hi || self.grid % 2 != 0 {
            return Err(CliError::invalid("grid", format!("must be even and in {lo}..={hi}, got {}", self.grid)));
        }
        if self.strategy == StrategyName::Sampled && !(2..=MAX_PATHS).contains(&self.paths) {
            return Err(CliError::invalid("paths", format!("must lie in 2..={MAX_PATHS}, got {}", self.paths)));
        }
        if self.limit_depth == 0 || self.limit_depth > MAX_LIMIT_DEPTH {
            return Err(CliError::invalid(
                "limit_depth",
                format!("must lie in 1..={MAX_LIMIT_DEPTH}, got {}", self.limit_depth),
            ));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON, excluding `out`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let text = serde_json::to_string(&c).expect("plain struct");
        hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
    }

    pub fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyName::Symbolic => Strategy::Symbolic,
            StrategyName::Tree => Strategy::Tree(TreeMode::Full),
            StrategyName::Sampled => Strategy::Tree(TreeMode::Sampled { paths: self.paths, seed: self.seed }),
        }
    }

    fn tree_mode(&self) -> TreeMode {
        match self.strategy {
            StrategyName::Sampled => TreeMode::Sampled { paths: self.paths, seed: self.seed },
            _ => TreeMode::Full,
        }
    }
}

/// A builtin name or a polynomial file (with optional `name` header).
pub fn load_correspondence(source: &str) -> CliResult<Correspondence> {
    if let Ok(f) = builtin(source) {
        return Ok(f);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::invalid("correspondence", format!("'{source}' is neither a builtin nor a file")));
    }
    let parsed = read_polynomial(&fs::read_to_string(path)?)?;
    let f = Correspondence::new(parsed.poly)?;
    Ok(match parsed.name {
        Some(n) => f.with_name(n),
        None => f,
    })
}

struct Stamp<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
}

impl Stamp<'_> {
    fn csv_header(&self) -> String {
        format!("# holocorr {VERSION} config {} seed {}\n", self.hash, self.cfg.seed)
    }

    fn json(&self, body: serde_json::Value) -> String {
        // the output directory is not part of the experiment
        let mut config = serde_json::to_value(self.cfg).expect("config");
        config.as_object_mut().expect("object").remove("out");
        let v = serde_json::json!({
            "version": VERSION,
            "config_hash": self.hash,
            "seed": self.cfg.seed,
            "config": config,
            "result": body,
        });
        serde_json::to_string_pretty(&v).expect("json value") + "\n"
    }

    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.cfg.out.join(format!("{stem}-{}.{ext}", self.hash))
    }
}

/// Output of one run: files written, in order.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

/// Validates, runs the configured experiment and writes its artifacts. Nothing
/// is written when validation fails.
pub fn run(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    cfg.validate()?;
    let f = load_correspondence(&cfg.correspondence)?;
    let stamp = Stamp { cfg, hash: cfg.hash() };
    let artifacts = match cfg.kind {
        ExperimentKind::Pair => pair(cfg, &f, &stamp)?,
        ExperimentKind::Equilibrium => equilibrium(cfg, &f, &stamp)?,
        ExperimentKind::Periodic => periodic(cfg, &f, &stamp)?,
        ExperimentKind::Contraction => contraction(cfg, &f, &stamp)?,
        ExperimentKind::Fourier => fourier(cfg, &stamp)?,
        ExperimentKind::Bench => bench(cfg, &stamp)?,
    };
    fs::create_dir_all(&cfg.out)?;
    let mut out = RunOutput::default();
    for (path, text) in artifacts {
        fs::write(&path, text)?;
        out.files.push(path);
    }
    Ok(out)
}

type Artifacts = Vec<(PathBuf, String)>;

fn grids(cfg: &ExperimentConfig) -> CliResult<ExperimentGrids> {
    Ok(ExperimentGrids { fine: SphereGrid::square(cfg.grid)?, coarse: SphereGrid::square(cfg.grid / 2)? })
}

fn pair(cfg: &ExperimentConfig, f: &Correspondence, stamp: &Stamp) -> CliResult<Artifacts> {
    if f.d1() > f.d2() {
        return Err(CliError::invalid("correspondence", "d1 > d2: the normalized currents diverge; use the adjoint"));
    }
    let forms: Vec<SharedForm> =
        GlobalForm::standard_family().into_iter().map(|g| std::sync::Arc::new(g) as SharedForm).collect();
    let opts = LimitOptions { depth: cfg.limit_depth, seed: cfg.seed, ..Default::default() };
    let limit = LimitCurrent::estimate(f, &opts)?;
    let reports = convergence_experiment(f, &forms, cfg.n_max, &cfg.strategy(), &grids(cfg)?, &limit)?;
    let mut out = Vec::new();
    for r in &reports {
        out.push((stamp.path(&format!("pair-{}", r.form_id), "csv"), stamp.csv_header() + &r.to_csv()));
        out.push((stamp.path(&format!("pair-{}", r.form_id), "svg"), r.to_svg()));
    }
    let summary: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            let mut s = r.summary_json();
            s["fit"] = serde_json::to_value(&r.fit).expect("fit");
            s["jittered_nodes"] = r.jittered_nodes.into();
            s
        })
        .collect();
    out.push((stamp.path("pair", "json"), stamp.json(serde_json::json!({ "forms": summary }))));
    Ok(out)
}

fn equilibrium(cfg: &ExperimentConfig, f: &Correspondence, stamp: &Stamp) -> CliResult<Artifacts> {
    let x = generic_seed(cfg.seed, &[], 0.0);
    let mut dirs = Vec::new();
    if f.d1() <= f.d2() {
        dirs.push(Direction::Backward);
    }
    if f.d1() >= f.d2() {
        dirs.push(Direction::Forward);
    }
    let mut out = Vec::new();
    let mut summary = serde_json::Map::new();
    for dir in dirs {
        let mu = equilibrium_measure(f, x, cfg.n_max, cfg.tree_mode(), dir)?;
        let name = serde_json::to_value(dir).expect("direction").as_str().unwrap_or("dir").to_string();
        summary.insert(
            name.clone(),
            serde_json::json!({ "atoms": mu.len(), "mass": mu.mass(), "moments": mu.moments_json(7) }),
        );
        out.push((stamp.path(&format!("equilibrium-{name}"), "csv"), stamp.csv_header() + &mu.to_csv()));
    }
    out.push((stamp.path("equilibrium", "json"), stamp.json(serde_json::Value::Object(summary))));
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PeriodicSummary {
    pub repelling: usize,
    pub attracting: usize,
    /// Indifferent points and points whose multiplier is undefined.
    pub indifferent: usize,
}

/// Distinct periodic points of period `n` and their multiplier classes.
pub fn classify_periodic_experiment(
    f: &Correspondence,
    n: u32,
) -> CliResult<(PeriodicSummary, Vec<PeriodicPointRecord>)> {
    let recs = periodic_points(f, n, &IterateBudget::default())?;
    let mut s = PeriodicSummary::default();
    for r in &recs {
        match r.multiplier_modulus {
            Some(m) if m > 1.0 + 1e-6 => s.repelling += 1,
            Some(m) if m < 1.0 - 1e-6 => s.attracting += 1,
            _ => s.indifferent += 1,
        }
    }
    Ok((s, recs))
}

fn periodic(cfg: &ExperimentConfig, f: &Correspondence, stamp: &Stamp) -> CliResult<Artifacts> {
    let (summary, recs) = classify_periodic_experiment(f, cfg.n_max as u32)?;
    let mut csv = stamp.csv_header() + "re,im,multiplicity,multiplier_modulus\n";
    for r in &recs {
        let (re, im) = match r.point.affine_value() {
            Some(z) => (format!("{:.17e}", z.re), format!("{:.17e}", z.im)),
            None => ("inf".into(), "inf".into()),
        };
        let m = r.multiplier_modulus.map_or("undefined".into(), |m| format!("{m:.17e}"));
        writeln!(csv, "{re},{im},{},{m}", r.multiplicity).unwrap();
    }
    let total: usize = recs.iter().map(|r| r.multiplicity).sum();
    let body = serde_json::json!({ "period": cfg.n_max, "points": recs.len(), "total_multiplicity": total, "summary": summary });
    Ok(vec![(stamp.path("periodic", "csv"), csv), (stamp.path("periodic", "json"), stamp.json(body))])
}

fn contraction(cfg: &ExperimentConfig, f: &Correspondence, stamp: &Stamp) -> CliResult<Artifacts> {
    let opts = ContractionOptions { seed: cfg.seed, grid: cfg.grid, ..Default::default() };
    let r = contraction_estimate(f, &opts)?;
    let body = serde_json::json!({ "options": opts, "report": r });
    Ok(vec![(stamp.path("contraction", "json"), stamp.json(body))])
}

fn fourier(cfg: &ExperimentConfig, stamp: &Stamp) -> CliResult<Artifacts> {
    let n = cfg.n_max.min(8);
    let m = (4 * n).max(16);
    let a = fourier_coefficients(normalized_c5_bump(), n, m)?;
    let mut csv = stamp.csv_header() + "shell,max_abs_coefficient,shell_power_bound,shell_count\n";
    for k in 1..=n as i64 {
        let max = a.weighted_max(0, k, k);
        writeln!(csv, "{k},{max:.17e},{:.17e},{}", (k as f64).powi(-5), shell_count(k as u64)).unwrap();
    }
    let tails: Vec<_> = [4u64, 8, 16].iter().map(|&n| truncation_error_bound(n)).collect::<Result<_, _>>()?;
    let body = serde_json::json!({ "truncation": n, "fft_grid": m, "tails": tails });
    Ok(vec![(stamp.path("fourier", "csv"), csv), (stamp.path("fourier", "json"), stamp.json(body))])
}

/// Wall-clock per experiment kind at fixed sizes, each run in a scratch directory.
fn bench(cfg: &ExperimentConfig, stamp: &Stamp) -> CliResult<Artifacts> {
    let scratch = std::env::temp_dir().join(format!("holocorr-bench-{}-{}", stamp.hash, std::process::id()));
    let base = ExperimentConfig { seed: cfg.seed, out: scratch.clone(), ..Default::default() };
    let cases = [
        ("pair", ExperimentConfig { n_max: 6, ..base.clone() }, "square n=6 grid=96"),
        (
            "equilibrium",
            ExperimentConfig { kind: ExperimentKind::Equilibrium, n_max: 12, ..base.clone() },
            "square depth=12",
        ),
        (
            "periodic",
            ExperimentConfig { kind: ExperimentKind::Periodic, correspondence: "nwm22-seeded".into(), n_max: 3, ..base.clone() },
            "nwm22-seeded n=3",
        ),
        (
            "contraction",
            ExperimentConfig { kind: ExperimentKind::Contraction, correspondence: "nwm22-seeded".into(), grid: 32, ..base.clone() },
            "nwm22-seeded grid=32",
        ),
        ("fourier", ExperimentConfig { kind: ExperimentKind::Fourier, n_max: 8, ..base.clone() }, "n=8 m=32"),
    ];
    let start = Instant::now();
    let mut csv = stamp.csv_header() + "kind,size,seconds\n";
    for (name, c, size) in cases {
        let t = Instant::now();
        run(&c)?;
        writeln!(csv, "{name},{size},{:.6}", t.elapsed().as_secs_f64()).unwrap();
    }
    writeln!(csv, "bench,all,{:.6}", start.elapsed().as_secs_f64()).unwrap();
    let _ = fs::remove_dir_all(&scratch);
    Ok(vec![(stamp.path("bench", "csv"), csv)])
}

/// Images (or preimages) of a point as JSON `[[re, im] | "inf", ...]` with multiplicities.
pub fn eval_points(f: &Correspondence, z: Option<(f64, f64)>, backward: bool) -> CliResult<serde_json::Value> {
    let p = match z {
        Some((re, im)) => Point::affine(holocorr::C64::new(re, im)),
        None => Point::infinity(),
    };
    let rs = if backward { f.backward_fiber(&p)? } else { f.forward_fiber(&p)? };
    let pts: Vec<serde_json::Value> = rs
        .clusters
        .iter()
        .map(|c| {
            let at = match c.point.affine_value() {
                Some(w) => serde_json::json!([w.re, w.im]),
                None => serde_json::json!("inf"),
            };
            serde_json::json!({ "point": at, "multiplicity": c.multiplicity })
        })
        .collect();
    Ok(serde_json::Value::Array(pts))
}
