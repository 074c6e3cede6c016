//! Config-driven front end used by the `wfsample` binary: TOML run configurations,
//! the six commands, and their JSON, CSV and SVG artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fourier::{
    classify_growth, coefficients_by_region, coefficients_by_window, parseval_check, CompactSource,
    FourierCoefficients, GrowthThresholds, PeriodicSource, RegionQuadrature,
};
use crate::lattice::{check_separation, shortest_vector, Cone, Lattice};
use crate::localize::{
    CutoffFamily, GridData, LocalizedSpectrum, Spectrum, SyntheticSpectrum, TestDistribution, Window, WindowSpec,
};
use crate::microlocal::{
    analyze_seed, decide_lambda, estimate_wavefront, weight_label, Analyzer, AnalyzerConfig, ModerateSpec,
    ModerateWeight, PairVerdict, Radii, RegularityVerdict, Sampling, Thresholds, WaveFrontEstimate,
};
use crate::numerics::norm;
use crate::weights::{check_sequence_conditions, check_weight_conditions, WeightFunction, WeightSequence};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    Delta {
        center: Vec<f64>,
    },
    PlaneJump {
        normal: Vec<f64>,
        offset: f64,
    },
    Gaussian {
        center: Vec<f64>,
        width: f64,
    },
    Synthetic {
        dim: usize,
        spectrum: SyntheticSpectrum,
        #[serde(default)]
        nominal_singular: bool,
    },
    /// Text grid or binary grid file, relative to the config file.
    GridFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LatticeSpec {
    Integer {
        dim: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Hexagonal {
        #[serde(default = "one")]
        scale: f64,
    },
    /// Rows of the generator matrix T; Λ = Tℤ^d.
    Generator {
        rows: Vec<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Log,
    Gevrey { s: f64 },
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
    /// Two-column text table, relative to the config file.
    TableFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// (p!)^s
    Gevrey { s: f64, depth: usize },
    /// log M_p for p = 0, 1, ...
    LogValues { name: String, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeSpec {
    Roumieu,
    Beurling,
    /// `q = inf` selects the sup norm.
    FourierLebesgue {
        #[schemars(with = "Option<f64>", required)]
        q: f64,
        #[serde(default = "moderate_one")]
        v: ModerateSpec,
    },
    Quasianalytic {
        #[serde(default = "default_p_max")]
        p_max: usize,
        r_k: f64,
        r_w: f64,
    },
}

fn moderate_one() -> ModerateSpec {
    ModerateSpec::One
}

fn default_p_max() -> usize {
    12
}

fn default_half_angle() -> f64 {
    15.0
}

fn default_directions() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerSpec {
    pub mode: ModeSpec,
    #[serde(default = "default_half_angle")]
    pub half_angle_deg: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub keep_samples: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub x0: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PeriodicSpec {
    Constant {
        value: f64,
    },
    Harmonic {
        nu: Vec<f64>,
    },
    PeriodizedGaussian {
        center: Vec<f64>,
        width: f64,
    },
    /// Periodization of a window-shaped bump, optionally modulated by e^{2πi ν·x}.
    PeriodizedBump {
        center: Vec<f64>,
        #[serde(default)]
        window: WindowSpec,
        #[serde(default)]
        modulation: Option<Vec<f64>>,
    },
    PeriodizedDelta {
        center: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientRoute {
    Region,
    Window,
    Both,
}

fn default_fourier_radius() -> f64 {
    10.0
}
fn default_order() -> usize {
    64
}
fn default_panels() -> usize {
    4
}
fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub source: PeriodicSpec,
    #[serde(default = "default_fourier_radius")]
    pub radius: f64,
    #[serde(default = "default_route")]
    pub route: CoefficientRoute,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Classify coefficient growth against [weight].
    #[serde(default)]
    pub classify: bool,
    /// Coefficient radius of the Parseval sum; 4 × radius when absent.
    #[serde(default)]
    pub parseval_radius: Option<f64>,
}

fn default_route() -> CoefficientRoute {
    CoefficientRoute::Region
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsCheckSpec {
    pub dimension: usize,
    pub sample_radius: f64,
    pub samples: usize,
    pub depth: usize,
}

impl Default for WeightsCheckSpec {
    fn default() -> Self {
        Self { dimension: 2, sample_radius: 1024.0, samples: 2000, depth: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceSpec {
    pub omegas: Vec<WeightSpec>,
    pub directions: Vec<Vec<f64>>,
    pub radial_step: f64,
    pub angles: usize,
    /// Pass when |λ̂_lat − λ̂_cont| ≤ tolerance · max(λ̂_cont, lambda_floor).
    pub tolerance: f64,
    pub lambda_floor: f64,
}

impl Default for EquivalenceSpec {
    fn default() -> Self {
        Self {
            omegas: vec![WeightSpec::Log, WeightSpec::Gevrey { s: 2.0 }],
            directions: vec![vec![1.0, 0.0]],
            radial_step: 0.25,
            angles: 33,
            tolerance: 0.1,
            lambda_floor: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg_dir: Option<PathBuf>,
}

fn default_seed() -> u64 {
    20240607
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: Option<SourceSpec>,
    pub lattice: Option<LatticeSpec>,
    #[serde(default)]
    pub window: WindowSpec,
    pub weight: Option<WeightSpec>,
    pub sequence: Option<SequenceSpec>,
    pub analyzer: Option<AnalyzerSpec>,
    #[serde(default)]
    pub radii: Radii,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub seeds: Vec<Vec<f64>>,
    /// Analysis domain as one [lo, hi] interval per axis.
    pub domain: Option<Vec<[f64; 2]>>,
    pub pair: Option<PairSpec>,
    pub fourier: Option<FourierSpec>,
    pub weights_check: Option<WeightsCheckSpec>,
    pub equivalence: Option<EquivalenceSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "default_seed")]
    pub random_seed: u64,
    /// Worker threads; 0 keeps the pool default.
    #[serde(default)]
    pub workers: usize,
    /// Omit wall-clock timings so repeated runs are byte-identical.
    #[serde(default = "yes")]
    pub deterministic: bool,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn cfg_err(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Config { path: path.into(), message: e.to_string() }
}

fn missing(section: &str, command: &str) -> Error {
    cfg_err(section, format!("section is required by `{command}`"))
}

/// JSON schema for run configurations (TOML read as JSON; `q = inf` maps to null).
pub fn config_schema() -> Value {
    serde_json::to_value(schemars::schema_for!(RunConfig)).expect("schema serializes")
}

/// The schema every emitted report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        cfg_err(if path.is_empty() { "." } else { &path }, inner.message())
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

fn canonical(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<&String, Value> = m.iter().map(|(k, v)| (k, canonical(v))).collect();
            Value::Object(sorted.into_iter().map(|(k, v)| (k.clone(), v)).collect())
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        _ => v.clone(),
    }
}

impl RunConfig {
    pub fn echo(&self) -> Value {
        canonical(&serde_json::to_value(self).expect("config serializes"))
    }

    /// SHA-256 of the canonical JSON form (sorted keys, output paths excluded).
    pub fn hash(&self) -> String {
        let mut v = self.echo();
        if let Value::Object(m) = &mut v {
            m.remove("output");
            m.remove("workers");
        }
        hex::encode(Sha256::digest(serde_json::to_string(&v).expect("json").as_bytes()))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn build_lattice(&self) -> Result<Lattice> {
        let spec = self.lattice.as_ref().ok_or_else(|| cfg_err("lattice", "missing lattice section"))?;
        let (l, scale) = match spec {
            LatticeSpec::Integer { dim, scale } => {
                if *dim == 0 {
                    return Err(cfg_err("lattice.dim", "dimension must be positive"));
                }
                (Lattice::integer(*dim), *scale)
            }
            LatticeSpec::Hexagonal { scale } => (Lattice::hexagonal(), *scale),
            LatticeSpec::Generator { rows, scale } => (Lattice::from_rows(rows)?, *scale),
        };
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(cfg_err("lattice.scale", "scale must be positive"));
        }
        if scale == 1.0 {
            Ok(l)
        } else {
            l.scaled(scale)
        }
    }

    pub fn build_source(&self) -> Result<TestDistribution> {
        let spec = self.source.as_ref().ok_or_else(|| cfg_err("source", "missing source section"))?;
        let f = match spec.clone() {
            SourceSpec::Delta { center } => TestDistribution::Delta { center },
            SourceSpec::PlaneJump { normal, offset } => TestDistribution::PlaneJump { normal, offset },
            SourceSpec::Gaussian { center, width } => TestDistribution::Gaussian { center, width },
            SourceSpec::Synthetic { dim, spectrum, nominal_singular } => {
                TestDistribution::Synthetic { dim, spectrum, nominal_singular }
            }
            SourceSpec::GridFile { path } => {
                let p = self.resolve(&path);
                let bytes = std::fs::read(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                let grid = if bytes.starts_with(b"WFGRID1\n") {
                    GridData::parse_binary(&bytes)?
                } else {
                    GridData::parse_text(&String::from_utf8_lossy(&bytes))?
                };
                TestDistribution::GridSamples(grid)
            }
        };
        f.validate().map_err(|e| cfg_err("source", e))?;
        Ok(f)
    }

    pub fn build_weight(&self) -> Result<WeightFunction> {
        let spec = self.weight.as_ref().ok_or_else(|| cfg_err("weight", "missing weight section"))?;
        build_weight(spec, self)
    }

    pub fn build_sequence(&self) -> Result<WeightSequence> {
        match &self.sequence {
            None => Err(cfg_err("sequence", "missing sequence section")),
            Some(SequenceSpec::Gevrey { s, depth }) => WeightSequence::gevrey(*s, *depth).map_err(|e| cfg_err("sequence", e)),
            Some(SequenceSpec::LogValues { name, values }) => {
                WeightSequence::from_log_values(name, values.clone()).map_err(|e| cfg_err("sequence.values", e))
            }
        }
    }

    pub fn build_window(&self, dim: usize) -> Result<Window> {
        Window::new(self.window.clone(), dim).map_err(|e| cfg_err("window", e))
    }

    pub fn build_analyzer(&self, command: &str, dim: usize) -> Result<AnalyzerConfig> {
        let spec = self.analyzer.as_ref().ok_or_else(|| missing("analyzer", command))?;
        let analyzer = match &spec.mode {
            ModeSpec::Roumieu => Analyzer::Roumieu(self.build_weight()?),
            ModeSpec::Beurling => Analyzer::Beurling(self.build_weight()?),
            ModeSpec::FourierLebesgue { q, v } => {
                if !(*q >= 1.0) {
                    return Err(cfg_err("analyzer.mode.q", "q must be >= 1 or inf"));
                }
                let omega = match &self.weight {
                    Some(w) => build_weight(w, self)?,
                    None => WeightFunction::log(),
                };
                let weight = ModerateWeight::new(v.clone(), omega).map_err(|e| cfg_err("analyzer.mode.v", e))?;
                Analyzer::FourierLebesgue { weight, q: q.is_finite().then_some(*q) }
            }
            ModeSpec::Quasianalytic { p_max, r_k, r_w } => {
                let sequence = self.build_sequence()?;
                let family = CutoffFamily::new(&vec![0.0; dim], *r_k, *r_w, *p_max, &sequence)
                    .map_err(|e| cfg_err("analyzer.mode", e))?;
                Analyzer::Quasianalytic { sequence, family: Arc::new(family), p_max: *p_max }
            }
        };
        if !(spec.half_angle_deg > 0.0 && spec.half_angle_deg <= 90.0) {
            return Err(cfg_err("analyzer.half_angle_deg", "half-angle must lie in (0, 90]"));
        }
        self.radii.validate().map_err(|e| cfg_err("radii", e))?;
        Ok(AnalyzerConfig {
            analyzer,
            half_angle: spec.half_angle_deg.to_radians(),
            radii: self.radii,
            thresholds: self.thresholds,
            domain: self.domain.as_ref().map(|d| d.iter().map(|[a, b]| (*a, *b)).collect()),
            keep_samples: spec.keep_samples || self.output.csv.is_some(),
        })
    }
}

fn build_weight(spec: &WeightSpec, cfg: &RunConfig) -> Result<WeightFunction> {
    match spec {
        WeightSpec::Log => Ok(WeightFunction::log()),
        WeightSpec::Gevrey { s } => WeightFunction::gevrey(*s).map_err(|e| cfg_err("weight.s", e)),
        WeightSpec::Tabulated { radii, values } => {
            WeightFunction::tabulated(radii.clone(), values.clone()).map_err(|e| cfg_err("weight", e))
        }
        WeightSpec::TableFile { path } => {
            let p = cfg.resolve(path);
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            WeightFunction::parse_table(&text).map_err(|e| cfg_err("weight.path", e))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    WeightsCheck,
    LatticeInfo,
    FourierSeries,
    Analyze,
    Wavefront,
    Equivalence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::WeightsCheck => "weights-check",
            Command::LatticeInfo => "lattice-info",
            Command::FourierSeries => "fourier-series",
            Command::Analyze => "analyze",
            Command::Wavefront => "wavefront",
            Command::Equivalence => "equivalence",
        }
    }
}

/// JSON report plus the side artifacts (path, contents) a command produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub json: Value,
    pub artifacts: Vec<(PathBuf, String)>,
}

impl RunReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.json).expect("json") + "\n"
    }

    /// Writes the JSON report (when a path is configured) and every artifact.
    pub fn write(&self, cfg: &RunConfig) -> Result<()> {
        let io = |p: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
        let mut files = self.artifacts.clone();
        if let Some(p) = &cfg.output.json {
            files.push((cfg.resolve(p), self.to_json_string()));
        }
        for (p, body) in &files {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
                }
            }
            std::fs::write(p, body).map_err(|e| io(p, e))?;
        }
        Ok(())
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<RunReport> {
    let go = || {
        let t = Instant::now();
        let mut report = match command {
            Command::WeightsCheck => cmd_weights_check(cfg),
            Command::LatticeInfo => cmd_lattice_info(cfg),
            Command::FourierSeries => cmd_fourier_series(cfg),
            Command::Analyze => cmd_analyze(cfg),
            Command::Wavefront => cmd_wavefront(cfg),
            Command::Equivalence => cmd_equivalence(cfg),
        }?;
        if let Value::Object(m) = &mut report.json {
            m.insert("tool".into(), json!("wfsample"));
            m.insert("version".into(), json!(TOOL_VERSION));
            m.insert("command".into(), json!(command.name()));
            m.insert("config_hash".into(), json!(cfg.hash()));
            m.insert("config".into(), cfg.echo());
            if !cfg.deterministic {
                m.insert("timings".into(), json!({ "wall_seconds": t.elapsed().as_secs_f64() }));
            }
        }
        Ok(report)
    };
    if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| cfg_err("workers", e))?;
        pool.install(go)
    } else {
        go()
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

pub fn cmd_weights_check(cfg: &RunConfig) -> Result<RunReport> {
    if cfg.weight.is_none() && cfg.sequence.is_none() {
        return Err(cfg_err("weight", "weights-check needs a [weight] or a [sequence] section"));
    }
    let spec = cfg.weights_check.clone().unwrap_or_default();
    let mut out = serde_json::Map::new();
    if cfg.weight.is_some() {
        let w = cfg.build_weight()?;
        let rep = check_weight_conditions(&w, spec.dimension, spec.sample_radius, spec.samples, cfg.random_seed)?;
        out.insert("weight".into(), json!({ "label": weight_label(&w), "gamma": w.gamma, "report": to_value(&rep) }));
    }
    if cfg.sequence.is_some() {
        let m = cfg.build_sequence()?;
        let depth = spec.depth.min(m.depth());
        let rep = check_sequence_conditions(&m, depth)?;
        out.insert("sequence".into(), to_value(&rep));
    }
    Ok(RunReport { json: Value::Object(out), artifacts: vec![] })
}

fn lattice_json(l: &Lattice) -> Value {
    json!({
        "dim": l.dim(),
        "generator_rows": l.generator_rows(),
        "covolume": l.covolume(),
        "dual_generator_rows": l.dual().generator_rows(),
    })
}

pub fn cmd_lattice_info(cfg: &RunConfig) -> Result<RunReport> {
    let l = cfg.build_lattice()?;
    let w = cfg.build_window(l.dim())?;
    let sv = shortest_vector(&l)?;
    let sd = shortest_vector(&l.dual())?;
    let sep = check_separation(&l, w.support_radius())?;
    Ok(RunReport {
        json: json!({
            "lattice": lattice_json(&l),
            "shortest": to_value(&sv),
            "shortest_dual": to_value(&sd),
            "window": { "spec": to_value(&cfg.window), "support_radius": w.support_radius() },
            "separation": to_value(&sep),
        }),
        artifacts: vec![],
    })
}

fn build_periodic(spec: &PeriodicSpec, dim: usize) -> Result<PeriodicSource> {
    Ok(match spec.clone() {
        PeriodicSpec::Constant { value } => PeriodicSource::Constant(value),
        PeriodicSpec::Harmonic { nu } => PeriodicSource::Harmonic { nu },
        PeriodicSpec::PeriodizedGaussian { center, width } => PeriodicSource::PeriodizedGaussian { center, width },
        PeriodicSpec::PeriodizedBump { center, window, modulation } => {
            let w = Window::new(window, dim).map_err(|e| cfg_err("fourier.source.window", e))?;
            PeriodicSource::Periodized(CompactSource::new(w.taper, center, modulation)?)
        }
        PeriodicSpec::PeriodizedDelta { center } => PeriodicSource::PeriodizedDelta { center },
    })
}

/// max_k |a_k − b_k| / max_k |a_k| over a common index set.
pub fn route_delta(a: &FourierCoefficients, b: &FourierCoefficients) -> f64 {
    let scale = a.max_modulus().max(f64::MIN_POSITIVE);
    a.points
        .iter()
        .zip(&a.values)
        .filter_map(|(p, v)| b.get(&p.k).map(|w| (v - w).norm() / scale))
        .fold(0.0, f64::max)
}

pub fn cmd_fourier_series(cfg: &RunConfig) -> Result<RunReport> {
    let spec = cfg.fourier.as_ref().ok_or_else(|| missing("fourier", "fourier-series"))?;
    let l = cfg.build_lattice()?;
    let src = build_periodic(&spec.source, l.dim())?;
    let mut quad = RegionQuadrature::new(spec.order, l.dim());
    quad.panels = spec.panels;
    quad.tolerance = spec.tolerance;
    let region = matches!(spec.route, CoefficientRoute::Region | CoefficientRoute::Both)
        .then(|| coefficients_by_region(&src, &l, spec.radius, &quad))
        .transpose()?;
    let window = matches!(spec.route, CoefficientRoute::Window | CoefficientRoute::Both)
        .then(|| coefficients_by_window(&src, &l, spec.radius))
        .transpose()?;
    let main = region.as_ref().or(window.as_ref()).expect("one route ran");
    let mut out = json!({
        "lattice": lattice_json(&l),
        "route": spec.route,
        "radius": spec.radius,
        "count": main.points.len(),
        "max_modulus": main.max_modulus(),
        "quadrature_error": main.quadrature_error,
    });
    if let (Some(a), Some(b)) = (&region, &window) {
        out["route_delta"] = json!(route_delta(a, b));
    }
    if !matches!(src, PeriodicSource::PeriodizedDelta { .. }) {
        // the closed-form route reaches far enough out for the tail to vanish
        let pr = spec.parseval_radius.unwrap_or(4.0 * spec.radius);
        let wide = match src {
            PeriodicSource::Periodized(_) => coefficients_by_window(&src, &l, pr)?,
            _ => main.clone(),
        };
        out["parseval"] = to_value(&parseval_check(&src, &wide, &quad)?);
    }
    if spec.classify {
        let w = cfg.build_weight()?;
        out["growth"] = to_value(&classify_growth(main, &w, GrowthThresholds::default())?);
    }
    let artifacts = match &cfg.output.csv {
        Some(p) => vec![(cfg.resolve(p), main.to_csv())],
        None => vec![],
    };
    Ok(RunReport { json: out, artifacts })
}

fn analyzer_json(spec: &AnalyzerSpec, a: &AnalyzerConfig) -> Value {
    json!({
        "mode": to_value(&spec.mode),
        "label": match &a.analyzer {
            Analyzer::Roumieu(w) => format!("roumieu {}", weight_label(w)),
            Analyzer::Beurling(w) => format!("beurling {}", weight_label(w)),
            Analyzer::FourierLebesgue { weight, q } => format!("fourier-lebesgue q={} v={}", q.map_or("inf".to_string(), |q| q.to_string()), weight.label()),
            Analyzer::Quasianalytic { sequence, p_max, .. } => format!("quasianalytic {} p<={p_max}", sequence.name),
        },
        "half_angle": a.half_angle,
        "radii": to_value(&a.radii),
        "thresholds": to_value(&a.thresholds),
        "support_radius": Value::Null,
    })
}

fn samples_csv(pairs: &[PairVerdict]) -> String {
    let mut s = String::from("seed,theta,mu,norm,shell,log_modulus\n");
    for p in pairs {
        for d in &p.samples {
            let mu: Vec<String> = d.point.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "{},{},{},{},{},{}", p.seed, p.theta, mu.join(" "), d.norm, d.shell, d.log_modulus);
        }
    }
    s
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<RunReport> {
    let pair = cfg.pair.as_ref().ok_or_else(|| missing("pair", "analyze"))?;
    let l = cfg.build_lattice()?;
    let f = cfg.build_source()?;
    let d = l.dim();
    if pair.x0.len() != d || pair.direction.len() != d || !(norm(&pair.direction) > 0.0) {
        return Err(cfg_err("pair", "x0 and direction need the lattice dimension and a nonzero direction"));
    }
    let w = cfg.build_window(d)?;
    let spec = cfg.analyzer.as_ref().ok_or_else(|| missing("analyzer", "analyze"))?;
    let mut a = cfg.build_analyzer("analyze", d)?;
    a.keep_samples = true;
    crate::lattice::require_separation(&l, a.support_radius(&w))?;
    let dir: Vec<f64> = pair.direction.iter().map(|v| v / norm(&pair.direction)).collect();
    let res = analyze_seed(&f, 0, &pair.x0, std::slice::from_ref(&dir), &a, &l, &w)?;
    let mut aj = analyzer_json(spec, &a);
    aj["support_radius"] = json!(a.support_radius(&w));
    let mut out = json!({
        "lattice": lattice_json(&l),
        "window": { "spec": to_value(&cfg.window), "support_radius": w.support_radius() },
        "analyzer": aj,
        "pairs": to_value(&res),
    });
    // shell maxima for the λ-modes, handy for plotting
    if let Analyzer::Roumieu(om) | Analyzer::Beurling(om) = &a.analyzer {
        let s: Vec<(f64, f64)> = res[0].samples.iter().map(|x| (x.norm, x.log_modulus)).collect();
        let fl: Vec<(f64, f64)> = res[0].samples.iter().map(|x| (x.norm, w.taper.spectrum(&x.point).abs().ln())).collect();
        let la = decide_lambda(&s, Some(&fl), om, &a.radii, &a.thresholds)?;
        out["shells"] = to_value(&la.shells);
        out["local_slopes"] = to_value(&la.local_slopes);
    }
    let artifacts = match &cfg.output.csv {
        Some(p) => vec![(cfg.resolve(p), samples_csv(&res))],
        None => vec![],
    };
    Ok(RunReport { json: out, artifacts })
}

pub fn cmd_wavefront(cfg: &RunConfig) -> Result<RunReport> {
    let l = cfg.build_lattice()?;
    let f = cfg.build_source()?;
    let d = l.dim();
    let w = cfg.build_window(d)?;
    let spec = cfg.analyzer.as_ref().ok_or_else(|| missing("analyzer", "wavefront"))?;
    let a = cfg.build_analyzer("wavefront", d)?;
    if cfg.seeds.is_empty() {
        return Err(cfg_err("seeds", "wavefront needs at least one seed point"));
    }
    let est = estimate_wavefront(&f, &cfg.seeds, spec.directions, &a, &l, &w)?;
    let mut aj = analyzer_json(spec, &a);
    aj["support_radius"] = json!(a.support_radius(&w));
    let out = json!({
        "lattice": lattice_json(&l),
        "window": { "spec": to_value(&cfg.window), "support_radius": w.support_radius() },
        "analyzer": aj,
        "directions": est.directions,
        "max_gap": est.max_gap,
        "summary": {
            "pairs": est.pairs.len(),
            "singular": est.count(RegularityVerdict::Singular),
            "regular": est.count(RegularityVerdict::Regular),
            "indeterminate": est.count(RegularityVerdict::Indeterminate),
        },
        "pairs": to_value(&est.pairs),
    });
    let mut artifacts = Vec::new();
    if let Some(p) = &cfg.output.csv {
        artifacts.push((cfg.resolve(p), samples_csv(&est.pairs)));
    }
    if let Some(dir) = &cfg.output.svg_dir {
        for (i, _) in est.seeds.iter().enumerate() {
            artifacts.push((cfg.resolve(dir).join(format!("seed_{i}.svg")), polar_svg(&est, i)));
        }
    }
    Ok(RunReport { json: out, artifacts })
}

/// Polar plot of one seed: spoke length ∝ estimate, singular spokes in red, floor as a dashed circle.
pub fn polar_svg(est: &WaveFrontEstimate, seed: usize) -> String {
    let pairs: Vec<&PairVerdict> = est.pairs.iter().filter(|p| p.seed == seed).collect();
    let top = pairs
        .iter()
        .flat_map(|p| [p.result.estimate, p.result.floor])
        .flatten()
        .filter(|v| v.is_finite() && *v > 0.0)
        .fold(0.0, f64::max);
    let (c, r0, rmax) = (210.0, 12.0, 170.0);
    let scale = |v: f64| if top > 0.0 { r0 + (rmax - r0) * (v / top).clamp(0.0, 1.0) } else { r0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="420" height="440" viewBox="0 0 420 440" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="420" height="440" fill="white"/>"#);
    let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{rmax}" fill="none" stroke="#ddd"/>"##);
    let floors: Vec<f64> = pairs.iter().filter_map(|p| p.result.floor).filter(|v| v.is_finite()).collect();
    if !floors.is_empty() {
        let mean = floors.iter().sum::<f64>() / floors.len() as f64;
        let _ = writeln!(
            s,
            r##"<circle cx="{c}" cy="{c}" r="{:.2}" fill="none" stroke="#888" stroke-dasharray="4 3"/><text x="{:.2}" y="{:.2}" fill="#666">floor {:.3}</text>"##,
            scale(mean),
            c + 4.0,
            c - scale(mean) - 4.0,
            mean
        );
    }
    for p in &pairs {
        let len = p.result.estimate.filter(|v| v.is_finite()).map_or(r0, scale);
        let (color, width) = match p.result.verdict {
            RegularityVerdict::Singular => ("#c0392b", 3.0),
            RegularityVerdict::Regular => ("#2c7fb8", 1.5),
            RegularityVerdict::Indeterminate => ("#999999", 1.5),
        };
        let (dx, dy) = if p.direction.len() >= 2 {
            let n = norm(&p.direction[..2]).max(f64::MIN_POSITIVE);
            (p.direction[0] / n, p.direction[1] / n)
        } else {
            (p.direction[0].signum(), 0.0)
        };
        let _ = writeln!(
            s,
            r#"<line x1="{c}" y1="{c}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="{width}"/>"#,
            c + len * dx,
            c - len * dy
        );
    }
    let x0: Vec<String> = est.seeds[seed].iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(s, r#"<text x="10" y="420">seed ({}), red = singular</text>"#, x0.join(", "));
    s.push_str("</svg>\n");
    s
}

/// (|ξ|, log|value|) pairs.
type RadialLogs = Vec<(f64, f64)>;

pub fn cmd_equivalence(cfg: &RunConfig) -> Result<RunReport> {
    let l = cfg.build_lattice()?;
    let f = cfg.build_source()?;
    let d = l.dim();
    let w = cfg.build_window(d)?;
    let spec = cfg.equivalence.clone().unwrap_or_default();
    let half = cfg.analyzer.as_ref().map_or(default_half_angle(), |a| a.half_angle_deg).to_radians();
    let omegas = spec.omegas.iter().map(|s| build_weight(s, cfg)).collect::<Result<Vec<_>>>()?;
    let seeds = if cfg.seeds.is_empty() { vec![vec![0.0; d]] } else { cfg.seeds.clone() };
    cfg.radii.validate().map_err(|e| cfg_err("radii", e))?;
    crate::lattice::require_separation(&l, w.support_radius())?;
    let cont = Sampling::Continuous { radial_step: spec.radial_step, angles: spec.angles };
    let lat = Sampling::Lattice(l.clone());
    let mut rows = Vec::new();
    let mut max_delta: f64 = 0.0;
    let mut all_pass = true;
    for x0 in &seeds {
        let ls = LocalizedSpectrum::new(&f, &w.taper, x0)?;
        for dir in &spec.directions {
            let cone = Cone::new(dir, half).map_err(|e| cfg_err("equivalence.directions", e))?;
            let eval = |s: &Sampling| -> Result<(RadialLogs, RadialLogs)> {
                let pts = s.points(&cone, cfg.radii.r_min, cfg.radii.r_max)?;
                let vals = ls.eval_many(&pts)?;
                let a = pts.iter().zip(&vals).map(|(p, v)| (norm(p), v.norm().ln())).collect();
                let b = pts.iter().map(|p| (norm(p), w.taper.spectrum(p).abs().ln())).collect();
                Ok((a, b))
            };
            let (ls_lat, fl_lat) = eval(&lat)?;
            let (ls_cont, fl_cont) = eval(&cont)?;
            for om in &omegas {
                let a = decide_lambda(&ls_lat, Some(&fl_lat), om, &cfg.radii, &cfg.thresholds)?;
                let b = decide_lambda(&ls_cont, Some(&fl_cont), om, &cfg.radii, &cfg.thresholds)?;
                let (x, y) = (a.roumieu.estimate.unwrap_or(0.0), b.roumieu.estimate.unwrap_or(0.0));
                let delta = (x - y).abs();
                let tol = spec.tolerance * y.max(spec.lambda_floor);
                let pass = delta <= tol;
                max_delta = max_delta.max(delta);
                all_pass &= pass;
                rows.push(json!({
                    "x0": x0, "direction": dir, "omega": weight_label(om),
                    "lambda_lattice": x, "lambda_continuous": y,
                    "verdict_lattice": a.roumieu.verdict, "verdict_continuous": b.roumieu.verdict,
                    "delta": delta, "tolerance": tol, "pass": pass,
                }));
            }
        }
    }
    Ok(RunReport {
        json: json!({
            "lattice": lattice_json(&l),
            "window": { "spec": to_value(&cfg.window), "support_radius": w.support_radius() },
            "pairs": rows,
            "max_delta": max_delta,
            "pass": all_pass,
        }),
        artifacts: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_names_its_path() {
        let e = parse_config("[lattice]\nkind = \"integer\"\ndim = 2\nfoo = 1\n").unwrap_err();
        match e {
            Error::Config { path, .. } => assert_eq!(path, "lattice"),
            other => panic!("{other:?}"),
        }
        let e = parse_config("[weight]\nkind = \"gevery\"\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("weight"), "{e}");
    }

    #[test]
    fn hash_ignores_key_order_and_outputs() {
        let a = parse_config("seeds = [[0.0, 0.0]]\n[lattice]\nkind = \"hexagonal\"\n[output]\njson = \"a.json\"\n").unwrap();
        let b = parse_config("[lattice]\nscale = 1.0\nkind = \"hexagonal\"\n").unwrap();
        let mut b = b;
        b.seeds = vec![vec![0.0, 0.0]];
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
