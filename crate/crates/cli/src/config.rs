//! Run configuration files.
//!
//! ```toml
//! seed = 42
//!
//! [[scenario]]
//! id = "sphere-h"
//! target = "support_flow"
//! [scenario.config]
//! speed = "H"
//! geometry = "axisymmetric"
//! initial = { shape = "sphere", radius = 1.0 }
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use curvlab::entropy_gcf::GcfRunConfig;
use curvlab::mesh_flow::{MeshFixture, MeshRunConfig, MeshScheme};
use curvlab::speed_functions::{builtin, SpeedFunction};
use curvlab::support_flow::{FlowRunConfig, Geometry, InitialShape, MonitorSet};
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default)]
    pub seed: u64,
    /// Samples per case for sampling campaigns.
    pub samples: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<String>,
    #[serde(default)]
    pub scenario: Vec<ScenarioSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    SupportFlow,
    EntropyGcf,
    MeshFlow,
    CurvatureAlgebra,
    Acceptance,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::SupportFlow => "support_flow",
            Target::EntropyGcf => "entropy_gcf",
            Target::MeshFlow => "mesh_flow",
            Target::CurvatureAlgebra => "curvature_algebra",
            Target::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: Spanned<String>,
    pub target: Target,
    pub seed: Option<u64>,
    /// Output subdirectory, defaults to the id.
    pub out: Option<String>,
    #[serde(default = "empty_table")]
    pub config: Spanned<toml::Table>,
}

fn empty_table() -> Spanned<toml::Table> {
    Spanned::new(0..0, toml::Table::new())
}

/// `speed = "H"` or `speed = { name = "H^a", power = 2 }`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpeedSpec {
    Name(String),
    Table(SpeedTable),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedTable {
    pub name: String,
    pub power: Option<f64>,
    pub k: Option<usize>,
    #[serde(default = "yes")]
    pub normalized: bool,
}

fn yes() -> bool {
    true
}

impl SpeedSpec {
    pub fn build(&self, n: usize) -> curvlab::Result<SpeedFunction> {
        let (name, power, k, normalized) = match self {
            SpeedSpec::Name(name) => (name.as_str(), None, None, true),
            SpeedSpec::Table(t) => (t.name.as_str(), t.power, t.k, t.normalized),
        };
        let f = builtin(name, n, power, k)?;
        if normalized {
            f.normalize()
        } else {
            Ok(f)
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportFlowSpec {
    pub speed: SpeedSpec,
    pub geometry: Geometry,
    pub initial: InitialShape,
    #[serde(default = "n256")]
    pub n_grid: usize,
    #[serde(default = "safety02")]
    pub dt_safety: f64,
    #[serde(default = "stop005")]
    pub stop_inradius: f64,
    pub t_max: Option<f64>,
    #[serde(default = "max_steps")]
    pub max_steps: usize,
    #[serde(default = "every50")]
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub monitors: MonitorSet,
}

fn n256() -> usize {
    256
}
fn n128() -> usize {
    128
}
fn safety02() -> f64 {
    0.2
}
fn stop005() -> f64 {
    0.05
}
fn max_steps() -> usize {
    10_000_000
}
fn every50() -> usize {
    50
}

impl SupportFlowSpec {
    pub fn build(&self, seed: u64) -> curvlab::Result<FlowRunConfig> {
        let speed = self.speed.build(self.geometry.dim())?;
        let mut cfg = FlowRunConfig::new(speed, self.geometry, self.initial.clone());
        cfg.n_grid = self.n_grid;
        cfg.dt_safety = self.dt_safety;
        cfg.stop_inradius = self.stop_inradius;
        cfg.t_max = self.t_max;
        cfg.max_steps = self.max_steps;
        cfg.record_every = self.record_every;
        cfg.snapshot_every = self.snapshot_every;
        cfg.monitors = self.monitors.clone();
        cfg.seed = seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySpec {
    #[serde(default = "planar")]
    pub geometry: Geometry,
    pub initial: InitialShape,
    pub beta: f64,
    pub tau_max: f64,
    #[serde(default = "n128")]
    pub n_grid: usize,
    #[serde(default = "safety02")]
    pub dtau_safety: f64,
    #[serde(default = "every50")]
    pub record_every: usize,
    /// Permits `β` below the soliton threshold.
    #[serde(default)]
    pub research: bool,
}

fn planar() -> Geometry {
    Geometry::Planar
}

impl EntropySpec {
    pub fn build(&self, seed: u64) -> curvlab::Result<GcfRunConfig> {
        let mut cfg = GcfRunConfig::new(self.geometry, self.initial.clone(), self.beta, self.tau_max);
        cfg.n_grid = self.n_grid;
        cfg.dtau_safety = self.dtau_safety;
        cfg.record_every = self.record_every;
        cfg.research = self.research;
        cfg.seed = seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub mesh: MeshFixture,
    #[serde(default = "explicit")]
    pub scheme: MeshScheme,
    #[serde(default = "safety05")]
    pub dt_safety: f64,
    #[serde(default = "half")]
    pub stop_radius_fraction: f64,
    pub t_max: Option<f64>,
    #[serde(default = "max_steps")]
    pub max_steps: usize,
    #[serde(default = "every25")]
    pub record_every: usize,
    #[serde(default = "sigma01")]
    pub sigma: f64,
    #[serde(default = "p30")]
    pub p: f64,
    #[serde(default = "two_thirds")]
    pub c0: f64,
    pub snapshot_every: Option<usize>,
}

fn explicit() -> MeshScheme {
    MeshScheme::Explicit
}
fn safety05() -> f64 {
    0.5
}
fn half() -> f64 {
    0.5
}
fn every25() -> usize {
    25
}
fn sigma01() -> f64 {
    0.1
}
fn p30() -> f64 {
    30.0
}
fn two_thirds() -> f64 {
    2.0 / 3.0
}

impl MeshSpec {
    pub fn build(&self) -> curvlab::Result<MeshRunConfig> {
        let mut cfg = MeshRunConfig::new(self.mesh.clone());
        cfg.scheme = self.scheme;
        cfg.dt_safety = self.dt_safety;
        cfg.stop_radius_fraction = self.stop_radius_fraction;
        cfg.t_max = self.t_max;
        cfg.max_steps = self.max_steps;
        cfg.record_every = self.record_every;
        cfg.sigma = self.sigma;
        cfg.p = self.p;
        cfg.c0 = self.c0;
        cfg.snapshot_every = self.snapshot_every;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub suite: String,
    pub samples: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceSpec {
    pub name: String,
    pub samples: Option<u64>,
}

/// A scenario with its target-specific configuration parsed.
#[derive(Debug, Clone)]
pub enum TargetConfig {
    SupportFlow(SupportFlowSpec),
    EntropyGcf(EntropySpec),
    MeshFlow(MeshSpec),
    CurvatureAlgebra(CampaignSpec),
    Acceptance(AcceptanceSpec),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub target: Target,
    pub seed: u64,
    pub out: String,
    pub config: TargetConfig,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub seed: u64,
    pub samples: u64,
    pub threads: Option<usize>,
    pub out: Option<String>,
    pub scenarios: Vec<Scenario>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key =` at or after `from` for a message naming
/// an unknown field.
fn key_line(text: &str, from: usize, message: &str) -> Option<usize> {
    let key = message.strip_prefix("unknown field `")?.split('`').next()?;
    let from = from.min(text.len());
    let mut search = from;
    while let Some(i) = text[search..].find(key) {
        let at = search + i;
        if text[at + key.len()..].trim_start_matches([' ', '\t']).starts_with('=') {
            return Some(line_of(text, at));
        }
        search = at + key.len();
    }
    None
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')) && id != "." && id != ".."
}

fn typed<T: serde::de::DeserializeOwned>(table: &toml::Table) -> Result<T, toml::de::Error> {
    toml::Table::try_into(table.clone())
}

/// Parses and validates a run file. Errors name the offending key and line.
pub fn parse(text: &str) -> anyhow::Result<Plan> {
    let file: RunFile = toml::from_str(text).map_err(|e| anyhow!("config: {e}"))?;
    let mut seen = BTreeSet::new();
    let samples = file.samples.unwrap_or(1_000_000);
    if samples == 0 {
        bail!("config: key `samples` must be positive");
    }
    let mut scenarios = Vec::new();
    for spec in file.scenario {
        let id = spec.id.get_ref().clone();
        let line = line_of(text, spec.id.span().start);
        if !valid_id(&id) {
            bail!("config line {line}: key `id`: `{id}` must be nonempty and use only letters, digits, `-`, `_`, `.`");
        }
        if !seen.insert(id.clone()) {
            bail!("config line {line}: key `id`: duplicate scenario id `{id}`");
        }
        let table = spec.config.get_ref();
        let cfg_line = if spec.config.span().is_empty() { line } else { line_of(text, spec.config.span().start) };
        let wrap = |e: toml::de::Error| {
            let at = key_line(text, spec.config.span().start, e.message()).unwrap_or(cfg_line);
            anyhow!("config line {at}: scenario `{id}`: key `config`: {}", e.message())
        };
        let config = match spec.target {
            Target::SupportFlow => TargetConfig::SupportFlow(typed(table).map_err(wrap)?),
            Target::EntropyGcf => TargetConfig::EntropyGcf(typed(table).map_err(wrap)?),
            Target::MeshFlow => TargetConfig::MeshFlow(typed(table).map_err(wrap)?),
            Target::CurvatureAlgebra => TargetConfig::CurvatureAlgebra(typed(table).map_err(wrap)?),
            Target::Acceptance => TargetConfig::Acceptance(typed(table).map_err(wrap)?),
        };
        let seed = spec.seed.unwrap_or_else(|| curvlab::seeding::derive_seed(file.seed, &id, 0));
        let out = spec.out.clone().unwrap_or_else(|| id.clone());
        if !valid_id(&out) {
            bail!("config line {line}: scenario `{id}`: key `out`: `{out}` is not a plain directory name");
        }
        scenarios.push(Scenario { id, target: spec.target, seed, out, config });
    }
    if scenarios.is_empty() {
        bail!("config: no [[scenario]] entries");
    }
    Ok(Plan { seed: file.seed, samples, threads: file.threads, out: file.out, scenarios })
}

pub fn load(path: &Path) -> anyhow::Result<Plan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text)
}
