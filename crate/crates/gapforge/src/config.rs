//! Experiment configuration: JSON schema, flag overrides and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gapforge_core::lattice::{build_box_lattice, build_chain, build_honeycomb, build_rect_lattice, Boundary, Graph};
use gapforge_core::operators::{DEFAULT_DENSE_CAP, DEFAULT_STATE_CAP};
use gapforge_core::sampler::{good_projectors_for, SampleMode};
use gapforge_core::spectra::DEFAULT_KERNEL_TOL;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {name}: {lhs} {relation} {rhs} does not hold")]
    Inequality { name: String, lhs: String, relation: &'static str, rhs: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("invalid configuration: {0}")]
    Core(#[from] gapforge_core::Error),
}

fn inequality(name: &str, lhs: impl fmt::Display, relation: &'static str, rhs: impl fmt::Display) -> ConfigError {
    ConfigError::Inequality { name: name.into(), lhs: lhs.to_string(), relation, rhs: rhs.to_string() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Box,
    Honeycomb,
    Chain1d,
}

impl FromStr for FamilyKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "box" => Ok(FamilyKind::Box),
            "honeycomb" => Ok(FamilyKind::Honeycomb),
            "chain1d" | "chain" => Ok(FamilyKind::Chain1d),
            other => Err(ConfigError::Invalid(format!("unknown family {other:?} (box, honeycomb, chain1d)"))),
        }
    }
}

/// Requested per-trial checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Certify,
    ExactGap,
    FfExact,
    Qsat,
    KnabeSubgraphs,
    Entropy,
}

/// Sampling mode written as `haar`, `good` or `cap:<eps>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModeSpec(pub SampleMode);

impl Default for ModeSpec {
    fn default() -> Self {
        ModeSpec(SampleMode::Haar)
    }
}

impl FromStr for ModeSpec {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "haar" => Ok(ModeSpec(SampleMode::Haar)),
            "good" => Ok(ModeSpec(SampleMode::Good)),
            _ => {
                let eps = s
                    .strip_prefix("cap:")
                    .and_then(|e| e.parse::<f64>().ok())
                    .ok_or_else(|| ConfigError::Invalid(format!("unknown mode {s:?} (haar, good, cap:<eps>)")))?;
                Ok(ModeSpec(SampleMode::Cap { eps }))
            }
        }
    }
}

impl TryFrom<String> for ModeSpec {
    type Error = ConfigError;
    fn try_from(s: String) -> Result<Self, ConfigError> {
        s.parse()
    }
}

impl From<ModeSpec> for String {
    fn from(m: ModeSpec) -> String {
        m.to_string()
    }
}

impl fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SampleMode::Haar => f.write_str("haar"),
            SampleMode::Good => f.write_str("good"),
            SampleMode::Cap { eps } => write!(f, "cap:{eps}"),
        }
    }
}

fn one() -> usize {
    1
}

fn default_kernel_tol() -> f64 {
    DEFAULT_KERNEL_TOL
}

fn default_checks() -> BTreeSet<Check> {
    BTreeSet::from([Check::Certify])
}

/// One experiment. `L` is the half side for boxes, the cell count for the
/// honeycomb and the number of sites for chains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyKind,
    #[serde(rename = "D", default = "one")]
    pub dim: usize,
    #[serde(rename = "L", default = "one")]
    pub size: usize,
    /// Explicit box side lengths; overrides `D` and `L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<usize>>,
    pub d: usize,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_checks")]
    pub checks: BTreeSet<Check>,
    /// Largest connected subgraph audited by `knabe-subgraphs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_subgraph_sites: Option<usize>,
    #[serde(default = "default_kernel_tol")]
    pub kernel_tol: f64,
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

/// Command-line overrides, applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub family: Option<FamilyKind>,
    pub dim: Option<usize>,
    pub size: Option<usize>,
    pub d: Option<usize>,
    pub r: Option<usize>,
    pub boundary: Option<Boundary>,
    pub mode: Option<ModeSpec>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(family: FamilyKind, dim: usize, size: usize, d: usize, r: usize) -> Self {
        ExperimentConfig {
            family,
            dim,
            size,
            sides: None,
            d,
            r,
            boundary: None,
            mode: ModeSpec::default(),
            trials: 1,
            seed: 0,
            checks: default_checks(),
            max_subgraph_sites: None,
            kernel_tol: DEFAULT_KERNEL_TOL,
            out: None,
            threads: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident <- $src:ident),*) => {$(
                if let Some(v) = o.$src.clone() {
                    self.$field = v;
                }
            )*};
        }
        set!(family <- family, dim <- dim, size <- size, d <- d, r <- r, mode <- mode, trials <- trials, seed <- seed);
        if o.dim.is_some() || o.size.is_some() {
            self.sides = None;
        }
        if o.boundary.is_some() {
            self.boundary = o.boundary;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
    }

    pub fn with_mode(mut self, mode: SampleMode) -> Self {
        self.mode = ModeSpec(mode);
        self
    }

    pub fn with_checks(mut self, checks: &[Check]) -> Self {
        self.checks = checks.iter().copied().collect();
        self
    }

    pub fn boundary_or_default(&self) -> Boundary {
        self.boundary.unwrap_or(match self.family {
            FamilyKind::Chain1d => Boundary::Open,
            _ => Boundary::Periodic,
        })
    }

    pub fn max_subgraph_sites_or_default(&self, g: &Graph) -> usize {
        let fit = (DEFAULT_DENSE_CAP as f64).ln() / (self.d as f64).ln();
        self.max_subgraph_sites.unwrap_or_else(|| (fit.floor() as usize).min(g.num_vertices()))
    }

    /// Builds the lattice of the configured family.
    pub fn build_graph(&self) -> Result<Graph, ConfigError> {
        let boundary = self.boundary_or_default();
        Ok(match self.family {
            FamilyKind::Box => match &self.sides {
                Some(sides) => {
                    if sides.is_empty() || sides.contains(&0) {
                        return Err(ConfigError::Invalid(format!("box sides {sides:?} must be positive")));
                    }
                    build_rect_lattice(sides, boundary)?
                }
                None => {
                    if self.dim == 0 {
                        return Err(inequality("box dimension D", 0, ">=", 1));
                    }
                    if self.size == 0 {
                        return Err(inequality("box half side L", 0, ">=", 1));
                    }
                    build_box_lattice(self.dim, self.size, boundary)?
                }
            },
            FamilyKind::Honeycomb => {
                if boundary != Boundary::Periodic {
                    return Err(ConfigError::Invalid("the honeycomb is built with periodic boundary only".into()));
                }
                build_honeycomb(self.size)?
            }
            FamilyKind::Chain1d => {
                if self.size < 2 {
                    return Err(inequality("chain sites L", self.size, ">=", 2));
                }
                build_chain(self.size, boundary)?
            }
        })
    }

    /// Structural preconditions only; theorem hypotheses are evaluated per
    /// trial and end up in the verdict.
    pub fn validate(&self) -> Result<Graph, ConfigError> {
        if self.d < 2 {
            return Err(inequality("local dimension d", self.d, ">=", 2));
        }
        if self.r == 0 {
            return Err(inequality("projector rank r", 0, ">=", 1));
        }
        if self.r > self.d * self.d {
            return Err(inequality("projector rank r", self.r, "<=", self.d * self.d));
        }
        if self.trials == 0 {
            return Err(inequality("trials", 0, ">=", 1));
        }
        if !(self.kernel_tol > 0.0) {
            return Err(inequality("kernel_tol", self.kernel_tol, ">", 0));
        }
        if self.threads == Some(0) {
            return Err(inequality("threads", 0, ">=", 1));
        }
        let g = self.build_graph()?;
        match self.mode.0 {
            SampleMode::Haar => {}
            SampleMode::Cap { eps } => {
                if !(eps > 0.0 && eps < 0.5) {
                    return Err(ConfigError::Invalid(format!("cap radius eps={eps} must lie in (0, 1/2)")));
                }
                good_projectors_for(&g, self.d, self.r)?;
            }
            SampleMode::Good => {
                good_projectors_for(&g, self.d, self.r)?;
            }
        }
        let n = g.num_vertices();
        let needs_state = [Check::ExactGap, Check::FfExact, Check::Entropy];
        if needs_state.iter().any(|c| self.checks.contains(c)) {
            let dim = (self.d as f64).powi(n as i32);
            if dim > DEFAULT_STATE_CAP as f64 {
                return Err(inequality("state dimension d^|V|", dim, "<=", DEFAULT_STATE_CAP));
            }
        }
        if self.checks.contains(&Check::KnabeSubgraphs) {
            let m = self.max_subgraph_sites_or_default(&g);
            let dim = (self.d as f64).powi(m as i32);
            if m < 2 {
                return Err(inequality("max_subgraph_sites", m, ">=", 2));
            }
            if dim > DEFAULT_DENSE_CAP as f64 {
                return Err(inequality("subgraph dimension d^max_subgraph_sites", dim, "<=", DEFAULT_DENSE_CAP));
            }
        }
        Ok(g)
    }
}
