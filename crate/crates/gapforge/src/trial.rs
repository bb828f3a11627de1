//! Trials and the Monte Carlo driver.

use std::time::{Duration, Instant};

use gapforge_core::criteria::{certify, knabe_local_bound, CertifyContext, Condition, GapCertificate, Verdict};
use gapforge_core::entropy::entanglement_entropy;
use gapforge_core::hardcore::QsatBound;
use gapforge_core::lattice::{connected_subsets, Family, Graph};
use gapforge_core::operators::{assemble, HamiltonianHandle, DEFAULT_DENSE_CAP};
use gapforge_core::sampler::{sample_assignment, ProjectorFrame, RngStream};
use gapforge_core::spectra::{exact_spectrum, kernel_vector, lanczos_lowest, GapValue, LanczosOptions, SpectrumResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Check, ConfigError, ExperimentConfig};

/// Slack allowed on the local gap inequality of the subgraph audit.
pub const KNABE_SLACK: f64 = 1e-8;
/// Eigenvalues kept in a spectrum record.
pub const LOWEST_KEPT: usize = 8;
/// Normal quantile for a 95% interval.
pub const WILSON_Z: f64 = 1.959963984540054;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trial {trial}: {source}")]
    Trial { trial: usize, source: gapforge_core::Error },
    #[error(transparent)]
    Core(#[from] gapforge_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Low-lying spectrum of the full Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub dim: usize,
    /// `exact` or `lanczos`.
    pub route: String,
    pub lowest: Vec<f64>,
    pub ground_energy: f64,
    pub kernel_dim: usize,
    pub kernel_dim_is_lower_bound: bool,
    pub gap: Option<f64>,
    pub frustrated: bool,
}

impl SpectrumRecord {
    fn from_result(dim: usize, route: &str, sr: &SpectrumResult) -> Self {
        SpectrumRecord {
            dim,
            route: route.into(),
            lowest: sr.eigenvalues.iter().take(LOWEST_KEPT).copied().collect(),
            ground_energy: sr.ground_energy,
            kernel_dim: sr.kernel_dim,
            kernel_dim_is_lower_bound: sr.kernel_dim_is_lower_bound,
            gap: match sr.gap {
                GapValue::Value(g) => Some(g),
                _ => None,
            },
            frustrated: sr.frustrated,
        }
    }
}

/// Frustration-freeness and kernel-dimension check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfRecord {
    pub ff_established: bool,
    pub ground_energy: f64,
    pub kernel_dim: usize,
    pub kernel_dim_is_lower_bound: bool,
    pub frustrated: bool,
    pub qsat_bound: Option<f64>,
    pub kernel_lower_bound: Option<String>,
    pub conditions: Vec<Condition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgraphGap {
    /// Vertex ids in the full graph.
    pub vertices: Vec<usize>,
    pub gap: Option<f64>,
    pub ground_energy: f64,
    pub condition: Option<Condition>,
}

/// Local gap inequality on connected subgraphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnabeRecord {
    pub certified: bool,
    pub bound: Option<f64>,
    pub subgraphs: Vec<SubgraphGap>,
    /// `min γ(H_S)/bound` over audited subgraphs with a positive bound.
    pub min_ratio: Option<f64>,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub left: Vec<usize>,
    pub right_sites: usize,
    pub cut_edges: usize,
    pub entropy: Option<f64>,
    /// `S ≤ min(|L|, |R|) ln d`, asserted.
    pub schmidt_condition: Option<Condition>,
    /// `S ≤ ln(d²)·(cut edges)`, recorded only.
    pub area_condition: Option<Condition>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub certificate: Option<GapCertificate>,
    pub spectrum: Option<SpectrumRecord>,
    pub ff: Option<FfRecord>,
    pub qsat: Option<QsatBound>,
    pub knabe: Option<KnabeRecord>,
    pub entropy: Option<EntropyRecord>,
    /// Asserted inequalities that failed.
    pub failures: Vec<Condition>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl TrialResult {
    pub fn certified(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.verdict == Verdict::CertifiedGapped)
    }
}

/// Data shared by all trials of one configuration.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub graph: Graph,
    pub context: CertifyContext,
    pub subsets: Vec<Vec<usize>>,
}

impl Experiment {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        let graph = cfg.validate()?;
        let context = CertifyContext::new(&graph, cfg.d, cfg.r)?;
        let subsets = if cfg.checks.contains(&Check::KnabeSubgraphs) {
            connected_subsets(&graph, 2, cfg.max_subgraph_sites_or_default(&graph))?
        } else {
            Vec::new()
        };
        Ok(Experiment { config: cfg.clone(), graph, context, subsets })
    }

    pub fn sample(&self, trial: usize) -> gapforge_core::Result<Vec<ProjectorFrame>> {
        let cfg = &self.config;
        let mut rng = RngStream::new(cfg.seed, trial as u64);
        sample_assignment(&self.graph, cfg.d, cfg.r, cfg.mode.0, &mut rng)
    }

    pub fn run(&self, trial: usize) -> Result<TrialResult, HarnessError> {
        let start = Instant::now();
        let mut out = self.run_checks(trial).map_err(|source| HarnessError::Trial { trial, source })?;
        out.wall_time = start.elapsed();
        Ok(out)
    }

    fn run_checks(&self, trial: usize) -> gapforge_core::Result<TrialResult> {
        let cfg = &self.config;
        let checks = &cfg.checks;
        let frames = self.sample(trial)?;
        let mut out = TrialResult {
            trial,
            certificate: None,
            spectrum: None,
            ff: None,
            qsat: None,
            knabe: None,
            entropy: None,
            failures: Vec::new(),
            wall_time: Duration::ZERO,
        };
        if checks.contains(&Check::Certify) || checks.contains(&Check::KnabeSubgraphs) {
            out.certificate = Some(certify(&frames, &self.context)?);
        }
        if checks.contains(&Check::Qsat) {
            out.qsat = self.context.qsat.bound.clone();
        }
        let needs_h = [Check::ExactGap, Check::FfExact, Check::Entropy, Check::KnabeSubgraphs];
        if !needs_h.iter().any(|c| checks.contains(c)) {
            return Ok(out);
        }
        let h = assemble(&self.graph, cfg.d, &frames)?;
        if checks.contains(&Check::ExactGap) || checks.contains(&Check::FfExact) {
            let spectrum = self.spectrum(&h, trial)?;
            if checks.contains(&Check::FfExact) {
                out.ff = Some(self.ff_record(&spectrum));
            }
            if checks.contains(&Check::ExactGap) {
                out.spectrum = Some(spectrum);
            }
        }
        if checks.contains(&Check::KnabeSubgraphs) {
            out.knabe = Some(self.knabe_record(&h, out.certificate.as_ref().expect("certified above"))?);
        }
        if checks.contains(&Check::Entropy) {
            out.entropy = Some(self.entropy_record(&h, trial)?);
        }
        out.failures = collect_failures(&out);
        Ok(out)
    }

    fn spectrum(&self, h: &HamiltonianHandle, trial: usize) -> gapforge_core::Result<SpectrumRecord> {
        let tol = self.config.kernel_tol;
        if h.dim() <= DEFAULT_DENSE_CAP || h.gram_dim() <= DEFAULT_DENSE_CAP {
            return Ok(SpectrumRecord::from_result(h.dim(), "exact", &exact_spectrum(h, tol)?));
        }
        let opts = LanczosOptions { kernel_tol: tol, seed: self.config.seed ^ trial as u64, ..LanczosOptions::default() };
        let sr = lanczos_lowest(h, LOWEST_KEPT.min(h.dim()), &opts)?;
        Ok(SpectrumRecord::from_result(h.dim(), "lanczos", &sr))
    }

    fn ff_record(&self, s: &SpectrumRecord) -> FfRecord {
        let ctx = &self.context;
        let ff_established = ctx.ff_established();
        let mut conditions = Vec::new();
        if ff_established {
            conditions.push(Condition::new("ground energy < kernel_tol", s.ground_energy, "<", self.config.kernel_tol));
        }
        let bound = ctx.qsat.bound.as_ref().filter(|_| ctx.qsat.certified);
        if let Some(b) = bound {
            if !s.kernel_dim_is_lower_bound {
                let claimed = b.kernel_lower_bound.parse::<f64>().unwrap_or(f64::INFINITY);
                conditions.push(Condition::new("dim ker H >= ceil(Z(G';-r/d^2) d^|V|)", s.kernel_dim as f64, ">=", claimed));
            }
        }
        FfRecord {
            ff_established,
            ground_energy: s.ground_energy,
            kernel_dim: s.kernel_dim,
            kernel_dim_is_lower_bound: s.kernel_dim_is_lower_bound,
            frustrated: s.frustrated,
            qsat_bound: bound.map(|b| b.bound),
            kernel_lower_bound: bound.map(|b| b.kernel_lower_bound.clone()),
            conditions,
        }
    }

    fn knabe_record(&self, h: &HamiltonianHandle, cert: &GapCertificate) -> gapforge_core::Result<KnabeRecord> {
        let certified = cert.verdict == Verdict::CertifiedGapped;
        if !certified {
            return Ok(KnabeRecord { certified, bound: None, subgraphs: Vec::new(), min_ratio: None, violations: 0 });
        }
        let bound = knabe_local_bound(cert.gamma3, cert.degree_bound)?;
        let mut subgraphs = Vec::with_capacity(self.subsets.len());
        let mut min_ratio: Option<f64> = None;
        let mut violations = 0;
        for s in &self.subsets {
            let hs = h.restrict(s)?;
            let sr = exact_spectrum(&hs, self.config.kernel_tol)?;
            let gap = match sr.gap {
                GapValue::Value(g) => Some(g),
                _ => None,
            };
            let condition = gap.map(|g| {
                Condition::with_tolerance("gamma(H_S) >= (2delta-2)(gamma3 - threshold)", g, ">=", bound, KNABE_SLACK)
            });
            if let (Some(g), true) = (gap, bound > 0.0) {
                min_ratio = Some(min_ratio.map_or(g / bound, |m: f64| m.min(g / bound)));
            }
            if condition.as_ref().is_some_and(|c| !c.holds) {
                violations += 1;
            }
            subgraphs.push(SubgraphGap { vertices: s.clone(), gap, ground_energy: sr.ground_energy, condition });
        }
        Ok(KnabeRecord { certified, bound: Some(bound), subgraphs, min_ratio, violations })
    }

    fn entropy_record(&self, h: &HamiltonianHandle, trial: usize) -> gapforge_core::Result<EntropyRecord> {
        let g = &self.graph;
        let d = self.config.d;
        let n = g.num_vertices();
        let left = cut_left(g);
        let cut_edges = g.edges().iter().filter(|e| left.contains(&e.tail) != left.contains(&e.head)).count();
        let mut rec = EntropyRecord {
            left: left.clone(),
            right_sites: n - left.len(),
            cut_edges,
            entropy: None,
            schmidt_condition: None,
            area_condition: None,
            note: None,
        };
        let seed = self.config.seed.rotate_left(17) ^ trial as u64;
        let Some(psi) = kernel_vector(h, seed, self.config.kernel_tol, 20 * h.dim().max(100)) else {
            rec.note = Some("no ground state in the kernel".into());
            return Ok(rec);
        };
        let s = entanglement_entropy(&psi, d, n, &left)?;
        let ln_d = (d as f64).ln();
        rec.entropy = Some(s);
        rec.schmidt_condition = Some(Condition::with_tolerance(
            "S <= min(|L|,|R|) ln d",
            s,
            "<=",
            left.len().min(n - left.len()) as f64 * ln_d,
            1e-10,
        ));
        rec.area_condition = Some(Condition::new("S <= ln(d^2) * cut edges", s, "<=", 2.0 * ln_d * cut_edges as f64));
        Ok(rec)
    }
}

/// Left half of the graph: vertices whose first coordinate lies below the
/// median of the first coordinates (the first half of a chain).
pub fn cut_left(g: &Graph) -> Vec<usize> {
    let n = g.num_vertices();
    if g.family() == Family::Chain {
        return (0..n / 2).collect();
    }
    let mut xs: Vec<i64> = g.coords().iter().map(|c| c[0]).collect();
    xs.sort_unstable();
    xs.dedup();
    let split = xs[xs.len() / 2];
    let left: Vec<usize> = (0..n).filter(|&v| g.coords()[v][0] < split).collect();
    if left.is_empty() {
        (0..n / 2).collect()
    } else {
        left
    }
}

fn collect_failures(t: &TrialResult) -> Vec<Condition> {
    let mut out = Vec::new();
    if let Some(ff) = &t.ff {
        out.extend(ff.conditions.iter().filter(|c| !c.holds).cloned());
    }
    if let Some(k) = &t.knabe {
        out.extend(k.subgraphs.iter().filter_map(|s| s.condition.clone()).filter(|c| !c.holds));
    }
    if let Some(c) = t.entropy.as_ref().and_then(|e| e.schmidt_condition.as_ref()) {
        if !c.holds {
            out.push(c.clone());
        }
    }
    out
}

/// One trial of `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialResult, HarnessError> {
    Experiment::new(cfg)?.run(trial)
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n, z) = (k as f64, n as f64, WILSON_Z);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfAggregate {
    pub trials: usize,
    pub max_ground_energy: f64,
    pub min_kernel_dim: usize,
    pub frustrated_trials: usize,
    pub kernel_lower_bound: Option<String>,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnabeViolation {
    pub trial: usize,
    pub vertices: Vec<usize>,
    pub condition: Condition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnabeAggregate {
    pub certified_trials: usize,
    pub subgraphs_per_trial: usize,
    pub min_ratio: Option<f64>,
    pub violations: Vec<KnabeViolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub certified: usize,
    pub frequency: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub failed_inequalities: usize,
    pub ff: Option<FfAggregate>,
    pub knabe: Option<KnabeAggregate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub family: Family,
    pub vertices: usize,
    pub edges: usize,
    pub num_types: u32,
    pub degree_bound: usize,
}

/// Everything a run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub graph: GraphSummary,
    pub summary: Summary,
    pub trials: Vec<TrialResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.failed_inequalities == 0
    }
}

pub fn summarize(trials: &[TrialResult]) -> Summary {
    let n = trials.len();
    let certified = trials.iter().filter(|t| t.certified()).count();
    let (wilson_low, wilson_high) = wilson_interval(certified, n);
    let ffs: Vec<&FfRecord> = trials.iter().filter_map(|t| t.ff.as_ref()).collect();
    let ff = (!ffs.is_empty()).then(|| FfAggregate {
        trials: ffs.len(),
        max_ground_energy: ffs.iter().map(|f| f.ground_energy).fold(f64::NEG_INFINITY, f64::max),
        min_kernel_dim: ffs.iter().map(|f| f.kernel_dim).min().unwrap_or(0),
        frustrated_trials: ffs.iter().filter(|f| f.frustrated).count(),
        kernel_lower_bound: ffs[0].kernel_lower_bound.clone(),
        violations: ffs.iter().map(|f| f.conditions.iter().filter(|c| !c.holds).count()).sum(),
    });
    let knabes: Vec<(usize, &KnabeRecord)> = trials.iter().filter_map(|t| t.knabe.as_ref().map(|k| (t.trial, k))).collect();
    let knabe = (!knabes.is_empty()).then(|| KnabeAggregate {
        certified_trials: knabes.iter().filter(|(_, k)| k.certified).count(),
        subgraphs_per_trial: knabes.iter().map(|(_, k)| k.subgraphs.len()).max().unwrap_or(0),
        min_ratio: knabes.iter().filter_map(|(_, k)| k.min_ratio).reduce(f64::min),
        violations: knabes
            .iter()
            .flat_map(|(t, k)| {
                k.subgraphs.iter().filter_map(move |s| {
                    s.condition.as_ref().filter(|c| !c.holds).map(|c| KnabeViolation {
                        trial: *t,
                        vertices: s.vertices.clone(),
                        condition: c.clone(),
                    })
                })
            })
            .collect(),
    });
    Summary {
        trials: n,
        certified,
        frequency: if n == 0 { 0.0 } else { certified as f64 / n as f64 },
        wilson_low,
        wilson_high,
        failed_inequalities: trials.iter().map(|t| t.failures.len()).sum(),
        ff,
        knabe,
    }
}

/// Runs every trial of `cfg` in a work pool; results are sorted by trial.
pub fn monte_carlo(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let exp = Experiment::new(cfg)?;
    let run_all = || (0..cfg.trials).into_par_iter().map(|t| exp.run(t)).collect::<Result<Vec<_>, _>>();
    let mut trials = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(run_all)?,
        None => run_all()?,
    };
    trials.sort_by_key(|t| t.trial);
    let g = &exp.graph;
    Ok(Report {
        config: cfg.clone(),
        graph: GraphSummary {
            family: g.family(),
            vertices: g.num_vertices(),
            edges: g.num_edges(),
            num_types: g.num_types(),
            degree_bound: g.degree_bound(),
        },
        summary: summarize(&trials),
        trials,
    })
}

/// Monte Carlo with the frustration-freeness check forced on.
pub fn verify_ff_exact(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut cfg = cfg.clone();
    cfg.checks.insert(Check::FfExact);
    monte_carlo(&cfg)
}

/// Monte Carlo with the subgraph audit forced on, up to `max_subgraph_sites`.
pub fn knabe_subgraph_audit(cfg: &ExperimentConfig, max_subgraph_sites: usize) -> Result<Report, HarnessError> {
    let mut cfg = cfg.clone();
    cfg.checks.insert(Check::KnabeSubgraphs);
    cfg.max_subgraph_sites = Some(max_subgraph_sites);
    monte_carlo(&cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FamilyKind;
    use gapforge_core::sampler::SampleMode;

    #[test]
    fn wilson_matches_reference_values() {
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775327998628899).abs() < 1e-12);
        let (lo, hi) = wilson_interval(5, 10);
        assert!((lo - 0.2365931).abs() < 1e-6 && (hi - 0.7634069).abs() < 1e-6);
    }

    #[test]
    fn good_box_certifies_with_unit_gamma3() {
        let cfg = ExperimentConfig::new(FamilyKind::Box, 2, 1, 4, 1).with_mode(SampleMode::Good);
        let t = run_trial(&cfg, 0).unwrap();
        let c = t.certificate.unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedGapped);
        assert!((c.gamma3 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn haar_high_rank_is_inconclusive() {
        let cfg = ExperimentConfig::new(FamilyKind::Chain1d, 1, 4, 2, 4);
        let t = run_trial(&cfg, 0).unwrap();
        assert_eq!(t.certificate.unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn single_full_rank_edge_is_frustrated() {
        let cfg = ExperimentConfig::new(FamilyKind::Chain1d, 1, 2, 2, 4).with_checks(&[Check::FfExact]);
        let rep = verify_ff_exact(&cfg).unwrap();
        let ff = rep.trials[0].ff.as_ref().unwrap();
        assert!(ff.frustrated && !ff.ff_established);
        assert!((ff.ground_energy - 1.0).abs() < 1e-12);
        assert!(rep.passed());
    }
}
