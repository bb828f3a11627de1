use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gapforge::config::{Check, ConfigError, ExperimentConfig, FamilyKind, ModeSpec, Overrides};
use gapforge::io::{write_json, AssignmentFile, FrameFile, GraphFile};
use gapforge::report::emit_report;
use gapforge::trial::{knabe_subgraph_audit, monte_carlo, verify_ff_exact, Experiment, HarnessError, Report};
use gapforge_core::hardcore::{
    certify_positivity_exact, independence_polynomial, kp_certificate, qsat_kernel_bound, rational_ratio,
};
use gapforge_core::lattice::{line_graph, Boundary};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gapforge", version, about = "Gap certificates for random frustration-free Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo over the gap certificate.
    Certify(Common),
    /// Write sampled prototypes and the graph as JSON.
    Sample(Common),
    /// Ground energies and kernel dimensions against the QSAT bound.
    FfCheck(Common),
    /// Independence polynomial of the line graph and its certificates.
    Zpoly(Common),
    /// Exact local gaps of connected subgraphs against the Knabe bound.
    Knabe(Common),
    /// Half-cut entanglement entropy of kernel states.
    Entropy(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long = "L")]
    size: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    boundary: Option<String>,
    /// haar, good or cap:<eps>
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let family = self.family.as_deref().map(str::parse::<FamilyKind>).transpose()?;
        let boundary = match self.boundary.as_deref() {
            None => None,
            Some("open") => Some(Boundary::Open),
            Some("periodic") => Some(Boundary::Periodic),
            Some(b) => return Err(ConfigError::Invalid(format!("unknown boundary {b:?} (open, periodic)"))),
        };
        let o = Overrides {
            family,
            dim: self.dim,
            size: self.size,
            d: self.d,
            r: self.r,
            boundary,
            mode: self.mode.as_deref().map(str::parse::<ModeSpec>).transpose()?,
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
        };
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let (Some(family), Some(d), Some(r)) = (family, self.d, self.r) else {
                    return Err(ConfigError::Invalid("without --config, --family, --d and --r are required".into()));
                };
                ExperimentConfig::new(family, 1, 1, d, r)
            }
        };
        cfg.apply(&o);
        Ok(cfg)
    }
}

enum Outcome {
    Passed,
    Failed,
}

fn finish(report: &Report, label: &str) -> Result<Outcome, HarnessError> {
    let s = &report.summary;
    println!(
        "{label}: {} trials, certified {} (frequency {}, 95% Wilson [{:.6}, {:.6}]), failed inequalities {}",
        s.trials, s.certified, s.frequency, s.wilson_low, s.wilson_high, s.failed_inequalities
    );
    if let Some(ff) = &s.ff {
        println!(
            "ff-check: max ground energy {:e}, min kernel dim {}, qsat bound {}, frustrated {}, violations {}",
            ff.max_ground_energy,
            ff.min_kernel_dim,
            ff.kernel_lower_bound.as_deref().unwrap_or("n/a"),
            ff.frustrated_trials,
            ff.violations
        );
    }
    if let Some(k) = &s.knabe {
        let ratio = k.min_ratio.map_or("n/a".to_string(), |r| r.to_string());
        println!(
            "knabe: {} certified trials, {} subgraphs each, min ratio {ratio}, violations {}",
            k.certified_trials,
            k.subgraphs_per_trial,
            k.violations.len()
        );
        for v in &k.violations {
            println!("  trial {} S={:?}: {}", v.trial, v.vertices, v.condition);
        }
    }
    for t in report.trials.iter().filter(|t| !t.failures.is_empty()) {
        for c in &t.failures {
            println!("  trial {}: {c}", t.trial);
        }
    }
    if let Some(dir) = &report.config.out {
        for p in emit_report(report, dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(if report.passed() { Outcome::Passed } else { Outcome::Failed })
}

fn run(cmd: Command) -> Result<Outcome, HarnessError> {
    match cmd {
        Command::Certify(c) => {
            let mut cfg = c.resolve()?;
            cfg.checks.insert(Check::Certify);
            let report = monte_carlo(&cfg)?;
            if report.trials.len() == 1 {
                if let Some(cert) = &report.trials[0].certificate {
                    print!("{}", cert.render_text());
                }
            }
            finish(&report, "certify")
        }
        Command::FfCheck(c) => finish(&verify_ff_exact(&c.resolve()?)?, "ff-check"),
        Command::Knabe(c) => {
            let cfg = c.resolve()?;
            let g = cfg.validate()?;
            let max = cfg.max_subgraph_sites_or_default(&g);
            finish(&knabe_subgraph_audit(&cfg, max)?, "knabe")
        }
        Command::Entropy(c) => {
            let mut cfg = c.resolve()?;
            cfg.checks.insert(Check::Entropy);
            let report = monte_carlo(&cfg)?;
            for t in &report.trials {
                if let Some(e) = &t.entropy {
                    let s = e.entropy.map_or("n/a".to_string(), |s| s.to_string());
                    println!("trial {}: S = {s} (|L| = {}, cut edges {})", t.trial, e.left.len(), e.cut_edges);
                }
            }
            finish(&report, "entropy")
        }
        Command::Sample(c) => {
            let cfg = c.resolve()?;
            let exp = Experiment::new(&cfg)?;
            let assignments = (0..cfg.trials)
                .map(|t| {
                    let frames = exp.sample(t).map_err(|source| HarnessError::Trial { trial: t, source })?;
                    Ok(AssignmentFile { trial: t, frames: frames.iter().map(FrameFile::from_frame).collect() })
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            let doc = json!({ "graph": GraphFile::from_graph(&exp.graph), "assignments": assignments });
            match &cfg.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
                    write_json(&dir.join("samples.json"), &doc)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&doc).expect("serializable")),
            }
            Ok(Outcome::Passed)
        }
        Command::Zpoly(c) => {
            let cfg = c.resolve()?;
            let g = cfg.validate()?;
            let lg = line_graph(&g);
            let poly = independence_polynomial(&lg).ok();
            let p = rational_ratio(cfg.r as u64, (cfg.d * cfg.d) as u64)?;
            let positivity = poly.as_ref().map(|q| certify_positivity_exact(q, &p));
            let delta = lg.max_degree() + 1;
            let kp = kp_certificate(delta, -(cfg.r as f64) / (cfg.d * cfg.d) as f64)?;
            let qsat = qsat_kernel_bound(&g, cfg.d, cfg.r);
            let doc = json!({
                "line_graph_vertices": lg.num_vertices(),
                "coefficients": poly.as_ref().map(|q| &q.coefficients),
                "fingerprint": poly.as_ref().map(|q| q.fingerprint),
                "positivity": positivity,
                "kp": kp,
                "qsat": qsat.as_ref().ok(),
                "qsat_error": qsat.as_ref().err().map(|e| e.to_string()),
            });
            let text = serde_json::to_string_pretty(&doc).expect("serializable");
            match &cfg.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
                    write_json(&dir.join("zpoly.json"), &doc)?;
                }
                None => println!("{text}"),
            }
            Ok(Outcome::Passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(cli.command);
    eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e @ (HarnessError::Config(_) | HarnessError::Core(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
