//! Report emission: full JSON, a flat CSV table and SVG histograms.
//!
//! CSV columns, one row per trial:
//!
//! | column | meaning |
//! |---|---|
//! | `trial` | trial index |
//! | `verdict` | `certified-gapped`, `inconclusive` or empty without `certify` |
//! | `gamma3` | local pair gap `γ₃` |
//! | `gamma3_lower` | `1 − max ‖PQ − P∧Q‖` |
//! | `pq_max` | `max ‖PQ − P∧Q‖` over patch kinds |
//! | `knabe_lower_bound` | `(2δ−2)(γ₃ − (2δ−3)/(2δ−2))` |
//! | `ff_established` | frustration-freeness proven for the graph |
//! | `ground_energy` | lowest eigenvalue of `H` |
//! | `gap` | spectral gap above the kernel |
//! | `kernel_dim` | kernel dimension (a lower bound on the Lanczos route) |
//! | `qsat_bound` | `⌈𝒵(G′; −r/d²) d^{|V|}⌉` |
//! | `knabe_min_ratio` | `min γ(H_S)/bound` over audited subgraphs |
//! | `entropy` | half-cut entanglement entropy of a kernel state |
//! | `failures` | number of failed asserted inequalities |
//!
//! Empty cells mean the check was not requested or had no value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gapforge_core::criteria::Verdict;

use crate::io::write_json;
use crate::trial::{HarnessError, Report, TrialResult};

pub const CSV_HEADER: [&str; 14] = [
    "trial",
    "verdict",
    "gamma3",
    "gamma3_lower",
    "pq_max",
    "knabe_lower_bound",
    "ff_established",
    "ground_energy",
    "gap",
    "kernel_dim",
    "qsat_bound",
    "knabe_min_ratio",
    "entropy",
    "failures",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_row(t: &TrialResult) -> Vec<String> {
    let c = t.certificate.as_ref();
    let ground = t.spectrum.as_ref().map(|s| s.ground_energy).or(t.ff.as_ref().map(|f| f.ground_energy));
    let kernel = t.spectrum.as_ref().map(|s| s.kernel_dim).or(t.ff.as_ref().map(|f| f.kernel_dim));
    let qsat = t.qsat.as_ref().map(|q| q.kernel_lower_bound.clone()).or(t.ff.as_ref().and_then(|f| f.kernel_lower_bound.clone()));
    vec![
        t.trial.to_string(),
        cell(c.map(|c| match c.verdict {
            Verdict::CertifiedGapped => "certified-gapped",
            Verdict::Inconclusive => "inconclusive",
        })),
        cell(c.map(|c| c.gamma3)),
        cell(c.map(|c| c.gamma3_lower)),
        cell(c.map(|c| c.pq_max)),
        cell(c.map(|c| c.knabe_lower_bound)),
        cell(c.map(|c| c.ff_established)),
        cell(ground),
        cell(t.spectrum.as_ref().and_then(|s| s.gap)),
        cell(kernel),
        cell(qsat),
        cell(t.knabe.as_ref().and_then(|k| k.min_ratio)),
        cell(t.entropy.as_ref().and_then(|e| e.entropy)),
        t.failures.len().to_string(),
    ]
}

pub fn render_csv(trials: &[TrialResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for t in trials {
        w.write_record(csv_row(t)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// `⌈√n⌉` bins over `[min, max]` of the finite values.
pub fn histogram(values: &[f64]) -> (f64, f64, Vec<usize>) {
    let vals: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let bins = (vals.len() as f64).sqrt().ceil() as usize;
    if bins == 0 {
        return (0.0, 0.0, Vec::new());
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0; bins];
    let width = hi - lo;
    for v in vals {
        let k = if width > 0.0 { (((v - lo) / width) * bins as f64) as usize } else { 0 };
        counts[k.min(bins - 1)] += 1;
    }
    (lo, hi, counts)
}

/// Self-contained SVG bar chart of `histogram(values)`.
pub fn render_svg(title: &str, values: &[f64]) -> String {
    let (lo, hi, counts) = histogram(values);
    let (w, h, pad) = (480.0, 240.0, 32.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{pad}" y="20" font-family="monospace" font-size="12">{title} (n={})</text>"#, values.len());
    let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar = if counts.is_empty() { 0.0 } else { (w - 2.0 * pad) / counts.len() as f64 };
    for (i, &c) in counts.iter().enumerate() {
        let bh = (h - 2.0 * pad) * c as f64 / peak;
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="steelblue" stroke="white"/>"#,
            pad + i as f64 * bar,
            h - pad - bh,
            bar,
            bh
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let _ = writeln!(s, r#"<text x="{pad}" y="{}" font-family="monospace" font-size="10">{lo:.6}</text>"#, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="10" text-anchor="end">{hi:.6}</text>"#,
        w - pad,
        h - 12.0
    );
    s.push_str("</svg>\n");
    s
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.into(), source })
}

/// Writes `report.json`, `trials.csv` and histograms of γ₃, γ and `pq_max`
/// into `dir`. Returns the written paths.
pub fn emit_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.into(), source })?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    write_json(&json, report)?;
    written.push(json);
    let csv = dir.join("trials.csv");
    write_text(&csv, &render_csv(&report.trials))?;
    written.push(csv);
    let certs = || report.trials.iter().filter_map(|t| t.certificate.as_ref());
    let series: [(&str, Vec<f64>); 3] = [
        ("gamma3", certs().map(|c| c.gamma3).collect()),
        ("gap", report.trials.iter().filter_map(|t| t.spectrum.as_ref().and_then(|s| s.gap)).collect()),
        ("pq_max", certs().map(|c| c.pq_max).collect()),
    ];
    for (name, values) in series {
        let path = dir.join(format!("hist_{name}.svg"));
        write_text(&path, &render_svg(name, &values))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial::summarize;

    #[test]
    fn bins_follow_square_root_rule() {
        assert_eq!(histogram(&[]).2.len(), 0);
        assert_eq!(histogram(&[1.0]).2, vec![1]);
        let v: Vec<f64> = (0..10).map(f64::from).collect();
        let (_, _, c) = histogram(&v);
        assert_eq!(c.len(), 4);
        assert_eq!(c.iter().sum::<usize>(), 10);
        assert!(render_svg("x", &[]).ends_with("</svg>\n"));
    }

    #[test]
    fn empty_csv_has_only_the_header() {
        assert_eq!(render_csv(&[]).lines().count(), 1);
        assert_eq!(summarize(&[]).trials, 0);
    }
}
