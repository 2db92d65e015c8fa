//! `report`: compares stored results against their references without
//! recomputing anything.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::{read_csv, write_csv};
use super::runs::{ConvergenceCsvRow, DensityCsvRow, TailRow};
use super::Outcome;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub source: String,
    pub key: String,
    pub empirical: f64,
    pub reference: f64,
    pub relation: String,
    pub holds: bool,
}

fn half_width(lo: f64, hi: f64) -> f64 {
    0.5 * (hi - lo)
}

pub fn report(dir: &Path) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut hashes = Vec::new();
    let mut seen = 0;
    let tails = dir.join("tails.csv");
    if tails.exists() {
        seen += 1;
        let t = read_csv::<TailRow>(&tails)?;
        hashes.extend(t.hash);
        for r in t.rows.iter().filter(|r| r.bound.is_finite()) {
            // With no exceedances the interval's upper end is about 3.8/M
            // whatever the true probability, so only its lower end is informative.
            let (empirical, relation) = if r.exceed_count > 0 {
                (r.ci_high, "ci_high <= bound")
            } else {
                (r.ci_low, "ci_low <= bound (no exceedances)")
            };
            rows.push(ReportRow {
                source: "tails".into(),
                key: format!("{} t={} alpha={:.4e} x={}", r.flow, r.t, r.alpha, r.x_index),
                empirical,
                reference: r.bound,
                relation: relation.into(),
                holds: empirical <= r.bound,
            });
        }
    }
    let conv = dir.join("convergence.csv");
    if conv.exists() {
        seen += 1;
        let t = read_csv::<ConvergenceCsvRow>(&conv)?;
        hashes.extend(t.hash);
        for r in &t.rows {
            let reference = r.epsilon + half_width(r.ci_low, r.ci_high);
            rows.push(ReportRow {
                source: "convergence".into(),
                key: format!("{} epsilon={}", r.flow, r.epsilon),
                empirical: r.prob,
                reference,
                relation: "prob <= epsilon + half-width".into(),
                holds: r.prob <= reference,
            });
        }
    }
    let dens = dir.join("density.csv");
    if dens.exists() {
        seen += 1;
        let t = read_csv::<DensityCsvRow>(&dens)?;
        hashes.extend(t.hash);
        for r in &t.rows {
            let reference = r.target - half_width(r.ci_low, r.ci_high);
            rows.push(ReportRow {
                source: "density".into(),
                key: format!("epsilon={}", r.epsilon),
                empirical: r.prob,
                reference,
                relation: "prob >= 1 - 2 epsilon - half-width".into(),
                holds: r.prob >= reference,
            });
        }
    }
    if seen == 0 {
        return Err(Error::Config(format!(
            "output_dir: no tails.csv, convergence.csv or density.csv in {}",
            dir.display()
        )));
    }
    hashes.sort();
    hashes.dedup();
    let hash = hashes.join("+");
    let csv = write_csv(dir, "report.csv", &hash, &rows)?;
    let mut lines = vec![format!("{:<12} {:<44} {:>11} {:>11} {:<36} holds", "source", "key", "empirical", "reference", "relation")];
    lines.extend(rows.iter().map(|r| {
        format!(
            "{:<12} {:<44} {:>11.4e} {:>11.4e} {:<36} {}",
            r.source, r.key, r.empirical, r.reference, r.relation, r.holds
        )
    }));
    let held = rows.iter().filter(|r| r.holds).count();
    lines.push(format!("{held} of {} comparisons hold", rows.len()));
    if hashes.len() > 1 {
        lines.push("note: the result files come from different configurations".into());
    }
    Ok(Outcome { lines, files: vec![csv], check_failed: false })
}
