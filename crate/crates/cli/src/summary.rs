//! Per-grid-point aggregates.

use serde::{Deserialize, Serialize};

use crate::config::Suite;
use crate::error::{HarnessError, Result};
use crate::run::ResultRow;
use ondemand_core::oods::{AdversarialKind, RegionKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: Suite,
    pub grid_index: usize,
    pub k: usize,
    pub r: Option<usize>,
    pub m: Option<usize>,
    pub kind: Option<AdversarialKind>,
    pub region: Option<RegionKind>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub eps: f64,
    pub delta: Option<f64>,
    pub trials: usize,
    pub samples_mean: Option<f64>,
    pub samples_std: Option<f64>,
    pub rounds_mean: f64,
    pub rounds_std: f64,
    pub success_rate: f64,
}

/// Mean and sample standard deviation; the deviation of one value is 0.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Rounds of a row: lazy Hedge rounds, else environment rounds.
fn rounds_of(row: &ResultRow) -> f64 {
    row.rounds
        .map(|r| r as f64)
        .or(row.rounds_used.map(|r| r as f64))
        .unwrap_or(0.0)
}

/// One aggregate per grid point, in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<Summary>> {
    if rows.is_empty() {
        return Err(HarnessError::NoRows);
    }
    let mut order: Vec<usize> = Vec::new();
    for r in rows {
        if !order.contains(&r.grid_index) {
            order.push(r.grid_index);
        }
    }
    Ok(order
        .into_iter()
        .map(|g| {
            let group: Vec<&ResultRow> = rows.iter().filter(|r| r.grid_index == g).collect();
            let first = group[0];
            let samples: Option<Vec<f64>> = group.iter().map(|r| r.samples_total.map(|s| s as f64)).collect();
            let (samples_mean, samples_std) = match samples {
                Some(s) => {
                    let (m, sd) = mean_std(&s);
                    (Some(m), Some(sd))
                }
                None => (None, None),
            };
            let rounds: Vec<f64> = group.iter().map(|r| rounds_of(r)).collect();
            let (rounds_mean, rounds_std) = mean_std(&rounds);
            let wins = group.iter().filter(|r| r.success).count();
            Summary {
                suite: first.suite,
                grid_index: g,
                k: first.k,
                r: first.r,
                m: first.m,
                kind: first.kind,
                region: first.region,
                c: first.c,
                eps: first.eps,
                delta: first.delta,
                trials: group.len(),
                samples_mean,
                samples_std,
                rounds_mean,
                rounds_std,
                success_rate: wins as f64 / group.len() as f64,
            }
        })
        .collect())
}

/// Fixed-width table for the terminal.
pub fn render(summaries: &[Summary]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    let mut out = format!(
        "{:>4} {:>5} {:>3} {:>3} {:>9} {:>9} {:>5} {:>6} {:>6} {:>14} {:>12} {:>8} {:>7}\n",
        "grid", "k", "r", "m", "kind", "region", "C", "eps", "trials", "samples", "rounds", "sd", "success"
    );
    for s in summaries {
        out.push_str(&format!(
            "{:>4} {:>5} {:>3} {:>3} {:>9} {:>9} {:>5} {:>6} {:>6} {:>14} {:>12.2} {:>8.2} {:>7.3}\n",
            s.grid_index,
            s.k,
            opt(s.r.map(|v| v.to_string())),
            opt(s.m.map(|v| v.to_string())),
            opt(s.kind.map(|v| v.to_string())),
            opt(s.region.map(|v| v.to_string())),
            opt(s.c.map(|v| v.to_string())),
            s.eps,
            s.trials,
            opt(s.samples_mean.map(|v| format!("{v:.1}"))),
            s.rounds_mean,
            s.rounds_std,
            s.success_rate
        ));
    }
    out
}
