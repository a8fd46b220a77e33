use crate::config::Algorithm;
use crate::error::Result;
use crate::record::{csv_writer, RunRecord};
use std::io::Write;

/// Aggregate of all runs sharing a group (map index or agent count) and an
/// algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub group: usize,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failures: usize,
    /// Over successful runs only; `None` when every run failed.
    pub median_steps: Option<usize>,
    pub median_iterations: usize,
    pub median_time_s: f64,
}

/// Lower median: element `(n - 1) / 2` of the sorted values.
fn lower_median<T: Copy + PartialOrd>(mut values: Vec<T>) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in records"));
    Some(values[(values.len() - 1) / 2])
}

/// One row per (group, algorithm), in order of first appearance.
pub fn aggregate(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, Algorithm)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.map, r.algorithm)) {
            keys.push((r.map, r.algorithm));
        }
    }
    keys.into_iter()
        .map(|(group, algorithm)| {
            let cell: Vec<&RunRecord> = records.iter().filter(|r| r.map == group && r.algorithm == algorithm).collect();
            SummaryRow {
                group,
                algorithm,
                runs: cell.len(),
                failures: cell.iter().filter(|r| !r.success).count(),
                median_steps: lower_median(cell.iter().filter_map(|r| r.steps).collect()),
                median_iterations: lower_median(cell.iter().map(|r| r.iterations).collect()).unwrap_or(0),
                median_time_s: lower_median(cell.iter().map(|r| r.time_s).collect()).unwrap_or(0.0),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["group", "algo", "failures", "median_steps", "median_iterations", "median_time_s"])?;
    for r in rows {
        out.write_record([
            r.group.to_string(),
            r.algorithm.to_string(),
            r.failures.to_string(),
            r.median_steps.map(|s| s.to_string()).unwrap_or_default(),
            r.median_iterations.to_string(),
            r.median_time_s.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
