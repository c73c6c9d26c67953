//! Run reports and the per-cell comparison table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ensemble::RunResult;
use crate::Error;

pub const REPORT_HEADER: &str =
    "scenario_id,run,total,b1,b2,b3_m,b4_s,b5,b6,mc_per_platform,iters,best_iter,wall_ms";

/// Values of an aggregate row in the `run` column.
pub const MEAN_RUN: &str = "mean";
pub const STD_RUN: &str = "std";

/// One report line. Per-run lines carry the run index in `run`; aggregate
/// lines carry `mean` or `std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario_id: String,
    pub run: String,
    pub total: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3_m: f64,
    pub b4_s: f64,
    pub b5: f64,
    pub b6: f64,
    pub mc_per_platform: f64,
    pub iters: f64,
    pub best_iter: f64,
    pub wall_ms: f64,
}

const N_METRICS: usize = 11;

impl ReportRow {
    pub fn from_run(scenario_id: &str, r: &RunResult) -> Self {
        let o = &r.outcome.objective;
        Self {
            scenario_id: scenario_id.to_string(),
            run: r.run.to_string(),
            total: o.total,
            b1: o.b1 as f64,
            b2: o.b2 as f64,
            b3_m: o.b3,
            b4_s: o.b4,
            b5: o.b5 as f64,
            b6: o.b6 as f64,
            mc_per_platform: o.changes_per_platform(),
            iters: r.outcome.iterations as f64,
            best_iter: r.outcome.best_iteration as f64,
            wall_ms: r.wall.as_secs_f64() * 1000.0,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        self.run == MEAN_RUN || self.run == STD_RUN
    }

    fn metrics(&self) -> [f64; N_METRICS] {
        [
            self.total,
            self.b1,
            self.b2,
            self.b3_m,
            self.b4_s,
            self.b5,
            self.b6,
            self.mc_per_platform,
            self.iters,
            self.best_iter,
            self.wall_ms,
        ]
    }

    fn with_metrics(scenario_id: &str, run: &str, m: [f64; N_METRICS]) -> Self {
        Self {
            scenario_id: scenario_id.to_string(),
            run: run.to_string(),
            total: m[0],
            b1: m[1],
            b2: m[2],
            b3_m: m[3],
            b4_s: m[4],
            b5: m[5],
            b6: m[6],
            mc_per_platform: m[7],
            iters: m[8],
            best_iter: m[9],
            wall_ms: m[10],
        }
    }
}

/// Mean and sample standard deviation per metric (standard deviation is 0
/// for a single run).
pub fn aggregate(scenario_id: &str, rows: &[ReportRow]) -> (ReportRow, ReportRow) {
    let n = rows.len() as f64;
    let mut mean = [0.0; N_METRICS];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.metrics()) {
            *m += v / n;
        }
    }
    let mut std = [0.0; N_METRICS];
    if rows.len() > 1 {
        for r in rows {
            for ((s, v), m) in std.iter_mut().zip(r.metrics()).zip(mean) {
                *s += (v - m).powi(2) / (n - 1.0);
            }
        }
        for s in &mut std {
            *s = s.sqrt();
        }
    }
    (
        ReportRow::with_metrics(scenario_id, MEAN_RUN, mean),
        ReportRow::with_metrics(scenario_id, STD_RUN, std),
    )
}

/// Report CSV: one line per run, then the mean and std lines.
pub fn report_csv(scenario_id: &str, runs: &[RunResult]) -> String {
    let rows: Vec<ReportRow> = runs
        .iter()
        .map(|r| ReportRow::from_run(scenario_id, r))
        .collect();
    let (mean, std) = aggregate(scenario_id, &rows);
    let mut all = rows;
    if !all.is_empty() {
        all.push(mean);
        all.push(std);
    }
    write_rows(&all)
}

pub fn write_rows(rows: &[ReportRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv");
    format!("{REPORT_HEADER}\n{body}")
}

pub fn parse_rows(text: &str) -> Result<Vec<ReportRow>, Error> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != REPORT_HEADER {
        return Err(Error::Schema(format!(
            "unexpected report header `{}`",
            header.join(",")
        )));
    }
    rdr.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Schema(e.to_string()))
}

/// A line of the scenario manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub scenario_id: String,
    pub spatial: String,
    pub tw: String,
    pub n_sd: usize,
    pub seed: u64,
    pub file: String,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRow>, Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Schema(e.to_string()))
}

pub const COMPARE_METRICS: [&str; 7] = ["total", "b1", "b2", "b3_m", "b4_s", "b5", "b6"];

/// Mean metrics of one (spatial, tw, n_sd) cell and their relative change
/// against the cell with the same spatial and tw but no service depots.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareCell {
    pub spatial: String,
    pub tw: String,
    pub n_sd: usize,
    pub runs: usize,
    pub means: [f64; 7],
    /// Percent, `(multi / conventional − 1) · 100`; `None` without a baseline
    /// or with a zero baseline.
    pub delta_pct: [Option<f64>; 7],
}

fn compare_metrics(r: &ReportRow) -> [f64; 7] {
    [r.total, r.b1, r.b2, r.b3_m, r.b4_s, r.b5, r.b6]
}

/// Aggregates per-run rows by manifest cell. Scenarios without any run row
/// are listed in the error.
pub fn compare(manifest: &[ManifestRow], rows: &[ReportRow]) -> Result<Vec<CompareCell>, Error> {
    let mut by_id: BTreeMap<&str, Vec<&ReportRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.is_aggregate()) {
        by_id.entry(r.scenario_id.as_str()).or_default().push(r);
    }
    let missing: Vec<&str> = manifest
        .iter()
        .map(|m| m.scenario_id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "no run rows for scenarios: {}",
            missing.join(", ")
        )));
    }
    let mut cells: BTreeMap<(String, String, usize), (usize, [f64; 7])> = BTreeMap::new();
    for m in manifest {
        let cell = cells
            .entry((m.spatial.clone(), m.tw.clone(), m.n_sd))
            .or_insert((0, [0.0; 7]));
        for r in &by_id[m.scenario_id.as_str()] {
            cell.0 += 1;
            for (s, v) in cell.1.iter_mut().zip(compare_metrics(r)) {
                *s += v;
            }
        }
    }
    let means: BTreeMap<_, _> = cells
        .into_iter()
        .map(|(k, (n, sums))| (k, (n, sums.map(|s| s / n as f64))))
        .collect();
    Ok(means
        .iter()
        .map(|((spatial, tw, n_sd), (runs, m))| {
            let base = means.get(&(spatial.clone(), tw.clone(), 0)).map(|b| b.1);
            let mut delta = [None; 7];
            if let Some(base) = base {
                for i in 0..7 {
                    if base[i] != 0.0 {
                        delta[i] = Some((m[i] / base[i] - 1.0) * 100.0);
                    }
                }
            }
            CompareCell {
                spatial: spatial.clone(),
                tw: tw.clone(),
                n_sd: *n_sd,
                runs: *runs,
                means: *m,
                delta_pct: delta,
            }
        })
        .collect())
}

pub fn compare_csv(cells: &[CompareCell]) -> String {
    let mut out = String::from("spatial,tw,n_sd,runs");
    for m in COMPARE_METRICS {
        out.push(',');
        out.push_str(m);
    }
    for m in COMPARE_METRICS {
        out.push_str(",d_");
        out.push_str(m);
        out.push_str("_pct");
    }
    out.push('\n');
    for c in cells {
        out.push_str(&format!("{},{},{},{}", c.spatial, c.tw, c.n_sd, c.runs));
        for v in c.means {
            out.push_str(&format!(",{v}"));
        }
        for d in c.delta_pct {
            match d {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}
