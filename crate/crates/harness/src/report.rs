//! CSV and JSON reports.
//!
//! Both formats hold the same two tables: one row per timed repetition
//! (`app,input,policy,param,threads,rep,seconds`) and one row per derived
//! metric (`app,input,threads,metric,value`). CSV separates the tables with
//! a blank line; JSON stores them as `runs` and `metrics`.

use crate::config::App;
use crate::metrics::{epsilon_sensitivity, speedup, worst_stealing};
use crate::run::BenchRecord;
use crate::HarnessError;
use loomsched::PolicyKind;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Format implied by a file extension, if any.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(HarnessError::Config(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub app: App,
    pub input: String,
    pub policy: String,
    pub param: String,
    pub threads: usize,
    pub rep: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub app: App,
    pub input: String,
    pub threads: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub runs: Vec<RunRow>,
    pub metrics: Vec<MetricRow>,
}

impl Report {
    /// Flatten records and compute every metric their coverage allows.
    pub fn from_records(records: &[BenchRecord]) -> Report {
        let runs = records
            .iter()
            .flat_map(|r| {
                r.times.iter().enumerate().map(move |(rep, &seconds)| RunRow {
                    app: r.app,
                    input: r.input.clone(),
                    policy: r.policy.clone(),
                    param: r.param.clone(),
                    threads: r.threads,
                    rep,
                    seconds,
                })
            })
            .collect();
        Report { runs, metrics: derived_metrics(records) }
    }

    /// Regroup run rows into records, in order of first appearance.
    pub fn records(&self) -> Vec<BenchRecord> {
        let mut index: HashMap<(App, &str, &str, &str, usize), usize> = HashMap::new();
        let mut out: Vec<BenchRecord> = Vec::new();
        for row in &self.runs {
            let key = (row.app, row.input.as_str(), row.policy.as_str(), row.param.as_str(), row.threads);
            let i = *index.entry(key).or_insert_with(|| {
                out.push(BenchRecord {
                    app: row.app,
                    input: row.input.clone(),
                    policy: row.policy.clone(),
                    param: row.param.clone(),
                    threads: row.threads,
                    times: Vec::new(),
                    verified: true,
                });
                out.len() - 1
            });
            out[i].times.push(row.seconds);
        }
        out
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> Result<(), HarnessError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, self)?;
                writeln!(w)?;
            }
            Format::Csv => {
                write_table(&mut w, &self.runs, &["app", "input", "policy", "param", "threads", "rep", "seconds"])?;
                writeln!(w)?;
                write_table(&mut w, &self.metrics, &["app", "input", "threads", "metric", "value"])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(format: Format, mut r: R) -> Result<Report, HarnessError> {
        match format {
            Format::Json => Ok(serde_json::from_reader(r)?),
            Format::Csv => {
                let mut text = String::new();
                r.read_to_string(&mut text)?;
                let text = text.replace("\r\n", "\n");
                let (runs, metrics) = text
                    .split_once("\n\n")
                    .ok_or_else(|| HarnessError::Config("csv report lacks a metrics table".into()))?;
                Ok(Report { runs: read_table(runs)?, metrics: read_table(metrics)? })
            }
        }
    }
}

fn write_table<W: Write, T: Serialize>(w: &mut W, rows: &[T], header: &[&str]) -> Result<(), HarnessError> {
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    csv.write_record(header)?;
    for row in rows {
        csv.serialize(row)?;
    }
    let bytes = csv.into_inner().map_err(|e| e.into_error())?;
    w.write_all(&bytes)?;
    Ok(())
}

fn read_table<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(HarnessError::from)).collect()
}

/// Every metric the records support, per (app, input, threads).
pub fn derived_metrics(records: &[BenchRecord]) -> Vec<MetricRow> {
    let cells: BTreeSet<(App, &str, usize)> =
        records.iter().map(|r| (r.app, r.input.as_str(), r.threads)).collect();
    let mut out = Vec::new();
    for (app, input, p) in cells {
        let mut push = |metric: String, value: f64| {
            out.push(MetricRow { app, input: input.to_string(), threads: p, metric, value });
        };
        for kind in PolicyKind::ALL {
            if let Ok(v) = speedup(records, app, input, kind, p) {
                push(format!("speedup_{}", kind.name()), v);
            }
        }
        if let Ok(v) = epsilon_sensitivity(records, app, input, p) {
            push("epsilon_sensitivity".into(), v);
        }
        if let Ok(v) = worst_stealing(records, app, input, p) {
            push("worst_stealing".into(), v);
        }
    }
    out
}

/// Write `records` and their metrics to `path`. Nothing is created when
/// there are no records.
pub fn emit_report(records: &[BenchRecord], format: Format, path: &Path) -> Result<Report, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let report = Report::from_records(records);
    report.write(format, BufWriter::new(File::create(path)?))?;
    Ok(report)
}

pub fn read_report(path: &Path, format: Format) -> Result<Report, HarnessError> {
    Report::read(format, std::io::BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<BenchRecord> {
        let mk = |policy: &str, param: &str, threads, times: Vec<f64>| BenchRecord {
            app: App::Synth,
            input: "exp-dec:n=10,beta=2".into(),
            policy: policy.into(),
            param: param.into(),
            threads,
            times,
            verified: true,
        };
        vec![
            mk("guided", "1", 1, vec![0.1, 0.30000000000000004, 1.0 / 3.0]),
            mk("ich", "0.25", 2, vec![0.07, 0.0625]),
            mk("ich", "0.5:figure", 2, vec![1e-7]),
            mk("stealing", "64", 2, vec![0.05]),
        ]
    }

    #[test]
    fn csv_has_one_row_per_rep() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&sample()[..1], Format::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let (runs, metrics) = text.split_once("\n\n").unwrap();
        assert_eq!(runs.lines().count(), 1 + 3);
        assert_eq!(runs.lines().next().unwrap(), "app,input,policy,param,threads,rep,seconds");
        assert_eq!(metrics.lines().next().unwrap(), "app,input,threads,metric,value");
    }

    #[test]
    fn formats_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("r.json");
        let csv = dir.path().join("r.csv");
        let report = emit_report(&sample(), Format::Json, &json).unwrap();
        let back = read_report(&json, Format::Json).unwrap();
        assert_eq!(back, report);
        back.write(Format::Csv, File::create(&csv).unwrap()).unwrap();
        let from_csv = read_report(&csv, Format::Csv).unwrap();
        assert_eq!(from_csv, report);
        assert_eq!(from_csv.records(), sample());
        assert!(report.metrics.iter().any(|m| m.metric == "worst_stealing"));
    }

    #[test]
    fn empty_records_create_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("none.csv");
        assert!(matches!(emit_report(&[], Format::Csv, &path), Err(HarnessError::EmptyReport)));
        assert!(!path.exists());
    }
}
