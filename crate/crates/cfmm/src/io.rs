//! CSV and JSON files: traced boundaries and their metadata, round-trip
//! reports and simulation ledgers.

use std::path::{Path, PathBuf};

use cfmm_core::sim::PathRecord;
use cfmm_core::verify::RoundTripReport;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fmt::num;

pub const BOUNDARY_HEADER: [&str; 2] = ["R1", "R2"];
pub const ROUND_TRIP_HEADER: [&str; 5] = ["c1", "c2", "target", "forward", "rel_error"];
pub const LEDGER_HEADER: [&str; 4] = ["path", "terminal_price", "cfmm_pnl", "rebal_pnl"];

fn csv_string<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub fn boundary_csv(points: &[(f64, f64)]) -> String {
    csv_string(&BOUNDARY_HEADER, points.iter().map(|&(x, y)| [num(x), num(y)]))
}

pub fn round_trip_csv(report: &RoundTripReport) -> String {
    csv_string(
        &ROUND_TRIP_HEADER,
        report.rows.iter().map(|r| {
            let c = r.c.as_slice();
            [num(c[0]), num(c[1]), num(r.target), num(r.forward), num(r.rel_error)]
        }),
    )
}

/// Excluded paths have empty PnL fields.
pub fn ledger_csv(records: &[PathRecord]) -> String {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    csv_string(
        &LEDGER_HEADER,
        records.iter().map(|r| [r.index.to_string(), num(r.terminal_price), opt(r.cfmm_pnl), opt(r.rebal_pnl)]),
    )
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Boundary points from an `R1,R2` file, checked to be finite and strictly
/// increasing in `R1`.
pub fn read_boundary_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_boundary_csv(&text).map_err(|reason| Error::Csv { path: path.to_path_buf(), reason })
}

pub fn parse_boundary_csv(text: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().collect::<Vec<_>>() != BOUNDARY_HEADER {
        return Err(format!("expected header `R1,R2`, got `{}`", header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = i + 2;
        let field = |j: usize| -> std::result::Result<f64, String> {
            let raw = record.get(j).ok_or_else(|| format!("line {line}: missing column"))?;
            let x: f64 = raw.parse().map_err(|_| format!("line {line}: `{raw}` is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("line {line}: non-finite value"))
            }
        };
        let p = (field(0)?, field(1)?);
        if let Some(&(prev, _)) = points.last() {
            if !(p.0 > prev) {
                return Err(format!("line {line}: R1 must be strictly increasing"));
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err("no rows".into());
    }
    Ok(points)
}

/// Sidecar path: `curve.csv` → `curve.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeta {
    pub family: String,
    pub params: Map<String, Value>,
    pub n: usize,
    /// `traced` or `closed_form`.
    pub construction: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridMeta>,
    pub tolerances: Map<String, Value>,
    pub rows: usize,
}

impl BoundaryMeta {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes") + "\n"
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// `family (k=v, ...)` for plot legends.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            return self.family.clone();
        }
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{} ({})", self.family, params.join(", "))
    }
}
