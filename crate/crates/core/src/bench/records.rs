use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CfpError, Result};
use crate::solvers::{Method, RunStatus};

pub const CSV_HEADER: &str = "instance_id,n,m,method,iterations,wall_time_s,final_gap,status";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub method: Method,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub final_gap: f64,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    instance_id: String,
    n: usize,
    m: usize,
    method: String,
    iterations: usize,
    wall_time_s: f64,
    final_gap: f64,
    status: String,
}

pub fn write_csv<W: Write>(result: &BenchResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &result.rows {
        w.serialize(CsvRow {
            instance_id: r.instance_id.clone(),
            n: r.n,
            m: r.m,
            method: r.method.to_string(),
            iterations: r.iterations,
            wall_time_s: r.wall_time_s,
            final_gap: r.final_gap,
            status: r.status.to_string(),
        })?;
    }
    if result.rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<BenchResult> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(CfpError::Parse {
            location: "line 1".into(),
            message: format!("expected header `{CSV_HEADER}`"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<CsvRow>().enumerate() {
        let location = format!("line {}", i + 2);
        let rec = rec.map_err(|e| CfpError::Parse {
            location: location.clone(),
            message: e.to_string(),
        })?;
        let parse = |message: String| CfpError::Parse {
            location: location.clone(),
            message,
        };
        rows.push(BenchRow {
            method: rec.method.parse().map_err(|e: CfpError| parse(e.to_string()))?,
            status: rec.status.parse().map_err(|e: CfpError| parse(e.to_string()))?,
            instance_id: rec.instance_id,
            n: rec.n,
            m: rec.m,
            iterations: rec.iterations,
            wall_time_s: rec.wall_time_s,
            final_gap: rec.final_gap,
        });
    }
    Ok(BenchResult { rows })
}
