//! JSON and CSV emitters.
//!
//! JSON is the full record and carries no timing, so it is reproducible byte
//! for byte. The CSV summary has the fixed columns
//! `seed,kind,steps,residual,success,millis`; `steps` and `residual` are empty
//! when a kind does not produce them.

use std::io::Write;
use std::path::Path;

use satpath_core::dynamics::PathRecord;
use serde::Serialize;

use crate::error::HarnessError;
use crate::experiment::RunReport;

pub const CSV_COLUMNS: [&str; 6] = ["seed", "kind", "steps", "residual", "success", "millis"];

pub fn to_json<S: Serialize>(value: &S) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_csv<W: Write>(report: &RunReport, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &report.records {
        w.write_record([
            r.seed.to_string(),
            r.kind.name().to_string(),
            r.steps.map(|s| s.to_string()).unwrap_or_default(),
            r.residual.map(|x| format!("{x:e}")).unwrap_or_default(),
            r.success.to_string(),
            r.millis.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

/// One row per profile: `step,group_count,satisfied`, with the satisfied
/// group indices separated by spaces.
pub fn write_path_csv<P, T, W: Write>(path: &PathRecord<P, T>, out: W) -> Result<(), HarnessError>
where
    T: satpath_core::Scalar,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "group_count", "satisfied"])?;
    for (step, sat) in path.per_step_satisfied.iter().enumerate() {
        let groups: Vec<String> = sat.iter().map(usize::to_string).collect();
        w.write_record([step.to_string(), sat.len().to_string(), groups.join(" ")])?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}
