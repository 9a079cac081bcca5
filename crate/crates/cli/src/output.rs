//! JSON-lines records and CSV tables. CSV files carry no timing columns, so
//! reruns with the same config and seed are byte-identical.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OutputNames;
use crate::sweep::Record;
use crate::CliError;

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    class: &'a str,
    m: &'a str,
    n: &'a str,
    q: usize,
    #[serde(rename = "gamma_breve_A")]
    gamma_breve_a: f64,
    #[serde(rename = "gamma_B_low")]
    gamma_b_low: f64,
    #[serde(rename = "gamma_B_cap")]
    gamma_b_cap: Option<f64>,
    #[serde(rename = "delta_B_low")]
    delta_b_low: f64,
    #[serde(rename = "delta_tilde_B_low")]
    delta_tilde_b_low: f64,
    #[serde(rename = "delta_tilde_A")]
    delta_tilde_a: f64,
    reach_bound: f64,
    height_bound: f64,
    length_bound: f64,
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "class",
    "m",
    "n",
    "q",
    "gamma_breve_A",
    "gamma_B_low",
    "gamma_B_cap",
    "delta_B_low",
    "delta_tilde_B_low",
    "delta_tilde_A",
    "reach_bound",
    "height_bound",
    "length_bound",
];

pub const TREK_HEADER: [&str; 9] = [
    "m",
    "n",
    "reach_sum",
    "height_sum",
    "length_sum",
    "alternative_length",
    "direct_length",
    "direct_propinquity",
    "smallest",
];

pub fn write_records(path: &Path, records: &[Record]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// One row per successful cell; for second-class cells the per-side columns
/// hold the `m` side (both sides are in the records).
pub fn write_summary(path: &Path, records: &[Record]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in records {
        let Some(rep) = &r.report else { continue };
        let p = &rep.parts[0];
        w.serialize(SummaryRow {
            class: &r.class,
            m: &r.m,
            n: r.n.as_deref().unwrap_or(""),
            q: r.q,
            gamma_breve_a: p.gamma_breve_a.value,
            gamma_b_low: p.gamma_b.value,
            gamma_b_cap: p.gamma_b.cap,
            delta_b_low: p.deltas.delta_b.value,
            delta_tilde_b_low: p.deltas.delta_tilde_b.value,
            delta_tilde_a: p.delta_tilde_a.value,
            reach_bound: rep.reach_bound,
            height_bound: rep.height_bound,
            length_bound: rep.length_bound,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Length bound against `m` (or `m:n`), one column per level.
pub fn write_plot(path: &Path, records: &[Record], levels: &[usize]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["m".to_string()];
    header.extend(levels.iter().map(|q| format!("q={q}")));
    w.write_record(&header)?;
    let mut keys: Vec<(String, Option<String>)> = Vec::new();
    for r in records.iter().filter(|r| r.report.is_some()) {
        let k = (r.m.clone(), r.n.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    for (m, n) in keys {
        let x = match &n {
            Some(n) => format!("{m}:{n}"),
            None => m.clone(),
        };
        let mut row = vec![x];
        for &q in levels {
            let v = records
                .iter()
                .find(|r| r.m == m && r.n == n && r.q == q)
                .and_then(|r| r.report.as_ref())
                .map(|rep| rep.length_bound.to_string())
                .unwrap_or_default();
            row.push(v);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trek(path: &Path, records: &[Record]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TREK_HEADER)?;
    for r in records {
        let (Some(t), Some(d)) = (&r.trek, &r.direct) else { continue };
        w.write_record([
            r.m.clone(),
            r.n.clone().unwrap_or_default(),
            t.reach_sum.to_string(),
            t.height_sum.to_string(),
            t.length_sum.to_string(),
            t.alternative_length.to_string(),
            t.direct_length.map(|v| v.to_string()).unwrap_or_default(),
            d.propinquity_bound.to_string(),
            t.smallest.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every output into `dir` and returns the written paths.
pub fn write_all(dir: &Path, names: &OutputNames, records: &[Record], levels: &[usize], trek: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut out = vec![dir.join(&names.records)];
    write_records(&out[0], records)?;
    if trek {
        let p = dir.join(&names.trek);
        write_trek(&p, records)?;
        out.push(p);
    } else {
        let s = dir.join(&names.summary);
        write_summary(&s, records)?;
        let p = dir.join(&names.plot);
        write_plot(&p, records, levels)?;
        out.push(s);
        out.push(p);
    }
    Ok(out)
}
