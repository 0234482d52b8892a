use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::document::CircuitDocument;
use super::run::run_document;
use crate::error::{Error, Result};

/// A one-parameter scan over a document.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// JSON pointer (`/components/1/theta`), dotted path
    /// (`components[1].theta`) or `component-name.field`.
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    /// Metric names to record; empty records every metric of the first point.
    pub metrics: Vec<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::param(
                "steps",
                format!("need at least 2, got {}", self.steps),
            ));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Error::param("from", "range ends must be finite"));
        }
        if self.from == self.to {
            return Err(Error::param("to", "range is empty (from == to)"));
        }
        Ok(())
    }

    /// Sampled values; the ends are exact.
    pub fn values(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| match i {
                0 => self.from,
                i if i == last => self.to,
                i => self.from + (self.to - self.from) * i as f64 / last as f64,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub metrics: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub pointer: String,
    pub metrics: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string(), self.parameter.clone()];
        header.extend(self.metrics.iter().cloned());
        w.write_record(&header).map_err(csv_error)?;
        for row in &self.rows {
            let mut rec = vec![row.index.to_string(), row.value.to_string()];
            rec.extend(row.metrics.iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    /// Column of one metric.
    pub fn column(&self, metric: &str) -> Option<Vec<f64>> {
        let i = self.metrics.iter().position(|m| m == metric)?;
        Some(self.rows.iter().map(|r| r.metrics[i]).collect())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn unresolved(path: &str, why: impl std::fmt::Display) -> Error {
    Error::document(format!("--param {path}"), why.to_string())
}

/// Turns any accepted parameter syntax into a JSON pointer into `doc`.
pub fn resolve_parameter(doc: &Value, path: &str) -> Result<String> {
    let pointer = if path.starts_with('/') {
        path.to_string()
    } else {
        let mut segments = Vec::new();
        for part in path.split('.') {
            let (key, indices) = match part.find('[') {
                Some(i) => (&part[..i], &part[i..]),
                None => (part, ""),
            };
            if key.is_empty() {
                return Err(unresolved(path, "empty path segment"));
            }
            segments.push(key.to_string());
            for idx in indices.split_terminator(']') {
                let idx = idx
                    .strip_prefix('[')
                    .filter(|s| s.parse::<usize>().is_ok())
                    .ok_or_else(|| unresolved(path, format!("bad index in `{part}`")))?;
                segments.push(idx.to_string());
            }
        }
        if doc.get(&segments[0]).is_none() {
            // first segment names a component
            let components = doc.get("components").and_then(Value::as_array);
            let found = components.and_then(|cs| {
                cs.iter().position(|c| {
                    c.get("name").and_then(Value::as_str) == Some(segments[0].as_str())
                })
            });
            let Some(i) = found else {
                return Err(unresolved(
                    path,
                    format!("no field or component named `{}`", segments[0]),
                ));
            };
            segments.splice(0..1, ["components".to_string(), i.to_string()]);
        }
        segments
            .iter()
            .map(|s| format!("/{}", s.replace('~', "~0").replace('/', "~1")))
            .collect()
    };
    match doc.pointer(&pointer) {
        Some(v) if v.is_number() => Ok(pointer),
        Some(_) => Err(unresolved(path, "not a number")),
        None => Err(unresolved(path, "does not exist")),
    }
}

/// Runs `doc` at every sampled value of the parameter. Points run in
/// parallel; rows come back in step order.
pub fn run_sweep(doc: &CircuitDocument, spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let base = serde_json::to_value(doc).expect("documents serialize");
    let pointer = resolve_parameter(&base, &spec.parameter)?;
    let results = spec
        .values()
        .into_par_iter()
        .enumerate()
        .map(|(index, value)| {
            let mut v = base.clone();
            *v.pointer_mut(&pointer).expect("resolved") = Value::from(value);
            let point: CircuitDocument = serde_json::from_value(v)
                .map_err(|e| unresolved(&spec.parameter, format!("value {value}: {e}")))?;
            let result = run_document(&point)
                .map_err(|e| Error::document(format!("sweep point {index}"), e.to_string()))?;
            Ok((index, value, result.metrics))
        })
        .collect::<Result<Vec<_>>>()?;

    let metrics = if spec.metrics.is_empty() {
        results[0].2.keys().cloned().collect()
    } else {
        spec.metrics.clone()
    };
    let mut rows = Vec::with_capacity(results.len());
    for (index, value, map) in results {
        let values = metrics
            .iter()
            .map(|m| {
                map.get(m).copied().ok_or_else(|| {
                    Error::param(
                        "metric",
                        format!(
                            "`{m}` not produced; available: {}",
                            map.keys().cloned().collect::<Vec<_>>().join(", ")
                        ),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(SweepRow {
            index,
            value,
            metrics: values,
        });
    }
    Ok(SweepTable {
        parameter: spec.parameter.clone(),
        pointer,
        metrics,
        rows,
    })
}
