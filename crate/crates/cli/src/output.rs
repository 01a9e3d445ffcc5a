use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
}

impl Metadata {
    pub fn new(command: &'static str, seed: u64, config: Value) -> Self {
        Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            command,
            seed,
            config,
        }
    }
}

/// A table of rows plus named side results.
pub struct Output {
    pub columns: &'static [&'static str],
    pub rows: Vec<Value>,
    pub extra: Vec<(&'static str, Value)>,
    pub default_format: Format,
}

impl Output {
    pub fn new(columns: &'static [&'static str], default_format: Format) -> Self {
        Output {
            columns,
            rows: Vec::new(),
            extra: Vec::new(),
            default_format,
        }
    }

    pub fn push<T: Serialize>(&mut self, row: T) -> anyhow::Result<()> {
        self.rows.push(serde_json::to_value(row)?);
        Ok(())
    }

    pub fn extra<T: Serialize>(&mut self, key: &'static str, value: T) -> anyhow::Result<()> {
        self.extra.push((key, serde_json::to_value(value)?));
        Ok(())
    }
}

/// Renders everything first so that a failure leaves no partial file behind.
pub fn write(out: &Output, meta: &Metadata, format: Format, path: Option<&Path>) -> anyhow::Result<()> {
    let bytes = match format {
        Format::Csv => render_csv(out, meta)?,
        Format::Json => render_json(out, meta)?,
    };
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout().write_all(&bytes).context("cannot write to stdout"),
    }
}

fn render_json(out: &Output, meta: &Metadata) -> anyhow::Result<Vec<u8>> {
    let mut doc = Map::new();
    doc.insert("metadata".into(), serde_json::to_value(meta)?);
    doc.insert("rows".into(), Value::Array(out.rows.clone()));
    for (k, v) in &out.extra {
        doc.insert((*k).into(), v.clone());
    }
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn render_csv(out: &Output, meta: &Metadata) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# tool: {} {}", meta.tool, meta.version)?;
    writeln!(buf, "# schema_version: {}", meta.schema_version)?;
    writeln!(buf, "# command: {}", meta.command)?;
    writeln!(buf, "# seed: {}", meta.seed)?;
    writeln!(buf, "# config: {}", meta.config)?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(out.columns)?;
        for row in &out.rows {
            w.write_record(out.columns.iter().map(|c| cell(row.get(*c))))?;
        }
        w.flush()?;
    }
    for (k, v) in &out.extra {
        writeln!(buf, "# {k}: {v}")?;
    }
    Ok(buf)
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// Strips `#` lines and parses the remaining CSV into header and records.
#[cfg(test)]
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}
