//! Deterministic result emission: CSV with 17-significant-digit floats, or
//! a JSON envelope carrying the same table plus provenance.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// 17 significant digits: enough to round-trip any f64 bit pattern.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn json_values(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| ((*k).to_string(), serde_json::Value::String(v.clone())))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Stable FNV-1a hash of the raw config text, recorded for provenance.
pub fn config_hash(raw: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in raw.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

pub fn write_table(
    table: &Table,
    format: &str,
    path: &Path,
    raw_config: &str,
    subcommand: &str,
) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    match format {
        "csv" => {
            file.write_all(table.csv().as_bytes())?;
        }
        "json" => {
            let envelope = serde_json::json!({
                "subcommand": subcommand,
                "config_hash": config_hash(raw_config),
                "version": env!("CARGO_PKG_VERSION"),
                "inputs": serde_json::from_str::<serde_json::Value>(raw_config)?,
                "values": table.json_values(),
            });
            file.write_all(serde_json::to_string_pretty(&envelope)?.as_bytes())?;
            file.write_all(b"\n")?;
        }
        other => anyhow::bail!("unknown output format \"{other}\" (csv|json)"),
    }
    Ok(())
}
