//! Report bundles, canonical JSON and the CSV simulation log.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use num_rational::BigRational;
use qpv_core::qcore::rational::{format_rational, rational_to_f64};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "qpv-lab";
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const CSV_COLUMNS: [&str; 10] = [
    "config_hash",
    "protocol",
    "strategy",
    "rounds",
    "seed",
    "success_rate",
    "conclusive_rate",
    "conditional_rate",
    "wilson_lo",
    "wilson_hi",
];

#[derive(Debug, Clone, Serialize)]
pub struct NamedResult {
    pub name: String,
    pub value: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    /// Left empty so that identical runs give identical bytes.
    pub timestamp: Option<String>,
    pub passed: bool,
    pub results: Vec<NamedResult>,
}

impl ReportBundle {
    pub fn new(command: &str, config: Value, seed: Option<u64>) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seed,
            timestamp: None,
            passed: true,
            results: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("report values serialize");
        self.results.push(NamedResult {
            name: name.to_string(),
            value,
        });
    }

    /// Sorted keys, floats at 12 significant digits, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let v = canonicalize(serde_json::to_value(self).expect("bundle serializes"));
        let mut s = serde_json::to_string_pretty(&v).expect("value prints");
        s.push('\n');
        s
    }
}

/// Rounds a float to the report precision.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Rebuilds a value with sorted object keys and rounded floats.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(canonicalize).collect()),
        Value::Object(m) => {
            let mut keys: Vec<_> = m.into_iter().collect();
            keys.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, x) in keys {
                out.insert(k, canonicalize(x));
            }
            Value::Object(out)
        }
        other => other,
    }
}

/// `{"exact": "p/q", "decimal": x}`.
pub fn rational_json(r: &BigRational) -> Value {
    json!({ "exact": format_rational(r), "decimal": rational_to_f64(r) })
}

/// First 16 hex digits of SHA-256 over the canonical JSON of `config`.
pub fn config_hash(config: &impl Serialize) -> String {
    let v = canonicalize(serde_json::to_value(config).expect("config serializes"));
    let digest = Sha256::digest(serde_json::to_string(&v).expect("value prints").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Writes `<dir>/<name>.json`.
pub fn write_bundle(dir: &Path, name: &str, bundle: &ReportBundle) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{name}.json")), bundle.to_canonical_json())
}

/// Appends rows to `<dir>/simulations.csv`, writing the header for a new file.
pub fn append_csv(dir: &Path, rows: &[Vec<String>]) -> Result<(), Box<dyn std::error::Error>> {
    fs::create_dir_all(dir)?;
    let path = dir.join("simulations.csv");
    let fresh = !path.exists() || fs::metadata(&path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(&path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Float formatting used in CSV cells and text output.
pub fn fmt_num(x: f64) -> String {
    format!("{}", round_sig(x))
}

pub fn print_lines(out: &mut impl Write, lines: &[String]) -> std::io::Result<()> {
    for l in lines {
        writeln!(out, "{l}")?;
    }
    Ok(())
}
