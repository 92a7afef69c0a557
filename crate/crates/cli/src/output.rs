use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use treeperc::ModelParams;

use crate::{CliError, Format, OutArgs, OUT_DIR_ENV};

/// One CSV field.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(self, precision: u32) -> String {
        match self {
            Cell::Float(x) => format!("{:.*e}", precision as usize - 1, x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::Float(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

pub enum Body {
    Json(Value),
    Table {
        header: &'static [&'static str],
        rows: Vec<Vec<Cell>>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Reduction {
    pub gcd: u32,
    pub reduced: ModelParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: &'static str,
    /// Every flag after defaults and config resolution.
    pub settings: Value,
    pub params: Option<ModelParams>,
    pub reduction: Option<Reduction>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

pub struct Output {
    pub manifest: RunManifest,
    pub body: Body,
    pub out: OutArgs,
    pub started: Instant,
}

impl Output {
    pub fn new(subcommand: &str, settings: Value, out: &OutArgs, body: Body) -> Self {
        Self {
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                version: env!("CARGO_PKG_VERSION"),
                settings,
                params: None,
                reduction: None,
                seed: None,
                generator: None,
                outputs: Vec::new(),
                duration_secs: 0.0,
            },
            body,
            out: out.clone(),
            started: Instant::now(),
        }
    }

    pub fn emit(mut self, stdout: &mut dyn Write) -> Result<(), CliError> {
        let format = self.out.format.unwrap_or(match self.body {
            Body::Json(_) => Format::Json,
            Body::Table { .. } => Format::Csv,
        });
        let path = self.out.out.as_deref().map(resolve_out_path);
        if let Some(p) = &path {
            self.manifest.outputs.push(p.display().to_string());
        }
        self.manifest.duration_secs = self.started.elapsed().as_secs_f64();
        let text = match (format, &self.body) {
            (Format::Csv, Body::Json(_)) => {
                return Err(CliError::Usage(format!(
                    "{} has no CSV form; use --format json",
                    self.manifest.subcommand
                )))
            }
            (Format::Csv, Body::Table { header, rows }) => csv(header, rows, self.out.precision),
            (Format::Json, body) => {
                let result = match body {
                    Body::Json(v) => v.clone(),
                    Body::Table { header, rows } => table_json(header, rows),
                };
                let doc = json!({ "manifest": &self.manifest, "result": result });
                serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
            }
        };
        match path {
            None => stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
            Some(p) => {
                write_file(&p, &text)?;
                if format == Format::Csv {
                    let mut sidecar = p.clone().into_os_string();
                    sidecar.push(".manifest.json");
                    let text = serde_json::to_string_pretty(&self.manifest).expect("serializable") + "\n";
                    write_file(Path::new(&sidecar), &text)?;
                }
                Ok(())
            }
        }
    }
}

fn resolve_out_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn csv(header: &[&str], rows: &[Vec<Cell>], precision: u32) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|c| c.csv(precision)).collect();
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

fn table_json(header: &[&str], rows: &[Vec<Cell>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let obj: Map<String, Value> = header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.to_string(), c.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect(),
    )
}
