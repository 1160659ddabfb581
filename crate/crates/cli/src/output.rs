//! Emitted artifacts and the run manifest.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use ou_design::report::round_sig;

use crate::CliError;

pub const MANIFEST_SCHEMA: u32 = 1;
pub const CSV_SCHEMA: &str = "ou-design-csv/1";
pub const JSON_SCHEMA: &str = "ou-design-json/1";

/// One named output of a command.
pub struct Artifact {
    pub name: String,
    pub content: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, content: String) -> Self {
        Artifact { name: name.into(), content }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self, CliError> {
        let mut v = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
        round_numbers(&mut v);
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        Ok(Artifact::new(name, text))
    }
}

/// Rounds every non-integer JSON number to 12 significant digits.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap_or(f64::NAN));
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

#[derive(Serialize)]
struct OutputDigest {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    schema_version: u32,
    csv_schema: &'static str,
    json_schema: &'static str,
    command: &'a str,
    parameters: &'a Value,
    library_version: &'static str,
    seed: Option<u64>,
    wall_time_s: f64,
    outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Run {
    pub command: &'static str,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub started: Instant,
}

/// Writes the artifacts to `out_dir` (plus `manifest.json`), or prints them
/// to stdout with the manifest on stderr.
pub fn emit(run: &Run, artifacts: &[Artifact], out_dir: Option<&Path>) -> Result<(), CliError> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
        for a in artifacts {
            let path = dir.join(&a.name);
            fs::write(&path, &a.content).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        }
    } else {
        for (i, a) in artifacts.iter().enumerate() {
            if i > 0 {
                println!();
            }
            print!("{}", a.content);
        }
    }
    let digests = artifacts
        .iter()
        .map(|a| OutputDigest {
            name: a.name.clone(),
            bytes: a.content.len(),
            sha256: sha256_hex(a.content.as_bytes()),
        })
        .collect();
    write_manifest(run, digests, out_dir)
}

/// Manifest for commands whose output file was produced elsewhere.
pub fn emit_manifest_for_files(run: &Run, files: &[(&str, &[u8])], out_dir: Option<&Path>) -> Result<(), CliError> {
    let digests = files
        .iter()
        .map(|(name, bytes)| OutputDigest {
            name: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        })
        .collect();
    write_manifest(run, digests, out_dir)
}

fn write_manifest(run: &Run, outputs: Vec<OutputDigest>, out_dir: Option<&Path>) -> Result<(), CliError> {
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        csv_schema: CSV_SCHEMA,
        json_schema: JSON_SCHEMA,
        command: run.command,
        parameters: &run.parameters,
        library_version: ou_design::VERSION,
        seed: run.seed,
        wall_time_s: run.started.elapsed().as_secs_f64(),
        outputs,
    };
    let mut v = serde_json::to_value(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    round_numbers(&mut v);
    let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))? + "\n";
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
            let path = dir.join("manifest.json");
            fs::write(&path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
        }
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}
