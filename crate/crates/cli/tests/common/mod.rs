//! Shared helpers for the CLI integration tests: running the binary and a
//! small JSON Schema validator used to hold reports to the published schema
//! documents.
//!
//! Shared by several test targets; not every target uses every helper.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Runs the built `evolv` binary with the given arguments in `dir`.
pub fn evolv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evolv"))
        .args(args)
        .current_dir(dir)
        .env_remove("EVOLV_THREADS")
        .output()
        .expect("binary runs")
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        !out.stdout.is_empty(),
        "expected a report on stdout; stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Repository schema directory, resolved relative to this crate.
pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema")
}

pub fn load_schema(name: &str) -> serde_json::Value {
    let path = schema_dir().join(name);
    let body = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    serde_json::from_str(&body).expect("schema file is JSON")
}

/// Validates `value` against the subset of JSON Schema the published
/// documents use: type, const, enum, required, properties,
/// additionalProperties, items, anyOf and local $ref into $defs.
pub fn validate(value: &serde_json::Value, schema: &serde_json::Value) -> Result<(), String> {
    validate_at(value, schema, schema, "$")
}

fn type_matches(value: &serde_json::Value, ty: &str) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        other => panic!("schema names unknown type {other:?}"),
    }
}

fn validate_at(
    value: &serde_json::Value,
    schema: &serde_json::Value,
    root: &serde_json::Value,
    path: &str,
) -> Result<(), String> {
    let obj = match schema.as_object() {
        Some(o) => o,
        None => return Ok(()),
    };

    if let Some(reference) = obj.get("$ref").and_then(|r| r.as_str()) {
        let name = reference
            .strip_prefix("#/$defs/")
            .unwrap_or_else(|| panic!("unsupported $ref {reference:?}"));
        let target = root
            .pointer(&format!("/$defs/{name}"))
            .unwrap_or_else(|| panic!("dangling $ref {reference:?}"));
        return validate_at(value, target, root, path);
    }

    if let Some(any) = obj.get("anyOf").and_then(|a| a.as_array()) {
        let mut failures = Vec::new();
        for candidate in any {
            match validate_at(value, candidate, root, path) {
                Ok(()) => return Ok(()),
                Err(e) => failures.push(e),
            }
        }
        return Err(format!("{path}: no anyOf branch matched ({})", failures.join(" | ")));
    }

    if let Some(ty) = obj.get("type") {
        let allowed: Vec<&str> = match ty {
            serde_json::Value::String(s) => vec![s.as_str()],
            serde_json::Value::Array(a) => {
                a.iter().map(|t| t.as_str().expect("type name")).collect()
            }
            _ => panic!("bad type clause at {path}"),
        };
        if !allowed.iter().any(|t| type_matches(value, t)) {
            return Err(format!("{path}: type is not one of {allowed:?}"));
        }
    }
    if let Some(expected) = obj.get("const") {
        if value != expected {
            return Err(format!("{path}: expected const {expected}"));
        }
    }
    if let Some(options) = obj.get("enum").and_then(|e| e.as_array()) {
        if !options.contains(value) {
            return Err(format!("{path}: {value} not in enum"));
        }
    }
    if let Some(required) = obj.get("required").and_then(|r| r.as_array()) {
        if let Some(map) = value.as_object() {
            for key in required {
                let key = key.as_str().expect("required key");
                if !map.contains_key(key) {
                    return Err(format!("{path}: missing required key {key:?}"));
                }
            }
        }
    }
    if let Some(props) = obj.get("properties").and_then(|p| p.as_object()) {
        if let Some(map) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = map.get(key) {
                    validate_at(v, sub, root, &format!("{path}.{key}"))?;
                }
            }
            if obj.get("additionalProperties") == Some(&serde_json::Value::Bool(false)) {
                for key in map.keys() {
                    if !props.contains_key(key) {
                        return Err(format!("{path}: unexpected key {key:?}"));
                    }
                }
            }
        }
    }
    if let Some(items) = obj.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate_at(v, items, root, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}
