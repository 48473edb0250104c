//! Acceptance criterion 8: the documented example invocations return the
//! stated exit codes, and JSON reports validate against the shipped
//! schema even on a mismatch exit.

use std::path::Path;
use std::process::Command;

fn rpq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rpq"))
}

fn schema() -> serde_json::Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/schema/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).expect("schema ships with the repo"))
        .expect("schema parses")
}

/// Minimal JSON-schema checker covering the subset the report schema
/// uses: type, required, properties, items, enum, additionalProperties.
fn validate(value: &serde_json::Value, schema: &serde_json::Value, path: &str) -> Vec<String> {
    use serde_json::Value;
    let mut errors = Vec::new();
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.is_i64() || value.is_u64(),
            "number" => value.is_number(),
            "boolean" => value.is_boolean(),
            _ => true,
        };
        if !ok {
            errors.push(format!("{}: expected {}", path, ty));
            return errors;
        }
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            errors.push(format!("{}: {} not in enum", path, value));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required.iter().filter_map(Value::as_str) {
            if value.get(key).is_none() {
                errors.push(format!("{}: missing required '{}'", path, key));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    errors.extend(validate(v, sub, &format!("{}.{}", path, key)));
                }
            }
        }
    }
    if let Some(ap) = schema.get("additionalProperties") {
        if ap.is_object() {
            if let Some(obj) = value.as_object() {
                let named: Vec<&str> = schema
                    .get("properties")
                    .and_then(Value::as_object)
                    .map(|p| p.keys().map(|s| s.as_str()).collect())
                    .unwrap_or_default();
                for (key, v) in obj {
                    if !named.contains(&key.as_str()) {
                        errors.extend(validate(v, ap, &format!("{}.{}", path, key)));
                    }
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                errors.extend(validate(v, items, &format!("{}[{}]", path, i)));
            }
        }
    }
    errors
}

fn assert_schema_valid(json_text: &str) {
    let value: serde_json::Value = serde_json::from_str(json_text).expect("valid JSON");
    let errors = validate(&value, &schema(), "$");
    assert!(errors.is_empty(), "schema violations: {:?}", errors);
}

#[test]
fn criterion_8_gsji_invocation() {
    let out = rpq()
        .args([
            "check",
            "--deformation",
            "pq",
            "--suite",
            "gsji",
            "--n",
            "4",
            "--seed",
            "7",
            "--format",
            "json",
        ])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_schema_valid(&stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["summary"]["mismatch"], 0);
    println!("ACCEPTANCE 8a PASS - gsji n=4 exit 0 with schema-valid JSON");
}

#[test]
fn criterion_8_bracket_invocation() {
    let out = rpq()
        .args([
            "bracket",
            "--deformation",
            "classical",
            "--ops",
            "WB(1,2),WB(2,2)",
        ])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim(), "1 * WB(3,2)");
    println!("ACCEPTANCE 8b PASS - bracket prints 1 * WB(3,2)");
}

#[test]
fn criterion_8_paper_literal_invocation() {
    let out = rpq()
        .args([
            "check",
            "--suite",
            "w2comm",
            "--deformation",
            "classical",
            "--paper-literal",
            "--format",
            "json",
            "--grid",
            "v=1..2,m1=0..1,r1=1..2,m2=0..1,r2=1..2",
        ])
        .output()
        .expect("binary runs");
    assert_eq!(
        out.status.code(),
        Some(2),
        "unrepaired structure-constant bounds must surface as mismatches"
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    // Schema-valid JSON even on the mismatch exit.
    assert_schema_valid(&stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(report["summary"]["mismatch"].as_u64().unwrap() > 0);
    println!("ACCEPTANCE 8c PASS - paper-literal run exits 2 with schema-valid JSON");
}
