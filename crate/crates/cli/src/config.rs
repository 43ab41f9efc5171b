use std::fs;
use std::path::Path;

use bap_core::simnet::Scenario;
use toml::{Table, Value};

use crate::error::CliError;

/// One `--sweep key=v1,v2,...` request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Dotted path into the scenario, e.g. `links.bandwidth_bytes_per_sec`.
    pub key: String,
    pub values: Vec<Value>,
}

impl std::str::FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (key, list) = s.split_once('=').ok_or("expected key=v1,v2,...")?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(format!("bad key `{key}`"));
        }
        let values: Vec<Value> = list.split(',').map(|v| parse_value(v.trim())).collect();
        if values.iter().any(|v| matches!(v, Value::String(s) if s.is_empty())) {
            return Err("empty value in list".into());
        }
        Ok(SweepSpec { key: key.to_string(), values })
    }
}

/// A TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Scenario { path: path.to_path_buf(), message: format!("cannot read: {e}") })?;
    text.parse::<Table>().map_err(|e| CliError::Scenario { path: path.to_path_buf(), message: e.to_string() })
}

/// Strict conversion: unknown fields and type mismatches are errors, then
/// every invariant is checked.
pub fn scenario_from_table(table: Table, path: &Path) -> Result<Scenario, CliError> {
    let err = |message: String| CliError::Scenario { path: path.to_path_buf(), message };
    let scenario: Scenario =
        Value::Table(table).try_into().map_err(|e: toml::de::Error| err(e.to_string()))?;
    scenario.validate().map_err(|e| err(e.to_string()))?;
    Ok(scenario)
}

/// Parses and validates a scenario file, filling every default.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    scenario_from_table(read_table(path)?, path)
}

/// Sets a dotted key, creating intermediate tables.
pub fn set_path(table: &mut Table, key: &str, value: Value) -> Result<(), String> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut cursor = table;
    for part in parts {
        let entry = cursor.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| format!("`{part}` in `{key}` is not a table"))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

/// The resolved scenario as TOML, defaults included.
pub fn to_toml(scenario: &Scenario) -> Result<String, CliError> {
    toml::to_string(scenario).map_err(|e| CliError::Runtime(format!("cannot serialize scenario: {e}")))
}
