//! CSV and JSON rendering of sweep results.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which round-trips
//! every finite `f64` exactly. Apart from the optional `timing` line in JSON,
//! output is a pure function of the result.

use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write;

use serde_json::Value;

use super::config::{Experiment, ExperimentConfig, Format, ParamValue};
use super::{Cell, LabError, RunMetadata, SweepResult, Timing};

pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(x) => x.to_string(),
        Cell::Real(x) => format_real(*x),
        Cell::Text(s) => s.clone(),
        Cell::Null => String::new(),
    }
}

/// Header row of column names, then one line per row; LF endings.
pub fn render_csv(result: &SweepResult) -> String {
    let mut out = result.columns.join(",");
    out.push('\n');
    for row in &result.rows {
        let line: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_real(x: f64) -> String {
    if x.is_finite() {
        format_real(x)
    } else {
        "null".to_string()
    }
}

fn json_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(x) => x.to_string(),
        Cell::Real(x) => json_real(*x),
        Cell::Text(s) => json_string(s),
        Cell::Null => "null".to_string(),
    }
}

fn json_param(value: &ParamValue) -> String {
    match value {
        ParamValue::Int(x) => x.to_string(),
        ParamValue::Real(x) => json_real(*x),
        ParamValue::List(xs) => {
            let items: Vec<String> = xs.iter().map(|x| json_real(*x)).collect();
            format!("[{}]", items.join(", "))
        }
    }
}

fn json_object<'a>(entries: impl Iterator<Item = (&'a str, String)>) -> String {
    let items: Vec<String> = entries.map(|(k, v)| format!("{}: {v}", json_string(k))).collect();
    format!("{{{}}}", items.join(", "))
}

/// `{"metadata": {...}, "rows": [...]}`, one row object per line.
///
/// The `timing` entry, when present, sits alone on one line so that
/// reproducibility checks can drop it.
pub fn render_json(result: &SweepResult) -> String {
    let meta = &result.metadata;
    let mut out = String::from("{\n  \"metadata\": {\n");
    let columns: Vec<String> = result.columns.iter().map(|c| json_string(c)).collect();
    let mut fields = vec![
        format!("    \"experiment\": {}", json_string(result.experiment.name())),
        format!("    \"version\": {}", json_string(&meta.version)),
        format!("    \"seed\": {}", meta.seed),
        format!(
            "    \"params\": {}",
            json_object(meta.params.iter().map(|(k, v)| (k.as_str(), json_param(v))))
        ),
        format!("    \"columns\": [{}]", columns.join(", ")),
        format!(
            "    \"summary\": {}",
            json_object(result.summary.iter().map(|(k, v)| (k.as_str(), json_cell(v))))
        ),
        format!(
            "    \"conventions\": {}",
            json_object(meta.conventions.iter().map(|(k, v)| (k.as_str(), json_string(v))))
        ),
    ];
    if let Some(t) = &meta.timing {
        fields.push(format!(
            "    \"timing\": {{\"timestamp\": {}, \"wall_time_seconds\": {}}}",
            json_string(&t.timestamp),
            json_real(t.wall_time_seconds)
        ));
    }
    out.push_str(&fields.join(",\n"));
    out.push_str("\n  },\n  \"rows\": [\n");
    let rows: Vec<String> = result
        .rows
        .iter()
        .map(|row| {
            let obj = json_object(result.columns.iter().map(String::as_str).zip(row.iter().map(json_cell)));
            format!("    {obj}")
        })
        .collect();
    out.push_str(&rows.join(",\n"));
    if !rows.is_empty() {
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn render(result: &SweepResult, format: Format) -> String {
    match format {
        Format::Csv => render_csv(result),
        Format::Json => render_json(result),
    }
}

/// Writes the rendered result to the configured path, or to stdout when the
/// config has none. An existing file is only replaced when `force` is set.
pub fn emit(result: &SweepResult, config: &ExperimentConfig, force: bool) -> Result<(), LabError> {
    let text = render(result, config.format);
    match &config.output_path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
        Some(path) => {
            let mut options = OpenOptions::new();
            options.write(true);
            if force {
                options.create(true).truncate(true);
            } else {
                options.create_new(true);
            }
            let mut file = options.open(path).map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => LabError::Refused(path.clone()),
                _ => LabError::Io(e),
            })?;
            file.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn parse_error(msg: impl Into<String>) -> LabError {
    LabError::Parse(msg.into())
}

fn cell_from_json(value: &Value) -> Result<Cell, LabError> {
    Ok(match value {
        Value::Null => Cell::Null,
        Value::String(s) => Cell::Text(s.clone()),
        Value::Number(n) if n.is_i64() => Cell::Int(n.as_i64().unwrap_or_default()),
        Value::Number(n) => Cell::Real(n.as_f64().ok_or_else(|| parse_error(format!("bad number {n}")))?),
        other => return Err(parse_error(format!("unexpected cell {other}"))),
    })
}

fn real_from_json(value: &Value) -> Result<f64, LabError> {
    value.as_f64().ok_or_else(|| parse_error(format!("expected a number, got {value}")))
}

fn param_from_json(value: &Value) -> Result<ParamValue, LabError> {
    Ok(match value {
        Value::Number(n) if n.is_i64() => ParamValue::Int(n.as_i64().unwrap_or_default()),
        Value::Number(_) => ParamValue::Real(real_from_json(value)?),
        Value::Array(items) => ParamValue::List(items.iter().map(real_from_json).collect::<Result<_, _>>()?),
        other => return Err(parse_error(format!("unexpected parameter value {other}"))),
    })
}

fn object<'a>(value: &'a Value, key: &str) -> Result<&'a serde_json::Map<String, Value>, LabError> {
    value
        .get(key)
        .and_then(Value::as_object)
        .ok_or_else(|| parse_error(format!("missing object `{key}`")))
}

fn string<'a>(value: &'a Value, key: &str) -> Result<&'a str, LabError> {
    value
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| parse_error(format!("missing string `{key}`")))
}

/// Inverse of [`render_json`].
pub fn parse_json(text: &str) -> Result<SweepResult, LabError> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    let meta = root.get("metadata").ok_or_else(|| parse_error("missing `metadata`"))?;

    let name = string(meta, "experiment")?;
    let experiment = Experiment::from_name(name).ok_or_else(|| parse_error(format!("unknown experiment `{name}`")))?;
    let columns: Vec<String> = meta
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_error("missing `columns`"))?
        .iter()
        .map(|c| c.as_str().map(str::to_string).ok_or_else(|| parse_error("column names must be strings")))
        .collect::<Result<_, _>>()?;
    let seed = meta
        .get("seed")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_error("missing `seed`"))?;
    let params = object(meta, "params")?
        .iter()
        .map(|(k, v)| Ok((k.clone(), param_from_json(v)?)))
        .collect::<Result<_, LabError>>()?;
    let summary = object(meta, "summary")?
        .iter()
        .map(|(k, v)| Ok((k.clone(), cell_from_json(v)?)))
        .collect::<Result<_, LabError>>()?;
    let conventions = object(meta, "conventions")?
        .iter()
        .map(|(k, v)| {
            v.as_str()
                .map(|s| (k.clone(), s.to_string()))
                .ok_or_else(|| parse_error("conventions must be strings"))
        })
        .collect::<Result<_, _>>()?;
    let timing = match meta.get("timing") {
        None => None,
        Some(t) => Some(Timing {
            timestamp: string(t, "timestamp")?.to_string(),
            wall_time_seconds: real_from_json(t.get("wall_time_seconds").unwrap_or(&Value::Null))?,
        }),
    };

    let rows = root
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_error("missing `rows`"))?
        .iter()
        .map(|row| {
            columns
                .iter()
                .map(|c| cell_from_json(row.get(c).ok_or_else(|| parse_error(format!("row lacks `{c}`")))?))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    Ok(SweepResult {
        experiment,
        columns,
        rows,
        summary,
        metadata: RunMetadata {
            version: string(meta, "version")?.to_string(),
            seed,
            params,
            conventions,
            timing,
        },
    })
}

/// Drops the `timing` line from rendered JSON.
pub fn strip_timing(json: &str) -> String {
    let mut out = String::with_capacity(json.len());
    let mut lines = json.lines().peekable();
    while let Some(line) = lines.next() {
        if line.trim_start().starts_with("\"timing\"") {
            continue;
        }
        // the field before `timing` carries a trailing comma
        let next_is_timing = lines.peek().is_some_and(|n| n.trim_start().starts_with("\"timing\""));
        let line = if next_is_timing { line.strip_suffix(',').unwrap_or(line) } else { line };
        let _ = writeln!(out, "{line}");
    }
    out
}
