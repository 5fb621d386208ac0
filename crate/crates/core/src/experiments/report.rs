//! Report rows, CSV/JSON emission and parsing, and the JSON schema check.

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use super::ExperimentConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    /// The verdict rule used everywhere: pass iff `value <= bound`.
    pub fn judge(value: f64, bound: f64) -> Self {
        if value <= bound {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// One statistic of one `(n, r)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub r: usize,
    pub samples: usize,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub verdict: Option<Verdict>,
}

impl ReportRow {
    /// Whether the stored verdict is the one the rule gives for the stored
    /// value and bound.
    pub fn verdict_consistent(&self) -> bool {
        match (self.bound, self.verdict) {
            (Some(b), Some(v)) => Verdict::judge(self.value, b) == v,
            (_, None) => true,
            (None, Some(_)) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub n: usize,
    pub r: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<SkippedCell>,
    pub notes: Vec<String>,
    /// Only present when timings were requested; excluded otherwise so that
    /// reruns are byte-identical.
    pub wall_time_secs: Option<f64>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.verdict == Some(Verdict::Fail))
            .count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    /// Rows of one statistic, in report order.
    pub fn rows_named<'a>(&'a self, statistic: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Format(format!(
                "unknown report format '{other}', expected csv or json"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

/// Floats with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty or compact JSON with every float written by [`format_f64`].
struct SigDigits<'a> {
    pretty: Option<PrettyFormatter<'a>>,
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                match &mut self.pretty {
                    Some(p) => p.$name(w $(, $arg)*),
                    None => serde_json::ser::CompactFormatter.$name(w $(, $arg)*),
                }
            }
        )*
    };
}

impl Formatter for SigDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(format_f64(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    forward! {
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let mut out = Vec::new();
    let fmt = SigDigits {
        pretty: pretty.then(PrettyFormatter::new),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// Single-line JSON with the same float format as reports.
pub fn format_json_compact<T: Serialize>(value: &T) -> String {
    to_json(value, false)
}

const CSV_COLUMNS: [&str; 8] = ["n", "r", "samples", "seed", "statistic", "value", "bound", "verdict"];

/// Renders a report. CSV starts with `#` comment lines carrying the
/// experiment name, configuration, skipped cells and notes, so that
/// [`parse_report`] can rebuild the whole report.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = to_json(report, true);
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::new();
            out.push_str(&format!("# experiment={}\n", report.experiment));
            out.push_str(&format!("# config={}\n", to_json(&report.config, false)));
            out.push_str(&format!("# skipped={}\n", to_json(&report.skipped, false)));
            out.push_str(&format!("# notes={}\n", to_json(&report.notes, false)));
            out.push_str(&format!(
                "# wall_time_secs={}\n",
                to_json(&report.wall_time_secs, false)
            ));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_COLUMNS).expect("in-memory CSV");
            for row in &report.rows {
                w.write_record([
                    row.n.to_string(),
                    row.r.to_string(),
                    row.samples.to_string(),
                    row.seed.to_string(),
                    row.statistic.clone(),
                    format_f64(row.value),
                    row.bound.map(format_f64).unwrap_or_default(),
                    row.verdict.map(|v| v.as_str().to_string()).unwrap_or_default(),
                ])
                .expect("in-memory CSV");
            }
            let bytes = w.into_inner().expect("in-memory CSV");
            out.push_str(&String::from_utf8(bytes).expect("CSV is UTF-8"));
            out
        }
    }
}

fn format_err(msg: impl fmt::Display) -> Error {
    Error::Format(msg.to_string())
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<ExperimentReport> {
    match format {
        ReportFormat::Json => serde_json::from_str(text).map_err(format_err),
        ReportFormat::Csv => parse_csv(text),
    }
}

fn parse_csv(text: &str) -> Result<ExperimentReport> {
    let mut experiment = None;
    let mut config = None;
    let mut skipped = Vec::new();
    let mut notes = Vec::new();
    let mut wall_time_secs = None;
    let mut body = String::new();
    for line in text.lines() {
        let Some(comment) = line.strip_prefix('#') else {
            body.push_str(line);
            body.push('\n');
            continue;
        };
        let Some((key, value)) = comment.trim().split_once('=') else {
            continue;
        };
        match key {
            "experiment" => experiment = Some(value.to_string()),
            "config" => config = Some(serde_json::from_str(value).map_err(format_err)?),
            "skipped" => skipped = serde_json::from_str(value).map_err(format_err)?,
            "notes" => notes = serde_json::from_str(value).map_err(format_err)?,
            "wall_time_secs" => wall_time_secs = serde_json::from_str(value).map_err(format_err)?,
            _ => {}
        }
    }
    let rows = parse_csv_rows(&body)?;
    Ok(ExperimentReport {
        experiment: experiment.ok_or_else(|| format_err("missing '# experiment=' line"))?,
        config: config.ok_or_else(|| format_err("missing '# config=' line"))?,
        rows,
        skipped,
        notes,
        wall_time_secs,
    })
}

/// Rows of a CSV report; comment lines are ignored.
pub fn parse_csv_rows(text: &str) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(format_err)?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(format_err(format!(
            "unexpected CSV header '{}', expected '{}'",
            header.iter().collect::<Vec<_>>().join(","),
            CSV_COLUMNS.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(format_err)?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |k: usize| format_err(format!("row {}: bad {} '{}'", i + 1, CSV_COLUMNS[k], field(k)));
        let opt_f64 = |k: usize| -> Result<Option<f64>> {
            match field(k) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(k)),
            }
        };
        rows.push(ReportRow {
            n: field(0).parse().map_err(|_| bad(0))?,
            r: field(1).parse().map_err(|_| bad(1))?,
            samples: field(2).parse().map_err(|_| bad(2))?,
            seed: field(3).parse().map_err(|_| bad(3))?,
            statistic: field(4).to_string(),
            value: field(5).parse().map_err(|_| bad(5))?,
            bound: opt_f64(6)?,
            verdict: match field(7) {
                "" => None,
                "pass" => Some(Verdict::Pass),
                "fail" => Some(Verdict::Fail),
                _ => return Err(bad(7)),
            },
        });
    }
    Ok(rows)
}

/// JSON Schema document for [`ExperimentReport`].
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

/// Checks `instance` against `schema` for the keywords the report schema
/// uses: `type`, `properties`, `required`, `additionalProperties` (boolean),
/// `items`, `enum`, `minimum` and `maximum`.
pub fn validate_against(schema: &Value, instance: &Value) -> std::result::Result<(), String> {
    validate_at(schema, instance, "$")
}

fn type_matches(ty: &str, v: &Value) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        _ => false,
    }
}

fn validate_at(schema: &Value, v: &Value, path: &str) -> std::result::Result<(), String> {
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => type_matches(t, v),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| type_matches(t, v)),
            _ => false,
        };
        if !ok {
            return Err(format!("{path}: expected type {ty}, got {v}"));
        }
    }
    if let Some(Value::Array(allowed)) = schema.get("enum") {
        if !allowed.contains(v) {
            return Err(format!("{path}: {v} not in {}", Value::Array(allowed.clone())));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            if x < min {
                return Err(format!("{path}: {x} below minimum {min}"));
            }
        }
        if let Some(max) = schema.get("maximum").and_then(Value::as_f64) {
            if x > max {
                return Err(format!("{path}: {x} above maximum {max}"));
            }
        }
    }
    if let Value::Object(map) = v {
        if let Some(Value::Array(req)) = schema.get("required") {
            for key in req.iter().filter_map(Value::as_str) {
                if !map.contains_key(key) {
                    return Err(format!("{path}: missing required property '{key}'"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (key, child) in map {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => validate_at(sub, child, &format!("{path}.{key}"))?,
                None => {
                    if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                        return Err(format!("{path}: unexpected property '{key}'"));
                    }
                }
            }
        }
    }
    if let (Value::Array(items), Some(sub)) = (v, schema.get("items")) {
        for (i, item) in items.iter().enumerate() {
            validate_at(sub, item, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

/// Validates report JSON text against [`REPORT_SCHEMA`].
pub fn validate_report_json(text: &str) -> Result<()> {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).expect("shipped schema parses");
    let instance: Value = serde_json::from_str(text).map_err(format_err)?;
    validate_against(&schema, &instance).map_err(Error::Format)
}
