use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

pub const WALL_TIME_FIELD: &str = "wall_time_seconds";

/// Shortest form that still carries 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with every float written as `d.ddddddddddddddddde±x`.
struct SignificantDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report values serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (None, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => format_f64(f),
            _ => n.to_string(),
        }),
        Value::Bool(b) => Some(b.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Null => Some(String::new()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, rows);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, rows);
            }
        }
        scalar => rows.push((prefix.to_owned(), scalar_text(scalar).unwrap_or_default())),
    }
}

/// One `experiment,quantity,value` row per result leaf and per assertion,
/// plus a `run` row for the wall time.
pub fn to_csv(report: &Value) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "quantity", "value"]).expect("in-memory write");
    if let Some(results) = report.get("results").and_then(Value::as_object) {
        for (experiment, section) in results {
            let mut rows = Vec::new();
            flatten("", section, &mut rows);
            for (quantity, value) in rows {
                w.write_record([experiment.as_str(), &quantity, &value]).expect("in-memory write");
            }
        }
    }
    for a in report.get("assertions").and_then(Value::as_array).into_iter().flatten() {
        let experiment = a["experiment"].as_str().unwrap_or_default();
        let quantity = format!("assertion.{}", a["name"].as_str().unwrap_or_default());
        let verdict = if a["passed"].as_bool() == Some(true) { "pass" } else { "fail" };
        w.write_record([experiment, &quantity, verdict]).expect("in-memory write");
    }
    if let Some(t) = report.get(WALL_TIME_FIELD) {
        w.write_record(["run", WALL_TIME_FIELD, &scalar_text(t).unwrap_or_default()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    String,
    Number,
    Integer,
    Bool,
    Object,
    Array,
    /// Number or null.
    OptionalNumber,
    /// Map from names to numbers.
    NumberMap,
    BoolMap,
    StringMap,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSpec {
    pub path: &'static str,
    pub kind: Kind,
    pub description: &'static str,
}

const fn field(path: &'static str, kind: Kind, description: &'static str) -> FieldSpec {
    FieldSpec {
        path,
        kind,
        description,
    }
}

/// Stable layout of the JSON report. `*` matches any key, `[]` any element.
pub fn report_schema() -> Vec<FieldSpec> {
    use Kind::*;
    vec![
        field("experiment", String, "requested experiment: bounds, angular, phasespace, weyl or all"),
        field("artifact_version", String, "crate version that produced the report"),
        field("config", Object, "echo of the run configuration"),
        field("config.experiment", String, "experiment flag"),
        field("config.format", String, "format flag"),
        field("config.seed", Integer, "optimizer seed"),
        field("config.budget", OptionalNumber, "budget override, null when unset"),
        field("config.tol", OptionalNumber, "tolerance override, null when unset"),
        field("config.effective", Object, "all budgets, tolerances and boxes actually used"),
        field("results", Object, "one section per experiment that ran"),
        field("results.*.values", NumberMap, "computed values"),
        field("results.*.parameters", NumberMap, "maximizing parameters"),
        field("results.*.classifications", StringMap, "bound classification of each CHSH value"),
        field("results.*.residuals", NumberMap, "absolute differences from references and oracles"),
        field("results.*.flags", BoolMap, "boolean outcomes"),
        field("results.*.notes", StringMap, "fixed explanatory text"),
        field("results.*.tsirelson_ok", Bool, "every CHSH value in the section is at most 2√2 + 1e-9"),
        field("assertions", Array, "hard checks evaluated during the run"),
        field("assertions[].experiment", String, "experiment the check belongs to"),
        field("assertions[].name", String, "check name"),
        field("assertions[].passed", Bool, "outcome"),
        field("assertions[].detail", String, "value that was checked"),
        field("tsirelson_ok", Bool, "the Tsirelson ceiling held in every section"),
        field(WALL_TIME_FIELD, Number, "elapsed wall-clock time; the only non-deterministic field"),
    ]
}

pub fn schema_text() -> String {
    let mut out = String::from("chsh report layout (JSON; floats carry 17 significant digits)\n\n");
    for f in report_schema() {
        let kind = serde_json::to_value(f.kind).expect("kind serializes");
        let _ = writeln!(out, "{:<28} {:<14} {}", f.path, kind.as_str().unwrap_or_default(), f.description);
    }
    out
}

fn select<'a>(v: &'a Value, path: &[&str]) -> Vec<(String, &'a Value)> {
    let Some((head, rest)) = path.split_first() else {
        return vec![(String::new(), v)];
    };
    let children: Vec<(String, &Value)> = if *head == "*" {
        v.as_object().map(|m| m.iter().map(|(k, c)| (k.clone(), c)).collect()).unwrap_or_default()
    } else if let Some(name) = head.strip_suffix("[]") {
        v.get(name)
            .and_then(Value::as_array)
            .map(|items| items.iter().enumerate().map(|(i, c)| (format!("{name}[{i}]"), c)).collect())
            .unwrap_or_default()
    } else {
        v.get(*head).map(|c| vec![(head.to_string(), c)]).unwrap_or_default()
    };
    children
        .into_iter()
        .flat_map(|(k, c)| {
            select(c, rest)
                .into_iter()
                .map(move |(sub, leaf)| (if sub.is_empty() { k.clone() } else { format!("{k}.{sub}") }, leaf))
        })
        .collect()
}

fn kind_matches(kind: Kind, v: &Value) -> bool {
    let map_of = |pred: fn(&Value) -> bool| v.as_object().is_some_and(|m| m.values().all(pred));
    match kind {
        Kind::String => v.is_string(),
        Kind::Number => v.is_number(),
        Kind::Integer => v.is_u64() || v.is_i64(),
        Kind::Bool => v.is_boolean(),
        Kind::Object => v.is_object(),
        Kind::Array => v.is_array(),
        Kind::OptionalNumber => v.is_number() || v.is_null(),
        Kind::NumberMap => map_of(Value::is_number),
        Kind::BoolMap => map_of(Value::is_boolean),
        Kind::StringMap => map_of(Value::is_string),
    }
}

fn has_unparseable_number(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_none_or(|f| !f.is_finite()),
        Value::Array(items) => items.iter().any(has_unparseable_number),
        Value::Object(m) => m.values().any(has_unparseable_number),
        _ => false,
    }
}

/// Checks a parsed report against [`report_schema`]. Fields under a `*`
/// or `[]` segment are required for each existing key or element.
pub fn validate(report: &Value) -> Result<(), Vec<String>> {
    let mut problems = Vec::new();
    for f in report_schema() {
        let segments: Vec<&str> = f.path.split('.').collect();
        let wildcard = f.path.contains('*') || f.path.contains("[]");
        let found = select(report, &segments);
        if found.is_empty() && !wildcard {
            problems.push(format!("missing field `{}`", f.path));
        }
        for (at, v) in found {
            if !kind_matches(f.kind, v) {
                problems.push(format!("`{at}` is not of kind {:?}", f.kind));
            }
        }
    }
    if let Some(results) = report.get("results").and_then(Value::as_object) {
        for (name, section) in results {
            for key in ["values", "parameters", "classifications", "residuals", "flags", "notes", "tsirelson_ok"] {
                if section.get(key).is_none() {
                    problems.push(format!("missing field `results.{name}.{key}`"));
                }
            }
        }
    }
    if has_unparseable_number(report) {
        problems.push("report contains a non-finite number".into());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

/// The report with the wall-time field removed, for reproducibility checks.
pub fn without_wall_time(report: &Value) -> Value {
    let mut copy = report.clone();
    if let Some(map) = copy.as_object_mut() {
        map.remove(WALL_TIME_FIELD);
    }
    copy
}

pub(crate) fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect::<Map<_, _>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(format_f64(2.0), "2.0000000000000000e0");
        let x = 2.0 * std::f64::consts::SQRT_2;
        let text = to_json(&json!({ "x": x, "n": 3 }));
        assert!(text.contains("2.8284271247461903e0"));
        assert!(text.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(x));
    }

    #[test]
    fn schema_mentions_tsirelson_flag() {
        assert!(schema_text().contains("tsirelson_ok"));
    }

    #[test]
    fn validate_reports_missing_fields() {
        let problems = validate(&json!({ "experiment": "weyl" })).unwrap_err();
        assert!(problems.iter().any(|p| p.contains("tsirelson_ok")));
    }

    #[test]
    fn csv_rows_per_quantity() {
        let report = json!({
            "results": { "weyl": { "values": { "max": 2.5 }, "tsirelson_ok": true } },
            "assertions": [{ "experiment": "weyl", "name": "max_floor", "passed": true, "detail": "" }],
            "wall_time_seconds": 0.25,
        });
        let text = to_csv(&report);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "experiment,quantity,value");
        assert!(lines.contains(&"weyl,values.max,2.5000000000000000e0"));
        assert!(lines.contains(&"weyl,tsirelson_ok,true"));
        assert!(lines.contains(&"weyl,assertion.max_floor,pass"));
        assert_eq!(lines.len(), 5);
    }
}
