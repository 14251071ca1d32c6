//! Experiment records and their JSON-lines and CSV serializations.

use std::io::{self, Write};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::config::{CommandName, ExperimentConfig, Format};

/// Column layout of the CSV output, one row per case field.
pub const CSV_COLUMNS: [&str; 6] = ["index", "label", "status", "inconclusive", "field", "value"];

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Nums(Vec<f64>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Nums(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn from_checks(passed: bool, inconclusive: bool) -> Self {
        if inconclusive {
            Status::Inconclusive
        } else if passed {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One result row: a label, a status and named values in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub label: String,
    pub status: Status,
    pub fields: Vec<(String, Value)>,
}

impl Case {
    pub fn new(label: impl Into<String>) -> Self {
        Case {
            label: label.into(),
            status: Status::Pass,
            fields: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.fields.push((name.to_string(), value.into()));
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn num(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            Value::Num(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

struct CaseLine<'a> {
    index: usize,
    case: &'a Case,
}

impl Serialize for CaseLine<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5 + self.case.fields.len()))?;
        m.serialize_entry("kind", "case")?;
        m.serialize_entry("index", &self.index)?;
        m.serialize_entry("label", &self.case.label)?;
        m.serialize_entry("status", &self.case.status)?;
        m.serialize_entry("inconclusive", &(self.case.status == Status::Inconclusive))?;
        for (name, value) in &self.case.fields {
            m.serialize_entry(name, value)?;
        }
        m.end()
    }
}

#[derive(Serialize)]
struct ConfigLine<'a> {
    kind: &'static str,
    #[serde(flatten)]
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct SummaryLine<'a> {
    kind: &'static str,
    command: &'a str,
    status: Status,
    cases: usize,
    passed: usize,
    failed: usize,
    inconclusive: usize,
    version: &'a str,
    wall_clock_seconds: f64,
}

/// Everything one run produced.
#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub cases: Vec<Case>,
    pub wall_clock_seconds: f64,
    pub version: &'static str,
}

impl ExperimentRecord {
    pub fn command(&self) -> CommandName {
        self.config.command
    }

    fn count(&self, status: Status) -> usize {
        self.cases.iter().filter(|c| c.status == status).count()
    }

    /// Fail if any case failed, else inconclusive if any case was, else pass.
    pub fn status(&self) -> Status {
        if self.count(Status::Fail) > 0 {
            Status::Fail
        } else if self.count(Status::Inconclusive) > 0 {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }

    pub fn emit<W: Write>(&self, format: Format, out: W) -> io::Result<()> {
        match format {
            Format::Jsonl => self.write_jsonl(out),
            Format::Csv => self.write_csv(out),
        }
    }

    /// A config line, one line per case, then a summary line carrying the
    /// version and wall-clock time.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        write_json_line(
            &mut out,
            &ConfigLine {
                kind: "config",
                config: &self.config,
            },
        )?;
        for (index, case) in self.cases.iter().enumerate() {
            write_json_line(&mut out, &CaseLine { index, case })?;
        }
        write_json_line(
            &mut out,
            &SummaryLine {
                kind: "summary",
                command: self.command().as_str(),
                status: self.status(),
                cases: self.cases.len(),
                passed: self.count(Status::Pass),
                failed: self.count(Status::Fail),
                inconclusive: self.count(Status::Inconclusive),
                version: self.version,
                wall_clock_seconds: self.wall_clock_seconds,
            },
        )?;
        out.flush()
    }

    /// Long format: one row per field of each case, lists expanded as
    /// `name[k]`. Without cases only the header is written.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for (index, case) in self.cases.iter().enumerate() {
            let index = index.to_string();
            let inconclusive = (case.status == Status::Inconclusive).to_string();
            let mut row = |field: &str, value: String| {
                w.write_record([
                    index.as_str(),
                    case.label.as_str(),
                    case.status.as_str(),
                    inconclusive.as_str(),
                    field,
                    value.as_str(),
                ])
            };
            for (name, value) in &case.fields {
                match value {
                    Value::Num(v) => row(name, format_float(*v))?,
                    Value::Int(v) => row(name, v.to_string())?,
                    Value::Bool(v) => row(name, v.to_string())?,
                    Value::Text(v) => row(name, v.clone())?,
                    Value::Nums(vs) => {
                        for (k, v) in vs.iter().enumerate() {
                            row(&format!("{name}[{k}]"), format_float(*v))?;
                        }
                    }
                }
            }
        }
        w.flush()
    }
}

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

fn write_json_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, SeventeenDigits);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Overrides};

    fn record(cases: Vec<Case>) -> ExperimentRecord {
        ExperimentRecord {
            config: ExperimentConfig::resolve(Some(CommandName::Duality), Overrides::default(), Overrides::default()).unwrap(),
            cases,
            wall_clock_seconds: 0.25,
            version: "0.0.0",
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        record(vec![]).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,label,status,inconclusive,field,value\n");
    }

    #[test]
    fn inconclusive_flag_column() {
        let mut buf = Vec::new();
        let case = Case::new("x").with("defect", 1e-3).status(Status::Inconclusive);
        record(vec![case]).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0,x,inconclusive,true,defect,1.0000000000000000e-3");
    }

    #[test]
    fn json_floats_round_trip_bit_exactly() {
        let values = vec![0.1, -0.0, 1.0 / 3.0, 5e-324, f64::MAX, -2.5e-17, 123456789.0];
        let case = Case::new("r").with("xs", values.clone()).with("y", std::f64::consts::PI);
        let mut buf = Vec::new();
        record(vec![case]).write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        let back: Vec<f64> = line["xs"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(line["y"].as_f64().unwrap().to_bits(), std::f64::consts::PI.to_bits());
    }

    #[test]
    fn line_layout() {
        let mut buf = Vec::new();
        record(vec![Case::new("a").with("n", 3usize)]).write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("{\"kind\":\"config\",\"command\":\"duality\""));
        assert_eq!(lines[1], "{\"kind\":\"case\",\"index\":0,\"label\":\"a\",\"status\":\"pass\",\"inconclusive\":false,\"n\":3}");
        assert!(lines[2].ends_with("\"wall-clock-seconds\":2.5000000000000000e-1}"));
    }

    #[test]
    fn status_precedence() {
        let fail = Case::new("f").status(Status::Fail);
        let inc = Case::new("i").status(Status::Inconclusive);
        assert_eq!(record(vec![Case::new("p"), inc.clone()]).exit_code(), 3);
        assert_eq!(record(vec![fail, inc]).exit_code(), 1);
        assert_eq!(record(vec![]).exit_code(), 0);
    }
}
