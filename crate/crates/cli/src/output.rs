//! Tabular records and their CSV/JSON encodings.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use binrd::{AuxChannel, CorrelationChannel, LabelTransform};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Float(x) => fmt_g9(*x),
            Field::Int(n) => n.to_string(),
            Field::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Float(x) => num(*x),
            Field::Int(n) => json!(n),
            Field::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<usize> for Field {
    fn from(n: usize) -> Self {
        Field::Int(n as u64)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}

/// A named table with fixed columns.
#[derive(Debug, Clone)]
pub struct OutputRecord {
    pub schema: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Field>>,
}

impl OutputRecord {
    pub fn new(schema: &'static str, columns: &'static [&'static str]) -> Self {
        Self {
            schema,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Field::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// The table as a JSON object, with `extra` keys appended.
    pub fn to_json(&self, extra: Map<String, Value>) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Field::json).collect()))
            .collect();
        let mut obj = Map::new();
        obj.insert("schema".into(), json!(self.schema));
        obj.insert("columns".into(), json!(self.columns));
        obj.insert("rows".into(), Value::Array(rows));
        obj.extend(extra);
        Value::Object(obj)
    }

    pub fn render(&self, format: Format, extra: Map<String, Value>) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => to_pretty(&self.to_json(extra)),
        }
    }
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// `%.9g`: nine significant digits, trailing zeros dropped, C-style exponent.
pub fn fmt_g9(x: f64) -> String {
    const P: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mut s = trim_zeros(mantissa.to_string());
        let _ = write!(s, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
        s
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A float rounded to nine significant digits as a JSON number.
pub fn num(x: f64) -> Value {
    match fmt_g9(x).parse::<f64>() {
        Ok(v) if v.is_finite() => json!(v),
        _ => Value::Null,
    }
}

pub fn transform_json(t: &LabelTransform) -> Value {
    json!({
        "complemented": t.complemented,
        "swapped": t.swapped,
        "aux_complemented": t.aux_complemented,
    })
}

/// Input and canonical parameters with the relabelling between them.
pub fn provenance(
    command: &str,
    raw: &CorrelationChannel,
    canonical: &CorrelationChannel,
    transform: &LabelTransform,
    aux: Option<(&AuxChannel, &AuxChannel)>,
    settings: Value,
) -> Value {
    let mut input = json!({ "a": num(raw.a()), "b": num(raw.b()) });
    let mut canon = json!({ "a": num(canonical.a()), "b": num(canonical.b()) });
    if let Some((raw_aux, canon_aux)) = aux {
        input["p"] = num(raw_aux.p());
        input["q"] = num(raw_aux.q());
        canon["p"] = num(canon_aux.p());
        canon["q"] = num(canon_aux.q());
    }
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "input": input,
        "canonical": canon,
        "transform": transform_json(transform),
        "settings": settings,
    })
}

/// Where a command writes its results.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_option(path: Option<PathBuf>) -> Self {
        path.map_or(Sink::Stdout, Sink::File)
    }

    pub fn write(&self, content: &str) -> io::Result<()> {
        match self {
            Sink::Stdout => {
                let mut out = io::stdout().lock();
                out.write_all(content.as_bytes())?;
                out.flush()
            }
            Sink::File(path) => write_file(path, content),
        }
    }

    /// Path next to the output with a different suffix, e.g. the provenance
    /// file `curve.provenance.json` for `curve.csv`.
    pub fn sibling(&self, suffix: &str) -> Option<PathBuf> {
        match self {
            Sink::Stdout => None,
            Sink::File(path) => {
                let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                Some(path.with_file_name(format!("{stem}.{suffix}")))
            }
        }
    }
}

pub fn write_file(path: &Path, content: &str) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content)
}

/// Gnuplot skeleton plotting columns `x:y` of each data file.
pub fn gnuplot_stub(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(&str, usize, usize)],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# generated by binrd; edit freely");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    let plots: Vec<String> = series
        .iter()
        .map(|(file, x, y)| format!("'{file}' using {x}:{y} with lines"))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_c_printf() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (0.25, "0.25"),
            (0.7727448592131423, "0.772744859"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (1e-5, "1e-05"),
            (0.0001, "0.0001"),
            (1.5e-7, "1.5e-07"),
            (-2.0 / 3.0, "-0.666666667"),
            (0.99999999999, "1"),
            (9.9999999999e-5, "0.0001"),
            (1e100, "1e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g9(x), want, "{x}");
        }
    }

    #[test]
    fn csv_has_header_and_lf() {
        let mut r = OutputRecord::new("t", &["d", "region"]);
        r.push(vec![0.5.into(), "I".into()]);
        r.push(vec![1e-9.into(), "a,b".into()]);
        assert_eq!(r.to_csv(), "d,region\n0.5,I\n1e-09,\"a,b\"\n");
    }

    #[test]
    fn json_numbers_are_rounded() {
        assert_eq!(num(1.0 / 3.0), json!(0.333333333));
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
