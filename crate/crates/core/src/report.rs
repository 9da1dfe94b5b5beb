//! Report tables written as CSV (header row first, shortest round-trip
//! numbers) or as a JSON object with `columns` and `rows`.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::dynamics::{EnvelopeFit, TransferTrajectory};
use crate::eigen::{BoundStateList, GrowthFit};
use crate::wvn::{BargmannRow, LowerBound, ResolvedSpectrum, WvnPair};
use crate::{Error, Real, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            // non-finite values have no JSON number form
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => json!(format_float(*x)),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x.into())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::input(format!(
                "row has {} cells, the table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => pretty(&self.to_json()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable value");
    s.push('\n');
    s
}

/// Writes `contents` to `path`, creating missing parent directories.
pub fn write_report(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

pub fn wvn_table<T: Real>(pair: &WvnPair<T>) -> Table {
    let mut t = Table::new(&["n", "psi", "V"]);
    for (n, &p) in pair.psi().iter().enumerate() {
        let v = pair.potential().value_at(n as i64).expect("half-line site");
        t.rows.push(vec![n.into(), p.as_f64().into(), v.as_f64().into()]);
    }
    t
}

pub fn bound_state_table<T: Real>(list: &BoundStateList<T>) -> Table {
    let mut t = Table::new(&["n", "energy", "side"]);
    for e in &list.entries {
        t.rows.push(vec![e.index.into(), e.energy.as_f64().into(), e.side.name().into()]);
    }
    t
}

pub fn resolved_table<T: Real>(spectrum: &ResolvedSpectrum<T>) -> Table {
    let mut t = Table::new(&["n", "energy", "side", "leakage", "resolved"]);
    for (k, e) in spectrum.list.entries.iter().enumerate() {
        t.rows.push(vec![
            e.index.into(),
            e.energy.as_f64().into(),
            e.side.name().into(),
            spectrum.leakage[k].as_f64().into(),
            spectrum.is_resolved(k).into(),
        ]);
    }
    t
}

/// (n, E_n, |E_n| - 2, log(|E_n| - 2)) for the entries that entered `fit`.
pub fn decay_table<T: Real>(list: &BoundStateList<T>, fit: &GrowthFit<T>) -> Table {
    let mut t = Table::new(&["n", "E_n", "abs_E_minus_2", "log"]);
    for &(n, log) in &fit.pairs {
        let e = list.entries[n - 1].energy.as_f64();
        t.rows.push(vec![n.into(), e.into(), (e.abs() - 2.0).into(), log.as_f64().into()]);
    }
    t
}

pub fn bargmann_table<T: Real>(rows: &[BargmannRow<T>]) -> Table {
    let mut t = Table::new(&["lambda", "count", "bargmann_value"]);
    for r in rows {
        t.rows.push(vec![r.lambda.as_f64().into(), r.count.into(), r.bargmann_value.as_f64().into()]);
    }
    t
}

pub fn lower_bound_table<T: Real>(rows: &[LowerBound<T>]) -> Table {
    let mut t = Table::new(&["n", "m", "form", "target", "scaled", "holds"]);
    for r in rows {
        t.rows.push(vec![
            r.n.into(),
            r.m.into(),
            r.form.as_f64().into(),
            r.target.as_f64().into(),
            r.scaled().as_f64().into(),
            r.holds().into(),
        ]);
    }
    t
}

/// Sites 0, 1, 2 and 2^k - 1, 2^k, 2^k + 1 inside the trajectory.
pub fn log_sample_sites(len: usize) -> Vec<usize> {
    let mut sites: Vec<usize> = (0..3.min(len)).collect();
    let mut p = 4usize;
    while p - 1 < len {
        sites.extend((p - 1..=p + 1).filter(|&n| n < len));
        p *= 2;
    }
    sites.dedup();
    sites
}

pub fn envelope_table<T: Real>(trajectory: &TransferTrajectory<T>) -> Table {
    let mut t = Table::new(&["n", "R", "log_R"]);
    for n in log_sample_sites(trajectory.len()) {
        let lr = trajectory.log_envelope[n].as_f64();
        t.rows.push(vec![n.into(), lr.exp().into(), lr.into()]);
    }
    t
}

pub fn envelope_fit_table<T: Real>(fits: &[(T, EnvelopeFit<T>)]) -> Table {
    let mut t = Table::new(&["theta", "lower_slope", "upper_slope", "blocks"]);
    for (theta, f) in fits {
        t.rows.push(vec![
            theta.as_f64().into(),
            f.lower_slope.as_f64().into(),
            f.upper_slope.as_f64().into(),
            f.blocks.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wvn::{build_wvn, trial_function};

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0, -2.5e-300, 1e16, 2.0f64.sqrt(), f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_has_header_and_quotes_text() {
        let mut t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv(), "a,b\n");
        t.push(vec![1usize.into(), "x,y".into()]).unwrap();
        t.push(vec![0.5.into(), Cell::Float(f64::INFINITY)]).unwrap();
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n0.5,inf\n");
        assert!(t.push(vec![1usize.into()]).is_err());
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new(&["z", "a"]);
        t.push(vec![2usize.into(), 0.25.into()]).unwrap();
        let s = t.render(Format::Json);
        assert!(s.find("\"columns\"").unwrap() < s.find("\"rows\"").unwrap());
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["columns"], json!(["z", "a"]));
        assert_eq!(v["rows"][0][1], json!(0.25));
    }

    #[test]
    fn sample_sites_are_logarithmic() {
        assert_eq!(log_sample_sites(10), vec![0, 1, 2, 3, 4, 5, 7, 8, 9]);
        assert_eq!(log_sample_sites(2), vec![0, 1]);
        assert!(log_sample_sites(1_000_001).len() < 70);
    }

    #[test]
    fn builders_fill_rows() {
        let pair = build_wvn(1.0f64, 4).unwrap();
        let t = wvn_table(&pair);
        assert_eq!(t.len(), 5);
        assert_eq!(t.rows()[1][1], Cell::Float(0.5));
        let lb = crate::wvn::lower_bound_check(&pair, 1).unwrap();
        assert_eq!(trial_function::<f64>(1).unwrap().m, 8);
        assert_eq!(lower_bound_table(&[lb]).rows()[0][1], Cell::Int(8));
    }

    #[test]
    fn write_creates_directories() {
        let dir = std::env::temp_dir().join(format!("report-test-{}", std::process::id()));
        let path = dir.join("nested").join("t.csv");
        write_report(&path, "a\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a\n");
        fs::remove_dir_all(&dir).unwrap();
    }
}
