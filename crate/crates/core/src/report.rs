//! Report rows and their two serializations: a flat CSV table and
//! newline-delimited JSON records.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Serialize, Serializer};

pub const TABLE_HEADER: &str = "suite,p,d,case,lhs,rhs,ratio,pass,seed,ms";

/// An exact count or a real measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Num {
    Int(u64),
    Real(f64),
}

impl Num {
    pub fn as_f64(self) -> f64 {
        match self {
            Num::Int(n) => n as f64,
            Num::Real(x) => x,
        }
    }
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Int(n) => write!(f, "{n}"),
            Num::Real(x) => f.write_str(&format_real(*x)),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Num::Int(n) => s.serialize_u64(*n),
            Num::Real(x) if x.is_finite() => {
                s.serialize_f64(format_real(*x).parse().expect("formatted real parses"))
            }
            Num::Real(_) => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub suite: String,
    pub p: u32,
    pub d: usize,
    pub case: String,
    pub lhs: Num,
    pub rhs: Num,
    pub ratio: Num,
    pub pass: bool,
    pub seed: u64,
    pub ms: u64,
}

impl ReportRow {
    pub fn table_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.suite, self.p, self.d, self.case, self.lhs, self.rhs, self.ratio, self.pass, self.seed, self.ms
        )
    }

    pub fn record_line(&self) -> String {
        serde_json::to_string(self).expect("rows serialize")
    }
}

pub fn write_table<W: Write>(rows: &[ReportRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{TABLE_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.table_line())?;
    }
    Ok(())
}

pub fn write_records<W: Write>(rows: &[ReportRow], mut w: W) -> io::Result<()> {
    for row in rows {
        writeln!(w, "{}", row.record_line())?;
    }
    Ok(())
}

/// Writes `report.csv` and `report.ndjson` into `dir`, creating it if needed.
pub fn emit_report(rows: &[ReportRow], dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = io::BufWriter::new(fs::File::create(dir.join("report.csv"))?);
    write_table(rows, &mut csv)?;
    csv.flush()?;
    let mut nd = io::BufWriter::new(fs::File::create(dir.join("report.ndjson"))?);
    write_records(rows, &mut nd)?;
    nd.flush()
}
