//! Numeric cells and CSV emission.

use std::io::Write;

const SIGNIFICANT: i32 = 9;

/// Nine significant digits, scientific below `1e-4` in magnitude, blank for
/// non-finite values. Trailing zeros are dropped.
pub fn cell(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.abs() < 1e-4 {
        let s = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        return format!("{}e{exp}", trim(mantissa));
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT - 1 - magnitude).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

pub fn optional(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}
