//! CSV output for scan tables, spectra and wavefunctions.
//!
//! Files start with a block of `# key: value` metadata lines, followed by a
//! header row and comma-separated data. Floats are written with 17
//! significant digits so that reading a file back is exact.

use std::io::{Read, Write};

use thiserror::Error;

use crate::solver::{Abscissa, BoundState, CriticalCoupling, ScanRow, ScanTable, Wavefunction};
use crate::wronskian::QuantizationKind;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed table: {0}")]
    Format(String),
}

/// Ordered `# key: value` header lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}: {}", v.replace('\n', " "))?;
        }
        Ok(())
    }
}

/// 17 significant digits, exact on round trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn header<W: Write>(w: &mut W, meta: Option<&Metadata>) -> std::io::Result<()> {
    match meta {
        Some(m) => m.write_to(w),
        None => Ok(()),
    }
}

/// Writes a scan table; pass `None` to omit the metadata block.
pub fn write_scan_table<W: Write>(
    mut w: W,
    table: &ScanTable,
    meta: Option<&Metadata>,
) -> Result<(), ExportError> {
    header(&mut w, meta)?;
    if meta.is_some() {
        for s in &table.skipped {
            writeln!(w, "# skipped {}: {}", format_float(s.abscissa), s.reason)?;
        }
    }
    let mut out = csv_writer(&mut w);
    out.write_record(table.columns())?;
    for row in &table.rows {
        let mut record = vec![format_float(row.abscissa)];
        record.extend(row.values.iter().map(|v| format_float(*v)));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

fn comment_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}

/// Reads back a file produced by [`write_scan_table`].
pub fn read_scan_table<R: Read>(r: R) -> Result<ScanTable, ExportError> {
    let mut reader = comment_reader(r);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let abscissa = match headers.first().map(String::as_str) {
        Some("energy") => Abscissa::Energy,
        Some("v0") => Abscissa::Coupling,
        Some("x") => Abscissa::Coordinate,
        other => return Err(ExportError::Format(format!("unknown abscissa {other:?}"))),
    };
    let kind = match &headers[1..] {
        [d] if d == "det" => QuantizationKind::GeneralDet,
        [e, o] if e == "even" && o == "odd" => QuantizationKind::EvenW,
        _ => {
            return Err(ExportError::Format(format!(
                "unexpected columns {headers:?}"
            )))
        }
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let values = record
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| ExportError::Format(format!("bad number `{f}`")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != headers.len() {
            return Err(ExportError::Format("ragged row".into()));
        }
        rows.push(ScanRow {
            abscissa: values[0],
            values: values[1..].to_vec(),
        });
    }
    Ok(ScanTable {
        abscissa,
        kind,
        rows,
        skipped: Vec::new(),
    })
}

pub const BOUND_STATE_COLUMNS: [&str; 7] = [
    "n",
    "energy",
    "parity",
    "B_div",
    "residual",
    "bracket_width",
    "low_confidence",
];

pub fn write_bound_states<W: Write>(
    mut w: W,
    states: &[BoundState],
    meta: Option<&Metadata>,
) -> Result<(), ExportError> {
    header(&mut w, meta)?;
    let mut out = csv_writer(&mut w);
    out.write_record(BOUND_STATE_COLUMNS)?;
    for s in states {
        out.write_record([
            s.index.to_string(),
            format_float(s.energy),
            s.parity.name().to_string(),
            format_float(s.residual_divergent),
            format_float(s.wronskian_residual),
            format_float(s.bracket_width),
            s.low_confidence.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_critical_couplings<W: Write>(
    mut w: W,
    couplings: &[CriticalCoupling],
    meta: Option<&Metadata>,
) -> Result<(), ExportError> {
    header(&mut w, meta)?;
    let mut out = csv_writer(&mut w);
    out.write_record(["index", "v0", "parity"])?;
    for c in couplings {
        out.write_record([
            c.index.to_string(),
            format_float(c.coupling),
            c.parity.name().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Samples `(x, phi, dphi)` plus a trailing comment with the truncation
/// point, decay rate and divergent coefficient.
pub fn write_wavefunction<W: Write>(
    mut w: W,
    wf: &Wavefunction,
    meta: Option<&Metadata>,
) -> Result<(), ExportError> {
    header(&mut w, meta)?;
    {
        let mut out = csv_writer(&mut w);
        out.write_record(["x", "phi", "dphi"])?;
        for s in &wf.samples {
            out.write_record([
                format_float(s.x),
                format_float(s.phi),
                format_float(s.phi_prime),
            ])?;
        }
        out.flush()?;
    }
    let b_div = wf
        .divergent_coefficient
        .map_or_else(|| "nan".to_string(), format_float);
    writeln!(
        w,
        "# truncation_x: {}, k: {}, B_div: {}",
        format_float(wf.truncation_x),
        format_float(wf.k),
        b_div
    )?;
    Ok(())
}

/// Parses the footer written by [`write_wavefunction`].
pub fn parse_wavefunction_footer(text: &str) -> Option<(f64, f64, Option<f64>)> {
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with("# truncation_x:"))?;
    let mut fields = line.trim_start_matches('#').split(',').map(|f| {
        let (_, v) = f.split_once(':')?;
        Some(v.trim().to_string())
    });
    let truncation = fields.next()??.parse().ok()?;
    let k = fields.next()??.parse().ok()?;
    let b = fields.next()??;
    let b = if b == "nan" {
        None
    } else {
        Some(b.parse().ok()?)
    };
    Some((truncation, k, b))
}
