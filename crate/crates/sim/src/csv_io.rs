//! CSV tables: comma separated, LF line endings, header always written,
//! floats at 17 significant digits so every value survives a round trip.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, SimError};

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// A table cell; `None` is written as an empty field.
pub type Cell = Option<f64>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        table_to_string(&self.header, &self.rows)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        write_table_file(path, &self.header, &self.rows)
    }

    /// Values of one column, `None` for empty cells or an unknown name.
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.map(format_value).unwrap_or_default()))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn table_to_string(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut buf = Vec::new();
    write_table(&mut buf, header, rows).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn write_table_file(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_table(std::io::BufWriter::new(file), header, rows)
}

/// Parses a table written by [`write_table`]: header row, numeric or empty
/// cells.
pub fn read_table<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<Cell>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                if field.is_empty() {
                    Ok(None)
                } else {
                    field.trim().parse::<f64>().map(Some).map_err(|_| {
                        SimError::Usage(format!("row {}: not a number: `{field}`", i + 2))
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reads an external two-column `freq_hz,value` spectrum; the header row is
/// optional.
pub fn read_spectrum<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(SimError::Usage(format!(
                "spectrum line {}: expected 2 columns, found {}",
                i + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(f), Ok(v)) => {
                freqs.push(f);
                values.push(v);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(SimError::Usage(format!(
                    "spectrum line {}: not numeric",
                    i + 1
                )))
            }
        }
    }
    Ok((freqs, values))
}

pub fn read_spectrum_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = std::fs::File::open(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_spectrum(file)
}
