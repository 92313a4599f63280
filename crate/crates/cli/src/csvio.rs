//! CSV files with a header row and a units row: UTF-8, LF, decimal point.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Shortest representation that parses back to the same `f64`. Plain
/// decimal for moderate magnitudes, exponent notation otherwise.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    width: usize,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str], units: &[&str]) -> Result<Self, CliError> {
        assert_eq!(header.len(), units.len(), "one unit per column");
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        let mut out = Self {
            path: path.to_path_buf(),
            writer,
            width: header.len(),
        };
        out.record(header.iter().copied())?;
        out.record(units.iter().copied())?;
        Ok(out)
    }

    fn record<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| CliError::io(&self.path, e))
    }

    /// Numeric row.
    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        debug_assert_eq!(values.len(), self.width);
        self.record(values.iter().map(|&v| fmt_num(v)))
    }

    /// Row of preformatted fields.
    pub fn text_row(&mut self, fields: &[String]) -> Result<(), CliError> {
        debug_assert_eq!(fields.len(), self.width);
        self.record(fields)
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// A parsed CSV file. `units` is present when the second line does not
/// parse as numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub units: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut records = Vec::new();
        for (n, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| format!("line {}: {e}", n + 1))?;
            records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
        }
        let mut it = records.into_iter();
        let header = it.next().ok_or("empty file")?;
        let rest: Vec<Vec<String>> = it.collect();
        let has_units = rest
            .first()
            .is_some_and(|r| r.iter().any(|f| f.parse::<f64>().is_err()));
        let (units, rows) = if has_units {
            let mut rest = rest.into_iter();
            (rest.next(), rest.collect())
        } else {
            (None, rest)
        };
        Ok(Self { header, units, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of column `idx` over every row, which must all be numeric.
    pub fn numeric_column(&self, idx: usize) -> Result<Vec<f64>, String> {
        self.rows
            .iter()
            .enumerate()
            .map(|(n, r)| {
                let field = r
                    .get(idx)
                    .ok_or_else(|| format!("data row {} has no column {}", n + 1, idx + 1))?;
                field
                    .parse::<f64>()
                    .map_err(|_| format!("data row {}: '{field}' is not a number", n + 1))
            })
            .collect()
    }
}
