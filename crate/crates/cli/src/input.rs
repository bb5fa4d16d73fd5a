//! CSV ingestion: columns are variables, rows are observations.

use std::fmt;
use std::io::Read;

use indeptest::{DataMatrix, Error};

#[derive(Debug)]
pub struct Dataset {
    pub names: Vec<String>,
    pub data: DataMatrix<f64>,
}

#[derive(Debug)]
pub enum InputError {
    Csv(csv::Error),
    Parse { line: u64, column: String, value: String },
    Ragged { line: u64, expected: usize, found: usize },
    Empty,
    Data(String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Csv(e) => write!(f, "{e}"),
            InputError::Parse { line, column, value } => {
                write!(f, "line {line}, column {column}: cannot parse `{value}` as a number")
            }
            InputError::Ragged { line, expected, found } => {
                write!(f, "line {line}: expected {expected} fields, found {found}")
            }
            InputError::Empty => write!(f, "no data rows"),
            InputError::Data(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for InputError {}

fn is_numeric(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

/// Reads a data matrix. The first record is taken as a header when any of
/// its fields is not a number.
pub fn read_dataset<R: Read>(input: R) -> Result<Dataset, InputError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r.map_err(InputError::Csv)?,
        None => return Err(InputError::Empty),
    };
    let p = first.len();
    let header = first.iter().any(|f| !is_numeric(f));
    let names: Vec<String> = if header {
        first.iter().map(|s| s.trim().to_string()).collect()
    } else {
        (1..=p).map(|j| j.to_string()).collect()
    };

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut push = |rec: &csv::StringRecord| -> Result<(), InputError> {
        let line = rec.position().map_or(0, |pos| pos.line());
        if rec.len() != p {
            return Err(InputError::Ragged { line, expected: p, found: rec.len() });
        }
        for (j, field) in rec.iter().enumerate() {
            let v = field.trim().parse::<f64>().map_err(|_| InputError::Parse {
                line,
                column: names[j].clone(),
                value: field.to_string(),
            })?;
            columns[j].push(v);
        }
        Ok(())
    };
    if !header {
        push(&first)?;
    }
    for rec in records {
        push(&rec.map_err(InputError::Csv)?)?;
    }

    let n = columns[0].len();
    if n == 0 {
        return Err(InputError::Empty);
    }
    let values: Vec<f64> = columns.into_iter().flatten().collect();
    let data = DataMatrix::from_columns(n, p, values).map_err(|e| InputError::Data(describe(&e, &names)))?;
    Ok(Dataset { names, data })
}

/// Error text with 0-based column indices replaced by column names.
pub fn describe(e: &Error, names: &[String]) -> String {
    let name = |j: usize| names.get(j).map_or_else(|| j.to_string(), |s| format!("`{s}`"));
    match e {
        Error::NonFinite { row, column } => {
            format!("non-finite value in column {} at data row {}", name(*column), row + 1)
        }
        Error::DegenerateColumn { column } => format!("column {} has zero sample variance", name(*column)),
        Error::DegenerateCorrelation { what, i, j } => {
            format!("columns {} and {} are perfectly correlated; {what} is infinite", name(*i), name(*j))
        }
        other => other.to_string(),
    }
}
