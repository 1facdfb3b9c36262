//! Delimited text tables with one categorical label column.

use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Which column holds the class label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    /// Header name; requires `has_header`.
    Name(String),
    Last,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub label_column: LabelColumn,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            label_column: LabelColumn::Last,
        }
    }
}

/// Reads a rectangular numeric table.
///
/// Labels are encoded `0..M` in order of first appearance; the original
/// strings become the class names. Row numbers in errors are 1-based and
/// count the header line when there is one.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;

    let header: Option<Vec<String>> = if options.has_header {
        let h = reader.headers().map_err(|e| csv_error(path, 1, e))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    let first_data_row = if options.has_header { 2 } else { 1 };

    let mut width = header.as_ref().map(Vec::len);
    let mut label_idx = None;
    let mut features = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    let mut n_rows = 0usize;

    for (r, record) in reader.records().enumerate() {
        let row = first_data_row + r;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                row,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        let li = match label_idx {
            Some(i) => i,
            None => {
                let i = resolve_label(&options.label_column, header.as_deref(), w)?;
                label_idx = Some(i);
                i
            }
        };
        for (c, field) in record.iter().enumerate() {
            if c == li {
                let class = match names.iter().position(|n| n == field) {
                    Some(j) => j,
                    None => {
                        names.push(field.to_string());
                        names.len() - 1
                    }
                };
                labels.push(class);
            } else {
                let v: f64 = field.parse().map_err(|_| Error::Csv {
                    path: path.to_path_buf(),
                    row,
                    message: format!("column {} is not numeric: `{field}`", c + 1),
                })?;
                if !v.is_finite() {
                    return Err(Error::Csv {
                        path: path.to_path_buf(),
                        row,
                        message: format!("column {} is not finite", c + 1),
                    });
                }
                features.push(v);
            }
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let cols = width.unwrap_or(1) - 1;
    let x = Matrix::new(n_rows, cols, features)?;
    Dataset::with_class_names(x, labels, names)
}

fn resolve_label(col: &LabelColumn, header: Option<&[String]>, width: usize) -> Result<usize> {
    let idx = match col {
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Index(i) => Some(*i).filter(|&i| i < width),
        LabelColumn::Name(name) => {
            let header = header.ok_or_else(|| {
                Error::config("label_column", format!("`{name}` given by name but the file has no header"))
            })?;
            header.iter().position(|h| h == name)
        }
    };
    idx.ok_or_else(|| {
        let what = match col {
            LabelColumn::Name(n) => format!("no column named `{n}`"),
            LabelColumn::Index(i) => format!("index {i} out of range for {width} columns"),
            LabelColumn::Last => "table has no columns".to_string(),
        };
        Error::config("label_column", what)
    })
}

fn csv_error(path: &Path, row: usize, e: ::csv::Error) -> Error {
    let row = e.position().map_or(row, |p| p.line() as usize);
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::io(format!("reading {}", path.display()), io),
        other => Error::Csv {
            path: path.to_path_buf(),
            row,
            message: format!("{other:?}"),
        },
    }
}
