//! File formats: M4-style series CSVs, category metadata, and forecast
//! tables.
//!
//! A series CSV has the series id in the first column followed by the
//! observations. Rows may be ragged; empty cells are unobserved. A header
//! row is recognized when none of its non-id cells is numeric.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::linalg::Matrix;
use crate::series::{SeriesError, SeriesMatrix};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{context}line {line}, column {column}: {message}")]
    Cell {
        context: String,
        line: u64,
        column: usize,
        message: String,
    },
    #[error("{context}{message}")]
    Csv { context: String, message: String },
    #[error("{context}no series found")]
    Empty { context: String },
    #[error("{context}{source}")]
    Series { context: String, source: SeriesError },
}

impl IoError {
    /// Prefixes the error with a file name.
    fn in_file(self, path: &Path) -> Self {
        let ctx = format!("{}: ", path.display());
        match self {
            Self::Cell {
                line, column, message, ..
            } => Self::Cell {
                context: ctx,
                line,
                column,
                message,
            },
            Self::Csv { message, .. } => Self::Csv { context: ctx, message },
            Self::Empty { .. } => Self::Empty { context: ctx },
            Self::Series { source, .. } => Self::Series { context: ctx, source },
            other => other,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path).map(BufReader::new).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// Creates (truncating) a file for writing.
pub fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path).map(BufWriter::new).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn csv_error(e: csv::Error) -> IoError {
    let line = e.position().map(|p| p.line());
    IoError::Csv {
        context: String::new(),
        message: match line {
            Some(l) => format!("line {l}: {e}"),
            None => e.to_string(),
        },
    }
}

fn parse_cell(cell: &str, line: u64, column: usize) -> Result<Option<f64>, IoError> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let bad = |message: String| IoError::Cell {
        context: String::new(),
        line,
        column,
        message,
    };
    let v: f64 = cell.parse().map_err(|_| bad(format!("{cell:?} is not a number")))?;
    if !v.is_finite() {
        return Err(bad(format!("{cell:?} is not finite")));
    }
    Ok(Some(v))
}

/// Reads an M4-format series CSV.
pub fn read_series<R: Read>(reader: R, period: usize) -> Result<SeriesMatrix, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (index, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let cells: Vec<&str> = record.iter().skip(1).collect();
        let is_header = index == 0
            && cells.iter().any(|c| !c.trim().is_empty())
            && cells.iter().all(|c| c.trim().is_empty() || c.trim().parse::<f64>().is_err());
        if is_header {
            continue;
        }
        let mut values = cells
            .iter()
            .enumerate()
            .map(|(j, c)| parse_cell(c, line, j + 2))
            .collect::<Result<Vec<_>, _>>()?;
        while values.last() == Some(&None) {
            values.pop();
        }
        ids.push(record[0].trim().to_string());
        rows.push(values);
    }
    if ids.is_empty() {
        return Err(IoError::Empty { context: String::new() });
    }
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    for row in &mut rows {
        row.resize(width, None);
    }
    SeriesMatrix::from_optional_rows(ids, rows, period).map_err(|source| IoError::Series {
        context: String::new(),
        source,
    })
}

pub fn read_series_path(path: &Path, period: usize) -> Result<SeriesMatrix, IoError> {
    read_series(open(path)?, period).map_err(|e| e.in_file(path))
}

/// Writes `matrix` in M4 format with an `id,T1,...` header. Unobserved
/// cells are left empty.
pub fn write_series<W: Write>(writer: W, matrix: &SeriesMatrix) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((1..=matrix.n_cols()).map(|t| format!("T{t}")));
    w.write_record(&header).map_err(csv_error)?;
    for row in matrix.rows() {
        let mut rec = vec![row.id().to_string()];
        rec.extend((0..row.len()).map(|t| row.get(t).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush().map_err(|source| IoError::File {
        path: String::new(),
        source,
    })
}

/// Reads an (id, category) table. If a header names a `category` column
/// that column is used, otherwise the second column.
pub fn read_metadata<R: Read>(reader: R) -> Result<HashMap<String, String>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut map = HashMap::new();
    let mut column = 1;
    for (index, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if index == 0 {
            if let Some(c) = record.iter().position(|c| c.trim().eq_ignore_ascii_case("category")) {
                column = c;
                continue;
            }
        }
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        let category = record.get(column).ok_or_else(|| IoError::Cell {
            context: String::new(),
            line,
            column: column + 1,
            message: "missing category".into(),
        })?;
        map.insert(record[0].trim().to_string(), category.trim().to_string());
    }
    Ok(map)
}

pub fn read_metadata_path(path: &Path) -> Result<HashMap<String, String>, IoError> {
    read_metadata(open(path)?).map_err(|e| e.in_file(path))
}

/// Writes forecasts with header `id,F1,...,Fh`. Values use the shortest
/// representation that round-trips exactly.
pub fn write_forecasts<W: Write>(writer: W, ids: &[String], forecasts: &Matrix) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((1..=forecasts.cols()).map(|j| format!("F{j}")));
    w.write_record(&header).map_err(csv_error)?;
    for (i, id) in ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend(forecasts.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush().map_err(|source| IoError::File {
        path: String::new(),
        source,
    })
}

/// Reads a forecast table written by [`write_forecasts`].
pub fn read_forecasts<R: Read>(reader: R) -> Result<(Vec<String>, Matrix), IoError> {
    let matrix = read_series(reader, 1)?;
    if !matrix.is_fully_observed() {
        let (i, _) = (0..matrix.n_series())
            .flat_map(|i| (0..matrix.n_cols()).map(move |t| (i, t)))
            .find(|&(i, t)| !matrix.is_observed(i, t))
            .expect("some cell is unobserved");
        return Err(IoError::Csv {
            context: String::new(),
            message: format!("forecast row {:?} is incomplete", matrix.ids()[i]),
        });
    }
    let rows: Vec<Vec<f64>> = matrix.rows().map(|r| r.raw().to_vec()).collect();
    let m = Matrix::from_rows(&rows).unwrap_or_else(|| Matrix::zeros(rows.len(), 0));
    Ok((matrix.ids().to_vec(), m))
}

pub fn read_forecasts_path(path: &Path) -> Result<(Vec<String>, Matrix), IoError> {
    read_forecasts(open(path)?).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ragged_rows_and_headers() {
        let text = "V1,V2,V3,V4\nM1,1,2,3\nM2,4,5,,\n";
        let m = read_series(text.as_bytes(), 12).unwrap();
        assert_eq!(m.ids(), &["M1".to_string(), "M2".to_string()]);
        assert_eq!(m.row(0).observed(), 3);
        assert_eq!(m.row(1).observed(), 2);
        assert!(!m.is_observed(1, 2));
        let no_header = read_series("M1,1,2,3\n".as_bytes(), 12).unwrap();
        assert_eq!(no_header.n_series(), 1);
    }

    #[test]
    fn bad_cells_name_line_and_column() {
        let err = read_series("M1,1,2\nM2,3,x\n".as_bytes(), 1).unwrap_err();
        match err {
            IoError::Cell { line, column, .. } => assert_eq!((line, column), (2, 3)),
            e => panic!("{e}"),
        }
        assert!(matches!(read_series("".as_bytes(), 1), Err(IoError::Empty { .. })));
        assert!(matches!(read_series("M1,inf\n".as_bytes(), 1), Err(IoError::Cell { .. })));
    }

    #[test]
    fn series_and_forecasts_round_trip() {
        let m = SeriesMatrix::from_optional_rows(
            vec!["a".into(), "b".into()],
            vec![vec![None, Some(0.1), Some(1e-17)], vec![Some(-2.5), Some(3.0), None]],
            4,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_series(&mut buf, &m).unwrap();
        let back = read_series(buf.as_slice(), 4).unwrap();
        assert_eq!(back, m);

        let f = Matrix::from_rows(&[vec![0.1 + 0.2, 1.0 / 3.0], vec![-7.0, 1e300]]).unwrap();
        let ids = vec!["x".to_string(), "y".to_string()];
        let mut buf = Vec::new();
        write_forecasts(&mut buf, &ids, &f).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("id,F1,F2\n"));
        let (rids, rf) = read_forecasts(buf.as_slice()).unwrap();
        assert_eq!(rids, ids);
        assert_eq!(rf, f);
    }

    #[test]
    fn metadata_with_and_without_header() {
        let m = read_metadata("M4id,category,Frequency\nM1,Macro,12\n".as_bytes()).unwrap();
        assert_eq!(m["M1"], "Macro");
        let m = read_metadata("M1,Micro\n".as_bytes()).unwrap();
        assert_eq!(m["M1"], "Micro");
    }
}
