use std::path::Path;

use crate::data::{remap_labels, Dataset};
use crate::error::{Error, Result};

/// Reads a comma-separated numeric file. `label_column` is zero-based;
/// every other column becomes a feature. Labels in `{0, 1}` are mapped to
/// `{-1, +1}`. Line numbers in errors count from one and include the header.
pub fn load_csv(path: impl AsRef<Path>, label_column: usize, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column, has_header).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// [`load_csv`] over any reader.
pub fn read_csv(reader: impl std::io::Read, label_column: usize, has_header: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRows { line, expected, found: record.len() });
        }
        if label_column >= expected {
            return Err(Error::Config(format!("label column {label_column} out of range for {expected} columns")));
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: col + 1,
                message: format!("not a number: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse { line, column: col + 1, message: "non-finite value".into() });
            }
            if col == label_column {
                labels.push(value);
            } else {
                features.push(value);
            }
        }
        lines.push(line);
    }

    let width = width.ok_or(Error::EmptyDataset)?;
    let labels = remap_labels(&labels, |i| lines[i])?;
    Dataset::from_flat(labels.len(), width - 1, features, labels)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io { path: Default::default(), source },
        other => Error::Parse { line, column: 0, message: format!("{other:?}") },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_rows() {
        let ds = read_csv("1,2,0\n3,4,1\n5,6,0\n".as_bytes(), 2, false).unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 2));
        assert_eq!(ds.targets(), &[-1.0, 1.0, -1.0]);
        assert_eq!(ds.row(1), &[3.0, 4.0]);
        assert_eq!(ds.ids(), &[0, 1, 2]);
    }

    #[test]
    fn header_and_leading_label() {
        let ds = read_csv("y,a,b\n-1,0.5,2\n1,1.5,3\n".as_bytes(), 0, true).unwrap();
        assert_eq!(ds.targets(), &[-1.0, 1.0]);
        assert_eq!(ds.row(0), &[0.5, 2.0]);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = read_csv("1,2,0\n3,1\n5,6,0\n".as_bytes(), 2, false).unwrap_err();
        assert!(matches!(err, Error::RaggedRows { line: 2, expected: 3, found: 2 }), "{err:?}");
    }

    #[test]
    fn non_binary_label() {
        let err = read_csv("1,2,0\n3,4,2\n".as_bytes(), 2, false).unwrap_err();
        assert!(matches!(err, Error::NonBinaryLabels { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn bad_number_reports_column() {
        let err = read_csv("1,2,0\n3,x,1\n".as_bytes(), 2, false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 2, .. }), "{err:?}");
    }
}
