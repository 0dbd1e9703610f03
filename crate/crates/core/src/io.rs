//! One-column CSV sample ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{RcvError, Result};
use crate::robust::Sample;

/// Parses a one-column CSV of numbers. With `has_header` the first record
/// is skipped. Blank lines are ignored; any other non-numeric record is
/// rejected with its line number.
pub fn parse_sample_csv<R: Read>(reader: R, has_header: bool) -> Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| RcvError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && has_header {
            continue;
        }
        let fields: Vec<&str> = rec.iter().collect();
        let field = match fields.as_slice() {
            [] | [""] => continue,
            [one] => *one,
            _ => {
                return Err(RcvError::Parse {
                    line,
                    message: format!("expected one column, found {}", fields.len()),
                })
            }
        };
        let v: f64 = field.parse().map_err(|_| RcvError::Parse {
            line,
            message: format!("'{field}' is not a number"),
        })?;
        if !v.is_finite() {
            return Err(RcvError::Parse {
                line,
                message: format!("'{field}' is not finite"),
            });
        }
        values.push(v);
    }
    Sample::new(values)
}

pub fn read_sample_csv(path: &Path, has_header: bool) -> Result<Sample> {
    let file = File::open(path).map_err(|e| RcvError::Io(format!("{}: {e}", path.display())))?;
    parse_sample_csv(file, has_header)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_header() {
        let s = parse_sample_csv("1\n2.5\n\n3e0\n".as_bytes(), false).unwrap();
        assert_eq!(s.values(), &[1.0, 2.5, 3.0]);
        let s = parse_sample_csv("x\n1\n2\n".as_bytes(), true).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
    }

    #[test]
    fn reports_bad_line() {
        let mut text = String::new();
        for i in 1..=16 {
            text.push_str(&format!("{i}\n"));
        }
        text.push_str("oops\n18\n");
        match parse_sample_csv(text.as_bytes(), false) {
            Err(RcvError::Parse { line, .. }) => assert_eq!(line, 17),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_sample_csv("x\n1\n".as_bytes(), false),
            Err(RcvError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_extra_columns_and_short_input() {
        assert!(matches!(parse_sample_csv("1,2\n3,4\n".as_bytes(), false), Err(RcvError::Parse { .. })));
        assert!(matches!(parse_sample_csv("1\n".as_bytes(), false), Err(RcvError::SampleSize { .. })));
        assert!(matches!(parse_sample_csv("1\nNaN\n".as_bytes(), false), Err(RcvError::Parse { line: 2, .. })));
    }
}
