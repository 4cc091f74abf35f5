//! Matrix Market I/O for dense real matrices.
//!
//! Reads `coordinate` and `array` files with `real` or `integer` fields and
//! `general` or `symmetric` symmetry; symmetric storage is expanded to the
//! full matrix. Writes `array general` files with shortest round-trip
//! formatting, so a write followed by a read is bit-identical.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::Result;

/// A malformed file; `line` is 1-based, 0 for end-of-file problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtxError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for MtxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "Matrix Market parse error: {}", self.message)
        } else {
            write!(f, "Matrix Market parse error at line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for MtxError {}

fn err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError { line, message: message.into() }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_matrix_market(&text)?)
}

pub fn parse_matrix_market(text: &str) -> std::result::Result<DMatrix<f64>, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| err(0, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(hline, "expected header '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(err(hline, format!("unsupported format {other:?}"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(err(hline, format!("unsupported field {other:?}"))),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(hline, format!("unsupported symmetry {other:?}"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = data.next().ok_or_else(|| err(0, "missing size line"))?;
    let dims = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| err(sline, format!("bad size entry {t:?}"))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let expected_dims = if format == Format::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(err(sline, format!("size line needs {expected_dims} integers")));
    }
    let (nrows, ncols) = (dims[0], dims[1]);
    if symmetric && nrows != ncols {
        return Err(err(sline, "symmetric storage requires a square matrix"));
    }
    let mut m = DMatrix::<f64>::zeros(nrows, ncols);

    match format {
        Format::Coordinate => {
            let nnz = dims[2];
            let mut count = 0;
            for (ln, l) in data {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(err(ln, "coordinate entry needs 'row col value'"));
                }
                let i = parse_index(t[0], nrows, ln)?;
                let j = parse_index(t[1], ncols, ln)?;
                let v = parse_value(t[2], ln)?;
                if symmetric && j > i {
                    return Err(err(ln, "symmetric storage holds the lower triangle only"));
                }
                m[(i, j)] += v;
                if symmetric && i != j {
                    m[(j, i)] += v;
                }
                count += 1;
                if count > nnz {
                    return Err(err(ln, format!("more than the declared {nnz} entries")));
                }
            }
            if count != nnz {
                return Err(err(0, format!("expected {nnz} entries, found {count}")));
            }
        }
        Format::Array => {
            // column-major; symmetric files list the lower triangle by columns
            let mut slots = Vec::new();
            for j in 0..ncols {
                let start = if symmetric { j } else { 0 };
                for i in start..nrows {
                    slots.push((i, j));
                }
            }
            let mut k = 0;
            for (ln, l) in data {
                for tok in l.split_whitespace() {
                    let v = parse_value(tok, ln)?;
                    let &(i, j) = slots.get(k).ok_or_else(|| err(ln, "more entries than the matrix holds"))?;
                    m[(i, j)] = v;
                    if symmetric {
                        m[(j, i)] = v;
                    }
                    k += 1;
                }
            }
            if k != slots.len() {
                return Err(err(0, format!("expected {} entries, found {k}", slots.len())));
            }
        }
    }
    Ok(m)
}

fn parse_index(tok: &str, bound: usize, line: usize) -> std::result::Result<usize, MtxError> {
    let i: usize = tok.parse().map_err(|_| err(line, format!("bad index {tok:?}")))?;
    if i == 0 || i > bound {
        return Err(err(line, format!("index {i} outside 1..={bound}")));
    }
    Ok(i - 1)
}

fn parse_value(tok: &str, line: usize) -> std::result::Result<f64, MtxError> {
    let v: f64 = tok.parse().map_err(|_| err(line, format!("bad value {tok:?}")))?;
    if !v.is_finite() {
        return Err(err(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Writes an `array real general` file.
pub fn write_matrix_market(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    f.write_all(format_matrix_market(m).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn format_matrix_market(m: &DMatrix<f64>) -> String {
    let mut s = String::with_capacity(32 + 24 * m.len());
    s.push_str("%%MatrixMarket matrix array real general\n");
    s.push_str(&format!("{} {}\n", m.nrows(), m.ncols()));
    for v in m.iter() {
        s.push_str(&format!("{v:e}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bit_identical() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 0.0]);
        let b = parse_matrix_market(&format_matrix_market(&a)).unwrap();
        assert_eq!(a, b);
        let c = DMatrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, -2e-300, 5e300, f64::MIN_POSITIVE, -0.0]);
        let d = parse_matrix_market(&format_matrix_market(&c)).unwrap();
        for (x, y) in c.iter().zip(d.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn symmetric_coordinate_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2.0\n2 1 -1\n3 2 0.5\n3 3 1e0\n";
        let m = parse_matrix_market(text).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 0.0, 0.5, 0.0, 0.5, 1.0]);
        assert_eq!(m, expect);
    }

    #[test]
    fn symmetric_array_expanded() {
        let text = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n-1\n0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 0.0]));
    }

    #[test]
    fn integer_field_accepted() {
        let text = "%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 3\n2 2 -4\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -4.0]));
    }

    #[test]
    fn nan_rejected_with_line() {
        let text = "%%MatrixMarket matrix array real general\n1 2\n1.0\nNaN\n";
        let e = parse_matrix_market(text).unwrap_err();
        assert_eq!(e.line, 4);
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(parse_matrix_market("").unwrap_err().line, 0);
        assert_eq!(parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n").unwrap_err().line, 1);
        let bad_index = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert_eq!(parse_matrix_market(bad_index).unwrap_err().line, 3);
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(parse_matrix_market(short).is_err());
        let upper = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n";
        assert_eq!(parse_matrix_market(upper).unwrap_err().line, 3);
    }
}
