//! Dense numeric matrices and label files on disk.
//!
//! Blank lines and lines starting with `#` are skipped. Matrices are written
//! with Rust's shortest round-trip float formatting (exponent form for
//! very small or large magnitudes), so `write_csv` followed
//! by `load_matrix` reproduces every entry bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Relative asymmetry accepted when reading a square kernel matrix.
pub const LOAD_SYMMETRY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Whitespace,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "whitespace" | "ws" | "txt" => Ok(Format::Whitespace),
            other => Err(Error::Config(format!("unknown matrix format {other:?}"))),
        }
    }
}

impl Format {
    /// Guesses from the file extension; anything but `.csv` is whitespace.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Whitespace,
        }
    }
}

fn parse_error(path: &str, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Parses a dense numeric grid (`line`/`column` in errors are 1-based;
/// the column counts fields, not characters).
pub fn parse_matrix(text: &str, format: Format, path: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = match format {
            Format::Csv => trimmed.split(',').map(str::trim).collect(),
            Format::Whitespace => trimmed.split_whitespace().collect(),
        };
        let mut row = Vec::with_capacity(fields.len());
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                parse_error(path, lineno + 1, col + 1, format!("not a number: {field:?}"))
            })?;
            if !v.is_finite() {
                return Err(parse_error(path, lineno + 1, col + 1, "non-finite value"));
            }
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_error(
                    path,
                    lineno + 1,
                    row.len().min(w) + 1,
                    format!("expected {w} fields, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    let n = rows.len();
    let p = width.unwrap_or(0);
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

fn read(path: &Path) -> Result<(String, String)> {
    let text = fs::read_to_string(path)?;
    Ok((text, path.display().to_string()))
}

/// Instances as rows.
pub fn load_vectors(path: &Path, format: Format) -> Result<DMatrix<f64>> {
    let (text, name) = read(path)?;
    parse_matrix(&text, format, &name)
}

fn square(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(parse_error(
            name,
            m.nrows().min(m.ncols()) + 1,
            1,
            format!("matrix is {}x{}, expected square", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

/// Position and size of the largest `|m_ij - m_ji|` relative to `max(1, amax)`.
fn worst_asymmetry(m: &DMatrix<f64>) -> (usize, usize, f64) {
    let scale = m.amax().max(1.0);
    let mut worst = (0, 0, 0.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let a = (m[(i, j)] - m[(j, i)]).abs() / scale;
            if a > worst.2 {
                worst = (j, i, a);
            }
        }
    }
    worst
}

fn symmetric_from(m: DMatrix<f64>, name: &str) -> Result<SymMatrix> {
    square(&m, name)?;
    let (i, j, a) = worst_asymmetry(&m);
    if a > LOAD_SYMMETRY_TOLERANCE {
        return Err(parse_error(
            name,
            i + 1,
            j + 1,
            format!("matrix is not symmetric (relative asymmetry {a:.3e})"),
        ));
    }
    SymMatrix::with_tolerance(m, LOAD_SYMMETRY_TOLERANCE)
}

/// A square similarity (kernel) matrix, symmetrized.
pub fn load_matrix(path: &Path, format: Format) -> Result<SymMatrix> {
    let (text, name) = read(path)?;
    symmetric_from(parse_matrix(&text, format, &name)?, &name)
}

pub fn load_dissimilarity(path: &Path, format: Format, squared: bool) -> Result<DissimilarityMatrix> {
    let (text, name) = read(path)?;
    let m = symmetric_from(parse_matrix(&text, format, &name)?, &name)?;
    DissimilarityMatrix::new(m.into_inner(), squared)
}

pub fn write_csv(out: &mut impl Write, m: &DMatrix<f64>) -> Result<()> {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn save_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_csv(&mut f, m)?;
    f.flush()?;
    Ok(())
}

/// One label per line; surrounding whitespace is trimmed.
pub fn load_labels(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rng;

    #[test]
    fn two_by_two_csv() {
        let m = parse_matrix("0,1\n1,0\n", Format::Csv, "t").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let m = parse_matrix("# header\n0  1\n\n1\t0\n", Format::Whitespace, "t").unwrap();
        assert_eq!(m.shape(), (2, 2));
    }

    #[test]
    fn ragged_rows_report_the_line() {
        let err = parse_matrix("1,2,3\n4,5\n", Format::Csv, "r.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_matrix("1,2\n3,x\n", Format::Csv, "r.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 2, .. }));
    }

    #[test]
    fn asymmetry_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        fs::write(&p, "1,2\n2.5,1\n").unwrap();
        assert!(matches!(load_matrix(&p, Format::Csv), Err(Error::Parse { line: 2, column: 1, .. })));
        fs::write(&p, "1,2\n2.0000001,1\n").unwrap();
        let k = load_matrix(&p, Format::Csv).unwrap();
        assert_eq!(k[(0, 1)], k[(1, 0)]);
    }

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let mut rng = Rng::new(3);
        let mut m = DMatrix::from_fn(7, 5, |_, _| rng.normal() * 10f64.powi(rng.below(30) as i32 - 15));
        m[(0, 0)] = -0.0;
        m[(1, 1)] = f64::MIN_POSITIVE;
        m[(2, 2)] = 0.1 + 0.2;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        save_csv(&p, &m).unwrap();
        let back = load_vectors(&p, Format::Csv).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn golden_csv_text() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, -2.5, 1e-300]);
        let mut out = Vec::new();
        write_csv(&mut out, &m).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1.0,0.1\n-2.5,1e-300\n");
    }

    #[test]
    fn labels_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.txt");
        fs::write(&p, "a\n b \n\na\n").unwrap();
        assert_eq!(load_labels(&p).unwrap(), vec!["a", "b", "a"]);
        assert_eq!(Format::from_path(Path::new("x.CSV")), Format::Csv);
        assert_eq!(Format::from_path(Path::new("x.dat")), Format::Whitespace);
    }
}
