//! Matrix Market coordinate files (1-based indices).
//!
//! Real, integer and pattern fields are read as real; complex is rejected.
//! Symmetric files store one triangle and are expanded to full storage.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_matrix_market(BufReader::new(file), path)
}

/// Parses from any reader; `origin` is only used in error messages.
pub fn read_matrix_market(reader: impl BufRead, origin: &Path) -> Result<SparseMatrix> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };

    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let header = header?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(1, format!("malformed header: {header:?}")));
    }
    if tokens[2] != "coordinate" {
        return Err(err(
            1,
            format!("unsupported format {:?} (coordinate only)", tokens[2]),
        ));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        "complex" => return Err(err(1, "complex matrices are not supported".into())),
        other => return Err(err(1, format!("unknown field {other:?}"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(1, format!("unsupported symmetry {other:?}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for (lineno, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let Some((nrows, ncols, nnz)) = size else {
            if parts.len() != 3 {
                return Err(err(lineno, "expected `rows cols entries`".into()));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| err(lineno, format!("bad size {s:?}: {e}")))
            };
            size = Some((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?));
            entries.reserve(size.unwrap().2 * if symmetric { 2 } else { 1 });
            continue;
        };
        let want = if field == Field::Pattern { 2 } else { 3 };
        if parts.len() != want {
            return Err(err(
                lineno,
                format!("expected {want} fields, found {}", parts.len()),
            ));
        }
        let index = |s: &str, bound: usize| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|e| err(lineno, format!("bad index {s:?}: {e}")))?;
            if v == 0 || v > bound {
                return Err(err(lineno, format!("index {v} out of range 1..={bound}")));
            }
            Ok(v - 1)
        };
        let i = index(parts[0], nrows)?;
        let j = index(parts[1], ncols)?;
        let v = match field {
            Field::Pattern => 1.0,
            _ => parts[2]
                .parse::<f64>()
                .map_err(|e| err(lineno, format!("bad value {:?}: {e}", parts[2])))?,
        };
        if entries.len() >= nnz * if symmetric { 2 } else { 1 } {
            return Err(err(lineno, format!("more than the declared {nnz} entries")));
        }
        entries.push((i, j, v));
        if symmetric && i != j {
            entries.push((j, i, v));
        }
    }
    let Some((nrows, ncols, _)) = size else {
        return Err(err(1, "missing size line".into()));
    };
    SparseMatrix::from_triplets(nrows, ncols, entries)
}

/// Writes `a` in general coordinate format using shortest round-trip values.
pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::laplacian_2d;

    fn parse(text: &str) -> Result<SparseMatrix> {
        read_matrix_market(text.as_bytes(), Path::new("mem.mtx"))
    }

    #[test]
    fn scalar_file() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 4.0\n").unwrap();
        assert_eq!(a.nrows(), 1);
        assert_eq!(a.get(0, 0), 4.0);
    }

    #[test]
    fn symmetric_lower_triangle_expands() {
        let lap = laplacian_2d(2).unwrap();
        let mut text = String::from("%%MatrixMarket matrix coordinate real symmetric\n% lower\n");
        let lower: Vec<_> = lap.triplets().filter(|&(i, j, _)| i >= j).collect();
        text.push_str(&format!("4 4 {}\n", lower.len()));
        for (i, j, v) in lower {
            text.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
        }
        assert_eq!(parse(&text).unwrap(), lap);
    }

    #[test]
    fn malformed_header_names_line_one() {
        match parse("%%MatrixMarket tensor\n1 1 1\n1 1 4\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_entry_reports_its_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n3 1 2.0\n";
        match parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn complex_is_rejected_and_pattern_promoted() {
        assert!(
            parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").is_err()
        );
        let p = parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 1\n").unwrap();
        assert_eq!(p.get(1, 0), 1.0);
        let i = parse("%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 3\n").unwrap();
        assert_eq!(i.get(0, 0), 3.0);
    }

    #[test]
    fn duplicates_are_summed() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.5\n1 1 2.5\n")
            .unwrap();
        assert_eq!(a.get(0, 0), 4.0);
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lap.mtx");
        let lap = laplacian_2d(3).unwrap();
        write_matrix_market(&lap, &path).unwrap();
        assert_eq!(load_matrix_market(&path).unwrap(), lap);
    }
}
