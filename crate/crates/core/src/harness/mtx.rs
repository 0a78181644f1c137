//! Matrix Market coordinate files holding real symmetric matrices.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    Symmetric,
    General,
}

pub fn read_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<SparseSymMatrix<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(BufReader::new(file), path)
}

/// Parses from any reader; `origin` only labels error messages.
pub fn parse_matrix_market<T: Scalar, R: BufRead>(reader: R, origin: &Path) -> Result<SparseSymMatrix<T>> {
    let err = |line: usize, msg: String| Error::Parse { path: origin.to_path_buf(), line, msg };
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (ln, header) = match lines.next() {
        Some((ln, l)) => (ln, l.map_err(|e| Error::io(origin, e))?),
        None => return Err(err(1, "empty file".into())),
    };
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(err(ln, format!("malformed header `{header}`")));
    }
    if fields[2] != "coordinate" {
        return Err(err(ln, format!("unsupported format `{}`, expected coordinate", fields[2])));
    }
    if fields[3] != "real" {
        return Err(err(ln, format!("unsupported field `{}`, expected real", fields[3])));
    }
    let symmetry = match fields[4].as_str() {
        "symmetric" => Symmetry::Symmetric,
        "general" => Symmetry::General,
        other => return Err(err(ln, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut last_line = ln;
    for (ln, line) in lines {
        let line = line.map_err(|e| Error::io(origin, e))?;
        last_line = ln;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let Some((n, nnz)) = size else {
            if parts.len() != 3 {
                return Err(err(ln, format!("expected `rows cols nnz`, got `{t}`")));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(ln, format!("bad integer `{s}`")));
            let (r, c, nnz) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if r != c {
                return Err(err(ln, format!("matrix is {r}x{c}, expected square")));
            }
            size = Some((r, nnz));
            triplets.reserve(nnz);
            continue;
        };
        if parts.len() != 3 {
            return Err(err(ln, format!("expected `row col value`, got `{t}`")));
        }
        if triplets.len() == nnz {
            return Err(err(ln, format!("more than the declared {nnz} entries")));
        }
        let idx = |s: &str| -> Result<usize> {
            let v = s.parse::<usize>().map_err(|_| err(ln, format!("bad index `{s}`")))?;
            if v == 0 || v > n {
                return Err(err(ln, format!("index {v} out of range 1..={n}")));
            }
            Ok(v - 1)
        };
        let (i, j) = (idx(parts[0])?, idx(parts[1])?);
        let v: f64 = parts[2].parse().map_err(|_| err(ln, format!("bad value `{}`", parts[2])))?;
        if !v.is_finite() {
            return Err(err(ln, format!("non-finite value `{}`", parts[2])));
        }
        if symmetry == Symmetry::Symmetric && j > i {
            return Err(err(ln, format!("entry ({}, {}) above the diagonal in a symmetric file", i + 1, j + 1)));
        }
        triplets.push((i, j, T::lit(v)));
    }
    let Some((n, nnz)) = size else {
        return Err(err(last_line, "missing size line".into()));
    };
    if triplets.len() != nnz {
        return Err(err(last_line, format!("declared {nnz} entries, found {}", triplets.len())));
    }
    match symmetry {
        Symmetry::Symmetric => SparseSymMatrix::from_lower_triplets(n, triplets),
        Symmetry::General => SparseSymMatrix::from_triplets(n, triplets),
    }
}

/// Writes the lower triangle with a `symmetric` header and 17 significant
/// digits, so reading the file back reproduces the matrix exactly.
pub fn write_matrix_market<T: Scalar>(path: impl AsRef<Path>, m: &SparseSymMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let lower: usize = (0..m.n()).map(|i| m.row(i).0.iter().filter(|&&j| j <= i).count()).sum();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric").map_err(io)?;
    writeln!(w, "{} {} {}", m.n(), m.n(), lower).map_err(io)?;
    for i in 0..m.n() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v.to_f64_lossy()).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Result<SparseSymMatrix<f64>> {
        parse_matrix_market(Cursor::new(s), Path::new("test.mtx"))
    }

    fn parse_line(s: &str) -> usize {
        match parse(s) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn two_by_two_symmetric() {
        let m =
            parse("%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 3\n1 1 2\n2 1 1\n2 2 2\n").unwrap();
        assert_eq!(m.to_dense(), vec![2.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn duplicates_are_summed() {
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n1 1 0.5\n2 2 1\n").unwrap();
        assert_eq!(m.get(0, 0), Some(2.5));
    }

    #[test]
    fn general_header_checks_symmetry() {
        let ok = parse("%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 2\n1 2 1\n2 1 1\n2 2 2\n").unwrap();
        assert_eq!(ok.to_dense(), vec![2.0, 1.0, 1.0, 2.0]);
        let bad = parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 2\n1 2 1\n2 2 2\n");
        assert!(matches!(bad, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_line("%%MatrixMarket matrix array real general\n"), 1);
        assert_eq!(parse_line("%%MatrixMarket matrix coordinate complex symmetric\n"), 1);
        assert_eq!(parse_line("%%MatrixMarket matrix coordinate pattern symmetric\n"), 1);
        assert_eq!(parse_line("garbage\n"), 1);
        assert_eq!(parse_line("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n"), 2);
        assert_eq!(parse_line("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n"), 3);
        assert_eq!(parse_line("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n"), 3);
        assert_eq!(parse_line("%%MatrixMarket matrix coordinate real symmetric\n%c\n2 2 2\n1 1 1.0\n"), 4);
        assert_eq!(parse_line("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 x\n"), 3);
        assert_eq!(parse_line(""), 1);
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.mtx");
        let m = SparseSymMatrix::from_dense(3, &[1.0 / 3.0, -0.1, 0.0, -0.1, 2.5e-7, 7.0, 0.0, 7.0, 1e300]).unwrap();
        write_matrix_market(&p, &m).unwrap();
        assert_eq!(read_matrix_market::<f64>(&p).unwrap(), m);
        assert!(matches!(read_matrix_market::<f64>(dir.path().join("missing.mtx")), Err(Error::Io { .. })));
    }
}
