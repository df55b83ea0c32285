//! Matrix files: a header line `rows,cols,q` followed by one line of
//! comma-separated integers per row. Entries are reduced mod `q` on read, so
//! negative values are accepted.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::linalg::Matrix;

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} {s:?}")))
}

pub fn read_matrix(input: impl Read) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    if header.len() != 3 {
        return Err(Error::Parse(format!(
            "header must be rows,cols,q; got {} fields",
            header.len()
        )));
    }
    let rows: usize = parse_field(&header[0], "row count")?;
    let cols: usize = parse_field(&header[1], "column count")?;
    let field = FieldSpec::new(parse_field(&header[2], "modulus")?)?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for rec in records {
        let rec = rec?;
        if rec.len() != cols {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {cols}",
                seen + 1,
                rec.len()
            )));
        }
        for v in rec.iter() {
            let v: i64 = parse_field(v, "entry")?;
            data.push(field.from_i64(v).value());
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse(format!(
            "found {seen} rows, header says {rows}"
        )));
    }
    Matrix::new(field, rows, cols, data)
}

pub fn write_matrix(m: &Matrix, out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([
        m.rows().to_string(),
        m.cols().to_string(),
        m.field().order().to_string(),
    ])?;
    for r in 0..m.rows() {
        w.write_record(m.row(r).iter().map(u64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<Matrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn write_matrix_file(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix(m, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_and_reduces() {
        let m = read_matrix("2,3,7\n1,2,3\n-1,7,15\n".as_bytes()).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m.field().order(), 7);
        assert_eq!(m.row(1), &[6, 0, 1]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "2,2\n1,2\n3,4\n",
            "2,2,8\n1,2\n3,4\n",
            "2,2,7\n1,2\n",
            "2,2,7\n1,2\n3\n",
            "1,2,7\n1,x\n",
            "1,1,7\n1\n2\n",
        ] {
            assert!(read_matrix(bad.as_bytes()).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn writes_header_first() {
        let m = Matrix::from_rows(FieldSpec::new(11).unwrap(), &[vec![1, 2], vec![3, 4]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2,2,11\n1,2\n3,4\n");
    }

    proptest! {
        #[test]
        fn round_trip(rows in 1usize..5, cols in 1usize..5, vals in proptest::collection::vec(0u64..101, 16)) {
            let f = FieldSpec::new(101).unwrap();
            let m = Matrix::from_fn(f, rows, cols, |r, c| vals[r * 4 + c]);
            let mut buf = Vec::new();
            write_matrix(&m, &mut buf).unwrap();
            prop_assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);
        }
    }
}
