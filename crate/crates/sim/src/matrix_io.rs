//! Plain-text matrices: a `rows cols` header, then one row per line as a 0/1
//! string with column 0 first.

use std::io::{BufRead, Write};

use grand_core::{BitMatrix, BitVector};

use crate::error::{Result, SimError};

pub fn write_matrix<W: Write>(m: &BitMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", m.rows(), m.cols())?;
    for row in m.row_iter() {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn matrix_to_string(m: &BitMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix(m, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("0/1 text is ASCII")
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<BitMatrix> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| SimError::Matrix("empty input".into()))??;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| SimError::Matrix(format!("bad header {header:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(SimError::Matrix(format!("header must be `rows cols`, got {header:?}")));
    };
    let mut data = Vec::with_capacity(rows);
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: BitVector = line.parse().map_err(|e| SimError::Matrix(format!("row {}: {e}", data.len())))?;
        if row.len() != cols {
            return Err(SimError::Matrix(format!("row {} has {} bits, expected {cols}", data.len(), row.len())));
        }
        data.push(row);
    }
    if data.len() != rows {
        return Err(SimError::Matrix(format!("found {} rows, header says {rows}", data.len())));
    }
    Ok(BitMatrix::from_rows(cols, data)?)
}
