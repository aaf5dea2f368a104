//! Matrix persistence.
//!
//! CSV: one matrix row per line, comma separated. Real entries are plain
//! numbers, complex entries are written as `re+imi` (for example
//! `1.5e0-2e-1i`). Binary: the 8-byte magic `BCMMAT01`, then `rows`, `cols`
//! (u64 LE), a one-byte complex flag, then the entries as f64 LE in row-major
//! order (re, im interleaved for complex).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{DenseMatrix, Scalar};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"BCMMAT01";

fn format_entry<T: Scalar>(v: T) -> String {
    let z = v.to_complex();
    if T::IS_COMPLEX {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{:e}{}{:e}i", z.re, sign, z.im.abs())
    } else {
        format!("{:e}", z.re)
    }
}

fn parse_entry<T: Scalar>(s: &str) -> Result<T> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad matrix entry {s:?}"));
    let z = if let Some(body) = s.strip_suffix('i') {
        // The real/imaginary split is the last sign not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
            .ok_or_else(bad)?;
        let re: f64 = body[..split].parse().map_err(|_| bad())?;
        let im: f64 = body[split..].trim_start_matches('+').parse().map_err(|_| bad())?;
        Complex64::new(re, im)
    } else {
        Complex64::new(s.parse().map_err(|_| bad())?, 0.0)
    };
    T::from_complex(z).ok_or_else(|| Error::Parse(format!("complex entry {s:?} in a real matrix")))
}

pub fn write_csv<T: Scalar>(m: &DenseMatrix<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|&v| format_entry(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<T> = line.split(',').map(parse_entry).collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse(format!("row {rows} has {} entries, expected {c}", row.len())))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    DenseMatrix::from_vec(rows, cols.unwrap_or(0), data)
}

pub fn write_binary<T: Scalar>(m: &DenseMatrix<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    w.write_all(&[T::IS_COMPLEX as u8])?;
    for &v in m.as_slice() {
        let z = v.to_complex();
        w.write_all(&z.re.to_le_bytes())?;
        if T::IS_COMPLEX {
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse(format!("{} is not a matrix dump", path.display())));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let stored_complex = flag[0] != 0;
    if stored_complex && !T::IS_COMPLEX {
        return Err(Error::Parse("complex dump read as a real matrix".into()));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        let im = if stored_complex {
            r.read_exact(&mut word)?;
            f64::from_le_bytes(word)
        } else {
            0.0
        };
        data.push(T::from_complex(Complex64::new(re, im)).expect("real dump into scalar"));
    }
    DenseMatrix::from_vec(rows, cols, data)
}
