//! Result-file formats: parameter-echoing CSV, flat binary grids, and the
//! superoperator debug dump.
//!
//! CSV files start with a `#`-prefixed header block echoing every parameter
//! of the run, one `# key = value` line each, followed by a `#`-prefixed
//! column line. Floats are written as `{:.16e}` so identical runs produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::liouvillian::Superoperator;
use crate::{Error, Result};

/// CSV writer with a parameter-echo header.
pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create<P: AsRef<Path>>(
        path: P,
        params: &[(String, String)],
        columns: &[&str],
    ) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        for (key, value) in params {
            writeln!(out, "# {key} = {value}")?;
        }
        writeln!(out, "# columns: {}", columns.join(","))?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self { out })
    }

    pub fn write_row(&mut self, values: &[f64]) -> Result<()> {
        let mut first = true;
        for v in values {
            if !first {
                write!(self.out, ",")?;
            }
            write!(self.out, "{v:.16e}")?;
            first = false;
        }
        writeln!(self.out)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Dump a superoperator: 8-byte little-endian level count d, then the
/// d²×d² matrix row-major as complex128 (re, im) pairs.
pub fn write_superoperator<P: AsRef<Path>>(path: P, l: &Superoperator) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&(l.dim() as u64).to_le_bytes())?;
    for row in l.matrix().rows() {
        for v in row {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_superoperator<P: AsRef<Path>>(path: P) -> Result<Superoperator> {
    let mut input = BufReader::new(File::open(path)?);
    let mut buf8 = [0u8; 8];
    input.read_exact(&mut buf8)?;
    let d = u64::from_le_bytes(buf8) as usize;
    let n = d * d;
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            input.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            input.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            matrix[(i, j)] = Complex64::new(re, im);
        }
    }
    Superoperator::from_matrix(d, matrix)
}

/// Write a flat binary complex grid: three little-endian i64 dimensions,
/// six f64 extents (min/max per axis), then row-major complex128 values
/// (the last dimension runs fastest).
pub fn write_complex_grid<P: AsRef<Path>>(
    path: P,
    dims: [usize; 3],
    extents: [[f64; 2]; 3],
    values: &[Complex64],
) -> Result<()> {
    if values.len() != dims[0] * dims[1] * dims[2] {
        return Err(Error::Dimension(format!(
            "grid payload {} does not match dims {:?}",
            values.len(),
            dims
        )));
    }
    let mut out = BufWriter::new(File::create(path)?);
    for d in dims {
        out.write_all(&(d as i64).to_le_bytes())?;
    }
    for axis in extents {
        out.write_all(&axis[0].to_le_bytes())?;
        out.write_all(&axis[1].to_le_bytes())?;
    }
    for v in values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

#[allow(clippy::type_complexity)]
pub fn read_complex_grid<P: AsRef<Path>>(
    path: P,
) -> Result<([usize; 3], [[f64; 2]; 3], Vec<Complex64>)> {
    let mut input = BufReader::new(File::open(path)?);
    let mut buf8 = [0u8; 8];
    let mut dims = [0usize; 3];
    for d in &mut dims {
        input.read_exact(&mut buf8)?;
        *d = i64::from_le_bytes(buf8) as usize;
    }
    let mut extents = [[0.0; 2]; 3];
    for axis in &mut extents {
        for v in axis.iter_mut() {
            input.read_exact(&mut buf8)?;
            *v = f64::from_le_bytes(buf8);
        }
    }
    let n = dims[0] * dims[1] * dims[2];
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        input.read_exact(&mut buf8)?;
        let re = f64::from_le_bytes(buf8);
        input.read_exact(&mut buf8)?;
        let im = f64::from_le_bytes(buf8);
        values.push(Complex64::new(re, im));
    }
    Ok((dims, extents, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_then_rows() {
        let dir = std::env::temp_dir().join("lwi_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("spectrum.csv");
        let mut w = CsvWriter::create(
            &path,
            &[("temperature_k".into(), "300".into()), ("scheme".into(), "mercury".into())],
            &["delta_p", "re_chi", "im_chi"],
        )
        .unwrap();
        w.write_row(&[1.0, 2.0, -0.25]).unwrap();
        w.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# temperature_k = 300\n# scheme = mercury\n"));
        assert!(text.contains("delta_p,re_chi,im_chi"));
        assert!(text.contains("-2.5000000000000000e-1"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn grid_roundtrip() {
        let dir = std::env::temp_dir().join("lwi_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("grid.bin");
        let dims = [2, 3, 4];
        let extents = [[-1.0, 1.0], [-2.0, 2.0], [0.0, 5.0]];
        let values: Vec<Complex64> =
            (0..24).map(|k| Complex64::new(k as f64, -(k as f64) / 2.0)).collect();
        write_complex_grid(&path, dims, extents, &values).unwrap();
        let (d2, e2, v2) = read_complex_grid(&path).unwrap();
        assert_eq!(d2, dims);
        assert_eq!(e2, extents);
        assert_eq!(v2, values);
        std::fs::remove_file(&path).ok();
    }
}
