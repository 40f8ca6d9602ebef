//! File formats: HPF1 field dumps, residual-history CSV, P5 PGM images and
//! the resolved-config echo.
//!
//! HPF1 is a single text header line `HPF1 N=<N> L=<L>\n` followed by `N^2`
//! little-endian IEEE-754 `(re, im)` pairs in row-major order, bit-exact
//! across platforms. `L` is printed with Rust's shortest round-trip float
//! formatting, so read-back reproduces the grid exactly.

use num_complex::Complex64;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{HelmError, Result};
use crate::grid::{ComplexField, Grid2D};

/// Write a field in HPF1 format.
pub fn write_hpf1(path: &Path, field: &ComplexField) -> Result<()> {
    let grid = field.grid();
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "HPF1 N={} L={}\n", grid.n(), grid.side())?;
    for v in field.values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Read a field in HPF1 format.
pub fn read_hpf1(path: &Path) -> Result<ComplexField> {
    let op = "read_hpf1";
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let header = header.trim_end_matches('\n');
    let mut parts = header.split(' ');
    if parts.next() != Some("HPF1") {
        return Err(HelmError::invalid_argument(op, format!("bad magic in {header:?}")));
    }
    let mut n: Option<usize> = None;
    let mut l: Option<f64> = None;
    for part in parts {
        if let Some(v) = part.strip_prefix("N=") {
            n = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("L=") {
            l = v.parse().ok();
        }
    }
    let (n, l) = match (n, l) {
        (Some(n), Some(l)) => (n, l),
        _ => return Err(HelmError::invalid_argument(op, format!("bad header {header:?}"))),
    };
    let grid = Grid2D::new(n, l)?;
    let mut buf = vec![0u8; grid.len() * 16];
    reader.read_exact(&mut buf)?;
    let values = buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    ComplexField::from_values(grid, values)
}

/// Write a residual history as `iter,relres` with 17 significant digits.
pub fn write_residual_csv(path: &Path, residuals: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "iter,relres")?;
    for (iter, r) in residuals.iter().enumerate() {
        writeln!(out, "{iter},{r:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Write generic CSV rows under a header line.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

/// Gray mapping for [`write_pgm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmScale {
    /// `[0, max|u|]` mapped linearly to `[0, 255]`.
    Linear,
    /// `[log10(max|u|) - 8, log10(max|u|)]` mapped to `[0, 255]`.
    Log10,
}

/// Write the magnitude of a field as a binary P5 PGM image.
///
/// Rows scan `x2` from top (largest) to bottom, columns scan `x1` left to
/// right, so the image is in conventional orientation.
pub fn write_pgm(path: &Path, field: &ComplexField, scale: PgmScale) -> Result<()> {
    let grid = field.grid();
    let n = grid.n();
    let max = field.norm_max();
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{n} {n}\n255\n")?;
    let mut bytes = Vec::with_capacity(grid.len());
    for row in 0..n {
        let j = n - 1 - row;
        for i in 0..n {
            let mag = field.at(i, j).norm();
            let level = match scale {
                PgmScale::Linear => {
                    if max == 0.0 {
                        0.0
                    } else {
                         255.0 * mag / max
                    }
                }
                PgmScale::Log10 => {
                    if max == 0.0 || mag == 0.0 {
                        0.0
                    } else {
                        let top = max.log10();
                        let t = (mag.log10() - (top - 8.0)) / 8.0;
                        255.0 * t.clamp(0.0, 1.0)
                    }
                }
            };
            bytes.push(level.round().clamp(0.0, 255.0) as u8);
        }
    }
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

/// Echo resolved key/value configuration, sorted by key, one `key=value`
/// per line.
pub fn write_resolved_config(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut sorted: Vec<&(String, String)> = entries.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = BufWriter::new(File::create(path)?);
    for (k, v) in sorted {
        writeln!(out, "{k}={v}")?;
    }
    out.flush()?;
    Ok(())
}

/// FNV-1a hash of the canonical config text; stable across runs and
/// platforms, used to name experiment output directories.
pub fn config_tag(entries: &[(String, String)]) -> String {
    let mut sorted: Vec<&(String, String)> = entries.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut hash: u64 = 0xcbf29ce484222325;
    for (k, v) in sorted {
        for byte in k.bytes().chain([b'='].into_iter()).chain(v.bytes()).chain([b'\n']) {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hpf1_round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join("helmprec-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.hpf1");

        let grid = Grid2D::new(8, 1.0).unwrap();
        let field = ComplexField::from_fn(grid, |x1, x2| {
            Complex64::new(x1 * 3.7 + 0.1, (x2 * 11.0).sin())
        });
        write_hpf1(&path, &field).unwrap();
        let back = read_hpf1(&path).unwrap();
        assert_eq!(back.grid(), grid);
        assert_eq!(back.values(), field.values());

        // Bit-exact file content on rewrite.
        let first = std::fs::read(&path).unwrap();
        write_hpf1(&path, &field).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }

    #[test]
    fn residual_csv_format() {
        let dir = std::env::temp_dir().join("helmprec-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("res.csv");
        write_residual_csv(&path, &[1.0, 0.125]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,relres"));
        assert_eq!(lines.next(), Some("0,1.0000000000000000e0"));
        assert_eq!(lines.next(), Some("1,1.2500000000000000e-1"));
    }

    #[test]
    fn pgm_header_and_size() {
        let dir = std::env::temp_dir().join("helmprec-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("img.pgm");
        let grid = Grid2D::new(6, 1.0).unwrap();
        let field = ComplexField::from_fn(grid, |x1, x2| Complex64::new(x1 + x2, 0.0));
        write_pgm(&path, &field, PgmScale::Linear).unwrap();
        let data = std::fs::read(&path).unwrap();
        let header = b"P5\n6 6\n255\n";
        assert!(data.starts_with(header));
        assert_eq!(data.len(), header.len() + 36);
        // The brightest pixel is the max-magnitude corner.
        assert!(data[header.len()..].contains(&255u8));
    }

    #[test]
    fn config_tag_is_order_independent() {
        let a = vec![
            ("omega".to_string(), "25.13".to_string()),
            ("m".to_string(), "4".to_string()),
        ];
        let b = vec![
            ("m".to_string(), "4".to_string()),
            ("omega".to_string(), "25.13".to_string()),
        ];
        assert_eq!(config_tag(&a), config_tag(&b));
        assert_eq!(config_tag(&a).len(), 16);
    }
}
