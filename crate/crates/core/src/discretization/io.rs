//! Field serialization.
//!
//! CSV: `#`-prefixed header lines (the first is `# n=<n>,L=<L>,N=2`), then
//! the row `i,j,x,y,value` and one line per cell in flat-index order.
//!
//! Binary: the 8 magic bytes `TPFIELD1`, `n` as u64, `L` as f64, `N` as u32,
//! then `n²` values as f64, all little-endian, in flat-index order.

use std::io::{BufRead, Read, Write};

use super::{Grid, GridField};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"TPFIELD1";

/// Writes a field as CSV; `extra_header` lines are emitted after the grid line.
pub fn write_field_csv<W: Write>(out: &mut W, field: &GridField, extra_header: &[String]) -> Result<()> {
    let g = &field.grid;
    writeln!(out, "# n={},L={:e},N=2", g.n(), g.half_width())?;
    for line in extra_header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "i,j,x,y,value")?;
    for (k, v) in field.values.iter().enumerate() {
        let (i, j) = g.coords(k);
        let p = g.center(i, j);
        writeln!(out, "{i},{j},{:e},{:e},{:e}", p.x, p.y, v)?;
    }
    Ok(())
}

pub fn read_field_csv<R: BufRead>(input: R) -> Result<GridField> {
    let mut grid = None;
    let mut values = Vec::new();
    let bad = |msg: &str| Error::Config(format!("malformed field CSV: {msg}"));
    for line in input.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if grid.is_none() {
                let mut n = None;
                let mut l = None;
                for kv in rest.trim().split(',') {
                    match kv.split_once('=') {
                        Some(("n", v)) => n = v.parse::<usize>().ok(),
                        Some(("L", v)) => l = v.parse::<f64>().ok(),
                        _ => {}
                    }
                }
                if let (Some(n), Some(l)) = (n, l) {
                    grid = Some(Grid::new(n, l)?);
                }
            }
            continue;
        }
        if line.starts_with("i,") || line.trim().is_empty() {
            continue;
        }
        let value = line.rsplit(',').next().ok_or_else(|| bad("empty row"))?;
        values.push(value.trim().parse::<f64>().map_err(|e| bad(&e.to_string()))?);
    }
    let grid = grid.ok_or_else(|| bad("missing grid header"))?;
    if values.len() != grid.cell_count() {
        return Err(bad(&format!("expected {} rows, found {}", grid.cell_count(), values.len())));
    }
    Ok(GridField::new(grid, values))
}

pub fn write_field_binary<W: Write>(out: &mut W, field: &GridField) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(field.grid.n() as u64).to_le_bytes())?;
    out.write_all(&field.grid.half_width().to_le_bytes())?;
    out.write_all(&2u32.to_le_bytes())?;
    for v in &field.values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary<R: Read>(input: &mut R) -> Result<GridField> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config("not a binary field file".into()));
    }
    let mut b8 = [0u8; 8];
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    input.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    input.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != 2 {
        return Err(Error::Config("only two-dimensional fields are supported".into()));
    }
    let grid = Grid::new(n, l)?;
    let mut values = Vec::with_capacity(grid.cell_count());
    for _ in 0..grid.cell_count() {
        input.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    Ok(GridField::new(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> GridField {
        let g = Grid::new(16, 2.5).unwrap();
        GridField::from_fn(g, |p| (p.x * 1.3).sin() + p.y.powi(3) / 7.0)
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = sample_field();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f, &["version=test".into()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# n=16,L=2.5e0,N=2\n# version=test\ni,j,x,y,value\n"));
        let back = read_field_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let f = sample_field();
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 8 + 8 + 8 + 4 + 8 * 256);
        let back = read_field_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn truncated_csv_is_rejected() {
        let f = sample_field();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f, &[]).unwrap();
        buf.truncate(buf.len() / 2);
        let cut = buf.iter().rposition(|&b| b == b'\n').unwrap();
        assert!(read_field_csv(&buf[..=cut]).is_err());
    }
}
