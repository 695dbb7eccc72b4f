//! File formats for sampled functions.
//!
//! CSV has one row per grid node: `x1,..,xn,re,im`, nodes in row-major order.
//! The binary format is a 16-byte header (`GPDOFN1\0`, dims as u16, points per
//! axis as u16, half-width as f32, all little-endian) followed by the real
//! column and then the imaginary column as little-endian f64.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use gpdo_core::{GroupGrid, SampledFunction, C64};

pub const MAGIC: &[u8; 8] = b"GPDOFN1\0";

pub fn write_csv<W: Write>(f: &SampledFunction, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let dim = f.grid.dim();
    let mut header: Vec<String> = (1..=dim).map(|j| format!("x{j}")).collect();
    header.push("re".into());
    header.push("im".into());
    out.write_record(&header)?;
    for (p, v) in f.values.iter().enumerate() {
        let mut row: Vec<String> = f.grid.coords(p).iter().map(|c| format!("{c:e}")).collect();
        row.push(format!("{:e}", v.re));
        row.push(format!("{:e}", v.im));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<SampledFunction> {
    let mut rdr = csv::Reader::from_reader(r);
    let ncols = rdr.headers()?.len();
    ensure!(ncols >= 3, "expected at least one coordinate column plus re, im");
    let dim = ncols - 2;
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("row {}: non-numeric field", line + 2))?;
        ensure!(nums.len() == ncols, "row {}: expected {ncols} fields", line + 2);
        coords.push(nums[..dim].to_vec());
        values.push(C64::new(nums[dim], nums[dim + 1]));
    }
    let points = (values.len() as f64).powf(1.0 / dim as f64).round() as usize;
    ensure!(points.pow(dim as u32) == values.len(), "{} rows do not form a {dim}-dimensional tensor grid", values.len());
    let half: Vec<f64> = (0..dim).map(|j| coords.iter().map(|c| c[j].abs()).fold(0.0, f64::max)).collect();
    let grid = GroupGrid::boxed(&half, points)?;
    for (p, c) in coords.iter().enumerate() {
        let g = grid.coords(p);
        if c.iter().zip(&g).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs())) {
            bail!("row {}: coordinates do not match a symmetric uniform grid in row-major order", p + 2);
        }
    }
    Ok(SampledFunction::new(grid, values)?)
}

pub fn write_binary<W: Write>(f: &SampledFunction, mut w: W) -> Result<()> {
    let grid = &f.grid;
    let l = grid.half_widths()[0];
    ensure!(grid.half_widths().iter().all(|&h| h == l), "binary format needs a cube grid");
    ensure!((l as f32) as f64 == l, "half-width {l} is not representable as f32");
    let dims = u16::try_from(grid.dim())?;
    let points = u16::try_from(grid.points_per_axis())?;
    w.write_all(MAGIC)?;
    w.write_all(&dims.to_le_bytes())?;
    w.write_all(&points.to_le_bytes())?;
    w.write_all(&(l as f32).to_le_bytes())?;
    for v in &f.values {
        w.write_all(&v.re.to_le_bytes())?;
    }
    for v in &f.values {
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SampledFunction> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head).context("truncated header")?;
    ensure!(&head[..8] == MAGIC, "bad magic");
    let dims = u16::from_le_bytes([head[8], head[9]]) as usize;
    let points = u16::from_le_bytes([head[10], head[11]]) as usize;
    let l = f32::from_le_bytes([head[12], head[13], head[14], head[15]]) as f64;
    let grid = GroupGrid::cube(dims, l, points)?;
    let n = grid.len();
    let mut buf = vec![0u8; 16 * n];
    r.read_exact(&mut buf).context("truncated data")?;
    let col = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().unwrap());
    let values = (0..n).map(|k| C64::new(col(k), col(n + k))).collect();
    Ok(SampledFunction::new(grid, values)?)
}

/// Writes by extension: `.csv` or anything else as binary.
pub fn save(f: &SampledFunction, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    if path.extension().is_some_and(|e| e == "csv") {
        write_csv(f, file)
    } else {
        write_binary(f, file)
    }
}

pub fn load(path: &Path) -> Result<SampledFunction> {
    let file = std::io::BufReader::new(std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?);
    if path.extension().is_some_and(|e| e == "csv") {
        read_csv(file)
    } else {
        read_binary(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SampledFunction {
        let g = GroupGrid::cube(3, 2.5, 7).unwrap();
        SampledFunction::from_fn(&g, |x| C64::new(x[0] - x[2] * 0.3, x[1].sin()))
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16 * f.values.len());
        assert_eq!(&buf[..8], MAGIC);
        let g = read_binary(&buf[..]).unwrap();
        assert_eq!(g.values, f.values);
        assert_eq!(g.grid, f.grid);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,x3,re,im\n"));
        let g = read_csv(&buf[..]).unwrap();
        assert_eq!(g.values, f.values);
        assert_eq!(g.grid.points_per_axis(), 7);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(read_binary(&b"GPDOFN2\0\x03\x00\x05\x00\x00\x00\x80\x3f"[..]).is_err());
        assert!(read_binary(&MAGIC[..]).is_err());
        assert!(read_csv("x1,re,im\n0,1,0\n1,a,0\n".as_bytes()).is_err());
        assert!(read_csv("x1,re,im\n0,1,0\n5,1,0\n".as_bytes()).is_err());
        let odd = SampledFunction::zeros(&GroupGrid::cube(1, 0.1, 5).unwrap());
        assert!(write_binary(&odd, Vec::new()).is_err());
    }
}
