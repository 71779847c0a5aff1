//! Self-describing binary container for spectral fields, and CSV tables
//! of per-block norms.
//!
//! Container layout (all integers and floats little-endian):
//!
//! ```text
//! magic     4 bytes   "RLXF"
//! version   u32       1
//! d         u32       spatial dimension
//! n         u32       component count
//! N         u64       points per axis
//! L         f64       box length
//! layout    u32 len + UTF-8 bytes, "complex interleaved, row-major wavevector"
//! coeffs    n * N^d pairs of f64 (re, im), component-major
//! ```

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::field::SpectralField;
use crate::spectral::grid::Grid;

pub const MAGIC: &[u8; 4] = b"RLXF";
pub const VERSION: u32 = 1;
pub const LAYOUT: &str = "complex interleaved, row-major wavevector";
const MAX_COMPONENTS: u32 = 64;

pub fn encode_field(field: &SpectralField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(48 + 16 * field.coeffs().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(field.ncomp() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points_per_axis() as u64).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&(LAYOUT.len() as u32).to_le_bytes());
    out.extend_from_slice(LAYOUT.as_bytes());
    for z in field.coeffs() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated container while reading {what}")))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Decodes and validates a container. Coefficients must be finite and
/// Hermitian-symmetric (the field is real-valued).
pub fn decode_field(bytes: &[u8]) -> Result<SpectralField> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format("bad magic, not a field container".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let d = r.u32("dimension")?;
    let n = r.u32("component count")?;
    let big_n = r.u64("points per axis")?;
    let length = r.f64("box length")?;
    let layout_len = r.u32("layout length")? as usize;
    if layout_len > 256 {
        return Err(Error::Format("layout string too long".into()));
    }
    let layout = std::str::from_utf8(r.take(layout_len, "layout")?)
        .map_err(|_| Error::Format("layout is not UTF-8".into()))?;
    if layout != LAYOUT {
        return Err(Error::Format(format!("unsupported layout {layout:?}")));
    }
    if n == 0 || n > MAX_COMPONENTS {
        return Err(Error::Format(format!("component count {n} out of range")));
    }
    if big_n > 1 << 16 {
        return Err(Error::Format(format!("points per axis {big_n} too large")));
    }
    if !(1..=2).contains(&d) {
        return Err(Error::Format(format!("dimension {d} not supported (1 or 2)")));
    }
    // size check before the grid is built, so a short header cannot
    // trigger a large allocation
    let count = (big_n as usize).pow(d) * n as usize;
    let remaining = bytes.len() - r.pos;
    if remaining != count * 16 {
        return Err(Error::Format(format!(
            "expected {} coefficient bytes, found {remaining}",
            count * 16
        )));
    }
    let grid = Grid::new(d as usize, big_n as usize, length).map_err(|e| Error::Format(e.to_string()))?;
    let mut coeffs = Vec::with_capacity(count);
    for _ in 0..count {
        let re = r.f64("coefficient")?;
        let im = r.f64("coefficient")?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::Format("non-finite coefficient".into()));
        }
        coeffs.push(Complex64::new(re, im));
    }
    let field = SpectralField::from_coeffs(&grid, n as usize, coeffs)?;
    let scale = field.max_coeff().max(f64::MIN_POSITIVE);
    if field.hermitian_defect() > 1e-9 * scale {
        return Err(Error::Format("coefficients are not Hermitian-symmetric".into()));
    }
    Ok(field)
}

pub fn write_field(path: &std::path::Path, field: &SpectralField) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_field(field))?;
    Ok(())
}

pub fn read_field(path: &std::path::Path) -> Result<SpectralField> {
    decode_field(&std::fs::read(path)?)
}

/// One row of a per-block norm table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub j: i32,
    pub two_pow_j_physical: f64,
    pub norm: f64,
}

pub fn block_norm_table(field: &SpectralField, p: f64) -> Vec<BlockNorm> {
    let scheme = field.grid().dyadic();
    scheme
        .block_norms(&[field], p)
        .into_iter()
        .zip(scheme.indices())
        .map(|(norm, j)| BlockNorm {
            j,
            two_pow_j_physical: (j as f64).exp2(),
            norm,
        })
        .collect()
}

pub fn block_norms_to_csv(rows: &[BlockNorm]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn block_norms_from_csv(text: &str) -> Result<Vec<BlockNorm>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["j", "two_pow_j_physical", "norm"] {
        return Err(Error::Format(format!("unexpected header {headers:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let row: BlockNorm = rec?;
        if !(row.norm >= 0.0 && row.norm.is_finite()) {
            return Err(Error::Format(format!("invalid norm at j = {}", row.j)));
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpectralField {
        let g = Grid::new(2, 8, 3.0).unwrap();
        SpectralField::from_fn(&g, 2, |c, x| (x[0] * 2.1 + c as f64).sin() * x[1].cos())
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let bytes = encode_field(&f);
        let g = decode_field(&bytes).unwrap();
        assert_eq!(g.ncomp(), 2);
        assert_eq!(g.grid(), f.grid());
        assert_eq!(g.coeffs(), f.coeffs());
    }

    #[test]
    fn rejects_truncation_and_corruption() {
        let bytes = encode_field(&sample());
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_field(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_field(&bad).is_err());
        // break Hermitian symmetry in the imaginary part of mode 1
        let mut asym = bytes.clone();
        let header = 4 + 4 + 4 + 4 + 8 + 8 + 4 + LAYOUT.len();
        let off = header + 16 + 8;
        asym[off..off + 8].copy_from_slice(&5.0f64.to_le_bytes());
        assert!(decode_field(&asym).is_err());
    }

    #[test]
    fn oversized_header_fails_before_allocating() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&VERSION.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&8192u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        bytes.extend_from_slice(&(LAYOUT.len() as u32).to_le_bytes());
        bytes.extend_from_slice(LAYOUT.as_bytes());
        let err = decode_field(&bytes).unwrap_err().to_string();
        assert!(err.contains("coefficient bytes"), "{err}");
    }

    #[test]
    fn block_table_csv_round_trip() {
        let rows = block_norm_table(&sample(), 2.0);
        let text = block_norms_to_csv(&rows).unwrap();
        assert!(text.starts_with("j,two_pow_j_physical,norm"));
        assert_eq!(block_norms_from_csv(&text).unwrap(), rows);
        assert!(block_norms_from_csv("a,b\n1,2\n").is_err());
    }
}
