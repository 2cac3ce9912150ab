//! Binary field container and CSV slice export.
//!
//! Container layout (all integers little-endian):
//!
//! ```text
//! offset  size  content
//! 0       4     magic "NSRF"
//! 4       4     format version (u32, currently 1)
//! 8       4     n: points per axis (u32)
//! 12      4     component count (u32: 1 scalar, 3 vector, 6 sym tensor)
//! 16      4     time index (u32; u32::MAX when not time-indexed)
//! 20      ...   payload: n^3 * components f64 samples, little-endian,
//!               interleaved by component (point-major, z fastest)
//! ```

use super::{ScalarField, SymTensorField, VectorField};
use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::scalar::Real;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"NSRF";
const VERSION: u32 = 1;

/// A decoded snapshot: grid size, component count, time index and samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub components: usize,
    pub time_index: Option<u32>,
    /// `n^3 * components` samples, point-major.
    pub samples: Vec<f64>,
}

impl Snapshot {
    pub fn from_scalar<T: Real>(f: &ScalarField<T>, time_index: Option<u32>) -> Self {
        Snapshot {
            n: f.grid().n,
            components: 1,
            time_index,
            samples: f.values().iter().map(|v| v.to_f64()).collect(),
        }
    }

    pub fn from_vector<T: Real>(v: &VectorField<T>, time_index: Option<u32>) -> Self {
        let vals = v.values();
        let n3 = vals[0].len();
        let mut samples = Vec::with_capacity(3 * n3);
        for i in 0..n3 {
            for c in &vals {
                samples.push(c[i].to_f64());
            }
        }
        Snapshot {
            n: v.grid().n,
            components: 3,
            time_index,
            samples,
        }
    }

    pub fn from_sym_tensor<T: Real>(s: &SymTensorField<T>, time_index: Option<u32>) -> Self {
        let vals = s.values();
        let n3 = vals[0].len();
        let mut samples = Vec::with_capacity(6 * n3);
        for i in 0..n3 {
            for c in &vals {
                samples.push(c[i].to_f64());
            }
        }
        Snapshot {
            n: s.grid().n,
            components: 6,
            time_index,
            samples,
        }
    }

    pub fn to_scalar<T: Real>(&self, grid: Grid) -> Result<ScalarField<T>> {
        if self.components != 1 {
            return Err(CoreError::Serde(format!(
                "snapshot holds {} components, expected 1",
                self.components
            )));
        }
        if grid.n != self.n {
            return Err(CoreError::GridMismatch(grid.n, self.n));
        }
        let vals: Vec<T> = self.samples.iter().map(|&v| T::from_f64(v).unwrap()).collect();
        Ok(ScalarField::from_values(grid, &vals))
    }

    pub fn to_vector<T: Real>(&self, grid: Grid) -> Result<VectorField<T>> {
        if self.components != 3 {
            return Err(CoreError::Serde(format!(
                "snapshot holds {} components, expected 3",
                self.components
            )));
        }
        if grid.n != self.n {
            return Err(CoreError::GridMismatch(grid.n, self.n));
        }
        let n3 = self.n * self.n * self.n;
        let mut comps = [vec![T::zero(); n3], vec![T::zero(); n3], vec![T::zero(); n3]];
        for i in 0..n3 {
            for (c, comp) in comps.iter_mut().enumerate() {
                comp[i] = T::from_f64(self.samples[3 * i + c]).unwrap();
            }
        }
        Ok(VectorField::from_values(
            grid,
            [&comps[0], &comps[1], &comps[2]],
        ))
    }
}

/// Serialize a snapshot to a writer.
pub fn write_snapshot<W: Write>(w: &mut W, snap: &Snapshot) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(snap.n as u32).to_le_bytes())?;
    w.write_all(&(snap.components as u32).to_le_bytes())?;
    w.write_all(&snap.time_index.unwrap_or(u32::MAX).to_le_bytes())?;
    let expected = snap.n * snap.n * snap.n * snap.components;
    if snap.samples.len() != expected {
        return Err(CoreError::Serde(format!(
            "snapshot payload has {} samples, expected {expected}",
            snap.samples.len()
        )));
    }
    for v in &snap.samples {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Deserialize a snapshot from a reader.
pub fn read_snapshot<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::Serde("bad magic in field container".into()));
    }
    let mut u = [0u8; 4];
    r.read_exact(&mut u)?;
    let version = u32::from_le_bytes(u);
    if version != VERSION {
        return Err(CoreError::Serde(format!("unsupported version {version}")));
    }
    r.read_exact(&mut u)?;
    let n = u32::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let components = u32::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let ti = u32::from_le_bytes(u);
    let time_index = if ti == u32::MAX { None } else { Some(ti) };
    let count = n * n * n * components;
    let mut samples = vec![0.0f64; count];
    let mut b = [0u8; 8];
    for s in samples.iter_mut() {
        r.read_exact(&mut b)?;
        *s = f64::from_le_bytes(b);
    }
    Ok(Snapshot {
        n,
        components,
        time_index,
        samples,
    })
}

/// Write the 2-D slice `z = iz` of a scalar field as CSV
/// (`x,y,value` per row, header included).
pub fn write_csv_slice_plane<T: Real, W: Write>(
    w: &mut W,
    f: &ScalarField<T>,
    iz: usize,
) -> Result<()> {
    let g = *f.grid();
    let vals = f.values();
    writeln!(w, "x,y,value")?;
    for ix in 0..g.n {
        for iy in 0..g.n {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                g.coord(ix),
                g.coord(iy),
                vals[g.idx(ix, iy, iz)].to_f64()
            )?;
        }
    }
    Ok(())
}

/// Write the 1-D slice `y = iy, z = iz` of a scalar field as CSV.
pub fn write_csv_slice_line<T: Real, W: Write>(
    w: &mut W,
    f: &ScalarField<T>,
    iy: usize,
    iz: usize,
) -> Result<()> {
    let g = *f.grid();
    let vals = f.values();
    writeln!(w, "x,value")?;
    for ix in 0..g.n {
        writeln!(
            w,
            "{:.17e},{:.17e}",
            g.coord(ix),
            vals[g.idx(ix, iy, iz)].to_f64()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_scalar;

    #[test]
    fn snapshot_round_trip() {
        let g = Grid::spatial(8).unwrap();
        let f = random_scalar::<f64>(g, 2, 5);
        let snap = Snapshot::from_scalar(&f, Some(3));
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &snap).unwrap();
        let back = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(snap, back);
        let f2 = back.to_scalar::<f64>(g).unwrap();
        let d = f.sub(&f2).unwrap();
        assert!(d.coeff_linf() < 1e-12);
    }

    #[test]
    fn rejects_garbage() {
        let buf = b"NOPE0000";
        assert!(read_snapshot(&mut buf.as_slice()).is_err());
    }
}
