//! Binary snapshot files for fields and gauges.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      4 bytes  b"NLH1"
//! components u32      1 = scalar cochain, 3 = so(3) cochain, 4 = gauge quaternions
//! n          u32      dimension
//! q          u32      form degree (0 for gauge fields)
//! extents    n × (f64 lo, f64 hi)
//! resolution n × u32
//! count      u64      number of f64 values that follow (= components · cells)
//! values     count × f64
//! ```
//!
//! Values are stored in canonical cell order: spanned-axis blocks by
//! ascending bitmask (bit i = axis i), row-major within a block with the
//! last axis varying fastest; the `components` values of one cell are
//! contiguous (for gauges: w, x, y, z per node). Two implementations that
//! honor this layout interoperate bit-exactly for f64 coefficients.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::complex::CubicalComplex;
use crate::error::{HodgeError, Result};
use crate::forms::FormField;
use crate::gauge::{GaugeField, LieFormField};
use crate::real::Real;
use crate::so3::Quat;

const MAGIC: &[u8; 4] = b"NLH1";

struct Header {
    components: u32,
    n: usize,
    q: usize,
    extents: Vec<(f64, f64)>,
    resolution: Vec<usize>,
    count: u64,
}

fn write_header<W: Write>(
    w: &mut W,
    components: u32,
    n: usize,
    q: usize,
    extents: &[(f64, f64)],
    resolution: &[usize],
    count: u64,
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&components.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(q as u32).to_le_bytes())?;
    for &(a, b) in extents {
        w.write_all(&a.to_le_bytes())?;
        w.write_all(&b.to_le_bytes())?;
    }
    for &r in resolution {
        w.write_all(&(r as u32).to_le_bytes())?;
    }
    w.write_all(&count.to_le_bytes())?;
    Ok(())
}

fn read_exact_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let magic = read_exact_array::<_, 4>(r)?;
    if &magic != MAGIC {
        return Err(HodgeError::Snapshot {
            what: "bad magic bytes".into(),
        });
    }
    let components = u32::from_le_bytes(read_exact_array::<_, 4>(r)?);
    let n = u32::from_le_bytes(read_exact_array::<_, 4>(r)?) as usize;
    let q = u32::from_le_bytes(read_exact_array::<_, 4>(r)?) as usize;
    if n == 0 || n > crate::complex::MAX_DIM || q > n {
        return Err(HodgeError::Snapshot {
            what: format!("implausible header: n = {n}, q = {q}"),
        });
    }
    let mut extents = Vec::with_capacity(n);
    for _ in 0..n {
        let a = f64::from_le_bytes(read_exact_array::<_, 8>(r)?);
        let b = f64::from_le_bytes(read_exact_array::<_, 8>(r)?);
        extents.push((a, b));
    }
    let mut resolution = Vec::with_capacity(n);
    for _ in 0..n {
        resolution.push(u32::from_le_bytes(read_exact_array::<_, 4>(r)?) as usize);
    }
    let count = u64::from_le_bytes(read_exact_array::<_, 8>(r)?);
    Ok(Header {
        components,
        n,
        q,
        extents,
        resolution,
        count,
    })
}

fn complex_from_header<T: Real>(h: &Header) -> Result<Arc<CubicalComplex<T>>> {
    if h.extents.len() != h.n || h.resolution.len() != h.n {
        return Err(HodgeError::Snapshot {
            what: "header axis counts are inconsistent".into(),
        });
    }
    let extents: Vec<(T, T)> = h
        .extents
        .iter()
        .map(|&(a, b)| (T::from_f64_lossy(a), T::from_f64_lossy(b)))
        .collect();
    Ok(Arc::new(CubicalComplex::new(&extents, &h.resolution)?))
}

fn write_values<T: Real, W: Write>(w: &mut W, it: impl Iterator<Item = T>) -> Result<()> {
    for v in it {
        w.write_all(&v.to_f64().to_le_bytes())?;
    }
    Ok(())
}

fn read_values<T: Real, R: Read>(r: &mut R, count: usize) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(T::from_f64_lossy(f64::from_le_bytes(read_exact_array::<_, 8>(r)?)));
    }
    Ok(out)
}

pub fn write_form<T: Real, W: Write>(w: &mut W, f: &FormField<T>) -> Result<()> {
    let cx = f.complex();
    let extents: Vec<(f64, f64)> = cx
        .extents()
        .iter()
        .map(|&(a, b)| (a.to_f64(), b.to_f64()))
        .collect();
    write_header(
        w,
        1,
        cx.dim(),
        f.degree(),
        &extents,
        cx.resolution(),
        f.coeffs().len() as u64,
    )?;
    write_values(w, f.coeffs().iter().copied())
}

pub fn read_form<T: Real, R: Read>(r: &mut R) -> Result<FormField<T>> {
    let h = read_header(r)?;
    if h.components != 1 {
        return Err(HodgeError::Snapshot {
            what: format!("expected a scalar cochain, found {} components", h.components),
        });
    }
    let cx = complex_from_header::<T>(&h)?;
    let expect = cx.num_cells(h.q);
    if h.count != expect as u64 {
        return Err(HodgeError::Snapshot {
            what: format!("value count {} != {} cells", h.count, expect),
        });
    }
    let coeffs = read_values::<T, _>(r, expect)?;
    FormField::from_coeffs(&cx, h.q, coeffs)
}

pub fn write_lie_form<T: Real, W: Write>(w: &mut W, f: &LieFormField<T>) -> Result<()> {
    let cx = f.complex();
    let extents: Vec<(f64, f64)> = cx
        .extents()
        .iter()
        .map(|&(a, b)| (a.to_f64(), b.to_f64()))
        .collect();
    write_header(
        w,
        3,
        cx.dim(),
        f.degree(),
        &extents,
        cx.resolution(),
        3 * f.coeffs().len() as u64,
    )?;
    write_values(w, f.coeffs().iter().flat_map(|v| v.iter().copied()))
}

pub fn read_lie_form<T: Real, R: Read>(r: &mut R) -> Result<LieFormField<T>> {
    let h = read_header(r)?;
    if h.components != 3 {
        return Err(HodgeError::Snapshot {
            what: format!("expected an so(3) cochain, found {} components", h.components),
        });
    }
    let cx = complex_from_header::<T>(&h)?;
    let cells = cx.num_cells(h.q);
    if h.count != 3 * cells as u64 {
        return Err(HodgeError::Snapshot {
            what: format!("value count {} != 3·{} cells", h.count, cells),
        });
    }
    let flat = read_values::<T, _>(r, 3 * cells)?;
    let coeffs = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    LieFormField::from_coeffs(&cx, h.q, coeffs)
}

/// Gauge fields are stored as unit quaternions per node so that reloaded
/// rotations are valid after renormalization.
pub fn write_gauge<T: Real, W: Write>(w: &mut W, g: &GaugeField<T>) -> Result<()> {
    let cx = g.complex();
    let extents: Vec<(f64, f64)> = cx
        .extents()
        .iter()
        .map(|&(a, b)| (a.to_f64(), b.to_f64()))
        .collect();
    write_header(
        w,
        4,
        cx.dim(),
        0,
        &extents,
        cx.resolution(),
        4 * g.quats().len() as u64,
    )?;
    write_values(
        w,
        g.quats().iter().flat_map(|q| [q.w, q.x, q.y, q.z].into_iter()),
    )
}

pub fn read_gauge<T: Real, R: Read>(r: &mut R) -> Result<GaugeField<T>> {
    let h = read_header(r)?;
    if h.components != 4 {
        return Err(HodgeError::Snapshot {
            what: format!("expected a gauge field, found {} components", h.components),
        });
    }
    let cx = complex_from_header::<T>(&h)?;
    let nodes = cx.num_nodes();
    if h.count != 4 * nodes as u64 {
        return Err(HodgeError::Snapshot {
            what: format!("value count {} != 4·{} nodes", h.count, nodes),
        });
    }
    let flat = read_values::<T, _>(r, 4 * nodes)?;
    let quats = flat
        .chunks_exact(4)
        .map(|c| Quat::new(c[0], c[1], c[2], c[3]))
        .collect();
    GaugeField::from_quats(&cx, quats)
}

pub fn save_form<T: Real>(path: &Path, f: &FormField<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_form(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load_form<T: Real>(path: &Path) -> Result<FormField<T>> {
    read_form(&mut BufReader::new(File::open(path)?))
}

pub fn save_lie_form<T: Real>(path: &Path, f: &LieFormField<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_lie_form(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load_lie_form<T: Real>(path: &Path) -> Result<LieFormField<T>> {
    read_lie_form(&mut BufReader::new(File::open(path)?))
}

pub fn save_gauge<T: Real>(path: &Path, g: &GaugeField<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_gauge(&mut w, g)?;
    w.flush()?;
    Ok(())
}

pub fn load_gauge<T: Real>(path: &Path) -> Result<GaugeField<T>> {
    read_gauge(&mut BufReader::new(File::open(path)?))
}
