//! Binary field dumps and loads.
//!
//! ```no_run
//! use bqlab_core::{grid::TorusGrid, io, SpectralField};
//! let grid = TorusGrid::new(2, 64)?;
//! let f = SpectralField::zeros(grid, 1);
//! io::save_field("theta.bqfld", &f, 0.5)?;
//! let (back, time) = io::load_field("theta.bqfld")?;
//! # Ok::<(), bqlab_core::Error>(())
//! ```
//!
//! Layout, all little-endian: magic `BQFLD1` (6 bytes), then u32 dim, u32
//! n_per_axis, u32 components, f64 time, then per component the complex
//! coefficients as (re, im) f64 pairs in row-major frequency order. The
//! payload is the spectral representation, so a round trip is bitwise.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;

/// File magic identifying a field dump.
pub const MAGIC: &[u8; 6] = b"BQFLD1";

/// Writes one field plus its timestamp to a stream.
pub fn write_field<W: Write>(w: &mut W, f: &SpectralField, time: f64) -> Result<()> {
    if !time.is_finite() {
        return Err(Error::Argument("dump time must be finite".into()));
    }
    let grid = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&(f.ncomp() as u32).to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for c in 0..f.ncomp() {
        for z in f.component(c) {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads one field plus its timestamp from a stream; strict about the
/// header and the payload length.
pub fn read_field<R: Read>(r: &mut R) -> Result<(SpectralField, f64)> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config("not a BQFLD1 field dump".into()));
    }
    let dim = read_u32(r)?;
    let n = read_u32(r)?;
    let ncomp = read_u32(r)?;
    let time = read_f64(r)?;
    if !time.is_finite() {
        return Err(Error::Config("field dump carries a non-finite time".into()));
    }
    if ncomp == 0 || ncomp > 16 {
        return Err(Error::Config(format!(
            "component count {ncomp} outside the supported 1..=16"
        )));
    }
    let grid = TorusGrid::new(dim as usize, n as usize)?;
    let mut f = SpectralField::zeros(grid, ncomp as usize);
    let mut buf = [0u8; 16];
    for c in 0..ncomp as usize {
        for z in f.component_mut(c) {
            r.read_exact(&mut buf)?;
            *z = Complex64::new(
                f64::from_le_bytes(buf[..8].try_into().unwrap()),
                f64::from_le_bytes(buf[8..].try_into().unwrap()),
            );
        }
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Config("trailing bytes after the field payload".into()));
    }
    Ok((f, time))
}

/// Writes a field dump to a file path.
pub fn save_field<P: AsRef<Path>>(path: P, f: &SpectralField, time: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, f, time)?;
    w.flush()?;
    Ok(())
}

/// Reads a field dump from a file path.
pub fn load_field<P: AsRef<Path>>(path: P) -> Result<(SpectralField, f64)> {
    read_field(&mut BufReader::new(File::open(path)?))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randfield;
    use proptest::prelude::*;

    fn roundtrip(f: &SpectralField, time: f64) -> (SpectralField, f64) {
        let mut bytes = Vec::new();
        write_field(&mut bytes, f, time).unwrap();
        read_field(&mut &bytes[..]).unwrap()
    }

    #[test]
    fn a_dump_round_trips_bitwise() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = randfield::velocity(grid, 1, 5, 1.0, 0.7, 99);
        let (back, time) = roundtrip(&f, 1.25);
        assert_eq!(time, 1.25);
        assert_eq!(back.grid(), grid);
        assert_eq!(back.ncomp(), f.ncomp());
        for c in 0..f.ncomp() {
            for (a, b) in f.component(c).iter().zip(back.component(c)) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn corrupt_streams_are_rejected() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = SpectralField::zeros(grid, 1);
        let mut bytes = Vec::new();
        write_field(&mut bytes, &f, 0.0).unwrap();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(read_field(&mut &bad_magic[..]), Err(Error::Config(_))));

        let truncated = &bytes[..bytes.len() - 3];
        assert!(matches!(read_field(&mut &truncated[..]), Err(Error::Io(_))));

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(read_field(&mut &trailing[..]), Err(Error::Config(_))));

        let mut bad_n = bytes;
        bad_n[10..14].copy_from_slice(&100u32.to_le_bytes());
        let err = read_field(&mut &bad_n[..]).unwrap_err();
        assert!(err.to_string().contains("power of two"), "got: {err}");
    }

    #[test]
    fn files_round_trip_through_disk() {
        let grid = TorusGrid::new(3, 16).unwrap();
        let f = randfield::scalar(grid, 1, 4, 2.0, 0.3, 5);
        let path = std::env::temp_dir().join(format!("bqfld_test_{}.bqfld", std::process::id()));
        save_field(&path, &f, 2.0).unwrap();
        let (back, time) = load_field(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(time, 2.0);
        assert_eq!(back.component(0), f.component(0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn random_fields_round_trip(seed in 0u64..1000, ncomp in 1usize..4, t in -10.0f64..10.0) {
            let grid = TorusGrid::new(2, 16).unwrap();
            let mut f = SpectralField::zeros(grid, ncomp);
            for c in 0..ncomp {
                let s = randfield::scalar(grid, 1, 5, 0.5, 1.0, seed + c as u64);
                f.component_mut(c).copy_from_slice(s.component(0));
            }
            let (back, time) = roundtrip(&f, t);
            prop_assert_eq!(time, t);
            for c in 0..ncomp {
                prop_assert_eq!(back.component(c), f.component(c));
            }
        }
    }
}
