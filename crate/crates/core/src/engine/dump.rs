//! Binary dump of full realization grids for offline inspection.
//!
//! Layout: little-endian header `n_z: u64, n_tau: u64, gamma: f64, rho: f64,
//! seed: u64`, then the Stokes grid as row-major (z-major) complex pairs of
//! f64 (x then y component per point), then the vibration grid as complex
//! pairs (three modes per cell).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Vector2, Vector3};

use super::FieldRealization;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Complex;

/// Parsed contents of a grid dump file.
#[derive(Clone, Debug)]
pub struct FieldDump {
    pub n_z: usize,
    pub n_tau: usize,
    pub gamma: f64,
    pub rho: f64,
    pub seed: u64,
    /// (n_z+1)·(n_tau+1) points, z-major.
    pub stokes: Vec<Vector2<Complex<f64>>>,
    /// n_z·(n_tau+1) cells, z-major.
    pub vibrations: Vec<Vector3<Complex<f64>>>,
}

pub fn write_field_dump<T: Scalar>(
    path: &Path,
    field: &FieldRealization<T>,
    gamma: T,
    rho: T,
    seed: u64,
) -> Result<()> {
    let grids = field.grids().ok_or_else(|| {
        Error::config("field realization was produced without stored grids; nothing to dump")
    })?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(field.grid().n_z() as u64).to_le_bytes())?;
    w.write_all(&(field.grid().n_tau() as u64).to_le_bytes())?;
    w.write_all(&gamma.as_f64().to_le_bytes())?;
    w.write_all(&rho.as_f64().to_le_bytes())?;
    w.write_all(&seed.to_le_bytes())?;
    let mut put = |c: Complex<T>| -> std::io::Result<()> {
        w.write_all(&c.re.as_f64().to_le_bytes())?;
        w.write_all(&c.im.as_f64().to_le_bytes())
    };
    for v in &grids.stokes {
        put(v.x)?;
        put(v.y)?;
    }
    for v in &grids.vibrations {
        put(v.x)?;
        put(v.y)?;
        put(v.z)?;
    }
    Ok(())
}

pub fn read_field_dump(path: &Path) -> Result<FieldDump> {
    let mut r = BufReader::new(File::open(path)?);
    let mut buf = [0u8; 8];
    let mut next_u64 = |r: &mut BufReader<File>| -> Result<u64> {
        r.read_exact(&mut buf)
            .map_err(|e| Error::config(format!("truncated dump header: {e}")))?;
        Ok(u64::from_le_bytes(buf))
    };
    let n_z = next_u64(&mut r)? as usize;
    let n_tau = next_u64(&mut r)? as usize;
    let gamma = f64::from_bits(next_u64(&mut r)?);
    let rho = f64::from_bits(next_u64(&mut r)?);
    let seed = next_u64(&mut r)?;
    if n_z == 0 || n_tau == 0 || n_z > 1 << 20 || n_tau > 1 << 20 {
        return Err(Error::config(format!(
            "implausible dump dimensions {n_z}x{n_tau}"
        )));
    }

    let n_points = (n_z + 1) * (n_tau + 1);
    let n_cells = n_z * (n_tau + 1);
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let want = (n_points * 4 + n_cells * 6) * 8;
    if body.len() != want {
        return Err(Error::config(format!(
            "dump body has {} bytes, expected {want}",
            body.len()
        )));
    }
    let mut off = 0usize;
    let mut next_c = |body: &[u8]| -> Complex<f64> {
        let re = f64::from_le_bytes(body[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(body[off + 8..off + 16].try_into().unwrap());
        off += 16;
        Complex::new(re, im)
    };
    let mut stokes = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let x = next_c(&body);
        let y = next_c(&body);
        stokes.push(Vector2::new(x, y));
    }
    let mut vibrations = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let a = next_c(&body);
        let b = next_c(&body);
        let c = next_c(&body);
        vibrations.push(Vector3::new(a, b, c));
    }
    Ok(FieldDump {
        n_z,
        n_tau,
        gamma,
        rho,
        seed,
        stokes,
        vibrations,
    })
}
