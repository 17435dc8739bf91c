//! Deterministic binary state snapshots.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HMHD"
//! 4       4     u32 format version (1)
//! 8       4     u32 dim (2 or 3)
//! 12      4     u32 n (points per dimension)
//! 16      4     u32 system tag (ASCII 'A'..'D')
//! 20      4     u32 band limit of u (u32::MAX when unlimited)
//! 24      4     u32 band limit of b
//! 28      4     u32 reserved (0)
//! 32      8     f64 time t
//! 40      32    f64 nu, eta_h, eta_v, epsilon
//! 72      ...   payload: components u1,u2,u3,b1,b2,b3; for each, every
//!               spectral coefficient in storage order as (re, im) f64
//! ```
//!
//! Storage order is the grid's flat order: index `i3` fastest, then `i2`,
//! then `i1`; the wavenumber of index `i` on an axis of length `m` is `i`
//! for `i < m/2` and `i - m` otherwise. A write/read round trip is
//! bit-exact.

use anyhow::{bail, Context, Result};
use hallmhd::{FieldKind, Grid, ScalarField, State, SystemKind, SystemSpec, VectorField};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"HMHD";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 72;

#[derive(Debug)]
pub struct Snapshot {
    pub state: State,
    pub spec: SystemSpec,
}

fn band_limit_word(v: &VectorField) -> u32 {
    match v.band_limit() {
        Some(k) => k as u32,
        None => u32::MAX,
    }
}

pub fn write(path: &Path, state: &State, spec: &SystemSpec) -> Result<()> {
    let grid = state.grid();
    let mut buf: Vec<u8> = Vec::with_capacity(HEADER_LEN + 6 * grid.len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(spec.kind.tag().as_bytes()[0] as u32).to_le_bytes());
    buf.extend_from_slice(&band_limit_word(&state.u).to_le_bytes());
    buf.extend_from_slice(&band_limit_word(&state.b).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    for p in [spec.nu, spec.eta_h, spec.eta_v, spec.epsilon] {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    for field in [&state.u, &state.b] {
        for c in 0..3 {
            for z in field.component(c).coeffs() {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating snapshot {}", path.display()))?;
    file.write_all(&buf)?;
    Ok(())
}

fn read_u32(buf: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(buf[at..at + 4].try_into().unwrap())
}

fn read_f64(buf: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(buf[at..at + 8].try_into().unwrap())
}

pub fn read(path: &Path) -> Result<Snapshot> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .with_context(|| format!("opening snapshot {}", path.display()))?
        .read_to_end(&mut buf)?;
    if buf.len() < HEADER_LEN {
        bail!("snapshot too short: {} bytes", buf.len());
    }
    if &buf[0..4] != MAGIC {
        bail!("bad snapshot magic");
    }
    let version = read_u32(&buf, 4);
    if version != VERSION {
        bail!("unsupported snapshot version {version} (expected {VERSION})");
    }
    let dim = read_u32(&buf, 8) as usize;
    let n = read_u32(&buf, 12) as usize;
    let tag = char::from_u32(read_u32(&buf, 16)).unwrap_or('?').to_string();
    let bl_u = read_u32(&buf, 20);
    let bl_b = read_u32(&buf, 24);
    let t = read_f64(&buf, 32);
    let nu = read_f64(&buf, 40);
    let eta_h = read_f64(&buf, 48);
    let eta_v = read_f64(&buf, 56);
    let epsilon = read_f64(&buf, 64);

    let grid = Grid::new(dim, n)?;
    let expected = HEADER_LEN + 6 * grid.len() * 16;
    if buf.len() != expected {
        bail!(
            "snapshot payload size mismatch: {} bytes, expected {expected}",
            buf.len()
        );
    }
    let kind = SystemKind::from_tag(&tag)?;
    let spec = match kind {
        SystemKind::ClassicalHall2p5d => SystemSpec::classical(nu, eta_h, epsilon)?,
        SystemKind::HyperResistive2p5d => SystemSpec::hyper_resistive(nu, eta_h, epsilon)?,
        SystemKind::AnisoHyper2p5d => SystemSpec::aniso_2p5d(nu, eta_h, eta_v, epsilon)?,
        SystemKind::AnisoHyper3d => SystemSpec::aniso_3d(nu, eta_h, eta_v, epsilon)?,
    };

    let word_to_limit = |w: u32| if w == u32::MAX { None } else { Some(w as usize) };
    let mut at = HEADER_LEN;
    let mut read_field = |limit: Option<usize>, kind: FieldKind| -> Result<VectorField> {
        let mut comps = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut coeffs = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                let re = read_f64(&buf, at);
                let im = read_f64(&buf, at + 8);
                at += 16;
                coeffs.push(Complex64::new(re, im));
            }
            comps.push(ScalarField::from_coefficients(&grid, coeffs, limit)?);
        }
        let mut it = comps.into_iter();
        Ok(VectorField::new(
            [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
            kind,
        )?)
    };
    let u = read_field(word_to_limit(bl_u), FieldKind::Velocity)?;
    let b = read_field(word_to_limit(bl_b), FieldKind::Magnetic)?;
    Ok(Snapshot {
        state: State::new(u, b, t)?,
        spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hallmhd::random_solenoidal;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.snap");
        let grid = Grid::new(2, 16).unwrap();
        let u = random_solenoidal(&grid, 5, 3, FieldKind::Velocity).unwrap();
        let b = random_solenoidal(&grid, 5, 4, FieldKind::Magnetic).unwrap();
        let state = State::new(u, b, 0.625).unwrap();
        let spec = SystemSpec::aniso_2p5d(1.0, 0.5, 0.25, 2.0).unwrap();
        write(&path, &state, &spec).unwrap();
        let snap = read(&path).unwrap();
        assert_eq!(snap.state.t.to_bits(), state.t.to_bits());
        assert_eq!(snap.spec, spec);
        assert_eq!(snap.state.u.band_limit(), Some(5));
        for f in 0..2 {
            let (a, b) = if f == 0 {
                (&snap.state.u, &state.u)
            } else {
                (&snap.state.b, &state.b)
            };
            for c in 0..3 {
                for (x, y) in a.component(c).coeffs().iter().zip(b.component(c).coeffs()) {
                    assert_eq!(x.re.to_bits(), y.re.to_bits());
                    assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn truncated_and_corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.snap");
        let grid = Grid::new(2, 8).unwrap();
        let state = State::new(
            VectorField::zeros(&grid, FieldKind::Velocity),
            VectorField::zeros(&grid, FieldKind::Magnetic),
            0.0,
        )
        .unwrap();
        let spec = SystemSpec::classical(1.0, 1.0, 1.0).unwrap();
        write(&path, &state, &spec).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        // truncated payload
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(read(&path).unwrap_err().to_string().contains("size mismatch"));

        // bad magic
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(read(&path).unwrap_err().to_string().contains("magic"));

        // unsupported version
        let mut badv = bytes;
        badv[4] = 9;
        std::fs::write(&path, &badv).unwrap();
        assert!(read(&path).unwrap_err().to_string().contains("version"));
    }
}
