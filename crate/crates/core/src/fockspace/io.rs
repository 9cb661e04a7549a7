//! State-vector files.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "FOCKVEC1"
//! 8       1     statistics (0 = fermion, 1 = boson)
//! 9       8     N   (u64)
//! 17      8     M   (u64)
//! 25      8     N_conf (u64)
//! 33      16·N_conf  interleaved re, im (f64)
//! ```
//!
//! The JSON form carries the same fields and is lossless for finite values.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Space, StateVector, Statistics};
use crate::error::{Error, Result};

pub const VECTOR_MAGIC: &[u8; 8] = b"FOCKVEC1";
pub const VECTOR_JSON_FORMAT: &str = "fockvec/1";

pub(crate) fn statistics_byte(s: Statistics) -> u8 {
    match s {
        Statistics::Fermion => 0,
        Statistics::Boson => 1,
    }
}

pub(crate) fn statistics_from_byte(b: u8) -> Result<Statistics> {
    match b {
        0 => Ok(Statistics::Fermion),
        1 => Ok(Statistics::Boson),
        other => Err(Error::Format(format!("unknown statistics byte {other}"))),
    }
}

pub(crate) fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub(crate) fn write_amplitudes(w: &mut impl Write, amps: &[Complex64]) -> Result<()> {
    for c in amps {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_amplitudes(r: &mut impl Read, len: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(len);
    let mut buf = [0u8; 16];
    for _ in 0..len {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        out.push(Complex64::new(re, im));
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Format("trailing bytes after amplitudes".into()));
    }
    Ok(out)
}

pub fn write_vector(w: &mut impl Write, v: &StateVector) -> Result<()> {
    let s = v.space();
    w.write_all(VECTOR_MAGIC)?;
    w.write_all(&[statistics_byte(s.statistics())])?;
    write_u64(w, s.particles() as u64)?;
    write_u64(w, s.orbitals() as u64)?;
    write_u64(w, s.dim() as u64)?;
    write_amplitudes(w, v.amplitudes())
}

pub fn read_vector(r: &mut impl Read) -> Result<StateVector> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != VECTOR_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected FOCKVEC1",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut stat = [0u8; 1];
    r.read_exact(&mut stat)?;
    let statistics = statistics_from_byte(stat[0])?;
    let n = read_u64(r)? as usize;
    let m = read_u64(r)? as usize;
    let dim = read_u64(r)?;
    let space = Space::new(statistics, n, m)?;
    if dim != space.dim() as u64 {
        return Err(Error::Format(format!(
            "header claims {dim} configurations, {space} has {}",
            space.dim()
        )));
    }
    let amps = read_amplitudes(r, space.dim())?;
    StateVector::from_amplitudes(&space, amps)
}

/// Text form of a state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub format: String,
    pub statistics: Statistics,
    pub particles: usize,
    pub orbitals: usize,
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&StateVector> for VectorJson {
    fn from(v: &StateVector) -> Self {
        let s = v.space();
        Self {
            format: VECTOR_JSON_FORMAT.into(),
            statistics: s.statistics(),
            particles: s.particles(),
            orbitals: s.orbitals(),
            dim: s.dim(),
            re: v.amplitudes().iter().map(|c| c.re).collect(),
            im: v.amplitudes().iter().map(|c| c.im).collect(),
        }
    }
}

impl VectorJson {
    pub fn into_state(self) -> Result<StateVector> {
        if self.format != VECTOR_JSON_FORMAT {
            return Err(Error::Format(format!(
                "unsupported format {:?}",
                self.format
            )));
        }
        let space = Space::new(self.statistics, self.particles, self.orbitals)?;
        if self.dim != space.dim() || self.re.len() != self.dim || self.im.len() != self.dim {
            return Err(Error::Format(
                "amplitude count does not match the space".into(),
            ));
        }
        let amps = self
            .re
            .into_iter()
            .zip(self.im)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        StateVector::from_amplitudes(&space, amps)
    }
}

impl StateVector {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&VectorJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: VectorJson =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        parsed.into_state()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(33 + 16 * self.len());
        write_vector(&mut buf, self).expect("writing to memory");
        buf
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        read_vector(&mut bytes)
    }
}
