//! Ensemble files.
//!
//! CSV: header `realization,slot,interference`, one row per sample.
//!
//! Binary, all integers and floats little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "ICORENS\0"
//! 8       4     format version (u32, currently 1)
//! 12      8     n_realizations (u64)
//! 20      8     n_slots (u64)
//! 28      8·n   interference samples (f64), realization-major
//! ```

use std::io::{Read, Write};

use super::{SimEnsemble, SimError};

pub const BINARY_MAGIC: [u8; 8] = *b"ICORENS\0";
pub const BINARY_VERSION: u32 = 1;

pub fn write_csv<W: Write>(ensemble: &SimEnsemble, writer: W) -> Result<(), SimError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["realization", "slot", "interference"])?;
    for r in 0..ensemble.n_realizations() {
        for (t, value) in ensemble.row(r).iter().enumerate() {
            csv.write_record([r.to_string(), t.to_string(), value.to_string()])?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(ensemble: &SimEnsemble, mut writer: W) -> Result<(), SimError> {
    writer.write_all(&BINARY_MAGIC)?;
    writer.write_all(&BINARY_VERSION.to_le_bytes())?;
    writer.write_all(&(ensemble.n_realizations() as u64).to_le_bytes())?;
    writer.write_all(&(ensemble.n_slots() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * ensemble.series().len());
    for v in ensemble.series() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    writer.write_all(&buf)?;
    writer.flush()?;
    Ok(())
}

/// Reads a binary ensemble file; returns `(n_realizations, n_slots, series)`.
pub fn read_binary<R: Read>(mut reader: R) -> Result<(usize, usize, Vec<f64>), SimError> {
    let mut magic = [0u8; 8];
    reader.read_exact(&mut magic)?;
    if magic != BINARY_MAGIC {
        return Err(SimError::Format("bad magic".into()));
    }
    let mut word = [0u8; 4];
    reader.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != BINARY_VERSION {
        return Err(SimError::Format(format!("unsupported version {version}")));
    }
    let mut dword = [0u8; 8];
    reader.read_exact(&mut dword)?;
    let n_realizations = u64::from_le_bytes(dword) as usize;
    reader.read_exact(&mut dword)?;
    let n_slots = u64::from_le_bytes(dword) as usize;
    let count = n_realizations
        .checked_mul(n_slots)
        .ok_or_else(|| SimError::Format("dimensions overflow".into()))?;

    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * count {
        return Err(SimError::Format(format!(
            "expected {} data bytes, found {}",
            8 * count,
            bytes.len()
        )));
    }
    let series = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((n_realizations, n_slots, series))
}
