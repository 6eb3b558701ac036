//! Binary parameter files: a little-endian `u64` header length, a JSON
//! header, then the raw float64 blocks (little-endian) in header order.

use std::io::{self, Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn write_blocks<W: Write, H: Serialize>(mut sink: W, header: &H, blocks: &[&[f64]]) -> io::Result<()> {
    let json = serde_json::to_vec(header)?;
    sink.write_all(&(json.len() as u64).to_le_bytes())?;
    sink.write_all(&json)?;
    for block in blocks {
        for v in *block {
            sink.write_all(&v.to_le_bytes())?;
        }
    }
    sink.flush()
}

/// Read the header and every remaining float64 value.
pub fn read_blocks<R: Read, H: DeserializeOwned>(mut source: R) -> io::Result<(H, Vec<f64>)> {
    let mut len = [0u8; 8];
    source.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    source.read_exact(&mut json)?;
    let header = serde_json::from_slice(&json)?;
    let mut rest = Vec::new();
    source.read_to_end(&mut rest)?;
    if rest.len() % 8 != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "trailing partial float64"));
    }
    let values = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, values))
}

pub fn invalid(message: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, message.into())
}
