use super::{ArchitectureSpec, Network};
use crate::error::{Error, Result};
use crate::nn::Tensor;
use std::fs;
use std::path::Path;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"FNET";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Serialise a network:
///
/// ```text
/// "FNET" | version: u32 LE | arch text: u32 LE length + UTF-8 bytes
/// | tensor count: u32 LE
/// | per tensor: rank u32 LE, dims u32 LE x rank, samples f32 LE
/// | CRC32 (IEEE) of all preceding bytes: u32 LE
/// ```
pub fn save_checkpoint(network: &Network, path: &Path) -> Result<()> {
    let bytes = encode(network);
    fs::write(path, bytes)?;
    Ok(())
}

fn encode(network: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());

    let arch_text = network.architecture().to_text();
    out.extend_from_slice(&(arch_text.len() as u32).to_le_bytes());
    out.extend_from_slice(arch_text.as_bytes());

    let params = network.parameters();
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for tensor in params {
        out.extend_from_slice(&(tensor.shape().len() as u32).to_le_bytes());
        for &d in tensor.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in tensor.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Load and verify a checkpoint. Wrong magic is a format error, an unknown
/// version a version error, and any truncation or checksum mismatch a
/// corruption error.
pub fn load_checkpoint(path: &Path) -> Result<Network> {
    let bytes = fs::read(path)?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<Network> {
    if bytes.len() < 4 {
        return Err(Error::Corrupted("file shorter than the magic".into()));
    }
    if bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    if bytes.len() < 12 {
        return Err(Error::Corrupted("truncated header".into()));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(trailer.try_into().unwrap());
    if crc32fast::hash(body) != stored_crc {
        return Err(Error::Corrupted("CRC32 mismatch".into()));
    }

    let mut pos = 4usize;
    let version = read_u32(body, &mut pos)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version(version));
    }

    let arch_len = read_u32(body, &mut pos)? as usize;
    let arch_bytes = body
        .get(pos..pos + arch_len)
        .ok_or_else(|| Error::Corrupted("truncated architecture block".into()))?;
    pos += arch_len;
    let arch_text = std::str::from_utf8(arch_bytes)
        .map_err(|_| Error::Format("architecture block is not UTF-8".into()))?;
    let arch = ArchitectureSpec::from_text(arch_text)?;

    let tensor_count = read_u32(body, &mut pos)? as usize;
    let mut tensors = Vec::with_capacity(tensor_count);
    for _ in 0..tensor_count {
        let rank = read_u32(body, &mut pos)? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_u32(body, &mut pos)? as usize);
        }
        let n: usize = shape.iter().product();
        let raw = body
            .get(pos..pos + n * 4)
            .ok_or_else(|| Error::Corrupted("truncated tensor data".into()))?;
        pos += n * 4;
        let data: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(Tensor::from_vec(&shape, data)?);
    }
    if pos != body.len() {
        return Err(Error::Corrupted(format!(
            "{} unexpected trailing bytes",
            body.len() - pos
        )));
    }

    // Materialise the network, then overwrite the freshly-initialised
    // parameters with the stored tensors.
    let mut network = Network::build(arch, 0)?;
    {
        let mut params = network.parameters_mut();
        if params.len() != tensors.len() {
            return Err(Error::Corrupted(format!(
                "checkpoint stores {} tensors but the architecture has {} parameter slots",
                tensors.len(),
                params.len()
            )));
        }
        for (slot, stored) in params.iter_mut().zip(tensors) {
            if slot.shape() != stored.shape() {
                return Err(Error::Corrupted(format!(
                    "stored tensor shape {:?} does not match architecture slot {:?}",
                    stored.shape(),
                    slot.shape()
                )));
            }
            **slot = stored;
        }
    }
    Ok(network)
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    let raw = bytes
        .get(*pos..*pos + 4)
        .ok_or_else(|| Error::Corrupted("unexpected end of file".into()))?;
    *pos += 4;
    Ok(u32::from_le_bytes(raw.try_into().unwrap()))
}
