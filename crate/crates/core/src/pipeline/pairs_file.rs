//! Binary stream of per-sentence weighted pairs.
//!
//! `DWEP`, version `u32`, vocabulary size `u64`, raw sample count `u64`,
//! pair count `u64`, then `(u32 target, u32 context, f64 weight)` records,
//! all little-endian.

use std::io::{Read, Write};
use std::path::Path;

use crate::context::WeightedPair;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DWEP";
const VERSION: u32 = 1;

pub fn write<W: Write>(
    mut out: W,
    dim: usize,
    samples: u64,
    pairs: impl Iterator<Item = WeightedPair>,
    n_pairs: usize,
) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(dim as u64).to_le_bytes())?;
    out.write_all(&samples.to_le_bytes())?;
    out.write_all(&(n_pairs as u64).to_le_bytes())?;
    let mut written = 0usize;
    for p in pairs {
        out.write_all(&(p.target as u32).to_le_bytes())?;
        out.write_all(&(p.context as u32).to_le_bytes())?;
        out.write_all(&p.weight.to_le_bytes())?;
        written += 1;
    }
    debug_assert_eq!(written, n_pairs);
    out.flush()?;
    Ok(())
}

/// `(dim, samples, pairs)`
pub fn read<R: Read>(mut input: R, origin: &Path) -> Result<(usize, u64, Vec<WeightedPair>)> {
    let mut head = [0u8; 32];
    input
        .read_exact(&mut head)
        .map_err(|_| Error::format(origin, "truncated pair file header"))?;
    if &head[..4] != MAGIC {
        return Err(Error::format(origin, "not a pair file"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(head[i..i + 8].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(Error::format(origin, format!("unsupported version {}", u32_at(4))));
    }
    let dim = u64_at(8) as usize;
    let samples = u64_at(16);
    let n = u64_at(24) as usize;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != n * 16 {
        return Err(Error::format(origin, "pair count does not match file length"));
    }
    let pairs = body
        .chunks_exact(16)
        .map(|c| {
            WeightedPair::new(
                u32::from_le_bytes(c[..4].try_into().unwrap()) as usize,
                u32::from_le_bytes(c[4..8].try_into().unwrap()) as usize,
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((dim, samples, pairs))
}
