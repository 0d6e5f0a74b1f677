use std::path::Path;

use super::features::feature_hash;
use super::network::{PolicyNetwork, LAYERS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PCMBNET\0";
pub const FORMAT_VERSION: u32 = 1;

/// Layout: magic, version (u32), feature hash (u64), tag length (u32) and
/// UTF-8 tag, layer count (u32), layer widths (u32 each), then every
/// parameter as f64. All integers and floats are little-endian.
pub fn to_bytes(net: &PolicyNetwork) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + net.params.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&feature_hash().to_le_bytes());
    out.extend_from_slice(&(net.tag.len() as u32).to_le_bytes());
    out.extend_from_slice(net.tag.as_bytes());
    out.extend_from_slice(&(LAYERS.len() as u32).to_le_bytes());
    for d in LAYERS {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for p in &net.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::TruncatedPolicy {
                offset: self.pos,
                needed: n,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<PolicyNetwork> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::MalformedPolicy("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::IncompatiblePolicyVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let hash = r.u64()?;
    if hash != feature_hash() {
        return Err(Error::FeatureHashMismatch {
            found: hash,
            expected: feature_hash(),
        });
    }
    let tag_len = r.u32()? as usize;
    let tag = std::str::from_utf8(r.take(tag_len)?)
        .map_err(|_| Error::MalformedPolicy("tag is not UTF-8".into()))?
        .to_string();
    let n_layers = r.u32()? as usize;
    let dims = (0..n_layers).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    if dims != LAYERS {
        return Err(Error::MalformedPolicy(format!("architecture {dims:?} differs from {LAYERS:?}")));
    }
    let n: usize = (0..3).map(|l| LAYERS[l] * LAYERS[l + 1] + LAYERS[l + 1]).sum();
    let raw = r.take(n * 8)?;
    let params = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if r.pos != buf.len() {
        return Err(Error::MalformedPolicy(format!("{} trailing bytes", buf.len() - r.pos)));
    }
    PolicyNetwork::from_params(params, tag)
}

pub fn save(net: &PolicyNetwork, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(net))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<PolicyNetwork> {
    from_bytes(&std::fs::read(path)?)
}
