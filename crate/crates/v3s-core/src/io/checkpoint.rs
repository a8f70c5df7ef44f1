//! Probe checkpoints: model parameters plus the context needed to use them.
//!
//! A parameter blob alone is a trap — scoring clips pooled with different
//! bin counts, or labeled under a different catalog, would produce garbage
//! that *looks* like predictions. A checkpoint therefore stores the pooling
//! configuration and the catalog hash next to the weights, and loading
//! checks them against the run before any number is trusted.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "V3SK" | version u32
//! input_dim u32 | hidden_dim u32 | n_spatial u32 | n_temporal u32
//! time_bins u32 | height_bins u32 | width_bins u32
//! hash_len u32 | catalog hash (ASCII)
//! trunk_w | trunk_b | head_s_w | head_s_b | head_t_w | head_t_b   (f64 each)
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::pretext::TaskCatalog;
use crate::probe::{PoolConfig, ProbeModel};

use super::{atomic_write, read_bytes};

/// First four bytes of every checkpoint file.
pub const CHECKPOINT_MAGIC: [u8; 4] = *b"V3SK";
/// Current format version.
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained probe with its pooling setup and catalog identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ProbeModel,
    pub pool: PoolConfig,
    pub catalog_hash: String,
}

impl Checkpoint {
    /// Fails loudly unless `catalog` is the one the probe was trained on.
    pub fn require_catalog(&self, catalog: &TaskCatalog) -> Result<()> {
        let hash = catalog.hash();
        if hash != self.catalog_hash {
            return Err(Error::Checkpoint(format!(
                "catalog mismatch: checkpoint was trained on {} but the run uses {}",
                self.catalog_hash, hash
            )));
        }
        if self.model.n_spatial != catalog.n_spatial()
            || self.model.n_temporal != catalog.n_temporal()
        {
            return Err(Error::Checkpoint(format!(
                "head sizes {}x{} do not match the catalog's {}x{} classes",
                self.model.n_spatial,
                self.model.n_temporal,
                catalog.n_spatial(),
                catalog.n_temporal()
            )));
        }
        Ok(())
    }
}

/// Serializes a checkpoint. Non-finite parameters are rejected: a NaN
/// checkpoint cannot make predictions, so the producing run must fail.
pub fn checkpoint_to_bytes(ck: &Checkpoint) -> Result<Vec<u8>> {
    let m = &ck.model;
    let dims = [m.input_dim, m.hidden_dim, m.n_spatial, m.n_temporal];
    let bins = [ck.pool.time_bins, ck.pool.height_bins, ck.pool.width_bins];
    for d in dims.iter().chain(&bins) {
        if *d > u32::MAX as usize {
            return Err(Error::Checkpoint(format!("dimension {d} exceeds the format limit")));
        }
    }
    if !ck.catalog_hash.is_ascii() {
        return Err(Error::Checkpoint("catalog hash must be ASCII".into()));
    }

    let arrays = param_arrays(m);
    expect_lengths(m, &arrays)?;

    let n_params: usize = arrays.iter().map(|a| a.len()).sum();
    let mut out =
        Vec::with_capacity(4 + 4 + 8 * 4 + ck.catalog_hash.len() + n_params * 8);
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for d in dims.iter().chain(&bins) {
        out.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(ck.catalog_hash.len() as u32).to_le_bytes());
    out.extend_from_slice(ck.catalog_hash.as_bytes());
    for a in arrays {
        for &v in a {
            if !v.is_finite() {
                return Err(Error::Checkpoint(format!("non-finite parameter {v}")));
            }
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses a checkpoint, validating layout, lengths, and finiteness.
pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, offset: 0 };
    let magic = r.take(4)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            expected: CHECKPOINT_MAGIC,
            found: magic.try_into().expect("sliced four bytes"),
        });
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let input_dim = r.u32()? as usize;
    let hidden_dim = r.u32()? as usize;
    let n_spatial = r.u32()? as usize;
    let n_temporal = r.u32()? as usize;
    let pool = PoolConfig {
        time_bins: r.u32()? as usize,
        height_bins: r.u32()? as usize,
        width_bins: r.u32()? as usize,
    };
    let hash_len = r.u32()? as usize;
    let hash_bytes = r.take(hash_len)?;
    let catalog_hash = std::str::from_utf8(hash_bytes)
        .ok()
        .filter(|s| s.is_ascii())
        .ok_or_else(|| Error::Checkpoint("catalog hash is not ASCII".into()))?
        .to_string();

    let mut model = ProbeModel::zeros(input_dim, hidden_dim, n_spatial, n_temporal);
    let lens: Vec<usize> = param_arrays(&model).iter().map(|a| a.len()).collect();
    let expected_total = (r.offset + lens.iter().sum::<usize>() * 8) as u64;
    if (bytes.len() as u64) < expected_total {
        return Err(Error::TruncatedFile { expected: expected_total, actual: bytes.len() as u64 });
    }
    if (bytes.len() as u64) > expected_total {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the parameter block",
            bytes.len() as u64 - expected_total
        )));
    }
    for (array, len) in param_arrays_mut(&mut model).into_iter().zip(lens) {
        for slot in array.iter_mut().take(len) {
            let v = r.f64()?;
            if !v.is_finite() {
                return Err(Error::Checkpoint(format!("non-finite parameter {v}")));
            }
            *slot = v;
        }
    }
    Ok(Checkpoint { model, pool, catalog_hash })
}

/// Writes a checkpoint to `path` atomically.
pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    atomic_write(path, &checkpoint_to_bytes(ck)?)
}

/// Reads and validates a checkpoint from `path`.
pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    checkpoint_from_bytes(&read_bytes(path)?)
}

/// The six parameter arrays in serialization order.
fn param_arrays(m: &ProbeModel) -> [&[f64]; 6] {
    [&m.trunk_w, &m.trunk_b, &m.head_s_w, &m.head_s_b, &m.head_t_w, &m.head_t_b]
}

fn param_arrays_mut(m: &mut ProbeModel) -> [&mut [f64]; 6] {
    [
        &mut m.trunk_w,
        &mut m.trunk_b,
        &mut m.head_s_w,
        &mut m.head_s_b,
        &mut m.head_t_w,
        &mut m.head_t_b,
    ]
}

fn expect_lengths(m: &ProbeModel, arrays: &[&[f64]; 6]) -> Result<()> {
    let expected = [
        m.hidden_dim * m.input_dim,
        m.hidden_dim,
        m.n_spatial * m.hidden_dim,
        m.n_spatial,
        m.n_temporal * m.hidden_dim,
        m.n_temporal,
    ];
    for (a, e) in arrays.iter().zip(expected) {
        if a.len() != e {
            return Err(Error::Checkpoint(format!(
                "parameter array has length {} where dims require {e}",
                a.len()
            )));
        }
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.offset + n > self.bytes.len() {
            return Err(Error::TruncatedFile {
                expected: (self.offset + n) as u64,
                actual: self.bytes.len() as u64,
            });
        }
        let s = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("sliced four bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("sliced eight bytes")))
    }
}
