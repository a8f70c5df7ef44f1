//! Line-oriented manifests: tab-separated, one record per line.
//!
//! Two manifest kinds exist. A *corpus* manifest lists rendered source
//! videos (`id`, clip path, scene descriptor); a *dataset* manifest lists
//! labeled training samples (`id`, clip path, the two class ids, a
//! provenance record, and the catalog hash). Paths are stored as written —
//! by convention relative to the manifest's own directory, which keeps an
//! output directory relocatable as a unit.
//!
//! Readers and writers enforce the same two invariants: sample ids are
//! unique, and the catalog hash is identical on every line (a dataset mixing
//! catalogs would silently scramble class ids). Lines starting with `#` are
//! comments; writers emit one header comment naming the columns.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pretext::Provenance;

use super::{atomic_write, io_ctx};

/// One labeled-sample line of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRecord {
    pub id: String,
    /// Clip file path, relative to the manifest's directory.
    pub path: String,
    pub spatial_class: usize,
    pub temporal_class: usize,
    /// Where the sample came from, as written by [`provenance_string`].
    pub provenance: String,
    pub catalog_hash: String,
}

/// One source-video line of a corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub id: String,
    /// Clip file path, relative to the manifest's directory.
    pub path: String,
    /// Scene descriptor, parseable by the scene generator.
    pub descriptor: String,
}

/// Formats a sample's provenance as one field: enough to regenerate the clip
/// given the source corpus (video, per-sample seed, both specs, temporal
/// start, output window).
pub fn provenance_string(p: &Provenance) -> String {
    format!(
        "video={};seed={};spatial={};temporal={};start={};crop={},{},{},{}",
        p.video_id, p.seed, p.spatial, p.temporal, p.start, p.crop.x, p.crop.y, p.crop.width,
        p.crop.height
    )
}

fn check_field(name: &str, value: &str) -> Result<()> {
    if value.contains('\t') || value.contains('\n') || value.contains('\r') {
        return Err(Error::Manifest(format!(
            "field {name} contains a tab or newline: {value:?}"
        )));
    }
    Ok(())
}

fn check_unique_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Manifest(format!("duplicate sample id {id:?}")));
        }
    }
    Ok(())
}

fn check_uniform_hash<'a>(mut hashes: impl Iterator<Item = &'a str>) -> Result<()> {
    if let Some(first) = hashes.next() {
        for h in hashes {
            if h != first {
                return Err(Error::Manifest(format!(
                    "catalog hash mismatch within one manifest: {first} vs {h}"
                )));
            }
        }
    }
    Ok(())
}

/// Serializes a dataset manifest, validating both invariants.
pub fn dataset_manifest_to_string(records: &[DatasetRecord]) -> Result<String> {
    check_unique_ids(records.iter().map(|r| r.id.as_str()))?;
    check_uniform_hash(records.iter().map(|r| r.catalog_hash.as_str()))?;
    let mut out =
        String::from("# id\tpath\tspatial_class\ttemporal_class\tprovenance\tcatalog_hash\n");
    for r in records {
        for (name, value) in [
            ("id", &r.id),
            ("path", &r.path),
            ("provenance", &r.provenance),
            ("catalog_hash", &r.catalog_hash),
        ] {
            check_field(name, value)?;
        }
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.id, r.path, r.spatial_class, r.temporal_class, r.provenance, r.catalog_hash
        ));
    }
    Ok(out)
}

/// Parses a dataset manifest, validating both invariants.
pub fn dataset_manifest_from_string(text: &str) -> Result<Vec<DatasetRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(Error::Manifest(format!(
                "line {}: expected 6 tab-separated fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let class = |name: &str, s: &str| -> Result<usize> {
            s.parse().map_err(|_| {
                Error::Manifest(format!("line {}: bad {name} {s:?}", lineno + 1))
            })
        };
        records.push(DatasetRecord {
            id: fields[0].to_string(),
            path: fields[1].to_string(),
            spatial_class: class("spatial class", fields[2])?,
            temporal_class: class("temporal class", fields[3])?,
            provenance: fields[4].to_string(),
            catalog_hash: fields[5].to_string(),
        });
    }
    check_unique_ids(records.iter().map(|r| r.id.as_str()))?;
    check_uniform_hash(records.iter().map(|r| r.catalog_hash.as_str()))?;
    Ok(records)
}

/// Writes a dataset manifest atomically.
pub fn write_dataset_manifest(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    atomic_write(path, dataset_manifest_to_string(records)?.as_bytes())
}

/// Reads and validates a dataset manifest.
pub fn read_dataset_manifest(path: &Path) -> Result<Vec<DatasetRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_ctx(path, e))?;
    dataset_manifest_from_string(&text)
}

/// Serializes a corpus manifest.
pub fn corpus_manifest_to_string(records: &[CorpusRecord]) -> Result<String> {
    check_unique_ids(records.iter().map(|r| r.id.as_str()))?;
    let mut out = String::from("# id\tpath\tscene\n");
    for r in records {
        for (name, value) in [("id", &r.id), ("path", &r.path), ("scene", &r.descriptor)] {
            check_field(name, value)?;
        }
        out.push_str(&format!("{}\t{}\t{}\n", r.id, r.path, r.descriptor));
    }
    Ok(out)
}

/// Parses a corpus manifest.
pub fn corpus_manifest_from_string(text: &str) -> Result<Vec<CorpusRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Manifest(format!(
                "line {}: expected 3 tab-separated fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        records.push(CorpusRecord {
            id: fields[0].to_string(),
            path: fields[1].to_string(),
            descriptor: fields[2].to_string(),
        });
    }
    check_unique_ids(records.iter().map(|r| r.id.as_str()))?;
    Ok(records)
}

/// Writes a corpus manifest atomically.
pub fn write_corpus_manifest(path: &Path, records: &[CorpusRecord]) -> Result<()> {
    atomic_write(path, corpus_manifest_to_string(records)?.as_bytes())
}

/// Reads and validates a corpus manifest.
pub fn read_corpus_manifest(path: &Path) -> Result<Vec<CorpusRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_ctx(path, e))?;
    corpus_manifest_from_string(&text)
}
