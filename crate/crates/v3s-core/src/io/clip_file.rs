//! Clip container: fixed-layout little-endian binary.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "V3SC" | version u32 | T u16 | H u16 | W u16 | C u16 | T·H·W·C × f32
//! ```
//!
//! Samples are frame-major, then row-major within a frame, interleaved
//! channels — the same order [`Frame`] stores them. Reading validates magic,
//! version, advertised length, and the `[0, 1]` sample range, so a clip that
//! loads is a clip every other module accepts without further checks.
//! Writing validates the same range, so a bad tensor fails at the producer,
//! not at some later consumer.

use std::path::Path;

use crate::error::{Error, Result};
use crate::video::{Clip, Frame};

use super::{atomic_write, read_bytes};

/// First four bytes of every clip file.
pub const CLIP_MAGIC: [u8; 4] = *b"V3SC";
/// Current format version.
pub const CLIP_VERSION: u32 = 1;

/// Bytes before the sample payload: magic + version + four u16 dims.
const HEADER_LEN: usize = 4 + 4 + 4 * 2;

/// Serializes a clip to the container layout.
pub fn clip_to_bytes(clip: &Clip) -> Result<Vec<u8>> {
    let dims = [clip.len(), clip.height(), clip.width(), clip.channels()];
    for d in dims {
        if d > u16::MAX as usize {
            return Err(Error::InvalidClip(format!(
                "dimension {d} exceeds the container limit of {}",
                u16::MAX
            )));
        }
    }

    let n_samples = dims.iter().product::<usize>();
    let mut out = Vec::with_capacity(HEADER_LEN + n_samples * 4);
    out.extend_from_slice(&CLIP_MAGIC);
    out.extend_from_slice(&CLIP_VERSION.to_le_bytes());
    for d in dims {
        out.extend_from_slice(&(d as u16).to_le_bytes());
    }

    let mut index = 0usize;
    for frame in clip.frames() {
        for &v in frame.data() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRangeSample { index, value: v });
            }
            out.extend_from_slice(&v.to_le_bytes());
            index += 1;
        }
    }
    Ok(out)
}

/// Parses the container layout back into a clip.
pub fn clip_from_bytes(bytes: &[u8]) -> Result<Clip> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    if bytes[..4] != CLIP_MAGIC {
        return Err(Error::BadMagic {
            expected: CLIP_MAGIC,
            found: bytes[..4].try_into().expect("sliced four bytes"),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("sliced four bytes"));
    if version != CLIP_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }

    let dim = |i: usize| {
        u16::from_le_bytes(bytes[8 + 2 * i..10 + 2 * i].try_into().expect("sliced two bytes"))
            as usize
    };
    let (t, h, w, c) = (dim(0), dim(1), dim(2), dim(3));

    let n_samples = t * h * w * c;
    let expected = (HEADER_LEN + n_samples * 4) as u64;
    if (bytes.len() as u64) < expected {
        return Err(Error::TruncatedFile { expected, actual: bytes.len() as u64 });
    }
    if (bytes.len() as u64) > expected {
        return Err(Error::InvalidClip(format!(
            "{} trailing bytes after the advertised payload",
            bytes.len() as u64 - expected
        )));
    }

    let per_frame = h * w * c;
    let mut frames = Vec::with_capacity(t);
    let mut offset = HEADER_LEN;
    for _ in 0..t {
        let mut data = Vec::with_capacity(per_frame);
        for _ in 0..per_frame {
            let v = f32::from_le_bytes(
                bytes[offset..offset + 4].try_into().expect("sliced four bytes"),
            );
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRangeSample {
                    index: (offset - HEADER_LEN) / 4,
                    value: v,
                });
            }
            data.push(v);
            offset += 4;
        }
        frames.push(Frame::from_data(w, h, c, data)?);
    }
    Clip::new(frames)
}

/// Writes `clip` to `path` atomically.
pub fn write_clip(path: &Path, clip: &Clip) -> Result<()> {
    atomic_write(path, &clip_to_bytes(clip)?)
}

/// Reads a clip from `path`, validating the whole container.
pub fn read_clip(path: &Path) -> Result<Clip> {
    clip_from_bytes(&read_bytes(path)?)
}
