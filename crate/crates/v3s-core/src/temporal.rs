//! Temporal transforms as frame-index arithmetic.
//!
//! A temporal scale reads every `s`-th frame (speed-up by `s`); a temporal
//! projection reads two consecutive stages at different speeds, so playback
//! accelerates (or decelerates) partway through the clip. No frames are
//! synthesized — both transforms only choose indices into the source video.

use rand::Rng;

use crate::error::{Error, Result};

/// One temporal transformation class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemporalSpec {
    /// Constant speed `s`, producing an `l`-frame clip.
    Scale { s: usize, l: usize },
    /// Speed `s1` for the first `l1` frames, then `s2` for the next `l2`.
    Projection { s1: usize, s2: usize, l1: usize, l2: usize },
}

impl TemporalSpec {
    pub fn scale(s: usize, l: usize) -> Result<Self> {
        let spec = TemporalSpec::Scale { s, l };
        spec.validate()?;
        Ok(spec)
    }

    pub fn projection(s1: usize, s2: usize, l1: usize, l2: usize) -> Result<Self> {
        let spec = TemporalSpec::Projection { s1, s2, l1, l2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TemporalSpec::Scale { s, l } => {
                if s == 0 {
                    return Err(Error::InvalidFactor {
                        name: "s",
                        value: 0.0,
                        reason: "speed must be a positive integer".into(),
                    });
                }
                if l == 0 {
                    return Err(Error::InvalidFactor {
                        name: "l",
                        value: 0.0,
                        reason: "clip length must be positive".into(),
                    });
                }
                Ok(())
            }
            TemporalSpec::Projection { s1, s2, l1, l2 } => {
                if s1 == 0 || s2 == 0 {
                    return Err(Error::InvalidFactor {
                        name: "s1,s2",
                        value: 0.0,
                        reason: "stage speeds must be positive integers".into(),
                    });
                }
                if s1 == s2 {
                    return Err(Error::InvalidFactor {
                        name: "s1,s2",
                        value: s1 as f64,
                        reason: "stage speeds must differ (equal speeds are a plain scale)".into(),
                    });
                }
                if l1 == 0 || l2 == 0 {
                    return Err(Error::InvalidFactor {
                        name: "l1,l2",
                        value: 0.0,
                        reason: "stage lengths must be positive".into(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Number of frames in the sampled clip.
    pub fn clip_len(&self) -> usize {
        match *self {
            TemporalSpec::Scale { l, .. } => l,
            TemporalSpec::Projection { l1, l2, .. } => l1 + l2,
        }
    }

    /// Frame indices for a clip starting at source frame `r`.
    pub fn indices(&self, video_len: usize, r: usize) -> Result<Vec<usize>> {
        match *self {
            TemporalSpec::Scale { s, l } => scale_indices(video_len, s, r, l),
            TemporalSpec::Projection { s1, s2, l1, l2 } => {
                projection_indices(video_len, s1, s2, r, l1, l2)
            }
        }
    }
}

impl std::fmt::Display for TemporalSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TemporalSpec::Scale { s, l } => write!(f, "speed:{s}:{l}"),
            TemporalSpec::Projection { s1, s2, l1, l2 } => {
                write!(f, "pattern:{s1}:{s2}:{l1}:{l2}")
            }
        }
    }
}

impl std::str::FromStr for TemporalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        fn num(s: &str) -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("expected an integer, got {s:?}")))
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["speed", sp] => TemporalSpec::scale(num(sp)?, 16),
            ["speed", sp, l] => TemporalSpec::scale(num(sp)?, num(l)?),
            ["pattern", s1, s2] => TemporalSpec::projection(num(s1)?, num(s2)?, 8, 8),
            ["pattern", s1, s2, l1, l2] => {
                TemporalSpec::projection(num(s1)?, num(s2)?, num(l1)?, num(l2)?)
            }
            _ => Err(Error::Parse(format!("unknown temporal spec {s:?}"))),
        }
    }
}

/// Indices `[r, r+s, r+2s, …, r+(l−1)s]`: stride `s`, so `s−1` source frames
/// are skipped between consecutive clip frames and `s = 1` reads the
/// original sequence.
pub fn scale_indices(video_len: usize, s: usize, r: usize, l: usize) -> Result<Vec<usize>> {
    TemporalSpec::Scale { s, l }.validate()?;
    let last = r + (l - 1) * s;
    if last >= video_len {
        return Err(Error::ClipTooShort {
            needed: last + 1,
            available: video_len,
            video_id: None,
        });
    }
    Ok((0..l).map(|i| r + i * s).collect())
}

/// Stride `s−1` variant matching a printed formulation in which speed 1 has
/// stride 0 (a frozen clip). Kept for side-by-side comparison behind the
/// `--stride-literal` flag; not used by the class catalogs.
pub fn scale_indices_literal(video_len: usize, s: usize, r: usize, l: usize) -> Result<Vec<usize>> {
    TemporalSpec::Scale { s, l }.validate()?;
    let stride = s - 1;
    let last = r + (l - 1) * stride;
    if last >= video_len {
        return Err(Error::ClipTooShort {
            needed: last + 1,
            available: video_len,
            video_id: None,
        });
    }
    Ok((0..l).map(|i| r + i * stride).collect())
}

/// Two-stage sampling: `l1` indices strided by `s1` from `r`, then `l2`
/// indices strided by `s2`.
///
/// The second stage starts `max(s1, s2)` after the last stage-1 index. That
/// junction keeps both stage strides intact at the seam: the step into the
/// second stage is never shorter than either stage's own stride, and for
/// `s1 = s2 = k` the whole list degenerates to a single stride-`k` scale.
pub fn projection_indices(
    video_len: usize,
    s1: usize,
    s2: usize,
    r: usize,
    l1: usize,
    l2: usize,
) -> Result<Vec<usize>> {
    if s1 == 0 || s2 == 0 {
        return Err(Error::InvalidFactor {
            name: "s1,s2",
            value: 0.0,
            reason: "stage speeds must be positive integers".into(),
        });
    }
    if l1 == 0 || l2 == 0 {
        return Err(Error::InvalidFactor {
            name: "l1,l2",
            value: 0.0,
            reason: "stage lengths must be positive".into(),
        });
    }
    let last1 = r + (l1 - 1) * s1;
    let start2 = last1 + s1.max(s2);
    let last2 = start2 + (l2 - 1) * s2;
    if last2 >= video_len {
        return Err(Error::ClipTooShort {
            needed: last2 + 1,
            available: video_len,
            video_id: None,
        });
    }
    let mut out: Vec<usize> = (0..l1).map(|i| r + i * s1).collect();
    out.extend((0..l2).map(|i| start2 + i * s2));
    Ok(out)
}

/// Minimal source length that admits the spec at start `r = 0`.
pub fn required_span(spec: &TemporalSpec) -> usize {
    match *spec {
        TemporalSpec::Scale { s, l } => (l - 1) * s + 1,
        TemporalSpec::Projection { s1, s2, l1, l2 } => {
            (l1 - 1) * s1 + s1.max(s2) + (l2 - 1) * s2 + 1
        }
    }
}

/// Uniform random start index leaving `span` frames of room.
pub fn choose_start<R: Rng>(rng: &mut R, video_len: usize, span: usize) -> Result<usize> {
    if span == 0 || span > video_len {
        return Err(Error::ClipTooShort {
            needed: span,
            available: video_len,
            video_id: None,
        });
    }
    Ok(rng.gen_range(0..=video_len - span))
}
