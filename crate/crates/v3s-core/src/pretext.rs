//! Label generation: class catalogs over spatial/temporal transforms, and
//! the sampling pipeline that turns source videos into labeled clips.
//!
//! The label of a training clip is simply which transform produced it, so
//! the catalogs double as the class vocabularies of the two classifier
//! heads. Sampling draws one class from each catalog, picks a start frame,
//! gathers the temporally sampled frames, applies the spatial warp, and
//! crops — recording everything needed to reproduce the sample.

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::temporal::{choose_start, required_span, TemporalSpec};
use crate::video::{Clip, Video};
use crate::warp::{
    apply_spatial, crop, head_end_crop_rect, preprocess, random_crop_rect, resize_bilinear,
    CropRect, HeadEnd, SpatialSpec,
};

/// The class vocabularies of the two heads. A class id is an index into the
/// corresponding list.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskCatalog {
    pub spatial_classes: Vec<SpatialSpec>,
    pub temporal_classes: Vec<TemporalSpec>,
}

impl TaskCatalog {
    pub fn validate(&self) -> Result<()> {
        if self.spatial_classes.is_empty() || self.temporal_classes.is_empty() {
            return Err(Error::Config("catalog class lists must be non-empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for spec in &self.spatial_classes {
            spec.validate()?;
            if !seen.insert(spec.to_string()) {
                return Err(Error::Config(format!("duplicate spatial class {spec}")));
            }
        }
        seen.clear();
        for spec in &self.temporal_classes {
            spec.validate()?;
            if !seen.insert(spec.to_string()) {
                return Err(Error::Config(format!("duplicate temporal class {spec}")));
            }
        }
        Ok(())
    }

    pub fn n_spatial(&self) -> usize {
        self.spatial_classes.len()
    }

    pub fn n_temporal(&self) -> usize {
        self.temporal_classes.len()
    }

    /// Longest source span any temporal class needs.
    pub fn max_span(&self) -> usize {
        self.temporal_classes
            .iter()
            .map(required_span)
            .max()
            .unwrap_or(0)
    }

    /// SHA-256 over the serialized class lists; stored in manifests and
    /// checkpoints so mismatched catalogs fail loudly instead of silently
    /// renumbering classes.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"spatial");
        for spec in &self.spatial_classes {
            hasher.update(spec.to_string().as_bytes());
            hasher.update(b"\n");
        }
        hasher.update(b"temporal");
        for spec in &self.temporal_classes {
            hasher.update(spec.to_string().as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Comma-joined class lists, parseable by [`TaskCatalog::parse_lists`].
    pub fn serialize_lists(&self) -> (String, String) {
        let join = |items: Vec<String>| items.join(",");
        (
            join(self.spatial_classes.iter().map(|s| s.to_string()).collect()),
            join(self.temporal_classes.iter().map(|t| t.to_string()).collect()),
        )
    }

    pub fn parse_lists(spatial: &str, temporal: &str) -> Result<TaskCatalog> {
        let catalog = TaskCatalog {
            spatial_classes: spatial
                .split(',')
                .map(|s| s.trim().parse::<SpatialSpec>())
                .collect::<Result<Vec<_>>>()?,
            temporal_classes: temporal
                .split(',')
                .map(|t| t.trim().parse::<TemporalSpec>())
                .collect::<Result<Vec<_>>>()?,
        };
        catalog.validate()?;
        Ok(catalog)
    }
}

/// The catalog used throughout: 19 spatial classes (the untransformed
/// original, six anisotropic scales, and three shrink factors on each of
/// the four sides) and 11 temporal classes (speeds 1–3, where speed 1 is
/// the temporal identity, plus eight two-stage patterns).
pub fn default_catalog() -> TaskCatalog {
    let mut spatial_classes = vec![SpatialSpec::Identity];
    for (a, b) in [(1.0, 1.15), (1.0, 1.3), (1.0, 1.45), (1.15, 1.0), (1.3, 1.0), (1.45, 1.0)] {
        spatial_classes.push(SpatialSpec::Scale { a, b });
    }
    for c in [0.8, 0.65, 0.5] {
        for side in crate::warp::Side::ALL {
            spatial_classes.push(SpatialSpec::Projection { c, side });
        }
    }

    let mut temporal_classes = Vec::new();
    for s in [1, 2, 3] {
        temporal_classes.push(TemporalSpec::Scale { s, l: 16 });
    }
    for (s1, s2) in [(1, 2), (2, 3), (3, 4), (4, 5), (2, 1), (3, 2), (4, 3), (5, 4)] {
        temporal_classes.push(TemporalSpec::Projection { s1, s2, l1: 8, l2: 8 });
    }

    TaskCatalog { spatial_classes, temporal_classes }
}

/// Class ids of one sample, indexing the catalog lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelPair {
    pub spatial_class: usize,
    pub temporal_class: usize,
}

/// Everything needed to trace a sample back to its source.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub video_id: String,
    /// Seed of the generator the sample was drawn with.
    pub seed: u64,
    pub spatial: SpatialSpec,
    pub temporal: TemporalSpec,
    /// Start frame of the temporal sampling.
    pub start: usize,
    /// Window applied to the warped canvas (for projections, the head-end
    /// square that was then resized to the output size).
    pub crop: CropRect,
}

/// A transformed, cropped clip with its two class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub clip: Clip,
    pub labels: LabelPair,
    pub provenance: Provenance,
}

/// A source video with a stable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceVideo {
    pub id: String,
    pub video: Video,
}

/// Frame geometry of the sampling pipeline: source frames are resized to
/// `resize_to` square before warping, and the output clip is `crop` square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleGeometry {
    pub resize_to: usize,
    pub crop: usize,
}

impl Default for SampleGeometry {
    fn default() -> Self {
        SampleGeometry { resize_to: 64, crop: 32 }
    }
}

impl SampleGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.resize_to == 0 || self.crop == 0 {
            return Err(Error::Config("geometry sizes must be nonzero".into()));
        }
        if self.crop > self.resize_to {
            return Err(Error::Config(format!(
                "crop {} exceeds resize target {}",
                self.crop, self.resize_to
            )));
        }
        Ok(())
    }
}

/// One uniform draw from each catalog list. Draw order is fixed (spatial,
/// then temporal) so seeded runs reproduce.
pub fn draw_specs<R: Rng>(
    rng: &mut R,
    catalog: &TaskCatalog,
) -> (SpatialSpec, TemporalSpec, LabelPair) {
    let si = rng.gen_range(0..catalog.spatial_classes.len());
    let ti = rng.gen_range(0..catalog.temporal_classes.len());
    (
        catalog.spatial_classes[si],
        catalog.temporal_classes[ti],
        LabelPair { spatial_class: si, temporal_class: ti },
    )
}

/// Samples one labeled clip from a video.
///
/// Pipeline: draw the two specs, pick a start frame, gather the temporal
/// indices, resize those frames to `resize_to` square, warp them onto the
/// spec's canvas, and cut the output window. Warping only the selected
/// frames is an exact rewrite of warping the whole video first — the warp
/// is per-frame and identical across time.
///
/// The output window depends on the spatial class: scale canvases are
/// cropped directly at a random position, which keeps the stretched aspect
/// observable in the clip; projection frames keep their head-end square
/// (side length `c * resize_to`, where the foreshortening is strongest) and
/// resize it to the output size. Generator call order is fixed: specs,
/// start, crop placement.
pub fn generate_sample<R: Rng>(
    video: &Video,
    video_id: &str,
    sample_seed: u64,
    rng: &mut R,
    catalog: &TaskCatalog,
    geometry: &SampleGeometry,
) -> Result<LabeledSample> {
    geometry.validate()?;
    let (sspec, tspec, labels) = draw_specs(rng, catalog);
    let span = required_span(&tspec);
    let attach = |e: Error| e.with_video_id(video_id);

    let r = choose_start(rng, video.len(), span).map_err(attach)?;
    let indices = tspec.indices(video.len(), r).map_err(attach)?;
    let selected = video.select(&indices).map_err(attach)?;

    let resized = selected.map_frames(|f| resize_bilinear(f, geometry.resize_to, geometry.resize_to))?;
    let (cw, ch) = sspec.canvas(geometry.resize_to, geometry.resize_to)?;
    let warped = apply_spatial(&resized, &sspec, cw, ch)?;

    let (clip, crop_rect) = match sspec {
        SpatialSpec::Projection { c, side } => {
            let len = ((c * geometry.resize_to as f64).round() as usize).max(1);
            let rect = head_end_crop_rect(side, cw, ch, len)?;
            let head = HeadEnd { len, side };
            let out_rect = CropRect::new(0, 0, geometry.crop, geometry.crop);
            let clip =
                warped.map_frames(|f| preprocess(f, geometry.resize_to, out_rect, Some(head)))?;
            (clip, rect)
        }
        _ => {
            let rect = random_crop_rect(rng, cw, ch, geometry.crop, geometry.crop)?;
            let clip = warped.map_frames(|f| crop(f, rect))?;
            (clip, rect)
        }
    };

    Ok(LabeledSample {
        clip,
        labels,
        provenance: Provenance {
            video_id: video_id.to_string(),
            seed: sample_seed,
            spatial: sspec,
            temporal: tspec,
            start: r,
            crop: crop_rect,
        },
    })
}

/// Retry budget per sample before giving up on the corpus.
const MAX_DRAW_RETRIES: usize = 100;

/// Builds `n_samples` labeled samples from a corpus.
///
/// Each sample runs on its own generator seeded by `child_seed(master_seed,
/// index)` from the io module, so the dataset is reproducible and
/// order-independent. A draw that lands on a video too short for the drawn
/// temporal class is retried (new video, new specs) up to 100 times.
pub fn build_dataset<F>(
    videos: &[SourceVideo],
    n_samples: usize,
    child_rng: F,
    catalog: &TaskCatalog,
    geometry: &SampleGeometry,
) -> Result<Vec<LabeledSample>>
where
    F: Fn(u64) -> (u64, rand_chacha::ChaCha8Rng),
{
    catalog.validate()?;
    if videos.is_empty() && n_samples > 0 {
        return Err(Error::Config("no source videos".into()));
    }
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let (seed, mut rng) = child_rng(i as u64);
        let mut produced = None;
        for _ in 0..MAX_DRAW_RETRIES {
            let v = &videos[rng.gen_range(0..videos.len())];
            match generate_sample(&v.video, &v.id, seed, &mut rng, catalog, geometry) {
                Ok(sample) => {
                    produced = Some(sample);
                    break;
                }
                Err(Error::ClipTooShort { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        match produced {
            Some(sample) => samples.push(sample),
            None => {
                return Err(Error::ExhaustedRetries { sample: i, tries: MAX_DRAW_RETRIES })
            }
        }
    }
    Ok(samples)
}
