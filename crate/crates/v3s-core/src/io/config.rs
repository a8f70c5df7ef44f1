//! Run configuration: a plain-text `key = value` file.
//!
//! One file drives every command of a run — corpus geometry, the class
//! catalog, sampling geometry, training hyperparameters, and the master
//! seed — so `(config, master seed)` fully determines all artifacts.
//! Unknown and duplicate keys are rejected rather than ignored: a typo like
//! `learning_rte` must fail the run, not silently train with the default.
//!
//! Defaults are the catalog and geometry used throughout, at desk scale:
//! 64-pixel square sources, 32-pixel output clips, and the full 19x11 class
//! catalog.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pretext::{SampleGeometry, TaskCatalog};
use crate::probe::TrainConfig;
use crate::synthgen::SceneConfig;
use crate::temporal::TemporalSpec;
use crate::warp::{Side, SpatialSpec};

use super::io_ctx;

/// Everything a run needs beyond its master seed. See the module docs for
/// the file syntax; field names are the file keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Side length of square synthetic source frames.
    pub frame_size: usize,
    /// Frames per synthetic source video. Must cover the catalog's longest
    /// temporal span (69 frames for the default catalog).
    pub video_frames: usize,
    /// Number of source videos `synth` renders.
    pub n_videos: usize,

    /// Anisotropic scale classes, as `(a, b)` width/height factors.
    pub spatial_scales: Vec<(f64, f64)>,
    /// Projection shrink factors; each is paired with all four sides.
    pub projection_factors: Vec<f64>,
    /// Playback speed classes (stride `s`, length `scale_len`).
    pub temporal_speeds: Vec<usize>,
    /// Clip length for the speed classes.
    pub scale_len: usize,
    /// Two-stage playback patterns, as `(s1, s2)` strides.
    pub temporal_patterns: Vec<(usize, usize)>,
    /// Per-stage lengths `(l1, l2)` for the pattern classes.
    pub pattern_len: (usize, usize),

    /// Square size sources are resized to before warping.
    pub resize_to: usize,
    /// Side length of the square output clips.
    pub crop_size: usize,

    /// Width of the probe's hidden layer.
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub weight_decay: f64,

    /// Root of all seed derivation; see the seeds module.
    pub master_seed: u64,
    /// Use the off-by-one stride convention in `transform` speed sampling.
    pub stride_literal: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            frame_size: 64,
            video_frames: 80,
            n_videos: 48,
            spatial_scales: vec![
                (1.0, 1.15),
                (1.0, 1.3),
                (1.0, 1.45),
                (1.15, 1.0),
                (1.3, 1.0),
                (1.45, 1.0),
            ],
            projection_factors: vec![0.8, 0.65, 0.5],
            temporal_speeds: vec![1, 2, 3],
            scale_len: 16,
            temporal_patterns: vec![
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (2, 1),
                (3, 2),
                (4, 3),
                (5, 4),
            ],
            pattern_len: (8, 8),
            resize_to: 64,
            crop_size: 32,
            hidden_dim: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            epochs: 30,
            weight_decay: 0.0,
            master_seed: 7,
            stride_literal: false,
        }
    }
}

impl RunConfig {
    /// Builds the class catalog these settings describe. Identity is always
    /// class 0; scales follow in file order, then factor x side projections.
    pub fn catalog(&self) -> Result<TaskCatalog> {
        let mut spatial_classes = vec![SpatialSpec::Identity];
        for &(a, b) in &self.spatial_scales {
            spatial_classes.push(SpatialSpec::scale(a, b)?);
        }
        for &c in &self.projection_factors {
            for side in Side::ALL {
                spatial_classes.push(SpatialSpec::projection(c, side)?);
            }
        }
        let mut temporal_classes = Vec::new();
        for &s in &self.temporal_speeds {
            temporal_classes.push(TemporalSpec::scale(s, self.scale_len)?);
        }
        let (l1, l2) = self.pattern_len;
        for &(s1, s2) in &self.temporal_patterns {
            temporal_classes.push(TemporalSpec::projection(s1, s2, l1, l2)?);
        }
        let catalog = TaskCatalog { spatial_classes, temporal_classes };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn geometry(&self) -> SampleGeometry {
        SampleGeometry { resize_to: self.resize_to, crop: self.crop_size }
    }

    /// Scene generator settings: default shape/motion ranges on this
    /// config's frame geometry.
    pub fn scene_config(&self) -> SceneConfig {
        SceneConfig {
            frame_width: self.frame_size,
            frame_height: self.frame_size,
            n_frames: self.video_frames,
            ..SceneConfig::default()
        }
    }

    /// Training hyperparameters with the shuffle seed filled in by the
    /// caller (derived from the master seed, not stored in the file).
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            batch_size: self.batch_size,
            epochs: self.epochs,
            weight_decay: self.weight_decay,
            seed,
        }
    }

    /// Checks every derived structure; a config that validates can run every
    /// command without further configuration errors.
    pub fn validate(&self) -> Result<()> {
        if self.frame_size == 0 || self.video_frames == 0 {
            return Err(Error::Config("frame_size and video_frames must be positive".into()));
        }
        if self.n_videos == 0 {
            return Err(Error::Config("n_videos must be positive".into()));
        }
        let catalog = self.catalog()?;
        if self.video_frames < catalog.max_span() {
            return Err(Error::Config(format!(
                "video_frames {} cannot cover the catalog's longest temporal span {}",
                self.video_frames,
                catalog.max_span()
            )));
        }
        self.geometry().validate()?;
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        self.train_config(0).validate()?;
        Ok(())
    }

    /// Parses the `key = value` syntax. Blank lines and `#` comments are
    /// skipped; every key must be known and appear at most once.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| io_ctx(path, e))?;
        RunConfig::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "frame_size" => self.frame_size = num(key, value)?,
            "video_frames" => self.video_frames = num(key, value)?,
            "n_videos" => self.n_videos = num(key, value)?,
            "spatial_scales" => self.spatial_scales = pair_list(key, value)?,
            "projection_factors" => self.projection_factors = num_list(key, value)?,
            "temporal_speeds" => self.temporal_speeds = num_list(key, value)?,
            "scale_len" => self.scale_len = num(key, value)?,
            "temporal_patterns" => self.temporal_patterns = pair_list(key, value)?,
            "pattern_len" => self.pattern_len = pair(key, value)?,
            "resize_to" => self.resize_to = num(key, value)?,
            "crop_size" => self.crop_size = num(key, value)?,
            "hidden_dim" => self.hidden_dim = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "momentum" => self.momentum = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "weight_decay" => self.weight_decay = num(key, value)?,
            "master_seed" => self.master_seed = num(key, value)?,
            "stride_literal" => {
                self.stride_literal = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(Error::Config(format!(
                            "stride_literal must be true or false, got {other:?}"
                        )))
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn num_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| num(key, v.trim())).collect()
}

fn pair<T: FromStr>(key: &str, value: &str) -> Result<(T, T)> {
    let (a, b) = value
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("{key}: expected a:b, got {value:?}")))?;
    Ok((num(key, a.trim())?, num(key, b.trim())?))
}

fn pair_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<(T, T)>> {
    value.split(',').map(|v| pair(key, v.trim())).collect()
}

impl fmt::Display for RunConfig {
    /// The file form of this config; `parse` of the output reproduces the
    /// value. Written into output directories so every artifact set carries
    /// the settings that produced it.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs = |v: &[(f64, f64)]| {
            v.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(",")
        };
        writeln!(f, "# corpus")?;
        writeln!(f, "frame_size = {}", self.frame_size)?;
        writeln!(f, "video_frames = {}", self.video_frames)?;
        writeln!(f, "n_videos = {}", self.n_videos)?;
        writeln!(f, "\n# catalog")?;
        writeln!(f, "spatial_scales = {}", pairs(&self.spatial_scales))?;
        writeln!(
            f,
            "projection_factors = {}",
            self.projection_factors.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
        )?;
        writeln!(
            f,
            "temporal_speeds = {}",
            self.temporal_speeds.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        )?;
        writeln!(f, "scale_len = {}", self.scale_len)?;
        writeln!(
            f,
            "temporal_patterns = {}",
            self.temporal_patterns
                .iter()
                .map(|(a, b)| format!("{a}:{b}"))
                .collect::<Vec<_>>()
                .join(",")
        )?;
        writeln!(f, "pattern_len = {}:{}", self.pattern_len.0, self.pattern_len.1)?;
        writeln!(f, "\n# sampling geometry")?;
        writeln!(f, "resize_to = {}", self.resize_to)?;
        writeln!(f, "crop_size = {}", self.crop_size)?;
        writeln!(f, "\n# training")?;
        writeln!(f, "hidden_dim = {}", self.hidden_dim)?;
        writeln!(f, "learning_rate = {}", self.learning_rate)?;
        writeln!(f, "momentum = {}", self.momentum)?;
        writeln!(f, "batch_size = {}", self.batch_size)?;
        writeln!(f, "epochs = {}", self.epochs)?;
        writeln!(f, "weight_decay = {}", self.weight_decay)?;
        writeln!(f, "\n# run")?;
        writeln!(f, "master_seed = {}", self.master_seed)?;
        writeln!(f, "stride_literal = {}", self.stride_literal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretext::default_catalog;

    #[test]
    fn default_config_matches_the_default_catalog() {
        let catalog = RunConfig::default().catalog().unwrap();
        assert_eq!(catalog.hash(), default_catalog().hash());
        assert_eq!(catalog.n_spatial(), 19);
        assert_eq!(catalog.n_temporal(), 11);
    }

    #[test]
    fn default_validates() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn display_round_trips_through_parse() {
        let mut cfg = RunConfig::default();
        cfg.master_seed = 99;
        cfg.temporal_speeds = vec![1, 2];
        cfg.stride_literal = true;
        let text = cfg.to_string();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# only comments\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("learning_rte = 0.1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key") && msg.contains("learning_rte"), "{msg}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = RunConfig::parse("epochs = 3\nepochs = 4\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn bad_values_report_key_and_line() {
        let err = RunConfig::parse("\nbatch_size = many\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("batch_size"), "{msg}");
    }

    #[test]
    fn short_videos_fail_validation() {
        // Default catalog needs 69 frames; 50 cannot host every class.
        let err = RunConfig::parse("video_frames = 50\n").unwrap_err();
        assert!(err.to_string().contains("span"), "{err}");
    }

    #[test]
    fn catalog_reflects_overrides() {
        let cfg = RunConfig::parse(
            "temporal_speeds = 1,4\nscale_len = 12\ntemporal_patterns = 2:5\nvideo_frames = 60\n",
        )
        .unwrap();
        let catalog = cfg.catalog().unwrap();
        assert_eq!(catalog.n_temporal(), 3);
        assert_eq!(catalog.temporal_classes[1].to_string(), "speed:4:12");
        assert_eq!(catalog.temporal_classes[2].to_string(), "pattern:2:5:8:8");
    }

    #[test]
    fn uniform_scale_entries_are_rejected() {
        let err = RunConfig::parse("spatial_scales = 1.2:1.2\n").unwrap_err();
        // The scale constructor refuses entries an aspect observer can't see.
        assert!(matches!(err, Error::Config(_) | Error::InvalidFactor { .. }), "{err}");
    }
}
