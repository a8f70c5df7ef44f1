//! Synthetic single-object videos with analytically known geometry and
//! motion, plus the measurement side: extent/centroid of the object in a
//! frame and per-step displacement across a clip.
//!
//! These scenes make transform behavior checkable end to end: a rendered
//! rectangle has a known size, so a scale transform must change its measured
//! aspect ratio by exactly the factor pair; a known velocity, so a temporal
//! speed-up must multiply its measured displacement.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::video::{Clip, Frame, Video};

/// Object silhouette. Edges are hard (no anti-aliasing) so a 0.5 threshold
/// separates foreground from background unambiguously.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Rectangle,
    Ellipse,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Rectangle => "rect",
            Shape::Ellipse => "ellipse",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" => Ok(Shape::Rectangle),
            "ellipse" => Ok(Shape::Ellipse),
            other => Err(Error::Parse(format!("unknown shape {other:?}"))),
        }
    }
}

/// One object moving on a straight line over a constant background.
///
/// `start` is the object center in frame 0; in frame `t` the center sits at
/// `start + t * velocity`. The trajectory must keep the object fully
/// in-frame, and the foreground must be at least 0.5 brighter than the
/// background so measurement thresholds (and the black fill that warping
/// introduces) never confuse the two.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeScene {
    pub shape: Shape,
    /// Object width and height in pixels.
    pub size: (f64, f64),
    /// Center position in frame 0.
    pub start: Point2,
    /// Center displacement per frame.
    pub velocity: (f64, f64),
    pub frame_width: usize,
    pub frame_height: usize,
    pub channels: usize,
    pub n_frames: usize,
    /// Foreground (object) intensity.
    pub fg: f32,
    /// Background intensity.
    pub bg: f32,
    /// Seed the scene was drawn from; carried for provenance.
    pub seed: u64,
}

impl ShapeScene {
    /// Object center in frame `t`.
    pub fn center_at(&self, t: usize) -> Point2 {
        Point2::new(
            self.start.x + t as f64 * self.velocity.0,
            self.start.y + t as f64 * self.velocity.1,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_width == 0 || self.frame_height == 0 {
            return Err(Error::InvalidScene("frame dimensions must be nonzero".into()));
        }
        if self.channels != 1 && self.channels != 3 {
            return Err(Error::InvalidScene(format!(
                "channels must be 1 or 3, got {}",
                self.channels
            )));
        }
        if self.n_frames == 0 {
            return Err(Error::InvalidScene("scene needs at least one frame".into()));
        }
        if !(self.size.0 > 0.0 && self.size.1 > 0.0) {
            return Err(Error::InvalidScene(format!(
                "object size must be positive, got {:?}",
                self.size
            )));
        }
        if !(0.0..=1.0).contains(&self.fg) || !(0.0..=1.0).contains(&self.bg) {
            return Err(Error::InvalidScene("intensities must lie in [0,1]".into()));
        }
        if self.fg - self.bg < 0.5 {
            return Err(Error::InvalidScene(format!(
                "foreground {} must exceed background {} by at least 0.5",
                self.fg, self.bg
            )));
        }
        Ok(())
    }

    fn in_frame_at(&self, t: usize) -> bool {
        let c = self.center_at(t);
        let (hw, hh) = (self.size.0 / 2.0, self.size.1 / 2.0);
        c.x - hw >= 0.0
            && c.x + hw <= self.frame_width as f64
            && c.y - hh >= 0.0
            && c.y + hh <= self.frame_height as f64
    }

    /// Compact single-line descriptor, parseable by `FromStr`.
    pub fn descriptor(&self) -> String {
        format!(
            "shape={};size={},{};start={},{};vel={},{};frame={}x{}x{};n={};fg={};bg={};seed={}",
            self.shape.name(),
            self.size.0,
            self.size.1,
            self.start.x,
            self.start.y,
            self.velocity.0,
            self.velocity.1,
            self.frame_width,
            self.frame_height,
            self.channels,
            self.n_frames,
            self.fg,
            self.bg,
            self.seed
        )
    }
}

impl std::fmt::Display for ShapeScene {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl std::str::FromStr for ShapeScene {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        fn split2(v: &str, key: &str) -> Result<(f64, f64)> {
            let (a, b) = v
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("{key}: expected two numbers, got {v:?}")))?;
            Ok((numf(a, key)?, numf(b, key)?))
        }
        fn numf(v: &str, key: &str) -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("{key}: expected a number, got {v:?}")))
        }
        fn numu(v: &str, key: &str) -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::Parse(format!("{key}: expected an integer, got {v:?}")))
        }

        let mut shape = None;
        let mut size = None;
        let mut start = None;
        let mut vel = None;
        let mut frame = None;
        let mut n = None;
        let mut fg = None;
        let mut bg = None;
        let mut seed = None;
        for field in s.split(';') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("scene field {field:?} is not key=value")))?;
            match key {
                "shape" => shape = Some(value.parse::<Shape>()?),
                "size" => size = Some(split2(value, "size")?),
                "start" => start = Some(split2(value, "start")?),
                "vel" => vel = Some(split2(value, "vel")?),
                "frame" => {
                    let parts: Vec<&str> = value.split('x').collect();
                    if parts.len() != 3 {
                        return Err(Error::Parse(format!("frame: expected WxHxC, got {value:?}")));
                    }
                    frame = Some((
                        numu(parts[0], "frame")?,
                        numu(parts[1], "frame")?,
                        numu(parts[2], "frame")?,
                    ));
                }
                "n" => n = Some(numu(value, "n")?),
                "fg" => fg = Some(numf(value, "fg")? as f32),
                "bg" => bg = Some(numf(value, "bg")? as f32),
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|_| {
                        Error::Parse(format!("seed: expected an integer, got {value:?}"))
                    })?)
                }
                other => return Err(Error::Parse(format!("unknown scene field {other:?}"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("scene descriptor missing {name}"));
        let (fw, fh, ch) = frame.ok_or_else(|| missing("frame"))?;
        let start = start.ok_or_else(|| missing("start"))?;
        let scene = ShapeScene {
            shape: shape.ok_or_else(|| missing("shape"))?,
            size: size.ok_or_else(|| missing("size"))?,
            start: Point2::new(start.0, start.1),
            velocity: vel.ok_or_else(|| missing("vel"))?,
            frame_width: fw,
            frame_height: fh,
            channels: ch,
            n_frames: n.ok_or_else(|| missing("n"))?,
            fg: fg.ok_or_else(|| missing("fg"))?,
            bg: bg.ok_or_else(|| missing("bg"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        };
        scene.validate()?;
        Ok(scene)
    }
}

/// Renders the scene into a video; deterministic in the scene fields.
pub fn render(scene: &ShapeScene) -> Result<Video> {
    scene.validate()?;
    let mut frames = Vec::with_capacity(scene.n_frames);
    for t in 0..scene.n_frames {
        if !scene.in_frame_at(t) {
            return Err(Error::ObjectOutOfBounds { frame: t });
        }
        frames.push(render_frame(scene, t)?);
    }
    Clip::new(frames)
}

fn render_frame(scene: &ShapeScene, t: usize) -> Result<Frame> {
    let mut frame = Frame::zeros(scene.frame_width, scene.frame_height, scene.channels)?;
    frame.data_mut().fill(scene.bg);
    let c = scene.center_at(t);
    let (hw, hh) = (scene.size.0 / 2.0, scene.size.1 / 2.0);

    // Only touch the rows/columns the object can reach.
    let x_lo = (c.x - hw - 1.0).floor().max(0.0) as usize;
    let x_hi = ((c.x + hw + 1.0).ceil() as usize).min(scene.frame_width);
    let y_lo = (c.y - hh - 1.0).floor().max(0.0) as usize;
    let y_hi = ((c.y + hh + 1.0).ceil() as usize).min(scene.frame_height);

    for y in y_lo..y_hi {
        let py = y as f64 + 0.5;
        for x in x_lo..x_hi {
            let px = x as f64 + 0.5;
            // Half-open boxes keep pixel counts exact when edges land on
            // pixel centers.
            let inside = match scene.shape {
                Shape::Rectangle => {
                    px >= c.x - hw && px < c.x + hw && py >= c.y - hh && py < c.y + hh
                }
                Shape::Ellipse => {
                    let nx = (px - c.x) / hw;
                    let ny = (py - c.y) / hh;
                    nx * nx + ny * ny < 1.0
                }
            };
            if inside {
                for ch in 0..scene.channels {
                    frame.set(x, y, ch, scene.fg);
                }
            }
        }
    }
    Ok(frame)
}

/// Bounding box and intensity-weighted centroid of the single foreground
/// region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub width: usize,
    pub height: usize,
    pub centroid: Point2,
}

impl Extent {
    pub fn aspect_ratio(&self) -> f64 {
        self.width as f64 / self.height as f64
    }
}

/// Measures the one object in a frame: every pixel whose channel-mean
/// intensity exceeds `threshold` is foreground, which must form exactly one
/// 4-connected region.
pub fn measure_extent(frame: &Frame, threshold: f32) -> Result<Extent> {
    let (w, h) = (frame.width(), frame.height());
    let mut mask = vec![false; w * h];
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0f32;
            for c in 0..frame.channels() {
                sum += frame.get(x, y, c);
            }
            if sum / frame.channels() as f32 > threshold {
                mask[y * w + x] = true;
                any = true;
            }
        }
    }
    if !any {
        return Err(Error::NoObject);
    }

    let components = count_components(&mask, w, h);
    if components != 1 {
        return Err(Error::MultipleObjects { count: components });
    }

    let (mut min_x, mut min_y, mut max_x, mut max_y) = (usize::MAX, usize::MAX, 0, 0);
    let (mut sum_w, mut sum_x, mut sum_y) = (0.0f64, 0.0f64, 0.0f64);
    for y in 0..h {
        for x in 0..w {
            if !mask[y * w + x] {
                continue;
            }
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            let mut intensity = 0.0f64;
            for c in 0..frame.channels() {
                intensity += frame.get(x, y, c) as f64;
            }
            intensity /= frame.channels() as f64;
            sum_w += intensity;
            sum_x += intensity * (x as f64 + 0.5);
            sum_y += intensity * (y as f64 + 0.5);
        }
    }
    Ok(Extent {
        width: max_x - min_x + 1,
        height: max_y - min_y + 1,
        centroid: Point2::new(sum_x / sum_w, sum_y / sum_w),
    })
}

/// Number of 4-connected regions in the mask.
fn count_components(mask: &[bool], w: usize, h: usize) -> usize {
    let mut visited = vec![false; mask.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || visited[start] {
            continue;
        }
        components += 1;
        visited[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let mut push = |nx: usize, ny: usize, stack: &mut Vec<usize>| {
                let j = ny * w + nx;
                if mask[j] && !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                push(x - 1, y, &mut stack);
            }
            if x + 1 < w {
                push(x + 1, y, &mut stack);
            }
            if y > 0 {
                push(x, y - 1, &mut stack);
            }
            if y + 1 < h {
                push(x, y + 1, &mut stack);
            }
        }
    }
    components
}

/// Per-step object motion over a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionStats {
    /// Centroid difference between consecutive frames.
    pub displacements: Vec<(f64, f64)>,
    /// Mean of the per-step displacement magnitudes.
    pub mean_magnitude: f64,
    /// Direction of the summed displacement, `atan2(sum dy, sum dx)` radians.
    pub mean_direction: f64,
}

/// Tracks the object centroid across the clip and differences it.
pub fn measure_motion(clip: &Clip, threshold: f32) -> Result<MotionStats> {
    if clip.len() < 2 {
        return Err(Error::InvalidClip(
            "motion needs at least two frames".into(),
        ));
    }
    let mut centroids = Vec::with_capacity(clip.len());
    for f in clip.frames() {
        centroids.push(measure_extent(f, threshold)?.centroid);
    }
    let displacements: Vec<(f64, f64)> = centroids
        .windows(2)
        .map(|w| (w[1].x - w[0].x, w[1].y - w[0].y))
        .collect();
    let mean_magnitude = displacements
        .iter()
        .map(|(dx, dy)| (dx * dx + dy * dy).sqrt())
        .sum::<f64>()
        / displacements.len() as f64;
    let sum_dx: f64 = displacements.iter().map(|d| d.0).sum();
    let sum_dy: f64 = displacements.iter().map(|d| d.1).sum();
    Ok(MotionStats {
        displacements,
        mean_magnitude,
        mean_direction: sum_dy.atan2(sum_dx),
    })
}

/// Parameter ranges for drawing random scenes.
///
/// Defaults are tuned for 64x64 corpora: square objects large enough to
/// survive a random 32x32 crop, velocities that keep the whole linear
/// trajectory in-frame across `n_frames`, and bright-on-dark intensities
/// with margin on both sides of a 0.5 threshold.
///
/// The two ranges are deliberately narrow. Classifying a sampled clip's
/// temporal class hinges on apparent displacement per sampled step, which is
/// native speed times stride — if native speeds vary by the same factor as
/// adjacent strides, the classes overlap and no classifier can separate
/// them. Likewise the anisotropic-scale classes are read off the object's
/// aspect ratio, which a 32-pixel crop can only measure while the stretched
/// object still fits inside it (22 x 1.45 ~ 32). Keeping speed variation
/// well under the smallest stride ratio and sizes under crop/stretch leaves
/// the transform, not the scene draw, as the dominant signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub frame_width: usize,
    pub frame_height: usize,
    pub channels: usize,
    pub n_frames: usize,
    /// Object edge length range (objects are square).
    pub size_range: (f64, f64),
    /// Per-axis speed magnitude range, pixels per frame.
    pub speed_range: (f64, f64),
    /// How far the trajectory midpoint may sit from the frame center.
    pub center_jitter: f64,
    pub fg_range: (f32, f32),
    pub bg_range: (f32, f32),
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            frame_width: 64,
            frame_height: 64,
            channels: 1,
            n_frames: 80,
            size_range: (18.0, 22.0),
            speed_range: (0.32, 0.34),
            center_jitter: 5.0,
            fg_range: (0.85, 1.0),
            bg_range: (0.0, 0.15),
        }
    }
}

/// Draws one scene. The trajectory midpoint is jittered around the frame
/// center within whatever room the velocity leaves, so the object is always
/// fully in-frame for the scene's whole duration.
pub fn random_scene<R: Rng>(rng: &mut R, config: &SceneConfig, seed: u64) -> Result<ShapeScene> {
    let shape = if rng.gen::<bool>() {
        Shape::Rectangle
    } else {
        Shape::Ellipse
    };
    let edge = rng.gen_range(config.size_range.0..=config.size_range.1);
    let mut axis_speed = |_: ()| {
        let mag = rng.gen_range(config.speed_range.0..=config.speed_range.1);
        if rng.gen::<bool>() {
            mag
        } else {
            -mag
        }
    };
    let velocity = (axis_speed(()), axis_speed(()));

    let duration = (config.n_frames - 1) as f64;
    let mid_axis = |rng: &mut R, dim: usize, v: f64| -> Result<f64> {
        let half_travel = (v * duration).abs() / 2.0;
        let lo = edge / 2.0 + half_travel;
        let hi = dim as f64 - edge / 2.0 - half_travel;
        if lo > hi {
            return Err(Error::InvalidScene(format!(
                "velocity {v} cannot keep a {edge}-pixel object inside {dim} pixels for {} frames",
                config.n_frames
            )));
        }
        let center = dim as f64 / 2.0;
        let jlo = (center - config.center_jitter).max(lo);
        let jhi = (center + config.center_jitter).min(hi);
        Ok(if jlo <= jhi {
            rng.gen_range(jlo..=jhi)
        } else {
            center.clamp(lo, hi)
        })
    };
    let mid_x = mid_axis(rng, config.frame_width, velocity.0)?;
    let mid_y = mid_axis(rng, config.frame_height, velocity.1)?;
    let start = Point2::new(
        mid_x - velocity.0 * duration / 2.0,
        mid_y - velocity.1 * duration / 2.0,
    );

    let fg = rng.gen_range(config.fg_range.0..=config.fg_range.1);
    let bg = rng.gen_range(config.bg_range.0..=config.bg_range.1);
    let scene = ShapeScene {
        shape,
        size: (edge, edge),
        start,
        velocity,
        frame_width: config.frame_width,
        frame_height: config.frame_height,
        channels: config.channels,
        n_frames: config.n_frames,
        fg,
        bg,
        seed,
    };
    scene.validate()?;
    Ok(scene)
}
