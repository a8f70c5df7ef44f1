//! Spatial transforms: corner parameterizations, frame warping, and the
//! resize/crop preprocessing applied to transformed frames.
//!
//! A spatial spec describes where the corners of a frame land. Scaling moves
//! the corners to an axis-aligned rectangle `a*W` by `b*H`; projection pins
//! one side (the "head end") to a centered segment of length `c` times the
//! full edge, producing a trapezoid. Frames are resampled by inverse mapping:
//! each output pixel center is pulled back through the inverted homography
//! and bilinearly interpolated, so no holes appear.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{solve_homography, Homography, Point2, Quad};
use crate::video::{Clip, Frame};

/// Which edge of the frame becomes the shortened head end of a projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Top, Side::Bottom];

    pub fn name(&self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Top => "top",
            Side::Bottom => "bottom",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "top" => Ok(Side::Top),
            "bottom" => Ok(Side::Bottom),
            other => Err(Error::Parse(format!("unknown side {other:?}"))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One spatial transformation class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialSpec {
    Identity,
    /// Stretch width by `a` and height by `b`. Exactly one factor is 1:
    /// uniform scaling changes nothing an aspect-sensitive observer could
    /// use, so only anisotropic entries are allowed.
    Scale { a: f64, b: f64 },
    /// Shrink the `side` edge to `c` times its length, centered.
    Projection { c: f64, side: Side },
}

impl SpatialSpec {
    /// Validated scale spec; exactly one of the factors must equal 1.
    pub fn scale(a: f64, b: f64) -> Result<Self> {
        let spec = SpatialSpec::Scale { a, b };
        spec.validate()?;
        Ok(spec)
    }

    /// Validated projection spec; requires `0 < c < 1`.
    pub fn projection(c: f64, side: Side) -> Result<Self> {
        let spec = SpatialSpec::Projection { c, side };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpatialSpec::Identity => Ok(()),
            SpatialSpec::Scale { a, b } => {
                check_positive_factor("a", a)?;
                check_positive_factor("b", b)?;
                if (a == 1.0) == (b == 1.0) {
                    return Err(Error::InvalidFactor {
                        name: "a,b",
                        value: a,
                        reason: "exactly one scale factor must equal 1".into(),
                    });
                }
                Ok(())
            }
            SpatialSpec::Projection { c, .. } => check_unit_interval("c", c),
        }
    }

    /// Destination corners for a `width` x `height` frame.
    pub fn corners(&self, width: usize, height: usize) -> Result<Quad> {
        match *self {
            SpatialSpec::Identity => Ok(Quad::rect(width as f64, height as f64)),
            SpatialSpec::Scale { a, b } => scale_corners(width, height, a, b),
            SpatialSpec::Projection { c, side } => projection_corners(width, height, c, side),
        }
    }

    /// Output canvas: the corner bounding box, rounded up to whole pixels.
    pub fn canvas(&self, width: usize, height: usize) -> Result<(usize, usize)> {
        let quad = self.corners(width, height)?;
        let (mx, my) = quad.upper_bounds();
        Ok((round_up_dim(mx), round_up_dim(my)))
    }

    /// Homography sending the full frame rectangle onto the spec's corners.
    pub fn homography(&self, width: usize, height: usize) -> Result<Homography> {
        let src = Quad::rect(width as f64, height as f64);
        let dst = self.corners(width, height)?;
        solve_homography(&src, &dst)
    }
}

impl std::fmt::Display for SpatialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpatialSpec::Identity => write!(f, "identity"),
            SpatialSpec::Scale { a, b } => write!(f, "scale:{a}:{b}"),
            SpatialSpec::Projection { c, side } => write!(f, "proj:{c}:{side}"),
        }
    }
}

impl std::str::FromStr for SpatialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["identity"] => Ok(SpatialSpec::Identity),
            ["scale", a, b] => {
                let a = parse_f64(a)?;
                let b = parse_f64(b)?;
                SpatialSpec::scale(a, b)
            }
            ["proj", c, side] => {
                let c = parse_f64(c)?;
                SpatialSpec::projection(c, side.parse()?)
            }
            _ => Err(Error::Parse(format!("unknown spatial spec {s:?}"))),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("expected a number, got {s:?}")))
}

fn check_positive_factor(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidFactor {
            name,
            value,
            reason: "must be a positive finite number".into(),
        });
    }
    Ok(())
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 || value >= 1.0 {
        return Err(Error::InvalidFactor {
            name,
            value,
            reason: "must lie strictly between 0 and 1".into(),
        });
    }
    Ok(())
}

fn round_up_dim(v: f64) -> usize {
    // Tolerate values like 30.000000000000004 from factor arithmetic.
    ((v - 1e-9).ceil().max(1.0)) as usize
}

/// Corners of a frame scaled to `a*W` by `b*H`:
/// `(0,0), (0,b*H), (a*W,b*H), (a*W,0)`.
pub fn scale_corners(width: usize, height: usize, a: f64, b: f64) -> Result<Quad> {
    check_positive_factor("a", a)?;
    check_positive_factor("b", b)?;
    let (w, h) = (width as f64, height as f64);
    Ok(Quad::new([
        Point2::new(0.0, 0.0),
        Point2::new(0.0, b * h),
        Point2::new(a * w, b * h),
        Point2::new(a * w, 0.0),
    ]))
}

/// Trapezoid corners with the `side` edge shrunk to `c` times its length,
/// centered along that edge.
///
/// The right-side case places the right edge endpoints at
/// `(W, (H - c*H)/2)` and `(W, (H + c*H)/2)`; the other sides are the exact
/// 90-degree rotations of that layout, re-expressed in the fixed
/// (top-left, bottom-left, bottom-right, top-right) corner order.
pub fn projection_corners(width: usize, height: usize, c: f64, side: Side) -> Result<Quad> {
    check_unit_interval("c", c)?;
    let (w, h) = (width as f64, height as f64);
    let corners = match side {
        Side::Right => [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, h),
            Point2::new(w, (h + c * h) / 2.0),
            Point2::new(w, (h - c * h) / 2.0),
        ],
        Side::Left => [
            Point2::new(0.0, (h - c * h) / 2.0),
            Point2::new(0.0, (h + c * h) / 2.0),
            Point2::new(w, h),
            Point2::new(w, 0.0),
        ],
        Side::Top => [
            Point2::new((w - c * w) / 2.0, 0.0),
            Point2::new(0.0, h),
            Point2::new(w, h),
            Point2::new((w + c * w) / 2.0, 0.0),
        ],
        Side::Bottom => [
            Point2::new(0.0, 0.0),
            Point2::new((w - c * w) / 2.0, h),
            Point2::new((w + c * w) / 2.0, h),
            Point2::new(w, 0.0),
        ],
    };
    Ok(Quad::new(corners))
}

/// Warps a frame through `h` onto an `out_width` x `out_height` canvas.
///
/// Each output pixel center `(u+0.5, v+0.5)` is mapped through the inverse
/// homography; source coordinates outside the image rectangle fill with
/// black, in-bounds coordinates are clamped to the pixel-center grid and
/// bilinearly interpolated. Output samples are clamped to `[0,1]`.
pub fn warp_frame(frame: &Frame, h: &Homography, out_width: usize, out_height: usize) -> Result<Frame> {
    let inv = h.invert()?;
    let mut out = Frame::zeros(out_width, out_height, frame.channels())?;
    let (w, hgt, channels) = (frame.width(), frame.height(), frame.channels());
    let max_x = (w - 1) as f64;
    let max_y = (hgt - 1) as f64;

    for v in 0..out_height {
        for u in 0..out_width {
            let mapped = match inv.map_point(Point2::new(u as f64 + 0.5, v as f64 + 0.5)) {
                Ok(p) => p,
                // A pixel on the horizon line of a perspective map has no
                // finite preimage; leave it black.
                Err(Error::DegenerateDenominator { .. }) => continue,
                Err(e) => return Err(e),
            };
            let sx = mapped.x - 0.5;
            let sy = mapped.y - 0.5;
            if sx < -0.5 || sx > w as f64 - 0.5 || sy < -0.5 || sy > hgt as f64 - 0.5 {
                continue;
            }
            let cx = sx.clamp(0.0, max_x);
            let cy = sy.clamp(0.0, max_y);
            let x0 = cx.floor() as usize;
            let y0 = cy.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(hgt - 1);
            let fx = cx - x0 as f64;
            let fy = cy - y0 as f64;
            for ch in 0..channels {
                let p00 = frame.get(x0, y0, ch) as f64;
                let p10 = frame.get(x1, y0, ch) as f64;
                let p01 = frame.get(x0, y1, ch) as f64;
                let p11 = frame.get(x1, y1, ch) as f64;
                let value = p00 * (1.0 - fx) * (1.0 - fy)
                    + p10 * fx * (1.0 - fy)
                    + p01 * (1.0 - fx) * fy
                    + p11 * fx * fy;
                out.set(u, v, ch, value.clamp(0.0, 1.0) as f32);
            }
        }
    }
    Ok(out)
}

/// Bilinear resize; a same-size call returns the frame unchanged.
pub fn resize_bilinear(frame: &Frame, out_width: usize, out_height: usize) -> Result<Frame> {
    if out_width == frame.width() && out_height == frame.height() {
        return Ok(frame.clone());
    }
    if out_width == 0 || out_height == 0 {
        return Err(Error::InvalidFrame("resize target must be nonzero".into()));
    }
    let h = Homography::scale(
        out_width as f64 / frame.width() as f64,
        out_height as f64 / frame.height() as f64,
    );
    warp_frame(frame, &h, out_width, out_height)
}

/// Applies one spatial spec to every frame of a clip.
///
/// The homography is computed once from the clip's own dimensions and shared
/// across frames. Identity is a plain resize to the output dimensions.
pub fn apply_spatial(clip: &Clip, spec: &SpatialSpec, out_width: usize, out_height: usize) -> Result<Clip> {
    spec.validate()?;
    if let SpatialSpec::Identity = spec {
        return clip.map_frames(|f| resize_bilinear(f, out_width, out_height));
    }
    let h = spec.homography(clip.width(), clip.height())?;
    clip.map_frames(|f| warp_frame(f, &h, out_width, out_height))
}

/// An axis-aligned crop window in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl CropRect {
    pub const fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        CropRect { x, y, width, height }
    }
}

/// Extracts `rect` from the frame; the rect must lie fully inside.
pub fn crop(frame: &Frame, rect: CropRect) -> Result<Frame> {
    if rect.width == 0
        || rect.height == 0
        || rect.x + rect.width > frame.width()
        || rect.y + rect.height > frame.height()
    {
        return Err(Error::InvalidCrop {
            x: rect.x,
            y: rect.y,
            width: rect.width,
            height: rect.height,
            frame_width: frame.width(),
            frame_height: frame.height(),
        });
    }
    let channels = frame.channels();
    let mut data = Vec::with_capacity(rect.width * rect.height * channels);
    for row in rect.y..rect.y + rect.height {
        let start = (row * frame.width() + rect.x) * channels;
        data.extend_from_slice(&frame.data()[start..start + rect.width * channels]);
    }
    Frame::from_data(rect.width, rect.height, channels, data)
}

/// Uniformly random placement of a `crop_width` x `crop_height` window.
pub fn random_crop_rect<R: Rng>(
    rng: &mut R,
    frame_width: usize,
    frame_height: usize,
    crop_width: usize,
    crop_height: usize,
) -> Result<CropRect> {
    if crop_width == 0 || crop_height == 0 || crop_width > frame_width || crop_height > frame_height {
        return Err(Error::InvalidCrop {
            x: 0,
            y: 0,
            width: crop_width,
            height: crop_height,
            frame_width,
            frame_height,
        });
    }
    let x = rng.gen_range(0..=frame_width - crop_width);
    let y = rng.gen_range(0..=frame_height - crop_height);
    Ok(CropRect::new(x, y, crop_width, crop_height))
}

/// Centered placement of the same window (used for deterministic output).
pub fn center_crop_rect(
    frame_width: usize,
    frame_height: usize,
    crop_width: usize,
    crop_height: usize,
) -> Result<CropRect> {
    if crop_width == 0 || crop_height == 0 || crop_width > frame_width || crop_height > frame_height {
        return Err(Error::InvalidCrop {
            x: 0,
            y: 0,
            width: crop_width,
            height: crop_height,
            frame_width,
            frame_height,
        });
    }
    Ok(CropRect::new(
        (frame_width - crop_width) / 2,
        (frame_height - crop_height) / 2,
        crop_width,
        crop_height,
    ))
}

/// The shortened edge of a projection-transformed frame: its pixel length
/// and which side it sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadEnd {
    pub len: usize,
    pub side: Side,
}

/// `len` x `len` window flush against `side`, centered along the other axis.
pub fn head_end_crop_rect(
    side: Side,
    frame_width: usize,
    frame_height: usize,
    len: usize,
) -> Result<CropRect> {
    if len == 0 || len > frame_width || len > frame_height {
        return Err(Error::InvalidCrop {
            x: 0,
            y: 0,
            width: len,
            height: len,
            frame_width,
            frame_height,
        });
    }
    let (x, y) = match side {
        Side::Left => (0, (frame_height - len) / 2),
        Side::Right => (frame_width - len, (frame_height - len) / 2),
        Side::Top => ((frame_width - len) / 2, 0),
        Side::Bottom => ((frame_width - len) / 2, frame_height - len),
    };
    Ok(CropRect::new(x, y, len, len))
}

/// Resize-and-crop preprocessing for one frame.
///
/// With a head end shorter than `resize_to`, the square flush against that
/// end is cut out first and resized to the crop window's size, keeping the
/// strongly foreshortened region in view. Otherwise the frame is resized to
/// `resize_to` square and the crop window applied.
pub fn preprocess(
    frame: &Frame,
    resize_to: usize,
    crop_rect: CropRect,
    head_end: Option<HeadEnd>,
) -> Result<Frame> {
    if let Some(he) = head_end {
        if he.len < resize_to {
            let square = crop(
                frame,
                head_end_crop_rect(he.side, frame.width(), frame.height(), he.len)?,
            )?;
            return resize_bilinear(&square, crop_rect.width, crop_rect.height);
        }
    }
    let resized = resize_bilinear(frame, resize_to, resize_to)?;
    crop(&resized, crop_rect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_quad(q: &Quad, expected: [(f64, f64); 4]) {
        for (c, (x, y)) in q.corners.iter().zip(expected.iter()) {
            assert!(
                (c.x - x).abs() < 1e-9 && (c.y - y).abs() < 1e-9,
                "corner {:?} != ({x},{y})",
                c
            );
        }
    }

    #[test]
    fn scale_corners_squash_height() {
        let q = scale_corners(100, 100, 1.0, 0.3).unwrap();
        assert_quad(&q, [(0.0, 0.0), (0.0, 30.0), (100.0, 30.0), (100.0, 0.0)]);
    }

    #[test]
    fn scale_corners_identity_and_widen() {
        let q = scale_corners(64, 48, 1.0, 1.0).unwrap();
        assert_quad(&q, [(0.0, 0.0), (0.0, 48.0), (64.0, 48.0), (64.0, 0.0)]);

        let q = scale_corners(200, 100, 1.3, 1.0).unwrap();
        assert_quad(&q, [(0.0, 0.0), (0.0, 100.0), (260.0, 100.0), (260.0, 0.0)]);
    }

    #[test]
    fn scale_corners_reject_nonpositive() {
        assert!(matches!(
            scale_corners(10, 10, 0.0, 1.0),
            Err(Error::InvalidFactor { name: "a", .. })
        ));
        assert!(matches!(
            scale_corners(10, 10, 1.0, -2.0),
            Err(Error::InvalidFactor { name: "b", .. })
        ));
    }

    #[test]
    fn projection_corners_right_half() {
        let q = projection_corners(100, 100, 0.5, Side::Right).unwrap();
        assert_quad(&q, [(0.0, 0.0), (0.0, 100.0), (100.0, 75.0), (100.0, 25.0)]);
    }

    #[test]
    fn projection_corners_top() {
        let q = projection_corners(100, 100, 0.8, Side::Top).unwrap();
        assert_quad(&q, [(10.0, 0.0), (0.0, 100.0), (100.0, 100.0), (90.0, 0.0)]);
    }

    #[test]
    fn projection_corners_reject_out_of_range() {
        for c in [0.0, 1.0, 1.5, -0.2] {
            assert!(matches!(
                projection_corners(10, 10, c, Side::Left),
                Err(Error::InvalidFactor { name: "c", .. })
            ));
        }
    }

    #[test]
    fn projection_corners_approach_rectangle_as_c_grows() {
        let q = projection_corners(100, 100, 0.999, Side::Right).unwrap();
        assert!((q.corners[2].y - 100.0).abs() < 0.1);
        assert!((q.corners[3].y - 0.0).abs() < 0.1);
    }

    /// On a square canvas the four side layouts are one 90-degree rotation
    /// apart: rotating (x,y) -> (S-y, x) carries Right onto Bottom, Bottom
    /// onto Left, Left onto Top, and Top onto Right (as corner sets).
    #[test]
    fn projection_sides_are_rotations_of_each_other() {
        const S: f64 = 100.0;
        let rot = |p: Point2| Point2::new(S - p.y, p.x);
        let cycle = [
            (Side::Right, Side::Bottom),
            (Side::Bottom, Side::Left),
            (Side::Left, Side::Top),
            (Side::Top, Side::Right),
        ];
        for c in [0.8, 0.65, 0.5] {
            for (from, to) in cycle {
                let a = projection_corners(100, 100, c, from).unwrap();
                let b = projection_corners(100, 100, c, to).unwrap();
                for p in a.corners.iter().map(|&p| rot(p)) {
                    let hit = b
                        .corners
                        .iter()
                        .any(|q| (q.x - p.x).abs() < 1e-9 && (q.y - p.y).abs() < 1e-9);
                    assert!(hit, "rotated corner {p:?} missing from {to:?} (c={c})");
                }
            }
        }
    }

    #[test]
    fn identity_warp_reproduces_frame() {
        let mut f = Frame::zeros(17, 11, 3).unwrap();
        for (i, v) in f.data_mut().iter_mut().enumerate() {
            *v = (i % 97) as f32 / 96.0;
        }
        let out = warp_frame(&f, &Homography::IDENTITY, 17, 11).unwrap();
        let max_diff = f
            .data()
            .iter()
            .zip(out.data().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_diff <= 1e-6, "max diff {max_diff}");
    }

    /// Independent reference: nearest-neighbor inverse warp. Bilinear output
    /// must agree except where the interpolation straddles the one
    /// black/white transition row.
    #[test]
    fn vertical_compress_matches_nearest_neighbor_reference() {
        let size = 32usize;
        let mut f = Frame::zeros(size, size, 1).unwrap();
        for y in 0..size / 2 {
            for x in 0..size {
                f.set(x, y, 0, 1.0);
            }
        }
        let spec = SpatialSpec::scale(1.0, 0.5).unwrap();
        let h = spec.homography(size, size).unwrap();
        let out = warp_frame(&f, &h, size, size / 2).unwrap();

        let inv = h.invert().unwrap();
        let mut disagreements = 0;
        for v in 0..size / 2 {
            for u in 0..size {
                let p = inv.map_point(Point2::new(u as f64 + 0.5, v as f64 + 0.5)).unwrap();
                let sx = (p.x - 0.5).round().clamp(0.0, (size - 1) as f64) as usize;
                let sy = (p.y - 0.5).round().clamp(0.0, (size - 1) as f64) as usize;
                let reference = f.get(sx, sy, 0);
                if (out.get(u, v, 0) - reference).abs() > 1e-6 {
                    disagreements += 1;
                    // Only the compressed transition row may differ.
                    assert_eq!(v, size / 4, "unexpected disagreement at ({u},{v})");
                }
            }
        }
        assert!(disagreements <= size, "too many disagreements: {disagreements}");
        // Top of the output is white, bottom is black.
        assert!(out.get(5, 1, 0) > 0.99);
        assert!(out.get(5, size / 2 - 2, 0) < 0.01);
    }

    #[test]
    fn out_of_bounds_fills_black() {
        let mut f = Frame::zeros(8, 8, 1).unwrap();
        for v in f.data_mut() {
            *v = 1.0;
        }
        // Shrink into the top-left quarter; the rest of the canvas has no
        // source preimage and must stay black.
        let h = Homography::scale(0.5, 0.5);
        let out = warp_frame(&f, &h, 8, 8).unwrap();
        assert!(out.get(1, 1, 0) > 0.99);
        assert_eq!(out.get(6, 6, 0), 0.0);
        assert_eq!(out.get(6, 1, 0), 0.0);
    }

    #[test]
    fn resize_downscale_averages() {
        let f = Frame::from_data(2, 2, 1, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = resize_bilinear(&f, 1, 1).unwrap();
        assert!((out.get(0, 0, 0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn spec_canvas_dimensions() {
        let spec = SpatialSpec::scale(1.3, 1.0).unwrap();
        assert_eq!(spec.canvas(64, 64).unwrap(), (84, 64));
        let spec = SpatialSpec::scale(1.0, 0.3).unwrap();
        assert_eq!(spec.canvas(100, 100).unwrap(), (100, 30));
        let spec = SpatialSpec::projection(0.5, Side::Right).unwrap();
        assert_eq!(spec.canvas(64, 64).unwrap(), (64, 64));
        assert_eq!(SpatialSpec::Identity.canvas(64, 48).unwrap(), (64, 48));
    }

    #[test]
    fn apply_spatial_identity_is_resize() {
        let frames: Vec<Frame> = (0..3)
            .map(|i| {
                let mut f = Frame::zeros(16, 16, 1).unwrap();
                f.set(i, i, 0, 1.0);
                f
            })
            .collect();
        let clip = Clip::new(frames).unwrap();
        let same = apply_spatial(&clip, &SpatialSpec::Identity, 16, 16).unwrap();
        assert_eq!(clip, same);
    }

    #[test]
    fn spatial_spec_round_trips_through_strings() {
        let specs = [
            SpatialSpec::Identity,
            SpatialSpec::scale(1.0, 1.3).unwrap(),
            SpatialSpec::projection(0.65, Side::Top).unwrap(),
        ];
        for spec in specs {
            let s = spec.to_string();
            let back: SpatialSpec = s.parse().unwrap();
            assert_eq!(spec, back, "round trip of {s}");
        }
        assert!("scale:1:1".parse::<SpatialSpec>().is_err());
        assert!("proj:1.2:left".parse::<SpatialSpec>().is_err());
        assert!("warp:1".parse::<SpatialSpec>().is_err());
    }

    #[test]
    fn crop_extracts_window() {
        let mut f = Frame::zeros(6, 5, 2).unwrap();
        f.set(2, 1, 0, 0.5);
        f.set(3, 2, 1, 0.75);
        let c = crop(&f, CropRect::new(2, 1, 3, 3)).unwrap();
        assert_eq!(c.width(), 3);
        assert_eq!(c.height(), 3);
        assert_eq!(c.get(0, 0, 0), 0.5);
        assert_eq!(c.get(1, 1, 1), 0.75);
    }

    #[test]
    fn crop_rejects_out_of_bounds() {
        let f = Frame::zeros(6, 5, 1).unwrap();
        let err = crop(&f, CropRect::new(4, 0, 3, 3)).unwrap_err();
        assert!(matches!(err, Error::InvalidCrop { .. }));
        assert!(crop(&f, CropRect::new(0, 0, 0, 3)).is_err());
    }

    #[test]
    fn random_crop_rect_stays_in_bounds_and_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = random_crop_rect(&mut rng, 64, 84, 32, 32).unwrap();
            assert!(r.x + r.width <= 64);
            assert!(r.y + r.height <= 84);
        }
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(
            random_crop_rect(&mut a, 64, 64, 32, 32).unwrap(),
            random_crop_rect(&mut b, 64, 64, 32, 32).unwrap()
        );
        assert!(random_crop_rect(&mut a, 16, 16, 32, 32).is_err());
    }

    #[test]
    fn head_end_rects_hug_their_side() {
        assert_eq!(
            head_end_crop_rect(Side::Right, 64, 64, 32).unwrap(),
            CropRect::new(32, 16, 32, 32)
        );
        assert_eq!(
            head_end_crop_rect(Side::Left, 64, 64, 32).unwrap(),
            CropRect::new(0, 16, 32, 32)
        );
        assert_eq!(
            head_end_crop_rect(Side::Top, 64, 64, 51).unwrap(),
            CropRect::new(6, 0, 51, 51)
        );
        assert_eq!(
            head_end_crop_rect(Side::Bottom, 64, 64, 51).unwrap(),
            CropRect::new(6, 13, 51, 51)
        );
        assert!(head_end_crop_rect(Side::Top, 64, 64, 65).is_err());
    }

    #[test]
    fn preprocess_full_frame_rect_is_plain_resize() {
        let mut f = Frame::zeros(32, 32, 1).unwrap();
        for (i, v) in f.data_mut().iter_mut().enumerate() {
            *v = (i % 31) as f32 / 30.0;
        }
        let out = preprocess(&f, 64, CropRect::new(0, 0, 64, 64), None).unwrap();
        let direct = resize_bilinear(&f, 64, 64).unwrap();
        assert_eq!(out, direct);
    }

    #[test]
    fn preprocess_head_end_path_keeps_the_short_edge() {
        let mut f = Frame::zeros(64, 64, 1).unwrap();
        // Bright column flush against the right edge.
        for y in 0..64 {
            f.set(63, y, 0, 1.0);
        }
        let he = HeadEnd { len: 32, side: Side::Right };
        let out = preprocess(&f, 64, CropRect::new(0, 0, 32, 32), Some(he)).unwrap();
        assert_eq!(out.width(), 32);
        assert_eq!(out.height(), 32);
        // 32x32 head square resized to 32x32 is the square itself.
        let square = crop(&f, head_end_crop_rect(Side::Right, 64, 64, 32).unwrap()).unwrap();
        assert_eq!(out, square);
    }

    #[test]
    fn preprocess_long_head_end_falls_back_to_resize_crop() {
        let f = Frame::zeros(64, 64, 1).unwrap();
        let he = HeadEnd { len: 64, side: Side::Right };
        let rect = CropRect::new(10, 10, 32, 32);
        let with = preprocess(&f, 64, rect, Some(he)).unwrap();
        let without = preprocess(&f, 64, rect, None).unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn identity_spatial_then_preprocess_equals_preprocess() {
        let mut f = Frame::zeros(48, 48, 1).unwrap();
        for (i, v) in f.data_mut().iter_mut().enumerate() {
            *v = ((i * 13) % 101) as f32 / 100.0;
        }
        let clip = Clip::new(vec![f.clone()]).unwrap();
        let passed = apply_spatial(&clip, &SpatialSpec::Identity, 48, 48).unwrap();
        let rect = CropRect::new(5, 9, 24, 24);
        let a = preprocess(passed.frame(0), 64, rect, None).unwrap();
        let b = preprocess(&f, 64, rect, None).unwrap();
        assert_eq!(a, b);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng as _;

        fn arb_spec() -> impl Strategy<Value = SpatialSpec> {
            prop_oneof![
                Just(SpatialSpec::Identity),
                (1.05f64..1.5).prop_map(|a| SpatialSpec::Scale { a, b: 1.0 }),
                (1.05f64..1.5).prop_map(|b| SpatialSpec::Scale { a: 1.0, b }),
                (0.3f64..0.9, 0usize..4).prop_map(|(c, i)| SpatialSpec::Projection {
                    c,
                    side: Side::ALL[i],
                }),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn warped_samples_stay_in_range(spec in arb_spec(), seed in 0u64..1000) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut f = Frame::zeros(24, 24, 1).unwrap();
                for v in f.data_mut() {
                    *v = rng.gen_range(0.0..=1.0);
                }
                let (cw, chh) = spec.canvas(24, 24).unwrap();
                let clip = Clip::new(vec![f]).unwrap();
                let out = apply_spatial(&clip, &spec, cw, chh).unwrap();
                for s in out.frame(0).data() {
                    prop_assert!(s.is_finite());
                    prop_assert!((0.0..=1.0).contains(s));
                }
            }
        }
    }
}
