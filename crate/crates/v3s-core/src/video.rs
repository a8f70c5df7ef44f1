//! In-memory frames and clips.
//!
//! Samples are `f32` in `[0, 1]`, stored row-major per frame and frame-major
//! per clip. Channel count is carried explicitly so grayscale (`C = 1`) and
//! RGB (`C = 3`) move through the same code paths.

use crate::error::{Error, Result};

/// A single image: `height * width * channels` samples, row-major,
/// channels interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Frame {
    /// All-zero (black) frame.
    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::InvalidFrame(format!(
                "frame dimensions must be nonzero, got {width}x{height}x{channels}"
            )));
        }
        Ok(Frame {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        })
    }

    /// Wraps an existing buffer; its length must be exactly
    /// `width * height * channels`.
    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::InvalidFrame(format!(
                "frame dimensions must be nonzero, got {width}x{height}x{channels}"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::InvalidFrame(format!(
                "buffer length {} does not match {width}x{height}x{channels} = {expected}",
                data.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        debug_assert!(x < self.width && y < self.height && c < self.channels);
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: f32) {
        debug_assert!(x < self.width && y < self.height && c < self.channels);
        self.data[(y * self.width + x) * self.channels + c] = value;
    }
}

/// An ordered sequence of frames sharing one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    frames: Vec<Frame>,
}

/// A source video is just a clip; the alias marks intent at call sites.
pub type Video = Clip;

impl Clip {
    /// Builds from frames, which must be nonempty and dimensionally uniform.
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidClip("clip must contain at least one frame".into()))?;
        let (w, h, c) = (first.width(), first.height(), first.channels());
        for (i, f) in frames.iter().enumerate() {
            if f.width() != w || f.height() != h || f.channels() != c {
                return Err(Error::InvalidClip(format!(
                    "frame {i} is {}x{}x{}, expected {w}x{h}x{c}",
                    f.width(),
                    f.height(),
                    f.channels()
                )));
            }
        }
        Ok(Clip { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }

    pub fn frame(&self, t: usize) -> &Frame {
        &self.frames[t]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    /// Gathers frames at `indices` into a new clip.
    pub fn select(&self, indices: &[usize]) -> Result<Clip> {
        if indices.is_empty() {
            return Err(Error::InvalidClip("cannot select zero frames".into()));
        }
        let mut frames = Vec::with_capacity(indices.len());
        for &i in indices {
            let f = self.frames.get(i).ok_or(Error::ClipTooShort {
                needed: i + 1,
                available: self.frames.len(),
                video_id: None,
            })?;
            frames.push(f.clone());
        }
        Ok(Clip { frames })
    }

    /// Applies `op` to each frame independently.
    pub fn map_frames<F>(&self, mut op: F) -> Result<Clip>
    where
        F: FnMut(&Frame) -> Result<Frame>,
    {
        let mut frames = Vec::with_capacity(self.frames.len());
        for f in &self.frames {
            frames.push(op(f)?);
        }
        Clip::new(frames)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_indexing_is_row_major_interleaved() {
        let mut f = Frame::zeros(3, 2, 2).unwrap();
        f.set(1, 0, 1, 0.5);
        f.set(2, 1, 0, 0.25);
        assert_eq!(f.data()[1 * 2 + 1], 0.5); // (x=1, y=0, c=1)
        assert_eq!(f.data()[(1 * 3 + 2) * 2], 0.25); // (x=2, y=1, c=0)
        assert_eq!(f.get(1, 0, 1), 0.5);
        assert_eq!(f.get(2, 1, 0), 0.25);
    }

    #[test]
    fn frame_rejects_zero_dims_and_bad_length() {
        assert!(Frame::zeros(0, 4, 1).is_err());
        assert!(Frame::from_data(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(Frame::from_data(2, 2, 1, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn clip_rejects_mixed_geometry() {
        let a = Frame::zeros(4, 4, 1).unwrap();
        let b = Frame::zeros(4, 5, 1).unwrap();
        let err = Clip::new(vec![a, b]).unwrap_err();
        assert!(matches!(err, Error::InvalidClip(_)));
    }

    #[test]
    fn clip_rejects_empty() {
        assert!(Clip::new(vec![]).is_err());
    }

    #[test]
    fn select_gathers_and_reports_short_clips() {
        let frames: Vec<Frame> = (0..5)
            .map(|i| {
                let mut f = Frame::zeros(2, 2, 1).unwrap();
                f.set(0, 0, 0, i as f32 / 10.0);
                f
            })
            .collect();
        let clip = Clip::new(frames).unwrap();

        let picked = clip.select(&[0, 2, 4]).unwrap();
        assert_eq!(picked.len(), 3);
        assert_eq!(picked.frame(1).get(0, 0, 0), 0.2);

        let err = clip.select(&[0, 7]).unwrap_err();
        match err {
            Error::ClipTooShort { needed, available, .. } => {
                assert_eq!(needed, 8);
                assert_eq!(available, 5);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }
}
