//! Raster and binary images.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row-major image with 1 (gray) or 3 (RGB) interleaved channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!("images need 1 or 3 channels, got {channels}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image dimensions must be >= 1".into()));
        }
        let n = width * height * channels;
        if data.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: data.len() });
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(RasterImage { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Sets a sample, clamping it into `[0, 1]`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v.clamp(0.0, 1.0);
    }

    /// Mean over channels.
    #[inline]
    pub fn gray(&self, x: usize, y: usize) -> f64 {
        let k = (y * self.width + x) * self.channels;
        if self.channels == 1 {
            self.data[k]
        } else {
            (self.data[k] + self.data[k + 1] + self.data[k + 2]) / 3.0
        }
    }

    /// RGB triple; gray images repeat their single channel.
    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [f64; 3] {
        let k = (y * self.width + x) * self.channels;
        if self.channels == 1 {
            [self.data[k]; 3]
        } else {
            [self.data[k], self.data[k + 1], self.data[k + 2]]
        }
    }

    pub fn to_gray(&self) -> RasterImage {
        let mut data = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                data.push(self.gray(x, y));
            }
        }
        RasterImage { width: self.width, height: self.height, channels: 1, data }
    }

    /// Single-channel image of one channel (the gray value for gray input).
    pub fn channel(&self, c: usize) -> Result<RasterImage> {
        if c >= 3 {
            return Err(Error::InvalidInput(format!("channel {c} out of range")));
        }
        let mut data = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                data.push(self.rgb(x, y)[c]);
            }
        }
        Ok(RasterImage { width: self.width, height: self.height, channels: 1, data })
    }

    /// `1 − v` on every sample.
    pub fn inverted(&self) -> RasterImage {
        RasterImage { data: self.data.iter().map(|v| 1.0 - v).collect(), ..self.clone() }
    }
}

/// Row-major binary mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, got: data.len() });
        }
        Ok(BinaryImage { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryImage { width, height, data: vec![false; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}
