//! Raster types and the image plumbing shared by every stage: file IO, CT
//! windowing, binary morphology and resizing.
//!
//! All real-valued rasters live on the unit interval. The 0..=255 thresholds
//! used at the file boundary map to `t / 255`.

mod io;
mod morphology;
mod resize;
mod window;

pub(crate) use io::write_atomic;
pub use io::{load_image, load_unit_image, save_image, BitDepth, LoadedImage, UnitRaster};
pub use morphology::{dilate, erode, morphology, MorphOp, SeShape, StructuringElement};
pub use resize::bilinear_resize;
pub use window::{hu_window, Window, HU_OFFSET};

use crate::error::{Error, Result};

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidArgument(format!(
            "data length {len} does not match {width}x{height}"
        )));
    }
    Ok(())
}

fn check_unit(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(i) => Err(Error::InvalidArgument(format!(
            "value {} at index {i} is outside [0, 1]",
            data[i]
        ))),
        None => Ok(()),
    }
}

macro_rules! unit_raster {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            width: usize,
            height: usize,
            data: Vec<f64>,
        }

        impl $name {
            /// Row-major data; every value must lie in `[0, 1]`.
            pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
                check_len(width, height, data.len())?;
                check_unit(&data)?;
                Ok(Self { width, height, data })
            }

            pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
                Self::new(width, height, vec![value; width.saturating_mul(height)])
            }

            /// Builds from arbitrary reals by clamping into `[0, 1]`.
            pub fn from_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Result<Self> {
                check_len(width, height, data.len())?;
                for v in &mut data {
                    *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
                }
                Ok(Self { width, height, data })
            }

            #[inline]
            pub fn width(&self) -> usize {
                self.width
            }

            #[inline]
            pub fn height(&self) -> usize {
                self.height
            }

            #[inline]
            pub fn dims(&self) -> (usize, usize) {
                (self.width, self.height)
            }

            #[inline]
            pub fn len(&self) -> usize {
                self.data.len()
            }

            #[inline]
            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            #[inline]
            pub fn get(&self, x: usize, y: usize) -> f64 {
                self.data[y * self.width + x]
            }

            #[inline]
            pub fn data(&self) -> &[f64] {
                &self.data
            }

            pub fn into_data(self) -> Vec<f64> {
                self.data
            }
        }

        impl UnitRaster for $name {
            fn dims(&self) -> (usize, usize) {
                (self.width, self.height)
            }

            fn unit_value(&self, index: usize) -> f64 {
                self.data[index]
            }
        }
    };
}

unit_raster!(
    /// Single-channel intensity image with values in `[0, 1]`.
    GrayImage
);

unit_raster!(
    /// Per-pixel lesion opacity. Foreground is 1 and background is 0, so a
    /// pixel's alpha is its position on the mask scale.
    SoftMask
);

impl From<SoftMask> for GrayImage {
    fn from(mask: SoftMask) -> Self {
        GrayImage {
            width: mask.width,
            height: mask.height,
            data: mask.data,
        }
    }
}

impl From<&BinaryMask> for GrayImage {
    fn from(mask: &BinaryMask) -> Self {
        GrayImage {
            width: mask.width,
            height: mask.height,
            data: mask.data.iter().map(|&b| f64::from(u8::from(b))).collect(),
        }
    }
}

impl From<GrayImage> for SoftMask {
    fn from(img: GrayImage) -> Self {
        SoftMask {
            width: img.width,
            height: img.height,
            data: img.data,
        }
    }
}

/// 16-bit CT slice as exported: `stored = HU + 32768`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCtSlice {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl RawCtSlice {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        check_len(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    /// Stored values rescaled by `1 / 65535`, with no windowing.
    pub fn to_unit(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f64::from(v) / 65535.0).collect(),
        }
    }
}

/// Row-major binary mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_len(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width.saturating_mul(height)])
    }

    pub fn ones(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width.saturating_mul(height)])
    }

    /// Accepts 0/1 bytes; any other value is rejected.
    pub fn from_u8(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        let bits = data
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::InvalidArgument(format!(
                    "mask value {v} at index {i} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, bits)
    }

    /// Pixels with value `>= threshold` become foreground.
    pub fn from_threshold(img: &GrayImage, threshold: f64) -> Self {
        BinaryMask {
            width: img.width,
            height: img.height,
            data: img.data.iter().map(|&v| v >= threshold).collect(),
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    #[inline]
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&b| u8::from(b)).collect()
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims()
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

impl UnitRaster for BinaryMask {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn unit_value(&self, index: usize) -> f64 {
        if self.data[index] {
            1.0
        } else {
            0.0
        }
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
