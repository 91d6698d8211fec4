use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, GrayImage, UnitRaster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrimapLabel {
    Background,
    Unknown,
    Foreground,
}

impl TrimapLabel {
    /// 8-bit file encoding.
    pub fn level(self) -> u8 {
        match self {
            TrimapLabel::Background => 0,
            TrimapLabel::Unknown => 128,
            TrimapLabel::Foreground => 255,
        }
    }
}

/// Per-pixel constraint map with non-empty foreground and background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trimap {
    width: usize,
    height: usize,
    labels: Vec<TrimapLabel>,
}

impl Trimap {
    pub fn new(width: usize, height: usize, labels: Vec<TrimapLabel>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for a {width}x{height} trimap",
                labels.len()
            )));
        }
        if !labels.contains(&TrimapLabel::Foreground) {
            return Err(Error::InvalidTrimap("no foreground pixel".into()));
        }
        if !labels.contains(&TrimapLabel::Background) {
            return Err(Error::InvalidTrimap("no background pixel".into()));
        }
        Ok(Trimap {
            width,
            height,
            labels,
        })
    }

    /// Assembles a trimap from disjoint foreground and background masks;
    /// everything else is unknown.
    pub fn from_masks(foreground: &BinaryMask, background: &BinaryMask) -> Result<Self> {
        crate::imaging::ensure_same_dims(foreground.dims(), background.dims())?;
        let labels = foreground
            .data()
            .iter()
            .zip(background.data())
            .map(|(&f, &b)| match (f, b) {
                (true, true) => Err(Error::InvalidTrimap("foreground and background overlap".into())),
                (true, false) => Ok(TrimapLabel::Foreground),
                (false, true) => Ok(TrimapLabel::Background),
                (false, false) => Ok(TrimapLabel::Unknown),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(foreground.width(), foreground.height(), labels)
    }

    /// Reads the 8-bit encoding: pure black is background, pure white is
    /// foreground, any other level is unknown.
    pub fn from_image(img: &GrayImage) -> Result<Self> {
        let labels = img
            .data()
            .iter()
            .map(|&v| match (v * 255.0).round() as u8 {
                0 => TrimapLabel::Background,
                255 => TrimapLabel::Foreground,
                _ => TrimapLabel::Unknown,
            })
            .collect();
        Self::new(img.width(), img.height(), labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[TrimapLabel] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> TrimapLabel {
        self.labels[y * self.width + x]
    }

    pub fn count(&self, label: TrimapLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn unknown_fraction(&self) -> f64 {
        self.count(TrimapLabel::Unknown) as f64 / self.labels.len() as f64
    }

    pub fn mask_of(&self, label: TrimapLabel) -> BinaryMask {
        BinaryMask::new(self.width, self.height, self.labels.iter().map(|&l| l == label).collect())
            .expect("trimap dimensions are valid")
    }
}

impl UnitRaster for Trimap {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn unit_value(&self, index: usize) -> f64 {
        f64::from(self.labels[index].level()) / 255.0
    }
}
