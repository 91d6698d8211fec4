//! Synthetic lesion phantoms with analytic ground truth: a bright disk or
//! rotated ellipse on a darker background, plus Gaussian noise.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::manifest::{manifest_to_jsonl, Annotation, ManifestEntry};
use crate::error::{Error, Result};
use crate::graphcut::{Point, RecistAnnotation};
use crate::imaging::{dilate, erode, save_image, write_atomic, BinaryMask, BitDepth, GrayImage, StructuringElement};

/// RECIST axes span this fraction of each semi-axis on either side of the centre.
pub const AXIS_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhantomShape {
    Disk { radius: f64 },
    /// `angle` in radians, measured from the x axis towards +y.
    Ellipse { semi_major: f64, semi_minor: f64, angle: f64 },
}

impl PhantomShape {
    fn axes(&self) -> (f64, f64, f64) {
        match *self {
            PhantomShape::Disk { radius } => (radius, radius, 0.0),
            PhantomShape::Ellipse {
                semi_major,
                semi_minor,
                angle,
            } => (semi_major, semi_minor, angle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub center: (f64, f64),
    pub shape: PhantomShape,
    pub foreground: f64,
    pub background: f64,
    pub noise_sigma: f64,
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: GrayImage,
    /// Pixels whose centre lies inside the shape.
    pub truth: BinaryMask,
    pub recist: RecistAnnotation,
}

impl PhantomSpec {
    /// Centred disk, intensity 0.8 on 0.2, noise σ = 0.05.
    pub fn disk(size: usize, radius: f64) -> Self {
        PhantomSpec {
            width: size,
            height: size,
            center: ((size as f64 - 1.0) / 2.0, (size as f64 - 1.0) / 2.0),
            shape: PhantomShape::Disk { radius },
            foreground: 0.8,
            background: 0.2,
            noise_sigma: 0.05,
        }
    }

    /// Random centre and size; ellipses when `ellipses` is set, else disks.
    pub fn random(size: usize, ellipses: bool, rng: &mut impl Rng) -> Self {
        let s = size as f64;
        let jitter = 0.08 * s;
        let mut spec = PhantomSpec::disk(size, rng.random_range(0.18..0.26) * s);
        spec.center.0 += rng.random_range(-jitter..=jitter);
        spec.center.1 += rng.random_range(-jitter..=jitter);
        if ellipses {
            let r = spec.shape.axes().0;
            spec.shape = PhantomShape::Ellipse {
                semi_major: r * rng.random_range(1.0..1.15),
                semi_minor: r * rng.random_range(0.75..1.0),
                angle: rng.random_range(0.0..std::f64::consts::PI),
            };
        }
        spec
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (a, b, angle) = self.shape.axes();
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let (sin, cos) = angle.sin_cos();
        let u = (dx * cos + dy * sin) / a;
        let v = (-dx * sin + dy * cos) / b;
        u * u + v * v <= 1.0
    }

    pub fn truth(&self) -> Result<BinaryMask> {
        let w = self.width;
        let data = (0..w * self.height)
            .map(|i| self.contains((i % w) as f64, (i / w) as f64))
            .collect();
        BinaryMask::new(w, self.height, data)
    }

    /// Axes along the principal directions, `AXIS_FRACTION` of each semi-axis.
    pub fn recist(&self) -> Result<RecistAnnotation> {
        let (a, b, angle) = self.shape.axes();
        let (sin, cos) = angle.sin_cos();
        let (cx, cy) = self.center;
        let (la, sa) = (AXIS_FRACTION * a, AXIS_FRACTION * b);
        RecistAnnotation::new(
            (Point::new(cx - la * cos, cy - la * sin), Point::new(cx + la * cos, cy + la * sin)),
            (Point::new(cx + sa * sin, cy - sa * cos), Point::new(cx - sa * sin, cy + sa * cos)),
        )
    }

    pub fn render(&self, seed: u64) -> Result<Phantom> {
        let (a, b, _) = self.shape.axes();
        if !(a > 0.0 && b > 0.0) || a < b {
            return Err(Error::InvalidArgument(format!("bad phantom axes {a}, {b}")));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        let truth = self.truth()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, self.noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let data = truth
            .data()
            .iter()
            .map(|&inside| {
                let base = if inside { self.foreground } else { self.background };
                base + noise.sample(&mut rng)
            })
            .collect();
        Ok(Phantom {
            image: GrayImage::from_clamped(self.width, self.height, data)?,
            truth,
            recist: self.recist()?,
        })
    }
}

/// Annotation written into a generated manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomAnnotation {
    #[default]
    Recist,
    /// The ground truth itself.
    Binary,
    /// Three raters: truth eroded by 1, truth, truth dilated by 1.
    Multirater,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomSetParams {
    pub count: usize,
    pub size: usize,
    pub seed: u64,
    pub ellipses: bool,
    pub annotation: PhantomAnnotation,
}

impl Default for PhantomSetParams {
    fn default() -> Self {
        PhantomSetParams {
            count: 10,
            size: 64,
            seed: 0,
            ellipses: false,
            annotation: PhantomAnnotation::Recist,
        }
    }
}

fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    save_image(&GrayImage::from(mask), path, BitDepth::Eight)
}

/// Writes `phantom_NNN.pgm`, `phantom_NNN_gt.pgm`, any annotation masks and
/// `manifest.jsonl` into `dir`. Returns the manifest path.
pub fn write_phantom_set(dir: impl AsRef<Path>, params: &PhantomSetParams) -> Result<PathBuf> {
    let dir = dir.as_ref();
    if params.count == 0 || params.size < 16 {
        return Err(Error::InvalidArgument("need count >= 1 and size >= 16".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut entries = Vec::with_capacity(params.count);
    for i in 0..params.count {
        let id = format!("phantom_{i:03}");
        let spec = PhantomSpec::random(params.size, params.ellipses, &mut rng);
        let phantom = spec.render(rng.random())?;
        let image = PathBuf::from(format!("{id}.pgm"));
        let gt = PathBuf::from(format!("{id}_gt.pgm"));
        save_image(&phantom.image, dir.join(&image), BitDepth::Eight)?;
        save_mask(&phantom.truth, &dir.join(&gt))?;
        let annotation = match params.annotation {
            PhantomAnnotation::Recist => Annotation::Recist {
                axes: phantom.recist.to_coords(),
            },
            PhantomAnnotation::Binary => Annotation::Binary { mask: gt.clone() },
            PhantomAnnotation::Multirater => {
                let se = StructuringElement::disk(1)?;
                let raters = [erode(&phantom.truth, &se), phantom.truth.clone(), dilate(&phantom.truth, &se)];
                let mut masks = Vec::new();
                for (k, m) in raters.iter().enumerate() {
                    let p = PathBuf::from(format!("{id}_r{k}.pgm"));
                    save_mask(m, &dir.join(&p))?;
                    masks.push(p);
                }
                Annotation::Multirater { masks, min_raters: None }
            }
        };
        entries.push(ManifestEntry {
            case_id: id,
            image,
            annotation,
            ground_truth: Some(gt),
            window: None,
        });
    }
    let manifest = dir.join("manifest.jsonl");
    write_atomic(&manifest, manifest_to_jsonl(&entries)?.as_bytes())?;
    Ok(manifest)
}
