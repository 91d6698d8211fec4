use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcut::GrabCutParams;
use crate::imaging::Window;
use crate::labels::DEFAULT_THRESHOLD;
use crate::matting::MattingParams;
use crate::trimap::{BandParams, RecistTrimapParams};

/// Every tunable constant of the labeling pipeline. Missing keys take their
/// defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root of all randomness; each case derives its own stream from it.
    pub seed: u64,
    /// Parallel cases; 0 uses all cores.
    pub workers: usize,
    /// Window for raw CT entries without their own.
    pub window: Window,
    /// `grabcut.seed` is replaced per case by a stream derived from `seed`.
    pub grabcut: GrabCutParams,
    /// Dilation radius of the rasterized RECIST axes.
    pub recist_band: usize,
    /// Background frame width; `None` is 3% of the short side.
    pub frame: Option<usize>,
    pub band: BandParams,
    pub matting: MattingParams,
    /// Multirater agreement for sure foreground; `None` means all raters.
    pub min_raters: Option<usize>,
    /// Soft-mask threshold when a binary mask is needed (evaluation, QA).
    pub threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            workers: 0,
            window: Window::LUNG,
            grabcut: GrabCutParams::default(),
            recist_band: 1,
            frame: None,
            band: BandParams::default(),
            matting: MattingParams::default(),
            min_raters: None,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.grabcut.components == 0 {
            return bad("grabcut.components must be >= 1".into());
        }
        if self.grabcut.iterations == 0 {
            return bad("grabcut.iterations must be >= 1".into());
        }
        if !(self.grabcut.gamma >= 0.0) || !self.grabcut.gamma.is_finite() {
            return bad(format!("grabcut.gamma must be finite and >= 0, got {}", self.grabcut.gamma));
        }
        if self.frame == Some(0) {
            return bad("frame must be >= 1".into());
        }
        if !(self.band.se_scale >= 0.0) || !self.band.se_scale.is_finite() {
            return bad(format!("band.se_scale must be finite and >= 0, got {}", self.band.se_scale));
        }
        if self.band.se_radius == Some(0) {
            return bad("band.se_radius must be >= 1".into());
        }
        let m = &self.matting;
        if m.window_radius == 0 || !(m.eps > 0.0) || !(m.lambda_c > 0.0) || !(m.tol > 0.0) || m.max_iters == 0 {
            return bad("matting parameters must all be positive".into());
        }
        if !(self.window.width > 0.0) {
            return bad(format!("window.width must be positive, got {}", self.window.width));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold must be in [0, 1], got {}", self.threshold));
        }
        if self.min_raters == Some(0) {
            return bad("min_raters must be >= 1".into());
        }
        Ok(())
    }

    /// Grabcut and morphology settings for one case.
    pub fn recist_params(&self, case_seed: u64) -> RecistTrimapParams {
        RecistTrimapParams {
            grabcut: GrabCutParams {
                seed: case_seed,
                ..self.grabcut
            },
            band: self.recist_band,
            frame: self.frame,
            morphology: self.band,
        }
    }

    /// Stable per-case seed: FNV-1a of the case id mixed into the root seed.
    pub fn case_seed(&self, case_id: &str) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in case_id.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        splitmix(self.seed ^ h)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
