use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::manifest::{Annotation, ManifestEntry};
use crate::error::{Error, Result};
use crate::graphcut::RecistAnnotation;
use crate::imaging::{
    ensure_same_dims, hu_window, load_image, save_image, write_atomic, BinaryMask, BitDepth, GrayImage, LoadedImage,
    SoftMask,
};
use crate::labels::binarize;
use crate::matting::{matte, Trimap, TrimapLabel};
use crate::metrics::confusion;
use crate::trimap::{trimap_from_binary, trimap_from_multirater, trimap_from_recist};

/// Per-case diagnostics for manual review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub case_id: String,
    pub strategy: String,
    pub width: usize,
    pub height: usize,
    pub unknown_fraction: f64,
    /// `max(1 − α)` over sure-foreground pixels.
    pub fg_max_deviation: f64,
    /// `max(α)` over sure-background pixels.
    pub bg_max_deviation: f64,
    pub cg_iterations: usize,
    pub cg_residual: f64,
    pub trimap_ms: f64,
    /// Laplacian construction plus solve.
    pub matting_ms: f64,
    /// Dice of the thresholded soft mask against the ground truth, if given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dice_vs_ground_truth: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub trimap: Trimap,
    pub soft_mask: SoftMask,
    pub report: QualityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub case_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub processed: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub failures: Vec<CaseFailure>,
    pub mean_trimap_ms: Option<f64>,
    pub mean_matting_ms: Option<f64>,
    pub mean_dice_vs_ground_truth: Option<f64>,
    pub wall_ms: f64,
}

/// Output files of one case inside the run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasePaths {
    pub soft_mask: PathBuf,
    pub trimap: PathBuf,
    pub report: PathBuf,
}

impl CasePaths {
    pub fn new(out_dir: &Path, case_id: &str) -> Self {
        CasePaths {
            soft_mask: out_dir.join(format!("{case_id}_soft.pgm")),
            trimap: out_dir.join(format!("{case_id}_trimap.pgm")),
            report: out_dir.join(format!("{case_id}_report.json")),
        }
    }
}

/// Loads a mask file; pixels at or above half scale are set.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    Ok(BinaryMask::from_threshold(&load_image(path)?.into_unit(), 0.5))
}

/// Grayscale image of an entry; raw 16-bit CT is windowed first.
pub fn load_case_image(entry: &ManifestEntry, config: &PipelineConfig) -> Result<GrayImage> {
    match load_image(&entry.image)? {
        LoadedImage::Gray(img) => Ok(img),
        LoadedImage::Raw(raw) => hu_window(&raw, entry.window.unwrap_or(config.window)),
    }
}

fn load_matching_mask(path: &Path, dims: (usize, usize)) -> Result<BinaryMask> {
    let m = load_mask(path)?;
    ensure_same_dims(dims, m.dims())?;
    Ok(m)
}

pub fn build_trimap(img: &GrayImage, entry: &ManifestEntry, config: &PipelineConfig) -> Result<Trimap> {
    match &entry.annotation {
        Annotation::Recist { axes } => {
            let ann = RecistAnnotation::from_coords(*axes)?;
            trimap_from_recist(img, &ann, &config.recist_params(config.case_seed(&entry.case_id)))
        }
        Annotation::Multirater { masks, min_raters } => {
            let masks = masks
                .iter()
                .map(|p| load_matching_mask(p, img.dims()))
                .collect::<Result<Vec<_>>>()?;
            trimap_from_multirater(&masks, min_raters.or(config.min_raters))
        }
        Annotation::Binary { mask } => trimap_from_binary(&load_matching_mask(mask, img.dims())?, &config.band),
    }
}

fn max_over(alpha: &SoftMask, trimap: &Trimap, label: TrimapLabel, f: impl Fn(f64) -> f64) -> f64 {
    alpha
        .data()
        .iter()
        .zip(trimap.labels())
        .filter(|(_, &l)| l == label)
        .map(|(&a, _)| f(a))
        .fold(0.0, f64::max)
}

/// Window, trimap, matte and report for one entry; touches no output files.
pub fn label_case(entry: &ManifestEntry, config: &PipelineConfig) -> Result<CaseResult> {
    let img = load_case_image(entry, config)?;
    let start = Instant::now();
    let trimap = build_trimap(&img, entry, config)?;
    let trimap_ms = start.elapsed().as_secs_f64() * 1e3;
    let outcome = matte(&img, &trimap, &config.matting)?;
    let matting_ms = outcome.laplacian_ms + outcome.solve_ms;
    let solve = outcome.solve;
    let dice_vs_ground_truth = match &entry.ground_truth {
        Some(p) => {
            let gt = load_matching_mask(p, img.dims())?;
            Some(confusion(&binarize(&solve.alpha, config.threshold), &gt)?.dice())
        }
        None => None,
    };
    let report = QualityReport {
        case_id: entry.case_id.clone(),
        strategy: entry.annotation.strategy().to_string(),
        width: img.width(),
        height: img.height(),
        unknown_fraction: trimap.unknown_fraction(),
        fg_max_deviation: max_over(&solve.alpha, &trimap, TrimapLabel::Foreground, |a| 1.0 - a),
        bg_max_deviation: max_over(&solve.alpha, &trimap, TrimapLabel::Background, |a| a),
        cg_iterations: solve.iterations,
        cg_residual: solve.residual,
        trimap_ms,
        matting_ms,
        dice_vs_ground_truth,
    };
    Ok(CaseResult {
        trimap,
        soft_mask: solve.alpha,
        report,
    })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn process(entry: &ManifestEntry, config: &PipelineConfig, out_dir: &Path) -> Result<QualityReport> {
    let result = label_case(entry, config)?;
    let paths = CasePaths::new(out_dir, &entry.case_id);
    save_image(&result.soft_mask, &paths.soft_mask, BitDepth::Eight)?;
    save_image(&result.trimap, &paths.trimap, BitDepth::Eight)?;
    write_json(&result.report, &paths.report)?;
    Ok(result.report)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Labels every entry in parallel and writes `summary.json`. A failing entry
/// is recorded and skipped; only setup errors (output directory, thread
/// pool, summary write) abort the run.
pub fn run_pipeline(entries: &[ManifestEntry], config: &PipelineConfig, out_dir: impl AsRef<Path>) -> Result<RunSummary> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let results: Vec<Result<QualityReport>> =
        pool.install(|| entries.par_iter().map(|e| process(e, config, out_dir)).collect());

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ok(r) => reports.push(r),
            Err(e) => {
                log::warn!("case {} failed: {e}", entry.case_id);
                failures.push(CaseFailure {
                    case_id: entry.case_id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    let summary = RunSummary {
        processed: entries.len(),
        succeeded: reports.len(),
        failed: failures.len(),
        failures,
        mean_trimap_ms: mean(reports.iter().map(|r| r.trimap_ms)),
        mean_matting_ms: mean(reports.iter().map(|r| r.matting_ms)),
        mean_dice_vs_ground_truth: mean(reports.iter().filter_map(|r| r.dice_vs_ground_truth)),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&summary, &out_dir.join("summary.json"))?;
    Ok(summary)
}
