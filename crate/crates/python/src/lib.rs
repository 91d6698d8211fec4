//! Python bindings. Images and masks cross the boundary as lists of rows;
//! a numpy array converts with `.tolist()`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use softmask::graphcut::RecistAnnotation;
use softmask::imaging::{BinaryMask, GrayImage, SeShape, SoftMask};
use softmask::matting::{MattingParams, Trimap};
use softmask::pipeline::{load_manifest, run_pipeline, PhantomAnnotation, PhantomSetParams, PipelineConfig};
use softmask::trimap::{BandParams, RecistTrimapParams};
use softmask::{labels, metrics, Error};

pub mod grid;

use grid::{from_rows, mask_rows, rows, trimap_rows};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn image(data: Vec<Vec<f64>>) -> PyResult<GrayImage> {
    let (w, h, flat) = from_rows(data).map_err(py_err)?;
    GrayImage::new(w, h, flat).map_err(py_err)
}

fn soft(data: Vec<Vec<f64>>) -> PyResult<SoftMask> {
    Ok(SoftMask::from(image(data)?))
}

fn mask(data: Vec<Vec<f64>>) -> PyResult<BinaryMask> {
    Ok(BinaryMask::from_threshold(&image(data)?, 0.5))
}

fn trimap(data: Vec<Vec<f64>>) -> PyResult<Trimap> {
    let scaled = data.into_iter().map(|r| r.into_iter().map(|v| v / 255.0).collect()).collect();
    Trimap::from_image(&image(scaled)?).map_err(py_err)
}

fn shape(name: &str) -> PyResult<SeShape> {
    match name {
        "disk" => Ok(SeShape::Disk),
        "square" => Ok(SeShape::Square),
        _ => Err(PyValueError::new_err(format!("unknown se_shape {name:?}"))),
    }
}

/// Trimap (0 background, 128 unknown, 255 foreground) from a binary mask.
#[pyfunction]
#[pyo3(signature = (mask_rows, se_scale=0.05, se_radius=None, se_shape="disk"))]
fn trimap_from_binary(
    mask_rows: Vec<Vec<f64>>,
    se_scale: f64,
    se_radius: Option<usize>,
    se_shape: &str,
) -> PyResult<Vec<Vec<u8>>> {
    let params = BandParams {
        se_scale,
        se_radius,
        se_shape: shape(se_shape)?,
    };
    let t = softmask::trimap::trimap_from_binary(&mask(mask_rows)?, &params).map_err(py_err)?;
    Ok(trimap_rows(&t))
}

#[pyfunction]
#[pyo3(signature = (masks, min_raters=None))]
fn trimap_from_multirater(masks: Vec<Vec<Vec<f64>>>, min_raters: Option<usize>) -> PyResult<Vec<Vec<u8>>> {
    let masks = masks.into_iter().map(mask).collect::<PyResult<Vec<_>>>()?;
    let t = softmask::trimap::trimap_from_multirater(&masks, min_raters).map_err(py_err)?;
    Ok(trimap_rows(&t))
}

/// `axes` is x1, y1, x2, y2 of the long axis then x3, y3, x4, y4 of the short.
#[pyfunction]
#[pyo3(signature = (image_rows, axes, seed=0))]
fn trimap_from_recist(image_rows: Vec<Vec<f64>>, axes: [f64; 8], seed: u64) -> PyResult<Vec<Vec<u8>>> {
    let ann = RecistAnnotation::from_coords(axes).map_err(py_err)?;
    let mut params = RecistTrimapParams::default();
    params.grabcut.seed = seed;
    let t = softmask::trimap::trimap_from_recist(&image(image_rows)?, &ann, &params).map_err(py_err)?;
    Ok(trimap_rows(&t))
}

/// Soft mask in [0, 1] from an image and a trimap.
#[pyfunction]
#[pyo3(signature = (image_rows, trimap_rows, window_radius=None, eps=None, lambda_c=None, tol=None, max_iters=None))]
fn matte(
    image_rows: Vec<Vec<f64>>,
    trimap_rows: Vec<Vec<f64>>,
    window_radius: Option<usize>,
    eps: Option<f64>,
    lambda_c: Option<f64>,
    tol: Option<f64>,
    max_iters: Option<usize>,
) -> PyResult<Vec<Vec<f64>>> {
    let d = MattingParams::default();
    let params = MattingParams {
        window_radius: window_radius.unwrap_or(d.window_radius),
        eps: eps.unwrap_or(d.eps),
        lambda_c: lambda_c.unwrap_or(d.lambda_c),
        tol: tol.unwrap_or(d.tol),
        max_iters: max_iters.unwrap_or(d.max_iters),
    };
    let out = softmask::matting::matte(&image(image_rows)?, &trimap(trimap_rows)?, &params).map_err(py_err)?;
    Ok(rows(out.alpha()))
}

#[pyfunction]
fn soften(soft_rows: Vec<Vec<f64>>, mask_rows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let out = labels::soften_binary(&soft(soft_rows)?, &mask(mask_rows)?).map_err(py_err)?;
    Ok(rows(&out))
}

#[pyfunction]
#[pyo3(signature = (soft_rows, threshold=labels::DEFAULT_THRESHOLD))]
fn binarize(soft_rows: Vec<Vec<f64>>, threshold: f64) -> PyResult<Vec<Vec<bool>>> {
    Ok(mask_rows(&labels::binarize(&soft(soft_rows)?, threshold)))
}

#[pyfunction]
#[pyo3(signature = (masks, fraction=0.5))]
fn consensus(masks: Vec<Vec<Vec<f64>>>, fraction: f64) -> PyResult<Vec<Vec<bool>>> {
    let masks = masks.into_iter().map(mask).collect::<PyResult<Vec<_>>>()?;
    Ok(mask_rows(&labels::consensus(&masks, fraction).map_err(py_err)?))
}

fn counts(pred: Vec<Vec<f64>>, gt: Vec<Vec<f64>>) -> PyResult<metrics::ConfusionCounts> {
    metrics::confusion(&mask(pred)?, &mask(gt)?).map_err(py_err)
}

#[pyfunction]
fn dice(pred: Vec<Vec<f64>>, gt: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(counts(pred, gt)?.dice())
}

#[pyfunction]
fn iou(pred: Vec<Vec<f64>>, gt: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(counts(pred, gt)?.iou())
}

#[pyfunction]
fn acc(pred: Vec<Vec<f64>>, gt: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(counts(pred, gt)?.acc())
}

/// Rank AUC of soft scores against a binary ground truth.
#[pyfunction]
fn auc(scores: Vec<Vec<f64>>, gt: Vec<Vec<f64>>) -> PyResult<f64> {
    metrics::auc(&soft(scores)?, &mask(gt)?).map_err(py_err)
}

/// Labels a manifest into `out_dir`; returns the run summary as a dict.
/// `config_json` holds any subset of the pipeline settings.
#[pyfunction]
#[pyo3(signature = (manifest, out_dir, config_json=None))]
fn run<'py>(py: Python<'py>, manifest: PathBuf, out_dir: PathBuf, config_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let config = match config_json {
        Some(text) => PipelineConfig::from_json(text).map_err(py_err)?,
        None => PipelineConfig::default(),
    };
    let entries = load_manifest(&manifest).map_err(py_err)?;
    let summary = py
        .detach(|| run_pipeline(&entries, &config, &out_dir))
        .map_err(py_err)?;
    let text = serde_json::to_string(&summary).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Writes a synthetic image set and returns the manifest path.
#[pyfunction]
#[pyo3(signature = (out_dir, count=10, size=64, seed=0, ellipses=false, annotation="recist"))]
fn write_phantom_set(
    out_dir: PathBuf,
    count: usize,
    size: usize,
    seed: u64,
    ellipses: bool,
    annotation: &str,
) -> PyResult<PathBuf> {
    let annotation = match annotation {
        "recist" => PhantomAnnotation::Recist,
        "binary" => PhantomAnnotation::Binary,
        "multirater" => PhantomAnnotation::Multirater,
        _ => return Err(PyValueError::new_err(format!("unknown annotation {annotation:?}"))),
    };
    let params = PhantomSetParams {
        count,
        size,
        seed,
        ellipses,
        annotation,
    };
    softmask::pipeline::write_phantom_set(out_dir, &params).map_err(py_err)
}

#[pymodule]
pub fn softmask_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(trimap_from_binary, m)?)?;
    m.add_function(wrap_pyfunction!(trimap_from_multirater, m)?)?;
    m.add_function(wrap_pyfunction!(trimap_from_recist, m)?)?;
    m.add_function(wrap_pyfunction!(matte, m)?)?;
    m.add_function(wrap_pyfunction!(soften, m)?)?;
    m.add_function(wrap_pyfunction!(binarize, m)?)?;
    m.add_function(wrap_pyfunction!(consensus, m)?)?;
    m.add_function(wrap_pyfunction!(dice, m)?)?;
    m.add_function(wrap_pyfunction!(iou, m)?)?;
    m.add_function(wrap_pyfunction!(acc, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(write_phantom_set, m)?)?;
    m.add("DEFAULT_THRESHOLD", labels::DEFAULT_THRESHOLD)?;
    Ok(())
}
