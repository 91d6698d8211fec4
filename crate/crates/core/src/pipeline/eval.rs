use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::load_mask;
use crate::error::{Error, Result};
use crate::imaging::{load_unit_image, write_atomic, BinaryMask, SoftMask};
use crate::labels::{binarize, consensus};
use crate::metrics::{pairwise_dice, CaseMetrics, MetricsReport, NamedMaskSet, PairwiseMatrix};

/// One line of an evaluation list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalCase {
    pub case_id: String,
    pub ground_truth: PathBuf,
    /// Soft or binary prediction; thresholded for overlap metrics and used
    /// as scores for AUC.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<PathBuf>,
    /// Named rater masks for the agreement matrix.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub raters: BTreeMap<String, PathBuf>,
}

pub fn load_eval_cases(path: impl AsRef<Path>) -> Result<Vec<EvalCase>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut cases = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |reason: String| Error::Manifest { line: i + 1, reason };
        let mut case: EvalCase = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        if !seen.insert(case.case_id.clone()) {
            return Err(fail(format!("duplicate case_id {:?}", case.case_id)));
        }
        case.ground_truth = base.join(&case.ground_truth);
        case.prediction = case.prediction.map(|p| base.join(p));
        for p in case.raters.values_mut() {
            *p = base.join(&*p);
        }
        cases.push(case);
    }
    Ok(cases)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub report: Option<MetricsReport>,
    pub agreement: Option<PairwiseMatrix>,
}

/// Name of the majority-vote row added to the agreement matrix.
pub const CONSENSUS_NAME: &str = "consensus50";

/// Metrics of each prediction against its ground truth, and mean pairwise
/// Dice between raters, the 50% consensus, the prediction and the ground
/// truth. Every case must carry the same rater names.
pub fn evaluate(cases: &[EvalCase], threshold: f64, pooled: bool) -> Result<EvalOutcome> {
    if cases.is_empty() {
        return Err(Error::InvalidArgument("no cases to evaluate".into()));
    }
    let with_prediction = cases.iter().filter(|c| c.prediction.is_some()).count();
    if with_prediction != 0 && with_prediction != cases.len() {
        return Err(Error::InvalidArgument("either every case or none has a prediction".into()));
    }
    let names: Vec<String> = cases[0].raters.keys().cloned().collect();
    if let Some(c) = cases.iter().find(|c| !c.raters.keys().eq(names.iter())) {
        return Err(Error::InvalidArgument(format!("case {:?} has a different rater set", c.case_id)));
    }

    let mut metrics = Vec::new();
    let mut raters: Vec<NamedMaskSet> = names.iter().map(|n| (n.clone(), Vec::new())).collect();
    let mut extra: Vec<NamedMaskSet> = Vec::new();
    let mut predictions = Vec::new();
    let mut truths = Vec::new();
    let mut votes = Vec::new();
    for case in cases {
        let gt = load_mask(&case.ground_truth)?;
        if let Some(p) = &case.prediction {
            let scores = SoftMask::from(load_unit_image(p)?);
            let pred = binarize(&scores, threshold);
            metrics.push(CaseMetrics::new(&case.case_id, &pred, &gt, Some(&scores))?);
            predictions.push(pred);
        }
        let masks: Vec<BinaryMask> = case.raters.values().map(load_mask).collect::<Result<_>>()?;
        if masks.len() >= 2 {
            votes.push(consensus(&masks, 0.5)?);
        }
        for ((_, set), m) in raters.iter_mut().zip(masks) {
            set.push(m);
        }
        truths.push(gt);
    }

    let agreement = if names.is_empty() {
        None
    } else {
        if !votes.is_empty() {
            extra.push((CONSENSUS_NAME.to_string(), votes));
        }
        if !predictions.is_empty() {
            extra.push(("prediction".to_string(), predictions));
        }
        extra.push(("ground_truth".to_string(), truths));
        Some(pairwise_dice(&raters, &extra)?)
    };
    let report = if metrics.is_empty() {
        None
    } else {
        Some(MetricsReport::from_cases(metrics, pooled)?)
    };
    Ok(EvalOutcome { report, agreement })
}

/// Writes `metrics.json` and `pairwise_dice.csv` where available; returns
/// the paths written.
pub fn write_eval_outputs(outcome: &EvalOutcome, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    if let Some(report) = &outcome.report {
        let path = out_dir.join("metrics.json");
        let mut bytes = serde_json::to_vec_pretty(report)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    if let Some(matrix) = &outcome.agreement {
        let path = out_dir.join("pairwise_dice.csv");
        write_atomic(&path, matrix.to_csv().as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
