//! Overlap metrics (Dice, IoU, accuracy), rank AUC, and rater-agreement
//! matrices.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, BinaryMask, SoftMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Both masks empty: Dice and IoU fall back to 1.
    pub fn both_empty(&self) -> bool {
        self.tp == 0 && self.fp == 0 && self.fn_ == 0
    }

    pub fn dice(&self) -> f64 {
        if self.both_empty() {
            return 1.0;
        }
        2.0 * self.tp as f64 / (2 * self.tp + self.fp + self.fn_) as f64
    }

    pub fn iou(&self) -> f64 {
        if self.both_empty() {
            return 1.0;
        }
        self.tp as f64 / (self.tp + self.fp + self.fn_) as f64
    }

    pub fn acc(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 1.0;
        }
        (self.tp + self.tn) as f64 / total as f64
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;
    fn add(self, o: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    ensure_same_dims(gt.dims(), pred.dims())?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn dice(c: &ConfusionCounts) -> f64 {
    c.dice()
}

pub fn iou(c: &ConfusionCounts) -> f64 {
    c.iou()
}

pub fn acc(c: &ConfusionCounts) -> f64 {
    c.acc()
}

/// Mann–Whitney AUC with midranks for tied scores.
pub fn auc(scores: &SoftMask, gt: &BinaryMask) -> Result<f64> {
    ensure_same_dims(gt.dims(), scores.dims())?;
    auc_from_slices(scores.data(), gt.data())
}

pub fn auc_from_slices(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument("scores and labels differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks are 1-based; the tie group shares the mean rank
        let midrank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i]).count();
        pos_rank_sum += midrank * pos_in_group as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Mean pairwise Dice between named mask sets aligned over the same cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    pub names: Vec<String>,
    /// Row-major `names.len()²` entries.
    pub values: Vec<f64>,
}

impl PairwiseMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.names.len() + b]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (a, n) in self.names.iter().enumerate() {
            out.push_str(n);
            for b in 0..self.names.len() {
                let _ = write!(out, ",{:.6}", self.get(a, b));
            }
            out.push('\n');
        }
        out
    }
}

pub type NamedMaskSet = (String, Vec<BinaryMask>);

/// Entry `(a, b)` is the mean over cases of `dice(a_case, b_case)`; the
/// diagonal is exactly 1.
pub fn pairwise_dice(raters: &[NamedMaskSet], extra: &[NamedMaskSet]) -> Result<PairwiseMatrix> {
    let sets: Vec<&NamedMaskSet> = raters.iter().chain(extra).collect();
    let Some(first) = sets.first() else {
        return Err(Error::InvalidArgument("no mask sets given".into()));
    };
    let cases = first.1.len();
    if cases == 0 {
        return Err(Error::InvalidArgument("mask sets contain no cases".into()));
    }
    for (name, masks) in &sets {
        if masks.len() != cases {
            return Err(Error::InvalidArgument(format!(
                "set {name:?} has {} cases, expected {cases}",
                masks.len()
            )));
        }
        for (m, reference) in masks.iter().zip(&first.1) {
            ensure_same_dims(reference.dims(), m.dims())?;
        }
    }
    let k = sets.len();
    let mut values = vec![1.0; k * k];
    for a in 0..k {
        for b in a + 1..k {
            let mut sum = 0.0;
            for (ma, mb) in sets[a].1.iter().zip(&sets[b].1) {
                sum += confusion(ma, mb)?.dice();
            }
            let mean = sum / cases as f64;
            values[a * k + b] = mean;
            values[b * k + a] = mean;
        }
    }
    Ok(PairwiseMatrix {
        names: sets.iter().map(|(n, _)| n.clone()).collect(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMetrics {
    pub case_id: String,
    pub counts: ConfusionCounts,
    pub dice: f64,
    pub iou: f64,
    pub acc: f64,
    /// Present when soft scores were supplied and the ground truth has both classes.
    pub auc: Option<f64>,
    /// Prediction and ground truth both empty; Dice/IoU are 1 by convention.
    pub both_empty: bool,
}

impl CaseMetrics {
    pub fn new(case_id: impl Into<String>, pred: &BinaryMask, gt: &BinaryMask, scores: Option<&SoftMask>) -> Result<Self> {
        let counts = confusion(pred, gt)?;
        let auc = match scores {
            Some(s) => match auc(s, gt) {
                Ok(v) => Some(v),
                Err(Error::SingleClass) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        Ok(CaseMetrics {
            case_id: case_id.into(),
            dice: counts.dice(),
            iou: counts.iou(),
            acc: counts.acc(),
            auc,
            both_empty: counts.both_empty(),
            counts,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dice: f64,
    pub iou: f64,
    pub acc: f64,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cases: Vec<CaseMetrics>,
    /// Per-case mean.
    pub macro_mean: Aggregate,
    /// Metrics of the summed confusion counts, when requested.
    pub pooled: Option<Aggregate>,
    pub both_empty_cases: usize,
}

impl MetricsReport {
    pub fn from_cases(cases: Vec<CaseMetrics>, pooled: bool) -> Result<Self> {
        if cases.is_empty() {
            return Err(Error::InvalidArgument("no cases to aggregate".into()));
        }
        let n = cases.len() as f64;
        let aucs: Vec<f64> = cases.iter().filter_map(|c| c.auc).collect();
        let macro_mean = Aggregate {
            dice: cases.iter().map(|c| c.dice).sum::<f64>() / n,
            iou: cases.iter().map(|c| c.iou).sum::<f64>() / n,
            acc: cases.iter().map(|c| c.acc).sum::<f64>() / n,
            auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
        };
        let pooled = pooled.then(|| {
            let total = cases.iter().fold(ConfusionCounts::default(), |acc, c| acc + c.counts);
            Aggregate {
                dice: total.dice(),
                iou: total.iou(),
                acc: total.acc(),
                auc: None,
            }
        });
        Ok(MetricsReport {
            both_empty_cases: cases.iter().filter(|c| c.both_empty).count(),
            cases,
            macro_mean,
            pooled,
        })
    }
}
