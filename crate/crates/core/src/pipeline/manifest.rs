use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcut::RecistAnnotation;
use crate::imaging::Window;

/// Weak annotation attached to a case; `kind` selects the trimap strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Annotation {
    /// Long axis endpoints then short axis endpoints, each as `x, y`.
    Recist { axes: [f64; 8] },
    Multirater {
        masks: Vec<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_raters: Option<usize>,
    },
    Binary { mask: PathBuf },
}

impl Annotation {
    pub fn strategy(&self) -> &'static str {
        match self {
            Annotation::Recist { .. } => "recist",
            Annotation::Multirater { .. } => "multirater",
            Annotation::Binary { .. } => "binary",
        }
    }

    fn resolve(&mut self, base: &Path) {
        match self {
            Annotation::Recist { .. } => {}
            Annotation::Multirater { masks, .. } => {
                for m in masks {
                    *m = base.join(&*m);
                }
            }
            Annotation::Binary { mask } => *mask = base.join(&*mask),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub case_id: String,
    pub image: PathBuf,
    pub annotation: Annotation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<PathBuf>,
    /// Applied when the image holds raw 16-bit CT values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

impl ManifestEntry {
    fn validate(&self) -> std::result::Result<(), String> {
        let id = &self.case_id;
        if id.is_empty() || id.starts_with('.') || id.contains(['/', '\\']) {
            return Err(format!("case_id {id:?} is not a plain file-name stem"));
        }
        match &self.annotation {
            Annotation::Recist { axes } => {
                RecistAnnotation::from_coords(*axes).map_err(|e| e.to_string())?;
            }
            Annotation::Multirater { masks, min_raters } => {
                if masks.len() < 2 {
                    return Err(format!("multirater needs at least two masks, got {}", masks.len()));
                }
                if let Some(k) = min_raters {
                    if *k == 0 || *k > masks.len() {
                        return Err(format!("min_raters must be in 1..={}, got {k}", masks.len()));
                    }
                }
            }
            Annotation::Binary { .. } => {}
        }
        Ok(())
    }
}

/// Parses JSON-lines text. Blank lines are skipped; relative paths are
/// joined onto `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |reason: String| Error::Manifest { line: line_no, reason };
        let mut entry: ManifestEntry = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        entry.validate().map_err(fail)?;
        if !seen.insert(entry.case_id.clone()) {
            return Err(fail(format!("duplicate case_id {:?}", entry.case_id)));
        }
        entry.image = base.join(&entry.image);
        entry.ground_truth = entry.ground_truth.map(|p| base.join(p));
        entry.annotation.resolve(base);
        entries.push(entry);
    }
    Ok(entries)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

/// One JSON object per line, paths written as given.
pub fn manifest_to_jsonl(entries: &[ManifestEntry]) -> Result<String> {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    Ok(out)
}
