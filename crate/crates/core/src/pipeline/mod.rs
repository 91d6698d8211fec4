//! Manifest-driven batch labeling: ingestion, per-case trimap and matte,
//! quality reports, and the synthetic phantoms used for end-to-end checks.

mod config;
mod eval;
mod manifest;
pub mod phantom;
mod run;

pub use config::PipelineConfig;
pub use eval::{evaluate, load_eval_cases, write_eval_outputs, EvalCase, EvalOutcome, CONSENSUS_NAME};
pub use manifest::{load_manifest, manifest_to_jsonl, parse_manifest, Annotation, ManifestEntry};
pub use phantom::{write_phantom_set, Phantom, PhantomAnnotation, PhantomSetParams, PhantomShape, PhantomSpec};
pub use run::{
    build_trimap, label_case, load_case_image, load_mask, run_pipeline, CaseFailure, CasePaths, CaseResult,
    QualityReport, RunSummary,
};
