mod args;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use softmask::imaging::{load_unit_image, save_image, BitDepth, GrayImage, SoftMask};
use softmask::labels::{binarize, consensus, soften_binary, DEFAULT_THRESHOLD};
use softmask::matting::{matte, Trimap, TrimapLabel};
use softmask::pipeline::{
    build_trimap, evaluate, load_case_image, load_eval_cases, load_manifest, load_mask, run_pipeline,
    write_eval_outputs, write_phantom_set, Annotation, ManifestEntry, PhantomSetParams,
};
use softmask::{Error, Result};

use args::{
    BinarizeArgs, Cli, Command, ConsensusArgs, EvalArgs, MatteArgs, PhantomArgs, RunArgs, SoftenArgs, TrimapArgs,
};

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "case".into())
}

fn save_mask(mask: &softmask::imaging::BinaryMask, path: &Path) -> Result<()> {
    save_image(&GrayImage::from(mask), path, BitDepth::Eight)
}

fn trimap_cmd(a: TrimapArgs) -> Result<()> {
    let config = a.config.resolve()?;
    let annotation = if let Some(axes) = a.recist {
        let axes: [f64; 8] = axes
            .try_into()
            .map_err(|_| Error::InvalidArgument("--recist takes exactly 8 numbers".into()))?;
        Annotation::Recist { axes }
    } else if let Some(mask) = a.mask {
        Annotation::Binary { mask }
    } else if let Some(masks) = a.raters {
        Annotation::Multirater {
            masks,
            min_raters: None,
        }
    } else {
        return Err(Error::InvalidArgument("one of --recist, --mask, --raters is required".into()));
    };
    let entry = ManifestEntry {
        case_id: a.case_id.unwrap_or_else(|| stem(&a.image)),
        image: a.image,
        annotation,
        ground_truth: None,
        window: None,
    };
    let img = load_case_image(&entry, &config)?;
    let trimap = build_trimap(&img, &entry, &config)?;
    save_image(&trimap, &a.out, BitDepth::Eight)?;
    println!(
        "{}: {} foreground, {} unknown, {} background",
        a.out.display(),
        trimap.count(TrimapLabel::Foreground),
        trimap.count(TrimapLabel::Unknown),
        trimap.count(TrimapLabel::Background)
    );
    Ok(())
}

fn matte_cmd(a: MatteArgs) -> Result<()> {
    let config = a.config.resolve()?;
    let entry = ManifestEntry {
        case_id: stem(&a.image),
        image: a.image.clone(),
        annotation: Annotation::Binary { mask: a.trimap.clone() },
        ground_truth: None,
        window: None,
    };
    let img = load_case_image(&entry, &config)?;
    let trimap = Trimap::from_image(&load_unit_image(&a.trimap)?)?;
    let outcome = matte(&img, &trimap, &config.matting)?;
    let depth = if a.sixteen_bit { BitDepth::Sixteen } else { BitDepth::Eight };
    save_image(outcome.alpha(), &a.out, depth)?;
    println!(
        "{}: {} solver iterations, residual {:.3e}, {:.1} ms",
        a.out.display(),
        outcome.solve.iterations,
        outcome.solve.residual,
        outcome.laplacian_ms + outcome.solve_ms
    );
    Ok(())
}

fn soften_cmd(a: SoftenArgs) -> Result<()> {
    let soft = SoftMask::from(load_unit_image(&a.soft)?);
    let out = soften_binary(&soft, &load_mask(&a.mask)?)?;
    save_image(&out, &a.out, BitDepth::Eight)
}

fn binarize_cmd(a: BinarizeArgs) -> Result<()> {
    let threshold = a.threshold.unwrap_or(DEFAULT_THRESHOLD);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold must be in [0, 1], got {threshold}")));
    }
    let soft = SoftMask::from(load_unit_image(&a.soft)?);
    save_mask(&binarize(&soft, threshold), &a.out)
}

fn consensus_cmd(a: ConsensusArgs) -> Result<()> {
    let masks = a.masks.iter().map(load_mask).collect::<Result<Vec<_>>>()?;
    let out = consensus(&masks, a.fraction)?;
    save_mask(&out, &a.out)?;
    println!("{}: {} pixels", a.out.display(), out.area());
    Ok(())
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let threshold = a.threshold.unwrap_or(DEFAULT_THRESHOLD);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold must be in [0, 1], got {threshold}")));
    }
    let cases = load_eval_cases(&a.cases)?;
    let outcome = evaluate(&cases, threshold, a.pooled)?;
    for path in write_eval_outputs(&outcome, &a.out_dir)? {
        println!("wrote {}", path.display());
    }
    if let Some(report) = &outcome.report {
        let m = &report.macro_mean;
        println!(
            "{} cases: dice {:.4}, iou {:.4}, acc {:.4}, auc {}",
            report.cases.len(),
            m.dice,
            m.iou,
            m.acc,
            m.auc.map_or("n/a".into(), |v| format!("{v:.4}"))
        );
    }
    Ok(())
}

/// Returns whether every entry succeeded.
fn run_cmd(a: RunArgs) -> Result<bool> {
    let mut config = a.config.resolve()?;
    if let Some(w) = a.workers {
        config.workers = w;
    }
    let entries = load_manifest(&a.manifest)?;
    let summary = run_pipeline(&entries, &config, &a.out_dir)?;
    for f in &summary.failures {
        eprintln!("FAILED {}: {}", f.case_id, f.error);
    }
    println!(
        "{} processed, {} succeeded, {} failed in {:.0} ms",
        summary.processed, summary.succeeded, summary.failed, summary.wall_ms
    );
    if let Some(d) = summary.mean_dice_vs_ground_truth {
        println!("mean dice vs ground truth {d:.4}");
    }
    Ok(summary.failed == 0)
}

fn phantom_cmd(a: PhantomArgs) -> Result<()> {
    let params = PhantomSetParams {
        count: a.count,
        size: a.size,
        seed: a.seed,
        ellipses: a.ellipses,
        annotation: a.annotation.into(),
    };
    let manifest = write_phantom_set(&a.out, &params)?;
    println!("{}", manifest.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Trimap(a) => trimap_cmd(a).map(|_| true),
        Command::Matte(a) => matte_cmd(a).map(|_| true),
        Command::Soften(a) => soften_cmd(a).map(|_| true),
        Command::Binarize(a) => binarize_cmd(a).map(|_| true),
        Command::Consensus(a) => consensus_cmd(a).map(|_| true),
        Command::Eval(a) => eval_cmd(a).map(|_| true),
        Command::Run(a) => run_cmd(a),
        Command::Phantom(a) => phantom_cmd(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
