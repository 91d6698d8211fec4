use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use softmask::imaging::SeShape;
use softmask::pipeline::{PhantomAnnotation, PipelineConfig};
use softmask::Result;

#[derive(Debug, Parser)]
#[command(name = "softmask", version, about = "Soft lesion masks from weak annotations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a trimap for one image from one annotation.
    Trimap(TrimapArgs),
    /// Solve for a soft mask given an image and its trimap.
    Matte(MatteArgs),
    /// Pixelwise maximum of a soft mask and a binary mask.
    Soften(SoftenArgs),
    /// Threshold a soft mask.
    Binarize(BinarizeArgs),
    /// Pixels marked by at least a fraction of the raters.
    Consensus(ConsensusArgs),
    /// Overlap metrics, AUC and the pairwise agreement matrix.
    Eval(EvalArgs),
    /// Label every entry of a manifest.
    Run(RunArgs),
    /// Generate a synthetic image set with a manifest.
    Phantom(PhantomArgs),
}

/// Pipeline settings. Defaults come first, then `--config`, then flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with any subset of the pipeline settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed for all randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Display window level in HU for raw CT.
    #[arg(long)]
    pub window_level: Option<f64>,
    /// Display window width in HU for raw CT.
    #[arg(long)]
    pub window_width: Option<f64>,
    /// Mixture components per grabcut model.
    #[arg(long)]
    pub grabcut_components: Option<usize>,
    /// Pairwise smoothness weight.
    #[arg(long)]
    pub grabcut_gamma: Option<f64>,
    #[arg(long)]
    pub grabcut_iterations: Option<usize>,
    /// Dilation radius of the rasterized RECIST axes.
    #[arg(long)]
    pub recist_band: Option<usize>,
    /// Background frame width in pixels.
    #[arg(long)]
    pub frame: Option<usize>,
    /// Band radius as a fraction of the square root of the mask area.
    #[arg(long)]
    pub se_scale: Option<f64>,
    #[arg(long, value_enum)]
    pub se_shape: Option<ShapeArg>,
    /// Fixed band radius, overriding --se-scale.
    #[arg(long)]
    pub se_radius: Option<usize>,
    /// Matting window radius.
    #[arg(long)]
    pub window_radius: Option<usize>,
    /// Matting regularizer.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Weight of the trimap constraints.
    #[arg(long)]
    pub lambda_c: Option<f64>,
    /// Relative residual at which the solver stops.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Raters that must agree for sure foreground.
    #[arg(long)]
    pub min_raters: Option<usize>,
    /// Soft-mask threshold wherever a binary mask is needed.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Disk,
    Square,
}

impl From<ShapeArg> for SeShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Disk => SeShape::Disk,
            ShapeArg::Square => SeShape::Square,
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        set(&mut c.seed, self.seed);
        set(&mut c.window.level, self.window_level);
        set(&mut c.window.width, self.window_width);
        set(&mut c.grabcut.components, self.grabcut_components);
        set(&mut c.grabcut.gamma, self.grabcut_gamma);
        set(&mut c.grabcut.iterations, self.grabcut_iterations);
        set(&mut c.recist_band, self.recist_band);
        if self.frame.is_some() {
            c.frame = self.frame;
        }
        set(&mut c.band.se_scale, self.se_scale);
        set(&mut c.band.se_shape, self.se_shape.map(SeShape::from));
        if self.se_radius.is_some() {
            c.band.se_radius = self.se_radius;
        }
        set(&mut c.matting.window_radius, self.window_radius);
        set(&mut c.matting.eps, self.eps);
        set(&mut c.matting.lambda_c, self.lambda_c);
        set(&mut c.matting.tol, self.tol);
        set(&mut c.matting.max_iters, self.max_iters);
        if self.min_raters.is_some() {
            c.min_raters = self.min_raters;
        }
        set(&mut c.threshold, self.threshold);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("annotation").required(true))]
pub struct TrimapArgs {
    /// Image file (PGM or PNG; 16-bit data is treated as raw CT).
    #[arg(long)]
    pub image: PathBuf,
    /// RECIST axes as x1,y1,x2,y2 (long) then x3,y3,x4,y4 (short).
    #[arg(long, value_delimiter = ',', group = "annotation")]
    pub recist: Option<Vec<f64>>,
    /// Binary lesion mask.
    #[arg(long, group = "annotation")]
    pub mask: Option<PathBuf>,
    /// Two or more rater masks.
    #[arg(long, num_args = 2.., group = "annotation")]
    pub raters: Option<Vec<PathBuf>>,
    /// Case id used to derive the grabcut seed; defaults to the image stem.
    #[arg(long)]
    pub case_id: Option<String>,
    /// Output trimap (0 background, 128 unknown, 255 foreground).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct MatteArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub trimap: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write 16-bit output instead of 8-bit.
    #[arg(long)]
    pub sixteen_bit: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SoftenArgs {
    #[arg(long)]
    pub soft: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    #[arg(long)]
    pub soft: PathBuf,
    /// Defaults to 128/255.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConsensusArgs {
    /// Rater masks.
    #[arg(required = true, num_args = 1..)]
    pub masks: Vec<PathBuf>,
    /// Fraction of raters that must mark a pixel.
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON-lines list of cases with ground_truth, prediction and raters.
    #[arg(long)]
    pub cases: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also report metrics over all pixels pooled together.
    #[arg(long)]
    pub pooled: bool,
    /// Defaults to 128/255.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON-lines manifest.
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Parallel cases; 0 uses all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnnotationArg {
    Recist,
    Binary,
    Multirater,
}

impl From<AnnotationArg> for PhantomAnnotation {
    fn from(a: AnnotationArg) -> Self {
        match a {
            AnnotationArg::Recist => PhantomAnnotation::Recist,
            AnnotationArg::Binary => PhantomAnnotation::Binary,
            AnnotationArg::Multirater => PhantomAnnotation::Multirater,
        }
    }
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Side length in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random ellipses instead of disks.
    #[arg(long)]
    pub ellipses: bool,
    #[arg(long, value_enum, default_value_t = AnnotationArg::Recist)]
    pub annotation: AnnotationArg,
    #[arg(long)]
    pub out: PathBuf,
}
