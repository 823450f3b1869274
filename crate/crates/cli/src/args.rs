use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "crlscore", version, about = "Evaluate causal representation learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Destination file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Causal graph checks.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Conditional independence tests.
    #[command(subcommand)]
    Indep(IndepCmd),
    /// Representation and generation metrics.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Radar and origami scorecard.
    Score(ScoreArgs),
    /// Multi-run aggregation.
    #[command(subcommand)]
    Runs(RunsCmd),
    /// Structural causal models.
    #[command(subcommand)]
    Scm(ScmCmd),
    /// Re-render a structured report.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
pub enum GraphCmd {
    /// Check acyclicity and dataset desiderata.
    Validate(GraphArgs),
    /// List chains, forks, colliders and confounded edges.
    Census(GraphArgs),
    /// Decide whether x and y are d-separated given a set.
    Dsep(DsepArgs),
    /// Compare a predicted graph against the true one.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct DsepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// Conditioning variables, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub given: Vec<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// True graph.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub predicted: PathBuf,
    /// Optional CSV of cause,effect,score for the AUC.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Subcommand, Debug)]
pub enum IndepCmd {
    /// Pearson chi-square test of x and y given a set.
    Chi2(Chi2Args),
    /// Test every independence a graph implies against data.
    Audit(AuditArgs),
    /// Subsample rows so that two columns become independent.
    Filter(FilterArgs),
}

#[derive(Args, Debug)]
pub struct Chi2Args {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, value_delimiter = ',')]
    pub given: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Equal-frequency bins for numeric columns.
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub max_conditioning: usize,
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Filtered CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum MetricsCmd {
    /// MIC, TIC, IRS, JEMMIG and DCI of latents against factors.
    Disentangle(DisentangleArgs),
    /// Image generation and reconstruction metrics.
    Generation(GenerationArgs),
    /// Match latents to factors on an association matrix.
    Assign(AssignArgs),
}

#[derive(Args, Debug)]
pub struct DisentangleArgs {
    #[arg(long)]
    pub factors: PathBuf,
    #[arg(long)]
    pub latents: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationMetric {
    Fid,
    Kid,
    Is,
    Iou,
    PixelL1,
    Reconstruction,
    Composition,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorArg {
    Mae,
    Mse,
}

#[derive(Args, Debug)]
pub struct GenerationArgs {
    #[arg(long, value_enum)]
    pub metric: GenerationMetric,
    /// Reference input: embeddings CSV, mask PBM or original table.
    #[arg(long)]
    pub real: Option<PathBuf>,
    /// Generated input: embeddings CSV, mask PBM or reconstructed table.
    #[arg(long)]
    pub generated: Option<PathBuf>,
    /// Class probability CSV for the inception score.
    #[arg(long)]
    pub probs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ErrorArg::Mae)]
    pub error: ErrorArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairArg {
    Mic,
    Tic,
}

#[derive(Args, Debug)]
pub struct AssignArgs {
    #[arg(long)]
    pub factors: PathBuf,
    #[arg(long)]
    pub latents: PathBuf,
    #[arg(long, value_enum, default_value_t = PairArg::Mic)]
    pub metric: PairArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotArg {
    Radar,
    Origami,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// CSV of raw values (model column then one column per metric).
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Also write the chart as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PlotArg::Origami)]
    pub plot: PlotArg,
    /// Auxiliary radius, overriding the config.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub degenerate_to_half: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Subcommand, Debug)]
pub enum RunsCmd {
    /// Mean and spread of each metric over selected runs.
    Aggregate(AggregateArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    All,
    #[value(name = "boundaries_out")]
    BoundariesOut,
    #[value(name = "top_k")]
    TopK,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdArg {
    Population,
    Sample,
}

#[derive(Args, Debug)]
pub struct AggregateArgs {
    /// CSV with run,metric,value columns.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    pub mode: ModeArg,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = StdArg::Population)]
    pub std: StdArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Subcommand, Debug)]
pub enum ScmCmd {
    /// Draw samples as CSV.
    Sample(SampleArgs),
    /// Draw samples after hard interventions.
    Intervene(InterveneArgs),
    /// Counterfactual of every row of an observation table.
    Counterfactual(CounterfactualArgs),
    /// Render one pendulum scene as PBM, or sample a table of scenes.
    Pendulum(PendulumArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub scm: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InterveneArgs {
    #[arg(long)]
    pub scm: PathBuf,
    /// Assignment `name=value`; repeatable.
    #[arg(long = "set", required = true)]
    pub set: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CounterfactualArgs {
    #[arg(long)]
    pub scm: PathBuf,
    /// Observations, one column per model variable.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long = "set")]
    pub set: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PendulumArgs {
    /// Degrees from vertical.
    #[arg(long, allow_negative_numbers = true)]
    pub angle: Option<f64>,
    /// Light angle in degrees; 90 puts the light above the pivot.
    #[arg(long)]
    pub light: Option<f64>,
    /// Sample a CSV table of this many scenes instead of rendering one.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Structured report to re-render.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: Output,
}
