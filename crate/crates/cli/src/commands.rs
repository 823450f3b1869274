use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crlscore::aggregate::{aggregate_runs, build_scorecard, load_card_config, load_values, resolve_models, AggregateMode, StdConvention};
use crlscore::binning::discretize_table;
use crlscore::generation::{
    composition_l1, fid, inception_score, iou, kid, load_embeddings, load_probabilities, pixel_l1, reconstruction_score,
    ErrorMode,
};
use crlscore::graph::{compare_graphs, d_separated, desiderata_report, find_confounders, junction_census, load_edge_scores, validate_dag};
use crlscore::independence::{audit_graph_against_data, chi2_independence, enforce_independence};
use crlscore::model::{load_graph, load_mask, load_run_log, load_table};
use crlscore::report::{emit_report, Report, ReportFormat};
use crlscore::representation::{
    association_matrix, disentanglement_suite, hungarian_match, permutation_sweep, PairMetric, SuiteConfig, SWEEP_LIMIT,
};
use crlscore::scm::{load_scm, render_pendulum, sample_pendulum_table};
use crlscore::svg::{emit_svg, PlotKind, PlotSpec};
use crlscore::{DataTable, TableSchema};

use crate::args::*;
use crate::{read_file, take_warnings, write_out, Failure};

type Outcome = Result<(), Failure>;

struct Session {
    report: Report,
}

impl Session {
    fn new(argv: Vec<String>) -> Self {
        Session { report: Report::new("crlscore", env!("CARGO_PKG_VERSION"), argv) }
    }

    fn input(&mut self, label: &str, path: &Path) -> Outcome {
        self.report.add_input(label, path)?;
        Ok(())
    }

    fn section<T: Serialize>(&mut self, name: &str, value: &T) -> Outcome {
        self.report.add_section(name, value)?;
        Ok(())
    }

    fn finish(mut self, output: &Output) -> Outcome {
        for w in take_warnings() {
            self.report.warn(w);
        }
        let format = match output.format {
            Format::Text => ReportFormat::Text,
            Format::Structured => ReportFormat::Structured,
        };
        write_out(output.out.as_deref(), &emit_report(&self.report, format))
    }
}

/// Artifact commands (CSV, PBM) have no report, so warnings go to stderr.
fn artifact(out: Option<&Path>, text: &str) -> Outcome {
    write_out(out, text)?;
    for w in take_warnings() {
        eprintln!("crlscore: warning: {w}");
    }
    Ok(())
}

fn table(path: &Path) -> Result<DataTable, Failure> {
    Ok(load_table(path, &TableSchema::Infer)?)
}

fn required<'a>(value: &'a Option<std::path::PathBuf>, flag: &str, metric: &str) -> Result<&'a Path, Failure> {
    value.as_deref().ok_or_else(|| Failure::Usage(format!("metric {metric} needs --{flag}")))
}

fn assignments(items: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects name=value, got {item:?}")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--set {name}: not a number: {value:?}")))?;
        if out.insert(name.trim().to_string(), v).is_some() {
            return Err(Failure::Usage(format!("--set {name} given twice")));
        }
    }
    Ok(out)
}

pub fn run(command: Command, argv: Vec<String>) -> Outcome {
    let mut s = Session::new(argv);
    match command {
        Command::Graph(cmd) => graph(cmd, s),
        Command::Indep(cmd) => indep(cmd, s),
        Command::Metrics(cmd) => metrics(cmd, s),
        Command::Score(a) => score(a, s),
        Command::Runs(RunsCmd::Aggregate(a)) => {
            s.input("data", &a.data)?;
            let log = load_run_log(&a.data)?;
            let mode = match (a.mode, a.k) {
                (ModeArg::All, _) => AggregateMode::All,
                (ModeArg::BoundariesOut, _) => AggregateMode::BoundariesOut,
                (ModeArg::TopK, Some(k)) => AggregateMode::TopK { k },
                (ModeArg::TopK, None) => return Err(Failure::Usage("--mode top_k needs --k".into())),
            };
            let std = match a.std {
                StdArg::Population => StdConvention::Population,
                StdArg::Sample => StdConvention::Sample,
            };
            s.section("runs", &aggregate_runs(&log, mode, std)?)?;
            s.finish(&a.output)
        }
        Command::Scm(cmd) => scm(cmd),
        Command::Report(a) => {
            let report = Report::from_json_str(&read_file(&a.input)?)?;
            Session { report }.finish(&a.output)
        }
    }
}

#[derive(Serialize)]
struct CensusView {
    chains: usize,
    forks: usize,
    colliders: usize,
    chain_list: Vec<String>,
    fork_list: Vec<String>,
    collider_list: Vec<String>,
    confounded_edges: Vec<String>,
}

#[derive(Serialize)]
struct DsepView<'a> {
    x: &'a str,
    y: &'a str,
    given: &'a [String],
    #[serde(rename = "d-separated")]
    d_separated: bool,
}

#[derive(Serialize)]
struct GraphView {
    variables: usize,
    edges: usize,
    topological_order: Vec<String>,
}

fn graph(cmd: GraphCmd, mut s: Session) -> Outcome {
    match cmd {
        GraphCmd::Validate(a) => {
            s.input("graph", &a.graph)?;
            let g = load_graph(&a.graph)?;
            let order = validate_dag(&g)?;
            s.section("graph", &GraphView { variables: g.len(), edges: g.edge_count(), topological_order: order })?;
            s.section("desiderata", &desiderata_report(&g))?;
            s.finish(&a.output)
        }
        GraphCmd::Census(a) => {
            s.input("graph", &a.graph)?;
            let g = load_graph(&a.graph)?;
            let c = junction_census(&g);
            let view = CensusView {
                chains: c.chains.len(),
                forks: c.forks.len(),
                colliders: c.colliders.len(),
                chain_list: c.chains.iter().map(|(a, b, c)| format!("{a} -> {b} -> {c}")).collect(),
                fork_list: c.forks.iter().map(|(a, b, c)| format!("{a} <- {b} -> {c}")).collect(),
                collider_list: c.colliders.iter().map(|(a, b, c)| format!("{a} -> {b} <- {c}")).collect(),
                confounded_edges: find_confounders(&g)
                    .iter()
                    .map(|f| format!("{} -> {} confounded by {}", f.cause, f.effect, f.confounder))
                    .collect(),
            };
            s.section("census", &view)?;
            s.finish(&a.output)
        }
        GraphCmd::Dsep(a) => {
            s.input("graph", &a.graph)?;
            let g = load_graph(&a.graph)?;
            let given: Vec<&str> = a.given.iter().map(String::as_str).collect();
            let sep = d_separated(&g, &a.x, &a.y, &given)?;
            s.section("dsep", &DsepView { x: &a.x, y: &a.y, given: &a.given, d_separated: sep })?;
            s.finish(&a.output)
        }
        GraphCmd::Compare(a) => {
            s.input("graph", &a.graph)?;
            s.input("predicted", &a.predicted)?;
            let truth = load_graph(&a.graph)?;
            let predicted = load_graph(&a.predicted)?;
            let scores = match &a.scores {
                Some(p) => {
                    s.input("scores", p)?;
                    Some(load_edge_scores(p)?)
                }
                None => None,
            };
            s.section("comparison", &compare_graphs(&truth, &predicted, scores.as_ref())?)?;
            s.finish(&a.output)
        }
    }
}

#[derive(Serialize)]
struct Chi2View<'a, T: Serialize> {
    x: &'a str,
    y: &'a str,
    given: &'a [String],
    bins: usize,
    test: T,
}

fn indep(cmd: IndepCmd, mut s: Session) -> Outcome {
    match cmd {
        IndepCmd::Chi2(a) => {
            s.input("data", &a.data)?;
            let data = discretize_table(&table(&a.data)?, a.bins)?;
            let given: Vec<&str> = a.given.iter().map(String::as_str).collect();
            let test = chi2_independence(&data, &a.x, &a.y, &given, a.alpha)?;
            s.section("chi2", &Chi2View { x: &a.x, y: &a.y, given: &a.given, bins: a.bins, test })?;
            s.finish(&a.output)
        }
        IndepCmd::Audit(a) => {
            s.input("graph", &a.graph)?;
            s.input("data", &a.data)?;
            let g = load_graph(&a.graph)?;
            let data = discretize_table(&table(&a.data)?, a.bins)?;
            s.section("audit", &audit_graph_against_data(&g, &data, a.max_conditioning, a.alpha)?)?;
            s.finish(&a.output)
        }
        IndepCmd::Filter(a) => {
            let data = table(&a.data)?;
            let kept = enforce_independence(&data, &a.x, &a.y, a.seed)?;
            artifact(a.out.as_deref(), &kept.to_csv_string())
        }
    }
}

#[derive(Serialize)]
struct MetricValue {
    metric: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct AssignView<T: Serialize, U: Serialize, V: Serialize> {
    factors: Vec<String>,
    latents: Vec<String>,
    association: T,
    hungarian: U,
    sweep: Option<V>,
}

fn metrics(cmd: MetricsCmd, mut s: Session) -> Outcome {
    match cmd {
        MetricsCmd::Disentangle(a) => {
            s.input("factors", &a.factors)?;
            s.input("latents", &a.latents)?;
            let factors = table(&a.factors)?;
            let latents = table(&a.latents)?;
            let config = SuiteConfig { bins: a.bins, seed: a.seed };
            s.section("config", &config)?;
            s.section("disentanglement", &disentanglement_suite(&factors, &latents, &config)?)?;
            s.finish(&a.output)
        }
        MetricsCmd::Generation(a) => {
            let (name, value) = match a.metric {
                GenerationMetric::Fid | GenerationMetric::Kid => {
                    let name = if a.metric == GenerationMetric::Fid { "fid" } else { "kid" };
                    let real = required(&a.real, "real", name)?;
                    let generated = required(&a.generated, "generated", name)?;
                    s.input("real", real)?;
                    s.input("generated", generated)?;
                    let (x, y) = (load_embeddings(real)?, load_embeddings(generated)?);
                    (name, if name == "fid" { fid(&x, &y)? } else { kid(&x, &y)? })
                }
                GenerationMetric::Is => {
                    let probs = required(&a.probs, "probs", "is")?;
                    s.input("probs", probs)?;
                    ("is", inception_score(&load_probabilities(probs)?))
                }
                GenerationMetric::Iou | GenerationMetric::PixelL1 => {
                    let name = if a.metric == GenerationMetric::Iou { "iou" } else { "pixel-l1" };
                    let real = required(&a.real, "real", name)?;
                    let generated = required(&a.generated, "generated", name)?;
                    s.input("real", real)?;
                    s.input("generated", generated)?;
                    let (x, y) = (load_mask(real)?, load_mask(generated)?);
                    (name, if name == "iou" { iou(&x, &y)? } else { pixel_l1(&x, &y)? })
                }
                GenerationMetric::Reconstruction | GenerationMetric::Composition => {
                    let name = if a.metric == GenerationMetric::Reconstruction { "reconstruction" } else { "composition" };
                    let real = required(&a.real, "real", name)?;
                    let generated = required(&a.generated, "generated", name)?;
                    s.input("real", real)?;
                    s.input("generated", generated)?;
                    let (x, y) = (table(real)?, table(generated)?);
                    let mode = match a.error {
                        ErrorArg::Mae => ErrorMode::Mae,
                        ErrorArg::Mse => ErrorMode::Mse,
                    };
                    let v = if name == "reconstruction" { reconstruction_score(&x, &y, mode)? } else { composition_l1(&x, &y)? };
                    (name, v)
                }
            };
            s.section("generation", &MetricValue { metric: name, value })?;
            s.finish(&a.output)
        }
        MetricsCmd::Assign(a) => {
            s.input("factors", &a.factors)?;
            s.input("latents", &a.latents)?;
            let factors = table(&a.factors)?;
            let latents = table(&a.latents)?;
            let metric = match a.metric {
                PairArg::Mic => PairMetric::Mic,
                PairArg::Tic => PairMetric::Tic,
            };
            let m = association_matrix(&factors, &latents, metric)?;
            let hungarian = hungarian_match(&m)?;
            let sweep = if m.cols() <= SWEEP_LIMIT { Some(permutation_sweep(&m)?) } else { None };
            let view = AssignView {
                factors: factors.columns().iter().map(|c| c.name.clone()).collect(),
                latents: latents.columns().iter().map(|c| c.name.clone()).collect(),
                association: &m,
                hungarian,
                sweep,
            };
            s.section("assignment", &view)?;
            s.finish(&a.output)
        }
    }
}

fn score(a: ScoreArgs, mut s: Session) -> Outcome {
    s.input("config", &a.config)?;
    let mut config = load_card_config(&a.config)?;
    if let Some(h) = a.h {
        config.card.h = h;
    }
    if a.degenerate_to_half {
        config.card.degenerate_to_half = true;
    }
    let values = match &a.values {
        Some(p) => {
            s.input("values", p)?;
            Some(load_values(p)?)
        }
        None => None,
    };
    let base = a.config.parent().unwrap_or(Path::new("."));
    for m in &config.models {
        if let Some(f) = &m.values_file {
            s.input(&format!("values_file:{}", m.name), &base.join(f))?;
        }
    }
    let models = resolve_models(&config, base, values.as_ref())?;
    let card = build_scorecard(&config, &models)?;
    if let Some(path) = &a.svg {
        let kind = match a.plot {
            PlotArg::Radar => PlotKind::Radar,
            PlotArg::Origami => PlotKind::Origami { h: card.h },
        };
        let svg = emit_svg(&PlotSpec::from_card(&card, kind))?;
        write_out(Some(path), &svg)?;
    }
    s.section("scorecard", &card)?;
    s.finish(&a.output)
}

fn scm(cmd: ScmCmd) -> Outcome {
    match cmd {
        ScmCmd::Sample(a) => {
            let model = load_scm(&a.scm)?;
            artifact(a.out.as_deref(), &model.sample(a.n, a.seed)?.to_csv_string())
        }
        ScmCmd::Intervene(a) => {
            let model = load_scm(&a.scm)?.intervene(&assignments(&a.set)?)?;
            artifact(a.out.as_deref(), &model.sample(a.n, a.seed)?.to_csv_string())
        }
        ScmCmd::Counterfactual(a) => {
            let model = load_scm(&a.scm)?;
            let set = assignments(&a.set)?;
            let obs = table(&a.data)?;
            let vars = model.graph().variables().to_vec();
            let mut cols: Vec<Vec<f64>> = (0..vars.len()).map(|_| Vec::with_capacity(obs.n_rows())).collect();
            for r in 0..obs.n_rows() {
                let row: BTreeMap<String, f64> =
                    obs.columns().iter().enumerate().map(|(c, spec)| (spec.name.clone(), obs.column(c)[r])).collect();
                let cf = model.counterfactual_named(&row, &set)?;
                for (col, v) in cols.iter_mut().zip(&vars) {
                    col.push(cf[&v.name]);
                }
            }
            artifact(a.out.as_deref(), &DataTable::new(vars, cols)?.to_csv_string())
        }
        ScmCmd::Pendulum(a) => {
            if let Some(n) = a.n {
                return artifact(a.out.as_deref(), &sample_pendulum_table(n, a.seed)?.to_csv_string());
            }
            let (Some(angle), Some(light)) = (a.angle, a.light) else {
                return Err(Failure::Usage("scm pendulum needs --angle and --light, or --n".into()));
            };
            artifact(a.out.as_deref(), &render_pendulum(angle, light)?.raster.to_pbm_string())
        }
    }
}
