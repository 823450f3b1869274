//! Structural causal model simulator: ancestral sampling, do-interventions,
//! abduction-based counterfactuals, and a pendulum scene rasterizer.
//!
//! SCM files are JSON documents with the graph fields (`variables`, `edges`)
//! plus `mechanisms` and `noise` maps keyed by variable name:
//!
//! ```json
//! {
//!   "variables": [{"name": "A", "kind": "numeric"}, {"name": "B", "kind": "numeric"}],
//!   "edges": [["A", "B"]],
//!   "mechanisms": {"B": {"type": "linear", "weights": {"A": 2.0}, "bias": 1.0}},
//!   "noise": {"A": {"type": "gaussian", "sigma": 1.0}}
//! }
//! ```
//!
//! Mechanism types are `linear` (optional `nonlinearity`: `tanh`, `square`,
//! `sin`, applied to the linear form before the additive noise),
//! `categorical` (one `{bias, weights}` logit row per level, softmax
//! sampled) and `constant`. Roots without a mechanism take their noise value;
//! categorical roots without one are uniform. Noise defaults to
//! `gaussian(0.1)`; `uniform` with `low == high` is a fixed offset.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generation::CounterfactualCase;
use crate::graph::topological_indices;
use crate::model::{read_text, BinaryMask, CausalGraph, DataTable, VariableDoc, VariableKind, VariableSpec};

pub const DEFAULT_SIGMA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Tanh,
    Square,
    Sin,
}

impl Nonlinearity {
    fn apply(self, v: f64) -> f64 {
        match self {
            Nonlinearity::Tanh => v.tanh(),
            Nonlinearity::Square => v * v,
            Nonlinearity::Sin => v.sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogitRow {
    #[serde(default)]
    pub bias: f64,
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Mechanism {
    Linear {
        #[serde(default)]
        weights: BTreeMap<String, f64>,
        #[serde(default)]
        bias: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nonlinearity: Option<Nonlinearity>,
    },
    Categorical {
        logits: Vec<LogitRow>,
    },
    Constant {
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Noise {
    Gaussian { sigma: f64 },
    Uniform { low: f64, high: f64 },
}

impl Default for Noise {
    fn default() -> Self {
        Noise::Gaussian { sigma: DEFAULT_SIGMA }
    }
}

impl Noise {
    fn check(&self, node: &str) -> Result<()> {
        let ok = match *self {
            Noise::Gaussian { sigma } => sigma.is_finite() && sigma > 0.0,
            Noise::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid noise for {node}: {self:?}")))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Noise::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Noise::Uniform { low, high } if low == high => low,
            Noise::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }
}

/// Mechanism with parent references resolved to indices.
#[derive(Debug, Clone, PartialEq)]
enum Compiled {
    Linear { terms: Vec<(usize, f64)>, bias: f64, nonlinearity: Option<Nonlinearity> },
    Categorical { rows: Vec<(f64, Vec<(usize, f64)>)> },
    Constant(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScmDoc {
    variables: Vec<VariableDoc>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    #[serde(default)]
    mechanisms: BTreeMap<String, Mechanism>,
    #[serde(default)]
    noise: BTreeMap<String, Noise>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    graph: CausalGraph,
    mechanisms: Vec<Mechanism>,
    noise: Vec<Noise>,
    compiled: Vec<Compiled>,
    order: Vec<usize>,
}

fn resolve_terms(g: &CausalGraph, node: usize, weights: &BTreeMap<String, f64>) -> Result<Vec<(usize, f64)>> {
    let name = g.name(node);
    let mut terms = Vec::new();
    for (parent, &w) in weights {
        let p = g.index_of(parent)?;
        if !g.parents(node).contains(&p) {
            return Err(Error::Invalid(format!("mechanism of {name} references {parent}, which is not a parent")));
        }
        if !w.is_finite() {
            return Err(Error::Invalid(format!("mechanism of {name} has a non-finite weight")));
        }
        terms.push((p, w));
    }
    if let Some(&p) = g.parents(node).iter().find(|&&p| !weights.contains_key(g.name(p))) {
        return Err(Error::Invalid(format!("mechanism of {name} has no weight for parent {}", g.name(p))));
    }
    Ok(terms)
}

fn linear_form(terms: &[(usize, f64)], bias: f64, value: impl Fn(usize) -> f64) -> f64 {
    terms.iter().fold(bias, |acc, &(p, w)| acc + w * value(p))
}

/// Independent generator per (seed, row, node).
fn stream(seed: u64, row: usize, node: usize) -> ChaCha8Rng {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed) ^ row as u64) ^ (node as u64).rotate_left(32)))
}

impl Scm {
    /// `mechanisms` and `noise` are indexed like the graph's variables.
    pub fn new(graph: CausalGraph, mechanisms: Vec<Option<Mechanism>>, noise: Vec<Option<Noise>>) -> Result<Self> {
        let n = graph.len();
        if mechanisms.len() != n || noise.len() != n {
            return Err(Error::Shape(format!("SCM over {n} variables needs {n} mechanism and noise slots")));
        }
        let order = topological_indices(&graph)?;
        let mut mechs = Vec::with_capacity(n);
        let mut compiled = Vec::with_capacity(n);
        for (v, m) in mechanisms.into_iter().enumerate() {
            let spec = &graph.variables()[v];
            let m = match m {
                Some(m) => m,
                None if !graph.parents(v).is_empty() => {
                    return Err(Error::Invalid(format!("non-root variable {} has no mechanism", spec.name)))
                }
                None => match spec.cardinality {
                    Some(card) => Mechanism::Categorical { logits: vec![LogitRow { bias: 0.0, weights: BTreeMap::new() }; card] },
                    None => Mechanism::Linear { weights: BTreeMap::new(), bias: 0.0, nonlinearity: None },
                },
            };
            compiled.push(compile(&graph, v, &m)?);
            mechs.push(m);
        }
        let noise: Vec<Noise> = noise.into_iter().map(Option::unwrap_or_default).collect();
        for (v, z) in noise.iter().enumerate() {
            z.check(graph.name(v))?;
        }
        Ok(Scm { graph, mechanisms: mechs, noise, compiled, order })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: ScmDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("scm: {e}")))?;
        let graph = crate::model::GraphDoc { variables: doc.variables, edges: doc.edges }.into_graph()?;
        for key in doc.mechanisms.keys().chain(doc.noise.keys()) {
            graph.index_of(key)?;
        }
        let names: Vec<String> = graph.variables().iter().map(|v| v.name.clone()).collect();
        let mut mechanisms = doc.mechanisms;
        let mut noise = doc.noise;
        Scm::new(
            graph,
            names.iter().map(|n| mechanisms.remove(n)).collect(),
            names.iter().map(|n| noise.remove(n)).collect(),
        )
    }

    pub fn to_json_string(&self) -> String {
        let g = crate::model::GraphDoc::from_graph(&self.graph);
        let doc = ScmDoc {
            variables: g.variables,
            edges: g.edges,
            mechanisms: (0..self.graph.len()).map(|v| (self.graph.name(v).to_string(), self.mechanisms[v].clone())).collect(),
            noise: (0..self.graph.len()).map(|v| (self.graph.name(v).to_string(), self.noise[v])).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("scm document serializes")
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn mechanism(&self, v: usize) -> &Mechanism {
        &self.mechanisms[v]
    }

    pub fn noise(&self, v: usize) -> Noise {
        self.noise[v]
    }

    fn node_value(&self, v: usize, rng: &mut ChaCha8Rng, value: impl Fn(usize) -> f64) -> f64 {
        match &self.compiled[v] {
            Compiled::Constant(c) => *c,
            Compiled::Linear { terms, bias, nonlinearity } => {
                let lin = linear_form(terms, *bias, value);
                nonlinearity.map_or(lin, |f| f.apply(lin)) + self.noise[v].draw(rng)
            }
            Compiled::Categorical { rows } => {
                let logits: Vec<f64> = rows.iter().map(|(b, terms)| linear_form(terms, *b, &value)).collect();
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
                let total: f64 = weights.iter().sum();
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                for (level, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return level as f64;
                    }
                }
                (weights.len() - 1) as f64
            }
        }
    }

    /// Ancestral sampling; row `r` of node `v` draws from its own stream, so
    /// the table does not depend on evaluation order.
    pub fn sample(&self, n: usize, seed: u64) -> Result<DataTable> {
        if n == 0 {
            return Err(Error::Invalid("sample size must be at least 1".into()));
        }
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); self.graph.len()];
        for &v in &self.order {
            let cols = &columns;
            let cell = |r: usize| self.node_value(v, &mut stream(seed, r, v), |p| cols[p][r]);
            #[cfg(feature = "parallel")]
            let col: Vec<f64> = {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(cell).collect()
            };
            #[cfg(not(feature = "parallel"))]
            let col: Vec<f64> = (0..n).map(cell).collect();
            columns[v] = col;
        }
        DataTable::new(self.graph.variables().to_vec(), columns)
    }

    /// Graph surgery: each assigned node loses its incoming edges and becomes
    /// a constant. The original model is left untouched.
    pub fn intervene(&self, assignments: &BTreeMap<String, f64>) -> Result<Scm> {
        let mut targets = Vec::new();
        for (name, &value) in assignments {
            let v = self.graph.index_of(name)?;
            if !value.is_finite() {
                return Err(Error::Invalid(format!("intervention value for {name} is not finite")));
            }
            targets.push((v, value));
        }
        let edges: Vec<(usize, usize)> =
            self.graph.edges().filter(|(_, b)| !targets.iter().any(|(t, _)| t == b)).collect();
        let graph = self.graph.with_edges(edges)?;
        let mut mechanisms: Vec<Option<Mechanism>> = self.mechanisms.iter().cloned().map(Some).collect();
        for &(v, value) in &targets {
            mechanisms[v] = Some(Mechanism::Constant { value });
        }
        Scm::new(graph, mechanisms, self.noise.iter().copied().map(Some).collect())
    }

    /// Abduction, surgery and prediction for one fully observed row, given
    /// in variable order. Nodes untouched by the intervention keep their
    /// observed value.
    pub fn counterfactual(&self, observation: &[f64], assignments: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
        let n = self.graph.len();
        if observation.len() != n {
            return Err(Error::Shape(format!("observation has {} values for {n} variables", observation.len())));
        }
        if let Some(v) = (0..n).find(|&v| {
            self.graph.variables()[v].is_categorical() || matches!(self.compiled[v], Compiled::Categorical { .. })
        }) {
            return Err(Error::Invalid(format!(
                "counterfactuals are not defined for categorical variable {}",
                self.graph.name(v)
            )));
        }
        if let Some(v) = observation.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { column: self.graph.name(v).to_string(), row: 1 });
        }
        let mut residual = vec![0.0; n];
        for &v in &self.order {
            let name = self.graph.name(v);
            match &self.compiled[v] {
                Compiled::Constant(c) => {
                    if observation[v] != *c {
                        return Err(Error::Invalid(format!(
                            "observation {name}={} contradicts its constant mechanism {c}",
                            observation[v]
                        )));
                    }
                }
                Compiled::Linear { terms, bias, nonlinearity } => {
                    let lin = linear_form(terms, *bias, |p| observation[p]);
                    let eps = observation[v] - nonlinearity.map_or(lin, |f| f.apply(lin));
                    if let Noise::Uniform { low, high } = self.noise[v] {
                        let tol = 1e-9 * observation[v].abs().max(1.0);
                        if eps < low - tol || eps > high + tol {
                            return Err(Error::Invalid(format!(
                                "observation of {name} implies noise {eps}, outside [{low}, {high}]"
                            )));
                        }
                    }
                    residual[v] = eps;
                }
                Compiled::Categorical { .. } => unreachable!("rejected above"),
            }
        }
        let after = self.intervene(assignments)?;
        let mut out = observation.to_vec();
        let mut changed = vec![false; n];
        for &v in &after.order {
            let value = match &after.compiled[v] {
                Compiled::Constant(c) => *c,
                Compiled::Linear { terms, bias, nonlinearity } => {
                    if !terms.iter().any(|&(p, _)| changed[p]) {
                        continue;
                    }
                    let lin = linear_form(terms, *bias, |p| out[p]);
                    nonlinearity.map_or(lin, |f| f.apply(lin)) + residual[v]
                }
                Compiled::Categorical { .. } => unreachable!("rejected above"),
            };
            changed[v] = value.to_bits() != observation[v].to_bits();
            out[v] = value;
        }
        Ok(out)
    }

    /// Counterfactual for a named observation.
    pub fn counterfactual_named(
        &self,
        observation: &BTreeMap<String, f64>,
        assignments: &BTreeMap<String, f64>,
    ) -> Result<BTreeMap<String, f64>> {
        let mut row = Vec::with_capacity(self.graph.len());
        for v in self.graph.variables() {
            row.push(
                *observation
                    .get(&v.name)
                    .ok_or_else(|| Error::Invalid(format!("observation is missing {}", v.name)))?,
            );
        }
        for key in observation.keys() {
            self.graph.index_of(key)?;
        }
        let out = self.counterfactual(&row, assignments)?;
        Ok(self.graph.variables().iter().map(|v| v.name.clone()).zip(out).collect())
    }
}

fn compile(g: &CausalGraph, v: usize, m: &Mechanism) -> Result<Compiled> {
    let spec: &VariableSpec = &g.variables()[v];
    match m {
        Mechanism::Constant { value } => {
            if !g.parents(v).is_empty() {
                return Err(Error::Invalid(format!("constant mechanism of {} cannot have parents", spec.name)));
            }
            if !value.is_finite() {
                return Err(Error::Invalid(format!("constant of {} is not finite", spec.name)));
            }
            if let Some(card) = spec.cardinality {
                if value.fract() != 0.0 || *value < 0.0 || *value >= card as f64 {
                    return Err(Error::CodeOutOfRange { column: spec.name.clone(), code: *value, cardinality: card });
                }
            }
            Ok(Compiled::Constant(*value))
        }
        Mechanism::Linear { weights, bias, nonlinearity } => {
            if spec.kind == VariableKind::Categorical {
                return Err(Error::Invalid(format!("categorical variable {} needs a categorical mechanism", spec.name)));
            }
            if !bias.is_finite() {
                return Err(Error::Invalid(format!("bias of {} is not finite", spec.name)));
            }
            Ok(Compiled::Linear { terms: resolve_terms(g, v, weights)?, bias: *bias, nonlinearity: *nonlinearity })
        }
        Mechanism::Categorical { logits } => {
            let Some(card) = spec.cardinality else {
                return Err(Error::Invalid(format!("numeric variable {} cannot have a categorical mechanism", spec.name)));
            };
            if logits.len() != card {
                return Err(Error::Invalid(format!(
                    "categorical mechanism of {} has {} logit rows for cardinality {card}",
                    spec.name,
                    logits.len()
                )));
            }
            let rows = logits
                .iter()
                .map(|row| {
                    if !row.bias.is_finite() {
                        return Err(Error::Invalid(format!("logit bias of {} is not finite", spec.name)));
                    }
                    Ok((row.bias, resolve_terms(g, v, &row.weights)?))
                })
                .collect::<Result<_>>()?;
            Ok(Compiled::Categorical { rows })
        }
    }
}

pub fn load_scm(path: impl AsRef<Path>) -> Result<Scm> {
    Scm::from_json_str(&read_text(path.as_ref())?)
}

pub fn write_scm(scm: &Scm, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scm.to_json_string()).map_err(|e| Error::io(path, e))
}

/// Pendulum scene geometry, in scene units.
pub mod pendulum {
    pub const PIVOT: (f64, f64) = (0.5, 1.0);
    pub const ROD_LENGTH: f64 = 0.4;
    /// Shadows never get shorter than the rod's width.
    pub const ROD_WIDTH: f64 = 0.02;
    pub const LIGHT_HEIGHT: f64 = 2.0;
    /// Horizontal offset of the light at `light_angle = 0`.
    pub const LIGHT_REACH: f64 = 0.5;
    pub const RASTER: usize = 96;
    /// Square window `[VIEW_MIN, VIEW_MIN + VIEW_SIZE]` on both axes.
    pub const VIEW_MIN: f64 = -0.5;
    pub const VIEW_SIZE: f64 = 2.0;
    pub const PENDULUM_RANGE: (f64, f64) = (-45.0, 45.0);
    pub const LIGHT_RANGE: (f64, f64) = (60.0, 120.0);
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendulumScene {
    pub pendulum_angle: f64,
    pub light_angle: f64,
    pub shadow_length: f64,
    pub shadow_position: f64,
    /// Floor x-coordinates of the shadow ends, left to right.
    pub shadow_span: (f64, f64),
    pub raster: BinaryMask,
}

fn point_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Renders the pendulum (angle from vertical, degrees, positive to the right)
/// lit by a point light whose horizontal position follows `light_angle`
/// (90 = straight above the pivot). Both rod ends are projected from the
/// light onto the floor `y = 0`.
pub fn render_pendulum(pendulum_angle: f64, light_angle: f64) -> Result<PendulumScene> {
    use pendulum::*;
    let in_range = |v: f64, (lo, hi): (f64, f64)| v.is_finite() && v >= lo && v <= hi;
    if !in_range(pendulum_angle, PENDULUM_RANGE) {
        return Err(Error::Invalid(format!("pendulum angle {pendulum_angle} outside [-45, 45]")));
    }
    if !in_range(light_angle, LIGHT_RANGE) {
        return Err(Error::Invalid(format!("light angle {light_angle} outside [60, 120]")));
    }
    let theta = pendulum_angle.to_radians();
    let light = (PIVOT.0 + LIGHT_REACH * light_angle.to_radians().cos(), LIGHT_HEIGHT);
    let bob = (PIVOT.0 + ROD_LENGTH * theta.sin(), PIVOT.1 - ROD_LENGTH * theta.cos());
    let project = |p: (f64, f64)| light.0 + (p.0 - light.0) * light.1 / (light.1 - p.1);
    let (a, b) = (project(PIVOT), project(bob));
    let (lo, hi) = (a.min(b), a.max(b));
    let position = (lo + hi) / 2.0;
    let length = (hi - lo).max(ROD_WIDTH);
    let shadow = (position - length / 2.0, position + length / 2.0);

    let pixel = VIEW_SIZE / RASTER as f64;
    let reach = 0.75 * pixel;
    let mut raster = BinaryMask::blank(RASTER, RASTER);
    for row in 0..RASTER {
        let y = VIEW_MIN + VIEW_SIZE - (row as f64 + 0.5) * pixel;
        for col in 0..RASTER {
            let x = VIEW_MIN + (col as f64 + 0.5) * pixel;
            let on_rod = point_to_segment((x, y), PIVOT, bob) <= reach;
            let on_shadow = point_to_segment((x, y), (shadow.0, 0.0), (shadow.1, 0.0)) <= reach;
            if on_rod || on_shadow {
                raster.set(col, row, true);
            }
        }
    }
    Ok(PendulumScene {
        pendulum_angle,
        light_angle,
        shadow_length: length,
        shadow_position: position,
        shadow_span: shadow,
        raster,
    })
}

/// Variables a pendulum counterfactual may intervene on.
pub const PENDULUM_CAUSES: [&str; 2] = ["pendulum_angle", "light_angle"];

/// Samples `n` scenes with uniform causes, applies `intervention` (or none)
/// and pairs each factual raster with its counterfactual oracle raster.
pub fn pendulum_counterfactual_pairs(n: usize, seed: u64, intervention: Option<(&str, f64)>) -> Result<Vec<CounterfactualCase>> {
    use pendulum::*;
    if let Some((name, _)) = intervention {
        if !PENDULUM_CAUSES.contains(&name) {
            return Err(Error::UnknownVariable(format!("{name} (pendulum interventions target pendulum_angle or light_angle)")));
        }
    }
    let mut cases = Vec::with_capacity(n);
    for r in 0..n {
        let mut rng = stream(seed, r, 0);
        let theta = PENDULUM_RANGE.0 + (PENDULUM_RANGE.1 - PENDULUM_RANGE.0) * rng.random::<f64>();
        let phi = LIGHT_RANGE.0 + (LIGHT_RANGE.1 - LIGHT_RANGE.0) * rng.random::<f64>();
        let factual = render_pendulum(theta, phi)?;
        let (cf_theta, cf_phi) = match intervention {
            Some(("pendulum_angle", v)) => (v, phi),
            Some((_, v)) => (theta, v),
            None => (theta, phi),
        };
        let oracle = render_pendulum(cf_theta, cf_phi)?;
        let (variable, value) = intervention.map_or(("none".to_string(), 0.0), |(k, v)| (k.to_string(), v));
        cases.push(CounterfactualCase { generated: factual.raster, oracle: oracle.raster, variable, value });
    }
    Ok(cases)
}

/// Table of sampled pendulum causes and their derived shadow variables.
pub fn sample_pendulum_table(n: usize, seed: u64) -> Result<DataTable> {
    use pendulum::*;
    let mut cols: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(n)).collect();
    for r in 0..n {
        let mut rng = stream(seed, r, 0);
        let theta = PENDULUM_RANGE.0 + (PENDULUM_RANGE.1 - PENDULUM_RANGE.0) * rng.random::<f64>();
        let phi = LIGHT_RANGE.0 + (LIGHT_RANGE.1 - LIGHT_RANGE.0) * rng.random::<f64>();
        let s = render_pendulum(theta, phi)?;
        for (c, v) in cols.iter_mut().zip([theta, phi, s.shadow_length, s.shadow_position]) {
            c.push(v);
        }
    }
    DataTable::from_numeric(&["pendulum_angle", "light_angle", "shadow_length", "shadow_position"], cols)
}
