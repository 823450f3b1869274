//! Shared domain types and file ingestion.
//!
//! Graphs are stored as JSON (`variables` + `edges`), tables as headered CSV,
//! masks as plain PBM (P1) and run logs as `run,metric,value` CSV.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distinct integer values above which an integer column is treated as numeric
/// during schema inference.
pub const MAX_INFERRED_CARDINALITY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    /// Number of levels; `Some` iff the variable is categorical.
    pub cardinality: Option<usize>,
    pub observed: bool,
    /// Optional human-readable names for categorical codes.
    pub labels: Vec<String>,
}

impl VariableSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Numeric,
            cardinality: None,
            observed: true,
            labels: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, cardinality: usize) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Categorical,
            cardinality: Some(cardinality),
            observed: true,
            labels: Vec::new(),
        }
    }

    pub fn latent(mut self) -> Self {
        self.observed = false;
        self
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == VariableKind::Categorical
    }

    fn check(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Invalid("variable name must not be empty".into()));
        }
        match (self.kind, self.cardinality) {
            (VariableKind::Categorical, Some(c)) if c >= 2 => {}
            (VariableKind::Categorical, _) => {
                return Err(Error::Invalid(format!(
                    "categorical variable {} needs cardinality >= 2",
                    self.name
                )))
            }
            (VariableKind::Numeric, Some(_)) => {
                return Err(Error::Invalid(format!(
                    "numeric variable {} must not carry a cardinality",
                    self.name
                )))
            }
            (VariableKind::Numeric, None) => {}
        }
        if !self.labels.is_empty() && Some(self.labels.len()) != self.cardinality {
            return Err(Error::Invalid(format!(
                "variable {} has {} labels for cardinality {:?}",
                self.name,
                self.labels.len(),
                self.cardinality
            )));
        }
        Ok(())
    }
}

fn check_unique_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
    }
    Ok(())
}

/// A named DAG over typed variables. Latent confounders are ordinary nodes
/// with `observed == false`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    variables: Vec<VariableSpec>,
    edges: BTreeSet<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl CausalGraph {
    /// Builds a structurally valid graph. Acyclicity is not checked here; see
    /// [`crate::graph::validate_dag`].
    pub fn new(variables: Vec<VariableSpec>, edges: Vec<(usize, usize)>) -> Result<Self> {
        for v in &variables {
            v.check()?;
        }
        check_unique_names(variables.iter().map(|v| v.name.as_str()))?;
        let n = variables.len();
        let mut set = BTreeSet::new();
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a}, {b}) out of range for {n} variables")));
            }
            if a == b {
                return Err(Error::Invalid(format!("self-loop on {}", variables[a].name)));
            }
            if !set.insert((a, b)) {
                return Err(Error::Invalid(format!(
                    "duplicate edge {} -> {}",
                    variables[a].name, variables[b].name
                )));
            }
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(a, b) in &set {
            parents[b].push(a);
            children[a].push(b);
        }
        Ok(CausalGraph { variables, edges: set, parents, children })
    }

    /// Convenience constructor from names; every variable is numeric and observed.
    pub fn from_names(names: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let vars = names.iter().map(|n| VariableSpec::numeric(*n)).collect();
        let g = CausalGraph::new(vars, Vec::new())?;
        let idx = edges
            .iter()
            .map(|(a, b)| Ok((g.index_of(a)?, g.index_of(b)?)))
            .collect::<Result<Vec<_>>>()?;
        CausalGraph::new(g.variables, idx)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.variables[i].name
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Edge list as name pairs, sorted.
    pub fn edge_names(&self) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|&(a, b)| (self.name(a).to_string(), self.name(b).to_string()))
            .collect();
        out.sort();
        out
    }

    /// Copy with the given edges removed and the given ones added.
    pub(crate) fn with_edges(&self, edges: Vec<(usize, usize)>) -> Result<Self> {
        CausalGraph::new(self.variables.clone(), edges)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph: {e}")))?;
        let g = doc.into_graph()?;
        crate::graph::validate_dag(&g)?;
        Ok(g)
    }

    pub fn to_json_string(&self) -> String {
        let doc = GraphDoc::from_graph(self);
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct VariableDoc {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<usize>,
    #[serde(default = "default_true")]
    pub observed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

fn default_true() -> bool {
    true
}

impl From<&VariableSpec> for VariableDoc {
    fn from(v: &VariableSpec) -> Self {
        VariableDoc {
            name: v.name.clone(),
            kind: v.kind,
            cardinality: v.cardinality,
            observed: v.observed,
            labels: v.labels.clone(),
        }
    }
}

impl From<VariableDoc> for VariableSpec {
    fn from(d: VariableDoc) -> Self {
        VariableSpec {
            name: d.name,
            kind: d.kind,
            cardinality: d.cardinality,
            observed: d.observed,
            labels: d.labels,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct GraphDoc {
    pub variables: Vec<VariableDoc>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

impl GraphDoc {
    pub(crate) fn into_graph(self) -> Result<CausalGraph> {
        let vars: Vec<VariableSpec> = self.variables.into_iter().map(Into::into).collect();
        let base = CausalGraph::new(vars, Vec::new())?;
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| Ok((base.index_of(a)?, base.index_of(b)?)))
            .collect::<Result<Vec<_>>>()?;
        CausalGraph::new(base.variables, edges)
    }

    pub(crate) fn from_graph(g: &CausalGraph) -> Self {
        GraphDoc {
            variables: g.variables.iter().map(Into::into).collect(),
            edges: g
                .edges
                .iter()
                .map(|&(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
                .collect(),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a graph file and verifies it is a DAG.
pub fn load_graph(path: impl AsRef<Path>) -> Result<CausalGraph> {
    CausalGraph::from_json_str(&read_text(path.as_ref())?)
}

pub fn write_graph(g: &CausalGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, g.to_json_string()).map_err(|e| Error::io(path, e))
}

/// Column-typed sample matrix. Values are stored column-major; categorical
/// cells hold integer codes.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    columns: Vec<VariableSpec>,
    data: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub enum TableSchema {
    Infer,
    Explicit(Vec<VariableSpec>),
}

impl DataTable {
    pub fn new(columns: Vec<VariableSpec>, data: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != data.len() {
            return Err(Error::Shape(format!(
                "{} column specs for {} data columns",
                columns.len(),
                data.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::Invalid("table has no columns".into()));
        }
        for c in &columns {
            c.check()?;
        }
        check_unique_names(columns.iter().map(|c| c.name.as_str()))?;
        let rows = data[0].len();
        if rows == 0 {
            return Err(Error::Invalid("table has no rows".into()));
        }
        for (spec, col) in columns.iter().zip(&data) {
            if col.len() != rows {
                return Err(Error::Shape(format!("column {} has {} rows, expected {rows}", spec.name, col.len())));
            }
            for (row, &v) in col.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { column: spec.name.clone(), row });
                }
                if let Some(card) = spec.cardinality {
                    if v < 0.0 || v.fract() != 0.0 || v >= card as f64 {
                        return Err(Error::CodeOutOfRange {
                            column: spec.name.clone(),
                            code: v,
                            cardinality: card,
                        });
                    }
                }
            }
        }
        Ok(DataTable { columns, data })
    }

    /// All-numeric table from named columns.
    pub fn from_numeric(names: &[&str], data: Vec<Vec<f64>>) -> Result<Self> {
        DataTable::new(names.iter().map(|n| VariableSpec::numeric(*n)).collect(), data)
    }

    pub fn columns(&self) -> &[VariableSpec] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.data[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i]
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        Ok(self.column(self.column_index(name)?))
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.data.iter().map(|c| c[r]).collect()
    }

    /// Sub-table restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let data = self.data.iter().map(|c| rows.iter().map(|&r| c[r]).collect()).collect();
        DataTable::new(self.columns.clone(), data)
    }

    pub fn select_columns(&self, idx: &[usize]) -> Result<Self> {
        DataTable::new(
            idx.iter().map(|&i| self.columns[i].clone()).collect(),
            idx.iter().map(|&i| self.data[i].clone()).collect(),
        )
    }

    /// Observed columns only.
    pub fn observed(&self) -> Result<Self> {
        let idx: Vec<usize> = (0..self.n_cols()).filter(|&i| self.columns[i].observed).collect();
        self.select_columns(&idx)
    }

    pub fn parse_csv(text: &str, schema: &TableSchema) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse(format!("csv header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(|h| h.is_empty()) {
            return Err(Error::Parse("csv header row is empty".into()));
        }
        let width = header.len();
        let mut data = vec![Vec::new(); width];
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("csv row {}: {e}", row + 1)))?;
            if rec.len() != width {
                return Err(Error::RaggedRow { row: row + 1, expected: width, found: rec.len() });
            }
            for (c, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Parse(format!("row {} column {}: not a number: {field:?}", row + 1, header[c]))
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { column: header[c].clone(), row: row + 1 });
                }
                data[c].push(v);
            }
        }
        let columns = match schema {
            TableSchema::Infer => header.iter().zip(&data).map(|(h, col)| infer_column(h, col)).collect(),
            TableSchema::Explicit(specs) => {
                if specs.len() != width {
                    return Err(Error::Shape(format!("schema has {} columns, file has {width}", specs.len())));
                }
                for (s, h) in specs.iter().zip(&header) {
                    if &s.name != h {
                        return Err(Error::Parse(format!("schema column {} does not match header {h}", s.name)));
                    }
                }
                specs.clone()
            }
        };
        DataTable::new(columns, data)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for r in 0..self.n_rows() {
            for (c, spec) in self.columns.iter().enumerate() {
                if c > 0 {
                    out.push(',');
                }
                let v = self.data[c][r];
                if spec.is_categorical() {
                    let _ = write!(out, "{}", v as i64);
                } else {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Categorical iff every entry is a non-negative integer and there are at most
/// [`MAX_INFERRED_CARDINALITY`] distinct values.
fn infer_column(name: &str, values: &[f64]) -> VariableSpec {
    let integral = values.iter().all(|&v| v >= 0.0 && v.fract() == 0.0 && v < 1e15);
    if integral {
        let distinct: BTreeSet<i64> = values.iter().map(|&v| v as i64).collect();
        if distinct.len() <= MAX_INFERRED_CARDINALITY {
            let max = distinct.iter().next_back().copied().unwrap_or(0) as usize;
            if max < 4096 {
                return VariableSpec::categorical(name, (max + 1).max(2));
            }
        }
    }
    VariableSpec::numeric(name)
}

pub fn load_table(path: impl AsRef<Path>, schema: &TableSchema) -> Result<DataTable> {
    DataTable::parse_csv(&read_text(path.as_ref())?, schema)
}

pub fn write_table(t: &DataTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, t.to_csv_string()).map_err(|e| Error::io(path, e))
}

/// Row-major boolean raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid("mask dimensions must be positive".into()));
        }
        if bits.len() != width * height {
            return Err(Error::Shape(format!("{} bits for a {width}x{height} mask", bits.len())));
        }
        Ok(BinaryMask { width, height, bits })
    }

    pub fn blank(width: usize, height: usize) -> Self {
        BinaryMask { width, height, bits: vec![false; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        BinaryMask { width: self.width, height: self.height, bits: self.bits.iter().map(|b| !b).collect() }
    }

    /// Parses plain PBM (`P1`). Comments start with `#`; pixel digits may or
    /// may not be whitespace separated.
    pub fn parse_pbm(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            tokens.extend(line.split_whitespace());
        }
        let mut it = tokens.into_iter();
        if it.next() != Some("P1") {
            return Err(Error::Parse("pbm: missing P1 magic".into()));
        }
        let mut dim = || -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse("pbm: missing dimension".into()))?
                .parse()
                .map_err(|_| Error::Parse("pbm: bad dimension".into()))
        };
        let width = dim()?;
        let height = dim()?;
        let mut bits = Vec::with_capacity(width * height);
        for tok in it {
            for ch in tok.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(Error::Parse(format!("pbm: unexpected character {ch:?}"))),
                }
            }
        }
        BinaryMask::new(width, height, bits)
    }

    pub fn to_pbm_string(&self) -> String {
        let mut out = format!("P1\n{} {}\n", self.width, self.height);
        for row in self.bits.chunks(self.width) {
            let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    BinaryMask::parse_pbm(&read_text(path.as_ref())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: i64,
    pub metric: String,
    pub value: f64,
}

/// Per-run metric values; `(run, metric)` pairs are unique.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    records: Vec<RunRecord>,
}

impl RunLog {
    pub fn new(records: Vec<RunRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if !r.value.is_finite() {
                return Err(Error::NonFinite { column: r.metric.clone(), row: r.run as usize });
            }
            if !seen.insert((r.run, r.metric.as_str())) {
                return Err(Error::DuplicateName(format!("run {} metric {}", r.run, r.metric)));
            }
        }
        Ok(RunLog { records })
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    /// Metric name to `(run, value)` list, runs in file order.
    pub fn by_metric(&self) -> BTreeMap<&str, Vec<(i64, f64)>> {
        let mut out: BTreeMap<&str, Vec<(i64, f64)>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.metric.as_str()).or_default().push((r.run, r.value));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut records = Vec::new();
        for rec in reader.deserialize() {
            let rec: RunRecord = rec.map_err(|e| Error::Parse(format!("run log: {e}")))?;
            records.push(rec);
        }
        RunLog::new(records)
    }
}

pub fn load_run_log(path: impl AsRef<Path>) -> Result<RunLog> {
    RunLog::parse_csv(&read_text(path.as_ref())?)
}
