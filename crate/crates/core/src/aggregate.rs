//! Metric normalization, radar and origami areas, scorecards, and multi-run
//! aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{read_text, RunLog};

pub const DEFAULT_H: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Upward,
    Downward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub name: String,
    pub orientation: Orientation,
    pub bounded01: bool,
}

impl MetricDescriptor {
    pub fn new(name: impl Into<String>, orientation: Orientation, bounded01: bool) -> Self {
        MetricDescriptor { name: name.into(), orientation, bounded01 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeOptions {
    /// Map a constant unbounded column to 0.5 instead of failing.
    pub degenerate_to_half: bool,
}

/// Normalizes `raw[model][metric]` against the cohort of all models.
pub fn normalize(raw: &[Vec<f64>], descriptors: &[MetricDescriptor], options: NormalizeOptions) -> Result<Vec<Vec<f64>>> {
    let n = descriptors.len();
    for (m, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!("model {} has {} values for {n} metrics", m + 1, row.len())));
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { column: descriptors[c].name.clone(), row: m + 1 });
        }
    }
    let mut out = vec![vec![0.0; n]; raw.len()];
    for (c, d) in descriptors.iter().enumerate() {
        let column: Vec<f64> = raw.iter().map(|r| r[c]).collect();
        let upward: Vec<f64> = if d.bounded01 {
            if let Some(v) = column.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Invalid(format!("metric {} is declared bounded but has value {v}", d.name)));
            }
            column
        } else {
            if raw.len() < 2 {
                return Err(Error::Invalid(format!(
                    "unbounded metric {} needs at least 2 models to normalize",
                    d.name
                )));
            }
            let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi == lo {
                if !options.degenerate_to_half {
                    return Err(Error::Degenerate(format!("metric {} has the same value for every model", d.name)));
                }
                log::warn!("metric {} is constant across the cohort; normalized to 0.5", d.name);
                // 0.5 is its own flip.
                column.iter().map(|_| 0.5).collect()
            } else {
                column.iter().map(|v| (v - lo) / (hi - lo)).collect()
            }
        };
        for (m, v) in upward.into_iter().enumerate() {
            out[m][c] = match d.orientation {
                Orientation::Upward => v,
                Orientation::Downward => 1.0 - v,
            };
        }
    }
    Ok(out)
}

fn check_values(r: &[f64]) -> Result<()> {
    if r.len() < 3 {
        return Err(Error::Invalid(format!("need at least 3 axes, got {}", r.len())));
    }
    if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Invalid("axis values must be finite and non-negative".into()));
    }
    Ok(())
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Invalid(format!("auxiliary radius h must lie in (0, 1], got {h}")));
    }
    Ok(())
}

/// Polygon area of a radar chart with equally spaced axes.
pub fn radar_area(r: &[f64]) -> Result<f64> {
    check_values(r)?;
    let n = r.len();
    let cyclic: f64 = (0..n).map(|i| r[i] * r[(i + 1) % n]).sum();
    Ok((2.0 * PI / n as f64).sin() / 2.0 * cyclic)
}

/// Area of the origami polygon: metric axes alternate with auxiliary axes
/// held at radius `h`.
pub fn origami_area(r: &[f64], h: f64) -> Result<f64> {
    check_values(r)?;
    check_h(h)?;
    Ok((PI / r.len() as f64).sin() * h * r.iter().sum::<f64>())
}

/// Largest origami area for `n` axes, reached when every value is 1.
pub fn origami_max_area(n: usize, h: f64) -> Result<f64> {
    origami_area(&vec![1.0; n], h)
}

/// Origami area over its maximum, which equals the mean of the values.
pub fn origami_score(r: &[f64], h: f64) -> Result<f64> {
    check_values(r)?;
    check_h(h)?;
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelScore {
    pub name: String,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub radar_area: f64,
    pub origami_area: f64,
    pub origami_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreCard {
    pub name: String,
    pub h: f64,
    pub axes: Vec<MetricDescriptor>,
    /// In input order.
    pub models: Vec<ModelScore>,
    pub max_origami_area: f64,
    /// Model names by origami score, best first; ties by name.
    pub ranking: Vec<String>,
}

impl ScoreCard {
    pub fn model(&self, name: &str) -> Option<&ModelScore> {
        self.models.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdConvention {
    #[default]
    Population,
    Sample,
}

/// Parsed scorecard configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CardConfig {
    pub card: CardSection,
    #[serde(rename = "metric")]
    pub metrics: Vec<MetricDescriptor>,
    #[serde(rename = "model", default)]
    pub models: Vec<ModelEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CardSection {
    pub name: String,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub std: StdConvention,
    #[serde(default)]
    pub degenerate_to_half: bool,
}

fn default_h() -> f64 {
    DEFAULT_H
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub name: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// CSV of raw values, resolved relative to the config file.
    #[serde(default)]
    pub values_file: Option<PathBuf>,
}

impl CardConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: CardConfig = toml::from_str(text).map_err(|e| Error::Parse(format!("scorecard config: {}", e.message())))?;
        let mut seen = BTreeSet::new();
        for m in &cfg.metrics {
            if !seen.insert(m.name.as_str()) {
                return Err(Error::DuplicateName(m.name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for m in &cfg.models {
            if !seen.insert(m.name.as_str()) {
                return Err(Error::DuplicateName(m.name.clone()));
            }
        }
        Ok(cfg)
    }
}

pub fn load_card_config(path: impl AsRef<Path>) -> Result<CardConfig> {
    CardConfig::from_toml_str(&read_text(path.as_ref())?)
}

/// Raw metric values: one row per model, columns named after metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuesTable {
    pub metrics: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl ValuesTable {
    /// Header `model,<metric>,...`; the first column holds model names.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse(format!("values header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < 2 {
            return Err(Error::Parse("values table needs a model column and at least one metric".into()));
        }
        let metrics = header[1..].to_vec();
        let mut rows = Vec::new();
        let mut names = BTreeSet::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths { len, .. } => Error::RaggedRow {
                    row: i + 1,
                    expected: header.len(),
                    found: *len as usize,
                },
                _ => Error::Parse(format!("values row {}: {e}", i + 1)),
            })?;
            let name = rec[0].to_string();
            if !names.insert(name.clone()) {
                return Err(Error::DuplicateName(name));
            }
            let values = rec
                .iter()
                .skip(1)
                .zip(&metrics)
                .map(|(f, m)| {
                    let v: f64 = f.parse().map_err(|_| Error::Parse(format!("model {name} metric {m}: not a number: {f:?}")))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::NonFinite { column: m.clone(), row: i + 1 })
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push((name, values));
        }
        if rows.is_empty() {
            return Err(Error::Invalid("values table has no models".into()));
        }
        Ok(ValuesTable { metrics, rows })
    }

    /// Values of `model` reordered to `axes`.
    fn lookup(&self, model: &str, axes: &[MetricDescriptor]) -> Result<Vec<f64>> {
        let row = self
            .rows
            .iter()
            .find(|(n, _)| n == model)
            .ok_or_else(|| Error::UnknownVariable(format!("model {model} not in values table")))?;
        axes.iter()
            .map(|a| {
                self.metrics
                    .iter()
                    .position(|m| m == &a.name)
                    .map(|c| row.1[c])
                    .ok_or_else(|| Error::UnknownVariable(format!("metric {} not in values table", a.name)))
            })
            .collect()
    }
}

pub fn load_values(path: impl AsRef<Path>) -> Result<ValuesTable> {
    ValuesTable::parse_csv(&read_text(path.as_ref())?)
}

/// Resolves every model's raw values. Inline values win, then a per-model
/// file, then `values`. With no `[[model]]` entries every row of `values`
/// becomes a model, in file order.
pub fn resolve_models(config: &CardConfig, base_dir: &Path, values: Option<&ValuesTable>) -> Result<Vec<(String, Vec<f64>)>> {
    if config.models.is_empty() {
        let table = values.ok_or_else(|| Error::Invalid("card lists no models and no values table was given".into()))?;
        return table
            .rows
            .iter()
            .map(|(name, _)| Ok((name.clone(), table.lookup(name, &config.metrics)?)))
            .collect();
    }
    let mut files: BTreeMap<PathBuf, ValuesTable> = BTreeMap::new();
    let mut out = Vec::new();
    for m in &config.models {
        let raw = if let Some(v) = &m.values {
            if v.len() != config.metrics.len() {
                return Err(Error::Shape(format!(
                    "model {} has {} inline values for {} metrics",
                    m.name,
                    v.len(),
                    config.metrics.len()
                )));
            }
            v.clone()
        } else if let Some(file) = &m.values_file {
            let path = base_dir.join(file);
            if !files.contains_key(&path) {
                files.insert(path.clone(), load_values(&path)?);
            }
            files[&path].lookup(&m.name, &config.metrics)?
        } else if let Some(table) = values {
            table.lookup(&m.name, &config.metrics)?
        } else {
            return Err(Error::Invalid(format!("model {} has no values", m.name)));
        };
        out.push((m.name.clone(), raw));
    }
    Ok(out)
}

/// Normalizes the cohort and scores every model.
pub fn build_scorecard(config: &CardConfig, models: &[(String, Vec<f64>)]) -> Result<ScoreCard> {
    let axes = &config.metrics;
    let h = config.card.h;
    check_h(h)?;
    if axes.len() < 3 {
        return Err(Error::Invalid(format!("a scorecard needs at least 3 metrics, got {}", axes.len())));
    }
    if models.is_empty() {
        return Err(Error::Invalid("scorecard has no models".into()));
    }
    let raw: Vec<Vec<f64>> = models.iter().map(|m| m.1.clone()).collect();
    let normalized = normalize(&raw, axes, NormalizeOptions { degenerate_to_half: config.card.degenerate_to_half })?;
    let mut scored = Vec::new();
    for ((name, raw), norm) in models.iter().zip(normalized) {
        scored.push(ModelScore {
            name: name.clone(),
            raw: raw.clone(),
            radar_area: radar_area(&norm)?,
            origami_area: origami_area(&norm, h)?,
            origami_score: origami_score(&norm, h)?,
            normalized: norm,
        });
    }
    let mut ranking: Vec<&ModelScore> = scored.iter().collect();
    ranking.sort_by(|a, b| b.origami_score.total_cmp(&a.origami_score).then_with(|| a.name.cmp(&b.name)));
    let ranking = ranking.into_iter().map(|m| m.name.clone()).collect();
    Ok(ScoreCard {
        name: config.card.name.clone(),
        h,
        axes: axes.clone(),
        max_origami_area: origami_max_area(axes.len(), h)?,
        models: scored,
        ranking,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AggregateMode {
    All,
    BoundariesOut,
    TopK { k: usize },
}

impl AggregateMode {
    pub fn label(&self) -> String {
        match self {
            AggregateMode::All => "all".into(),
            AggregateMode::BoundariesOut => "boundaries_out".into(),
            AggregateMode::TopK { k } => format!("top_{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAggregate {
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    /// Run ids kept by the selection, ascending.
    pub runs: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunAggregate {
    pub mode: AggregateMode,
    pub std: StdConvention,
    pub metrics: Vec<MetricAggregate>,
}

/// Removes the lowest-id run holding the extreme value chosen by `better`.
fn drop_extreme(runs: &mut Vec<(i64, f64)>, better: impl Fn(f64, f64) -> bool) {
    let mut pick = 0;
    for i in 1..runs.len() {
        let (id, v) = runs[i];
        let (best_id, best) = runs[pick];
        if better(v, best) || (v == best && id < best_id) {
            pick = i;
        }
    }
    runs.remove(pick);
}

/// Per-metric mean and spread after selecting runs; each metric selects
/// independently.
pub fn aggregate_runs(log: &RunLog, mode: AggregateMode, std: StdConvention) -> Result<RunAggregate> {
    let mut metrics = Vec::new();
    for (metric, runs) in log.by_metric() {
        let mut runs: Vec<(i64, f64)> = runs;
        let kept: Vec<(i64, f64)> = match mode {
            AggregateMode::All => runs,
            AggregateMode::BoundariesOut => {
                if runs.len() < 3 {
                    return Err(Error::Invalid(format!(
                        "boundaries_out needs at least 3 runs, metric {metric} has {}",
                        runs.len()
                    )));
                }
                drop_extreme(&mut runs, |a, b| a > b);
                drop_extreme(&mut runs, |a, b| a < b);
                runs
            }
            AggregateMode::TopK { k } => {
                if k == 0 || runs.len() < k {
                    return Err(Error::Invalid(format!(
                        "top_{k} needs at least {k} runs, metric {metric} has {}",
                        runs.len()
                    )));
                }
                runs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                runs.truncate(k);
                runs
            }
        };
        let n = kept.len() as f64;
        let mean = kept.iter().map(|r| r.1).sum::<f64>() / n;
        let ss: f64 = kept.iter().map(|r| (r.1 - mean) * (r.1 - mean)).sum();
        let spread = match std {
            StdConvention::Population => (ss / n).sqrt(),
            StdConvention::Sample if kept.len() > 1 => (ss / (n - 1.0)).sqrt(),
            StdConvention::Sample => {
                log::warn!("sample std of metric {metric} is undefined for one run; reported as 0");
                0.0
            }
        };
        let mut ids: Vec<i64> = kept.iter().map(|r| r.0).collect();
        ids.sort_unstable();
        metrics.push(MetricAggregate { metric: metric.to_string(), mean, std: spread, runs: ids });
    }
    Ok(RunAggregate { mode, std, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RunRecord;

    fn log_of(values: &[f64]) -> RunLog {
        RunLog::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| RunRecord { run: i as i64, metric: "m".into(), value: v })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn unit_square_and_origami_extremes() {
        assert!((radar_area(&[1.0; 4]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(origami_area(&[0.0; 5], 0.25).unwrap(), 0.0);
        assert!((origami_max_area(8, 0.25).unwrap() - 0.765).abs() < 1e-3);
        assert_eq!(origami_score(&[1.0; 6], 0.5).unwrap(), 1.0);
        assert!(radar_area(&[1.0, 1.0]).is_err());
        assert!(origami_area(&[1.0; 3], 0.0).is_err());
    }

    #[test]
    fn normalize_flips_unbounded_downward() {
        let d = vec![MetricDescriptor::new("fid", Orientation::Downward, false)];
        let raw = vec![vec![15.3481], vec![14.6477], vec![169.1046]];
        let n = normalize(&raw, &d, NormalizeOptions::default()).unwrap();
        assert!((n[0][0] - 0.99547).abs() < 1e-5);
        assert_eq!((n[1][0], n[2][0]), (1.0, 0.0));
        let flat = vec![vec![2.0], vec![2.0]];
        assert!(normalize(&flat, &d, NormalizeOptions::default()).is_err());
        let half = normalize(&flat, &d, NormalizeOptions { degenerate_to_half: true }).unwrap();
        assert_eq!(half, vec![vec![0.5], vec![0.5]]);
    }

    #[test]
    fn run_modes_hand_case() {
        let log = log_of(&[1.0, 2.0, 3.0, 4.0, 10.0]);
        let all = aggregate_runs(&log, AggregateMode::All, StdConvention::Population).unwrap();
        assert_eq!(all.metrics[0].mean, 4.0);
        let b = aggregate_runs(&log, AggregateMode::BoundariesOut, StdConvention::Population).unwrap();
        assert_eq!(b.metrics[0].mean, 3.0);
        assert!((b.metrics[0].std - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(b.metrics[0].runs, vec![1, 2, 3]);
        let t = aggregate_runs(&log, AggregateMode::TopK { k: 3 }, StdConvention::Population).unwrap();
        assert!((t.metrics[0].mean - 17.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn boundaries_out_with_ties_drops_lowest_ids() {
        let log = log_of(&[5.0, 5.0, 5.0, 5.0]);
        let b = aggregate_runs(&log, AggregateMode::BoundariesOut, StdConvention::Sample).unwrap();
        assert_eq!(b.metrics[0].runs, vec![2, 3]);
        assert_eq!((b.metrics[0].mean, b.metrics[0].std), (5.0, 0.0));
        assert!(aggregate_runs(&log_of(&[1.0, 2.0]), AggregateMode::BoundariesOut, StdConvention::Population).is_err());
    }
}
