//! Reconstruction and counterfactual evaluation from precomputed artifacts:
//! embeddings, class probabilities, tables and binary masks.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{read_text, BinaryMask, DataTable, TableSchema};

/// One embedding per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    rows: Vec<Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Invalid(format!("embedding set needs at least 2 rows, got {}", rows.len())));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::Invalid("embeddings have no dimensions".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRow { row: i + 1, expected: d, found: r.len() });
            }
            if let Some(c) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { column: format!("dim{c}"), row: i + 1 });
            }
        }
        Ok(EmbeddingSet { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        EmbeddingSet::new(rows_of(&DataTable::parse_csv(text, &TableSchema::Infer)?))
    }

    fn mean(&self) -> DVector<f64> {
        let mut mu = DVector::zeros(self.dim());
        for r in &self.rows {
            for (m, v) in mu.iter_mut().zip(r) {
                *m += v;
            }
        }
        mu / self.len() as f64
    }

    /// Unbiased covariance.
    fn covariance(&self, mu: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut cov = DMatrix::zeros(d, d);
        for r in &self.rows {
            for i in 0..d {
                let a = r[i] - mu[i];
                for j in 0..d {
                    cov[(i, j)] += a * (r[j] - mu[j]);
                }
            }
        }
        cov / (self.len() - 1) as f64
    }
}

fn rows_of(t: &DataTable) -> Vec<Vec<f64>> {
    (0..t.n_rows()).map(|r| t.row(r)).collect()
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    EmbeddingSet::parse_csv(&read_text(path.as_ref())?)
}

/// Row-stochastic class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    rows: Vec<Vec<f64>>,
}

impl ProbTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("probability table has no rows".into()));
        }
        let k = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::RaggedRow { row: i + 1, expected: k, found: r.len() });
            }
            if r.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::Invalid(format!("row {} has a negative or non-finite probability", i + 1)));
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::Invalid(format!("row {} sums to {sum}, not 1", i + 1)));
            }
        }
        Ok(ProbTable { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        ProbTable::new(rows_of(&DataTable::parse_csv(text, &TableSchema::Infer)?))
    }
}

pub fn load_probabilities(path: impl AsRef<Path>) -> Result<ProbTable> {
    ProbTable::parse_csv(&read_text(path.as_ref())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMode {
    Mae,
    Mse,
}

fn check_same_shape(a: &DataTable, b: &DataTable) -> Result<()> {
    if a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols() {
        return Err(Error::Shape(format!(
            "{}x{} table against {}x{}",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    Ok(())
}

fn mean_cell_error(a: &DataTable, b: &DataTable, f: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for c in 0..a.n_cols() {
        for (x, y) in a.column(c).iter().zip(b.column(c)) {
            total += f(x - y);
        }
    }
    total / (a.n_rows() * a.n_cols()) as f64
}

/// `1 - MAE` or `1 - MSE` over all cells. Values must lie in `[0, 1]`.
pub fn reconstruction_score(original: &DataTable, reconstructed: &DataTable, mode: ErrorMode) -> Result<f64> {
    check_same_shape(original, reconstructed)?;
    for t in [original, reconstructed] {
        for c in 0..t.n_cols() {
            if let Some(row) = t.column(c).iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Invalid(format!(
                    "column {} row {} lies outside [0, 1]",
                    t.columns()[c].name,
                    row + 1
                )));
            }
        }
    }
    let err = match mode {
        ErrorMode::Mae => mean_cell_error(original, reconstructed, f64::abs),
        ErrorMode::Mse => mean_cell_error(original, reconstructed, |d| d * d),
    };
    Ok(1.0 - err)
}

/// Mean absolute cell difference between an input and the output of an empty
/// intervention.
pub fn composition_l1(original: &DataTable, null_intervention_output: &DataTable) -> Result<f64> {
    check_same_shape(original, null_intervention_output)?;
    Ok(mean_cell_error(original, null_intervention_output, f64::abs))
}

fn check_dims(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("embedding dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Fréchet distance between Gaussians fitted to the two sets.
pub fn fid(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<f64> {
    check_dims(a, b)?;
    let (mu_a, mu_b) = (a.mean(), b.mean());
    let (cov_a, cov_b) = (a.covariance(&mu_a), b.covariance(&mu_b));
    let d = a.dim();

    // With cov_a = V diag(e) V', the product cov_a^(1/2) cov_b cov_a^(1/2)
    // is similar to diag(sqrt e) (V' cov_b V) diag(sqrt e).
    let eig_a = SymmetricEigen::new(cov_a.clone());
    let e: Vec<f64> = eig_a.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    let rotated = eig_a.eigenvectors.transpose() * &cov_b * &eig_a.eigenvectors;
    let inner = DMatrix::from_fn(d, d, |i, j| (e[i] * e[j]).sqrt() * rotated[(i, j)]);
    let inner = (&inner + inner.transpose()) * 0.5;
    let trace_sqrt: f64 = SymmetricEigen::new(inner).eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).sum();

    let mean_term = (&mu_a - &mu_b).norm_squared();
    Ok((mean_term + cov_a.trace() + cov_b.trace() - 2.0 * trace_sqrt).max(0.0))
}

fn poly_kernel(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (dot / x.len() as f64 + 1.0).powi(3)
}

/// Unbiased squared MMD with the cubic polynomial kernel over the full sets.
/// Negative values are legal.
pub fn kid(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<f64> {
    check_dims(a, b)?;
    let within = |s: &EmbeddingSet| -> f64 {
        let n = s.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    total += poly_kernel(&s.rows[i], &s.rows[j]);
                }
            }
        }
        total / (n * (n - 1)) as f64
    };
    let mut cross = 0.0;
    for x in &a.rows {
        for y in &b.rows {
            cross += poly_kernel(x, y);
        }
    }
    cross /= (a.len() * b.len()) as f64;
    Ok(within(a) + within(b) - 2.0 * cross)
}

/// `exp` of the mean KL divergence (nats) of each row from the column mean.
pub fn inception_score(p: &ProbTable) -> f64 {
    let n = p.rows.len() as f64;
    let k = p.rows[0].len();
    let marginal: Vec<f64> = (0..k).map(|c| p.rows.iter().map(|r| r[c]).sum::<f64>() / n).collect();
    let mean_kl = p
        .rows
        .iter()
        .map(|r| r.iter().zip(&marginal).filter(|(&q, _)| q > 0.0).map(|(&q, &m)| q * (q / m).ln()).sum::<f64>())
        .sum::<f64>()
        / n;
    mean_kl.exp()
}

fn check_masks(a: &BinaryMask, b: &BinaryMask) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Shape(format!(
            "masks are {}x{} and {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Jaccard index; two empty masks count as a perfect match.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    check_masks(a, b)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    if union == 0 {
        log::warn!("both masks are empty; IoU defined as 1");
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Fraction of disagreeing pixels.
pub fn pixel_l1(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    check_masks(a, b)?;
    let diff = a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.bits().len().max(1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    Classification,
    Regression,
}

/// Macro F1 over classes seen in either column, or mean absolute error.
pub fn effectiveness(target: &[f64], predicted: &[f64], kind: EffectKind) -> Result<f64> {
    if target.len() != predicted.len() {
        return Err(Error::Shape(format!("{} targets against {} predictions", target.len(), predicted.len())));
    }
    if target.is_empty() {
        return Err(Error::Invalid("no predictions to score".into()));
    }
    match kind {
        EffectKind::Regression => {
            Ok(target.iter().zip(predicted).map(|(a, b)| (a - b).abs()).sum::<f64>() / target.len() as f64)
        }
        EffectKind::Classification => {
            if target.iter().chain(predicted).any(|&v| v < 0.0 || v.fract() != 0.0) {
                return Err(Error::Invalid("classification columns must hold non-negative integer codes".into()));
            }
            let classes: std::collections::BTreeSet<i64> =
                target.iter().chain(predicted).map(|&v| v as i64).collect();
            let mut total = 0.0;
            for &c in &classes {
                let c = c as f64;
                let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
                for (&t, &p) in target.iter().zip(predicted) {
                    match (t == c, p == c) {
                        (true, true) => tp += 1,
                        (false, true) => fp += 1,
                        (true, false) => fneg += 1,
                        _ => {}
                    }
                }
                total += 2.0 * tp as f64 / (2 * tp + fp + fneg) as f64;
            }
            Ok(total / classes.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualCase {
    pub generated: BinaryMask,
    pub oracle: BinaryMask,
    pub variable: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterfactualAccuracy {
    pub mean_iou: f64,
    pub mean_l1: f64,
    pub cases: usize,
}

pub fn counterfactual_accuracy(cases: &[CounterfactualCase]) -> Result<CounterfactualAccuracy> {
    if cases.is_empty() {
        return Err(Error::Invalid("no counterfactual cases".into()));
    }
    let (mut i, mut l) = (0.0, 0.0);
    for c in cases {
        i += iou(&c.generated, &c.oracle)?;
        l += pixel_l1(&c.generated, &c.oracle)?;
    }
    let n = cases.len() as f64;
    Ok(CounterfactualAccuracy { mean_iou: i / n, mean_l1: l / n, cases: cases.len() })
}
