use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DataTable;

const LAMBDA_RATIO: f64 = 0.01;
const MAX_SWEEPS: usize = 1000;
const TOLERANCE: f64 = 1e-6;
const TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DciScores {
    pub disentanglement: f64,
    pub completeness: f64,
    pub informativeness: f64,
    /// `importance[latent][factor]`.
    pub importance: Vec<Vec<f64>>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Lasso on standardized columns, objective `|y - Xb|² / 2m + lambda |b|_1`,
/// by cyclic coordinate descent.
fn lasso(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = y.len() as f64;
    let d = x.len();
    let lambda = LAMBDA_RATIO
        * x.iter().map(|col| (col.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / m).abs()).fold(0.0, f64::max);
    let mut beta = vec![0.0; d];
    let mut resid = y.to_vec();
    for _ in 0..MAX_SWEEPS {
        let mut biggest = 0.0f64;
        for j in 0..d {
            let col = &x[j];
            // Columns with zero spread were zeroed during standardization.
            let norm = col.iter().map(|v| v * v).sum::<f64>() / m;
            if norm == 0.0 {
                continue;
            }
            let rho = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / m + norm * beta[j];
            let next = soft_threshold(rho, lambda) / norm;
            let step = next - beta[j];
            if step != 0.0 {
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= step * a;
                }
                beta[j] = next;
                biggest = biggest.max(step.abs());
            }
        }
        if biggest < TOLERANCE {
            break;
        }
    }
    beta
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Normalized entropy of a non-negative weight vector, in base `len`.
fn normalized_entropy(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if weights.len() < 2 || total <= 0.0 {
        return 0.0;
    }
    let h: f64 = weights.iter().filter(|&&w| w > 0.0).map(|w| -(w / total) * (w / total).ln()).sum();
    (h / (weights.len() as f64).ln()).clamp(0.0, 1.0)
}

/// Weighted mean of `1 - H` over groups, each group weighted by its share of
/// the total importance.
fn weighted_score(groups: &[Vec<f64>]) -> f64 {
    let total: f64 = groups.iter().flatten().sum();
    groups.iter().map(|g| g.iter().sum::<f64>() / total * (1.0 - normalized_entropy(g))).sum::<f64>().clamp(0.0, 1.0)
}

struct Target {
    factor: usize,
    values: Vec<f64>,
}

/// Disentanglement, completeness and informativeness from a lasso importance
/// matrix. Categorical factors are one-hot expanded and the importances of
/// their indicators summed. Rows are split 80/20 with `seed`.
pub fn dci(factors: &DataTable, latents: &DataTable, seed: u64) -> Result<DciScores> {
    super::check_rows(factors, latents)?;
    let n = factors.n_rows();
    let dims = latents.n_cols();
    if n < 10 * dims {
        return Err(Error::Invalid(format!("DCI needs at least {} samples for {dims} latents, got {n}", 10 * dims)));
    }
    let n_test = ((n as f64) * TEST_FRACTION).round() as usize;
    if n_test < 2 || n - n_test < 2 {
        return Err(Error::Invalid(format!("DCI needs a usable 80/20 split, got {n} samples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test, train) = order.split_at(n_test);

    let standardize = |col: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let (mean, sd) = mean_std(train.iter().map(|&r| col[r]));
        let scale = |rows: &[usize]| -> Vec<f64> {
            rows.iter().map(|&r| if sd > 0.0 { (col[r] - mean) / sd } else { 0.0 }).collect()
        };
        (scale(train), scale(test))
    };
    let (x_train, x_test): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..dims).map(|j| standardize(latents.column(j))).unzip();

    let mut targets = Vec::new();
    for (k, spec) in factors.columns().iter().enumerate() {
        let col = factors.column(k);
        if spec.is_categorical() {
            for level in 0..spec.cardinality.unwrap_or(2) {
                let values = col.iter().map(|&v| if v as usize == level { 1.0 } else { 0.0 }).collect();
                targets.push(Target { factor: k, values });
            }
        } else {
            targets.push(Target { factor: k, values: col.to_vec() });
        }
    }

    let k_count = factors.n_cols();
    let mut importance = vec![vec![0.0; k_count]; dims];
    let mut sq_err = vec![0.0; k_count];
    let mut spread = vec![0.0; k_count];
    for t in &targets {
        let (y_mean, y_sd) = mean_std(train.iter().map(|&r| t.values[r]));
        let test_y: Vec<f64> = test.iter().map(|&r| t.values[r]).collect();
        let (test_mean, _) = mean_std(test_y.iter().copied());
        spread[t.factor] += test_y.iter().map(|v| (v - test_mean) * (v - test_mean)).sum::<f64>();
        if y_sd == 0.0 {
            sq_err[t.factor] += test_y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>();
            continue;
        }
        let y: Vec<f64> = train.iter().map(|&r| (t.values[r] - y_mean) / y_sd).collect();
        let beta = lasso(&x_train, &y);
        for (j, b) in beta.iter().enumerate() {
            importance[j][t.factor] += b.abs();
        }
        for (i, actual) in test_y.iter().enumerate() {
            let pred = y_mean + y_sd * (0..dims).map(|j| beta[j] * x_test[j][i]).sum::<f64>();
            sq_err[t.factor] += (actual - pred) * (actual - pred);
        }
    }

    let informativeness = (0..k_count)
        .map(|k| {
            if spread[k] == 0.0 {
                log::warn!("factor '{}' is constant on the test split", factors.columns()[k].name);
                if sq_err[k] == 0.0 { 1.0 } else { 0.0 }
            } else {
                (1.0 - sq_err[k] / spread[k]).max(0.0)
            }
        })
        .sum::<f64>()
        / k_count.max(1) as f64;

    if importance.iter().flatten().all(|&v| v == 0.0) {
        log::warn!("DCI importance matrix is all zero; disentanglement and completeness set to 0");
        return Ok(DciScores { disentanglement: 0.0, completeness: 0.0, informativeness, importance });
    }
    let per_factor: Vec<Vec<f64>> = (0..k_count).map(|k| importance.iter().map(|row| row[k]).collect()).collect();
    Ok(DciScores {
        disentanglement: weighted_score(&importance),
        completeness: weighted_score(&per_factor),
        informativeness,
        importance,
    })
}
