//! Data-level checks of a declared causal graph: Pearson χ² tests of
//! (conditional) independence, whole-graph audits, and subsampling that makes
//! a pair of variables empirically independent.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::graph::{implied_independencies, Independence};
use crate::model::{CausalGraph, DataTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    /// `p_value < alpha`.
    pub dependent: bool,
    /// Cells with expected count below 5, summed over strata.
    pub low_expected_cells: usize,
}

/// Upper tail of the χ² distribution, via the regularized upper incomplete
/// gamma function.
pub fn chi2_survival(statistic: f64, dof: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
}

fn categorical_column<'a>(data: &'a DataTable, name: &str) -> Result<(&'a [f64], usize)> {
    let i = data.column_index(name)?;
    let spec = &data.columns()[i];
    match spec.cardinality {
        Some(card) => Ok((data.column(i), card)),
        None => Err(Error::Invalid(format!(
            "column {name} is numeric; discretize it first (e.g. --bins)"
        ))),
    }
}

/// Statistic and dof of one stratum's `rows x cols` contingency table. Empty
/// rows and columns are dropped; a stratum with fewer than two observed
/// levels on either side contributes nothing.
fn stratum_statistic(table: &[usize], rows: usize, cols: usize) -> (f64, usize, usize) {
    let row_tot: Vec<usize> = (0..rows).map(|r| table[r * cols..(r + 1) * cols].iter().sum()).collect();
    let col_tot: Vec<usize> = (0..cols).map(|c| (0..rows).map(|r| table[r * cols + c]).sum()).collect();
    let live_r = row_tot.iter().filter(|&&t| t > 0).count();
    let live_c = col_tot.iter().filter(|&&t| t > 0).count();
    if live_r < 2 || live_c < 2 {
        return (0.0, 0, 0);
    }
    let n: usize = row_tot.iter().sum();
    let n = n as f64;
    let mut stat = 0.0;
    let mut low = 0;
    for r in (0..rows).filter(|&r| row_tot[r] > 0) {
        for c in (0..cols).filter(|&c| col_tot[c] > 0) {
            let e = row_tot[r] as f64 * col_tot[c] as f64 / n;
            let d = table[r * cols + c] as f64 - e;
            stat += d * d / e;
            if e < 5.0 {
                low += 1;
            }
        }
    }
    (stat, (live_r - 1) * (live_c - 1), low)
}

/// Pearson χ² test of `x ⫫ y | given`, stratified over the observed joint
/// levels of `given`. No continuity correction.
pub fn chi2_independence(data: &DataTable, x: &str, y: &str, given: &[&str], alpha: f64) -> Result<Chi2Result> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (xs, kx) = categorical_column(data, x)?;
    let (ys, ky) = categorical_column(data, y)?;
    let zs = given
        .iter()
        .map(|g| categorical_column(data, g))
        .collect::<Result<Vec<_>>>()?;

    let mut strata: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for r in 0..data.n_rows() {
        let key: Vec<usize> = zs.iter().map(|(col, _)| col[r] as usize).collect();
        let cell = strata.entry(key).or_insert_with(|| vec![0; kx * ky]);
        cell[xs[r] as usize * ky + ys[r] as usize] += 1;
    }
    let mut statistic = 0.0;
    let mut dof = 0;
    let mut low_expected_cells = 0;
    for table in strata.values() {
        let (s, d, low) = stratum_statistic(table, kx, ky);
        statistic += s;
        dof += d;
        low_expected_cells += low;
    }
    if dof == 0 {
        return Err(Error::Degenerate(format!(
            "no stratum has two observed levels of both {x} and {y} (0 degrees of freedom)"
        )));
    }
    let p_value = chi2_survival(statistic, dof);
    Ok(Chi2Result { statistic, dof, p_value, alpha, dependent: p_value < alpha, low_expected_cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Independent,
    Dependent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub x: String,
    pub y: String,
    pub given: Vec<String>,
    pub expected: Expectation,
    pub result: Chi2Result,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub violation_rate: f64,
}

/// Tests every independence the graph implies (up to `max_conditioning`) and
/// the marginal dependence of every adjacent observed pair.
pub fn audit_graph_against_data(
    g: &CausalGraph,
    data: &DataTable,
    max_conditioning: usize,
    alpha: f64,
) -> Result<AuditReport> {
    for v in g.variables().iter().filter(|v| v.observed) {
        let i = data.column_index(&v.name).map_err(|_| Error::Invalid(format!("data has no column {}", v.name)))?;
        if !data.columns()[i].is_categorical() {
            return Err(Error::Invalid(format!(
                "column {} is numeric; discretize it first (e.g. --bins)",
                v.name
            )));
        }
    }
    let mut queries: Vec<(Independence, Expectation)> = implied_independencies(g, max_conditioning)
        .into_iter()
        .map(|i| (i, Expectation::Independent))
        .collect();
    for (a, b) in g.edges() {
        if g.variables()[a].observed && g.variables()[b].observed {
            let (x, y) = if g.name(a) <= g.name(b) { (a, b) } else { (b, a) };
            queries.push((
                Independence { x: g.name(x).to_string(), y: g.name(y).to_string(), given: vec![] },
                Expectation::Dependent,
            ));
        }
    }

    let run = |(ind, expected): &(Independence, Expectation)| -> Result<AuditEntry> {
        let given: Vec<&str> = ind.given.iter().map(String::as_str).collect();
        let result = chi2_independence(data, &ind.x, &ind.y, &given, alpha)?;
        let consistent = match expected {
            Expectation::Independent => !result.dependent,
            Expectation::Dependent => result.dependent,
        };
        Ok(AuditEntry {
            x: ind.x.clone(),
            y: ind.y.clone(),
            given: ind.given.clone(),
            expected: *expected,
            result,
            consistent,
        })
    };
    #[cfg(feature = "parallel")]
    let entries: Vec<AuditEntry> = {
        use rayon::prelude::*;
        queries.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let entries: Vec<AuditEntry> = queries.iter().map(run).collect::<Result<_>>()?;

    let violation_rate = if entries.is_empty() {
        0.0
    } else {
        entries.iter().filter(|e| !e.consistent).count() as f64 / entries.len() as f64
    };
    Ok(AuditReport { entries, violation_rate })
}

/// Largest per-cell target counts proportional to the product of the
/// marginals that fit under the observed counts.
pub(crate) fn independent_targets(counts: &[usize], rows: usize, cols: usize) -> Result<Vec<usize>> {
    let n: usize = counts.iter().sum();
    let row_tot: Vec<usize> = (0..rows).map(|r| counts[r * cols..(r + 1) * cols].iter().sum()).collect();
    let col_tot: Vec<usize> = (0..cols).map(|c| (0..rows).map(|r| counts[r * cols + c]).sum()).collect();
    let nf = n as f64;
    let prob = |r: usize, c: usize| (row_tot[r] as f64 / nf) * (col_tot[c] as f64 / nf);
    let mut scale = f64::INFINITY;
    for r in 0..rows {
        for c in 0..cols {
            let p = prob(r, c);
            if p > 0.0 {
                scale = scale.min(counts[r * cols + c] as f64 / p);
            }
        }
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Degenerate(
            "a required cell has no support; no independent subsample exists".into(),
        ));
    }
    let mut targets = vec![0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let t = (scale * prob(r, c) + 1e-9).floor() as usize;
            targets[r * cols + c] = t.min(counts[r * cols + c]);
        }
    }
    if targets.iter().sum::<usize>() == 0 {
        return Err(Error::Degenerate("independent subsample is empty".into()));
    }
    Ok(targets)
}

/// Subsamples rows so that the empirical joint of `(x, y)` equals the product
/// of the original marginals, up to integer rounding. Each cell is thinned
/// uniformly at random with the given seed; row order is preserved.
pub fn enforce_independence(data: &DataTable, x: &str, y: &str, seed: u64) -> Result<DataTable> {
    let (xs, kx) = categorical_column(data, x)?;
    let (ys, ky) = categorical_column(data, y)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); kx * ky];
    for r in 0..data.n_rows() {
        members[xs[r] as usize * ky + ys[r] as usize].push(r);
    }
    let counts: Vec<usize> = members.iter().map(Vec::len).collect();
    let targets = independent_targets(&counts, kx, ky)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for (cell, target) in members.iter_mut().zip(&targets) {
        if *target < cell.len() {
            cell.shuffle(&mut rng);
        }
        keep.extend_from_slice(&cell[..*target]);
    }
    keep.sort_unstable();
    data.select_rows(&keep)
}
