//! Factor-to-latent matching: Kuhn's Hungarian method for the optimum and an
//! exhaustive sweep over all injective assignments.

use serde::Serialize;

use crate::error::{Error, Result};

use super::AssociationMatrix;

/// Largest side accepted by [`permutation_sweep`].
pub const SWEEP_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    /// `assignment[factor] = latent`.
    pub assignment: Vec<usize>,
    pub total: f64,
    pub per_pair: Vec<f64>,
}

impl Matching {
    fn from_assignment(m: &[Vec<f64>], assignment: Vec<usize>) -> Self {
        let per_pair: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| m[i][j]).collect();
        let total = per_pair.iter().sum();
        Matching { assignment, total, per_pair }
    }

    pub fn mean(&self) -> f64 {
        if self.per_pair.is_empty() {
            0.0
        } else {
            self.total / self.per_pair.len() as f64
        }
    }
}

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`)
/// with the shortest augmenting path form of the Hungarian method, O(r² c).
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = cost[0].len();
    // 1-based potentials; column 0 is a virtual source.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

fn best_total(scores: &[Vec<f64>]) -> f64 {
    let cost: Vec<Vec<f64>> = scores.iter().map(|r| r.iter().map(|&s| -s).collect()).collect();
    min_cost_assignment(&cost).iter().enumerate().map(|(i, &j)| scores[i][j]).sum()
}

fn check_values(m: &AssociationMatrix) -> Result<()> {
    if m.rows() > m.cols() {
        return Err(Error::Shape(format!(
            "{} factors cannot be matched injectively to {} latents",
            m.rows(),
            m.cols()
        )));
    }
    if m.values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("association matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Injective factor-to-latent assignment maximizing the summed association.
/// Among optimal assignments (within a relative tolerance of 1e-12) the
/// lexicographically smallest one is returned.
pub fn hungarian_match(m: &AssociationMatrix) -> Result<Matching> {
    check_values(m)?;
    let scores = &m.values;
    let rows = scores.len();
    if rows == 0 {
        return Ok(Matching { assignment: vec![], total: 0.0, per_pair: vec![] });
    }
    let cols = scores[0].len();
    let optimum = best_total(scores);
    let tol = 1e-12 * optimum.abs().max(1.0);

    // Fix rows one at a time to the smallest column that keeps the optimum.
    let mut assignment = Vec::with_capacity(rows);
    let mut used = vec![false; cols];
    let mut fixed_total = 0.0;
    for i in 0..rows {
        let mut chosen = None;
        for j in (0..cols).filter(|&j| !used[j]) {
            let free: Vec<usize> = (0..cols).filter(|&c| !used[c] && c != j).collect();
            let rest: Vec<Vec<f64>> = scores[i + 1..].iter().map(|r| free.iter().map(|&c| r[c]).collect()).collect();
            let total = fixed_total + scores[i][j] + best_total(&rest);
            if total >= optimum - tol {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.expect("some column attains the optimum");
        used[j] = true;
        fixed_total += scores[i][j];
        assignment.push(j);
    }
    Ok(Matching::from_assignment(scores, assignment))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationSweep {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<usize>,
    pub argmax: Vec<usize>,
    pub count: usize,
}

/// Evaluates every injective assignment. Ties keep the lexicographically
/// first assignment.
pub fn permutation_sweep(m: &AssociationMatrix) -> Result<PermutationSweep> {
    check_values(m)?;
    if m.cols() > SWEEP_LIMIT {
        return Err(Error::Invalid(format!(
            "exhaustive sweep limited to {SWEEP_LIMIT} latents, got {}",
            m.cols()
        )));
    }
    let mut sweep = PermutationSweep {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: vec![],
        argmax: vec![],
        count: 0,
    };
    let mut current = Vec::with_capacity(m.rows());
    let mut used = vec![false; m.cols()];
    enumerate(&m.values, &mut current, &mut used, &mut sweep);
    Ok(sweep)
}

fn enumerate(m: &[Vec<f64>], current: &mut Vec<usize>, used: &mut [bool], sweep: &mut PermutationSweep) {
    let i = current.len();
    if i == m.len() {
        // Re-sum in row order so totals match Matching::total bit for bit.
        let total: f64 = current.iter().enumerate().map(|(r, &c)| m[r][c]).sum();
        sweep.count += 1;
        if total < sweep.min {
            sweep.min = total;
            sweep.argmin = current.clone();
        }
        if total > sweep.max {
            sweep.max = total;
            sweep.argmax = current.clone();
        }
        return;
    }
    for j in 0..used.len() {
        if !used[j] {
            used[j] = true;
            current.push(j);
            enumerate(m, current, used, sweep);
            current.pop();
            used[j] = false;
        }
    }
}
