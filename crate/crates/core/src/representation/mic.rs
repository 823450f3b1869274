//! Maximal and total information coefficients.
//!
//! The characteristic matrix is approximated with the ApproxMaxMI heuristic:
//! one axis is equipartitioned into `l` rows, the other axis is clumped and
//! merged into at most `c * k` superclumps, and a dynamic program picks the
//! best `k`-column partition of those superclumps. Both axis orientations are
//! evaluated and the larger value is kept for every grid shape.

use crate::error::{Error, Result};

/// Grid-size exponent: grids satisfy `k * l <= ceil(n^GRID_EXPONENT)`.
pub const GRID_EXPONENT: f64 = 0.6;
/// Superclump budget per column.
pub const CLUMP_FACTOR: usize = 15;
/// Smallest sample accepted by the estimator.
pub const MIN_SAMPLES: usize = 25;

/// Normalized mutual information for every admissible grid `(columns, rows)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicMatrix {
    pub bound: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CharacteristicMatrix {
    pub fn mic(&self) -> f64 {
        self.entries.iter().map(|e| e.2).fold(0.0, f64::max)
    }

    /// Mean over admissible grids.
    pub fn tic(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.2).sum::<f64>() / self.entries.len() as f64
    }
}

pub fn grid_bound(n: usize) -> usize {
    ((n as f64).powf(GRID_EXPONENT).ceil() as usize).max(4)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("columns have {} and {} rows", x.len(), y.len())));
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::Invalid(format!("need at least {MIN_SAMPLES} samples, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { column: "mic input".into(), row: 0 });
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Characteristic matrix of a pair; `None` when either column is constant.
pub fn characteristic_matrix(x: &[f64], y: &[f64]) -> Result<Option<CharacteristicMatrix>> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        log::warn!("constant column passed to the information coefficient; returning 0");
        return Ok(None);
    }
    let bound = grid_bound(x.len());
    let xy = oriented_mi(x, y, bound);
    let yx = oriented_mi(y, x, bound);
    let mut entries = Vec::new();
    for cols in 2..=bound / 2 {
        for rows in 2..=bound / cols {
            let a = xy.get(cols, rows);
            let b = yx.get(rows, cols);
            let norm = (cols.min(rows) as f64).log2();
            entries.push((cols, rows, (a.max(b) / norm).clamp(0.0, 1.0)));
        }
    }
    Ok(Some(CharacteristicMatrix { bound, entries }))
}

pub fn mic_pair(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(characteristic_matrix(x, y)?.map_or(0.0, |m| m.mic()))
}

pub fn tic_pair(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(characteristic_matrix(x, y)?.map_or(0.0, |m| m.tic()))
}

/// `mi[rows][cols]`: best mutual information (bits) with `x` split into
/// `cols` columns and `y` equipartitioned into `rows` rows.
struct OrientedMi {
    table: Vec<Vec<f64>>,
}

impl OrientedMi {
    fn get(&self, cols: usize, rows: usize) -> f64 {
        self.table.get(rows).and_then(|r| r.get(cols)).copied().unwrap_or(0.0)
    }
}

fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    idx
}

fn oriented_mi(x: &[f64], y: &[f64], bound: usize) -> OrientedMi {
    let n = x.len();
    let by_x = argsort(x);
    let by_y = argsort(y);
    let sorted_y: Vec<f64> = by_y.iter().map(|&i| y[i]).collect();
    let sorted_x: Vec<f64> = by_x.iter().map(|&i| x[i]).collect();
    let nlogn = NLogN::new(n);
    let mut table = vec![Vec::new(); bound / 2 + 1];
    for rows in 2..=bound / 2 {
        let max_cols = bound / rows;
        if max_cols < 2 {
            continue;
        }
        let labels_sorted = equipartition(&sorted_y, rows);
        let mut row_of = vec![0usize; n];
        for (pos, &i) in by_y.iter().enumerate() {
            row_of[i] = labels_sorted[pos];
        }
        let rows_x: Vec<usize> = by_x.iter().map(|&i| row_of[i]).collect();
        let n_rows = rows_x.iter().copied().max().unwrap_or(0) + 1;
        let clumps = superclumps(&sorted_x, &rows_x, CLUMP_FACTOR * max_cols);
        table[rows] = optimize_x_axis(&rows_x, n_rows, &clumps, max_cols, &nlogn);
    }
    OrientedMi { table }
}

/// Splits sorted values into `rows` groups of near-equal size without ever
/// separating tied values. Returns one label per sorted position.
pub(crate) fn equipartition(sorted: &[f64], rows: usize) -> Vec<usize> {
    let n = sorted.len();
    let mut labels = vec![0; n];
    let mut current = 0;
    let mut filled = 0usize;
    let mut desired = n as f64 / rows as f64;
    let mut i = 0;
    while i < n {
        let mut run = 1;
        while i + run < n && sorted[i + run] == sorted[i] {
            run += 1;
        }
        let overshoot = ((filled + run) as f64 - desired).abs();
        if filled != 0 && current + 1 < rows && overshoot >= (filled as f64 - desired).abs() {
            current += 1;
            filled = 0;
            desired = (n - i) as f64 / (rows - current) as f64;
        }
        labels[i..i + run].fill(current);
        i += run;
        filled += run;
    }
    labels
}

/// Boundaries (exclusive end positions, in x order) of the superclumps.
///
/// Clumps are maximal runs of consecutive points sharing a row; points tied
/// on x always end up together, in a clump of their own if their rows differ.
fn superclumps(sorted_x: &[f64], rows_x: &[usize], max_clumps: usize) -> Vec<usize> {
    let n = sorted_x.len();
    let mut tag: Vec<i64> = rows_x.iter().map(|&r| r as i64).collect();
    let mut fresh = -1i64;
    let mut i = 0;
    while i < n {
        let mut run = 1;
        let mut mixed = false;
        while i + run < n && sorted_x[i + run] == sorted_x[i] {
            if tag[i + run] != tag[i] {
                mixed = true;
            }
            run += 1;
        }
        if run > 1 && mixed {
            tag[i..i + run].fill(fresh);
            fresh -= 1;
        }
        i += run;
    }
    let mut clump_id = vec![0usize; n];
    for j in 1..n {
        clump_id[j] = clump_id[j - 1] + usize::from(tag[j] != tag[j - 1]);
    }
    let count = clump_id[n - 1] + 1;
    let ids: Vec<usize> = if count > max_clumps {
        let as_values: Vec<f64> = clump_id.iter().map(|&c| c as f64).collect();
        equipartition(&as_values, max_clumps)
    } else {
        clump_id
    };
    let mut ends = Vec::new();
    for j in 1..n {
        if ids[j] != ids[j - 1] {
            ends.push(j);
        }
    }
    ends.push(n);
    ends
}

struct NLogN(Vec<f64>);

impl NLogN {
    fn new(n: usize) -> Self {
        NLogN((0..=n).map(|c| if c == 0 { 0.0 } else { c as f64 * (c as f64).log2() }).collect())
    }

    #[inline]
    fn get(&self, c: usize) -> f64 {
        self.0[c]
    }
}

/// Dynamic program over superclump boundaries. `f[t][l]` is the largest value
/// of `-H(Q | P)` over partitions `P` of the first `t` superclumps into `l`
/// columns, with entropies weighted by the share of those points. Returns
/// mutual information (bits) indexed by column count.
fn optimize_x_axis(rows_x: &[usize], n_rows: usize, ends: &[usize], max_cols: usize, nlogn: &NLogN) -> Vec<f64> {
    let k = ends.len();
    let n = rows_x.len();
    // cum[t * n_rows + q]: points of row q in the first t superclumps
    let mut cum = vec![0usize; (k + 1) * n_rows];
    let mut start = 0;
    for (t, &end) in ends.iter().enumerate() {
        let (prev, next) = cum.split_at_mut((t + 1) * n_rows);
        next[..n_rows].copy_from_slice(&prev[t * n_rows..]);
        for &r in &rows_x[start..end] {
            next[r] += 1;
        }
        start = end;
    }
    let size = |t: usize| if t == 0 { 0 } else { ends[t - 1] };
    // weighted conditional entropy of rows within the column (s, t]:
    // (c_t - c_s) * H(<s,t>, Q) = m log m - sum_q m_q log m_q
    let col_cost = |s: usize, t: usize| -> f64 {
        let m = size(t) - size(s);
        let mut acc = nlogn.get(m);
        let (a, b) = (&cum[s * n_rows..(s + 1) * n_rows], &cum[t * n_rows..(t + 1) * n_rows]);
        for q in 0..n_rows {
            acc -= nlogn.get(b[q] - a[q]);
        }
        acc
    };
    let cost: Vec<f64> = (0..=k)
        .flat_map(|t| (0..=k).map(move |s| (s, t)))
        .map(|(s, t)| if s < t { col_cost(s, t) } else { 0.0 })
        .collect();
    let cost_at = |s: usize, t: usize| cost[t * (k + 1) + s];

    let h_q = {
        let totals = &cum[k * n_rows..];
        (nlogn.get(n) - totals.iter().map(|&c| nlogn.get(c)).sum::<f64>()) / n as f64
    };

    // g[t] holds c_t * f[t][l] for the current l (unnormalized scores).
    let mut g: Vec<f64> = (0..=k).map(|t| if t == 0 { 0.0 } else { -cost_at(0, t) }).collect();
    let mut mi = vec![0.0; max_cols + 1];
    let mut last = g[k];
    for l in 2..=max_cols {
        if l > k {
            mi[l] = h_q + last / n as f64;
            continue;
        }
        let mut next = vec![f64::NEG_INFINITY; k + 1];
        for t in l..=k {
            let mut best = f64::NEG_INFINITY;
            for s in (l - 1)..t {
                let v = g[s] - cost_at(s, t);
                if v > best {
                    best = v;
                }
            }
            next[t] = best;
        }
        g = next;
        last = g[k];
        mi[l] = h_q + last / n as f64;
    }
    for v in &mut mi {
        *v = v.max(0.0);
    }
    mi
}
