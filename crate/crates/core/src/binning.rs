//! Equal-frequency discretization and plug-in information measures over
//! discrete codes.

use std::collections::HashMap;

use crate::error::Result;
use crate::model::{DataTable, VariableSpec};

/// Equal-frequency bin codes in `0..bins`. Tied values share a bin (the bin
/// of their first sorted position), so codes only depend on ranks and are
/// unchanged by any strictly increasing transform of the input.
pub fn quantile_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut codes = vec![0; n];
    let mut pos = 0;
    while pos < n {
        let v = values[order[pos]];
        let code = pos * bins / n;
        let mut end = pos;
        while end < n && values[order[end]] == v {
            codes[order[end]] = code;
            end += 1;
        }
        pos = end;
    }
    codes
}

/// Bins every numeric column of a table; categorical columns pass through.
pub fn discretize_table(table: &DataTable, bins: usize) -> Result<DataTable> {
    let mut specs = Vec::with_capacity(table.n_cols());
    let mut data = Vec::with_capacity(table.n_cols());
    for (i, spec) in table.columns().iter().enumerate() {
        if spec.is_categorical() {
            specs.push(spec.clone());
            data.push(table.column(i).to_vec());
        } else {
            let mut s = VariableSpec::categorical(spec.name.clone(), bins.max(2));
            s.observed = spec.observed;
            specs.push(s);
            data.push(quantile_bins(table.column(i), bins).into_iter().map(|c| c as f64).collect());
        }
    }
    DataTable::new(specs, data)
}

/// Codes of a column that already holds small non-negative integers, or its
/// quantile bins otherwise.
pub fn discrete_codes(values: &[f64], bins: usize) -> Vec<usize> {
    let integral = values.iter().all(|&v| v >= 0.0 && v.fract() == 0.0);
    if integral {
        let mut distinct: Vec<i64> = values.iter().map(|&v| v as i64).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() <= bins {
            let index: HashMap<i64, usize> = distinct.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            return values.iter().map(|&v| index[&(v as i64)]).collect();
        }
    }
    quantile_bins(values, bins)
}

/// Shannon entropy in bits of a count vector.
pub fn entropy_bits(counts: impl IntoIterator<Item = usize>) -> f64 {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn histogram(codes: &[usize]) -> Vec<usize> {
    let k = codes.iter().copied().max().map_or(0, |m| m + 1);
    let mut h = vec![0; k];
    for &c in codes {
        h[c] += 1;
    }
    h
}

pub fn entropy_of_codes(codes: &[usize]) -> f64 {
    entropy_bits(histogram(codes))
}

/// Joint entropy H(a, b) in bits.
pub fn joint_entropy(a: &[usize], b: &[usize]) -> f64 {
    let kb = b.iter().copied().max().map_or(0, |m| m + 1);
    let joint: Vec<usize> = a.iter().zip(b).map(|(&x, &y)| x * kb + y).collect();
    entropy_of_codes(&joint)
}

/// Plug-in mutual information in bits.
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    (entropy_of_codes(a) + entropy_of_codes(b) - joint_entropy(a, b)).max(0.0)
}
