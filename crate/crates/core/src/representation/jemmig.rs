use crate::binning::{discrete_codes, entropy_of_codes, joint_entropy, mutual_information, quantile_bins};
use crate::error::{Error, Result};
use crate::model::DataTable;

/// Joint entropy minus mutual information gap, reported upward-oriented in
/// `[0, 1]`.
///
/// Per factor `y` with most informative latent `z*` and runner-up `z°`:
/// `raw = H(y, z*) - I(y; z*) + I(y; z°)` in bits, and the factor's score is
/// `(H(y) + log2(bins) - raw) / (H(y) + log2(bins))`, clamped to `[0, 1]`.
/// The result is the mean over factors.
pub fn jemmig(factors: &DataTable, latents: &DataTable, bins: usize) -> Result<f64> {
    super::check_rows(factors, latents)?;
    if latents.n_cols() < 2 {
        return Err(Error::Invalid("JEMMIG needs at least 2 latent dimensions".into()));
    }
    if bins < 2 {
        return Err(Error::Invalid("need at least 2 bins".into()));
    }
    let n = factors.n_rows();
    if n < 10 * bins {
        return Err(Error::Invalid(format!("JEMMIG needs at least {} samples for {bins} bins, got {n}", 10 * bins)));
    }
    let z_codes: Vec<Vec<usize>> = (0..latents.n_cols()).map(|j| quantile_bins(latents.column(j), bins)).collect();
    let log_bins = (bins as f64).log2();
    let mut total = 0.0;
    for k in 0..factors.n_cols() {
        let y = discrete_codes(factors.column(k), bins);
        let mut info: Vec<(usize, f64)> = z_codes.iter().enumerate().map(|(j, z)| (j, mutual_information(&y, z))).collect();
        info.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let (top, top_info) = info[0];
        let runner_up = info[1].1;
        let raw = joint_entropy(&y, &z_codes[top]) - top_info + runner_up;
        let norm = entropy_of_codes(&y) + log_bins;
        total += ((norm - raw) / norm).clamp(0.0, 1.0);
    }
    Ok(total / factors.n_cols() as f64)
}
