use crate::binning::{discrete_codes, mutual_information, quantile_bins};
use crate::error::{Error, Result};
use crate::model::DataTable;

/// Interventional robustness score.
///
/// Each latent dimension is attributed to the factor it shares the most
/// (binned) information with. Holding that factor at one of its values while
/// every other factor varies, the largest distance of the latent from its
/// conditional mean measures how much the other factors leak in. The score
/// of a dimension is one minus the expected leak over the factor's values,
/// relative to the largest distance from the global mean. Dimensions are
/// averaged with their information with the attributed factor as weight.
pub fn irs(factors: &DataTable, latents: &DataTable, bins: usize) -> Result<f64> {
    super::check_rows(factors, latents)?;
    if bins < 2 {
        return Err(Error::Invalid("need at least 2 bins".into()));
    }
    let n = factors.n_rows();
    if n < 10 * bins {
        return Err(Error::Invalid(format!("IRS needs at least {} samples for {bins} bins, got {n}", 10 * bins)));
    }
    let factor_codes: Vec<Vec<usize>> =
        (0..factors.n_cols()).map(|k| discrete_codes(factors.column(k), bins)).collect();

    let mut weighted = 0.0;
    let mut weight_sum = 0.0;
    let mut plain = Vec::new();
    for j in 0..latents.n_cols() {
        let z = latents.column(j);
        let mean = z.iter().sum::<f64>() / n as f64;
        let global = z.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        if global == 0.0 {
            continue;
        }
        let z_codes = quantile_bins(z, bins);
        let (best, info) = factor_codes
            .iter()
            .enumerate()
            .map(|(k, c)| (k, mutual_information(c, &z_codes)))
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let codes = &factor_codes[best];
        let groups = codes.iter().copied().max().unwrap_or(0) + 1;
        let mut sums = vec![0.0; groups];
        let mut counts = vec![0usize; groups];
        for (&c, &v) in codes.iter().zip(z) {
            sums[c] += v;
            counts[c] += 1;
        }
        let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
        let mut worst = vec![0.0f64; groups];
        for (&c, &v) in codes.iter().zip(z) {
            worst[c] = worst[c].max((v - means[c]).abs());
        }
        let expected: f64 = worst.iter().zip(&counts).map(|(w, &c)| w * c as f64).sum::<f64>() / n as f64;
        let score = (1.0 - expected / global).clamp(0.0, 1.0);
        weighted += info * score;
        weight_sum += info;
        plain.push(score);
    }
    if plain.is_empty() {
        log::warn!("every latent dimension is constant; IRS defined as 1");
        return Ok(1.0);
    }
    if weight_sum > 0.0 {
        Ok(weighted / weight_sum)
    } else {
        Ok(plain.iter().sum::<f64>() / plain.len() as f64)
    }
}
