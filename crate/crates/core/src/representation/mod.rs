//! Disentanglement metrics computed from a factors table and a latents table:
//! MIC, TIC, IRS, JEMMIG and DCI, plus factor/latent matching.

mod assignment;
mod dci;
mod irs;
mod jemmig;
pub mod mic;

use serde::{Deserialize, Serialize};

pub use assignment::{hungarian_match, permutation_sweep, Matching, PermutationSweep, SWEEP_LIMIT};
pub use dci::{dci, DciScores};
pub use irs::irs;
pub use jemmig::jemmig;
pub use mic::{mic_pair, tic_pair};

use crate::error::{Error, Result};
use crate::model::DataTable;

/// Default number of equal-frequency bins for IRS and JEMMIG.
pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMetric {
    Mic,
    Tic,
}

impl PairMetric {
    pub fn name(self) -> &'static str {
        match self {
            PairMetric::Mic => "mic",
            PairMetric::Tic => "tic",
        }
    }

}

/// Rows are factors, columns latent dimensions, entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationMatrix {
    pub metric: String,
    pub values: Vec<Vec<f64>>,
}

impl AssociationMatrix {
    pub fn new(metric: impl Into<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let width = values.first().map_or(0, Vec::len);
        if values.iter().any(|r| r.len() != width) {
            return Err(Error::Shape("association matrix rows differ in length".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
            return Err(Error::Invalid("association entries must lie in [0, 1]".into()));
        }
        Ok(AssociationMatrix { metric: metric.into(), values })
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

fn check_rows(factors: &DataTable, latents: &DataTable) -> Result<()> {
    if factors.n_rows() != latents.n_rows() {
        return Err(Error::Shape(format!(
            "factors have {} rows, latents {}",
            factors.n_rows(),
            latents.n_rows()
        )));
    }
    Ok(())
}

/// Characteristic matrices of every (factor, latent) pair, row-major.
fn characteristic_grid(factors: &DataTable, latents: &DataTable) -> Result<Vec<Option<mic::CharacteristicMatrix>>> {
    check_rows(factors, latents)?;
    let pairs: Vec<(usize, usize)> =
        (0..factors.n_cols()).flat_map(|i| (0..latents.n_cols()).map(move |j| (i, j))).collect();
    let eval = |&(i, j): &(usize, usize)| mic::characteristic_matrix(factors.column(i), latents.column(j));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pairs.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    pairs.iter().map(eval).collect()
}

fn to_matrix(grid: &[Option<mic::CharacteristicMatrix>], cols: usize, metric: PairMetric) -> Result<AssociationMatrix> {
    let flat: Vec<f64> = grid
        .iter()
        .map(|m| {
            m.as_ref().map_or(0.0, |m| match metric {
                PairMetric::Mic => m.mic(),
                PairMetric::Tic => m.tic(),
            })
        })
        .collect();
    let values = if cols == 0 { Vec::new() } else { flat.chunks(cols).map(<[f64]>::to_vec).collect() };
    AssociationMatrix::new(metric.name(), values)
}

/// Pairwise association of every factor with every latent dimension.
/// Categorical factors enter through their integer codes.
pub fn association_matrix(factors: &DataTable, latents: &DataTable, metric: PairMetric) -> Result<AssociationMatrix> {
    let grid = characteristic_grid(factors, latents)?;
    to_matrix(&grid, latents.n_cols(), metric)
}

/// MIC and TIC matrices from a single pass over the pairs.
pub fn association_matrices(factors: &DataTable, latents: &DataTable) -> Result<(AssociationMatrix, AssociationMatrix)> {
    let grid = characteristic_grid(factors, latents)?;
    Ok((to_matrix(&grid, latents.n_cols(), PairMetric::Mic)?, to_matrix(&grid, latents.n_cols(), PairMetric::Tic)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub bins: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { bins: DEFAULT_BINS, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisentanglementScores {
    pub mic: f64,
    pub tic: f64,
    pub irs: f64,
    pub jemmig: f64,
    pub dci_d: f64,
    pub dci_c: f64,
    pub dci_i: f64,
}

impl DisentanglementScores {
    /// Components in a fixed order with their names.
    pub fn components(&self) -> [(&'static str, f64); 7] {
        [
            ("mic", self.mic),
            ("tic", self.tic),
            ("irs", self.irs),
            ("jemmig", self.jemmig),
            ("dci_d", self.dci_d),
            ("dci_c", self.dci_c),
            ("dci_i", self.dci_i),
        ]
    }
}

/// The full suite. MIC and TIC are the means of the Hungarian-matched
/// entries of their association matrices.
pub fn disentanglement_suite(factors: &DataTable, latents: &DataTable, config: &SuiteConfig) -> Result<DisentanglementScores> {
    check_rows(factors, latents)?;
    let (mic_m, tic_m) = association_matrices(factors, latents)?;
    let mic = hungarian_match(&mic_m)?.mean();
    let tic = hungarian_match(&tic_m)?.mean();
    let irs = irs(factors, latents, config.bins)?;
    let jemmig = jemmig(factors, latents, config.bins)?;
    let d = dci(factors, latents, config.seed)?;
    Ok(DisentanglementScores { mic, tic, irs, jemmig, dci_d: d.disentanglement, dci_c: d.completeness, dci_i: d.informativeness })
}
