//! Reweighing: per-(group, label) weights making group and label independent.
//!
//! Each cell gets `expected / observed = (n_g * n_y) / (n * n_gy)`, where the
//! counts are sums of the current row weights over unmasked rows. Applying the
//! weights multiplies each row's weight by its cell factor; with unit input
//! weights this is a plain replacement.

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::fairness::Side;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweighingWeights {
    pub spec_name: String,
    pub favorable_label: u8,
    pub w_priv_fav: f64,
    pub w_priv_unfav: f64,
    pub w_unpriv_fav: f64,
    pub w_unpriv_unfav: f64,
    pub n_priv_fav: f64,
    pub n_priv_unfav: f64,
    pub n_unpriv_fav: f64,
    pub n_unpriv_unfav: f64,
    pub n_priv: f64,
    pub n_unpriv: f64,
    pub n_fav: f64,
    pub n_unfav: f64,
    pub n: f64,
}

impl ReweighingWeights {
    pub fn weight(&self, privileged: bool, favorable: bool) -> f64 {
        match (privileged, favorable) {
            (true, true) => self.w_priv_fav,
            (true, false) => self.w_priv_unfav,
            (false, true) => self.w_unpriv_fav,
            (false, false) => self.w_unpriv_unfav,
        }
    }

    pub fn is_identity(&self) -> bool {
        [self.w_priv_fav, self.w_priv_unfav, self.w_unpriv_fav, self.w_unpriv_unfav]
            .iter()
            .all(|&w| w == 1.0)
    }
}

pub fn compute_weights(train: &EncodedDataset, spec_name: &str) -> Result<ReweighingWeights> {
    let p = train.protected(spec_name)?;
    let fav = p.favorable_label;
    let mut cell = [[0.0f64; 2]; 2]; // [privileged][favorable]
    for i in 0..train.n_rows() {
        if p.missing[i] {
            continue;
        }
        let g = usize::from(p.values[i] == 1);
        let y = usize::from(train.labels[i] == fav);
        cell[g][y] += train.weights[i];
    }
    for (g, side) in [(1, Side::Privileged), (0, Side::Unprivileged)] {
        for (y, label) in [(1, "favorable"), (0, "unfavorable")] {
            if cell[g][y] <= 0.0 {
                return Err(Error::EmptyCell { side, label });
            }
        }
    }
    let n_priv = cell[1][1] + cell[1][0];
    let n_unpriv = cell[0][1] + cell[0][0];
    let n_fav = cell[1][1] + cell[0][1];
    let n_unfav = cell[1][0] + cell[0][0];
    let n = n_priv + n_unpriv;
    let w = |ng: f64, ny: f64, ngy: f64| (ng * ny) / (n * ngy);
    Ok(ReweighingWeights {
        spec_name: spec_name.into(),
        favorable_label: fav,
        w_priv_fav: w(n_priv, n_fav, cell[1][1]),
        w_priv_unfav: w(n_priv, n_unfav, cell[1][0]),
        w_unpriv_fav: w(n_unpriv, n_fav, cell[0][1]),
        w_unpriv_unfav: w(n_unpriv, n_unfav, cell[0][0]),
        n_priv_fav: cell[1][1],
        n_priv_unfav: cell[1][0],
        n_unpriv_fav: cell[0][1],
        n_unpriv_unfav: cell[0][0],
        n_priv,
        n_unpriv,
        n_fav,
        n_unfav,
        n,
    })
}

/// Returns `train` with every unmasked row's weight scaled by its cell factor.
pub fn apply_weights(train: &EncodedDataset, rw: &ReweighingWeights) -> Result<EncodedDataset> {
    let p = train.protected(&rw.spec_name)?;
    if p.favorable_label != rw.favorable_label {
        return Err(Error::InvalidConfig(format!(
            "reweighing for `{}` was computed with favorable label {}, dataset uses {}",
            rw.spec_name, rw.favorable_label, p.favorable_label
        )));
    }
    let mut out = train.clone();
    for i in 0..out.n_rows() {
        if p.missing[i] {
            continue;
        }
        out.weights[i] *= rw.weight(p.values[i] == 1, out.labels[i] == rw.favorable_label);
    }
    Ok(out)
}
