//! Calibrated equalized-odds post-processing.
//!
//! The group with the lower generalized error rate has a fraction of its
//! scores replaced by its own base rate until its expected cost matches the
//! other group's.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    /// Mean score over label-0 rows.
    Gfpr,
    /// Mean `1 - score` over label-1 rows.
    Gfnr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqOddsMixer {
    pub cost_kind: CostKind,
    pub target_group: Side,
    pub mix_probability: f64,
    /// The solved probability fell outside [0, 1].
    pub clamped: bool,
    pub base_rate: f64,
    pub cost_priv: f64,
    pub cost_unpriv: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct GroupCosts {
    neg_mass: f64,
    neg_score: f64,
    pos_mass: f64,
    pos_miss: f64,
}

impl GroupCosts {
    fn cost(&self, kind: CostKind) -> f64 {
        match kind {
            CostKind::Gfpr => self.neg_score / self.neg_mass,
            CostKind::Gfnr => self.pos_miss / self.pos_mass,
        }
    }

    fn base_rate(&self) -> f64 {
        self.pos_mass / (self.pos_mass + self.neg_mass)
    }
}

/// Generalized cost of `scores` for one group.
pub fn generalized_cost(
    scores: &[f64],
    y: &[u8],
    group: &[u8],
    mask: &[bool],
    side: Side,
    kind: CostKind,
) -> Result<f64> {
    let costs = tally(scores, y, group, mask, None)?;
    Ok(costs[side_index(side)].cost(kind))
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Unprivileged => 0,
        Side::Privileged => 1,
    }
}

fn tally(scores: &[f64], y: &[u8], group: &[u8], mask: &[bool], weights: Option<&[f64]>) -> Result<[GroupCosts; 2]> {
    let n = scores.len();
    for len in [y.len(), group.len(), mask.len(), weights.map_or(n, <[f64]>::len)] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, found: len });
        }
    }
    let mut c = [GroupCosts::default(); 2];
    for i in 0..n {
        if mask[i] {
            continue;
        }
        let w = weights.map_or(1.0, |w| w[i]);
        let g = &mut c[usize::from(group[i] == 1)];
        if y[i] == 1 {
            g.pos_mass += w;
            g.pos_miss += w * (1.0 - scores[i]);
        } else {
            g.neg_mass += w;
            g.neg_score += w * scores[i];
        }
    }
    for side in [Side::Privileged, Side::Unprivileged] {
        let g = &c[side_index(side)];
        if g.neg_mass <= 0.0 {
            return Err(Error::EmptyCell { side, label: "label 0" });
        }
        if g.pos_mass <= 0.0 {
            return Err(Error::EmptyCell { side, label: "label 1" });
        }
    }
    Ok(c)
}

pub fn fit_mixer(
    scores: &[f64],
    y: &[u8],
    group: &[u8],
    mask: &[bool],
    cost_kind: CostKind,
    weights: Option<&[f64]>,
) -> Result<EqOddsMixer> {
    let c = tally(scores, y, group, mask, weights)?;
    let (unpriv, priv_) = (&c[0], &c[1]);
    let (cost_u, cost_p) = (unpriv.cost(cost_kind), priv_.cost(cost_kind));
    let (target_group, target, other_cost) =
        if cost_p <= cost_u { (Side::Privileged, priv_, cost_u) } else { (Side::Unprivileged, unpriv, cost_p) };
    let target_cost = target.cost(cost_kind);
    let base_rate = target.base_rate();
    let base_cost = match cost_kind {
        CostKind::Gfpr => base_rate,
        CostKind::Gfnr => 1.0 - base_rate,
    };
    let raw = if other_cost == target_cost {
        0.0
    } else if base_cost == target_cost {
        return Err(Error::UnsolvableMixer);
    } else {
        (other_cost - target_cost) / (base_cost - target_cost)
    };
    let mix_probability = raw.clamp(0.0, 1.0);
    Ok(EqOddsMixer {
        cost_kind,
        target_group,
        mix_probability,
        clamped: mix_probability != raw,
        base_rate,
        cost_priv: cost_p,
        cost_unpriv: cost_u,
    })
}

/// Replaces each target-group score by the base rate with the mixing probability.
///
/// Row `i` draws from its own position in the ChaCha stream, so the outcome
/// for a row does not depend on how the other rows are processed.
pub fn apply_mixer(mixer: &EqOddsMixer, scores: &[f64], group: &[u8], mask: &[bool], seed: u64) -> Vec<f64> {
    let target = u8::from(mixer.target_group == Side::Privileged);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    scores
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if mask[i] || group[i] != target {
                return s;
            }
            rng.set_word_pos(2 * i as u128);
            let u: f64 = rng.random();
            if u < mixer.mix_probability {
                mixer.base_rate
            } else {
                s
            }
        })
        .collect()
}
