//! Group fairness metrics and the four-fifths audit.
//!
//! Binary vectors are `u8` slices holding 0/1. A group vector marks privileged
//! rows with 1; a parallel `mask` excludes rows whose protected value matched
//! neither group predicate. Masked rows never enter a group denominator.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{ensure_binary, ProtectedColumn};
use crate::error::{Error, Result};

/// Four-fifths line.
pub const DEFAULT_AUDIT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Privileged,
    Unprivileged,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Privileged => "privileged",
            Side::Unprivileged => "unprivileged",
        })
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

fn check_inputs(outcomes: &[u8], group: &[u8], mask: &[bool], weights: Option<&[f64]>) -> Result<()> {
    check_len(outcomes.len(), group.len())?;
    check_len(outcomes.len(), mask.len())?;
    if let Some(w) = weights {
        check_len(outcomes.len(), w.len())?;
    }
    ensure_binary(outcomes)?;
    ensure_binary(group)
}

/// Favorable-outcome mass and total mass per group.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct GroupTally {
    n_priv: usize,
    n_unpriv: usize,
    mass_priv: f64,
    mass_unpriv: f64,
    fav_priv: f64,
    fav_unpriv: f64,
}

impl GroupTally {
    fn count(outcomes: &[u8], group: &[u8], mask: &[bool], favorable: u8, weights: Option<&[f64]>) -> Result<Self> {
        check_inputs(outcomes, group, mask, weights)?;
        let mut t = Self::default();
        for i in 0..outcomes.len() {
            if mask[i] {
                continue;
            }
            let w = weights.map_or(1.0, |w| w[i]);
            let fav = if outcomes[i] == favorable { w } else { 0.0 };
            if group[i] == 1 {
                t.n_priv += 1;
                t.mass_priv += w;
                t.fav_priv += fav;
            } else {
                t.n_unpriv += 1;
                t.mass_unpriv += w;
                t.fav_unpriv += fav;
            }
        }
        if t.n_priv == 0 {
            return Err(Error::EmptyGroup(Side::Privileged));
        }
        if t.n_unpriv == 0 {
            return Err(Error::EmptyGroup(Side::Unprivileged));
        }
        Ok(t)
    }

    fn rate_priv(&self) -> f64 {
        self.fav_priv / self.mass_priv
    }

    fn rate_unpriv(&self) -> f64 {
        self.fav_unpriv / self.mass_unpriv
    }
}

/// Ratio of favorable-outcome rates, unprivileged over privileged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisparateImpact {
    /// `+∞` when the privileged rate is zero.
    pub value: f64,
    pub privileged_rate_zero: bool,
    pub rate_priv: f64,
    pub rate_unpriv: f64,
    pub n_priv: usize,
    pub n_unpriv: usize,
}

impl DisparateImpact {
    fn from_tally(t: &GroupTally) -> Self {
        let (rp, ru) = (t.rate_priv(), t.rate_unpriv());
        let zero = rp == 0.0;
        Self {
            value: if zero { f64::INFINITY } else { ru / rp },
            privileged_rate_zero: zero,
            rate_priv: rp,
            rate_unpriv: ru,
            n_priv: t.n_priv,
            n_unpriv: t.n_unpriv,
        }
    }
}

pub fn disparate_impact(outcomes: &[u8], group: &[u8], mask: &[bool], favorable: u8) -> Result<DisparateImpact> {
    weighted_disparate_impact(outcomes, group, mask, favorable, None)
}

/// Same as [`disparate_impact`] with rates computed from summed row weights.
pub fn weighted_disparate_impact(
    outcomes: &[u8],
    group: &[u8],
    mask: &[bool],
    favorable: u8,
    weights: Option<&[f64]>,
) -> Result<DisparateImpact> {
    let tally = GroupTally::count(outcomes, group, mask, favorable, weights)?;
    Ok(DisparateImpact::from_tally(&tally))
}

pub fn di_score(di: f64) -> f64 {
    libm::fabs(1.0 - di)
}

/// Confusion counts (optionally weight-summed) for one group; positive = label 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: f64,
    pub fp: f64,
    pub tn: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl Confusion {
    fn add(&mut self, y: u8, y_hat: u8, w: f64) {
        match (y, y_hat) {
            (1, 1) => self.tp += w,
            (0, 1) => self.fp += w,
            (0, _) => self.tn += w,
            _ => self.fn_ += w,
        }
    }

    fn ratio(num: f64, other: f64, side: Side, rate: &'static str) -> Result<f64> {
        if num + other > 0.0 {
            Ok(num / (num + other))
        } else {
            Err(Error::UndefinedRate { side, rate })
        }
    }

    pub fn tpr(&self, side: Side) -> Result<f64> {
        Self::ratio(self.tp, self.fn_, side, "TPR")
    }

    pub fn fpr(&self, side: Side) -> Result<f64> {
        Self::ratio(self.fp, self.tn, side, "FPR")
    }

    pub fn tnr(&self, side: Side) -> Result<f64> {
        Self::ratio(self.tn, self.fp, side, "TNR")
    }

    pub fn fnr(&self, side: Side) -> Result<f64> {
        Self::ratio(self.fn_, self.tp, side, "FNR")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub privileged: Confusion,
    pub unprivileged: Confusion,
}

pub fn confusion_by_group(
    y: &[u8],
    y_hat: &[u8],
    group: &[u8],
    mask: &[bool],
    weights: Option<&[f64]>,
) -> Result<GroupConfusion> {
    check_len(y.len(), y_hat.len())?;
    check_inputs(y, group, mask, weights)?;
    ensure_binary(y_hat)?;
    let mut c = GroupConfusion::default();
    let (mut n_priv, mut n_unpriv) = (0usize, 0usize);
    for i in 0..y.len() {
        if mask[i] {
            continue;
        }
        let w = weights.map_or(1.0, |w| w[i]);
        if group[i] == 1 {
            n_priv += 1;
            c.privileged.add(y[i], y_hat[i], w);
        } else {
            n_unpriv += 1;
            c.unprivileged.add(y[i], y_hat[i], w);
        }
    }
    if n_priv == 0 {
        return Err(Error::EmptyGroup(Side::Privileged));
    }
    if n_unpriv == 0 {
        return Err(Error::EmptyGroup(Side::Unprivileged));
    }
    Ok(c)
}

pub fn average_odds_difference(c: &GroupConfusion) -> Result<f64> {
    let fpr_gap = c.unprivileged.fpr(Side::Unprivileged)? - c.privileged.fpr(Side::Privileged)?;
    let tpr_gap = c.unprivileged.tpr(Side::Unprivileged)? - c.privileged.tpr(Side::Privileged)?;
    Ok(0.5 * (fpr_gap + tpr_gap))
}

pub fn equal_opportunity_difference(c: &GroupConfusion) -> Result<f64> {
    Ok(c.unprivileged.tpr(Side::Unprivileged)? - c.privileged.tpr(Side::Privileged)?)
}

/// Mean of TPR and TNR over all rows.
pub fn balanced_accuracy(y: &[u8], y_hat: &[u8]) -> Result<f64> {
    check_len(y.len(), y_hat.len())?;
    ensure_binary(y)?;
    ensure_binary(y_hat)?;
    let mut c = Confusion::default();
    for (&a, &b) in y.iter().zip(y_hat) {
        c.add(a, b, 1.0);
    }
    if c.tp + c.fn_ == 0.0 || c.tn + c.fp == 0.0 {
        return Err(Error::SingleClass);
    }
    Ok(0.5 * (c.tp / (c.tp + c.fn_) + c.tn / (c.tn + c.fp)))
}

/// Disparate-impact verdict for one protected attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub spec_name: String,
    pub di: f64,
    pub di_score: f64,
    pub favorable_rate_priv: f64,
    pub favorable_rate_unpriv: f64,
    pub n_priv: usize,
    pub n_unpriv: usize,
    pub biased: bool,
}

/// Biased iff `di < threshold` or `di > 1 / threshold`.
pub fn is_biased(di: f64, threshold: f64) -> bool {
    di < threshold || di > 1.0 / threshold
}

pub fn audit(
    outcomes: &[u8],
    group: &[u8],
    mask: &[bool],
    spec_name: &str,
    favorable: u8,
    threshold: f64,
) -> Result<AuditReport> {
    let di = disparate_impact(outcomes, group, mask, favorable)?;
    Ok(audit_from(spec_name, &di, threshold))
}

fn audit_from(spec_name: &str, di: &DisparateImpact, threshold: f64) -> AuditReport {
    AuditReport {
        spec_name: spec_name.into(),
        di: di.value,
        di_score: di_score(di.value),
        favorable_rate_priv: di.rate_priv,
        favorable_rate_unpriv: di.rate_unpriv,
        n_priv: di.n_priv,
        n_unpriv: di.n_unpriv,
        biased: is_biased(di.value, threshold),
    }
}

/// All prediction-level metrics for one protected attribute.
///
/// Rate-based metrics are `None` when a group lacks the rows to define them
/// (e.g. no positives in a test group).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub spec_name: String,
    pub di: f64,
    pub di_score: f64,
    pub avg_odd: Option<f64>,
    pub eq_opp: Option<f64>,
    pub balanced_acc: Option<f64>,
    pub favorable_rate_priv: f64,
    pub favorable_rate_unpriv: f64,
    pub n_priv: usize,
    pub n_unpriv: usize,
    pub biased: bool,
}

/// Flips a binary vector so that the favorable label becomes 1.
fn orient(v: &[u8], favorable: u8) -> Vec<u8> {
    if favorable == 1 {
        v.to_vec()
    } else {
        v.iter().map(|&x| 1 - x).collect()
    }
}

/// Evaluates predictions against labels for one protected column.
///
/// Error rates treat the column's favorable label as the positive class.
pub fn evaluate(y: &[u8], y_hat: &[u8], protected: &ProtectedColumn, threshold: f64) -> Result<FairnessReport> {
    let fav = protected.favorable_label;
    let di = disparate_impact(y_hat, &protected.values, &protected.missing, fav)?;
    let a = audit_from(&protected.name, &di, threshold);
    let (yo, po) = (orient(y, fav), orient(y_hat, fav));
    let c = confusion_by_group(&yo, &po, &protected.values, &protected.missing, None)?;
    Ok(FairnessReport {
        spec_name: a.spec_name,
        di: a.di,
        di_score: a.di_score,
        avg_odd: average_odds_difference(&c).ok(),
        eq_opp: equal_opportunity_difference(&c).ok(),
        balanced_acc: balanced_accuracy(y, y_hat).ok(),
        favorable_rate_priv: a.favorable_rate_priv,
        favorable_rate_unpriv: a.favorable_rate_unpriv,
        n_priv: a.n_priv,
        n_unpriv: a.n_unpriv,
        biased: a.biased,
    })
}
