//! Newton boosting of regression trees on the logistic loss.
//!
//! Splits are exact and greedy: every midpoint between consecutive distinct
//! feature values present in a node is a candidate. Internally each feature's
//! distinct values are enumerated once into bins, which loses nothing because
//! a bin holds exactly one value; empty bins are skipped so thresholds are
//! always midpoints of values the node actually contains.
//!
//! Gradient and hessian sums go through [`ExactSum`] so the model does not
//! depend on summation order.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{Node, Tree};
use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus, ExactSum};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbmHyper {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_leaf_penalty: f64,
    pub min_child_weight: f64,
}

impl Default for GbmHyper {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 3, learning_rate: 0.1, l2_leaf_penalty: 1.0, min_child_weight: 1.0 }
    }
}

impl GbmHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidHyper("learning_rate must be in (0, 1]"));
        }
        if !(self.l2_leaf_penalty >= 0.0 && self.l2_leaf_penalty.is_finite()) {
            return Err(Error::InvalidHyper("l2_leaf_penalty must be >= 0"));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(Error::InvalidHyper("min_child_weight must be >= 0"));
        }
        if self.max_depth > 24 {
            return Err(Error::InvalidHyper("max_depth must be <= 24"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub n_features: usize,
    pub hyper: GbmHyper,
    pub trees: Vec<Tree>,
    /// Weighted training log-loss before the first tree and after each one.
    pub round_losses: Vec<f64>,
}

impl GbmModel {
    /// Raw margins: `base + lr * v_1 + lr * v_2 + ...`, accumulated in tree order.
    pub fn predict_margins(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, found: x.n_cols() });
        }
        let rows = x.to_rows();
        Ok((0..x.n_rows())
            .map(|r| {
                let row = rows.row(r);
                self.trees.iter().fold(self.base_score, |f, t| f + self.learning_rate * t.predict_row(row))
            })
            .collect())
    }

    pub fn predict_scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self.predict_margins(x)?.into_iter().map(sigmoid).collect())
    }
}

/// `Σ w_i [softplus(F_i) - y_i F_i]`.
pub fn weighted_log_loss(margins: &[f64], y: &[u8], w: &[f64]) -> f64 {
    margins.iter().zip(y).zip(w).map(|((&f, &y), &w)| w * (softplus(f) - f64::from(y) * f)).sum()
}

/// Distinct values of one feature and the bin of each stored entry.
struct FeatureBins {
    values: Vec<f64>,
    zero_bin: Option<usize>,
    entry_bins: Vec<u32>,
}

impl FeatureBins {
    fn build(x: &FeatureMatrix) -> Vec<Self> {
        x.columns()
            .iter()
            .map(|col| {
                let mut values: Vec<f64> = col.values().to_vec();
                if col.nnz() < x.n_rows() {
                    values.push(0.0);
                }
                values.sort_by(f64::total_cmp);
                values.dedup();
                let find = |v: f64| values.binary_search_by(|p| p.total_cmp(&v)).expect("value present");
                let zero_bin = (col.nnz() < x.n_rows()).then(|| find(0.0));
                let entry_bins = col.values().iter().map(|&v| find(v) as u32).collect();
                Self { values, zero_bin, entry_bins }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    g: ExactSum,
    h: ExactSum,
    count: usize,
}

impl Stats {
    fn add(&mut self, other: &Stats) {
        self.g.add_sum(&other.g);
        self.h.add_sum(&other.h);
        self.count += other.count;
    }

    fn minus(&self, other: &Stats) -> Stats {
        let mut out = *self;
        out.g.sub_sum(&other.g);
        out.h.sub_sum(&other.h);
        out.count -= other.count;
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    left: Stats,
}

struct Grower<'a> {
    x: &'a FeatureMatrix,
    bins: &'a [FeatureBins],
    lambda: f64,
    min_child_weight: f64,
    max_depth: usize,
}

impl Grower<'_> {
    fn leaf_value(&self, s: &Stats) -> f64 {
        let denom = s.h.value() + self.lambda;
        if denom > 0.0 {
            -s.g.value() / denom
        } else {
            0.0
        }
    }

    fn score(&self, g: f64, h: f64) -> Option<f64> {
        let denom = h + self.lambda;
        (denom > 0.0).then(|| g * g / denom)
    }

    /// Grows one tree; returns it and each row's leaf node index.
    fn grow(&self, row_g: &[ExactSum], row_h: &[ExactSum]) -> (Tree, Vec<u32>) {
        let n = row_g.len();
        let mut node_of = vec![0u32; n];
        let mut root = Stats::default();
        for i in 0..n {
            root.g.add_sum(&row_g[i]);
            root.h.add_sum(&row_h[i]);
        }
        root.count = n;

        let mut nodes = vec![Node::Leaf(0.0)];
        let mut node_stats = vec![root];
        let mut active: Vec<u32> = vec![0];

        for _depth in 0..self.max_depth {
            if active.is_empty() {
                break;
            }
            let mut slot_of = vec![u32::MAX; nodes.len()];
            for (s, &id) in active.iter().enumerate() {
                slot_of[id as usize] = s as u32;
            }
            let totals: Vec<Stats> = active.iter().map(|&id| node_stats[id as usize]).collect();
            let mut best: Vec<Option<Candidate>> = vec![None; active.len()];
            let mut hist: Vec<Stats> = Vec::new();

            for (feature, fb) in self.bins.iter().enumerate() {
                let nb = fb.values.len();
                hist.clear();
                hist.resize(active.len() * nb, Stats::default());
                let col = self.x.column(feature);
                for (k, &r) in col.rows().iter().enumerate() {
                    let slot = slot_of[node_of[r as usize] as usize];
                    if slot == u32::MAX {
                        continue;
                    }
                    let cell = &mut hist[slot as usize * nb + fb.entry_bins[k] as usize];
                    cell.g.add_sum(&row_g[r as usize]);
                    cell.h.add_sum(&row_h[r as usize]);
                    cell.count += 1;
                }
                for (slot, total) in totals.iter().enumerate() {
                    let h = &mut hist[slot * nb..(slot + 1) * nb];
                    if let Some(z) = fb.zero_bin {
                        let mut stored = Stats::default();
                        for (b, cell) in h.iter().enumerate() {
                            if b != z {
                                stored.add(cell);
                            }
                        }
                        h[z] = total.minus(&stored);
                    }
                    self.scan(feature, &fb.values, h, total, &mut best[slot]);
                }
            }

            let before = node_of.clone();
            let mut next = Vec::new();
            let mut split_of: Vec<Option<(usize, f64, u32, u32)>> = vec![None; nodes.len()];
            for (slot, &id) in active.iter().enumerate() {
                let Some(c) = best[slot] else { continue };
                let right = totals[slot].minus(&c.left);
                let (l, r) = (nodes.len() as u32, nodes.len() as u32 + 1);
                nodes[id as usize] = Node::Split(c.feature as u32, c.threshold, l, r);
                nodes.push(Node::Leaf(0.0));
                nodes.push(Node::Leaf(0.0));
                node_stats.push(c.left);
                node_stats.push(right);
                split_of[id as usize] = Some((c.feature, c.threshold, l, r));
                next.push(l);
                next.push(r);
            }
            for id in node_of.iter_mut() {
                if let Some((_, t, l, r)) = split_of[*id as usize] {
                    *id = if 0.0 < t { l } else { r };
                }
            }
            for (parent, split) in split_of.iter().enumerate() {
                let Some((f, t, l, r)) = *split else { continue };
                let col = self.x.column(f);
                for (row, v) in col.iter() {
                    if before[row] as usize == parent {
                        node_of[row] = if v < t { l } else { r };
                    }
                }
            }
            active = next;
        }

        for (id, node) in nodes.iter_mut().enumerate() {
            if let Node::Leaf(v) = node {
                *v = self.leaf_value(&node_stats[id]);
            }
        }
        (Tree { nodes }, node_of)
    }

    fn scan(&self, feature: usize, values: &[f64], hist: &[Stats], total: &Stats, best: &mut Option<Candidate>) {
        let (g_all, h_all) = (total.g.value(), total.h.value());
        let Some(parent) = self.score(g_all, h_all) else { return };
        let mut left = Stats::default();
        let mut prev: Option<usize> = None;
        for (b, cell) in hist.iter().enumerate() {
            if cell.count == 0 {
                continue;
            }
            if let Some(p) = prev {
                let right = total.minus(&left);
                let (gl, hl) = (left.g.value(), left.h.value());
                let (gr, hr) = (right.g.value(), right.h.value());
                if hl >= self.min_child_weight && hr >= self.min_child_weight {
                    if let (Some(sl), Some(sr)) = (self.score(gl, hl), self.score(gr, hr)) {
                        let gain = 0.5 * (sl + sr - parent);
                        if gain > 0.0 && best.map_or(true, |c| gain > c.gain) {
                            let mut threshold = values[p] / 2.0 + values[b] / 2.0;
                            // adjacent doubles: the midpoint can round down onto the lower value
                            if threshold <= values[p] {
                                threshold = values[b];
                            }
                            *best = Some(Candidate { gain, feature, threshold, left });
                        }
                    }
                }
            }
            left.add(cell);
            prev = Some(b);
        }
    }
}

/// Split gain for given child sums: `½[GL²/(HL+λ) + GR²/(HR+λ) − G²/(H+λ)]`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> f64 {
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - (gl + gr) * (gl + gr) / (hl + hr + lambda))
}

pub fn train_gbm(data: &EncodedDataset, hyper: &GbmHyper) -> Result<GbmModel> {
    hyper.validate()?;
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some((row, feature)) = data.features.first_non_finite() {
        return Err(Error::NonFiniteFeature { row, feature });
    }
    let (mut pos, mut neg) = (ExactSum::ZERO, ExactSum::ZERO);
    for (&y, &w) in data.labels.iter().zip(&data.weights) {
        if y == 1 {
            pos.add(w);
        } else {
            neg.add(w);
        }
    }
    if pos.value() <= 0.0 || neg.value() <= 0.0 {
        return Err(Error::SingleClass);
    }
    let base_score = libm::log(pos.value() / neg.value());

    let bins = FeatureBins::build(&data.features);
    let grower = Grower {
        x: &data.features,
        bins: &bins,
        lambda: hyper.l2_leaf_penalty,
        min_child_weight: hyper.min_child_weight,
        max_depth: hyper.max_depth,
    };

    let mut margins = vec![base_score; n];
    let mut round_losses = vec![weighted_log_loss(&margins, &data.labels, &data.weights)];
    let mut trees = Vec::with_capacity(hyper.n_trees);
    let mut row_g = vec![ExactSum::ZERO; n];
    let mut row_h = vec![ExactSum::ZERO; n];
    for _ in 0..hyper.n_trees {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            let w = data.weights[i];
            row_g[i] = ExactSum::ZERO;
            row_g[i].add_product(w, p - f64::from(data.labels[i]));
            row_h[i] = ExactSum::ZERO;
            row_h[i].add_product(w, p * (1.0 - p));
        }
        let (tree, leaf_of) = grower.grow(&row_g, &row_h);
        for i in 0..n {
            if let Node::Leaf(v) = tree.nodes[leaf_of[i] as usize] {
                margins[i] += hyper.learning_rate * v;
            }
        }
        round_losses.push(weighted_log_loss(&margins, &data.labels, &data.weights));
        trees.push(tree);
    }
    Ok(GbmModel {
        base_score,
        learning_rate: hyper.learning_rate,
        n_features: data.n_features(),
        hyper: *hyper,
        trees,
        round_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(rows: &[Vec<f64>], labels: &[u8]) -> EncodedDataset {
        EncodedDataset::new(FeatureMatrix::from_rows(rows).unwrap(), labels.to_vec(), vec![]).unwrap()
    }

    #[test]
    fn gain_spot_check() {
        assert_eq!(split_gain(-2.0, 1.0, 2.0, 1.0, 0.0), 4.0);
    }

    #[test]
    fn no_trees_predicts_base_rate() {
        let d = dataset(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]], &[0, 1, 0, 1]);
        let m = train_gbm(&d, &GbmHyper { n_trees: 0, ..Default::default() }).unwrap();
        assert_eq!(m.base_score, 0.0);
        assert_eq!(m.predict_scores(&d.features).unwrap(), vec![0.5; 4]);
    }

    #[test]
    fn stump_separates_perfectly() {
        // feature 0 separates; feature 1 is noise
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 1.0]];
        let d = dataset(&rows, &[0, 0, 1, 1]);
        let h = GbmHyper { n_trees: 1, max_depth: 1, learning_rate: 1.0, l2_leaf_penalty: 0.0, min_child_weight: 0.0 };
        let m = train_gbm(&d, &h).unwrap();
        match m.trees[0].nodes[..] {
            [Node::Split(0, t, 1, 2), Node::Leaf(l), Node::Leaf(r)] => {
                assert_eq!(t, 1.5);
                assert!(l < 0.0 && r > 0.0);
            }
            ref other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn hand_built_stump_scores() {
        let m = GbmModel {
            base_score: 0.0,
            learning_rate: 1.0,
            n_features: 1,
            hyper: GbmHyper::default(),
            trees: vec![Tree { nodes: vec![Node::Split(0, 0.5, 1, 2), Node::Leaf(-1.0), Node::Leaf(1.0)] }],
            round_losses: vec![],
        };
        let s = m.predict_scores(&FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap()).unwrap();
        assert!((s[0] - 0.268_941_421_369_995_1).abs() < 1e-12);
        assert!((s[1] - 0.731_058_578_630_004_9).abs() < 1e-12);
    }

    #[test]
    fn tie_break_prefers_lowest_feature() {
        // features 0 and 1 are identical perfect separators
        let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        let d = dataset(&rows, &[0, 0, 1, 1]);
        let h = GbmHyper { n_trees: 1, max_depth: 1, min_child_weight: 0.0, ..Default::default() };
        let m = train_gbm(&d, &h).unwrap();
        assert!(matches!(m.trees[0].nodes[0], Node::Split(0, _, _, _)));
    }

    #[test]
    fn min_child_weight_blocks_split() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let d = dataset(&rows, &[0, 0, 1, 1]);
        let h = GbmHyper { n_trees: 1, max_depth: 2, min_child_weight: 10.0, ..Default::default() };
        let m = train_gbm(&d, &h).unwrap();
        assert_eq!(m.trees[0].nodes.len(), 1);
    }

    #[test]
    fn depth_respected_and_loss_decreases() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![f64::from(i % 7), f64::from(i % 5), f64::from(i)]).collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from((i * 7 + 3) % 11 < 5)).collect();
        let d = dataset(&rows, &labels);
        let m = train_gbm(&d, &GbmHyper { n_trees: 20, max_depth: 3, ..Default::default() }).unwrap();
        for t in &m.trees {
            assert!(t.depth().unwrap() <= 3);
        }
        for w in m.round_losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn errors() {
        let d = dataset(&[vec![0.0], vec![1.0]], &[1, 1]);
        assert_eq!(train_gbm(&d, &GbmHyper::default()).unwrap_err(), Error::SingleClass);
        let d = dataset(&[vec![f64::NAN], vec![1.0]], &[0, 1]);
        assert_eq!(train_gbm(&d, &GbmHyper::default()).unwrap_err(), Error::NonFiniteFeature { row: 0, feature: 0 });
        let d = dataset(&[vec![0.0], vec![1.0]], &[0, 1]);
        let m = train_gbm(&d, &GbmHyper { n_trees: 1, ..Default::default() }).unwrap();
        assert!(m.predict_scores(&FeatureMatrix::zeros(1, 2)).is_err());
    }
}
