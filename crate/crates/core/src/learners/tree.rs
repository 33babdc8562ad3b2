use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::RowRef;

/// Serialized untagged: `[feature, threshold, left, right]` for a split, a bare
/// number for a leaf. Rows go left iff `x[feature] < threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split(u32, f64, u32, u32),
    Leaf(f64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self { nodes: alloc::vec![Node::Leaf(value)] }
    }

    pub fn predict_row(&self, row: RowRef<'_>) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split(f, t, l, r) => at = if row.get(f as usize) < t { l as usize } else { r as usize },
            }
        }
    }

    /// Longest root-to-leaf path in edges, or `None` if the node graph is not
    /// a tree rooted at 0 (cycle, shared child, dangling index).
    pub fn depth(&self) -> Option<usize> {
        let mut seen = alloc::vec![false; self.nodes.len()];
        let mut stack = alloc::vec![(0usize, 0usize)];
        let mut deepest = 0;
        while let Some((at, d)) = stack.pop() {
            if at >= self.nodes.len() || seen[at] {
                return None;
            }
            seen[at] = true;
            deepest = deepest.max(d);
            if let Node::Split(_, _, l, r) = self.nodes[at] {
                stack.push((l as usize, d + 1));
                stack.push((r as usize, d + 1));
            }
        }
        seen.iter().all(|&s| s).then_some(deepest)
    }
}
