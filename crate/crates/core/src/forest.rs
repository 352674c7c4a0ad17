//! Trees and roots of the hull `H \ D(m; H)`.
//!
//! Step `m` adds the image under `D(m)` of a vertical slit at `S(m)`. Its base
//! `b = D(m)(S(m))` either lies on an earlier branch (the new branch grows out
//! of that tree) or on the real axis (a new root). Roots that coincide within
//! tolerance belong to one tree.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfplane::{slit_root, SlitChain};

/// Default height below which a base point counts as a root.
pub const EPS_ROOT: f64 = 1e-9;
/// Roots closer than this are merged into one tree.
pub const ROOT_MERGE: f64 = 1e-9;

/// Where the branch of a given step starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    NewRoot { x: f64 },
    Branch { at: Complex64, parent: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// Step that created the branch.
    pub step: usize,
    /// Step of the branch it grows from, `None` for branches starting at a root.
    pub parent: Option<usize>,
    pub attach: Complex64,
    pub tip: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub root: f64,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullForest {
    pub n: u32,
    pub steps: usize,
    pub trees: Vec<Tree>,
}

/// Summary of a forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestStats {
    pub tree_count: usize,
    /// Sorted root positions.
    pub root_positions: Vec<f64>,
    /// Gaps between consecutive roots.
    pub root_gaps: Vec<f64>,
    /// Height of the attach point of every branch, in step order.
    pub branch_heights: Vec<f64>,
}

/// Classify step `m >= 1` of the chain: push `S(m)` through
/// `r(S(m-1)), ..., r(S(0))` and record the first slit that lifts it off the
/// real axis.
pub fn classify_step(c: &SlitChain, m: usize, eps_root: f64) -> Result<StepKind> {
    if m == 0 || m >= c.len() {
        return Err(Error::Domain(format!(
            "step {m} needs 1 <= m < {} drivers",
            c.len()
        )));
    }
    let s = c.drivers();
    let h = c.height();
    let mut w = Complex64::new(s[m], 0.0);
    let mut parent = None;
    for j in (0..m).rev() {
        w = s[j] + slit_root(w - s[j], h);
        if parent.is_none() && w.im > eps_root {
            parent = Some(j);
        }
    }
    Ok(match parent {
        Some(p) if w.im > eps_root => StepKind::Branch { at: w, parent: p },
        _ => StepKind::NewRoot { x: w.re },
    })
}

/// Build the forest of a chain, one branch per step.
pub fn build_forest(c: &SlitChain, eps_root: f64) -> Result<HullForest> {
    let mut trees: Vec<Tree> = Vec::new();
    // tree index of each step
    let mut owner: Vec<usize> = Vec::with_capacity(c.len());
    for m in 0..c.len() {
        let tip = c.tip(m);
        let kind = if m == 0 {
            StepKind::NewRoot { x: c.drivers()[0] }
        } else {
            classify_step(c, m, eps_root)?
        };
        let (tree, branch) = match kind {
            StepKind::Branch { at, parent } => (
                owner[parent],
                Branch {
                    step: m,
                    parent: Some(parent),
                    attach: at,
                    tip,
                },
            ),
            StepKind::NewRoot { x } => {
                let existing = trees.iter().position(|t| (t.root - x).abs() <= ROOT_MERGE);
                let idx = existing.unwrap_or_else(|| {
                    trees.push(Tree {
                        root: x,
                        branches: Vec::new(),
                    });
                    trees.len() - 1
                });
                (
                    idx,
                    Branch {
                        step: m,
                        parent: None,
                        attach: Complex64::new(x, 0.0),
                        tip,
                    },
                )
            }
        };
        trees[tree].branches.push(branch);
        owner.push(tree);
    }
    Ok(HullForest {
        n: c.n(),
        steps: c.len(),
        trees,
    })
}

pub fn forest_stats(f: &HullForest) -> ForestStats {
    let mut roots: Vec<f64> = f.trees.iter().map(|t| t.root).collect();
    roots.sort_by(f64::total_cmp);
    let gaps = roots.windows(2).map(|w| w[1] - w[0]).collect();
    let mut branches: Vec<&Branch> = f.trees.iter().flat_map(|t| &t.branches).collect();
    branches.sort_by_key(|b| b.step);
    ForestStats {
        tree_count: f.trees.len(),
        root_positions: roots,
        root_gaps: gaps,
        branch_heights: branches.iter().map(|b| b.attach.im).collect(),
    }
}

impl HullForest {
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }
}
