//! Forward orbit trees with branch derivatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Correspondence;
use crate::error::{Error, Result};
use crate::point::{chart_jacobian, Chart, Point, C64};

/// Largest number of leaves a full tree may have.
pub const MAX_FULL_LEAVES: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeMode {
    Full,
    /// `paths` independent uniformly chosen branch paths.
    Sampled { paths: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub point: Point,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Mass carried by the node. Full trees: number of paths through it counted
    /// with multiplicity. Sampled trees: `d1^depth / paths`.
    pub weight: f64,
    /// Multiplicity of `point` in the image of its parent.
    pub multiplicity: usize,
    /// `d(point)/d(parent)` in the preferred charts of both; `None` if undefined.
    pub edge_derivative: Option<C64>,
    /// `d(point)/d(root)` in preferred charts along the path.
    pub path_derivative: Option<C64>,
}

#[derive(Clone, Debug)]
pub struct BranchTree {
    pub nodes: Vec<TreeNode>,
    pub depth: usize,
    pub mode: TreeMode,
    /// Node indices per depth.
    levels: Vec<Vec<usize>>,
}

impl BranchTree {
    pub fn build(f: &Correspondence, x0: Point, depth: usize, mode: TreeMode) -> Result<Self> {
        let root = TreeNode {
            point: x0,
            parent: None,
            depth: 0,
            weight: 1.0,
            multiplicity: 1,
            edge_derivative: None,
            path_derivative: Some(C64::new(1.0, 0.0)),
        };
        let mut tree = BranchTree { nodes: vec![root], depth, mode, levels: vec![vec![0]] };
        match mode {
            TreeMode::Full => tree.grow_full(f)?,
            TreeMode::Sampled { paths, seed } => {
                if paths == 0 {
                    return Err(Error::invalid("sampled tree needs at least one path"));
                }
                tree.grow_sampled(f, paths, seed)?
            }
        }
        Ok(tree)
    }

    fn grow_full(&mut self, f: &Correspondence) -> Result<()> {
        let leaves = (f.d1() as u64).checked_pow(self.depth as u32).unwrap_or(u64::MAX);
        if leaves > MAX_FULL_LEAVES {
            return Err(Error::DegreeCap { what: "full tree leaves d1^n", value: leaves, cap: MAX_FULL_LEAVES });
        }
        for level in 1..=self.depth {
            let mut next = Vec::new();
            for &pi in &self.levels[level - 1].clone() {
                let parent = self.nodes[pi].clone();
                let fiber = f.forward_fiber(&parent.point)?;
                for cl in fiber.clusters {
                    let idx = self.push_child(f, pi, &parent, cl.point, cl.multiplicity, parent.weight * cl.multiplicity as f64);
                    next.push(idx);
                }
            }
            self.levels.push(next);
        }
        Ok(())
    }

    fn grow_sampled(&mut self, f: &Correspondence, paths: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = f.d1() as f64;
        self.levels.extend((0..self.depth).map(|_| Vec::with_capacity(paths)));
        for _ in 0..paths {
            let mut pi = 0;
            for level in 1..=self.depth {
                let parent = self.nodes[pi].clone();
                let fiber = f.forward_fiber(&parent.point)?;
                // uniform over the d1 branches counted with multiplicity
                let mut pick = rng.random_range(0..fiber.total_multiplicity());
                let cl = fiber
                    .clusters
                    .iter()
                    .find(|c| {
                        if pick < c.multiplicity {
                            true
                        } else {
                            pick -= c.multiplicity;
                            false
                        }
                    })
                    .expect("pick within total multiplicity");
                let w = d.powi(level as i32) / paths as f64;
                pi = self.push_child(f, pi, &parent, cl.point, cl.multiplicity, w);
                self.levels[level].push(pi);
            }
        }
        Ok(())
    }

    fn push_child(
        &mut self,
        f: &Correspondence,
        parent_idx: usize,
        parent: &TreeNode,
        point: Point,
        multiplicity: usize,
        weight: f64,
    ) -> usize {
        let edge = f.branch_derivative(&parent.point, &point, multiplicity);
        let path = match (edge, parent.path_derivative) {
            (Some(e), Some(p)) => Some(e * p),
            _ => None,
        };
        self.nodes.push(TreeNode {
            point,
            parent: Some(parent_idx),
            depth: parent.depth + 1,
            weight,
            multiplicity,
            edge_derivative: edge,
            path_derivative: path,
        });
        self.nodes.len() - 1
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Nodes at the given depth.
    pub fn level(&self, depth: usize) -> impl Iterator<Item = &TreeNode> {
        self.levels[depth].iter().map(move |&i| &self.nodes[i])
    }

    pub fn level_indices(&self, depth: usize) -> &[usize] {
        &self.levels[depth]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.level(self.depth)
    }

    /// Total weight at the deepest level, `d1^n` up to rounding in both modes.
    pub fn leaf_weight(&self) -> f64 {
        self.leaves().map(|n| n.weight).sum()
    }

    /// Node indices from the root to `idx`.
    pub fn path(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![idx];
        let mut cur = idx;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Edge derivative of node `idx` converted to affine coordinates (chart 0 on
    /// both sides). `None` if undefined or either endpoint is at infinity.
    pub fn edge_affine_derivative(&self, idx: usize) -> Option<C64> {
        let node = &self.nodes[idx];
        let parent = &self.nodes[node.parent?];
        to_affine(node.edge_derivative?, &parent.point, &node.point)
    }

    /// Path derivative of node `idx` from the root, in affine coordinates.
    pub fn path_affine_derivative(&self, idx: usize) -> Option<C64> {
        let node = &self.nodes[idx];
        to_affine(node.path_derivative?, &self.nodes[0].point, &node.point)
    }
}

/// Converts `d(y local)/d(x local)` from preferred charts to chart 0.
pub fn to_affine(d: C64, x: &Point, y: &Point) -> Option<C64> {
    if x.is_infinity() || y.is_infinity() {
        return None;
    }
    let jx = chart_jacobian(x, Chart::Zero, x.chart());
    let jy = chart_jacobian(y, y.chart(), Chart::Zero);
    Some(jy * d * jx)
}
