//! Pairing of normalized graph currents `d2^-n [Gamma_n]` with test forms.
//!
//! The integral over the graph is split by component: the `a` part is
//! integrated over the source sphere along forward branches, the `b` part over
//! the target sphere along backward branches, and the `c`/`e` (and any
//! `(2,0)`/`(0,2)`) parts over the side with more branches, where the branch
//! derivatives are contracting. Each split is an instance of the covering
//! identity for one projection.

use serde::{Serialize, Serializer};

use super::forms::{FormCoefficients, Parameter, SharedForm};
use crate::correspondence::{BranchTree, Correspondence, IterateBudget, TreeMode};
use crate::error::{Error, Result};
use crate::point::{fs_density, Point, C64};
use crate::quadrature::{GridNode, SphereGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Fibers of the symbolic iterate `f^n`.
    Symbolic,
    /// Orbit trees of `f` and its adjoint.
    Tree(TreeMode),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairingEstimate {
    pub value: C64,
    /// Zero for deterministic strategies.
    pub standard_error: f64,
}

impl Serialize for PairingEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.value.re, self.value.im, self.standard_error).serialize(s)
    }
}

/// Side that carries the mixed components.
pub fn mixed_side(f: &Correspondence) -> Parameter {
    if f.d2() >= f.d1() {
        Parameter::Target
    } else {
        Parameter::Source
    }
}

fn select(c: FormCoefficients, side: Parameter, mixed: Parameter) -> FormCoefficients {
    let zero = C64::new(0.0, 0.0);
    let keep_mixed = side == mixed;
    FormCoefficients {
        a: if side == Parameter::Source { c.a } else { zero },
        b: if side == Parameter::Target { c.b } else { zero },
        c: if keep_mixed { c.c } else { zero },
        e: if keep_mixed { c.e } else { zero },
        p: if keep_mixed { c.p } else { zero },
        q: if keep_mixed { c.q } else { zero },
    }
}

struct Leaf {
    point: Point,
    weight: f64,
    derivative: Option<C64>,
}

enum Branches {
    Symbolic { forward: Correspondence, backward: Correspondence },
    Tree { forward: Correspondence, backward: Correspondence, mode: TreeMode, depth: usize },
}

impl Branches {
    /// Leaves per level from `root`, oriented by `side`.
    fn leaves(&self, side: Parameter, root: Point, node_index: usize) -> Result<Vec<Vec<Leaf>>> {
        match self {
            Branches::Symbolic { forward, backward } => {
                let g = if side == Parameter::Source { forward } else { backward };
                let rs = g.forward_fiber(&root)?;
                Ok(vec![rs
                    .clusters
                    .iter()
                    .map(|c| Leaf {
                        point: c.point,
                        weight: c.multiplicity as f64,
                        derivative: g.branch_derivative(&root, &c.point, c.multiplicity),
                    })
                    .collect()])
            }
            Branches::Tree { forward, backward, mode, depth } => {
                let g = if side == Parameter::Source { forward } else { backward };
                let mode = match *mode {
                    TreeMode::Full => TreeMode::Full,
                    TreeMode::Sampled { paths, seed } => TreeMode::Sampled {
                        paths,
                        seed: seed
                            ^ (node_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                            ^ if side == Parameter::Source { 0 } else { 0xD1B5_4A32_D192_ED03 },
                    },
                };
                let tree = BranchTree::build(g, root, *depth, mode)?;
                Ok((1..=*depth)
                    .map(|l| {
                        tree.level(l)
                            .map(|n| Leaf { point: n.point, weight: n.weight, derivative: n.path_derivative })
                            .collect()
                    })
                    .collect())
            }
        }
    }

    fn sampled_paths(&self) -> Option<usize> {
        match self {
            Branches::Tree { mode: TreeMode::Sampled { paths, .. }, .. } => Some(*paths),
            _ => None,
        }
    }
}

/// Per-level, per-form estimates together with the number of re-jittered nodes.
#[derive(Clone, Debug)]
pub struct LevelPairings {
    /// `levels[k][j]`: level `first_level + k`, form `j`.
    pub levels: Vec<Vec<PairingEstimate>>,
    pub first_level: usize,
    pub jittered_nodes: usize,
}

const JITTER: f64 = 1e-7;
const MAX_JITTER_ATTEMPTS: usize = 6;

/// `<d2^-n [Gamma_n], beta>` for every form.
pub fn pair_graph_current(
    f: &Correspondence,
    n: usize,
    forms: &[SharedForm],
    strategy: &Strategy,
    grid: &SphereGrid,
) -> Result<Vec<PairingEstimate>> {
    if n == 0 {
        return Err(Error::invalid("iterate order must be positive"));
    }
    let lv = match strategy {
        Strategy::Symbolic => pair_symbolic(f, n, forms, grid)?,
        Strategy::Tree(mode) => pair_graph_current_levels(f, n, forms, *mode, grid)?,
    };
    Ok(lv.levels.last().cloned().unwrap_or_default())
}

pub fn pair_symbolic(f: &Correspondence, n: usize, forms: &[SharedForm], grid: &SphereGrid) -> Result<LevelPairings> {
    let g = f.iterate(n as u32, &IterateBudget::default())?;
    let branches = Branches::Symbolic { backward: g.adjoint(), forward: g };
    integrate(f, &branches, n, 1, forms, grid)
}

/// Tree strategy for all levels `1..=n_max` in one pass.
pub fn pair_graph_current_levels(
    f: &Correspondence,
    n_max: usize,
    forms: &[SharedForm],
    mode: TreeMode,
    grid: &SphereGrid,
) -> Result<LevelPairings> {
    if let TreeMode::Sampled { paths, .. } = mode {
        if paths < 2 {
            return Err(Error::invalid("sampled pairing needs at least two paths for its standard error"));
        }
    }
    let branches = Branches::Tree { forward: f.clone(), backward: f.adjoint(), mode, depth: n_max };
    integrate(f, &branches, 1, n_max, forms, grid)
}

struct NodeResult {
    /// `[level][form] -> (value, variance)`
    vals: Vec<Vec<(C64, f64)>>,
    jittered: bool,
}

fn integrate(
    f: &Correspondence,
    branches: &Branches,
    first_level: usize,
    level_count: usize,
    forms: &[SharedForm],
    grid: &SphereGrid,
) -> Result<LevelPairings> {
    let mixed = mixed_side(f);
    let needs_derivative = forms.iter().any(|fm| fm.has_mixed());
    let nodes: Vec<(usize, GridNode)> = grid.nodes().iter().copied().enumerate().collect();
    let per_node: Vec<Result<NodeResult>> = {
        use rayon::prelude::*;
        nodes
            .par_iter()
            .map(|(idx, node)| {
                let mut attempt = 0;
                loop {
                    let root = if attempt == 0 {
                        node.point
                    } else {
                        let dir = C64::from_polar(JITTER * attempt as f64, 1.3 * attempt as f64);
                        Point::from_chart(node.chart, node.local + dir)
                    };
                    match eval_node(branches, root, *idx, node.weight, level_count, forms, mixed, needs_derivative) {
                        Ok(vals) => return Ok(NodeResult { vals, jittered: attempt > 0 }),
                        Err(e) if attempt + 1 >= MAX_JITTER_ATTEMPTS => return Err(e),
                        Err(_) => attempt += 1,
                    }
                }
            })
            .collect()
    };
    let mut sums = vec![vec![(C64::new(0.0, 0.0), 0.0f64); forms.len()]; level_count];
    let mut jittered = 0;
    for r in per_node {
        let r = r?;
        jittered += r.jittered as usize;
        for (acc_l, v_l) in sums.iter_mut().zip(r.vals) {
            for (acc, v) in acc_l.iter_mut().zip(v_l) {
                acc.0 += v.0;
                acc.1 += v.1;
            }
        }
    }
    let d2 = f.d2() as f64;
    let levels = sums
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let norm = d2.powi((first_level + k) as i32);
            row.into_iter()
                .map(|(v, var)| PairingEstimate { value: v / norm, standard_error: var.sqrt() / norm })
                .collect()
        })
        .collect();
    Ok(LevelPairings { levels, first_level, jittered_nodes: jittered })
}

#[allow(clippy::too_many_arguments)]
fn eval_node(
    branches: &Branches,
    root: Point,
    idx: usize,
    weight: f64,
    level_count: usize,
    forms: &[SharedForm],
    mixed: Parameter,
    needs_derivative: bool,
) -> Result<Vec<Vec<(C64, f64)>>> {
    let (rc, rl) = root.local();
    let factor = weight / fs_density(rl);
    let paths = branches.sampled_paths();
    let mut out = vec![vec![(C64::new(0.0, 0.0), 0.0f64); forms.len()]; level_count];
    for side in [Parameter::Source, Parameter::Target] {
        let levels = branches.leaves(side, root, idx)?;
        let need_s = needs_derivative && side == mixed;
        for (l, leaves) in levels.iter().enumerate() {
            if need_s && leaves.iter().any(|lf| lf.derivative.is_none()) {
                return Err(Error::Ramification);
            }
            for (j, form) in forms.iter().enumerate() {
                let mut total = C64::new(0.0, 0.0);
                let mut samples = Vec::new();
                for lf in leaves {
                    let (lc, _) = lf.point.local();
                    let (x, cx, y, cy) = match side {
                        Parameter::Source => (&root, rc, &lf.point, lc),
                        Parameter::Target => (&lf.point, lc, &root, rc),
                    };
                    let coeffs = select(form.coefficients(x, cx, y, cy), side, mixed);
                    let s = lf.derivative.unwrap_or_default();
                    let v = coeffs.pullback_density(s, side) * lf.weight * factor;
                    total += v;
                    if paths.is_some() {
                        samples.push(v);
                    }
                }
                let var = match paths {
                    Some(k) if samples.len() == k && k > 1 => {
                        // each path alone is an unbiased estimate of k * (its share)
                        let kk = k as f64;
                        let mean = total;
                        let ss: f64 = samples.iter().map(|v| (*v * kk - mean).norm_sqr()).sum();
                        ss / (kk - 1.0) / kk
                    }
                    _ => 0.0,
                };
                out[l][j].0 += total;
                out[l][j].1 += var;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;
    use std::sync::Arc;

    use super::*;
    use crate::correspondence::builtin;
    use crate::pairing::forms::ProductKahlerForm;

    #[test]
    fn mass_of_square_graph() {
        let f = builtin("square").unwrap();
        let grid = SphereGrid::square(24).unwrap();
        let forms: Vec<SharedForm> = vec![Arc::new(ProductKahlerForm)];
        let lv = pair_graph_current_levels(&f, 4, &forms, TreeMode::Full, &grid).unwrap();
        for (k, row) in lv.levels.iter().enumerate() {
            let n = (k + 1) as i32;
            let expect = (1.0 + 2f64.powi(n)) / (FRAC_1_SQRT_2.recip() * 2f64.powi(n));
            assert!((row[0].value.re - expect).abs() < 1e-12, "{n}: {}", row[0].value);
        }
    }
}
