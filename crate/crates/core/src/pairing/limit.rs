//! The limit current `Gamma_inf` and its pairing with test forms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forms::TestForm;
use crate::correspondence::{BranchTree, Correspondence, TreeMode};
use crate::error::Result;
use crate::measure::{equilibrium_from_cloud, fs_random_point, Direction, WeightedPointCloud};
use crate::point::C64;
use crate::quadrature::SphereGrid;

/// `pi_1^* nu_1 + pi_2^* nu_2`; either part may be absent.
#[derive(Clone, Debug, Default)]
pub struct LimitCurrent {
    /// Pulled back by the first projection: pairs with the `b` component.
    pub source_measure: Option<WeightedPointCloud>,
    /// Pulled back by the second projection: pairs with the `a` component.
    pub target_measure: Option<WeightedPointCloud>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LimitOptions {
    /// Depth of the full tree grown from each seed.
    pub depth: usize,
    /// Number of Fubini-Study random starting points.
    pub seeds: usize,
    /// Random branch steps taken from each starting point before the full tree.
    pub warmup: usize,
    pub seed: u64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { depth: 12, seeds: 1, warmup: 64, seed: 7 }
    }
}

impl LimitCurrent {
    /// Equilibrium estimates for `Gamma_inf`: `pi_1^* mu` when `d1 < d2`,
    /// `pi_2^* mu` when `d1 > d2`, `pi_1^* mu+ + pi_2^* mu-` when balanced.
    pub fn estimate(f: &Correspondence, opts: &LimitOptions) -> Result<Self> {
        let cloud = |dir: Direction, salt: u64| -> Result<WeightedPointCloud> {
            let start = warm_start(f, dir, opts, salt)?;
            equilibrium_from_cloud(f, &start, opts.depth, TreeMode::Full, dir)
        };
        let (d1, d2) = (f.d1(), f.d2());
        Ok(LimitCurrent {
            source_measure: if d1 <= d2 { Some(cloud(Direction::Backward, 1)?) } else { None },
            target_measure: if d1 >= d2 { Some(cloud(Direction::Forward, 2)?) } else { None },
        })
    }
}

/// `opts.seeds` points, each pushed `opts.warmup` random steps along `dir`.
fn warm_start(f: &Correspondence, dir: Direction, opts: &LimitOptions, salt: u64) -> Result<WeightedPointCloud> {
    let g = dir.oriented(f);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(31).wrapping_add(salt));
    let mut pts = Vec::with_capacity(opts.seeds);
    for i in 0..opts.seeds {
        let p = fs_random_point(&mut rng);
        if opts.warmup == 0 {
            pts.push(p);
            continue;
        }
        let mode = TreeMode::Sampled { paths: 1, seed: opts.seed ^ (i as u64 + 1).wrapping_mul(0x2545_F491_4F6C_DD1D) };
        let tree = BranchTree::build(&g, p, opts.warmup, mode)?;
        pts.push(tree.leaves().next().expect("one path").point);
    }
    Ok(WeightedPointCloud::uniform(pts))
}

/// `<Gamma_inf, beta>` from fiber integrals at the atoms.
pub fn pair_limit_current(limit: &LimitCurrent, form: &dyn TestForm, grid: &SphereGrid) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    if let Some(nu) = &limit.source_measure {
        let v: Vec<C64> = nu
            .atoms()
            .par_iter()
            .zip(nu.weights().par_iter())
            .map(|(x, &w)| form.vertical_fiber_integral(x, grid) * w)
            .collect();
        total += v.into_iter().sum::<C64>();
    }
    if let Some(nu) = &limit.target_measure {
        let v: Vec<C64> = nu
            .atoms()
            .par_iter()
            .zip(nu.weights().par_iter())
            .map(|(y, &w)| form.horizontal_fiber_integral(y, grid) * w)
            .collect();
        total += v.into_iter().sum::<C64>();
    }
    total
}
