//! Discrete measures on P1 and the push-forward / pull-back operators.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correspondence::{BranchTree, Correspondence, TreeMode, MAX_FULL_LEAVES};
use crate::error::{Error, Result};
use crate::point::{Point, C64};
use crate::quadrature::{point_at, SphereGrid};

/// Clouds larger than this are compacted after each operator step.
pub const COMPACTION_THRESHOLD: usize = 1_000_000;
/// Chordal radius used when merging atoms.
pub const COMPACTION_RADIUS: f64 = 1e-9;

#[derive(Clone, Debug, Default)]
pub struct WeightedPointCloud {
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

impl WeightedPointCloud {
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::invalid("atoms and weights differ in length"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::invalid(format!("invalid weight {w}")));
        }
        Ok(WeightedPointCloud { atoms, weights })
    }

    pub fn dirac(p: Point) -> Self {
        WeightedPointCloud { atoms: vec![p], weights: vec![1.0] }
    }

    /// Equal weights summing to one.
    pub fn uniform(atoms: Vec<Point>) -> Self {
        let w = 1.0 / atoms.len().max(1) as f64;
        let weights = vec![w; atoms.len()];
        WeightedPointCloud { atoms, weights }
    }

    /// `count` independent Fubini-Study distributed atoms of mass `1/count`.
    pub fn fubini_study_sample(count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::uniform((0..count).map(|_| fs_random_point(&mut rng)).collect())
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for w in &mut self.weights {
            *w *= c;
        }
        self
    }

    pub fn push(&mut self, p: Point, w: f64) {
        self.atoms.push(p);
        self.weights.push(w);
    }

    /// Merges atoms within `radius` (chordal), summing weights. Keeps the first
    /// atom of each group, so the result is deterministic.
    pub fn compact(&self, radius: f64) -> Self {
        let cell = radius.max(f64::MIN_POSITIVE);
        let key = |p: &Point| {
            let s = p.sphere_coords();
            [
                (s[0] / cell).floor() as i64,
                (s[1] / cell).floor() as i64,
                (s[2] / cell).floor() as i64,
            ]
        };
        let mut map: HashMap<[i64; 3], usize> = HashMap::new();
        let mut out = WeightedPointCloud::default();
        for (p, w) in self.iter() {
            let k = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(&i) = map.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                            if out.atoms[i].chordal_distance(p) <= radius {
                                found = Some(i);
                                break 'search;
                            }
                        }
                    }
                }
            }
            match found {
                Some(i) => out.weights[i] += w,
                None => {
                    map.insert(k, out.atoms.len());
                    out.push(*p, w);
                }
            }
        }
        out
    }

    fn maybe_compact(self) -> Self {
        if self.len() > COMPACTION_THRESHOLD {
            self.compact(COMPACTION_RADIUS)
        } else {
            self
        }
    }

    /// `sum w z^k` over finite atoms for `k = 1..=kmax`.
    pub fn moments(&self, kmax: u32) -> Vec<C64> {
        (1..=kmax)
            .map(|k| {
                self.iter()
                    .filter_map(|(p, w)| p.affine_value().map(|z| z.powu(k) * w))
                    .sum()
            })
            .collect()
    }

    /// JSON object `{ "1": [re, im], ... }`.
    pub fn moments_json(&self, kmax: u32) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .moments(kmax)
            .into_iter()
            .enumerate()
            .map(|(i, m)| ((i + 1).to_string(), serde_json::json!([m.re, m.im])))
            .collect();
        serde_json::Value::Object(map)
    }

    /// CSV with header `re,im,weight,chart`; coordinates are in the atom's chart.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,weight,chart\n");
        for (p, w) in self.iter() {
            let (c, z) = p.local();
            writeln!(s, "{:.17e},{:.17e},{:.17e},{}", z.re, z.im, w, c.index()).unwrap();
        }
        s
    }
}

/// A Fubini-Study distributed random point.
pub fn fs_random_point<R: Rng + ?Sized>(rng: &mut R) -> Point {
    let u: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    point_at(u, phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    C0,
    C1,
    C2,
}

type Evaluator = Arc<dyn Fn(&Point) -> C64 + Send + Sync>;

/// A chart-aware function on P1.
#[derive(Clone)]
pub struct ScalarTestFunction {
    eval: Evaluator,
    pub smoothness: Smoothness,
    /// Sup-norm bound, or the C1 norm estimate for C1/C2 functions.
    pub norm_bound: f64,
}

impl std::fmt::Debug for ScalarTestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarTestFunction")
            .field("smoothness", &self.smoothness)
            .field("norm_bound", &self.norm_bound)
            .finish()
    }
}

impl ScalarTestFunction {
    /// Wraps `f`; for C1/C2 functions the norm bound is `c1_norm_estimate`.
    pub fn new(f: impl Fn(&Point) -> C64 + Send + Sync + 'static, smoothness: Smoothness) -> Self {
        let mut s = ScalarTestFunction { eval: Arc::new(f), smoothness, norm_bound: 0.0 };
        s.norm_bound = match smoothness {
            Smoothness::C0 => s.sup_estimate(),
            _ => s.c1_norm_estimate(),
        };
        s
    }

    pub fn constant(c: C64) -> Self {
        ScalarTestFunction { eval: Arc::new(move |_| c), smoothness: Smoothness::C2, norm_bound: c.norm() }
    }

    pub fn eval(&self, p: &Point) -> C64 {
        (self.eval)(p)
    }

    fn sample_grid() -> SphereGrid {
        SphereGrid::new(32, 32).expect("fixed grid")
    }

    fn sup_estimate(&self) -> f64 {
        Self::sample_grid().nodes().iter().map(|n| self.eval(&n.point).norm()).fold(0.0, f64::max)
    }

    /// `sup|f| + sup|df|` with the gradient measured in the chordal metric
    /// `|dz| / (1 + |z|^2)`, by central differences on a 1024-point sample.
    pub fn c1_norm_estimate(&self) -> f64 {
        let h = 1e-5;
        let mut sup = 0.0f64;
        let mut grad = 0.0f64;
        for n in Self::sample_grid().nodes() {
            let at = |d: C64| self.eval(&Point::from_chart(n.chart, n.local + d));
            sup = sup.max(self.eval(&n.point).norm());
            let dx = (at(C64::new(h, 0.0)) - at(C64::new(-h, 0.0))) / (2.0 * h);
            let dy = (at(C64::new(0.0, h)) - at(C64::new(0.0, -h))) / (2.0 * h);
            let g = (dx.norm_sqr() + dy.norm_sqr()).sqrt() * (1.0 + n.local.norm_sqr());
            grad = grad.max(g);
        }
        sup + grad
    }
}

/// `f_* nu`: each atom is replaced by its `d1` images; mass multiplies by `d1`.
pub fn pushforward_measure(f: &Correspondence, nu: &WeightedPointCloud) -> Result<WeightedPointCloud> {
    transport(nu, |p| f.forward_fiber(p))
}

/// `f^* nu`: each atom is replaced by its `d2` preimages; mass multiplies by `d2`.
pub fn pullback_measure(f: &Correspondence, nu: &WeightedPointCloud) -> Result<WeightedPointCloud> {
    transport(nu, |p| f.backward_fiber(p))
}

fn transport<F>(nu: &WeightedPointCloud, fiber: F) -> Result<WeightedPointCloud>
where
    F: Fn(&Point) -> Result<crate::poly::RootSet> + Sync,
{
    let parts: Vec<Result<Vec<(Point, f64)>>> = nu
        .atoms
        .par_iter()
        .zip(nu.weights.par_iter())
        .map(|(p, &w)| {
            let rs = fiber(p)?;
            Ok(rs.clusters.iter().map(|c| (c.point, w * c.multiplicity as f64)).collect())
        })
        .collect();
    let mut out = WeightedPointCloud::default();
    for part in parts {
        for (p, w) in part? {
            out.push(p, w);
        }
    }
    Ok(out.maybe_compact())
}

/// `(f_* psi)(y) = sum of psi over the d2 preimages of y`.
pub fn pushforward_function(f: &Correspondence, psi: &ScalarTestFunction) -> ScalarTestFunction {
    let g = f.clone();
    let inner = psi.clone();
    let bound = psi.norm_bound * f.d2() as f64;
    ScalarTestFunction {
        eval: Arc::new(move |y| sum_over(&g.backward_fiber(y), &inner)),
        smoothness: Smoothness::C0,
        norm_bound: bound,
    }
}

/// `(f^* psi)(x) = sum of psi over the d1 images of x`.
pub fn pullback_function(f: &Correspondence, psi: &ScalarTestFunction) -> ScalarTestFunction {
    let g = f.clone();
    let inner = psi.clone();
    let bound = psi.norm_bound * f.d1() as f64;
    ScalarTestFunction {
        eval: Arc::new(move |x| sum_over(&g.forward_fiber(x), &inner)),
        smoothness: Smoothness::C0,
        norm_bound: bound,
    }
}

fn sum_over(fiber: &Result<crate::poly::RootSet>, psi: &ScalarTestFunction) -> C64 {
    match fiber {
        Ok(rs) => rs.clusters.iter().map(|c| psi.eval(&c.point) * c.multiplicity as f64).sum(),
        Err(_) => C64::new(f64::NAN, f64::NAN),
    }
}

/// `<nu, psi> = sum w psi(z)`, summed in atom order.
pub fn pair_measure_function(nu: &WeightedPointCloud, psi: &ScalarTestFunction) -> C64 {
    let vals: Vec<C64> = nu.atoms.par_iter().zip(nu.weights.par_iter()).map(|(p, &w)| psi.eval(p) * w).collect();
    vals.into_iter().sum()
}

/// Which equilibrium measure to estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Normalized pull-backs: `mu` when `d1 < d2`, `mu+` when balanced.
    Backward,
    /// Normalized push-forwards: `mu` when `d1 > d2`, `mu-` when balanced.
    Forward,
}

impl Direction {
    /// The correspondence whose forward images realize this direction.
    pub fn oriented(self, f: &Correspondence) -> Correspondence {
        match self {
            Direction::Backward => f.adjoint(),
            Direction::Forward => f.clone(),
        }
    }

    /// Degree of one step in this direction.
    pub fn degree(self, f: &Correspondence) -> usize {
        match self {
            Direction::Backward => f.d2(),
            Direction::Forward => f.d1(),
        }
    }
}

/// `d^-n (f^n)^* delta_seed` (or the forward analogue) as a probability cloud.
/// Sampled mode draws `paths` uniform branch paths of weight `1/paths` each.
pub fn equilibrium_measure(
    f: &Correspondence,
    seed: Point,
    depth: usize,
    mode: TreeMode,
    direction: Direction,
) -> Result<WeightedPointCloud> {
    equilibrium_from_cloud(f, &WeightedPointCloud::dirac(seed), depth, mode, direction)
}

/// Normalized transport of an initial probability cloud.
pub fn equilibrium_from_cloud(
    f: &Correspondence,
    start: &WeightedPointCloud,
    depth: usize,
    mode: TreeMode,
    direction: Direction,
) -> Result<WeightedPointCloud> {
    let g = direction.oriented(f);
    let d = direction.degree(f) as f64;
    match mode {
        TreeMode::Full => {
            let leaves = (g.d1() as u64).checked_pow(depth as u32).unwrap_or(u64::MAX);
            let total = leaves.saturating_mul(start.len() as u64);
            if total > MAX_FULL_LEAVES {
                return Err(Error::DegreeCap { what: "full cloud atoms", value: total, cap: MAX_FULL_LEAVES });
            }
            let mut cloud = start.clone();
            for _ in 0..depth {
                cloud = pushforward_measure(&g, &cloud)?.scaled(1.0 / d);
            }
            Ok(cloud)
        }
        TreeMode::Sampled { paths, seed } => {
            let parts: Vec<Result<WeightedPointCloud>> = start
                .atoms
                .par_iter()
                .zip(start.weights.par_iter())
                .enumerate()
                .map(|(i, (p, &w))| {
                    let mode = TreeMode::Sampled { paths, seed: seed.wrapping_add(i as u64) };
                    let tree = BranchTree::build(&g, *p, depth, mode)?;
                    let mut c = WeightedPointCloud::default();
                    for leaf in tree.leaves() {
                        c.push(leaf.point, w / paths as f64);
                    }
                    Ok(c)
                })
                .collect();
            let mut out = WeightedPointCloud::default();
            for part in parts {
                let part = part?;
                out.atoms.extend(part.atoms);
                out.weights.extend(part.weights);
            }
            Ok(out)
        }
    }
}

/// Draws a Fubini-Study random seed at chordal distance at least `min_distance`
/// from every point in `exclude`.
pub fn generic_seed(seed: u64, exclude: &[Point], min_distance: f64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p = fs_random_point(&mut rng);
        if exclude.iter().all(|e| e.chordal_distance(&p) >= min_distance) {
            return p;
        }
    }
}

/// `<mu, d^-1 f_* psi> - <mu, psi>` for a backward estimate (or the forward
/// analogue with `f^*`). Vanishes for an invariant measure.
pub fn invariance_defect(
    f: &Correspondence,
    mu: &WeightedPointCloud,
    psi: &ScalarTestFunction,
    direction: Direction,
) -> C64 {
    let d = direction.degree(f) as f64;
    let moved = match direction {
        Direction::Backward => pushforward_function(f, psi),
        Direction::Forward => pullback_function(f, psi),
    };
    pair_measure_function(mu, &moved) / d - pair_measure_function(mu, psi)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeviationRow {
    pub n: usize,
    pub deviation: f64,
}

/// `int |d^-n (f^n)_* psi - <mu, psi>| omega` for `n = 1..=n_max`, where
/// `d = d2`, `(f^n)_*` sums over the backward tree and `mu` is the backward
/// equilibrium estimate supplied by the caller.
pub fn l1_equidistribution_check(
    f: &Correspondence,
    psi: &ScalarTestFunction,
    mu: &WeightedPointCloud,
    n_max: usize,
    grid: &SphereGrid,
) -> Result<Vec<DeviationRow>> {
    let target = pair_measure_function(mu, psi);
    let g = f.adjoint();
    let d = f.d2() as f64;
    let per_node: Vec<Result<Vec<f64>>> = grid.map(|node| {
        let tree = BranchTree::build(&g, node.point, n_max, TreeMode::Full)?;
        Ok((1..=n_max)
            .map(|n| {
                let s: C64 = tree.level(n).map(|t| psi.eval(&t.point) * t.weight).sum();
                (s / d.powi(n as i32) - target).norm() * node.weight
            })
            .collect())
    });
    let mut dev = vec![0.0; n_max];
    for row in per_node {
        for (acc, v) in dev.iter_mut().zip(row?) {
            *acc += v;
        }
    }
    Ok(dev.into_iter().enumerate().map(|(i, deviation)| DeviationRow { n: i + 1, deviation }).collect())
}
